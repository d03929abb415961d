"""Entry point of python -m dyndist."""
import sys

from .cli import main

sys.exit(main())
