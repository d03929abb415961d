"""Simple test script to run a problem file with the local sources and print every command result"""
import logging
import sys
from importlib.metadata import PackageNotFoundError, version

# Force the local files, not pip installed lib
sys.path.insert(0, '..')
sys.path.insert(0, '../..')

from dyndist.cli import COMMANDS, execute
from dyndist.exceptions import CalculusError
from dyndist.problem import load

logging.basicConfig(
    format="%(asctime)-15s %(funcName)s(%(lineno)d) - %(levelname)s: %(message)s",
    stream=sys.stderr,
    level=getattr(logging, "DEBUG", None),
)

module_ver = None
try:
    module_ver = version('dyndist')
except PackageNotFoundError:
    pass

if module_ver:
    print("WARNING !!!")
    print("==============================")
    print(f"You are executing code with installed pip version dyndist:{module_ver}")
    print("You are not testing the local files, if that was what you meant !!!")
    print("==============================")

# Set the problem file to inspect
PROBLEM = "sample/sweep.txt"

problem = load(PROBLEM)
print(f"Loaded {PROBLEM}\n"
      f"- Interval: {problem.interval}\n"
      f"- Shapes: {', '.join(problem.shapes) or '-'}\n"
      f"- Functions: {', '.join(problem.functions) or '-'}\n"
      f"- Test functions: {', '.join(problem.testfns) or '-'}\n"
      f"- Distributions: {', '.join(problem.distributions) or '-'}\n"
      f"- System: {problem.system.ivp.dimension if problem.system else '-'}\n"
      f"- Command: {problem.command.name}\n"
      )

# -------------------------------
# Run the declared command
# -------------------------------
print(execute("run", problem).render())

# -------------------------------
# Run every other command the problem supports
# -------------------------------
for name in COMMANDS:
    if name == problem.command.name:
        continue
    try:
        print(f"{name}:\n{execute(name, problem).render()}")
    except CalculusError as ex:
        print(f"{name}: {ex}")
