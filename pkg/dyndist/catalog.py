"""Named shapes, heaviside families and the catalog of jump fields."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .const import J
from .dynamic import Shape
from .expression import MatrixField, VectorField
from .poly import PiecewisePoly, Poly


def uniform() -> Shape:
    return Shape.uniform()


def ramp() -> Shape:
    """Density 2s + 1"""
    return Shape.polynomial((1.0, 2.0))


def quadratic() -> Shape:
    """Density 6 (1/4 - s^2), vanishing at both ends of J"""
    return Shape.polynomial((1.5, 0.0, -6.0))


def heaviside_shape(c: float) -> Shape:
    """
    Two-valued shape with mass 1 - c on [-1/2, 0) and c on (0, 1/2].
    The product of the step Heaviside function with the delta of this shape has mass c.
    """
    return Shape(PiecewisePoly((J[0], 0.0, J[1]), (Poly((2.0 * (1.0 - c),)), Poly((2.0 * c,)))))


SHAPES: dict[str, Callable[[], Shape]] = {
    "uniform": uniform,
    "ramp": ramp,
    "quadratic": quadratic,
}


def _coefficient_term(value: float, j: int) -> str:
    if value == 0.0:
        return "0"
    if value < 0.0:
        return f"0 - {-value!r}*x{j}"
    return f"{value!r}*x{j}"


def linear_jump_field(matrix: Sequence[Sequence[float]]) -> MatrixField:
    """
    Jump field g_ij(x) = A_ij x_j. For equal shape components the jump map is x -> exp(A) x;
    the columns commute exactly when A is diagonal.
    """
    return MatrixField.parse([[_coefficient_term(float(value), j + 1) for j, value in enumerate(row)]
                              for row in matrix])


@dataclass(frozen=True)
class FieldEntry:
    """
    Catalog problem: drift f, jump field g and whether the columns of g commute.

    Attributes:
        f -- drift expressions f1..fn
        g -- jump field expressions, row by row
        commuting -- the Frobenius condition holds
    """

    f: tuple[str, ...]
    g: tuple[tuple[str, ...], ...]
    commuting: bool

    @property
    def dimension(self) -> int:
        return len(self.f)

    def drift(self) -> VectorField:
        return VectorField.parse(self.f)

    def jump_field(self) -> MatrixField:
        return MatrixField.parse(self.g)


FIELDS: dict[str, FieldEntry] = {
    "scalar-exponential": FieldEntry(("0",), (("x1",),), True),
    "affine-growth": FieldEntry(("1",), (("x1",),), True),
    "diagonal-linear": FieldEntry(("0", "0"), (("0.3*x1", "0"), ("0", "0 - 0.2*x2")), True),
    "non-commuting": FieldEntry(("0", "0"), (("1", "0"), ("0", "x1")), False),
}
