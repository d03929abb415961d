"""Exact arithmetic of piecewise-polynomial functions on closed intervals."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import IntEnum
from itertools import chain
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .const import BREAKPOINT_TOLERANCE, EQUALITY_TOLERANCE, MAX_DEGREE
from .exceptions import DegenerateMapError, DegreeOverflowError, DomainError, SideError


Scalar = Union[int, float]


class Side(IntEnum):
    """
    Side of a one-sided limit.

    Possible values are:
    LEFT - limit from the left, g(t-)
    RIGHT - limit from the right, g(t+)
    """

    LEFT = -1
    RIGHT = 1


@dataclass(frozen=True)
class Poly:
    """Real polynomial with coefficients in ascending degree, kept in canonical (trimmed) form"""

    coef: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        coef = [float(c) for c in self.coef] or [0.0]
        while len(coef) > 1 and coef[-1] == 0.0:
            coef.pop()
        if len(coef) - 1 > MAX_DEGREE:
            raise DegreeOverflowError(len(coef) - 1, MAX_DEGREE)
        object.__setattr__(self, "coef", tuple(coef))

    @property
    def degree(self) -> int:
        return len(self.coef) - 1

    def is_zero(self, tolerance: float = 0.0) -> bool:
        return all(abs(c) <= tolerance for c in self.coef)

    def __call__(self, x):
        return P.polyval(x, self.coef)

    def __add__(self, other: Poly) -> Poly:
        return Poly(tuple(P.polyadd(self.coef, other.coef)))

    def __sub__(self, other: Poly) -> Poly:
        return Poly(tuple(P.polysub(self.coef, other.coef)))

    def __neg__(self) -> Poly:
        return Poly(tuple(-c for c in self.coef))

    def __mul__(self, other: Union[Poly, Scalar]) -> Poly:
        if isinstance(other, Poly):
            return Poly(tuple(P.polymul(self.coef, other.coef)))
        return Poly(tuple(c * other for c in self.coef))

    __rmul__ = __mul__

    def derivative(self) -> Poly:
        return Poly(tuple(P.polyder(self.coef)))

    def integrate(self, a: float, b: float) -> float:
        anti = P.polyint(self.coef)
        return float(P.polyval(b, anti) - P.polyval(a, anti))

    def compose_affine(self, scale: float, offset: float) -> Poly:
        """Answer the polynomial u -> p(scale * u + offset) (Horner scheme over polynomials)"""
        result = np.array([self.coef[-1]])
        for c in reversed(self.coef[:-1]):
            result = P.polyadd(P.polymul(result, [offset, scale]), [c])
        return Poly(tuple(result))

    def shift(self, h: float) -> Poly:
        """Answer the polynomial u -> p(u + h)"""
        if h == 0.0:
            return self
        return self.compose_affine(1.0, h)

    def critical_points(self, a: float, b: float) -> list[float]:
        """Real roots of the derivative strictly inside (a, b), sorted"""
        d = self.derivative()
        if d.degree == 0:
            return []
        points = []
        for root in P.polyroots(d.coef):
            root = complex(root)
            if abs(root.imag) <= 1e-9 * max(1.0, abs(root)) and a < root.real < b:
                points.append(root.real)
        return sorted(points)

    def variation(self, a: float, b: float) -> float:
        """Total variation on [a, b], i.e. integral of |p'| evaluated exactly between monotone stretches"""
        nodes = [a, *self.critical_points(a, b), b]
        values = self(np.array(nodes))
        return float(np.sum(np.abs(np.diff(values))))

    def sup_abs(self, a: float, b: float) -> float:
        nodes = [a, *self.critical_points(a, b), b]
        return float(np.max(np.abs(self(np.array(nodes)))))


def merge_breakpoints(*sequences: Iterable[float], tolerance: float) -> tuple[float, ...]:
    """Sorted union of breakpoint sequences, points closer than tolerance are merged into the first one"""
    points = sorted(chain(*sequences))
    merged = [points[0]]
    for point in points[1:]:
        if point - merged[-1] > tolerance:
            merged.append(point)
    return tuple(merged)


@dataclass(frozen=True)
class PiecewisePoly:
    """
    Piecewise polynomial function on the closed interval [breakpoints[0], breakpoints[-1]].

    Piece i lives on the open subinterval (breakpoints[i], breakpoints[i+1]) and is stored
    in the local variable u = t - breakpoints[i].
    Values at breakpoints are not represented, only the one-sided limits.
    """

    breakpoints: tuple[float, ...]
    pieces: tuple[Poly, ...]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        if len(bps) < 2:
            raise DomainError("Piecewise polynomial needs at least two breakpoints.")
        if any(b1 <= b0 for b0, b1 in zip(bps, bps[1:])):
            raise DomainError(f"Breakpoints {bps} are not strictly increasing.")
        pieces = tuple(p if isinstance(p, Poly) else Poly(tuple(p)) for p in self.pieces)
        if len(pieces) != len(bps) - 1:
            raise DomainError(f"Expected {len(bps) - 1} pieces, got {len(pieces)}.")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)

    # ------------------------------------------------------------------
    # Constructors

    @classmethod
    def from_coefficients(cls, breakpoints: Sequence[float],
                          coefficients: Sequence[Sequence[float]]) -> PiecewisePoly:
        """Create from coefficient lists expressed in the global variable t (one list per piece)"""
        bps = tuple(float(b) for b in breakpoints)
        if len(coefficients) != len(bps) - 1:
            raise DomainError(f"Expected {len(bps) - 1} coefficient lists, got {len(coefficients)}.")
        return cls(bps, tuple(Poly(tuple(c)).shift(x0) for c, x0 in zip(coefficients, bps)))

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> PiecewisePoly:
        return cls((lo, hi), (Poly((value,)),))

    @classmethod
    def zero(cls, lo: float, hi: float) -> PiecewisePoly:
        return cls.constant(0.0, lo, hi)

    @classmethod
    def identity(cls, lo: float, hi: float) -> PiecewisePoly:
        return cls((lo, hi), (Poly((lo, 1.0)),))

    @classmethod
    def step(cls, at: float, lo: float, hi: float, left: float = 0.0, right: float = 1.0) -> PiecewisePoly:
        if not lo < at < hi:
            raise DomainError(f"Step point {at!r} outside ({lo}, {hi}).")
        return cls((lo, at, hi), (Poly((left,)), Poly((right,))))

    # ------------------------------------------------------------------
    # Domain handling

    @property
    def lo(self) -> float:
        return self.breakpoints[0]

    @property
    def hi(self) -> float:
        return self.breakpoints[-1]

    @property
    def domain(self) -> tuple[float, float]:
        return self.lo, self.hi

    @property
    def tolerance(self) -> float:
        return BREAKPOINT_TOLERANCE * (self.hi - self.lo)

    def same_domain(self, other: PiecewisePoly) -> bool:
        tol = max(self.tolerance, other.tolerance)
        return abs(self.lo - other.lo) <= tol and abs(self.hi - other.hi) <= tol

    def _check_domain(self, other: PiecewisePoly) -> None:
        if not self.same_domain(other):
            raise DomainError(f"Domain mismatch {self.domain} vs {other.domain}.")

    def _check_inside(self, t: float) -> None:
        tol = self.tolerance
        if t < self.lo - tol or t > self.hi + tol:
            raise DomainError(f"Point {t!r} outside domain [{self.lo}, {self.hi}].")

    def breakpoint_index(self, t: float) -> int | None:
        """Index of the breakpoint matching t (within tolerance), None if t is not a breakpoint"""
        tol = self.tolerance
        i = bisect.bisect_left(self.breakpoints, t)
        for k in (i - 1, i):
            if 0 <= k < len(self.breakpoints) and abs(self.breakpoints[k] - t) <= tol:
                return k
        return None

    def _piece_at(self, t: float) -> int:
        """Index of the piece containing t (no breakpoint snapping)"""
        i = bisect.bisect_right(self.breakpoints, t) - 1
        return min(max(i, 0), len(self.pieces) - 1)

    def _piece_index(self, t: float, side: Side) -> int:
        self._check_inside(t)
        k = self.breakpoint_index(t)
        if k is None:
            return self._piece_at(t)
        if side == Side.LEFT:
            if k == 0:
                raise SideError(f"Left limit requested at the left end {t!r}.")
            return k - 1
        if k == len(self.pieces):
            raise SideError(f"Right limit requested at the right end {t!r}.")
        return k

    # ------------------------------------------------------------------
    # Evaluation

    def eval_side(self, t: float, side: Side) -> float:
        """One-sided limit at t"""
        i = self._piece_index(t, side)
        return float(self.pieces[i](t - self.breakpoints[i]))

    def left(self, t: float) -> float:
        return self.eval_side(t, Side.LEFT)

    def right(self, t: float) -> float:
        return self.eval_side(t, Side.RIGHT)

    def __call__(self, t: float) -> float:
        """Value at t; breakpoints resolve to the right limit (left limit at the right end)"""
        self._check_inside(t)
        return self.eval_side(t, Side.LEFT if self.breakpoint_index(t) == len(self.pieces) else Side.RIGHT)

    def values(self, ts: Union[Sequence[float], np.ndarray]) -> np.ndarray:
        """Vectorized evaluation, breakpoints resolve to the right piece"""
        ts = np.asarray(ts, dtype=float)
        tol = self.tolerance
        if ts.size and (ts.min() < self.lo - tol or ts.max() > self.hi + tol):
            raise DomainError(f"Sample points outside domain [{self.lo}, {self.hi}].")
        idx = np.clip(np.searchsorted(self.breakpoints, ts, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty_like(ts)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = P.polyval(ts[mask] - self.breakpoints[i], piece.coef)
        return out

    # ------------------------------------------------------------------
    # Integration and variation

    def integrate(self, a: float, b: float) -> float:
        """Exact integral over [a, b]"""
        if a > b:
            return -self.integrate(b, a)
        self._check_inside(a)
        self._check_inside(b)
        total = 0.0
        for x0, x1, piece in zip(self.breakpoints, self.breakpoints[1:], self.pieces):
            lo, hi = max(a, x0), min(b, x1)
            if hi > lo:
                total += piece.integrate(lo - x0, hi - x0)
        return total

    def integral(self) -> float:
        return self.integrate(self.lo, self.hi)

    def jumps(self, tolerance: float = EQUALITY_TOLERANCE) -> list[tuple[float, float]]:
        """Interior breakpoints where the one-sided limits differ, as (point, right - left) pairs"""
        result = []
        for k in range(1, len(self.pieces)):
            left = float(self.pieces[k - 1](self.breakpoints[k] - self.breakpoints[k - 1]))
            right = float(self.pieces[k].coef[0])
            if abs(right - left) > tolerance * max(1.0, abs(left), abs(right)):
                result.append((self.breakpoints[k], right - left))
        return result

    def is_continuous(self, tolerance: float = EQUALITY_TOLERANCE) -> bool:
        return not self.jumps(tolerance)

    def total_variation(self) -> float:
        total = 0.0
        for x0, x1, piece in zip(self.breakpoints, self.breakpoints[1:], self.pieces):
            total += piece.variation(0.0, x1 - x0)
        for k in range(1, len(self.pieces)):
            left = float(self.pieces[k - 1](self.breakpoints[k] - self.breakpoints[k - 1]))
            total += abs(self.pieces[k].coef[0] - left)
        return total

    def sup_abs(self) -> float:
        return max(piece.sup_abs(0.0, x1 - x0)
                   for x0, x1, piece in zip(self.breakpoints, self.breakpoints[1:], self.pieces))

    def coefficient_norm(self) -> float:
        return max(abs(c) for piece in self.pieces for c in piece.coef)

    def global_coefficients(self) -> list[tuple[float, ...]]:
        """Piece coefficients expressed in the global variable t"""
        return [piece.shift(-x0).coef for x0, piece in zip(self.breakpoints, self.pieces)]

    # ------------------------------------------------------------------
    # Restructuring

    def _pieces_on(self, grid: Sequence[float]) -> list[Poly]:
        """Re-express the pieces on a refinement grid of the same domain"""
        pieces = []
        for x0, x1 in zip(grid, grid[1:]):
            i = self._piece_at(0.5 * (x0 + x1))
            pieces.append(self.pieces[i].shift(x0 - self.breakpoints[i]))
        return pieces

    def refine(self, points: Iterable[float]) -> PiecewisePoly:
        """Same function with additional breakpoints"""
        inner = [p for p in points if self.lo < p < self.hi]
        grid = merge_breakpoints(self.breakpoints, inner, tolerance=self.tolerance)
        if len(grid) == len(self.breakpoints):
            return self
        return PiecewisePoly(grid, tuple(self._pieces_on(grid)))

    def simplify(self, tolerance: float = EQUALITY_TOLERANCE) -> PiecewisePoly:
        """Drop interior breakpoints across which the function is one and the same polynomial"""
        bps = [self.breakpoints[0]]
        pieces = [self.pieces[0]]
        for x1, piece in zip(self.breakpoints[1:-1], self.pieces[1:]):
            continued = pieces[-1].shift(x1 - bps[-1])
            if _coefficients_close(continued, piece, tolerance):
                continue
            bps.append(x1)
            pieces.append(piece)
        bps.append(self.breakpoints[-1])
        return PiecewisePoly(tuple(bps), tuple(pieces))

    def extend_by_zero(self, lo: float, hi: float) -> PiecewisePoly:
        """Embed into the wider domain [lo, hi], identically zero outside the current domain"""
        tol = self.tolerance
        if lo > self.lo + tol or hi < self.hi - tol:
            raise DomainError(f"Domain [{lo}, {hi}] does not contain [{self.lo}, {self.hi}].")
        bps = list(self.breakpoints)
        pieces = list(self.pieces)
        if self.lo - lo > tol:
            bps.insert(0, lo)
            pieces.insert(0, Poly())
        if hi - self.hi > tol:
            bps.append(hi)
            pieces.append(Poly())
        return PiecewisePoly(tuple(bps), tuple(pieces))

    def affine_rescale(self, scale: float, shift: float, new_domain: tuple[float, float]) -> PiecewisePoly:
        """Answer t -> p(scale * (t - shift)) on new_domain"""
        if scale == 0:
            raise DegenerateMapError(f"Affine map with zero scale (shift {shift!r}).")
        c, d = new_domain
        if not c < d:
            raise DomainError(f"Empty domain [{c}, {d}].")
        u0, u1 = sorted((scale * (c - shift), scale * (d - shift)))
        tol = self.tolerance
        if u0 < self.lo - tol or u1 > self.hi + tol:
            raise DomainError(f"Image [{u0}, {u1}] escapes domain [{self.lo}, {self.hi}].")
        inner = [b / scale + shift for b in self.breakpoints[1:-1] if u0 < b < u1]
        grid = merge_breakpoints([c, d], [t for t in inner if c < t < d], tolerance=BREAKPOINT_TOLERANCE * (d - c))
        pieces = []
        for x0, x1 in zip(grid, grid[1:]):
            i = self._piece_at(scale * (0.5 * (x0 + x1) - shift))
            pieces.append(self.pieces[i].compose_affine(scale, scale * (x0 - shift) - self.breakpoints[i]))
        return PiecewisePoly(grid, tuple(pieces))

    def derivative(self) -> PiecewisePoly:
        """Classical derivative of every piece (jumps are ignored)"""
        return PiecewisePoly(self.breakpoints, tuple(piece.derivative() for piece in self.pieces))

    # ------------------------------------------------------------------
    # Arithmetic

    def _combine(self, other: PiecewisePoly, op) -> PiecewisePoly:
        self._check_domain(other)
        grid = merge_breakpoints(self.breakpoints, other.breakpoints, tolerance=self.tolerance)
        pieces = tuple(op(p, q) for p, q in zip(self._pieces_on(grid), other._pieces_on(grid)))
        return PiecewisePoly(grid, pieces)

    def __add__(self, other: Union[PiecewisePoly, Scalar]) -> PiecewisePoly:
        if isinstance(other, PiecewisePoly):
            return self._combine(other, Poly.__add__)
        return PiecewisePoly(self.breakpoints, tuple(p + Poly((other,)) for p in self.pieces))

    __radd__ = __add__

    def __sub__(self, other: Union[PiecewisePoly, Scalar]) -> PiecewisePoly:
        return self + (-other)

    def __neg__(self) -> PiecewisePoly:
        return PiecewisePoly(self.breakpoints, tuple(-p for p in self.pieces))

    def __mul__(self, other: Union[PiecewisePoly, Scalar]) -> PiecewisePoly:
        if isinstance(other, PiecewisePoly):
            return self._combine(other, Poly.__mul__)
        return PiecewisePoly(self.breakpoints, tuple(p * other for p in self.pieces))

    __rmul__ = __mul__

    def approx_equal(self, other: PiecewisePoly, tolerance: float = EQUALITY_TOLERANCE) -> bool:
        """Equality as functions: coefficients agree on the common refinement (breakpoint values ignored)"""
        if not self.same_domain(other):
            return False
        grid = merge_breakpoints(self.breakpoints, other.breakpoints, tolerance=self.tolerance)
        scale = max(1.0, self.coefficient_norm(), other.coefficient_norm())
        return all(_coefficients_close(p, q, tolerance * scale)
                   for p, q in zip(self._pieces_on(grid), other._pieces_on(grid)))


def _coefficients_close(p: Poly, q: Poly, tolerance: float) -> bool:
    return (p - q).is_zero(tolerance)


def eval_side(p: PiecewisePoly, t: float, side: Side) -> float:
    """Retrieve one-sided limit of p at t"""
    return p.eval_side(t, side)


def integrate(p: PiecewisePoly, a: float, b: float) -> float:
    """Exact integral of p over [a, b]"""
    return p.integrate(a, b)


def multiply_pw(p: PiecewisePoly, q: PiecewisePoly) -> PiecewisePoly:
    """Pointwise product on the merged breakpoints"""
    return p * q


def affine_rescale(p: PiecewisePoly, scale: float, shift: float, new_domain: tuple[float, float]) -> PiecewisePoly:
    """Substitution t -> p(scale * (t - shift)) restricted to new_domain"""
    return p.affine_rescale(scale, shift, new_domain)


def total_variation_pw(p: PiecewisePoly) -> float:
    """Interior variation of the pieces plus the absolute jumps at interior breakpoints"""
    return p.total_variation()
