"""Regulated functions, dynamic functions and delta-function shapes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .const import ENDPOINT_TOLERANCE, EQUALITY_TOLERANCE, J, NORMALIZATION_TOLERANCE
from .exceptions import DomainError, EndpointMismatchError, MissingProfileError, NormalizationError
from .poly import PiecewisePoly, Poly, Side, merge_breakpoints

Scalar = Union[int, float]


def _close(a: float, b: float, tolerance: float) -> bool:
    return abs(a - b) <= tolerance * max(1.0, abs(a), abs(b))


def _compose(p: Poly, q: PiecewisePoly) -> PiecewisePoly:
    """Piecewise composition u -> p(q(u)) (Horner scheme over the pieces)"""
    pieces = []
    for piece in q.pieces:
        result = Poly((p.coef[-1],))
        for c in reversed(p.coef[:-1]):
            result = result * piece + Poly((c,))
        pieces.append(result)
    return PiecewisePoly(q.breakpoints, tuple(pieces))


@dataclass(frozen=True)
class RegulatedFn:
    """Regulated function on the closure of I = (a, b), identified by its one-sided limits"""

    body: PiecewisePoly

    @classmethod
    def from_coefficients(cls, breakpoints: Sequence[float], coefficients: Sequence[Sequence[float]]) -> RegulatedFn:
        return cls(PiecewisePoly.from_coefficients(breakpoints, coefficients))

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> RegulatedFn:
        return cls(PiecewisePoly.constant(value, lo, hi))

    @property
    def interval(self) -> tuple[float, float]:
        return self.body.domain

    def left(self, t: float) -> float:
        return self.body.eval_side(t, Side.LEFT)

    def right(self, t: float) -> float:
        return self.body.eval_side(t, Side.RIGHT)

    def jump(self, t: float) -> float:
        return self.right(t) - self.left(t)

    def discontinuities(self) -> list[tuple[float, float]]:
        return self.body.jumps()

    def _other_body(self, other: Union[RegulatedFn, Scalar]):
        return other.body if isinstance(other, RegulatedFn) else other

    def __add__(self, other: Union[RegulatedFn, Scalar]) -> RegulatedFn:
        return RegulatedFn(self.body + self._other_body(other))

    __radd__ = __add__

    def __sub__(self, other: Union[RegulatedFn, Scalar]) -> RegulatedFn:
        return RegulatedFn(self.body - self._other_body(other))

    def __neg__(self) -> RegulatedFn:
        return RegulatedFn(-self.body)

    def __mul__(self, other: Union[RegulatedFn, Scalar]) -> RegulatedFn:
        return RegulatedFn(self.body * self._other_body(other))

    __rmul__ = __mul__

    def approx_equal(self, other: RegulatedFn, tolerance: float = EQUALITY_TOLERANCE) -> bool:
        return self.body.approx_equal(other.body, tolerance)

    def jordan_decompose(self) -> tuple[PiecewisePoly, list[tuple[float, float]]]:
        """Split into a continuous part g_c (with g_c(a+) = f(a+)) and a list of (point, jump) pairs"""
        jumps = self.body.jumps(0.0)
        at = {t: sigma for t, sigma in jumps}
        offset = 0.0
        pieces = []
        for x0, piece in zip(self.body.breakpoints, self.body.pieces):
            offset += at.get(x0, 0.0)
            pieces.append(piece - Poly((offset,)))
        continuous = PiecewisePoly(self.body.breakpoints, tuple(pieces)).simplify()
        return continuous, jumps


@dataclass(frozen=True)
class Profile:
    """
    Dynamic value on the fast-scale interval J = [-1/2, 1/2].

    A continuous profile connects the one-sided limits of a dynamic function of bounded variation;
    profiles containing steps come from the inclusion of regulated functions and their products.
    """

    curve: PiecewisePoly

    def __post_init__(self):
        if not self.curve.same_domain(PiecewisePoly.zero(*J)):
            raise DomainError(f"Profile must be defined on J={J}, got {self.curve.domain}.")

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> Profile:
        """Profile given by coefficients in the fast variable s"""
        return cls(PiecewisePoly.from_coefficients(J, [coefficients]))

    @classmethod
    def constant(cls, value: float) -> Profile:
        return cls(PiecewisePoly.constant(value, *J))

    @classmethod
    def step(cls, left: float, right: float) -> Profile:
        """Two-valued profile of the inclusion of regulated functions, breakpoint at s = 0"""
        return cls(PiecewisePoly.step(0.0, *J, left=left, right=right))

    @classmethod
    def linear(cls, left: float, right: float) -> Profile:
        return cls.polynomial((0.5 * (left + right), right - left))

    @property
    def start(self) -> float:
        return self.curve.right(J[0])

    @property
    def end(self) -> float:
        return self.curve.left(J[1])

    @property
    def is_continuous(self) -> bool:
        return self.curve.is_continuous()

    def variation(self) -> float:
        return self.curve.total_variation()

    def __add__(self, other: Profile) -> Profile:
        return Profile(self.curve + other.curve)

    def __neg__(self) -> Profile:
        return Profile(-self.curve)

    def __mul__(self, other: Union[Profile, Scalar]) -> Profile:
        if isinstance(other, Profile):
            return Profile(self.curve * other.curve)
        return Profile(self.curve * other)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Shape:
    """Shape of a delta-function: a density on J integrating to 1"""

    density: PiecewisePoly

    def __post_init__(self):
        if not self.density.same_domain(PiecewisePoly.zero(*J)):
            raise DomainError(f"Shape must be defined on J={J}, got {self.density.domain}.")
        mass = self.density.integral()
        if abs(mass - 1.0) > NORMALIZATION_TOLERANCE:
            raise NormalizationError(mass)

    @classmethod
    def uniform(cls) -> Shape:
        return cls(PiecewisePoly.constant(1.0, *J))

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> Shape:
        return cls(PiecewisePoly.from_coefficients(J, [coefficients]))

    @classmethod
    def from_coefficients(cls, breakpoints: Sequence[float], coefficients: Sequence[Sequence[float]]) -> Shape:
        return cls(PiecewisePoly.from_coefficients(breakpoints, coefficients))

    @classmethod
    def normalized(cls, density: PiecewisePoly) -> Shape:
        """Shape proportional to the density; raise NormalizationError for zero mass"""
        mass = density.integral()
        if mass == 0.0:
            raise NormalizationError(mass)
        return cls(density * (1.0 / mass))

    def values(self, s):
        return self.density.values(s)


@dataclass(frozen=True)
class DynamicFn:
    """
    Dynamic function of bounded variation on I: ordinary part plus dynamic values (profiles) at finitely many points.

    profiles may be passed as a mapping point -> Profile, it is stored as a sorted tuple of pairs.
    """

    ordinary: RegulatedFn
    profiles: tuple[tuple[float, Profile], ...] = ()

    def __post_init__(self):
        items = self.profiles.items() if isinstance(self.profiles, Mapping) else self.profiles
        items = tuple(sorted(((float(t), p) for t, p in items), key=lambda item: item[0]))
        lo, hi = self.ordinary.interval
        tol = self.ordinary.body.tolerance
        for (t0, _), (t1, _) in zip(items, items[1:]):
            if t1 - t0 <= tol:
                raise DomainError(f"Duplicate profile points {t0!r}, {t1!r}.")
        for t, profile in items:
            if not lo + tol < t < hi - tol:
                raise DomainError(f"Profile point {t!r} outside ({lo}, {hi}).")
            left, right = self.ordinary.left(t), self.ordinary.right(t)
            if not _close(profile.start, left, ENDPOINT_TOLERANCE):
                raise EndpointMismatchError(t, f"Profile starts at {profile.start!r}, left limit is {left!r}.")
            if not _close(profile.end, right, ENDPOINT_TOLERANCE):
                raise EndpointMismatchError(t, f"Profile ends at {profile.end!r}, right limit is {right!r}.")
        for t, _ in self.ordinary.discontinuities():
            if not any(abs(t - p) <= tol for p, _ in items):
                raise MissingProfileError(t)
        object.__setattr__(self, "profiles", items)

    @classmethod
    def polynomial(cls, coefficients: Sequence[float], lo: float, hi: float) -> DynamicFn:
        return cls(RegulatedFn.from_coefficients((lo, hi), [coefficients]))

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> DynamicFn:
        return cls(RegulatedFn.constant(value, lo, hi))

    @property
    def interval(self) -> tuple[float, float]:
        return self.ordinary.interval

    @property
    def profile_points(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.profiles)

    @property
    def is_smooth(self) -> bool:
        """All dynamic values are continuous (no step-containing profiles)"""
        return all(profile.is_continuous for _, profile in self.profiles)

    def profile_at(self, t: float) -> Optional[Profile]:
        tol = self.ordinary.body.tolerance
        for p, profile in self.profiles:
            if abs(p - t) <= tol:
                return profile
        return None

    def dynamic_value(self, t: float) -> Profile:
        """Dynamic value at an interior point: its profile, otherwise the constant or step of the one-sided limits"""
        profile = self.profile_at(t)
        if profile is not None:
            return profile
        left, right = self.ordinary.left(t), self.ordinary.right(t)
        if _close(left, right, EQUALITY_TOLERANCE):
            return Profile.constant(right)
        return Profile.step(left, right)

    def left(self, t: float) -> float:
        return self.ordinary.left(t)

    def right(self, t: float) -> float:
        return self.ordinary.right(t)

    def _check_interval(self, other: DynamicFn) -> None:
        if not self.ordinary.body.same_domain(other.ordinary.body):
            raise DomainError(f"Interval mismatch {self.interval} vs {other.interval}.")

    def _merged_points(self, other: DynamicFn) -> tuple[float, ...]:
        points = self.profile_points + other.profile_points
        if not points:
            return ()
        return merge_breakpoints(points, tolerance=self.ordinary.body.tolerance)

    def __add__(self, other: Union[DynamicFn, Scalar]) -> DynamicFn:
        if not isinstance(other, DynamicFn):
            return DynamicFn(self.ordinary + other, tuple((t, p + Profile.constant(other)) for t, p in self.profiles))
        self._check_interval(other)
        profiles = tuple((t, self.dynamic_value(t) + other.dynamic_value(t)) for t in self._merged_points(other))
        return DynamicFn(self.ordinary + other.ordinary, profiles)

    __radd__ = __add__

    def __neg__(self) -> DynamicFn:
        return DynamicFn(-self.ordinary, tuple((t, -p) for t, p in self.profiles))

    def __sub__(self, other: Union[DynamicFn, Scalar]) -> DynamicFn:
        return self + (-other)

    def __mul__(self, other: Union[DynamicFn, Scalar]) -> DynamicFn:
        if isinstance(other, DynamicFn):
            return mul_dynamic(self, other)
        return DynamicFn(self.ordinary * other, tuple((t, p * other) for t, p in self.profiles))

    __rmul__ = __mul__

    def compose(self, p: Poly) -> DynamicFn:
        """Composition p o f, applied to the ordinary part and to every dynamic value"""
        return DynamicFn(RegulatedFn(_compose(p, self.ordinary.body)),
                         tuple((t, Profile(_compose(p, profile.curve))) for t, profile in self.profiles))

    def approx_equal(self, other: DynamicFn, tolerance: float = EQUALITY_TOLERANCE) -> bool:
        """Equality of one-sided limits and of the dynamic values at every profile point of either function"""
        if not self.ordinary.body.same_domain(other.ordinary.body):
            return False
        if not self.ordinary.approx_equal(other.ordinary, tolerance):
            return False
        return all(self.dynamic_value(t).curve.approx_equal(other.dynamic_value(t).curve, tolerance)
                   for t in self._merged_points(other))


def heaviside(at: float, interval: tuple[float, float], beta: Optional[Profile] = None,
              height: float = 1.0) -> DynamicFn:
    """
    Heaviside function jumping by height at the point.
    With a continuous profile beta (beta(-1/2) = 0, beta(1/2) = 1) answer the dynamic Heaviside function,
    without it the inclusion of the regulated Heaviside function (step profile).
    """
    lo, hi = interval
    ordinary = RegulatedFn(PiecewisePoly.step(at, lo, hi, 0.0, height))
    if beta is None:
        return embed_regulated(ordinary)
    return DynamicFn(ordinary, ((at, beta * height),))


def jump(f: DynamicFn, at: float) -> float:
    """Jump f(t+) - f(t-) of the ordinary part"""
    lo, hi = f.interval
    if not lo < at < hi:
        raise DomainError(f"Point {at!r} outside ({lo}, {hi}).")
    return f.ordinary.jump(at)


def ordinary_part(f: DynamicFn) -> RegulatedFn:
    return f.ordinary


def mul_dynamic(f: DynamicFn, g: DynamicFn) -> DynamicFn:
    """Pointwise product: ordinary parts multiply, dynamic values multiply at every profile point of either factor"""
    f._check_interval(g)
    profiles = tuple((t, f.dynamic_value(t) * g.dynamic_value(t)) for t in f._merged_points(g))
    return DynamicFn(f.ordinary * g.ordinary, profiles)


def jordan_decompose(fhat: RegulatedFn) -> tuple[PiecewisePoly, list[tuple[float, float]]]:
    return fhat.jordan_decompose()


def embed_regulated(ghat: RegulatedFn) -> DynamicFn:
    """Inclusion of regulated functions: step profiles at every discontinuity"""
    profiles = tuple((t, Profile.step(ghat.left(t), ghat.right(t))) for t, _ in ghat.discontinuities())
    return DynamicFn(ghat, profiles)


def sequential_representation(profile: Profile, at: float, n: int, interval: tuple[float, float]) -> RegulatedFn:
    """The n-th term: profile compressed onto (at - 1/(2n), at + 1/(2n)), zero outside"""
    if n < 1:
        raise DomainError(f"Sequence index must be positive, got {n!r}.")
    lo, hi = interval
    half = 0.5 / n
    if at - half < lo or at + half > hi:
        raise DomainError(f"Window ({at - half}, {at + half}) escapes ({lo}, {hi}).")
    window = profile.curve.affine_rescale(n, at, (at - half, at + half))
    return RegulatedFn(window.extend_by_zero(lo, hi))


def total_variation_dyn(f: DynamicFn) -> float:
    """Variation of the continuous part of the ordinary part plus the variations of all dynamic values"""
    continuous, _ = f.ordinary.jordan_decompose()
    return continuous.total_variation() + sum(profile.variation() for _, profile in f.profiles)


def sbv_norm(f: DynamicFn) -> float:
    lo, _ = f.interval
    return abs(f.ordinary.right(lo)) + total_variation_dyn(f)


def sup_norm(f: DynamicFn) -> float:
    """sup |f| over the one-sided limits of the ordinary part and all dynamic values"""
    return max([f.ordinary.body.sup_abs()] + [profile.curve.sup_abs() for _, profile in f.profiles])


def support(f: DynamicFn, tolerance: float = EQUALITY_TOLERANCE) -> Optional[tuple[float, float]]:
    """Closure of the set where f is not identically zero, None for the zero function"""
    body = f.ordinary.body
    points: list[float] = []
    for x0, x1, piece in zip(body.breakpoints, body.breakpoints[1:], body.pieces):
        if not piece.is_zero(tolerance):
            points += [x0, x1]
    points += [t for t, profile in f.profiles if profile.curve.sup_abs() > tolerance]
    if not points:
        return None
    return min(points), max(points)
