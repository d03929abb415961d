"""Distributions acting on dynamic test functions."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .const import BATTERY_SEED, BATTERY_SIZE, DISTRIBUTION_TOLERANCE, EQUALITY_TOLERANCE, J
from .dynamic import DynamicFn, Profile, RegulatedFn, Shape, mul_dynamic, sequential_representation
from .dynamic import support as support_of
from .exceptions import DeltaSequenceError, DomainError, NotDifferentiableError
from .poly import PiecewisePoly, Poly

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TestFn:
    """Dynamic test function: a dynamic function with compact support [c, d] inside the closure of I"""

    body: DynamicFn
    support: tuple[float, float]

    def __post_init__(self):
        c, d = (float(x) for x in self.support)
        lo, hi = self.body.interval
        ordinary = self.body.ordinary.body
        tol = ordinary.tolerance
        if c > d or c < lo - tol or d > hi + tol:
            raise DomainError(f"Support [{c}, {d}] is not inside [{lo}, {hi}].")
        refined = ordinary.refine((c, d))
        scale = EQUALITY_TOLERANCE * max(1.0, ordinary.coefficient_norm())
        for x0, x1, piece in zip(refined.breakpoints, refined.breakpoints[1:], refined.pieces):
            if (x1 <= c + tol or x0 >= d - tol) and not piece.is_zero(scale):
                raise DomainError(f"Test function does not vanish on ({x0}, {x1}) outside its support.")
        for t, _ in self.body.profiles:
            if t < c - tol or t > d + tol:
                raise DomainError(f"Profile at {t!r} outside the support [{c}, {d}].")
        object.__setattr__(self, "support", (c, d))

    @classmethod
    def from_dynamic(cls, body: DynamicFn) -> TestFn:
        """Test function with the support computed from the body (degenerate support at a for the zero function)"""
        found = support_of(body)
        if found is None:
            lo, _ = body.interval
            found = (lo, lo)
        return cls(body, found)

    @property
    def interval(self) -> tuple[float, float]:
        return self.body.interval

    def multiply(self, g: DynamicFn) -> TestFn:
        """The test function g * phi, its support does not grow (zero dynamic values outside it are dropped)"""
        product = mul_dynamic(g, self.body)
        c, d = self.support
        tol = product.ordinary.body.tolerance
        profiles = tuple((t, profile) for t, profile in product.profiles if c - tol <= t <= d + tol)
        return TestFn(DynamicFn(product.ordinary, profiles), self.support)


@dataclass(frozen=True)
class Atom:
    """
    Point part of a distribution at one location.

    Acts on a test function as right * phi(t+) + left * phi(t-) + integral over J of phi(t)(s) * density(s).
    The density is not normalized: products may carry any mass, including zero.
    """

    location: float
    right: float = 0.0
    left: float = 0.0
    density: Optional[PiecewisePoly] = None

    def __post_init__(self):
        density = self.density if self.density is not None else PiecewisePoly.zero(*J)
        if not density.same_domain(PiecewisePoly.zero(*J)):
            raise DomainError(f"Atom density must be defined on J={J}, got {density.domain}.")
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "right", float(self.right))
        object.__setattr__(self, "left", float(self.left))
        object.__setattr__(self, "density", density)

    @property
    def has_point_weights(self) -> bool:
        return self.right != 0.0 or self.left != 0.0

    @property
    def mass(self) -> float:
        """Total weight, the pairing with the constant 1"""
        return self.right + self.left + self.density.integral()

    @property
    def shape(self) -> Optional[Shape]:
        """Normalized density (weight x shape rewriting), None for a density of zero mass"""
        if abs(self.density.integral()) <= EQUALITY_TOLERANCE:
            return None
        return Shape.normalized(self.density)

    def act(self, f: DynamicFn) -> float:
        t = self.location
        return (self.right * f.right(t) + self.left * f.left(t)
                + (f.dynamic_value(t).curve * self.density).integral())

    def __add__(self, other: Atom) -> Atom:
        return Atom(self.location, self.right + other.right, self.left + other.left, self.density + other.density)

    def __mul__(self, c: float) -> Atom:
        return Atom(self.location, c * self.right, c * self.left, self.density * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Distribution:
    """
    Distribution of the closed-form class: regular density, Stieltjes part and finitely many atoms.

    The Stieltjes part is the integrator g_c (a continuous piecewise polynomial), it acts as the integral of phi * g_c'.
    Atoms are kept sorted by location, their locations are pairwise distinct.
    """

    regular: RegulatedFn
    stieltjes: Optional[PiecewisePoly] = None
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        body = self.regular.body
        stieltjes = self.stieltjes if self.stieltjes is not None else PiecewisePoly.zero(*body.domain)
        if not stieltjes.same_domain(body):
            raise DomainError(f"Stieltjes part on {stieltjes.domain}, regular part on {body.domain}.")
        if not stieltjes.is_continuous():
            raise DomainError("Stieltjes integrator must be continuous.")
        atoms = tuple(sorted(self.atoms, key=lambda atom: atom.location))
        tol = body.tolerance
        for atom in atoms:
            if not body.lo + tol < atom.location < body.hi - tol:
                raise DomainError(f"Atom at {atom.location!r} outside ({body.lo}, {body.hi}).")
        for a0, a1 in zip(atoms, atoms[1:]):
            if a1.location - a0.location <= tol:
                raise DomainError(f"Two atoms at {a0.location!r}.")
        object.__setattr__(self, "stieltjes", stieltjes)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def zero(cls, lo: float, hi: float) -> Distribution:
        return cls(RegulatedFn.constant(0.0, lo, hi))

    @classmethod
    def from_regular(cls, density: Union[RegulatedFn, PiecewisePoly]) -> Distribution:
        return cls(density if isinstance(density, RegulatedFn) else RegulatedFn(density))

    @property
    def interval(self) -> tuple[float, float]:
        return self.regular.interval

    def atom_at(self, t: float) -> Optional[Atom]:
        tol = self.regular.body.tolerance
        return next((atom for atom in self.atoms if abs(atom.location - t) <= tol), None)

    def pair(self, phi: TestFn) -> float:
        return pair(self, phi)

    def absorb_stieltjes(self) -> Distribution:
        """Same functional with the Stieltjes integrator turned into its regular density g_c'"""
        return Distribution(self.regular + RegulatedFn(self.stieltjes.derivative()), None, self.atoms)

    def __add__(self, other: Distribution) -> Distribution:
        if not self.regular.body.same_domain(other.regular.body):
            raise DomainError(f"Interval mismatch {self.interval} vs {other.interval}.")
        atoms = list(self.atoms)
        for atom in other.atoms:
            index = next((i for i, mine in enumerate(atoms) if abs(mine.location - atom.location)
                          <= self.regular.body.tolerance), None)
            if index is None:
                atoms.append(atom)
            else:
                atoms[index] = atoms[index] + atom
        return Distribution(self.regular + other.regular, self.stieltjes + other.stieltjes, tuple(atoms))

    def __neg__(self) -> Distribution:
        return self * -1.0

    def __sub__(self, other: Distribution) -> Distribution:
        return self + (-other)

    def __mul__(self, other: Union[DynamicFn, float]) -> Distribution:
        if isinstance(other, DynamicFn):
            return multiply(self, other)
        return Distribution(self.regular * other, self.stieltjes * other, tuple(atom * other for atom in self.atoms))

    __rmul__ = __mul__

    def equivalent(self, other: Distribution, battery: Sequence[TestFn],
                   tolerance: float = DISTRIBUTION_TOLERANCE) -> bool:
        """Extensional equality: equal pairings on every member of the battery"""
        return all(abs(pair(self, phi) - pair(other, phi)) <= tolerance for phi in battery)


def _check_interval(T: Distribution, f: DynamicFn) -> None:
    if not T.regular.body.same_domain(f.ordinary.body):
        raise DomainError(f"Interval mismatch {T.interval} vs {f.interval}.")


def pair(T: Distribution, phi: TestFn) -> float:
    """Action of the distribution on a dynamic test function"""
    _check_interval(T, phi.body)
    ordinary = phi.body.ordinary.body
    total = (T.regular.body * ordinary).integral() + (T.stieltjes.derivative() * ordinary).integral()
    return total + sum(atom.act(phi.body) for atom in T.atoms)


def delta(at: float, alpha: Union[Shape, PiecewisePoly], interval: tuple[float, float]) -> Distribution:
    """Delta-function of the given shape at the point"""
    shape = alpha if isinstance(alpha, Shape) else Shape(alpha)
    return Distribution(RegulatedFn.constant(0.0, *interval), None, (Atom(at, density=shape.density),))


def delta_lambda(at: float, weight: float, interval: tuple[float, float]) -> Distribution:
    """Affine combination weight * phi(t+) + (1 - weight) * phi(t-)"""
    return Distribution(RegulatedFn.constant(0.0, *interval), None, (Atom(at, weight, 1.0 - weight),))


def multiply(T: Distribution, g: DynamicFn) -> Distribution:
    """
    Product g * T, defined by pairing: (g * T, phi) = (T, g * phi).
    The Stieltjes part is converted to the regular density ord(g) * g_c'.
    """
    _check_interval(T, g)
    ordinary = g.ordinary
    regular = (T.regular + RegulatedFn(T.stieltjes.derivative())) * ordinary
    atoms = tuple(Atom(atom.location,
                       atom.right * ordinary.right(atom.location),
                       atom.left * ordinary.left(atom.location),
                       g.dynamic_value(atom.location).curve * atom.density)
                  for atom in T.atoms)
    return Distribution(regular, None, atoms)


def derivative(f: DynamicFn) -> Distribution:
    """
    Dynamic derivative: the continuous Jordan part as Stieltjes integrator and, at every profile point,
    an atom with the density d/ds of the profile.
    """
    for t, profile in f.profiles:
        if not profile.is_continuous:
            raise NotDifferentiableError(t)
    continuous, _ = f.ordinary.jordan_decompose()
    atoms = tuple(Atom(t, density=profile.curve.derivative()) for t, profile in f.profiles)
    return Distribution(RegulatedFn.constant(0.0, *f.interval), continuous, atoms)


def mollify(T: Distribution, n: int) -> RegulatedFn:
    """
    Regular function of the n-th delta-sequence term: the regular part (Stieltjes part absorbed)
    plus n * density(n * (t - location)) on the window of every atom.
    """
    if n < 1:
        raise DomainError(f"Sequence index must be positive, got {n!r}.")
    for atom in T.atoms:
        if atom.has_point_weights:
            raise DeltaSequenceError(f"Atom at {atom.location!r} has point weights, no delta-sequence is defined.")
    for a0, a1 in zip(T.atoms, T.atoms[1:]):
        if a1.location - a0.location < 1.0 / n:
            raise DomainError(f"Windows of the atoms at {a0.location!r} and {a1.location!r} overlap for n={n}.")
    result = T.absorb_stieltjes().regular
    for atom in T.atoms:
        result = result + sequential_representation(Profile(atom.density), atom.location, n, T.interval) * n
    logger.debug("Mollified %d atoms with n=%d.", len(T.atoms), n)
    return result


def leibniz_residual(f: DynamicFn, g: DynamicFn, battery: Sequence[TestFn]) -> float:
    """max over the battery of |((fg)' - f'g - fg', phi)|"""
    lhs = derivative(f * g)
    rhs = multiply(derivative(f), g) + multiply(derivative(g), f)
    return max((abs(pair(lhs, phi) - pair(rhs, phi)) for phi in battery), default=0.0)


def convergence_residual(seq: Sequence[Distribution], limit: Distribution, battery: Sequence[TestFn]) -> list[float]:
    """For every element of the sequence the max pairing gap to the limit over the battery"""
    limits = [pair(limit, phi) for phi in battery]
    return [max((abs(pair(T, phi) - value) for phi, value in zip(battery, limits)), default=0.0) for T in seq]


def _continuous_member(rng: np.random.Generator, lo: float, hi: float) -> TestFn:
    width = hi - lo
    c = lo + 0.45 * width * rng.uniform()
    d = hi - 0.45 * width * rng.uniform()
    p0, p1 = rng.uniform(-1.0, 1.0, 2)
    # (t - c)(d - t)(p0 + p1 t) in the local variable u = t - c
    piece = Poly((0.0, d - c, -1.0)) * Poly((p0 + p1 * c, p1))
    body = PiecewisePoly((c, d), (piece,)).extend_by_zero(lo, hi)
    return TestFn(DynamicFn(RegulatedFn(body)), (c, d))


def _profiled_member(rng: np.random.Generator, lo: float, hi: float, locations: Sequence[float]) -> TestFn:
    first, last = locations[0], locations[-1]
    c = lo + (first - lo) * rng.uniform(0.05, 0.95)
    d = last + (hi - last) * rng.uniform(0.05, 0.95)
    grid = (c, *locations, d)
    pieces = []
    for k, (x0, x1) in enumerate(zip(grid, grid[1:])):
        q = rng.uniform(-1.0, 1.0, 4)
        if k == 0:
            pieces.append(Poly((0.0, q[0], q[1])))
        elif k == len(grid) - 2:
            w = x1 - x0
            pieces.append(Poly((w, -1.0)) * Poly((q[0], q[1])))
        else:
            pieces.append(Poly(tuple(q)))
    body = PiecewisePoly(grid, tuple(pieces)).extend_by_zero(lo, hi)
    profiles = []
    for t in locations:
        left, right = body.left(t), body.right(t)
        r0, r1 = rng.uniform(-1.0, 1.0, 2)
        # left + (right - left)(s + 1/2) + (s^2 - 1/4)(r0 + r1 s)
        profiles.append((t, Profile.polynomial((0.5 * (left + right) - 0.25 * r0, right - left - 0.25 * r1, r0, r1))))
    return TestFn(DynamicFn(RegulatedFn(body), tuple(profiles)), (c, d))


def make_battery(interval: tuple[float, float], atom_locations: Sequence[float] = (), size: int = BATTERY_SIZE,
                 seed: int = BATTERY_SEED, continuous: bool = False) -> list[TestFn]:
    """
    Reproducible family of test functions: compactly supported piecewise cubics.
    Unless continuous is requested, every second member jumps at the atom locations and carries cubic profiles there.
    """
    lo, hi = interval
    locations = sorted(float(t) for t in atom_locations)
    if any(not lo < t < hi for t in locations):
        raise DomainError(f"Atom locations {locations} outside ({lo}, {hi}).")
    rng = np.random.default_rng(seed)
    battery = []
    for k in range(size):
        if continuous or not locations or k % 2 == 0:
            battery.append(_continuous_member(rng, lo, hi))
        else:
            battery.append(_profiled_member(rng, lo, hi, locations))
    logger.debug("Battery of %d test functions on (%s, %s), seed %#x.", size, lo, hi, seed)
    return battery
