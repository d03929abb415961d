"""Hypothesis strategies shared by the property tests."""
from hypothesis import strategies as st

from dyndist.distribution import Atom, Distribution, make_battery
from dyndist.dynamic import DynamicFn, Profile, RegulatedFn
from dyndist.poly import PiecewisePoly

LO, HI = -1.0, 1.0

# Dyadic grid inside (LO, HI): breakpoints, profile points and atom locations are exact binary fractions
GRID = tuple(LO + k * (HI - LO) / 16 for k in range(1, 16))


def coefficients(bound: float = 2.0):
    return st.floats(min_value=-bound, max_value=bound, allow_nan=False, allow_infinity=False)


def polys(max_degree: int = 3, bound: float = 2.0):
    return st.lists(coefficients(bound), min_size=1, max_size=max_degree + 1)


@st.composite
def piecewise(draw, lo: float = LO, hi: float = HI, max_breaks: int = 3, max_degree: int = 3, bound: float = 2.0):
    inner = sorted(draw(st.sets(st.integers(1, 15), max_size=max_breaks)))
    breakpoints = [lo] + [lo + k * (hi - lo) / 16 for k in inner] + [hi]
    return PiecewisePoly.from_coefficients(breakpoints, [draw(polys(max_degree, bound)) for _ in breakpoints[1:]])


@st.composite
def continuous_profiles(draw, left: float, right: float):
    """Cubic profile connecting left and right"""
    r0, r1 = draw(coefficients()), draw(coefficients())
    return Profile.polynomial((0.5 * (left + right) - 0.25 * r0, right - left - 0.25 * r1, r0, r1))


@st.composite
def dynamic_fns(draw, smooth: bool = True):
    """
    Dynamic function with a profile at every interior breakpoint and possibly one more bump.
    smooth functions carry continuous profiles only, the others may carry step profiles.
    """
    ordinary = RegulatedFn(draw(piecewise()))
    profiles = {}
    for t in ordinary.body.breakpoints[1:-1]:
        left, right = ordinary.left(t), ordinary.right(t)
        if smooth or draw(st.booleans()):
            profiles[t] = draw(continuous_profiles(left, right))
        else:
            profiles[t] = Profile.step(left, right)
    extra = draw(st.sampled_from(GRID))
    if draw(st.booleans()) and extra not in profiles:
        value = ordinary.right(extra)
        profiles[extra] = draw(continuous_profiles(value, value))
    return DynamicFn(ordinary, profiles)


@st.composite
def atoms(draw, location: float):
    return Atom(location, draw(coefficients()), draw(coefficients()), draw(piecewise(-0.5, 0.5, max_breaks=2)))


@st.composite
def distributions(draw, point_weights: bool = True):
    regular = RegulatedFn(draw(piecewise()))
    stieltjes, _ = RegulatedFn(draw(piecewise())).jordan_decompose()
    locations = draw(st.sets(st.sampled_from(GRID), max_size=3))
    parts = []
    for t in sorted(locations):
        atom = draw(atoms(t))
        parts.append(atom if point_weights else Atom(t, density=atom.density))
    return Distribution(regular, stieltjes, tuple(parts))


def battery_for(*objects, size: int = 6, seed: int = 0x5EED):
    """Battery with profiles at the atom locations and profile points of the given objects"""
    locations = set()
    for obj in objects:
        if isinstance(obj, Distribution):
            locations |= {atom.location for atom in obj.atoms}
        else:
            locations |= set(obj.profile_points)
    return make_battery((LO, HI), sorted(locations), size=size, seed=seed)
