"""Impulsive initial value problems: smooth RK4 segments stitched by fast-scale jump maps."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .const import (BREAKPOINT_TOLERANCE, DEFAULT_JUMP_STEPS, DEFAULT_SEGMENT_STEPS, FINITE_DIFFERENCE_STEP,
                    FROBENIUS_LATTICE_CAP, FROBENIUS_LATTICE_POINTS, FROBENIUS_TOLERANCE, J, MIN_WINDOW_STEPS)
from .dynamic import Shape
from .exceptions import DivergenceError, DomainError, ResolutionError
from .expression import MatrixField, VectorField
from .poly import PiecewisePoly, merge_breakpoints

logger = logging.getLogger(__name__)

State = np.ndarray


@dataclass(frozen=True)
class Impulse:
    """Shaped delta-function at a location, one shape per state component"""

    location: float
    shapes: tuple[Shape, ...]

    def __post_init__(self):
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "shapes", tuple(self.shapes))


@dataclass(frozen=True)
class ImpulsiveIVP:
    """
    Cauchy problem x' = f(t, x) + g(t, x) delta(alpha) on (a, b), x(t0) = x0.

    Impulses are sorted by location, a < t0 <= first location < ... < last location < b.
    """

    interval: tuple[float, float]
    t0: float
    x0: tuple[float, ...]
    f: VectorField
    g: MatrixField
    impulses: tuple[Impulse, ...] = ()

    def __post_init__(self):
        a, b = self.interval
        n = len(self.x0)
        if self.f.dimension != n or self.g.dimension != n:
            raise DomainError(f"Dimension mismatch: x0 has {n} components, f {self.f.dimension}, g {self.g.dimension}.")
        if not a < self.t0 < b:
            raise DomainError(f"Initial time {self.t0!r} outside ({a}, {b}).")
        impulses = tuple(sorted(self.impulses, key=lambda impulse: impulse.location))
        previous = self.t0
        for k, impulse in enumerate(impulses):
            if len(impulse.shapes) != n:
                raise DomainError(f"Impulse at {impulse.location!r} has {len(impulse.shapes)} shapes, expected {n}.")
            if impulse.location < previous or (k and impulse.location == previous) or impulse.location >= b:
                raise DomainError(f"Impulse at {impulse.location!r} out of order in [{self.t0}, {b}).")
            previous = impulse.location
        object.__setattr__(self, "x0", tuple(float(x) for x in self.x0))
        object.__setattr__(self, "impulses", impulses)

    @property
    def dimension(self) -> int:
        return len(self.x0)


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Dense output of a fixed-step integration: one state row per time node"""

    times: np.ndarray
    states: np.ndarray

    @property
    def initial(self) -> State:
        return self.states[0]

    @property
    def final(self) -> State:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True, eq=False)
class JumpProfile:
    """Fast-scale solution gamma on J of one jump, gamma(-1/2) = x(t-) and gamma(1/2) = x(t+)"""

    location: float
    s: np.ndarray
    gamma: np.ndarray

    @property
    def x_minus(self) -> State:
        return self.gamma[0]

    @property
    def x_plus(self) -> State:
        return self.gamma[-1]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Smooth segments interleaved with jumps: segments[k] ends where jumps[k] starts"""

    segments: tuple[SampleTable, ...]
    jumps: tuple[JumpProfile, ...] = field(default_factory=tuple)

    @property
    def endpoint(self) -> State:
        return self.segments[-1].final


@dataclass(frozen=True)
class ShapeSensitivity:
    """Jump endpoints of one impulse for several shape vectors applied to the same x(t-)"""

    x_minus: tuple[float, ...]
    endpoints: tuple[tuple[float, ...], ...]

    @property
    def deviation(self) -> float:
        """Largest infinity-norm distance between two endpoints"""
        points = np.array(self.endpoints)
        return max((float(np.max(np.abs(p - q))) for p, q in itertools.combinations(points, 2)), default=0.0)


@dataclass(frozen=True)
class FrobeniusReport:
    max_residual: float
    worst_time: float
    worst_state: tuple[float, ...]
    lattice_size: int
    tolerance: float = FROBENIUS_TOLERANCE

    @property
    def satisfied(self) -> bool:
        return self.max_residual <= self.tolerance


def _check_finite(x: State, t: float) -> None:
    if not np.all(np.isfinite(x)):
        raise DivergenceError(t, f"Non-finite state {x.tolist()}")


def _rk4(rhs: Callable[[float, State, int, int], State], grid: np.ndarray, x_from: State) -> np.ndarray:
    """
    Classical RK4 over the nodes of grid. rhs(t, x, step, stage) gets the step index and the stage
    (0 start, 1 midpoint, 2 end) so piecewise data can be taken from the piece containing the step.
    """
    states = np.empty((len(grid), len(x_from)))
    x = np.asarray(x_from, dtype=float)
    states[0] = x
    for k, (t, t_next) in enumerate(zip(grid[:-1], grid[1:])):
        h = t_next - t
        k1 = rhs(t, x, k, 0)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1, k, 1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2, k, 1)
        k4 = rhs(t_next, x + h * k3, k, 2)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(x, t_next)
        states[k + 1] = x
    return states


def _stage_values(density: PiecewisePoly, grid: np.ndarray) -> np.ndarray:
    """Density at the start, midpoint and end of every step, taken from the piece containing the step"""
    mids = 0.5 * (grid[:-1] + grid[1:])
    index = np.clip(np.searchsorted(density.breakpoints, mids, side="right") - 1, 0, len(density.pieces) - 1)
    out = np.empty((3, len(mids)))
    for i, piece in enumerate(density.pieces):
        mask = index == i
        if mask.any():
            x0 = density.breakpoints[i]
            for row, points in enumerate((grid[:-1], mids, grid[1:])):
                out[row, mask] = piece(points[mask] - x0)
    return out


def _fast_grid(shapes: Sequence[Shape], steps: int) -> np.ndarray:
    """Uniform grid on J refined by the breakpoints of the shapes"""
    uniform = np.linspace(J[0], J[1], steps + 1)
    inner = [b for shape in shapes for b in shape.density.breakpoints[1:-1]]
    return np.array(merge_breakpoints(uniform, inner, tolerance=BREAKPOINT_TOLERANCE))


def integrate_smooth(f: VectorField, t_from: float, t_to: float, x_from: Sequence[float],
                     steps: int = DEFAULT_SEGMENT_STEPS) -> SampleTable:
    """Fixed-step RK4 for x' = f(t, x); a zero-length interval answers the single initial row"""
    if steps < 1:
        raise DomainError(f"Number of steps must be positive, got {steps!r}.")
    x = np.asarray(x_from, dtype=float)
    _check_finite(x, t_from)
    if t_to == t_from:
        return SampleTable(np.array([t_from]), x.reshape(1, -1).copy())
    grid = np.linspace(t_from, t_to, steps + 1)
    states = _rk4(lambda t, y, k, stage: f(t, y), grid, x)
    return SampleTable(grid, states)


def jump_map(g: MatrixField, location: float, alpha: Sequence[Shape], x_minus: Sequence[float],
             steps: int = DEFAULT_JUMP_STEPS) -> JumpProfile:
    """Solve gamma' = g(location, gamma) alpha(s) on J from gamma(-1/2) = x_minus"""
    if steps < 1:
        raise DomainError(f"Number of steps must be positive, got {steps!r}.")
    if len(alpha) != g.dimension:
        raise DomainError(f"Expected {g.dimension} shapes, got {len(alpha)}.")
    grid = _fast_grid(alpha, steps)
    values = np.stack([_stage_values(shape.density, grid) for shape in alpha], axis=-1)

    def rhs(s: float, y: State, k: int, stage: int) -> State:
        return g(location, y) @ values[stage, k]

    try:
        gamma = _rk4(rhs, grid, np.asarray(x_minus, dtype=float))
    except DivergenceError as ex:
        raise DivergenceError(location, f"Jump map diverged at s={ex.time!r}") from None
    return JumpProfile(location, grid, gamma)


def solve(ivp: ImpulsiveIVP, steps_per_segment: int = DEFAULT_SEGMENT_STEPS,
          steps_per_jump: int = DEFAULT_JUMP_STEPS) -> Trajectory:
    """Alternate smooth segments and jump maps; each stage starts from the exact last state of the previous one"""
    logger.debug("Solving %d impulses on (%s, %s).", len(ivp.impulses), ivp.t0, ivp.interval[1])
    t, x = ivp.t0, np.array(ivp.x0)
    segments, jumps = [], []
    for impulse in ivp.impulses:
        segment = integrate_smooth(ivp.f, t, impulse.location, x, steps_per_segment)
        jump = jump_map(ivp.g, impulse.location, impulse.shapes, segment.final, steps_per_jump)
        logger.debug("Jump at %s: %s -> %s.", impulse.location, jump.x_minus.tolist(), jump.x_plus.tolist())
        segments.append(segment)
        jumps.append(jump)
        t, x = impulse.location, jump.x_plus
    segments.append(integrate_smooth(ivp.f, t, ivp.interval[1], x, steps_per_segment))
    return Trajectory(tuple(segments), tuple(jumps))


def regularized_solve(ivp: ImpulsiveIVP, m: int, window_steps: int = MIN_WINDOW_STEPS,
                      steps_per_segment: int = DEFAULT_SEGMENT_STEPS) -> SampleTable:
    """
    Replace every impulse by the m-th delta-sequence term m * alpha(m (t - location)) on its window
    and integrate x' = f(t, x) + g(t, x) omega(t) in one RK4 pass over a mesh aligned with the windows.
    """
    if m < 1:
        raise DomainError(f"Sequence index must be positive, got {m!r}.")
    if window_steps < MIN_WINDOW_STEPS:
        raise ResolutionError(f"{window_steps} steps per mollifier window, at least {MIN_WINDOW_STEPS} required.")
    _, b = ivp.interval
    half = 0.5 / m
    windows = [(impulse.location - half, impulse.location + half) for impulse in ivp.impulses]
    for (c, d), impulse in zip(windows, ivp.impulses):
        if c < ivp.t0 or d > b:
            raise DomainError(f"Window ({c}, {d}) of the impulse at {impulse.location!r} escapes [{ivp.t0}, {b}].")
    for (_, d), (c, _) in zip(windows, windows[1:]):
        if c < d:
            raise DomainError(f"Mollifier windows overlap for m={m}.")

    # stretches of the mesh: (time grid, omega stage values or None)
    stretches: list[tuple[np.ndarray, Optional[np.ndarray]]] = []
    t = ivp.t0
    for (c, d), impulse in zip(windows, ivp.impulses):
        if c > t:
            stretches.append((np.linspace(t, c, steps_per_segment + 1), None))
        s_grid = _fast_grid(impulse.shapes, window_steps)
        omega = m * np.stack([_stage_values(shape.density, s_grid) for shape in impulse.shapes], axis=-1)
        stretches.append((impulse.location + s_grid / m, omega))
        t = d
    if b > t:
        stretches.append((np.linspace(t, b, steps_per_segment + 1), None))

    times, states = [np.array([ivp.t0])], [np.array([ivp.x0])]
    x = np.array(ivp.x0)
    for grid, omega in stretches:
        if omega is None:
            rows = _rk4(lambda s, y, k, stage: ivp.f(s, y), grid, x)
        else:
            rows = _rk4(lambda s, y, k, stage, omega=omega: ivp.f(s, y) + ivp.g(s, y) @ omega[stage, k], grid, x)
        times.append(grid[1:])
        states.append(rows[1:])
        x = rows[-1]
    logger.debug("Regularized solve with m=%d over %d stretches.", m, len(stretches))
    return SampleTable(np.concatenate(times), np.concatenate(states))


def _jacobian_tensor(g: MatrixField, t: float, x: State, h: float) -> np.ndarray:
    """d[i, j, k] = d g_ij / d x_k by central differences"""
    n = len(x)
    d = np.empty((n, n, n))
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        d[:, :, k] = (g(t, x + step) - g(t, x - step)) / (2.0 * h)
    return d


def frobenius_residual(g: MatrixField, t: float, x: Sequence[float], h: float = FINITE_DIFFERENCE_STEP) -> float:
    """Largest infinity norm of the Lie brackets [v_j, v_m] = Dv_m v_j - Dv_j v_m of the columns of g"""
    x = np.asarray(x, dtype=float)
    values = g(t, x)
    d = _jacobian_tensor(g, t, x, h)
    residual = 0.0
    for j, m in itertools.combinations(range(len(x)), 2):
        bracket = d[:, m, :] @ values[:, j] - d[:, j, :] @ values[:, m]
        residual = max(residual, float(np.max(np.abs(bracket))))
    return residual


def lattice_points(dimension: int, cap: int = FROBENIUS_LATTICE_CAP, limit: int = FROBENIUS_LATTICE_POINTS) -> int:
    """Points per axis of the (t, x1..xn) lattice, the largest count whose lattice stays within cap (at least 2)"""
    k = min(limit, 2)
    while k < limit and (k + 1) ** (dimension + 1) <= cap:
        k += 1
    return k


def frobenius_check(g: MatrixField, t_range: tuple[float, float], box: Sequence[tuple[float, float]],
                    tolerance: float = FROBENIUS_TOLERANCE) -> FrobeniusReport:
    """Evaluate frobenius_residual on a lattice over t_range x box"""
    if len(box) != g.dimension:
        raise DomainError(f"Box has {len(box)} axes, field dimension is {g.dimension}.")
    k = lattice_points(g.dimension)
    axes = [np.linspace(lo, hi, k) for lo, hi in (t_range, *box)]
    worst = (-1.0, 0.0, ())
    count = 0
    for point in itertools.product(*axes):
        t, x = point[0], np.array(point[1:])
        residual = frobenius_residual(g, t, x)
        count += 1
        if residual > worst[0]:
            worst = (residual, float(t), tuple(float(v) for v in x))
    logger.debug("Frobenius residual %s on %d lattice points.", worst[0], count)
    return FrobeniusReport(worst[0], worst[1], worst[2], count, tolerance)


def shape_sensitivity(ivp: ImpulsiveIVP, shapes: Sequence[Sequence[Shape]], steps: int = DEFAULT_JUMP_STEPS,
                      steps_per_segment: int = DEFAULT_SEGMENT_STEPS, impulse: int = 0) -> ShapeSensitivity:
    """Jump endpoints of the selected impulse for every shape vector, all started from the same x(t-)"""
    if not 0 <= impulse < len(ivp.impulses):
        raise DomainError(f"Problem has {len(ivp.impulses)} impulses, index {impulse} requested.")
    t, x = ivp.t0, np.array(ivp.x0)
    for earlier in ivp.impulses[:impulse]:
        x_minus = integrate_smooth(ivp.f, t, earlier.location, x, steps_per_segment).final
        t, x = earlier.location, jump_map(ivp.g, earlier.location, earlier.shapes, x_minus, steps).x_plus
    target = ivp.impulses[impulse]
    x_minus = integrate_smooth(ivp.f, t, target.location, x, steps_per_segment).final
    endpoints = tuple(tuple(jump_map(ivp.g, target.location, vector, x_minus, steps).x_plus.tolist())
                      for vector in shapes)
    return ShapeSensitivity(tuple(x_minus.tolist()), endpoints)
