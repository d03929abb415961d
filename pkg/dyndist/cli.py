"""Command line tool running the calculus and the solver on problem files."""
from __future__ import annotations

import argparse
import asyncio
import csv
import dataclasses
import io
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar, Union

import numpy as np

from .catalog import SHAPES
from .const import (CSV_DIGITS, EXIT_DIVERGENCE, EXIT_INVALID, EXIT_OK, EXIT_UNRESOLVED, FROBENIUS_VERDICTS,
                    MAX_DEVIATION, THREADS_ENV)
from .distribution import Atom, Distribution, TestFn, derivative, leibniz_residual, make_battery, multiply, pair
from .dynamic import DynamicFn
from .exceptions import CalculusError, DivergenceError, ProblemError, UnresolvedReferenceError
from .ode import ShapeSensitivity, frobenius_check, regularized_solve, shape_sensitivity, solve
from .poly import PiecewisePoly
from .problem import ProblemFile, SystemSpec, load, parse_seed

logger = logging.getLogger(__name__)

T = TypeVar("T")
Cell = Union[str, int, float]


class ResultTable:
    """Headers and rows of one command result, rendered aligned or as CSV"""

    def __init__(self, headers: Sequence[str]):
        self.headers: tuple[str, ...] = tuple(headers)
        self.rows: list[tuple[Cell, ...]] = []

    def add(self, *cells: Cell) -> None:
        if len(cells) != len(self.headers):
            raise ValueError(f"Row has {len(cells)} cells, table has {len(self.headers)} columns.")
        self.rows.append(tuple(cells))

    @staticmethod
    def _format(cell: Cell) -> str:
        if isinstance(cell, (float, np.floating)):
            return format(float(cell), f".{CSV_DIGITS}g")
        return str(cell)

    @staticmethod
    def _parse(text: str) -> Cell:
        try:
            return float(text)
        except ValueError:
            return text

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.headers)
        for row in self.rows:
            writer.writerow([self._format(cell) for cell in row])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> ResultTable:
        reader = csv.reader(io.StringIO(text))
        table = cls(next(reader))
        for row in reader:
            table.add(*(cls._parse(cell) for cell in row))
        return table

    def render(self) -> str:
        cells = [list(self.headers)] + [[self._format(cell) for cell in row] for row in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.headers))]
        return "\n".join("  ".join(cell.rjust(width) for cell, width in zip(row, widths)).rstrip() for row in cells) + "\n"

    def __eq__(self, other) -> bool:
        return isinstance(other, ResultTable) and self.headers == other.headers and self.rows == other.rows


def thread_count() -> int:
    """Worker count for sweeps, capped by the DYNDIST_THREADS environment variable"""
    default = os.cpu_count() or 1
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        logger.warning("Ignoring invalid %s=%r.", THREADS_ENV, value)
        return default


async def gather_calls(calls: Sequence[Callable[[], T]], threads: Optional[int] = None) -> list[T]:
    """Run the calls on a thread pool, results in the order of the calls"""
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=threads or thread_count()) as pool:
        return list(await asyncio.gather(*(loop.run_in_executor(pool, call) for call in calls)))


def _distribution(problem: ProblemFile) -> tuple[str, Distribution]:
    name = problem.command.distribution
    if name is None:
        if len(problem.distributions) != 1:
            raise ProblemError("Name the distribution in the [command] section.")
        name = next(iter(problem.distributions))
    return name, problem.distribution(name)


def _functions(problem: ProblemFile, count: int) -> list[tuple[str, DynamicFn]]:
    names = list(problem.command.functions or problem.functions)
    if not names:
        raise ProblemError("The problem declares no function.")
    while len(names) < count:
        names.append(names[-1])
    return [(name, problem.function(name)) for name in names[:count]]


def _testfns(problem: ProblemFile, locations: Sequence[float]) -> list[tuple[str, TestFn]]:
    """Named test functions of the command, otherwise the battery"""
    if problem.command.testfns:
        return [(name, problem.testfn(name)) for name in problem.command.testfns]
    battery = make_battery(problem.interval, locations, problem.command.size, problem.command.seed)
    return [(f"battery-{k}", phi) for k, phi in enumerate(battery)]


def _system(problem: ProblemFile) -> SystemSpec:
    if problem.system is None:
        raise ProblemError("The problem has no [system] section.")
    return problem.system


def _coefficients(density: PiecewisePoly) -> tuple[str, str]:
    """Interior breakpoints and the per-piece coefficients in s, pieces separated by '|'"""
    breakpoints = " ".join(format(x, f".{CSV_DIGITS}g") for x in density.breakpoints[1:-1])
    pieces = " | ".join(" ".join(format(c, f".{CSV_DIGITS}g") for c in coef)
                        for coef in density.global_coefficients())
    return breakpoints, pieces


def _atom_cells(atom: Atom) -> tuple[Cell, ...]:
    """Location, point weights, mass and the normalized shape of an atom (empty shape for zero density mass)"""
    shape = atom.shape
    breakpoints, pieces = _coefficients(shape.density) if shape is not None else ("", "")
    return atom.location, atom.right, atom.left, atom.mass, pieces, breakpoints


ATOM_HEADERS = ("location", "right", "left", "mass", "shape", "shape breakpoints")


def command_pair(problem: ProblemFile) -> ResultTable:
    _, T = _distribution(problem)
    table = ResultTable(("test function", "pairing"))
    for name, phi in _testfns(problem, [atom.location for atom in T.atoms]):
        table.add(name, pair(T, phi))
    return table


def command_product(problem: ProblemFile) -> ResultTable:
    """
    Atoms of g T with masses and shapes. The last column is the largest gap between (g T, phi) and (T, g phi)
    over the test functions of the command.
    """
    _, T = _distribution(problem)
    (_, g), = _functions(problem, 1)
    product = multiply(T, g)
    locations = sorted({atom.location for atom in T.atoms} | set(g.profile_points))
    gap = max((abs(pair(product, phi) - pair(T, phi.multiply(g))) for _, phi in _testfns(problem, locations)),
              default=0.0)
    logger.debug("Product pairing gap %s.", gap)
    table = ResultTable((*ATOM_HEADERS, "pairing gap"))
    for atom in product.atoms:
        table.add(*_atom_cells(atom), gap)
    return table


def command_derivative(problem: ProblemFile) -> ResultTable:
    (_, f), = _functions(problem, 1)
    table = ResultTable(ATOM_HEADERS)
    for atom in derivative(f).atoms:
        table.add(*_atom_cells(atom))
    return table


def command_leibniz(problem: ProblemFile) -> ResultTable:
    (f_name, f), (g_name, g) = _functions(problem, 2)
    locations = sorted(set(f.profile_points) | set(g.profile_points))
    battery = [phi for _, phi in _testfns(problem, locations)]
    table = ResultTable(("f", "g", "residual"))
    table.add(f_name, g_name, leibniz_residual(f, g, battery))
    return table


def command_solve(problem: ProblemFile) -> ResultTable:
    ivp = _system(problem).ivp
    trajectory = solve(ivp, problem.command.steps, problem.command.jump_steps)
    table = ResultTable(("phase", "t", "s", *(f"x{i + 1}" for i in range(ivp.dimension))))
    for k, segment in enumerate(trajectory.segments):
        for t, x in zip(segment.times, segment.states):
            table.add("smooth", float(t), "", *(float(v) for v in x))
        if k < len(trajectory.jumps):
            jump = trajectory.jumps[k]
            for s, x in zip(jump.s, jump.gamma):
                table.add("jump", jump.location, float(s), *(float(v) for v in x))
    return table


def command_regularize(problem: ProblemFile) -> ResultTable:
    """Regularized endpoints for every m of the m-list and their distance to the jump solution"""
    ivp = _system(problem).ivp
    command = problem.command
    reference = solve(ivp, command.steps, command.jump_steps).endpoint
    calls = [lambda m=m: regularized_solve(ivp, m, command.window_steps, command.steps).final for m in command.m_list]
    endpoints = asyncio.run(gather_calls(calls))
    table = ResultTable(("m", *(f"x{i + 1}" for i in range(ivp.dimension)), "error"))
    for m, x in zip(command.m_list, endpoints):
        table.add(m, *(float(v) for v in x), float(np.max(np.abs(x - reference))))
    return table


def command_frobenius(problem: ProblemFile) -> ResultTable:
    system = _system(problem)
    report = frobenius_check(system.ivp.g, system.t_range, system.box)
    table = ResultTable(("max residual", "lattice points", "verdict"))
    table.add(report.max_residual, report.lattice_size, FROBENIUS_VERDICTS[report.satisfied])
    return table


def command_sweep_shapes(problem: ProblemFile) -> ResultTable:
    """
    Jump endpoints of the first impulse for every shape vector of the shape-list, each with its distance
    to the first row, closed by a row with the largest pairwise deviation.
    """
    ivp = _system(problem).ivp
    command = problem.command
    vectors, labels = command.shape_list, command.shape_labels
    if not vectors:
        vectors = tuple((factory(),) * ivp.dimension for factory in SHAPES.values())
        labels = tuple(" ".join((name,) * ivp.dimension) for name in SHAPES)
    calls = [lambda vector=vector: shape_sensitivity(ivp, (vector,), command.jump_steps, command.steps)
             for vector in vectors]
    results = asyncio.run(gather_calls(calls))
    sensitivity = ShapeSensitivity(results[0].x_minus, tuple(result.endpoints[0] for result in results))
    logger.debug("Shape deviation %s over %d shape vectors.", sensitivity.deviation, len(vectors))
    first = np.array(sensitivity.endpoints[0])
    table = ResultTable(("shapes", *(f"x{i + 1}" for i in range(ivp.dimension)), "distance to first"))
    for label, endpoint in zip(labels, sensitivity.endpoints):
        table.add(label, *endpoint, float(np.max(np.abs(np.array(endpoint) - first))))
    table.add(MAX_DEVIATION, *("",) * ivp.dimension, sensitivity.deviation)
    return table


COMMANDS: dict[str, Callable[[ProblemFile], ResultTable]] = {
    "pair": command_pair,
    "product": command_product,
    "derivative": command_derivative,
    "leibniz": command_leibniz,
    "solve": command_solve,
    "regularize": command_regularize,
    "frobenius": command_frobenius,
    "sweep-shapes": command_sweep_shapes,
}


def execute(command: str, problem: ProblemFile) -> ResultTable:
    """Run a subcommand; run executes the command declared in the problem file"""
    if command == "run":
        command = problem.command.name
        if command is None:
            raise ProblemError("The [command] section declares no name.")
    if command not in COMMANDS:
        raise ProblemError(f"Unknown command '{command}'.")
    logger.debug("Executing %s.", command)
    return COMMANDS[command](problem)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyndist", description="Distributions on dynamic test functions and "
                                                                 "impulsive differential equations.")
    parser.add_argument("command", choices=[*COMMANDS, "run"])
    parser.add_argument("--problem", required=True, help="problem file")
    parser.add_argument("--out", help="write the result as CSV to this file")
    parser.add_argument("--steps", type=int, help="RK4 steps per smooth segment")
    parser.add_argument("--seed", type=parse_seed, metavar="HEX", help="seed of the test function battery")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        format="%(asctime)-15s %(funcName)s(%(lineno)d) - %(levelname)s: %(message)s",
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
    )
    try:
        problem = load(args.problem)
        overrides = {key: value for key, value in (("steps", args.steps), ("seed", args.seed)) if value is not None}
        if overrides:
            problem.command = dataclasses.replace(problem.command, **overrides)
        table = execute(args.command, problem)
    except UnresolvedReferenceError as ex:
        logger.error("%s: %s", args.problem, ex)
        return EXIT_UNRESOLVED
    except DivergenceError as ex:
        logger.error("%s: %s", args.problem, ex)
        logger.debug("Divergence details.", exc_info=True)
        return EXIT_DIVERGENCE
    except (CalculusError, OSError) as ex:
        logger.error("%s: %s", args.problem, ex)
        logger.debug("Failure details.", exc_info=True)
        return EXIT_INVALID

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            f.write(table.to_csv())
    else:
        sys.stdout.write(table.render())
    return EXIT_OK
