"""Loader of the line-oriented problem files read by the command line tool."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, TypeVar

from .catalog import FIELDS, SHAPES, heaviside_shape
from .const import BATTERY_SEED, BATTERY_SIZE, DEFAULT_JUMP_STEPS, DEFAULT_M_LIST, DEFAULT_SEGMENT_STEPS, MIN_WINDOW_STEPS
from .distribution import Atom, Distribution, TestFn
from .dynamic import DynamicFn, Profile, RegulatedFn, Shape
from .exceptions import CalculusError, ProblemError, UnresolvedReferenceError
from .expression import FieldExpr, MatrixField, VectorField, parse_field
from .ode import Impulse, ImpulsiveIVP
from .poly import PiecewisePoly

logger = logging.getLogger(__name__)

T = TypeVar("T")

_SECTION = re.compile(r"\[\s*([a-z]+)(?:\s+([A-Za-z_][\w.-]*))?\s*\]")
_PROFILE_KEY = re.compile(r"profile\s+(\S+)")
_HEAVISIDE = re.compile(r"heaviside-(.+)")

_NAMED_SECTIONS = ("shape", "function", "testfn", "distribution")
_SINGLE_SECTIONS = ("interval", "system", "command")


@dataclass
class Entry:
    key: str
    value: str
    line: int


@dataclass
class Section:
    kind: str
    name: Optional[str]
    line: int
    entries: list[Entry] = field(default_factory=list)

    def get(self, key: str) -> Optional[Entry]:
        found = [entry for entry in self.entries if entry.key == key]
        if len(found) > 1:
            raise ProblemError(f"Duplicate key '{key}' in section [{self.kind}].", found[1].line)
        return found[0] if found else None

    def all(self, key: str) -> list[Entry]:
        return [entry for entry in self.entries if entry.key == key]

    def require(self, key: str) -> Entry:
        entry = self.get(key)
        if entry is None:
            raise ProblemError(f"Missing key '{key}' in section [{self.kind}].", self.line)
        return entry


@dataclass(frozen=True)
class CommandSpec:
    """Parameters of the [command] section, defaults from the constants"""

    name: Optional[str] = None
    steps: int = DEFAULT_SEGMENT_STEPS
    jump_steps: int = DEFAULT_JUMP_STEPS
    window_steps: int = MIN_WINDOW_STEPS
    m_list: tuple[int, ...] = DEFAULT_M_LIST
    shape_list: tuple[tuple[Shape, ...], ...] = ()
    shape_labels: tuple[str, ...] = ()
    seed: int = BATTERY_SEED
    size: int = BATTERY_SIZE
    distribution: Optional[str] = None
    functions: tuple[str, ...] = ()
    testfns: tuple[str, ...] = ()


@dataclass(frozen=True)
class SystemSpec:
    """The ODE system with the Frobenius sampling box"""

    ivp: ImpulsiveIVP
    box: tuple[tuple[float, float], ...]
    t_range: tuple[float, float]


@dataclass
class ProblemFile:
    """Named objects of one problem file, all references resolved"""

    interval: tuple[float, float]
    shapes: dict[str, Shape] = field(default_factory=dict)
    functions: dict[str, DynamicFn] = field(default_factory=dict)
    testfns: dict[str, TestFn] = field(default_factory=dict)
    distributions: dict[str, Distribution] = field(default_factory=dict)
    system: Optional[SystemSpec] = None
    command: CommandSpec = field(default_factory=CommandSpec)

    def shape(self, name: str, line: int = 0) -> Shape:
        """Named shape: declared in the file, built-in (uniform, ramp, quadratic) or heaviside-<c>"""
        if name in self.shapes:
            return self.shapes[name]
        if name in SHAPES:
            return SHAPES[name]()
        heaviside = _HEAVISIDE.fullmatch(name)
        if heaviside:
            return heaviside_shape(_number(heaviside.group(1), line))
        raise UnresolvedReferenceError(name, line)

    def function(self, name: str, line: int = 0) -> DynamicFn:
        return _lookup(self.functions, name, line)

    def testfn(self, name: str, line: int = 0) -> TestFn:
        return _lookup(self.testfns, name, line)

    def distribution(self, name: str, line: int = 0) -> Distribution:
        return _lookup(self.distributions, name, line)


def _lookup(objects: dict[str, T], name: str, line: int) -> T:
    if name not in objects:
        raise UnresolvedReferenceError(name, line)
    return objects[name]


def _number(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ProblemError(f"Invalid number '{text}'.", line) from None


def _integer(text: str, line: int) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ProblemError(f"Invalid integer '{text}'.", line) from None


def parse_seed(text: str) -> int:
    """Battery seed written in hexadecimal, with or without the 0x prefix"""
    return int(text.strip(), 16)


def _numbers(text: str, line: int) -> list[float]:
    return [_number(item.strip(), line) for item in text.split(",") if item.strip()]


def _names(text: str) -> tuple[str, ...]:
    return tuple(item for item in re.split(r"[\s,]+", text) if item)


def _guarded(line: int, build: Callable[[], T]) -> T:
    """Run build, turning calculus errors into problem errors bound to the line"""
    try:
        return build()
    except ProblemError:
        raise
    except CalculusError as ex:
        raise ProblemError(str(ex) or type(ex).__name__, line) from None


def split_sections(text: str) -> list[Section]:
    """First pass: sections with their key = value entries, comments and blank lines dropped"""
    sections: list[Section] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            match = _SECTION.fullmatch(line)
            if match is None:
                raise ProblemError(f"Malformed section header '{line}'.", number)
            kind, name = match.groups()
            if kind in _NAMED_SECTIONS and not name:
                raise ProblemError(f"Section [{kind}] needs a name.", number)
            if kind in _SINGLE_SECTIONS and name:
                raise ProblemError(f"Section [{kind}] takes no name.", number)
            if kind not in _NAMED_SECTIONS + _SINGLE_SECTIONS:
                raise ProblemError(f"Unknown section [{kind}].", number)
            sections.append(Section(kind, name, number))
            continue
        if "=" not in line:
            raise ProblemError(f"Expected 'key = value', got '{line}'.", number)
        if not sections:
            raise ProblemError("Entry outside of any section.", number)
        key, value = (part.strip() for part in line.split("=", 1))
        sections[-1].entries.append(Entry(re.sub(r"\s+", " ", key), value, number))
    return sections


class _Loader:
    """Second pass: build the objects in dependency order"""

    def __init__(self, sections: list[Section]):
        self.sections = sections
        interval = self._single("interval")
        if interval is None:
            raise ProblemError("Missing [interval] section.")
        a = _number(interval.require("a").value, interval.require("a").line)
        b = _number(interval.require("b").value, interval.require("b").line)
        if not a < b:
            raise ProblemError(f"Empty interval ({a}, {b}).", interval.line)
        self.problem = ProblemFile((a, b))

    def _single(self, kind: str) -> Optional[Section]:
        found = [section for section in self.sections if section.kind == kind]
        if len(found) > 1:
            raise ProblemError(f"Duplicate section [{kind}].", found[1].line)
        return found[0] if found else None

    def _named(self, kind: str) -> list[Section]:
        found = [section for section in self.sections if section.kind == kind]
        seen: set[str] = set()
        for section in found:
            if section.name in seen:
                raise ProblemError(f"Duplicate {kind} '{section.name}'.", section.line)
            seen.add(section.name)
        return found

    def load(self) -> ProblemFile:
        problem = self.problem
        for section in self._named("shape"):
            problem.shapes[section.name] = self._shape(section)
        for section in self._named("function"):
            problem.functions[section.name] = self._function(section)
        for section in self._named("testfn"):
            problem.testfns[section.name] = self._testfn(section)
        for section in self._named("distribution"):
            problem.distributions[section.name] = self._distribution(section)
        system = self._single("system")
        if system is not None:
            problem.system = self._system(system)
        command = self._single("command")
        if command is not None:
            problem.command = self._command(command)
        logger.debug("Loaded %d shapes, %d functions, %d test functions, %d distributions.",
                     len(problem.shapes), len(problem.functions), len(problem.testfns), len(problem.distributions))
        return problem

    def _pieces(self, section: Section, default: tuple[float, float]) -> PiecewisePoly:
        entry = section.get("breakpoints")
        breakpoints = _numbers(entry.value, entry.line) if entry else list(default)
        pieces = section.all("piece")
        if not pieces:
            raise ProblemError(f"Section [{section.kind} {section.name}] has no piece.", section.line)
        if len(pieces) != len(breakpoints) - 1:
            raise ProblemError(f"{len(breakpoints)} breakpoints need {len(breakpoints) - 1} pieces, got {len(pieces)}.",
                               pieces[-1].line)
        if abs(breakpoints[0] - default[0]) > 1e-12 or abs(breakpoints[-1] - default[1]) > 1e-12:
            raise ProblemError(f"Breakpoints must span [{default[0]}, {default[1]}].", entry.line if entry else section.line)
        coefficients = [_numbers(piece.value, piece.line) for piece in pieces]
        return _guarded(section.line, lambda: PiecewisePoly.from_coefficients(breakpoints, coefficients))

    def _shape(self, section: Section) -> Shape:
        density = self._pieces(section, (-0.5, 0.5))
        return _guarded(section.line, lambda: Shape(density))

    def _function(self, section: Section) -> DynamicFn:
        ordinary = RegulatedFn(self._pieces(section, self.problem.interval))
        profiles: dict[float, Profile] = {}
        for entry in section.entries:
            match = _PROFILE_KEY.fullmatch(entry.key)
            if match is None:
                continue
            at = _number(match.group(1), entry.line)
            profiles[at] = _guarded(entry.line, lambda: self._profile(ordinary, at, entry.value, entry.line))
        embed = section.get("embed")
        if embed is not None and embed.value.lower() in ("yes", "true", "1"):
            for at, _ in ordinary.discontinuities():
                if not any(abs(at - p) <= ordinary.body.tolerance for p in profiles):
                    profiles[at] = Profile.step(ordinary.left(at), ordinary.right(at))
        return _guarded(section.line, lambda: DynamicFn(ordinary, profiles))

    @staticmethod
    def _profile(ordinary: RegulatedFn, at: float, value: str, line: int) -> Profile:
        if value == "step":
            return Profile.step(ordinary.left(at), ordinary.right(at))
        if value == "linear":
            return Profile.linear(ordinary.left(at), ordinary.right(at))
        return Profile.polynomial(_numbers(value, line))

    def _testfn(self, section: Section) -> TestFn:
        entry = section.require("function")
        body = self.problem.function(entry.value, entry.line)
        support = section.get("support")
        if support is None:
            return _guarded(section.line, lambda: TestFn.from_dynamic(body))
        bounds = _numbers(support.value, support.line)
        if len(bounds) != 2:
            raise ProblemError("Support needs two numbers.", support.line)
        return _guarded(support.line, lambda: TestFn(body, (bounds[0], bounds[1])))

    def _distribution(self, section: Section) -> Distribution:
        problem = self.problem
        regular = RegulatedFn.constant(0.0, *problem.interval)
        stieltjes = None
        entry = section.get("regular")
        if entry is not None:
            regular = problem.function(entry.value, entry.line).ordinary
        entry = section.get("stieltjes")
        if entry is not None:
            stieltjes = problem.function(entry.value, entry.line).ordinary.body
        atoms = []
        for entry in section.all("delta"):
            parts = entry.value.split()
            if len(parts) != 2:
                raise ProblemError("Expected 'delta = <location> <shape>'.", entry.line)
            shape = problem.shape(parts[1], entry.line)
            atoms.append(Atom(_number(parts[0], entry.line), density=shape.density))
        for entry in section.all("delta-lambda"):
            parts = entry.value.split()
            if len(parts) != 2:
                raise ProblemError("Expected 'delta-lambda = <location> <weight>'.", entry.line)
            weight = _number(parts[1], entry.line)
            atoms.append(Atom(_number(parts[0], entry.line), weight, 1.0 - weight))
        return _guarded(section.line, lambda: Distribution(regular, stieltjes, tuple(atoms)))

    def _system(self, section: Section) -> SystemSpec:
        problem = self.problem
        x0_entry = section.require("x0")
        x0 = _numbers(x0_entry.value, x0_entry.line)
        n = len(x0)
        dimension = section.get("dimension")
        if dimension is not None and _integer(dimension.value, dimension.line) != n:
            raise ProblemError(f"x0 has {n} components, dimension is {dimension.value}.", x0_entry.line)
        t0_entry = section.require("t0")
        t0 = _number(t0_entry.value, t0_entry.line)

        catalog = section.get("field")
        if catalog is not None:
            if catalog.value not in FIELDS:
                raise UnresolvedReferenceError(catalog.value, catalog.line)
            entry = FIELDS[catalog.value]
            if entry.dimension != n:
                raise ProblemError(f"Field '{catalog.value}' has dimension {entry.dimension}.", catalog.line)
            f_texts = [(text, catalog.line) for text in entry.f]
            g_texts = [[(text, catalog.line) for text in row] for row in entry.g]
        else:
            f_texts = [self._expression_text(section, f"f{i + 1}") for i in range(n)]
            g_texts = [[self._expression_text(section, f"g{i + 1}{j + 1}") for j in range(n)] for i in range(n)]
        f = VectorField([self._expression(text, line, n) for text, line in f_texts])
        g = MatrixField([[self._expression(text, line, n) for text, line in row] for row in g_texts])

        impulses = []
        for entry in section.all("impulse"):
            parts = entry.value.split()
            if len(parts) != n + 1:
                raise ProblemError(f"Expected 'impulse = <location>' followed by {n} shape names.", entry.line)
            shapes = tuple(problem.shape(name, entry.line) for name in parts[1:])
            impulses.append(Impulse(_number(parts[0], entry.line), shapes))
        ivp = _guarded(section.line, lambda: ImpulsiveIVP(problem.interval, t0, tuple(x0), f, g, tuple(impulses)))

        box_entry = section.get("box")
        if box_entry is not None:
            box = tuple(tuple(_number(v, box_entry.line) for v in axis.split()) for axis in box_entry.value.split(";"))
            if len(box) != n or any(len(axis) != 2 for axis in box):
                raise ProblemError(f"Box needs {n} 'lo hi' pairs separated by ';'.", box_entry.line)
        else:
            box = tuple((x - 1.0, x + 1.0) for x in x0)
        range_entry = section.get("t-range")
        t_range = (t0, problem.interval[1])
        if range_entry is not None:
            bounds = _numbers(range_entry.value, range_entry.line)
            if len(bounds) != 2:
                raise ProblemError("t-range needs two numbers.", range_entry.line)
            t_range = (bounds[0], bounds[1])
        return SystemSpec(ivp, box, t_range)

    @staticmethod
    def _expression_text(section: Section, key: str) -> tuple[str, int]:
        entry = section.get(key)
        return (entry.value, entry.line) if entry else ("0", section.line)

    @staticmethod
    def _expression(text: str, line: int, n: int) -> FieldExpr:
        return _guarded(line, lambda: parse_field(text, n))

    def _command(self, section: Section) -> CommandSpec:
        problem = self.problem
        values: dict = {}
        for key, attribute in (("steps", "steps"), ("jump-steps", "jump_steps"), ("window-steps", "window_steps"),
                               ("size", "size")):
            entry = section.get(key)
            if entry is not None:
                values[attribute] = _integer(entry.value, entry.line)
        entry = section.get("seed")
        if entry is not None:
            try:
                values["seed"] = parse_seed(entry.value)
            except ValueError:
                raise ProblemError(f"Invalid hexadecimal seed '{entry.value}'.", entry.line) from None
        entry = section.get("name")
        if entry is not None:
            values["name"] = entry.value
        entry = section.get("m-list")
        if entry is not None:
            values["m_list"] = tuple(_integer(item, entry.line) for item in _names(entry.value))
        entry = section.get("shape-list")
        if entry is not None:
            vectors = [_names(vector) for vector in entry.value.split(";") if vector.strip()]
            values["shape_list"] = tuple(tuple(problem.shape(name, entry.line) for name in vector) for vector in vectors)
            values["shape_labels"] = tuple(" ".join(vector) for vector in vectors)
        entry = section.get("distribution")
        if entry is not None:
            problem.distribution(entry.value, entry.line)
            values["distribution"] = entry.value
        entry = section.get("functions")
        if entry is not None:
            values["functions"] = _names(entry.value)
            for name in values["functions"]:
                problem.function(name, entry.line)
        entry = section.get("testfns")
        if entry is not None:
            values["testfns"] = _names(entry.value)
            for name in values["testfns"]:
                problem.testfn(name, entry.line)
        return CommandSpec(**values)


def loads(text: str) -> ProblemFile:
    """Parse the text of a problem file"""
    return _Loader(split_sections(text)).load()


def load(path: str) -> ProblemFile:
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read())
