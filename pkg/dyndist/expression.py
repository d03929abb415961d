"""Arithmetic field expressions over t and the state variables x1..xn."""
from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import DomainError, FieldEvaluationError, ParseError, UnknownIdentifierError, VariableIndexError

Compiled = Callable[[float, Sequence[float]], float]

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "tanh": math.tanh,
}

_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_VARIABLE = re.compile(r"x(\d+)")


class _Token(NamedTuple):
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> Iterator[_Token]:
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            raise ParseError(f"Unexpected character '{text[position]}'", position)
        if match.lastgroup != "space":
            yield _Token(match.lastgroup, match.group(), position)
        position = match.end()
    yield _Token("end", "", len(text))


class FieldExpr(ABC):
    """Node of an expression tree"""

    @abstractmethod
    def evaluate(self, t: float, x: Sequence[float]) -> float:
        """Evaluate at time t and state x (x[0] is x1)"""

    @abstractmethod
    def compile(self) -> Compiled:
        """Closure evaluating the expression, for the integrators"""


@dataclass(frozen=True)
class Number(FieldExpr):
    value: float

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        return self.value

    def compile(self) -> Compiled:
        value = self.value
        return lambda t, x: value

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Time(FieldExpr):

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        return t

    def compile(self) -> Compiled:
        return lambda t, x: t

    def __str__(self) -> str:
        return "t"


@dataclass(frozen=True)
class Variable(FieldExpr):
    """State variable x<index>, 1-based"""

    index: int

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        return x[self.index - 1]

    def compile(self) -> Compiled:
        i = self.index - 1
        return lambda t, x: x[i]

    def __str__(self) -> str:
        return f"x{self.index}"


_OPERATIONS: dict[str, Callable[[float, float], float]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
}


@dataclass(frozen=True)
class BinaryOp(FieldExpr):
    op: str
    left: FieldExpr
    right: FieldExpr

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        return _OPERATIONS[self.op](self.left.evaluate(t, x), self.right.evaluate(t, x))

    def compile(self) -> Compiled:
        operation = _OPERATIONS[self.op]
        left, right = self.left.compile(), self.right.compile()
        return lambda t, x: operation(left(t, x), right(t, x))

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Power(FieldExpr):
    """Base raised to a non-negative integer exponent"""

    base: FieldExpr
    exponent: int

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        return self.base.evaluate(t, x) ** self.exponent

    def compile(self) -> Compiled:
        base, exponent = self.base.compile(), self.exponent
        return lambda t, x: base(t, x) ** exponent

    def __str__(self) -> str:
        if isinstance(self.base, Power):
            return f"({self.base})^{self.exponent}"
        return f"{self.base}^{self.exponent}"


@dataclass(frozen=True)
class Call(FieldExpr):
    function: str
    argument: FieldExpr

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        return FUNCTIONS[self.function](self.argument.evaluate(t, x))

    def compile(self) -> Compiled:
        function, argument = FUNCTIONS[self.function], self.argument.compile()
        return lambda t, x: function(argument(t, x))

    def __str__(self) -> str:
        return f"{self.function}({self.argument})"


class _Parser:
    """Recursive descent over the token stream, one method per grammar rule"""

    def __init__(self, text: str, dimension: Optional[int]):
        self.tokens = list(_tokenize(text))
        self.index = 0
        self.dimension = dimension

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def _expect(self, text: str) -> None:
        if self.current.text != text:
            raise ParseError(f"Expected '{text}', got '{self.current.text or 'end of text'}'", self.current.position)
        self._advance()

    def parse(self) -> FieldExpr:
        node = self._expr()
        if self.current.kind != "end":
            raise ParseError(f"Unexpected '{self.current.text}'", self.current.position)
        return node

    def _expr(self) -> FieldExpr:
        node = self._term()
        while self.current.text in ("+", "-"):
            op = self._advance().text
            node = BinaryOp(op, node, self._term())
        return node

    def _term(self) -> FieldExpr:
        node = self._factor()
        while self.current.text in ("*", "/"):
            op = self._advance().text
            node = BinaryOp(op, node, self._factor())
        return node

    def _factor(self) -> FieldExpr:
        node = self._base()
        if self.current.text == "^":
            self._advance()
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise ParseError("Exponent must be a non-negative integer", token.position)
            self._advance()
            node = Power(node, int(token.text))
        return node

    def _base(self) -> FieldExpr:
        token = self.current
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ParseError(f"Number {token.text} out of range", token.position)
            return Number(value)
        if token.kind == "name":
            self._advance()
            return self._name(token)
        if token.text == "(":
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        raise ParseError(f"Unexpected '{token.text or 'end of text'}'", token.position)

    def _name(self, token: _Token) -> FieldExpr:
        if token.text == "t":
            return Time()
        variable = _VARIABLE.fullmatch(token.text)
        if variable:
            index = int(variable.group(1))
            if index < 1 or (self.dimension is not None and index > self.dimension):
                raise VariableIndexError(f"Variable {token.text} outside x1..x{self.dimension}", token.position)
            return Variable(index)
        if token.text in FUNCTIONS:
            self._expect("(")
            argument = self._expr()
            self._expect(")")
            return Call(token.text, argument)
        raise UnknownIdentifierError(f"Unknown identifier '{token.text}'", token.position)


def parse_field(text: str, dimension: Optional[int] = None) -> FieldExpr:
    """
    Parse an expression of the grammar

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := base ('^' integer)?
        base   := number | 't' | 'x' digits | func '(' expr ')' | '(' expr ')'
        func   := sin | cos | exp | tanh

    When dimension is given, variable indices must lie in 1..dimension.
    """
    return _Parser(text, dimension).parse()


def _guarded(compiled: Compiled, label: str) -> Compiled:
    def evaluate(t: float, x: Sequence[float]) -> float:
        try:
            return compiled(t, x)
        except (ZeroDivisionError, OverflowError, ValueError) as ex:
            raise FieldEvaluationError(t, f"Evaluation of {label} failed ({ex})") from None

    return evaluate


class VectorField:
    """Drift f(t, x): n expressions evaluated to a state-sized vector"""

    def __init__(self, expressions: Sequence[FieldExpr]):
        self.expressions: tuple[FieldExpr, ...] = tuple(expressions)
        self.dimension: int = len(self.expressions)
        self._compiled = [_guarded(e.compile(), f"f{i + 1}") for i, e in enumerate(self.expressions)]

    @classmethod
    def parse(cls, texts: Sequence[str]) -> VectorField:
        return cls([parse_field(text, len(texts)) for text in texts])

    @classmethod
    def zero(cls, dimension: int) -> VectorField:
        return cls([Number(0.0)] * dimension)

    def __call__(self, t: float, x: Sequence[float]) -> np.ndarray:
        return np.array([f(t, x) for f in self._compiled])

    def __str__(self) -> str:
        return "; ".join(str(e) for e in self.expressions)


class MatrixField:
    """Jump field g(t, x): n x n expressions, applied to the vector of shape values"""

    def __init__(self, rows: Sequence[Sequence[FieldExpr]]):
        self.rows: tuple[tuple[FieldExpr, ...], ...] = tuple(tuple(row) for row in rows)
        self.dimension: int = len(self.rows)
        if any(len(row) != self.dimension for row in self.rows):
            raise DomainError(f"Jump field must be square, got rows of lengths {[len(row) for row in self.rows]}.")
        self._compiled = [[_guarded(e.compile(), f"g{i + 1}{j + 1}") for j, e in enumerate(row)]
                          for i, row in enumerate(self.rows)]

    @classmethod
    def parse(cls, texts: Sequence[Sequence[str]]) -> MatrixField:
        n = len(texts)
        return cls([[parse_field(text, n) for text in row] for row in texts])

    def __call__(self, t: float, x: Sequence[float]) -> np.ndarray:
        return np.array([[g(t, x) for g in row] for row in self._compiled])

    def __str__(self) -> str:
        return " | ".join("; ".join(str(e) for e in row) for row in self.rows)
