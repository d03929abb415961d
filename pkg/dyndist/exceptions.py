"""Exceptions declarations."""


class CalculusError(Exception):
    """Indicates error in the distribution calculus or the impulsive solver"""


class DomainError(CalculusError):
    """
    Indicates a point, interval or window lies outside the domain of the object it was applied to,
    or two objects are defined on different domains.

    Attributes:
        message -- explanation of the error
    """

    def __init__(self, message: str = ''):
        self.message: str = message


class SideError(DomainError):
    """Indicates a one-sided limit was requested outside the domain (left limit at lo, right limit at hi)"""


class DegenerateMapError(CalculusError):
    """Indicates an affine substitution with zero scale"""


class DegreeOverflowError(CalculusError):
    """
    Indicates a polynomial piece exceeded the allowed degree.

    Attributes:
        degree -- degree of the offending piece
        limit -- maximal allowed degree
    """

    def __init__(self, degree: int, limit: int):
        self.degree: int = degree
        self.limit: int = limit

    def __str__(self) -> str:
        return f"Polynomial degree {self.degree} exceeds the limit {self.limit}."


class NormalizationError(CalculusError):
    """
    Indicates a shape density does not integrate to 1 over J.

    Attributes:
        mass -- integral of the density over J
    """

    def __init__(self, mass: float):
        self.mass: float = mass

    def __str__(self) -> str:
        return f"Shape is not normalized, its mass is {self.mass!r}."


class EndpointMismatchError(CalculusError):
    """
    Indicates the dynamic value at a point does not connect the one-sided limits of the ordinary part.

    Attributes:
        location -- point of the offending profile
        message -- explanation of the error
    """

    def __init__(self, location: float, message: str = ''):
        self.location: float = location
        self.message: str = message

    def __str__(self) -> str:
        return f"Profile at {self.location!r} does not match the one-sided limits. {self.message}".rstrip()


class MissingProfileError(CalculusError):
    """
    Indicates a discontinuity of the ordinary part carries no dynamic value.

    Attributes:
        location -- point of the discontinuity
    """

    def __init__(self, location: float):
        self.location: float = location

    def __str__(self) -> str:
        return f"Discontinuity at {self.location!r} carries no profile."


class NotDifferentiableError(CalculusError):
    """
    Indicates a dynamic function with a step-containing dynamic value was differentiated.

    Attributes:
        location -- point of the step-containing profile
    """

    def __init__(self, location: float):
        self.location: float = location

    def __str__(self) -> str:
        return f"Profile at {self.location!r} is not continuous, derivative is not defined."


class DeltaSequenceError(CalculusError):
    """Indicates a delta-sequence was requested for an atom having point weights"""


class ParseError(CalculusError):
    """
    Indicates the field expression text does not follow the grammar.

    Attributes:
        message -- explanation of the error
        position -- 0-based offset of the offending character in the text
    """

    def __init__(self, message: str = '', position: int = 0):
        self.message: str = message
        self.position: int = position

    def __str__(self) -> str:
        return f"{self.message} (at position {self.position})"


class UnknownIdentifierError(ParseError):
    """Indicates an identifier which is neither a variable nor a supported function"""


class VariableIndexError(ParseError):
    """Indicates a state variable index outside 1..n"""


class DivergenceError(CalculusError):
    """
    Indicates the integrated state became non-finite.

    Attributes:
        time -- (fast or slow) time at which the divergence was detected
        message -- explanation of the error
    """

    def __init__(self, time: float, message: str = ''):
        self.time: float = time
        self.message: str = message

    def __str__(self) -> str:
        return f"{self.message or 'Non-finite state'} at time {self.time!r}"


class FieldEvaluationError(DivergenceError):
    """Indicates a field expression could not be evaluated (division by zero, overflow)"""


class ResolutionError(CalculusError):
    """Indicates a mollifier window is resolved by too few integrator steps"""


class ProblemError(CalculusError):
    """
    Indicates problem file could not be parsed or validated.

    Attributes:
        message -- explanation of the error
        line -- 1-based line number in the problem file (0 when not bound to a line)
    """

    def __init__(self, message: str = '', line: int = 0):
        self.message: str = message
        self.line: int = line

    def __str__(self) -> str:
        if self.line:
            return f"line {self.line}: {self.message}"
        return self.message


class UnresolvedReferenceError(ProblemError):
    """
    Indicates a named object referenced in the problem file is not defined.

    Attributes:
        name -- the unresolved name
    """

    def __init__(self, name: str, line: int = 0):
        super().__init__(f"Unresolved reference '{name}'.", line)
        self.name: str = name
