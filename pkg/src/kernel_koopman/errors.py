"""Exception hierarchy shared by all modules."""


class KoopmanError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(KoopmanError, ValueError):
    """An invalid construction parameter.

    The offending parameter name is kept in ``field``.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(KoopmanError, ValueError):
    """A point lies outside the domain of a kernel or map."""


class CapabilityError(KoopmanError):
    """The requested operation is not supported by this kernel or observable."""


class InconsistentPairError(KoopmanError, ValueError):
    """A map and its claimed inverse disagree on probe samples."""


class UnknownSourceError(KoopmanError, LookupError):
    """A snapshot-data map was asked for the image of a point it never stored."""


class DivergenceError(KoopmanError, ArithmeticError):
    """A trajectory left the overflow guard; ``escape_time`` records when."""

    def __init__(self, message, escape_time=None, point=None):
        self.escape_time = escape_time
        self.point = point
        super().__init__(message)


class DegenerateDictionaryError(KoopmanError):
    """The Gram matrix of a dictionary has no retained eigenvalues."""


class ShapeError(KoopmanError, ValueError):
    """Array or permutation input of the wrong shape."""


class RelationShapeError(ShapeError):
    """The maps of a structure relation have inconsistent dimensions."""


class EvaluationError(KoopmanError):
    """Evaluating an observable failed at a specific atom; ``index`` names it."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class NumericalError(KoopmanError, ArithmeticError):
    """A computation produced a result that violates its own contract."""


class ParseError(KoopmanError, ValueError):
    """Malformed input file; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        prefix = ", ".join(loc)
        super().__init__(f"{prefix}: {message}" if prefix else message)
