"""General models used for pyspenceabel."""

from enum import Enum
from typing import Any, Optional, Union


class StrEnum(str, Enum):
    """Enumerate strings."""

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if isinstance(value, str) and member.value.upper() == value.replace("-", "_").upper():
                return member
        raise ValueError(f"{value} is not a valid {cls.__name__}")


class FormulaVariant(StrEnum):
    """Sign convention of the integral formula for Rogers' dilogarithm."""

    BODY = "body"
    INTRO = "intro"


class WeightConvention(StrEnum):
    """Reading of the weight inside the triple average of r_c."""

    SLOT = "slot"
    """Weight sin(eta - phi') on the slot-2 integration variable."""

    OUTER = "outer"
    """Weight sin(eta - phi) on the outer argument of r_c."""


class EvalMode(StrEnum):
    """What `eval-rogers` computes."""

    NEW_FORMULA = "new_formula"
    REFERENCE = "reference"
    BOTH = "both"


class Identity(StrEnum):
    """Identities checked by `check-identities`."""

    FIVE_TERM = "five_term"
    SIX_TERM = "six_term"
    REFLECTION = "reflection"
    COCYCLE = "cocycle"


class OutputFormat(StrEnum):
    """Output formats of the command line."""

    CSV = "csv"
    JSON = "json"


class SpenceAbelError(Exception):
    """General pyspenceabel error."""


class DegenerateConfiguration(SpenceAbelError, ValueError):
    """Two points of a configuration coincide within tolerance."""


class DomainError(SpenceAbelError, ValueError):
    """Argument outside the domain of an operation."""


class ToleranceNotMet(SpenceAbelError):
    """Requested accuracy could not be reached."""

    def __init__(self, message: str, value: Any = None, error_estimate: Optional[float] = None):
        super().__init__(message)
        self.value = value
        """Best estimate at the time of failure."""
        self.error_estimate = error_estimate
        """Error estimate belonging to `value`."""


class InvalidRhs(SpenceAbelError):
    """Right-hand side violates the 6-term equation or its symmetry."""

    def __init__(self, message: str, sample: Optional[tuple] = None, residual: Optional[float] = None):
        super().__init__(message)
        self.sample = sample
        """First failing sample point."""
        self.residual = residual
        """Residual at `sample`."""


class InvalidInput(SpenceAbelError, ValueError):
    """Malformed user input."""


def get_element_from_dict_maybe(
    data: dict, *path: str, default: "Any|None" = None
) -> Optional[Union[dict, list, str, int, float]]:
    """Get an element from a dict by path."""
    if len(path) == 0:
        return data
    if not isinstance(data, dict) or path[0] not in data:
        return default
    return get_element_from_dict_maybe(data[path[0]], *path[1:], default=default)
