"""Circle geometry, configurations and cross-ratio coordinates."""

from .circle import CirclePoint, ExtComplex, NtElement  # noqa: F401
from .config import Config, ParamPoint  # noqa: F401
