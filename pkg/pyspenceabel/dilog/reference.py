"""Classical evaluation of Li₂ and of Rogers' dilogarithm L₂ on the unit interval."""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import LI2_SERIES_TERMS, LI2_TAIL_TOL, ZETA2
from pyspenceabel.models import DomainError, ToleranceNotMet
from pyspenceabel.quadrature import QuadConfig, integrate

_LOGGER = logging.getLogger(__name__)


def _scalar_or_array(value: np.ndarray) -> Union[float, np.ndarray]:
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class ReferenceDilog:
    """Li₂ by its power series, kept at arguments <= 1/2 through the reflection formula."""

    series_terms: int = LI2_SERIES_TERMS
    """Number of series terms."""

    tail_tol: float = LI2_TAIL_TOL
    """Bound the series tail x^{N+1}/((N+1)²(1-x)) must satisfy."""

    def _series(self, y: np.ndarray) -> np.ndarray:
        n = np.arange(1, self.series_terms + 1)
        tail = y ** (self.series_terms + 1) / ((self.series_terms + 1) ** 2 * (1 - y))
        if np.any(tail > self.tail_tol):
            raise ToleranceNotMet(
                f"Li2 series tail {float(np.max(tail)):.3e} exceeds {self.tail_tol:.1e}",
                error_estimate=float(np.max(tail)),
            )
        return np.sum(y[..., None] ** n / n**2, axis=-1)

    def partial_sums(self, x: float) -> np.ndarray:
        """Partial sums Σ_{n<=N} xⁿ/n² for N = 1..series_terms."""
        n = np.arange(1, self.series_terms + 1)
        return np.cumsum(x**n / n**2)

    def li2(self, x: ArrayLike) -> Union[float, np.ndarray]:
        """Li₂ on [0, 1]."""
        x = np.asarray(x, dtype=float)
        if not np.all((x >= 0) & (x <= 1)):
            raise DomainError(f"Li2 is evaluated on [0, 1], got {x}")
        low = x <= 0.5
        y = np.where(low, x, 1.0 - x)
        series = self._series(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            reflected = ZETA2 - np.log(x) * np.log1p(-x) - series
        value = np.where(low, series, reflected)
        value = np.where(x == 1.0, ZETA2, value)
        return _scalar_or_array(value)

    def rogers(self, x: ArrayLike) -> Union[float, np.ndarray]:
        """L₂(x) = ½(Li₂(x) - Li₂(1-x) + ζ(2)) on (0, 1)."""
        x = np.asarray(x, dtype=float)
        if not np.all((x > 0) & (x < 1)):
            raise DomainError(f"L2 is evaluated on (0, 1), got {x}")
        return _scalar_or_array(0.5 * (np.asarray(self.li2(x)) - np.asarray(self.li2(1.0 - x)) + ZETA2))


_DEFAULT = ReferenceDilog()


def li2_reference(x: ArrayLike) -> Union[float, np.ndarray]:
    """Li₂(x) for x in [0, 1]."""
    return _DEFAULT.li2(x)


def rogers_reference(x: ArrayLike) -> Union[float, np.ndarray]:
    """Rogers' dilogarithm L₂(x) for x in (0, 1)."""
    return _DEFAULT.rogers(x)


def rogers_integral(x: float, cfg: Optional[QuadConfig] = None) -> float:
    """L₂(x) = -½·∫₀ˣ (log t/(1-t) + log(1-t)/t) dt by adaptive quadrature."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"x = {x} outside (0, 1)")
    cfg = (cfg or QuadConfig()).replace(singular_endpoints=(True, True))

    def integrand(t):
        return np.log(t) / (1 - t) + np.log1p(-t) / t

    return -0.5 * float(integrate(integrand, 0.0, x, cfg).value)
