"""Rogers' dilogarithm as a closed expression plus four orbit integrals of the closed-form F♭."""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from pyspenceabel.const import DEFAULT_XS, EVAL_ROGERS_MAX_DIFF, ZETA2
from pyspenceabel.dilog.orientation import f_flat_closed
from pyspenceabel.dilog.reference import rogers_reference
from pyspenceabel.geometry.circle import theta_of_x
from pyspenceabel.models import DomainError, FormulaVariant, ToleranceNotMet
from pyspenceabel.quadrature import QuadConfig
from pyspenceabel.solver.primitive import orbit_integral, orbit_table

_LOGGER = logging.getLogger(__name__)


def first_line(x: float, variant: Union[FormulaVariant, str] = FormulaVariant.BODY) -> float:
    """The non-integral part: ζ(2)/2 - ⨍ of the orientation cocycle."""
    variant = FormulaVariant(variant)
    if variant is FormulaVariant.BODY:
        return ZETA2 / 2 + ZETA2 / (2 * math.pi) * (theta_of_x(x).angle - 1.5 * math.pi)
    return ZETA2 / 2 - ZETA2 / (2 * math.pi) * (math.atan(2 * x / (1 - x * x)) + math.pi / 2)


def rogers_new_formula(
    x: float, cfg: Optional[QuadConfig] = None, variant: Union[FormulaVariant, str] = FormulaVariant.BODY
) -> float:
    """L₂(x) from the orientation cocycle: first line plus Σ ±∫₀^T F♭(n_t.Φ, n_t.(2π - Φ)) dt."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"x = {x} outside (0, 1)")
    variant = FormulaVariant(variant)
    cfg = cfg or QuadConfig.pipeline()
    Fb = partial(f_flat_closed, variant=variant)
    integrals = [row.sign * orbit_integral(Fb, row.T, row.a, cfg) for row in orbit_table(x)]
    return first_line(x, variant) + math.fsum(integrals)


@dataclass
class VariantVerdict:
    """Outcome of running both formula conventions against the reference series."""

    max_diff: dict[FormulaVariant, float]
    """sup |formula - reference| per variant."""

    tolerance: float
    winner: FormulaVariant
    losers: list[FormulaVariant] = field(default_factory=list)

    def as_dict(self) -> dict:
        """JSON-friendly form."""
        return {
            "winner": self.winner.value,
            "losers": [v.value for v in self.losers],
            "tolerance": self.tolerance,
            "max_diff": {k.value: v for k, v in self.max_diff.items()},
        }


def arbitrate_variant(
    xs: Sequence[float] = DEFAULT_XS,
    cfg: Optional[QuadConfig] = None,
    tol: float = EVAL_ROGERS_MAX_DIFF,
    computed: Optional[Mapping[FormulaVariant, Sequence[float]]] = None,
) -> VariantVerdict:
    """Evaluate both conventions on xs; the passing variant with the smaller deviation wins.

    Values already `computed` for a variant on the same xs are used as they are.
    """
    reference = np.asarray(rogers_reference(np.asarray(xs, dtype=float)))
    computed = computed or {}
    max_diff = {}
    for variant in FormulaVariant:
        if variant in computed:
            values = np.asarray(computed[variant], dtype=float)
        else:
            values = np.array([rogers_new_formula(x, cfg, variant) for x in xs])
        max_diff[variant] = float(np.max(np.abs(values - reference)))
    passing = sorted((v for v in FormulaVariant if max_diff[v] <= tol), key=lambda v: max_diff[v])
    if not passing:
        raise ToleranceNotMet(
            f"No formula variant within {tol:.1e} of the reference: {max_diff}",
            error_estimate=min(max_diff.values()),
        )
    verdict = VariantVerdict(max_diff, tol, passing[0], [v for v in FormulaVariant if v is not passing[0]])
    _LOGGER.info("Formula variant %s wins (%s)", verdict.winner.value, verdict.as_dict()["max_diff"])
    return verdict
