"""Adaptive and tensor quadrature used by every integral of the solver pipeline.

`integrate` is an adaptive Gauss-Kronrod 7/15 scheme with bisection of the worst interval, forced
breakpoints and optional geometric grading toward singular endpoints. `integrate_batch` runs the same
rule breadth-first over many integrals with per-sample breakpoints, which is how nested averages over
the circle are error-controlled. Fixed tensor Gauss-Legendre rules (`segment_rule`) serve smooth
integrands, and profiles that are evaluated many times are frozen into graded Chebyshev tables
(`PanelTable`).
"""

import dataclasses
import heapq
import logging
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev, legendre
from numpy.typing import ArrayLike

from pyspenceabel.const import (
    ABS_TOL_CLOSED_FORM,
    ABS_TOL_PIPELINE,
    AVERAGE_TOL,
    BATCH_MAX_DEPTH,
    GAUSS_ORDER,
    GRADED_MESH_LEVELS,
    MAX_SUBDIVISIONS,
    REL_TOL_DEFAULT,
    TABLE_DEGREE,
    TABLE_LEVELS,
    TWO_PI,
)
from pyspenceabel.models import InvalidInput, ToleranceNotMet

_LOGGER = logging.getLogger(__name__)

Number = Union[float, complex]

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15)
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

_NODES = np.concatenate([-_XGK, _XGK[-2::-1]])
_KRONROD_WEIGHTS = np.concatenate([_WGK, _WGK[-2::-1]])
_gauss_half = np.zeros(8)
_gauss_half[1::2] = _WG
_GAUSS_WEIGHTS = np.concatenate([_gauss_half, _gauss_half[-2::-1]])

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadConfig:
    """Accuracy and effort settings of the quadrature engine."""

    abs_tol: float = ABS_TOL_CLOSED_FORM
    """Absolute error target."""

    rel_tol: float = REL_TOL_DEFAULT
    """Relative error target; the looser of both targets is used."""

    max_subdivisions: int = MAX_SUBDIVISIONS
    """Number of bisections before giving up."""

    singular_endpoints: tuple[bool, bool] = (False, False)
    """Grade the mesh toward the lower/upper integration limit."""

    gauss_order: int = GAUSS_ORDER
    """Gauss-Legendre order per cell of the fixed radial rule."""

    table_degree: int = TABLE_DEGREE
    """Chebyshev degree per panel of tabulated profiles."""

    table_levels: int = TABLE_LEVELS
    """Dyadic grading levels toward each end of tabulated profiles."""

    average_tol: float = AVERAGE_TOL
    """Absolute error target of the nested circle averages behind F♭."""

    max_depth: int = BATCH_MAX_DEPTH
    """Bisection depth of the batched nested averages before giving up."""

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InvalidInput(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol >= 0:
            raise InvalidInput(f"rel_tol must be non-negative, got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise InvalidInput(f"max_subdivisions must be at least 1, got {self.max_subdivisions}")
        if self.gauss_order < 2 or self.table_degree < 2 or self.table_levels < 0:
            raise InvalidInput("gauss_order and table_degree must be >= 2, table_levels >= 0")
        if not self.average_tol > 0 or self.max_depth < 1:
            raise InvalidInput(
                f"average_tol must be positive and max_depth at least 1, got {self.average_tol}, {self.max_depth}"
            )
        object.__setattr__(self, "singular_endpoints", tuple(bool(s) for s in self.singular_endpoints))
        if len(self.singular_endpoints) != 2:
            raise InvalidInput("singular_endpoints takes two flags")

    @classmethod
    def pipeline(cls, **kwargs) -> "QuadConfig":
        """Defaults of the nested solver pipeline."""
        kwargs.setdefault("abs_tol", ABS_TOL_PIPELINE)
        return cls(**kwargs)

    def replace(self, **kwargs) -> "QuadConfig":
        """Copy with some fields changed."""
        return dataclasses.replace(self, **kwargs)

    def tolerance(self, value: Number) -> float:
        """Error target for an integral of size `value`."""
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadResult:
    """Value of an integral with its error estimate."""

    value: Number
    error_estimate: float = 0.0
    evaluations: int = 0

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError(f"Negative error estimate {self.error_estimate}")

    def __neg__(self) -> "QuadResult":
        return QuadResult(-self.value, self.error_estimate, self.evaluations)


def _fsum(values: Sequence[Number]) -> Number:
    if any(isinstance(v, complex) for v in values):
        return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
    return math.fsum(values)


def kronrod15(f: Callable[[np.ndarray], ArrayLike], a: float, b: float) -> tuple[Number, float]:
    """Gauss-Kronrod 7/15 estimate on [a, b] with the QUADPACK error heuristic."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fv = np.asarray(f(center + half * _NODES))
    if fv.shape != _NODES.shape:
        fv = np.broadcast_to(fv, _NODES.shape)
    resk = np.dot(_KRONROD_WEIGHTS, fv)
    resg = np.dot(_GAUSS_WEIGHTS, fv)
    resabs = np.dot(_KRONROD_WEIGHTS, np.abs(fv)) * abs(half)
    resasc = np.dot(_KRONROD_WEIGHTS, np.abs(fv - 0.5 * resk)) * abs(half)
    err = abs((resk - resg) * half)
    if resasc != 0 and err != 0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    value = resk * half
    value = complex(value) if np.iscomplexobj(value) else float(value)
    return value, float(err)


def graded_points(a: float, b: float, levels: int = GRADED_MESH_LEVELS) -> list[float]:
    """Geometric mesh a + (b - a)·2^{-j}, j = 1..levels, accumulating at a."""
    return [a + (b - a) * 0.5**j for j in range(1, levels + 1)]


def integrate(
    f: Callable[[np.ndarray], ArrayLike],
    a: float,
    b: float,
    cfg: Optional[QuadConfig] = None,
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """Oriented integral of a vectorized real or complex function over [a, b].

    Breakpoints inside (a, b) are forced mesh points. Singular endpoints (see `QuadConfig`) get a
    geometric mesh toward them. Raises ToleranceNotMet with the best estimate attached when the
    bisection budget is exhausted.
    """
    cfg = cfg or QuadConfig()
    if a == b:
        return QuadResult(0.0)
    if a > b:
        flipped = cfg.replace(singular_endpoints=cfg.singular_endpoints[::-1])
        return -integrate(f, b, a, flipped, breakpoints)

    points = sorted({float(a), float(b)} | {float(p) for p in breakpoints if a < p < b})
    if cfg.singular_endpoints[0]:
        points = sorted(set(points) | set(graded_points(points[0], points[1])))
    if cfg.singular_endpoints[1]:
        points = sorted(set(points) | set(graded_points(points[-1], points[-2])))

    heap: list[tuple[float, float, float, Number]] = []
    cells: dict[float, tuple[float, Number, float]] = {}
    evaluations = 0
    for lo, hi in zip(points, points[1:]):
        value, err = kronrod15(f, lo, hi)
        evaluations += 15
        heapq.heappush(heap, (-err, lo, hi, value))
        cells[lo] = (hi, value, err)

    def totals() -> tuple[Number, float]:
        ordered = [cells[key] for key in sorted(cells)]
        return _fsum([c[1] for c in ordered]), math.fsum(c[2] for c in ordered)

    total, error = totals()
    bisections = 0
    while error > cfg.tolerance(total):
        if bisections >= cfg.max_subdivisions:
            raise ToleranceNotMet(
                f"Integral over [{a}, {b}] not converged after {bisections} bisections: "
                f"error {error:.3e} > {cfg.tolerance(total):.3e}",
                value=total,
                error_estimate=error,
            )
        _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ToleranceNotMet(
                f"Interval [{lo}, {hi}] cannot be bisected further", value=total, error_estimate=error
            )
        for left, right in ((lo, mid), (mid, hi)):
            value, err = kronrod15(f, left, right)
            evaluations += 15
            heapq.heappush(heap, (-err, left, right, value))
            cells[left] = (right, value, err)
        bisections += 1
        total, error = totals()

    _LOGGER.debug(
        "Integrated over [%s, %s] with %d cells (%d bisections), error %.3e", a, b, len(cells), bisections, error
    )
    return QuadResult(total, error, evaluations)


def circle_average(
    f: Callable[[np.ndarray], ArrayLike],
    cfg: Optional[QuadConfig] = None,
    breakpoints: Sequence[float] = (),
    piecewise_constant: bool = False,
) -> QuadResult:
    """(1/2π)·∫₀^{2π} f(θ) dθ.

    For functions that are constant between the breakpoints the average is the exact
    length-weighted sum of one sample per arc.
    """
    breaks = sorted({0.0, TWO_PI} | {float(np.mod(p, TWO_PI)) for p in breakpoints})
    if piecewise_constant:
        lo = np.array(breaks[:-1])
        hi = np.array(breaks[1:])
        values = np.broadcast_to(np.asarray(f(0.5 * (lo + hi))), lo.shape)
        value = _fsum([v * (h - l) for v, l, h in zip(values.tolist(), lo.tolist(), hi.tolist())]) / TWO_PI
        return QuadResult(value, 0.0, len(lo))
    result = integrate(f, 0.0, TWO_PI, cfg, breakpoints=breaks)
    return QuadResult(result.value / TWO_PI, result.error_estimate / TWO_PI, result.evaluations)


def integrate_batch(
    f: Callable[[np.ndarray, np.ndarray], ArrayLike],
    breaks: ArrayLike,
    tol: float,
    max_depth: int = BATCH_MAX_DEPTH,
) -> tuple[np.ndarray, np.ndarray]:
    """Many real integrals at once by breadth-first adaptive Gauss-Kronrod 7/15.

    `breaks` has shape (m+1, n) and is sorted along axis 0: integral j runs from breaks[0, j] to
    breaks[-1, j] with forced mesh points at the interior rows. `f(t, owner)` evaluates integrand
    owner[k] at the nodes t[:, k], t of shape (15, k). A cell is accepted once its error estimate is
    below its share tol·length/span of the integral, so every integral meets `tol` on its own.

    Returns values and error estimates of shape (n,). Raises ToleranceNotMet, with the estimates
    attached, when an integral misses `tol` after `max_depth` bisections.
    """
    breaks = np.asarray(breaks, dtype=float)
    n = breaks.shape[1]
    span = breaks[-1] - breaks[0]
    density = tol / np.where(span > 0, span, 1.0)
    lo = breaks[:-1].T.ravel()
    hi = breaks[1:].T.ravel()
    owner = np.repeat(np.arange(n), breaks.shape[0] - 1)
    keep = hi > lo
    lo, hi, owner = lo[keep], hi[keep], owner[keep]
    values = np.zeros(n)
    errors = np.zeros(n)
    evaluations = 0
    for depth in range(max_depth + 1):
        if lo.size == 0:
            break
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        fv = np.asarray(f(center + half * _NODES[:, None], owner), dtype=float)
        evaluations += fv.size
        kronrod = (_KRONROD_WEIGHTS @ fv) * half
        err = np.abs(kronrod - (_GAUSS_WEIGHTS @ fv) * half)
        accept = err <= density[owner] * (hi - lo)
        if depth == max_depth:
            accept[:] = True
        np.add.at(values, owner[accept], kronrod[accept])
        np.add.at(errors, owner[accept], err[accept])
        refine = ~accept
        lo, hi, owner, center = lo[refine], hi[refine], owner[refine], center[refine]
        lo, hi, owner = np.concatenate([lo, center]), np.concatenate([center, hi]), np.concatenate([owner, owner])
    failed = errors > tol
    if np.any(failed):
        raise ToleranceNotMet(
            f"{int(np.sum(failed))} of {n} integrals not converged after {max_depth} bisections: "
            f"error {float(np.max(errors)):.3e} > {tol:.3e}",
            value=values,
            error_estimate=float(np.max(errors)),
        )
    _LOGGER.debug(
        "Integrated a batch of %d with %d evaluations, error %.3e", n, evaluations, float(errors.max(initial=0))
    )
    return values, errors


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""
    nodes, weights = legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def segment_rule(breaks: ArrayLike, order: int = GAUSS_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on per-sample breakpoints.

    `breaks` has shape (m, ...) and is sorted along axis 0. Returns nodes and weights of shape
    (order·(m-1), ...); empty segments carry zero weight.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    extra = (slice(None),) + (None,) * (breaks.ndim - 1)
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(0.5 * (lo + hi) + half * x[extra])
        weights.append(half * w[extra])
    return np.concatenate(nodes), np.concatenate(weights)


def graded_edges(a: float, b: float, levels: int) -> np.ndarray:
    """Panel edges on [a, b] graded dyadically toward both ends, with the midpoint as an edge."""
    mid = 0.5 * (a + b)
    scales = np.concatenate([[0.0], 0.5 ** np.arange(levels, 0, -1), [1.0]])
    left = a + (mid - a) * scales
    right = b - (b - mid) * scales[::-1]
    return np.concatenate([left, right[1:]])


class PanelTable:
    """Piecewise Chebyshev interpolant of a real function on graded panels.

    The function is sampled once, in a single vectorized call, on first-kind Chebyshev points of
    every panel.
    """

    def __init__(self, edges: np.ndarray, coefficients: np.ndarray):
        self.edges = edges
        self.coefficients = coefficients
        """Shape (degree + 1, panels)."""

    @property
    def degree(self) -> int:
        """Polynomial degree per panel."""
        return self.coefficients.shape[0] - 1

    @classmethod
    def build(
        cls,
        func: Callable[[np.ndarray], ArrayLike],
        a: float,
        b: float,
        degree: int = TABLE_DEGREE,
        levels: int = TABLE_LEVELS,
    ) -> "PanelTable":
        """Sample and fit `func` on [a, b]."""
        start = time.perf_counter()
        edges = graded_edges(a, b, levels)
        ref = chebyshev.chebpts1(degree + 1)
        lo, hi = edges[:-1], edges[1:]
        nodes = 0.5 * (lo + hi)[None, :] + 0.5 * (hi - lo)[None, :] * ref[:, None]
        values = np.asarray(func(nodes), dtype=float).reshape(nodes.shape)
        coefficients = chebyshev.chebfit(ref, values, degree)
        _LOGGER.debug(
            "Tabulated %d panels x %d nodes on [%.3g, %.3g] in %.2fs",
            len(lo),
            degree + 1,
            a,
            b,
            time.perf_counter() - start,
        )
        return cls(edges, coefficients)

    def __call__(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.edges) - 2)
        lo, hi = self.edges[idx], self.edges[idx + 1]
        t = np.clip(2.0 * (x - lo) / (hi - lo) - 1.0, -1.0, 1.0)
        basis = chebyshev.chebvander(t, self.degree)
        coefficients = np.moveaxis(self.coefficients[:, idx], 0, -1)
        return np.sum(basis * coefficients, axis=-1)
