"""Coboundary operators, the five- and six-term operators and residuals of the perturbed system."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import GRID_MARGIN, SIMPLEX_GRID_POINTS, UNIT_GRID_POINTS
from pyspenceabel.geometry.config import (
    AltFunction,
    AltFunction2,
    AltFunction3,
    Cochain,
    FunctionCochain,
    ParamPoint,
    alternation_map,
)
from pyspenceabel.models import DomainError

_LOGGER = logging.getLogger(__name__)

Function = Union[AltFunction, Callable[..., ArrayLike]]


def sample(f: Function, *coords: ArrayLike) -> np.ndarray:
    """Evaluate an AltFunction or a plain vectorized callable without domain checks."""
    value = f.evaluate(*coords) if isinstance(f, AltFunction) else f(*coords)
    value = np.asarray(value, dtype=float)
    shape = np.broadcast_shapes(*(np.shape(x) for x in coords))
    return value if value.shape == shape else np.broadcast_to(value, shape).copy()


class CoboundaryCochain(Cochain):
    """(δc)(z0, ..., z_{n+1}) = Σ_j (-1)^j c(z0, ..., ẑ_j, ..., z_{n+1})."""

    def __init__(self, cochain: Cochain):
        self.cochain = cochain
        self.arity = cochain.arity + 1

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        total = np.zeros(angles.shape[1:])
        for j in range(self.arity):
            term = self.cochain.evaluate(np.delete(angles, j, axis=0))
            total = total + term if j % 2 == 0 else total - term
        return total

    def __repr__(self) -> str:
        return f"delta({self.cochain!r})"


def delta_n(c: Union[Cochain, Callable], arity: Optional[int] = None) -> CoboundaryCochain:
    """Homogeneous coboundary of a function on (n+1)-point configurations."""
    if not isinstance(c, Cochain):
        if arity is None:
            raise DomainError("The arity of a plain callable must be given")
        c = FunctionCochain(c, arity)
    return CoboundaryCochain(c)


def five_term(f: Function, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """f(x) - f(y) - f(x/y) - f((y-1)/(x-1)) + f(x(y-1)/(y(x-1)))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (
        sample(f, x)
        - sample(f, y)
        - sample(f, x / y)
        - sample(f, (y - 1) / (x - 1))
        + sample(f, x * (y - 1) / (y * (x - 1)))
    )


def five_term_defect(L: Function, R: Optional[Function], C: float, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """five_term(L) - R + C, which vanishes for the solution of the system (R, C).

    The five-term expression of a solution carries the reflection constant: five_term(L₂) = -ζ(2).
    """
    values = five_term(L, x, y) + C
    if R is not None:
        values = values - sample(R, x, y)
    return values


def six_term(g: Function, x: ArrayLike, y: ArrayLike, z: ArrayLike) -> np.ndarray:
    """The explicit reduced coboundary of a function on 0 < x < y < 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    return (
        -sample(g, x, y)
        + sample(g, x, z)
        - sample(g, y, z)
        + sample(g, x / z, y / z)
        + sample(g, (z - 1) / (x - 1), (z - 1) / (y - 1))
        - sample(g, x * (z - 1) / (z * (x - 1)), y * (z - 1) / (z * (y - 1)))
    )


def tau3(f: Function) -> AltFunction2:
    """The five-term operator as a function on the 2-simplex."""
    return AltFunction2(lambda x, y: five_term(f, x, y), f"tau3({getattr(f, 'description', f)})")


def tau4(g: Function) -> AltFunction3:
    """The six-term operator as a function on the 3-simplex."""
    return AltFunction3(lambda x, y, z: six_term(g, x, y, z), f"tau4({getattr(g, 'description', g)})")


def six_term_lhs(g: Function) -> AltFunction3:
    """R(x,y) - R(x,z) + R(y,z) - ..., i.e. the negative of `tau4`."""
    return -tau4(g)


def p1_grid(n: int = UNIT_GRID_POINTS, margin: float = GRID_MARGIN) -> np.ndarray:
    """Equispaced points of [margin, 1 - margin]."""
    return np.linspace(margin, 1.0 - margin, n)


def p2_grid(n: int = SIMPLEX_GRID_POINTS, margin: float = GRID_MARGIN) -> tuple[np.ndarray, np.ndarray]:
    """Tensor grid of the 2-simplex with all gaps at least `margin`."""
    u = p1_grid(n, margin)
    x, y = np.meshgrid(u, u, indexing="ij")
    mask = y - x >= margin
    return x[mask], y[mask]


def p3_grid(
    n: int = SIMPLEX_GRID_POINTS, margin: float = GRID_MARGIN
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor grid of the 3-simplex with all gaps at least `margin`."""
    u = p1_grid(n, margin)
    x, y, z = np.meshgrid(u, u, u, indexing="ij")
    mask = (y - x >= margin) & (z - y >= margin)
    return x[mask], y[mask], z[mask]


def rsymmetry_defect(R: Function, grid: Optional[tuple[np.ndarray, np.ndarray]] = None) -> float:
    """sup |R(x, y) - R(1-y, (1-y)/(1-x))| on a grid of the 2-simplex."""
    x, y = grid if grid is not None else p2_grid()
    return float(np.max(np.abs(sample(R, x, y) - sample(R, *alternation_map(x, y)))))


@dataclass
class Residual:
    """Sampled defect of a candidate solution."""

    sup_abs: float
    """Largest absolute five-term defect."""

    samples: list[tuple[ParamPoint, float]] = field(default_factory=list)
    """Grid points with their signed defect."""

    reflection_sup: float = 0.0
    """Largest defect of L(x) + L(1-x) = C on the projected grid."""

    @property
    def worst(self) -> float:
        """Largest of both defects."""
        return max(self.sup_abs, self.reflection_sup)


def spence_abel_residual(
    L: Function,
    R: Optional[Function],
    C: float,
    grid: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> Residual:
    """Defects of L(x) - L(y) - ... = R(x, y) - C and L(x) + L(1-x) = C on a 2-simplex grid."""
    x, y = grid if grid is not None else p2_grid()
    values = five_term_defect(L, R, C, x, y)
    u = np.unique(np.concatenate([x, y]))
    reflection = np.abs(sample(L, u) + sample(L, 1.0 - u) - C)
    residual = Residual(
        sup_abs=float(np.max(np.abs(values))) if values.size else 0.0,
        samples=[(ParamPoint((float(a), float(b))), float(v)) for a, b, v in zip(x, y, values)],
        reflection_sup=float(np.max(reflection)) if reflection.size else 0.0,
    )
    _LOGGER.debug(
        "Residual on %d samples: five-term %.3e, reflection %.3e", len(values), residual.sup_abs, residual.reflection_sup
    )
    return residual
