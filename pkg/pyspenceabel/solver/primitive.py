"""Orbit coordinates, the primitive p_c and the general solver of the perturbed system."""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import GRID_MARGIN, RHS_VALIDATION_POINTS, RHS_VALIDATION_TOL, TWO_PI
from pyspenceabel.geometry.circle import arccot, cot_half, nt_angle_action, theta_of_x
from pyspenceabel.geometry.config import (
    AltFunction,
    AltFunction2,
    Cochain,
    Config,
    alternation_map,
    extension,
    sort_cyclically,
)
from pyspenceabel.models import DomainError, InvalidRhs
from pyspenceabel.operators import p2_grid, p3_grid, sample, six_term
from pyspenceabel.quadrature import QuadConfig, circle_average, integrate
from pyspenceabel.solver.flat import flat_integrand
from pyspenceabel.utils import parallel_map

_LOGGER = logging.getLogger(__name__)

FlatFunction = Callable[[np.ndarray, np.ndarray], ArrayLike]


def t_phi(phi1: float, phi2: float) -> tuple[float, float]:
    """Coordinates (T, Φ) with n_T.(Φ, 2π - Φ) = (φ1, φ2).

    T = -½(cot(φ1/2) + cot(φ2/2)) and Φ = 2·arccot(½(cot(φ1/2) - cot(φ2/2))).
    """
    if not (0.0 < phi1 < TWO_PI and 0.0 < phi2 < TWO_PI) or phi1 == phi2:
        raise DomainError(f"({phi1}, {phi2}) are not distinct angles in (0, 2π)")
    c1, c2 = float(cot_half(phi1)), float(cot_half(phi2))
    return -0.5 * (c1 + c2), float(2.0 * arccot(0.5 * (c1 - c2)))


@dataclass(frozen=True)
class OrbitRow:
    """One integral ±∫₀^T F♭(2·arccot(-t + a), 2·arccot(-t - a)) dt of the solution formula."""

    phi1: float
    phi2: float
    sign: int
    T: float
    a: float
    """cot(Φ/2), so that n_t.Φ = 2·arccot(-t + a)."""

    @classmethod
    def of(cls, phi1: float, phi2: float, sign: int) -> "OrbitRow":
        """Row for the pair (φ1, φ2)."""
        T, Phi = t_phi(phi1, phi2)
        return cls(phi1, phi2, sign, T, float(cot_half(Phi)))


def orbit_table(x: float) -> list[OrbitRow]:
    """The four orbit integrals at x: rows (θ-π, π/2), (θ, 3π/2), (π, 3π/2), (π, θ) with θ = θ(x).

    In closed form T = -(1+x)/(2x), (x+1)/2, 1/2, x/2 and a = (1-x)/(2x), (1-x)/2, 1/2, x/2.
    """
    theta = theta_of_x(x).angle
    return [
        OrbitRow(theta - math.pi, math.pi / 2, -1, -(1 + x) / (2 * x), (1 - x) / (2 * x)),
        OrbitRow(theta, 1.5 * math.pi, 1, (x + 1) / 2, (1 - x) / 2),
        OrbitRow(math.pi, 1.5 * math.pi, -1, 0.5, 0.5),
        OrbitRow(math.pi, theta, 1, x / 2, x / 2),
    ]


def orbit_integral(Fb: FlatFunction, T: float, a: float, cfg: Optional[QuadConfig] = None) -> float:
    """∫₀^T F♭(n_t.Φ, n_t.(2π - Φ)) dt with cot(Φ/2) = a, split where a transported angle crosses π."""
    cfg = cfg or QuadConfig.pipeline()
    if T == 0:
        return 0.0
    phi = float(2.0 * arccot(a))

    def integrand(t):
        return Fb(nt_angle_action(t, phi), nt_angle_action(t, TWO_PI - phi))

    return float(integrate(integrand, 0.0, T, cfg, breakpoints=(a, -a)).value)


def f0(Fb: FlatFunction, phi1: float, phi2: float, cfg: Optional[QuadConfig] = None) -> float:
    """f₀(φ1, φ2) = ∫₀^{T} F♭(n_t.Φ, n_t.(2π - Φ)) dt (oriented; T may be negative)."""
    T, Phi = t_phi(phi1, phi2)
    return orbit_integral(Fb, T, float(cot_half(Phi)), cfg)


def primitive_p(c: Cochain, z0, z1, z2, z3, cfg: Optional[QuadConfig] = None) -> float:
    """Bounded primitive p_c of the cocycle c at four distinct circle points.

    For increasing angles θ0 < θ1 < θ2 < θ3,

        p_c = ⨍ c(e^{iθ}, e^{iθ0}, ..., e^{iθ3}) dθ
              + f₀(θ2-θ1, θ3-θ1) - f₀(θ2-θ0, θ3-θ0) + f₀(θ1-θ0, θ3-θ0) - f₀(θ1-θ0, θ2-θ0);

    other orderings pick up the sign of the sorting permutation.
    """
    cfg = cfg or QuadConfig.pipeline()
    cfg4 = Config((z0, z1, z2, z3))
    ordered, sign = sort_cyclically(cfg4.as_array())
    t0, t1, t2, t3 = (float(t) for t in ordered)
    fixed = np.array([t0, t1, t2, t3])

    def average_integrand(psi):
        psi = np.asarray(psi, dtype=float)
        rest = np.broadcast_to(fixed[:, None], (4, psi.size))
        return c.evaluate(np.vstack([psi.reshape(1, -1), rest])).reshape(psi.shape)

    average = circle_average(
        average_integrand, cfg, breakpoints=(t0, t1, t2, t3), piecewise_constant=c.piecewise_constant
    ).value
    Fb = flat_integrand(c, cfg)
    value = (
        average
        + f0(Fb, t2 - t1, t3 - t1, cfg)
        - f0(Fb, t2 - t0, t3 - t0, cfg)
        + f0(Fb, t1 - t0, t3 - t0, cfg)
        - f0(Fb, t1 - t0, t2 - t0, cfg)
    )
    return float(sign) * float(value)


def validate_rhs(
    R: Union[AltFunction, Callable], tol: float = RHS_VALIDATION_TOL, points: int = RHS_VALIDATION_POINTS
) -> None:
    """Raise InvalidRhs unless R satisfies the six-term equation and the rotation symmetry on margin grids."""
    x, y, z = p3_grid(points, GRID_MARGIN)
    residual = np.abs(six_term(R, x, y, z))
    bad = np.flatnonzero(~(residual <= tol))
    if bad.size:
        i = bad[0]
        raise InvalidRhs(
            f"Six-term equation violated at ({x[i]:.6g}, {y[i]:.6g}, {z[i]:.6g}): residual {residual[i]:.3e}",
            sample=(float(x[i]), float(y[i]), float(z[i])),
            residual=float(residual[i]),
        )
    u, v = p2_grid(points, GRID_MARGIN)
    defect = np.abs(sample(R, u, v) - sample(R, *alternation_map(u, v)))
    bad = np.flatnonzero(~(defect <= tol))
    if bad.size:
        i = bad[0]
        raise InvalidRhs(
            f"Symmetry R(x,y) = R(1-y,(1-y)/(1-x)) violated at ({u[i]:.6g}, {v[i]:.6g}): defect {defect[i]:.3e}",
            sample=(float(u[i]), float(v[i])),
            residual=float(defect[i]),
        )
    _LOGGER.debug("Right-hand side passed validation (six-term %.3e)", float(residual.max(initial=0.0)))


class PerturbedSystem:
    """The system L(x) - L(y) - ... = R(x, y), L(x) + L(1-x) = C."""

    def __init__(self, R: Union[AltFunction, Callable], C: float, validate: bool = True):
        self.R = R if isinstance(R, AltFunction2) else AltFunction2(R, getattr(R, "description", repr(R)))
        self.C = float(C)
        if validate:
            validate_rhs(self.R)

    def __repr__(self) -> str:
        return f"PerturbedSystem(R={self.R.description}, C={self.C})"

    @cached_property
    def cocycle(self) -> Cochain:
        """ext₅(R - C/2), the cocycle whose primitive solves the system.

        The constant part is carried by the sign cochain, so systems built from the same base
        functions share their F♭ tables.
        """
        return extension(self.R - self.C / 2)

    def shifted(self) -> "PerturbedSystem":
        """The system (R - C/2, 0); its solution differs by C/2."""
        return PerturbedSystem(self.R - self.C / 2, 0.0, validate=False)

    def solve(self, x: float, cfg: Optional[QuadConfig] = None) -> float:
        """Value of the solution at x."""
        return solve_LRC(self, x, cfg)


def solve_LRC(system: PerturbedSystem, x: float, cfg: Optional[QuadConfig] = None) -> float:
    """Unique bounded solution of the perturbed system at 0 < x < 1.

    L(x) = C/2 - ⨍ c(e^{iψ}, 1, -1, C(x), -i) dψ + Σ ±∫₀^T F♭_c ... over the orbit table.
    """
    if not 0.0 < x < 1.0:
        raise DomainError(f"x = {x} outside (0, 1)")
    cfg = cfg or QuadConfig.pipeline()
    c = system.cocycle
    theta = theta_of_x(x).angle
    fixed = np.array([0.0, math.pi, theta, 1.5 * math.pi])

    def average_integrand(psi):
        psi = np.asarray(psi, dtype=float)
        rest = np.broadcast_to(fixed[:, None], (4, psi.size))
        return c.evaluate(np.vstack([psi.reshape(1, -1), rest])).reshape(psi.shape)

    average = circle_average(average_integrand, cfg, breakpoints=tuple(fixed)).value
    Fb = flat_integrand(c, cfg)
    orbits = [row.sign * orbit_integral(Fb, row.T, row.a, cfg) for row in orbit_table(x)]
    value = system.C / 2 - average + math.fsum(orbits)
    _LOGGER.debug("Solved %r at x=%s: %.12g", system, x, value)
    return value


def solve_grid(
    system: PerturbedSystem,
    xs: Sequence[float],
    cfg: Optional[QuadConfig] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """solve_LRC at every x, in input order."""
    return np.array(parallel_map(lambda x: solve_LRC(system, x, cfg), list(xs), workers))
