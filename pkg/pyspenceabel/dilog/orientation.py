"""The orientation cocycle and the closed forms of its basic integrals."""

import logging
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import ORIENTATION_SCALE, TWO_PI
from pyspenceabel.geometry.config import Cochain, Config, permutation_parity, sort_cyclically, sorting_permutation
from pyspenceabel.models import DomainError, FormulaVariant

_LOGGER = logging.getLogger(__name__)


def orientation_sign(cfg: Config) -> int:
    """Parity of a permutation putting five distinct circle points in cyclic order.

    Cyclic rotations of five points are even, so the parity does not depend on the starting point.
    """
    if cfg.k != 5:
        raise DomainError(f"The orientation sign is defined for five points, got {cfg.k}")
    return permutation_parity(sorting_permutation(cfg))


class OrientationCocycle(Cochain):
    """c(z) = scale·(-1)^σ(z), constant on each orientation class of 5-point configurations."""

    arity = 5
    piecewise_constant = True

    def __init__(self, scale: float = ORIENTATION_SCALE):
        self.scale = float(scale)
        self.sup_bound = abs(self.scale)

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        _, sign = sort_cyclically(angles)
        return self.scale * sign

    def __repr__(self) -> str:
        return f"OrientationCocycle(scale={self.scale})"


def _check_increasing(*angles: ArrayLike, lower_open: bool = False) -> None:
    bounds = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in angles))
    ok = (bounds[0] > 0) if lower_open else (bounds[0] >= 0)
    ok &= bounds[-1] < TWO_PI
    for lo, hi in zip(bounds, bounds[1:]):
        ok &= lo < hi
    if not np.all(ok):
        raise DomainError(f"Angles must be strictly increasing in [0, 2π), got {angles}")


def I1(theta0, theta1, theta2, theta3, scale: float = ORIENTATION_SCALE):
    """Average of the cocycle over its first slot, the other four slots at increasing angles."""
    _check_increasing(theta0, theta1, theta2, theta3)
    return scale / np.pi * (np.asarray(theta0) - theta1 + theta2 - theta3 + np.pi)


def I2(theta1, theta2, scale: float = ORIENTATION_SCALE):
    """⨍⨍ e^{iη} c(e^{iψ}, e^{iη}, 1, e^{iθ1}, e^{iθ2}) dψ dη for 0 < θ1 < θ2 < 2π."""
    _check_increasing(theta1, theta2, lower_open=True)
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    return (
        1j
        * scale
        / np.pi**2
        * ((np.exp(1j * theta2) - 1) * (theta1 - np.pi) - (np.exp(1j * theta1) - 1) * (theta2 - np.pi) - np.pi)
    )


def I3(theta, scale: float = ORIENTATION_SCALE):
    """⨍ e^{-iφ} I2(θ, φ) dφ, with I2 continued to φ < θ by the alternating law."""
    theta = np.asarray(theta, dtype=float)
    if not np.all((theta > 0) & (theta < TWO_PI)):
        raise DomainError(f"θ must lie in (0, 2π), got {theta}")
    return 1j * scale / np.pi**2 * (2 * np.sin(theta) + theta - np.pi)


def h_closed(phi, scale: float = ORIENTATION_SCALE):
    """sin(φ/2)·∫_π^φ Im I3(ζ)/(1 - cos ζ) dζ."""
    phi = np.asarray(phi, dtype=float)
    half = phi / 2
    return scale / np.pi**2 * ((np.pi - phi) * np.cos(half) + 6 * np.sin(half) * np.log(np.sin(half)))


def r_c_closed(phi, scale: float = ORIENTATION_SCALE):
    """r_c of the orientation cocycle: i·e^{iφ/2}·h(φ) = -½(1 - e^{iφ})·∫_π^φ ..."""
    phi = np.asarray(phi, dtype=float)
    if not np.all((phi > 0) & (phi < TWO_PI)):
        raise DomainError(f"φ must lie in (0, 2π), got {phi}")
    return 1j * np.exp(0.5j * phi) * h_closed(phi, scale)


def v_flat_closed(theta1, theta2, scale: float = ORIENTATION_SCALE):
    """Im(e^{iθ1}·r_c(θ2 ⊖ θ1)) for θ1 ≠ θ2."""
    theta1 = np.asarray(theta1, dtype=float)
    diff = np.mod(np.asarray(theta2, dtype=float) - theta1, TWO_PI)
    return np.imag(np.exp(1j * theta1) * r_c_closed(diff, scale))


def v_split(theta1, theta2, scale: float = ORIENTATION_SCALE) -> tuple:
    """The polynomial and logarithmic parts (v1, v2) of `v_flat_closed` for 0 <= θ1 < θ2 < 2π."""
    _check_increasing(theta1, theta2)
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    v1 = -scale / (2 * np.pi**2) * (np.cos(theta1) + np.cos(theta2)) * (theta2 - theta1 - np.pi)
    v2 = 3 * scale / np.pi**2 * (np.sin(theta2) - np.sin(theta1)) * np.log(np.sin((theta2 - theta1) / 2))
    return v1, v2


def f_flat_closed(
    phi1: ArrayLike,
    phi2: ArrayLike,
    variant: Union[FormulaVariant, str] = FormulaVariant.BODY,
    scale: float = ORIENTATION_SCALE,
):
    """Closed form of F♭ for the orientation cocycle on 0 < φ1 < φ2 < 2π."""
    variant = FormulaVariant(variant)
    _check_increasing(phi1, phi2, lower_open=True)
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    polynomial = (3 * phi1 - 2 * np.pi) * (np.cos(phi2) - 1) - (3 * phi2 - 4 * np.pi) * (np.cos(phi1) - 1)
    s = np.sin((phi2 - phi1) / 2)
    logs = np.sin(phi1) * np.log(s / np.sin(phi1 / 2)) - np.sin(phi2) * np.log(s / np.sin(phi2 / 2))
    if variant is FormulaVariant.BODY:
        return scale / (2 * np.pi**2) * polynomial - 3 * scale / np.pi**2 * logs
    return -scale / (2 * np.pi**2) * polynomial - 3 * scale / (4 * np.pi**2) * logs
