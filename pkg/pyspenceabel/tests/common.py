"""Independent oracles for the closed forms."""

import numpy as np

from pyspenceabel.const import ORIENTATION_SCALE, TWO_PI
from pyspenceabel.dilog.orientation import OrientationCocycle
from pyspenceabel.geometry.config import AltFunction1, Cochain
from pyspenceabel.quadrature import circle_average, segment_rule


def cosine(k: int) -> AltFunction1:
    """cos(kπx); alternating for odd k."""
    return AltFunction1(lambda x: np.cos(k * np.pi * np.asarray(x)), f"cos({k}πx)")


def first_slot_average(c: Cochain, *fixed: float) -> float:
    """Exact ⨍ c(e^{iψ}, fixed...) dψ for a cocycle constant between the fixed angles."""

    def integrand(psi):
        psi = np.atleast_1d(psi)
        rest = np.broadcast_to(np.array(fixed)[:, None], (len(fixed), psi.size))
        return c.evaluate(np.vstack([psi[None, :], rest]))

    return float(circle_average(integrand, breakpoints=fixed, piecewise_constant=True).value)


def nested_i2(theta1: float, theta2: float, scale: float = ORIENTATION_SCALE, order: int = 24) -> complex:
    """⨍⨍ e^{iη}·c(e^{iψ}, e^{iη}, 1, e^{iθ1}, e^{iθ2}) dψ dη by arcs in ψ and Gauss rules in η."""
    c = OrientationCocycle(scale)
    eta, weights = segment_rule(np.array([0.0, theta1, theta2, TWO_PI]), order)
    inner = np.array([first_slot_average(c, e, 0.0, theta1, theta2) for e in eta])
    return complex(np.sum(weights * np.exp(1j * eta) * inner) / TWO_PI)


def nested_i3(theta: float, order: int = 24) -> complex:
    """⨍ e^{-iφ}·I2(θ, φ) dφ from `nested_i2`, using I2(θ, φ) = -I2(φ, θ) below θ."""
    phi, weights = segment_rule(np.array([0.0, theta, TWO_PI]), order)
    values = np.array([-nested_i2(p, theta) if p < theta else nested_i2(theta, p) for p in phi])
    return complex(np.sum(weights * np.exp(-1j * phi) * values) / TWO_PI)
