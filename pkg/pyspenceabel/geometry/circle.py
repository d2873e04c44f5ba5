"""Möbius primitives on the extended complex plane and on the unit circle."""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import DISTINCTNESS_TOL, TWO_PI
from pyspenceabel.models import DegenerateConfiguration, DomainError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtComplex:
    """A point of the extended complex plane."""

    value: complex = 0j
    """Finite value. Always 0 for the point at infinity."""

    is_infinity: bool = False
    """Marks the point at infinity."""

    def __post_init__(self):
        if self.is_infinity:
            object.__setattr__(self, "value", 0j)
            return
        value = complex(self.value)
        if not cmath.isfinite(value):
            raise DomainError(f"Not a finite complex number: {self.value}")
        object.__setattr__(self, "value", value)

    @classmethod
    def of(cls, z: Union["ExtComplex", "CirclePoint", complex, float]) -> "ExtComplex":
        """Coerce a number or circle point."""
        if isinstance(z, ExtComplex):
            return z
        if isinstance(z, CirclePoint):
            return z.to_ext()
        return cls(complex(z))

    def __str__(self) -> str:
        return "∞" if self.is_infinity else str(self.value)


INFINITY = ExtComplex(is_infinity=True)


def normalize_angle(theta: ArrayLike) -> np.ndarray:
    """Reduce angles to [0, 2π)."""
    reduced = np.mod(theta, TWO_PI)
    return np.where(reduced >= TWO_PI, 0.0, reduced)


@dataclass(frozen=True, order=True)
class CirclePoint:
    """A point e^{iθ} of the unit circle, stored by its angle."""

    angle: float
    """Angle in [0, 2π)."""

    def __post_init__(self):
        angle = float(self.angle)
        if not 0.0 <= angle < TWO_PI:
            raise DomainError(f"Angle {angle} outside [0, 2π)")
        object.__setattr__(self, "angle", angle)

    @classmethod
    def from_angle(cls, theta: float) -> "CirclePoint":
        """Create a point from any real angle."""
        return cls(float(normalize_angle(theta)))

    @classmethod
    def from_complex(cls, w: complex, tol: float = 1e-9) -> "CirclePoint":
        """Create a point from a unit-modulus complex number."""
        w = complex(w)
        if abs(abs(w) - 1.0) > tol:
            raise DomainError(f"{w} is not on the unit circle")
        return cls.from_angle(cmath.phase(w))

    @property
    def value(self) -> complex:
        """The point as a complex number."""
        return cmath.rect(1.0, self.angle)

    def to_ext(self) -> ExtComplex:
        """Convert to the extended plane."""
        return ExtComplex(self.value)


def chordal_distance(z: ExtComplex, w: ExtComplex) -> float:
    """Chordal distance on the Riemann sphere."""
    z, w = ExtComplex.of(z), ExtComplex.of(w)
    if z.is_infinity and w.is_infinity:
        return 0.0
    if z.is_infinity or w.is_infinity:
        finite = w if z.is_infinity else z
        return 2.0 / math.sqrt(1.0 + abs(finite.value) ** 2)
    return 2.0 * abs(z.value - w.value) / math.sqrt((1.0 + abs(z.value) ** 2) * (1.0 + abs(w.value) ** 2))


def check_distinct(points: list, tol: float = DISTINCTNESS_TOL) -> None:
    """Raise DegenerateConfiguration if two points are closer than `tol`."""
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if chordal_distance(points[i], points[j]) < tol:
                raise DegenerateConfiguration(f"Points {i} and {j} coincide: {points[i]}, {points[j]}")


def cross_ratio(z1, z2, z3, z4) -> ExtComplex:
    """Cross ratio [z1:z2:z3:z4] = (z1-z3)(z2-z4)/((z2-z3)(z1-z4)).

    A point at infinity cancels the two factors containing it, so that [z:1:0:∞] = z exactly.
    """
    a, b, c, d = (ExtComplex.of(z) for z in (z1, z2, z3, z4))
    check_distinct([a, b, c, d])
    if a.is_infinity:
        return ExtComplex((b.value - d.value) / (b.value - c.value))
    if b.is_infinity:
        return ExtComplex((a.value - c.value) / (a.value - d.value))
    if c.is_infinity:
        return ExtComplex((b.value - d.value) / (a.value - d.value))
    if d.is_infinity:
        return ExtComplex((a.value - c.value) / (b.value - c.value))
    return ExtComplex((a.value - c.value) * (b.value - d.value) / ((b.value - c.value) * (a.value - d.value)))


def cross_ratio_values(z1: ArrayLike, z2: ArrayLike, z3: ArrayLike, z4: ArrayLike) -> np.ndarray:
    """Vectorized cross ratio of finite points, without distinctness checks."""
    z1, z2, z3, z4 = (np.asarray(z, dtype=complex) for z in (z1, z2, z3, z4))
    return (z1 - z3) * (z2 - z4) / ((z2 - z3) * (z1 - z4))


def cocycle_defect(z1: ArrayLike, z2: ArrayLike, z3: ArrayLike, z4: ArrayLike, z: ArrayLike) -> np.ndarray:
    """Relative defect of [z1:z2:z3:z4] = [z1:z:z3:z4]·[z:z2:z3:z4] for finite points."""
    lhs = cross_ratio_values(z1, z2, z3, z4)
    rhs = cross_ratio_values(z1, z, z3, z4) * cross_ratio_values(z, z2, z3, z4)
    return np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))


def cayley(z) -> ExtComplex:
    """Cayley transform (z-i)/(z+i), carrying the extended real line onto the circle."""
    z = ExtComplex.of(z)
    if z.is_infinity:
        return ExtComplex(1.0)
    if z.value == -1j:
        return INFINITY
    return ExtComplex((z.value - 1j) / (z.value + 1j))


def cayley_inv(w) -> ExtComplex:
    """Inverse Cayley transform i(1+w)/(1-w)."""
    w = ExtComplex.of(w)
    if w.is_infinity:
        return ExtComplex(-1j)
    if w.value == 1:
        return INFINITY
    return ExtComplex(1j * (1 + w.value) / (1 - w.value))


def theta_of_x(x: float) -> CirclePoint:
    """Angle of the Cayley image of x in (0, 1), which lies in (π, 3π/2)."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"x = {x} outside (0, 1)")
    return CirclePoint(2.0 * math.atan(x) + math.pi)


def arccot(u: ArrayLike) -> np.ndarray:
    """Inverse cotangent with range (0, π)."""
    return np.pi / 2 - np.arctan(u)


def cot_half(phi: ArrayLike) -> np.ndarray:
    """cot(φ/2), finite on (0, 2π)."""
    half = np.asarray(phi, dtype=float) / 2
    return np.cos(half) / np.sin(half)


def nt_angle_action(t: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """Action n_t.φ = 2·arccot(-t + cot(φ/2)) of the parabolic subgroup fixing angle 0."""
    phi = np.asarray(phi, dtype=float)
    if not np.all((phi > 0) & (phi < TWO_PI)):
        raise DomainError("n_t acts on angles in (0, 2π)")
    return 2.0 * arccot(-np.asarray(t, dtype=float) + cot_half(phi))


@dataclass(frozen=True)
class NtElement:
    """Element n_t of the parabolic one-parameter subgroup."""

    t: float

    def act(self, phi: ArrayLike) -> np.ndarray:
        """Act on angles in (0, 2π)."""
        return nt_angle_action(self.t, phi)

    def act_point(self, point: CirclePoint) -> CirclePoint:
        """Act on a circle point; the point 1 is fixed."""
        if point.angle == 0.0:
            return point
        return CirclePoint.from_angle(float(self.act(point.angle)))

    def compose(self, other: "NtElement") -> "NtElement":
        """Return self ∘ other."""
        return NtElement(self.t + other.t)

    def inverse(self) -> "NtElement":
        """Return the inverse element."""
        return NtElement(-self.t)
