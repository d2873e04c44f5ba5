"""Cyclic orientation, cross-ratio coordinates and the extension/restriction dictionary.

Configurations are tuples of distinct circle points. A cyclically oriented configuration
(z1, ..., zk) is described up to the action of the circle group by its cross-ratio coordinates
λ_j = [z2:z3:z1:z_{j+3}], which lie in the open simplex 0 < λ1 < ... < λ_{k-3} < 1.

Functions on configurations are modelled by `Cochain` objects. They evaluate on angle arrays of
shape (k, ...) so that the nested averages of the solver run vectorized.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, ClassVar, Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import TWO_PI
from pyspenceabel.geometry.circle import CirclePoint, ExtComplex, check_distinct, normalize_angle, theta_of_x
from pyspenceabel.models import DomainError

_LOGGER = logging.getLogger(__name__)

CANONICAL_ANGLES = (1.5 * math.pi, 0.0, math.pi)
"""Angles of -i, 1, -1: the first three points of every canonical configuration."""


def _coerce_point(point) -> CirclePoint:
    if isinstance(point, CirclePoint):
        return point
    if isinstance(point, ExtComplex):
        if point.is_infinity:
            raise DomainError("The point at infinity is not on the circle")
        return CirclePoint.from_complex(point.value)
    return CirclePoint.from_complex(complex(point))


@dataclass(frozen=True)
class Config:
    """Ordered tuple of pairwise distinct circle points."""

    points: tuple[CirclePoint, ...]
    """The k points, 3 <= k <= 6."""

    def __post_init__(self):
        points = tuple(_coerce_point(p) for p in self.points)
        if not 3 <= len(points) <= 6:
            raise DomainError(f"Configurations have 3 to 6 points, got {len(points)}")
        check_distinct([p.to_ext() for p in points])
        object.__setattr__(self, "points", points)

    @classmethod
    def from_angles(cls, *angles: float) -> "Config":
        """Create a configuration from angles (reduced mod 2π)."""
        return cls(tuple(CirclePoint.from_angle(a) for a in angles))

    @classmethod
    def from_values(cls, *values: complex) -> "Config":
        """Create a configuration from unit-modulus complex numbers."""
        return cls(tuple(values))

    @property
    def k(self) -> int:
        """Number of points."""
        return len(self.points)

    @property
    def angles(self) -> tuple[float, ...]:
        """Angles of the points."""
        return tuple(p.angle for p in self.points)

    @property
    def values(self) -> tuple[complex, ...]:
        """Points as complex numbers."""
        return tuple(p.value for p in self.points)

    @cached_property
    def oriented(self) -> bool:
        """Cyclic orientation certificate."""
        return is_cyclically_oriented(self)

    def rotated(self, steps: int = 1) -> "Config":
        """Cyclic rotation; one step maps (z1, ..., zk) to (zk, z1, ..., z_{k-1})."""
        steps %= self.k
        return Config(self.points[-steps:] + self.points[:-steps]) if steps else self

    def swapped(self, i: int, j: int) -> "Config":
        """Exchange two entries."""
        points = list(self.points)
        points[i], points[j] = points[j], points[i]
        return Config(tuple(points))

    def omit(self, j: int) -> "Config":
        """Drop the j-th entry."""
        return Config(self.points[:j] + self.points[j + 1 :])

    def as_array(self) -> np.ndarray:
        """Angles as an array of shape (k,)."""
        return np.array(self.angles)


@dataclass(frozen=True)
class ParamPoint:
    """Point of the open simplex 0 < x1 < ... < xn < 1."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(x) for x in self.coords)
        if not 1 <= len(coords) <= 3:
            raise DomainError(f"Parameter points have 1 to 3 coordinates, got {len(coords)}")
        bounds = (0.0, *coords, 1.0)
        if any(lo >= hi for lo, hi in zip(bounds, bounds[1:])):
            raise DomainError(f"{coords} is not strictly increasing in (0, 1)")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        """Dimension of the simplex."""
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, item):
        return self.coords[item]


def permutation_parity(perm: Sequence[int]) -> int:
    """Sign of a permutation, computed by cycle decomposition."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def permutation_signs(order: np.ndarray) -> np.ndarray:
    """Signs of a stack of permutations stored along axis 0 (inversion count)."""
    order = np.asarray(order)
    inversions = np.zeros(order.shape[1:], dtype=int)
    for i in range(order.shape[0]):
        for j in range(i + 1, order.shape[0]):
            inversions += order[i] > order[j]
    return np.where(inversions % 2 == 0, 1.0, -1.0)


def sort_cyclically(angles: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Sort angle tuples (axis 0) into ascending, hence cyclic, order.

    Returns the sorted angles and the sign of the sorting permutation.
    """
    angles = np.asarray(angles, dtype=float)
    order = np.argsort(angles, axis=0, kind="stable")
    return np.take_along_axis(angles, order, axis=0), permutation_signs(order)


def sorting_permutation(cfg: Config) -> list[int]:
    """Permutation putting `cfg` in cyclic order starting at its smallest angle."""
    perm = sorted(range(cfg.k), key=lambda j: cfg.angles[j])
    ordered = [cfg.angles[j] for j in perm]
    if any(lo >= hi for lo, hi in zip(ordered, ordered[1:])):
        raise DomainError(f"Angles {cfg.angles} are not distinct")
    return perm


def lambda_from_angles(angles: ArrayLike) -> np.ndarray:
    """Cross ratios [z2:z3:z1:z_j] for j = 4..k of circle points given by angles of shape (k, ...).

    Uses z_p - z_q = 2i·e^{i(a_p+a_q)/2}·sin((a_p-a_q)/2); all phases cancel, so the result is real.
    """
    angles = np.asarray(angles, dtype=float)
    a1, a2, a3, rest = angles[0], angles[1], angles[2], angles[3:]
    return (
        np.sin((a2 - a1) / 2) * np.sin((a3 - rest) / 2) / (np.sin((a3 - a1) / 2) * np.sin((a2 - rest) / 2))
    )


def oriented_mask(angles: ArrayLike) -> np.ndarray:
    """Vectorized cyclic orientation test along axis 0."""
    angles = np.asarray(angles, dtype=float)
    mask = normalize_angle(angles[1] - angles[0]) < normalize_angle(angles[2] - angles[0])
    if angles.shape[0] > 3:
        lam = lambda_from_angles(angles)
        bounds = np.concatenate([np.zeros((1,) + lam.shape[1:]), lam, np.ones((1,) + lam.shape[1:])])
        mask &= np.all(np.diff(bounds, axis=0) > 0, axis=0)
    return mask


def is_cyclically_oriented(cfg: Config) -> bool:
    """Whether the points admit a lift θ1 < ... < θk < θ1 + 2π.

    (z1, z2, z3) must be cyclically oriented and the cross-ratio chain 0 < λ1 < ... < λ_{k-3} < 1.
    """
    return bool(oriented_mask(cfg.as_array()))


def lambda_coords(cfg: Config) -> ParamPoint:
    """Cross-ratio coordinates of a cyclically oriented configuration with k >= 4."""
    if cfg.k < 4:
        raise DomainError("Cross-ratio coordinates need at least four points")
    if not cfg.oriented:
        raise DomainError(f"Configuration {cfg.angles} is not cyclically oriented")
    return ParamPoint(tuple(lambda_from_angles(cfg.as_array()).tolist()))


def canonical_angles(*coords: ArrayLike) -> np.ndarray:
    """Angles of (-i, 1, -1, C(x1), ..., C(xn)), stacked along axis 0."""
    coords = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in coords))
    fixed = [np.full(coords[0].shape, a) for a in CANONICAL_ANGLES]
    return np.stack(fixed + [2.0 * np.arctan(x) + np.pi for x in coords])


def canonical_config(p: ParamPoint) -> Config:
    """The configuration (-i, 1, -1, C(λ1), ..., C(λn)) with coordinates p."""
    p = p if isinstance(p, ParamPoint) else ParamPoint(tuple(p))
    return Config(tuple(CirclePoint(a) for a in CANONICAL_ANGLES) + tuple(theta_of_x(x) for x in p))


def relation_sign(n: int) -> float:
    """Sign in f(λ) = ± f(ρ(λ)) for the alternating family on the n-simplex."""
    return -1.0 if n % 2 else 1.0


def alternation_map(*coords: ArrayLike) -> tuple:
    """Coordinates of the rotated configuration: (1-λn, (1-λn)/(1-λ1), ..., (1-λn)/(1-λ_{n-1}))."""
    last = 1.0 - np.asarray(coords[-1], dtype=float)
    return (last,) + tuple(last / (1.0 - np.asarray(x, dtype=float)) for x in coords[:-1])


def _scalar_or_array(value: np.ndarray):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def in_simplex(*coords: ArrayLike) -> bool:
    """Whether all coordinate tuples lie in the open simplex."""
    coords = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in coords))
    mask = (coords[0] > 0) & (coords[-1] < 1)
    for lo, hi in zip(coords, coords[1:]):
        mask &= lo < hi
    return bool(np.all(mask))


class AltFunction:
    """Real function on the n-simplex in the alternating family.

    Members satisfy f(λ) = (-1)^n f(ρ(λ)) for the alternation map ρ. The evaluator must accept
    numpy arrays and be safe to call from several threads.
    """

    degree: ClassVar[int] = 0

    def __init__(self, evaluator: Callable[..., ArrayLike], description: str = ""):
        self.evaluator = evaluator
        self.description = description
        self.terms: tuple[tuple[float, AltFunction], ...] = ((1.0, self),)
        """Decomposition Σ a·f over base functions; sums and multiples keep it."""
        self.offset = 0.0
        """Constant part of the decomposition."""

    @classmethod
    def constant(cls, value: float, description: str = "") -> "AltFunction":
        """The constant function; it has no base terms."""
        value = float(value)
        result = cls(lambda *c: value, description or repr(value))
        result.terms = ()
        result.offset = value
        return result

    @property
    def is_base(self) -> bool:
        """True unless the function was built by arithmetic."""
        return self.offset == 0.0 and len(self.terms) == 1 and self.terms[0][1] is self and self.terms[0][0] == 1.0

    def evaluate(self, *coords: ArrayLike) -> Union[float, np.ndarray]:
        """Evaluate without domain checks."""
        value = np.asarray(self.evaluator(*coords), dtype=float)
        shape = np.broadcast_shapes(*(np.shape(x) for x in coords))
        if value.shape != shape:
            value = np.broadcast_to(value, shape).copy()
        return _scalar_or_array(value)

    def __call__(self, *coords) -> Union[float, np.ndarray]:
        if len(coords) == 1 and isinstance(coords[0], ParamPoint):
            coords = coords[0].coords
        if len(coords) != self.degree:
            raise DomainError(f"{type(self).__name__} takes {self.degree} coordinates, got {len(coords)}")
        if not in_simplex(*coords):
            raise DomainError(f"{coords} outside the open {self.degree}-simplex")
        return self.evaluate(*coords)

    def alternation_defect(self, *coords: ArrayLike) -> float:
        """Largest violation of the alternating relation on the given samples."""
        lhs = np.asarray(self.evaluate(*coords))
        rhs = relation_sign(self.degree) * np.asarray(self.evaluate(*alternation_map(*coords)))
        return float(np.max(np.abs(lhs - rhs)))

    def _linear(self, terms, offset: float, evaluator: Callable[..., ArrayLike], description: str) -> "AltFunction":
        merged: dict[int, list] = {}
        for a, base in terms:
            merged.setdefault(id(base), [0.0, base])[0] += a
        result = type(self)(evaluator, description)
        result.terms = tuple((a, base) for a, base in merged.values() if a != 0.0)
        result.offset = float(offset)
        return result

    def _combine(self, other, sign: float, description: str) -> "AltFunction":
        """self + sign·other."""
        if isinstance(other, AltFunction):
            if other.degree != self.degree:
                raise TypeError(f"Cannot combine degree {self.degree} with degree {other.degree}")
            evaluator, terms, offset = other.evaluator, other.terms, other.offset
        else:
            offset = float(other)
            terms = ()

            def evaluator(*c):
                return offset

        return self._linear(
            self.terms + tuple((sign * a, base) for a, base in terms),
            self.offset + sign * offset,
            lambda *c: np.add(self.evaluator(*c), sign * np.asarray(evaluator(*c))),
            description,
        )

    def __add__(self, other) -> "AltFunction":
        return self._combine(other, 1.0, f"({self.description} + {other})")

    __radd__ = __add__

    def __sub__(self, other) -> "AltFunction":
        return self._combine(other, -1.0, f"({self.description} - {other})")

    def __rsub__(self, other) -> "AltFunction":
        return (self * -1.0)._combine(other, 1.0, f"({other} - {self.description})")

    def __mul__(self, scalar: float) -> "AltFunction":
        value = float(scalar)
        return self._linear(
            tuple((value * a, base) for a, base in self.terms),
            value * self.offset,
            lambda *c: value * np.asarray(self.evaluator(*c)),
            f"{value}*{self.description}",
        )

    __rmul__ = __mul__

    def __neg__(self) -> "AltFunction":
        return self * -1.0

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.description or self.evaluator!r})"


class AltFunction1(AltFunction):
    """f(x) = -f(1-x) on (0, 1)."""

    degree = 1


class AltFunction2(AltFunction):
    """g(x, y) = g(1-y, (1-y)/(1-x)) on 0 < x < y < 1."""

    degree = 2


class AltFunction3(AltFunction):
    """h(x, y, z) = -h(1-z, (1-z)/(1-x), (1-z)/(1-y)) on 0 < x < y < z < 1."""

    degree = 3


ALT_FUNCTION_TYPES: dict[int, type[AltFunction]] = {1: AltFunction1, 2: AltFunction2, 3: AltFunction3}


def alt_function(n: int, evaluator: Callable[..., ArrayLike], description: str = "") -> AltFunction:
    """Wrap a vectorized callable as a function on the n-simplex."""
    try:
        return ALT_FUNCTION_TYPES[n](evaluator, description)
    except KeyError as err:
        raise DomainError(f"No alternating family on the {n}-simplex") from err


def symmetrize(g: Callable[..., ArrayLike], n: int, description: str = "") -> AltFunction:
    """Project g onto the alternating family by a signed average over the orbit of ρ.

    ρ has order dividing n + 3, so the average runs over n + 3 iterates.
    """
    sign = relation_sign(n)
    length = n + 3

    def evaluator(*coords):
        point = coords
        factor = 1.0
        total = 0.0
        for _ in range(length):
            total = total + factor * np.asarray(g(*point), dtype=float)
            point = alternation_map(*point)
            factor *= sign
        return total / length

    return alt_function(n, evaluator, description or f"sym({getattr(g, '__name__', 'g')})")


class Cochain(ABC):
    """Real function on configurations of `arity` circle points.

    `evaluate` takes angles of shape (arity, ...) and returns values of shape (...).
    """

    arity: int
    piecewise_constant: bool = False
    """True if the function is locally constant on oriented configurations."""

    sup_bound: Optional[float] = None
    """Known bound for the sup norm, if any."""

    @abstractmethod
    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        """Evaluate on stacked angles without distinctness checks."""

    def __call__(self, *points) -> float:
        cfg = points[0] if len(points) == 1 and isinstance(points[0], Config) else Config(tuple(points))
        if cfg.k != self.arity:
            raise DomainError(f"{type(self).__name__} takes {self.arity} points, got {cfg.k}")
        return float(self.evaluate(cfg.as_array()))

    def linear_terms(self) -> tuple[tuple[float, "Cochain"], ...]:
        """Decomposition Σ a·c into cochains that are not combinations themselves."""
        return ((1.0, self),)

    def __add__(self, other: "Cochain") -> "LinearCochain":
        return LinearCochain(self.linear_terms() + other.linear_terms(), self.arity)

    def __sub__(self, other: "Cochain") -> "LinearCochain":
        return self + other * -1.0

    def __mul__(self, scalar: float) -> "LinearCochain":
        value = float(scalar)
        return LinearCochain(tuple((value * a, c) for a, c in self.linear_terms()), self.arity)

    __rmul__ = __mul__

    def __neg__(self) -> "LinearCochain":
        return self * -1.0


class LinearCochain(Cochain):
    """Σ a·c over cochains of one arity; repeated cochains are merged and zero terms dropped."""

    def __init__(self, terms: Sequence[tuple[float, Cochain]], arity: int):
        merged: dict[int, list] = {}
        for a, c in terms:
            if c.arity != arity:
                raise DomainError(f"Cannot combine arity {c.arity} with arity {arity}")
            merged.setdefault(id(c), [0.0, c])[0] += float(a)
        self.terms = tuple((a, c) for a, c in merged.values() if a != 0.0)
        self.arity = arity
        self.piecewise_constant = all(c.piecewise_constant for _, c in self.terms)
        if all(c.sup_bound is not None for _, c in self.terms):
            self.sup_bound = math.fsum(abs(a) * c.sup_bound for a, c in self.terms)

    def linear_terms(self) -> tuple[tuple[float, Cochain], ...]:
        return self.terms

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        total = np.zeros(angles.shape[1:])
        for a, c in self.terms:
            total = total + a * np.asarray(c.evaluate(angles))
        return total

    def __repr__(self) -> str:
        return " + ".join(f"{a:g}*{c!r}" for a, c in self.terms) or f"0[{self.arity}]"


class SignCochain(Cochain):
    """Sign of the permutation sorting the points into cyclic order; ext_k of the constant 1."""

    piecewise_constant = True
    sup_bound = 1.0

    def __init__(self, arity: int):
        self.arity = arity

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        return np.asarray(sort_cyclically(angles)[1], dtype=float)

    def __repr__(self) -> str:
        return f"sign{self.arity}"


class FunctionCochain(Cochain):
    """Wrap a callable on `Config` objects; evaluation loops point by point."""

    def __init__(self, func: Callable[[Config], float], arity: int):
        self.func = func
        self.arity = arity

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        flat = angles.reshape(self.arity, -1)
        values = np.array([self.func(Config.from_angles(*flat[:, i])) for i in range(flat.shape[1])])
        return values.reshape(angles.shape[1:])


class ExtensionCochain(Cochain):
    """ext_k(f): the alternating invariant function with restriction f, k = degree(f) + 3."""

    def __init__(self, function: AltFunction):
        self.function = function
        self.arity = function.degree + 3

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        ordered, sign = sort_cyclically(angles)
        return sign * np.asarray(self.function.evaluate(*lambda_from_angles(ordered)))

    def __repr__(self) -> str:
        return f"ext{self.arity}({self.function!r})"


@lru_cache(maxsize=64)
def _base_extension(f: AltFunction) -> ExtensionCochain:
    return ExtensionCochain(f)


@lru_cache(maxsize=None)
def sign_cochain(arity: int) -> SignCochain:
    """The shared sign cochain on `arity` points."""
    return SignCochain(arity)


def extension(f: AltFunction) -> Cochain:
    """The cochain ext_k(f).

    Sums and multiples extend term by term, with one shared cochain per base function and the
    constant part carried by the sign cochain, so solvers can reuse work across combinations.
    """
    if f.is_base:
        return _base_extension(f)
    arity = f.degree + 3
    terms = [(a, _base_extension(base)) for a, base in f.terms]
    if f.offset != 0.0:
        terms.append((f.offset, sign_cochain(arity)))
    return LinearCochain(terms, arity)


def ext_k(f: AltFunction, cfg: Config) -> float:
    """Value of ext_k(f) at cfg: sign of the cyclic sorting permutation times f(Λ(sorted))."""
    return ExtensionCochain(f)(cfg)


def res_k(c: Union[Cochain, Callable[[Config], float]], k: Optional[int] = None) -> AltFunction:
    """Restriction λ ↦ c(-i, 1, -1, C(λ1), ..., C(λ_{k-3}))."""
    if not isinstance(c, Cochain):
        if k is None:
            raise DomainError("The arity of a plain callable must be given")
        c = FunctionCochain(c, k)
    cochain = c

    def evaluator(*coords):
        return cochain.evaluate(canonical_angles(*coords))

    return alt_function(cochain.arity - 3, evaluator, f"res({cochain!r})")


def random_oriented_angles(rng: np.random.Generator, k: int, min_gap: float = 0.05) -> np.ndarray:
    """Sorted random angles in [0, 2π) with cyclic gaps of at least `min_gap`."""
    if k * min_gap >= TWO_PI:
        raise DomainError("Gap too large for the number of points")
    while True:
        angles = np.sort(rng.uniform(0.0, TWO_PI, size=k))
        gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
        if gaps.min() >= min_gap:
            return angles
