"""The integrand F♭_c built from a cocycle on 5-point configurations.

Construction, for a cocycle c:

    A(ζ)      = ⨍⨍⨍ sin(η - φ')·c(e^{iη}, e^{iφ'}, e^{iψ}, 1, e^{iζ})
    r_c(φ)    = -½(1 - e^{iφ})·∫_π^φ A(ζ)/(1 - cos ζ) dζ = i·e^{iφ/2}·h(φ)
    v♭(θ1,θ2) = Im(e^{iθ1}·r_c(θ2 ⊖ θ1))
    F♭(φ1,φ2) = ⨍⨍ sin(φ)·c(e^{iη}, e^{iφ}, 1, e^{iφ1}, e^{iφ2}) + v♭(φ1,φ2) - v♭(0,φ2) + v♭(0,φ1)

A and h are tabulated once per cocycle; the double average is evaluated on demand. Both nested
averages are adaptive and split at the angles where the cocycle may jump, to `QuadConfig.average_tol`.
"""

import logging
import threading
import time
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from pyspenceabel.const import RADIAL_TABLE_DEGREE, RADIAL_TABLE_LEVELS, TWO_PI
from pyspenceabel.dilog.orientation import OrientationCocycle, r_c_closed
from pyspenceabel.geometry.circle import normalize_angle
from pyspenceabel.geometry.config import Cochain, LinearCochain
from pyspenceabel.models import DomainError, WeightConvention
from pyspenceabel.quadrature import PanelTable, QuadConfig, gauss_legendre, graded_edges, integrate_batch

_LOGGER = logging.getLogger(__name__)

_ZETA_CHUNK = 8


def ominus(theta1: ArrayLike, theta2: ArrayLike) -> Union[float, np.ndarray]:
    """Representative of θ1 - θ2 modulo 2π in [0, 2π)."""
    value = normalize_angle(np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


class FlatIntegrand:
    """F♭_c for one cocycle, with its tabulated profiles.

    Tables are built lazily on first use; building is guarded by a lock so one instance can be
    shared between worker threads.
    """

    def __init__(
        self,
        cocycle: Cochain,
        cfg: Optional[QuadConfig] = None,
        weight: WeightConvention = WeightConvention.SLOT,
    ):
        if cocycle.arity != 5:
            raise DomainError(f"F♭ needs a cocycle on 5 points, got arity {cocycle.arity}")
        self.cocycle = cocycle
        self.cfg = cfg or QuadConfig.pipeline()
        self.weight = WeightConvention(weight)
        self._lock = threading.Lock()
        self._h_tables: Optional[list[PanelTable]] = None

    def __repr__(self) -> str:
        return f"FlatIntegrand({self.cocycle!r}, weight={self.weight.value})"

    def triple_average(self, zeta: ArrayLike) -> np.ndarray:
        """Weighted triple averages of the cocycle with slots 4 and 5 fixed at (1, e^{iζ}).

        Returns shape (1, ...) for the slot weight sin(η - φ') and (2, ...) for the outer
        reading, whose components carry the weights sin η and cos η.
        """
        zeta = np.asarray(zeta, dtype=float)
        flat = zeta.reshape(-1)
        rows = 1 if self.weight is WeightConvention.SLOT else 2
        out = np.empty((rows, flat.size))
        for start in range(0, flat.size, _ZETA_CHUNK):
            chunk = flat[start : start + _ZETA_CHUNK]
            out[:, start : start + chunk.size] = self._triple_chunk(chunk)
        return out.reshape((rows,) + zeta.shape)

    def _weight(self, row: int, eta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        if self.weight is WeightConvention.SLOT:
            return np.sin(eta - phi)
        return np.sin(eta) if row == 0 else np.cos(eta)

    def _triple_chunk(self, zeta: np.ndarray) -> np.ndarray:
        # each level keeps half its budget and hands 1/(4π) of it to every inner integral
        budget = self.cfg.average_tol * TWO_PI**3
        depth = self.cfg.max_depth

        def over_eta(phi, psi, z, row, tol):
            breaks = np.sort(np.stack([np.zeros_like(phi), psi, phi, z, np.full_like(phi, TWO_PI)]), axis=0)

            def integrand(eta, owner):
                p = phi[owner]
                angles = np.stack(
                    [
                        eta,
                        np.broadcast_to(p, eta.shape),
                        np.broadcast_to(psi[owner], eta.shape),
                        np.zeros(eta.shape),
                        np.broadcast_to(z[owner], eta.shape),
                    ]
                )
                return self._weight(row, eta, p) * self.cocycle.evaluate(angles)

            return integrate_batch(integrand, breaks, tol, depth)[0]

        def over_phi(psi, z, row, tol):
            breaks = np.sort(np.stack([np.zeros_like(psi), psi, z, np.full_like(psi, TWO_PI)]), axis=0)

            def integrand(phi, owner):
                inner = over_eta(
                    phi.ravel(),
                    np.broadcast_to(psi[owner], phi.shape).ravel(),
                    np.broadcast_to(z[owner], phi.shape).ravel(),
                    row,
                    tol / (2 * TWO_PI),
                )
                return inner.reshape(phi.shape)

            return integrate_batch(integrand, breaks, tol / 2, depth)[0]

        def over_psi(row):
            breaks = np.stack([np.zeros_like(zeta), zeta, np.full_like(zeta, TWO_PI)])

            def integrand(psi, owner):
                z = np.broadcast_to(zeta[owner], psi.shape).ravel()
                return over_phi(psi.ravel(), z, row, budget / (2 * TWO_PI)).reshape(psi.shape)

            return integrate_batch(integrand, breaks, budget / 2, depth)[0] / TWO_PI**3

        return np.stack([over_psi(row) for row in range(1 if self.weight is WeightConvention.SLOT else 2)])

    def _build_tables(self) -> list[PanelTable]:
        start = time.perf_counter()
        profiles = [
            PanelTable.build(
                lambda z, row=row: self.triple_average(z)[row],
                0.0,
                TWO_PI,
                self.cfg.table_degree,
                self.cfg.table_levels,
            )
            for row in range(1 if self.weight is WeightConvention.SLOT else 2)
        ]
        edges = graded_edges(0.0, TWO_PI, RADIAL_TABLE_LEVELS)
        nodes, weights = gauss_legendre(2 * self.cfg.gauss_order)
        tables = []
        for profile in profiles:

            def integrand(z, profile=profile):
                return profile(z) / (2.0 * np.sin(z / 2) ** 2)

            def partial(lo, hi, integrand=integrand):
                half = 0.5 * (hi - lo)
                mid = 0.5 * (lo + hi)
                points = mid[..., None] + half[..., None] * nodes
                return np.sum(weights * integrand(points), axis=-1) * half

            panels = partial(edges[:-1], edges[1:])
            center = int(np.searchsorted(edges, np.pi))
            cumulative = np.zeros(edges.size)
            cumulative[center + 1 :] = np.cumsum(panels[center:])
            cumulative[:center] = -np.cumsum(panels[:center][::-1])[::-1]

            def h(phi, partial=partial, cumulative=cumulative):
                idx = np.clip(np.searchsorted(edges, phi, side="right") - 1, 0, edges.size - 2)
                anchor = np.where(phi < np.pi, idx + 1, idx)
                k = cumulative[anchor] + partial(edges[anchor], phi)
                return np.sin(phi / 2) * k

            tables.append(PanelTable.build(h, 0.0, TWO_PI, RADIAL_TABLE_DEGREE, RADIAL_TABLE_LEVELS))
        _LOGGER.info("Tabulated profiles of %r in %.1fs", self.cocycle, time.perf_counter() - start)
        return tables

    @property
    def h_tables(self) -> list[PanelTable]:
        """Tables of h(φ) = sin(φ/2)·∫_π^φ A/(1 - cos), one per weight component."""
        if self._h_tables is None:
            with self._lock:
                if self._h_tables is None:
                    self._h_tables = self._build_tables()
        return self._h_tables

    def r(self, phi: ArrayLike) -> np.ndarray:
        """r_c on (0, 2π), without domain checks."""
        phi = np.asarray(phi, dtype=float)
        tables = self.h_tables
        if self.weight is WeightConvention.SLOT:
            h = tables[0](phi)
        else:
            h = np.cos(phi) * tables[0](phi) - np.sin(phi) * tables[1](phi)
        return 1j * np.exp(0.5j * phi) * h

    def v(self, theta1: ArrayLike, theta2: ArrayLike) -> np.ndarray:
        """v♭_c(θ1, θ2) = Im(e^{iθ1}·r_c(θ2 ⊖ θ1))."""
        theta1 = np.asarray(theta1, dtype=float)
        return np.imag(np.exp(1j * theta1) * self.r(ominus(theta2, theta1)))

    def double_average(self, phi1: ArrayLike, phi2: ArrayLike) -> np.ndarray:
        """⨍⨍ sin(φ)·c(e^{iη}, e^{iφ}, 1, e^{iφ1}, e^{iφ2}) dη dφ, to `average_tol`."""
        phi1, phi2 = np.broadcast_arrays(np.asarray(phi1, dtype=float), np.asarray(phi2, dtype=float))
        shape = phi1.shape
        p1, p2 = phi1.ravel(), phi2.ravel()
        budget = self.cfg.average_tol * TWO_PI**2
        depth = self.cfg.max_depth

        def over_eta(phi, a, b, tol):
            breaks = np.sort(np.stack([np.zeros_like(phi), phi, a, b, np.full_like(phi, TWO_PI)]), axis=0)

            def integrand(eta, owner):
                angles = np.stack(
                    [
                        eta,
                        np.broadcast_to(phi[owner], eta.shape),
                        np.zeros(eta.shape),
                        np.broadcast_to(a[owner], eta.shape),
                        np.broadcast_to(b[owner], eta.shape),
                    ]
                )
                return self.cocycle.evaluate(angles)

            return integrate_batch(integrand, breaks, tol, depth)[0]

        def integrand(phi, owner):
            inner = over_eta(
                phi.ravel(),
                np.broadcast_to(p1[owner], phi.shape).ravel(),
                np.broadcast_to(p2[owner], phi.shape).ravel(),
                budget / (2 * TWO_PI),
            )
            return np.sin(phi) * inner.reshape(phi.shape)

        breaks = np.sort(np.stack([np.zeros_like(p1), p1, p2, np.full_like(p1, TWO_PI)]), axis=0)
        return (integrate_batch(integrand, breaks, budget / 2, depth)[0] / TWO_PI**2).reshape(shape)

    def __call__(self, phi1: ArrayLike, phi2: ArrayLike) -> Union[float, np.ndarray]:
        phi1 = np.asarray(phi1, dtype=float)
        phi2 = np.asarray(phi2, dtype=float)
        if not np.all((phi1 > 0) & (phi1 < TWO_PI) & (phi2 > 0) & (phi2 < TWO_PI) & (phi1 != phi2)):
            raise DomainError("F♭ takes distinct angles in (0, 2π)")
        value = self.double_average(phi1, phi2) + self.v(phi1, phi2) - self.v(0.0, phi2) + self.v(0.0, phi1)
        return float(value) if np.ndim(value) == 0 else value


class LinearFlatIntegrand(FlatIntegrand):
    """F♭ of a linear combination of cocycles, from the shared integrands of its terms.

    F♭ is linear in the cocycle, so combinations that share terms also share their tables.
    """

    def __init__(
        self,
        cocycle: LinearCochain,
        cfg: Optional[QuadConfig] = None,
        weight: WeightConvention = WeightConvention.SLOT,
    ):
        super().__init__(cocycle, cfg, weight)
        self.parts = [(a, flat_integrand(c, self.cfg, self.weight)) for a, c in cocycle.terms]

    def triple_average(self, zeta: ArrayLike) -> np.ndarray:
        rows = 1 if self.weight is WeightConvention.SLOT else 2
        total = np.zeros((rows,) + np.shape(zeta))
        for a, part in self.parts:
            total = total + a * part.triple_average(zeta)
        return total

    def r(self, phi: ArrayLike) -> np.ndarray:
        total = np.zeros(np.shape(phi), dtype=complex)
        for a, part in self.parts:
            total = total + a * part.r(phi)
        return total

    def double_average(self, phi1: ArrayLike, phi2: ArrayLike) -> np.ndarray:
        total = np.zeros(np.broadcast_shapes(np.shape(phi1), np.shape(phi2)))
        for a, part in self.parts:
            total = total + a * part.double_average(phi1, phi2)
        return total


@lru_cache(maxsize=32)
def flat_integrand(
    c: Cochain, cfg: Optional[QuadConfig] = None, weight: WeightConvention = WeightConvention.SLOT
) -> FlatIntegrand:
    """Shared FlatIntegrand per (cocycle, settings); safe to call from several threads."""
    if isinstance(c, LinearCochain):
        return LinearFlatIntegrand(c, cfg, weight)
    return FlatIntegrand(c, cfg, weight)


def r_c(
    c: Cochain, phi: float, cfg: Optional[QuadConfig] = None, weight: WeightConvention = WeightConvention.SLOT
) -> complex:
    """r_c(φ) for 0 < φ < 2π."""
    if not 0.0 < phi < TWO_PI:
        raise DomainError(f"φ = {phi} outside (0, 2π)")
    return complex(np.asarray(flat_integrand(c, cfg, WeightConvention(weight)).r(phi)).item())


def v_flat(c: Cochain, theta1: float, theta2: float, cfg: Optional[QuadConfig] = None) -> float:
    """v♭_c(θ1, θ2) for distinct angles in [0, 2π)."""
    if not (0.0 <= theta1 < TWO_PI and 0.0 <= theta2 < TWO_PI) or theta1 == theta2:
        raise DomainError(f"({theta1}, {theta2}) are not distinct angles in [0, 2π)")
    return float(np.asarray(flat_integrand(c, cfg).v(theta1, theta2)).item())


def f_flat(c: Cochain, phi1: float, phi2: float, cfg: Optional[QuadConfig] = None) -> float:
    """F♭_c(φ1, φ2) for 0 < φ1 < φ2 < 2π."""
    if not 0.0 < phi1 < phi2 < TWO_PI:
        raise DomainError(f"({phi1}, {phi2}) outside 0 < φ1 < φ2 < 2π")
    return float(np.asarray(flat_integrand(c, cfg)(phi1, phi2)).item())


def weight_convention_check(
    cfg: Optional[QuadConfig] = None, samples: tuple[float, ...] = (0.7, 2.0, 4.5)
) -> dict[WeightConvention, float]:
    """Largest deviation of the pipeline r_c from its closed form, per weight reading.

    The orientation cocycle serves as the test case. Under the outer reading the weight does not
    involve the slots exchanged by the alternation, so the profile vanishes and the deviation equals
    the size of the closed form.
    """
    cocycle = OrientationCocycle()
    phi = np.array(samples)
    expected = r_c_closed(phi)
    result = {}
    for weight in WeightConvention:
        actual = FlatIntegrand(cocycle, cfg, weight).r(phi)
        result[weight] = float(np.max(np.abs(actual - expected)))
        _LOGGER.info("Weight reading %s deviates by %.3e from the closed form", weight.value, result[weight])
    return result
