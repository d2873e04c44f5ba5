import json

import numpy as np
import pytest

from pyspenceabel.const import CONTINUITY_OFFSET_FACTOR, CONTINUITY_RHS_FACTOR, ZETA2
from pyspenceabel.dilog.reference import rogers_reference
from pyspenceabel.models import InvalidInput
from pyspenceabel.operators import five_term, p2_grid
from pyspenceabel.rhs import cosine_rhs
from pyspenceabel.solver.flat import flat_integrand
from pyspenceabel.solver.primitive import PerturbedSystem
from pyspenceabel.stability import (
    CosineSeries,
    StabilityReport,
    continuity_bound,
    continuity_sweep,
    generate_admissible_rhs,
    run_stability_trial,
    run_trials,
    smoothness_estimate,
)


def test_cosine_series_is_alternating():
    """Odd cosine modes satisfy f(1-x) = -f(x)."""
    series = CosineSeries((0.3, -0.2, 0.05))
    x = np.linspace(0.01, 0.99, 50)
    assert np.allclose(series(1 - x), -series(x), atol=1e-15)
    assert series.sup_bound == pytest.approx(0.55)
    assert "cos(3πx)" in series.description


def test_generate_admissible_rhs_reproducible():
    """Same seed, same generator."""
    f1, R1 = generate_admissible_rhs(7, 0.1, 4)
    f2, _ = generate_admissible_rhs(7, 0.1, 4)
    x = np.linspace(0.05, 0.95, 10)
    assert np.array_equal(f1.evaluate(x), f2.evaluate(x))
    assert np.max(np.abs(f1.evaluate(x))) <= 0.4
    u, v = p2_grid(10)
    assert np.allclose(R1.evaluate(u, v), five_term(f1, u, v))


def test_generate_admissible_rhs_validation():
    """Amplitude and mode count are checked."""
    with pytest.raises(InvalidInput):
        generate_admissible_rhs(0, -1.0, 3)
    with pytest.raises(InvalidInput):
        generate_admissible_rhs(0, 0.1, 0)


def test_exact_trial():
    """L₂ itself is an exact run."""
    report = run_stability_trial(rogers_reference, ZETA2)
    assert report.exact
    assert report.ratio == 0.0
    assert report.passed


def test_trial_rejects_broken_reflection():
    """L(x) + L(1-x) must equal C."""

    def L(u):
        return rogers_reference(u) + 0.1 * u

    with pytest.raises(InvalidInput):
        run_stability_trial(L, ZETA2)


def test_shift_only_trial():
    """L = L₂ + δ has ε = δ and |C - ζ(2)| = 2δ."""
    (report,) = run_trials(seed=3, amplitude=0.0, modes=1, trials=1, shift=0.05)
    assert report.epsilon == pytest.approx(0.05, abs=1e-12)
    assert report.c_offset == pytest.approx(0.1)
    assert report.deviation == pytest.approx(0.05, abs=1e-12)
    assert report.bound == pytest.approx(11 * 0.05 + 6 * 0.1, abs=1e-10)
    assert report.passed and not report.exact


def test_random_trials_respect_bound():
    """Deviation stays below 11·ε + 6·|C - ζ(2)|."""
    reports = run_trials(seed=0, amplitude=0.01, modes=3, trials=20)
    assert len(reports) == 20
    assert all(report.passed for report in reports)
    assert [r.metadata["trial"] for r in reports] == list(range(20))
    assert all(0 < r.epsilon <= 0.15 for r in reports)


def test_trials_reproducible():
    """A fixed seed gives identical reports."""
    first = [r.to_json() for r in run_trials(seed=5, amplitude=0.02, modes=2, trials=2)]
    second = [r.to_json() for r in run_trials(seed=5, amplitude=0.02, modes=2, trials=2)]
    assert first == second
    assert list(json.loads(first[0])) == sorted(json.loads(first[0]))


def test_run_trials_validation():
    """At least one trial."""
    with pytest.raises(InvalidInput):
        run_trials(seed=0, amplitude=0.1, modes=1, trials=0)


def test_report_ratio_pass():
    """Ratios above one fail unless the run is exact."""
    assert not StabilityReport(0.1, 0.0, 2.0, 1.1, 2.0 / 1.1).passed
    assert StabilityReport(0.0, 0.0, 0.0, 0.0, 0.0, exact=True).passed


def test_continuity_bound():
    """(1 + 16/√3)·‖ΔR‖ + (1 + 8/√3)·|ΔC|."""
    assert continuity_bound(0.5, 0.25) == pytest.approx(CONTINUITY_RHS_FACTOR * 0.5 + CONTINUITY_OFFSET_FACTOR * 0.25)
    assert CONTINUITY_RHS_FACTOR == pytest.approx(10.2376, abs=1e-4)


def test_smoothness_estimate():
    """Second differences of x² are 2."""
    assert smoothness_estimate(lambda x: x**2) == pytest.approx(2.0, abs=1e-5)
    assert np.isfinite(smoothness_estimate(rogers_reference))


def _seeded_pairs(seed: int, count: int = 10) -> list[tuple[tuple[float, float, float], tuple[float, float, float]]]:
    """Distinct (a, κ, C) pairs for systems R = a·τ³cos(πx) + κ."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < count:
        first, second = rng.uniform([-0.3, -0.1, 0.5], [0.3, 0.1, 2.0], size=(2, 3))
        if not np.allclose(first, second):
            pairs.append((tuple(first), tuple(second)))
    return pairs


@pytest.fixture(scope="module")
def cosine_base():
    """One shared base right-hand side, so all systems below reuse its tables."""
    return cosine_rhs(1)


@pytest.mark.slow
def test_flat_integrand_lipschitz_in_cocycle(cosine_base, pipeline_cfg):
    """|F♭_c1 - F♭_c2| <= 4·‖c1 - c2‖ on ten seeded pairs of cocycles."""
    rng = np.random.default_rng(11)
    u, v = p2_grid(60)
    for (a1, k1, C1), (a2, k2, C2) in _seeded_pairs(11):
        c1 = PerturbedSystem(cosine_base * a1 + k1, C1).cocycle
        c2 = PerturbedSystem(cosine_base * a2 + k2, C2).cocycle
        distance = np.max(np.abs((a1 - a2) * cosine_base.evaluate(u, v) + (k1 - C1 / 2) - (k2 - C2 / 2)))
        phi1, phi2 = np.sort(rng.uniform(0.1, 2 * np.pi - 0.1, size=(2, 5)), axis=0)
        gap = flat_integrand(c1, pipeline_cfg)(phi1, phi2) - flat_integrand(c2, pipeline_cfg)(phi1, phi2)
        assert np.max(np.abs(gap)) <= 4 * distance


@pytest.mark.slow
def test_continuity_on_seeded_pairs(cosine_base, pipeline_cfg):
    """Solutions of ten seeded pairs of systems stay within the continuity bound."""
    for (a1, k1, C1), (a2, k2, C2) in _seeded_pairs(12):
        sys1 = PerturbedSystem(cosine_base * a1 + k1, C1)
        sys2 = PerturbedSystem(cosine_base * a2 + k2, C2)
        measured = continuity_sweep(sys1, sys2, xs=(0.3, 0.7), cfg=pipeline_cfg)
        assert measured > 0
