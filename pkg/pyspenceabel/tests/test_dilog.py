import math

import numpy as np
import pytest
from scipy.special import spence

from pyspenceabel.const import EVAL_ROGERS_MAX_DIFF, ORIENTATION_SCALE, ZETA2
from pyspenceabel.dilog.formula import arbitrate_variant, first_line, rogers_new_formula
from pyspenceabel.dilog.orientation import (
    I1,
    I2,
    I3,
    OrientationCocycle,
    f_flat_closed,
    h_closed,
    orientation_sign,
    r_c_closed,
    v_flat_closed,
    v_split,
)
from pyspenceabel.dilog.reference import (
    ReferenceDilog,
    li2_reference,
    rogers_integral,
    rogers_reference,
)
from pyspenceabel.geometry.config import Config, random_oriented_angles
from pyspenceabel.models import DomainError, FormulaVariant, ToleranceNotMet
from pyspenceabel.quadrature import integrate
from pyspenceabel.tests import SAMPLE_XS
from pyspenceabel.tests.common import first_slot_average, nested_i2, nested_i3


def test_li2_against_scipy():
    """Li₂(x) = spence(1 - x)."""
    x = np.linspace(0.0, 1.0, 201)
    assert np.allclose(li2_reference(x), spence(1.0 - x), rtol=1e-13, atol=1e-15)


def test_li2_special_values():
    """Li₂(0) = 0, Li₂(1/2) = ζ(2)/2 - log²2/2, Li₂(1) = ζ(2)."""
    assert li2_reference(0.0) == 0.0
    assert li2_reference(0.5) == pytest.approx(ZETA2 / 2 - math.log(2) ** 2 / 2, abs=1e-15)
    assert li2_reference(1.0) == ZETA2


def test_reference_domain():
    """Li₂ lives on [0, 1], L₂ on (0, 1)."""
    with pytest.raises(DomainError):
        li2_reference(1.5)
    with pytest.raises(DomainError):
        rogers_reference(1.0)
    with pytest.raises(DomainError):
        rogers_reference(np.array([0.5, 0.0]))


def test_series_tail_check():
    """A short series cannot reach the tail tolerance."""
    with pytest.raises(ToleranceNotMet):
        ReferenceDilog(series_terms=5).li2(0.5)


def test_partial_sums():
    """Partial sums increase toward Li₂."""
    sums = ReferenceDilog().partial_sums(0.3)
    assert sums[0] == pytest.approx(0.3)
    assert np.all(np.diff(sums) >= 0)
    assert sums[-1] == pytest.approx(li2_reference(0.3), abs=1e-15)


def test_rogers_reflection():
    """L₂(x) + L₂(1 - x) = ζ(2) and L₂(1/2) = ζ(2)/2."""
    x = np.linspace(0.001, 0.999, 500)
    assert np.max(np.abs(rogers_reference(x) + rogers_reference(1 - x) - ZETA2)) <= 1e-13
    assert rogers_reference(0.5) == pytest.approx(ZETA2 / 2, abs=1e-15)


@pytest.mark.parametrize("x", SAMPLE_XS)
def test_rogers_integral(x):
    """The integral representation agrees with the series."""
    assert rogers_integral(x) == pytest.approx(rogers_reference(x), abs=1e-9)


def test_orientation_sign():
    """Rotations keep the sign, transpositions flip it."""
    cfg = Config.from_angles(0.0, 1.0, 2.0, 3.0, 4.0)
    assert orientation_sign(cfg) == 1
    assert orientation_sign(cfg.rotated(1)) == 1
    assert orientation_sign(cfg.swapped(1, 3)) == -1
    with pytest.raises(DomainError):
        orientation_sign(cfg.omit(0))


def test_orientation_cocycle():
    """c = scale·sign, bounded by |scale|."""
    c = OrientationCocycle()
    cfg = Config.from_angles(0.0, 1.0, 2.0, 3.0, 4.0)
    assert c(cfg) == pytest.approx(ORIENTATION_SCALE)
    assert c(cfg.swapped(0, 4)) == pytest.approx(-ORIENTATION_SCALE)
    assert c.sup_bound == pytest.approx(ZETA2 / 2)
    assert c.piecewise_constant
    with pytest.raises(DomainError):
        c(cfg.omit(0))


def test_i1_matches_arc_sum(rng):
    """First-slot average against the exact arc-length sum on 100 random increasing tuples."""
    c = OrientationCocycle()
    for _ in range(100):
        thetas = random_oriented_angles(rng, 4, 0.01)
        assert I1(*thetas) == pytest.approx(first_slot_average(c, *thetas), abs=1e-13)
    assert I1(0.0, 2.0, 2.1, 6.0) == pytest.approx(first_slot_average(c, 0.0, 2.0, 2.1, 6.0), abs=1e-14)


def test_i1_domain():
    """Angles must increase."""
    with pytest.raises(DomainError):
        I1(1.0, 0.5, 2.0, 3.0)


def test_i2_matches_nested_average(rng):
    """Closed form of the weighted double average on 50 random pairs."""
    for _ in range(50):
        theta1, theta2 = np.sort(rng.uniform(0.01, 2 * math.pi - 0.01, size=2))
        assert complex(I2(theta1, theta2)) == pytest.approx(nested_i2(theta1, theta2), abs=1e-12)


@pytest.mark.parametrize("theta", [0.4, 1.7, 3.0, 4.4, 5.9])
def test_i3_matches_nested_average(theta):
    """Closed form of the third average against nested quadrature of the second."""
    assert complex(I3(theta)) == pytest.approx(nested_i3(theta), abs=1e-11)


def test_i3_domain():
    """θ lies in (0, 2π)."""
    with pytest.raises(DomainError):
        I3(0.0)


@pytest.mark.parametrize("phi", [0.3, 1.0, 2.5, 4.0, 6.0])
def test_h_closed_matches_quadrature(phi):
    """h(φ) = sin(φ/2)·∫_π^φ Im I3/(1 - cos)."""

    def integrand(z):
        return np.imag(I3(z)) / (1 - np.cos(z))

    expected = math.sin(phi / 2) * integrate(integrand, math.pi, phi).value
    assert h_closed(phi) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("phi", [0.2, 1.5, 3.0, 5.9])
def test_r_c_closed_forms(phi):
    """i·e^{iφ/2}·h(φ) = -½(1 - e^{iφ})·h(φ)/sin(φ/2)."""
    expected = -0.5 * (1 - np.exp(1j * phi)) * h_closed(phi) / math.sin(phi / 2)
    assert complex(r_c_closed(phi)) == pytest.approx(complex(expected), abs=1e-14)
    with pytest.raises(DomainError):
        r_c_closed(0.0)


def test_v_split_sums_to_v_flat():
    """The polynomial and logarithmic parts add up to v♭."""
    theta1 = np.array([0.0, 0.5, 1.0, 2.0])
    theta2 = np.array([1.0, 3.0, 6.0, 2.2])
    v1, v2 = v_split(theta1, theta2)
    assert np.allclose(v1 + v2, v_flat_closed(theta1, theta2), atol=1e-14)


def test_f_flat_closed_bounded():
    """F♭ stays within 4·|scale| on Ω⁺."""
    phi = np.linspace(1e-3, 2 * math.pi - 1e-3, 120)
    p1, p2 = np.meshgrid(phi, phi, indexing="ij")
    mask = p1 < p2
    for variant in FormulaVariant:
        values = f_flat_closed(p1[mask], p2[mask], variant)
        assert np.all(np.isfinite(values))
        assert np.max(np.abs(values)) <= 4 * ZETA2 / 2


def test_f_flat_closed_domain():
    """Only 0 < φ1 < φ2 < 2π."""
    with pytest.raises(DomainError):
        f_flat_closed(2.0, 1.0)
    with pytest.raises(DomainError):
        f_flat_closed(0.0, 1.0)
    with pytest.raises(ValueError):
        f_flat_closed(1.0, 2.0, "neither")


def test_first_line():
    """Both conventions of the non-integral term."""
    assert first_line(0.5, FormulaVariant.BODY) == pytest.approx(
        ZETA2 / 2 + ZETA2 / (2 * math.pi) * (2 * math.atan(0.5) - math.pi / 2)
    )
    assert first_line(0.5, "intro") == pytest.approx(ZETA2 / 2 - ZETA2 / (2 * math.pi) * (math.atan(4 / 3) + math.pi / 2))


@pytest.mark.parametrize("x", SAMPLE_XS)
def test_rogers_new_formula(x):
    """The integral formula reproduces L₂."""
    assert rogers_new_formula(x) == pytest.approx(rogers_reference(x), abs=EVAL_ROGERS_MAX_DIFF)


def test_rogers_new_formula_domain():
    """x must lie in (0, 1)."""
    with pytest.raises(DomainError):
        rogers_new_formula(1.0)


def test_arbitrate_variant():
    """The body convention wins against the reference series."""
    verdict = arbitrate_variant((0.2, 0.5, 0.8))
    assert verdict.winner is FormulaVariant.BODY
    assert verdict.losers == [FormulaVariant.INTRO]
    assert verdict.max_diff[FormulaVariant.BODY] <= EVAL_ROGERS_MAX_DIFF
    assert verdict.as_dict()["winner"] == "body"


def test_arbitrate_variant_reuses_computed_values(monkeypatch):
    """Only variants without precomputed values are evaluated."""
    xs = (0.2, 0.5)
    body = [rogers_new_formula(x) for x in xs]
    calls = []

    def counting(x, cfg=None, variant=FormulaVariant.BODY):
        calls.append(FormulaVariant(variant))
        return rogers_new_formula(x, cfg, variant)

    monkeypatch.setattr("pyspenceabel.dilog.formula.rogers_new_formula", counting)
    verdict = arbitrate_variant(xs, computed={FormulaVariant.BODY: body})
    assert calls == [FormulaVariant.INTRO, FormulaVariant.INTRO]
    assert verdict.winner is FormulaVariant.BODY
