import numpy as np
import pytest

from pyspenceabel.geometry.config import AltFunction2
from pyspenceabel.models import InvalidInput
from pyspenceabel.operators import p2_grid, rsymmetry_defect, tau3
from pyspenceabel.rhs import cosine_rhs, grid_rhs, load_rhs, rhs_from_dict, zero_rhs
from pyspenceabel.stability import CosineSeries
from pyspenceabel.tests import RHS_DIR, load_rhs_file
from pyspenceabel.tests.common import cosine


def test_builtin_zero():
    """The zero right-hand side."""
    R = load_rhs("zero")
    assert isinstance(R, AltFunction2)
    assert R.evaluate(0.2, 0.7) == 0.0
    assert zero_rhs().evaluate(np.array([0.1, 0.2]), 0.5).shape == (2,)


def test_builtin_cosine():
    """tau3:cosK is τ³ of cos(Kπx)."""
    x, y = p2_grid(10)
    assert np.allclose(load_rhs("tau3:cos3").evaluate(x, y), tau3(cosine(3)).evaluate(x, y))


@pytest.mark.parametrize("spec", ["tau3:cos2", "tau3:cos0", "no-such-rhs"])
def test_invalid_builtin(spec):
    """Even modes and unknown ids are rejected."""
    with pytest.raises(InvalidInput):
        load_rhs(spec)


def test_cosine_series_file():
    """A stored cosine series."""
    data = load_rhs_file(RHS_DIR / "cos_series.json")
    R = load_rhs(str(RHS_DIR / "cos_series.json"))
    expected = tau3(CosineSeries(tuple(data["coeffs"])).as_alt_function())
    x, y = p2_grid(10)
    assert np.allclose(R.evaluate(x, y), expected.evaluate(x, y))


def test_constant_grid_file():
    """A constant grid evaluates to its constant everywhere, also outside the tabulated hull."""
    R = load_rhs(str(RHS_DIR / "constant_grid.json"))
    assert R.evaluate(0.4, 0.6) == pytest.approx(0.1)
    assert R.evaluate(0.01, 0.02) == pytest.approx(0.1)
    assert R.evaluate(0.95, 0.99) == pytest.approx(0.1)


@pytest.mark.parametrize("name", ["malformed.json", "unknown_type.json"])
def test_bad_files(name):
    """Malformed files and unknown types."""
    with pytest.raises(InvalidInput):
        load_rhs(str(RHS_DIR / name))


def test_rhs_from_dict_validation():
    """Descriptions are checked."""
    with pytest.raises(InvalidInput):
        rhs_from_dict({"type": "tau3_of_cosine_series", "coeffs": []})
    with pytest.raises(InvalidInput):
        rhs_from_dict({"type": "tau3_of_cosine_series", "coeffs": ["a"]})
    with pytest.raises(InvalidInput):
        rhs_from_dict({"type": "grid", "points": [[0.1, 0.2]]})
    with pytest.raises(InvalidInput):
        rhs_from_dict({"type": "grid", "points": [[0.1, 0.2, 1.0], [0.1, 0.3, 1.0]]})
    with pytest.raises(InvalidInput):
        rhs_from_dict([1, 2, 3])


def test_grid_rhs_is_symmetrized():
    """Arbitrary tables are projected onto rotation-symmetric functions."""
    u = np.linspace(0.05, 0.95, 7)
    rows = [[a, b, a * b + a] for a in u for b in u if a < b]
    R = grid_rhs(rows)
    assert rsymmetry_defect(R, p2_grid(15)) < 1e-12


def test_cosine_rhs_description():
    """Descriptions name the generator."""
    assert "cos(5πx)" in cosine_rhs(5).description


def test_grid_rhs_scalar_evaluation():
    """Scalar arguments give scalars, arrays keep their shape."""
    R = load_rhs(str(RHS_DIR / "constant_grid.json"))
    value = R.evaluate(0.3, 0.5)
    assert np.ndim(value) == 0
    assert value == pytest.approx(0.1)
    assert R.evaluate(np.full((2, 3), 0.3), 0.5).shape == (2, 3)
    assert np.shape(R(0.3, 0.5)) == ()
