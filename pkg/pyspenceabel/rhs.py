"""Right-hand sides from builtin ids or JSON files."""

import json
import logging
import re
from pathlib import Path
from typing import Any

import numpy as np
from scipy.interpolate import NearestNDInterpolator, RegularGridInterpolator

from pyspenceabel.geometry.config import AltFunction2, symmetrize
from pyspenceabel.models import InvalidInput, get_element_from_dict_maybe
from pyspenceabel.operators import tau3
from pyspenceabel.stability import CosineSeries

_LOGGER = logging.getLogger(__name__)

BUILTIN_ZERO = "zero"
_TAU3_COS = re.compile(r"^tau3:cos(\d+)$")


def zero_rhs() -> AltFunction2:
    """R ≡ 0."""
    return AltFunction2.constant(0.0, BUILTIN_ZERO)


def cosine_rhs(k: int) -> AltFunction2:
    """R = τ³f for f(x) = cos(kπx), k odd."""
    if k < 1 or k % 2 == 0:
        raise InvalidInput(f"cos(kπx) is alternating only for odd k, got {k}")
    coeffs = [0.0] * ((k + 1) // 2)
    coeffs[-1] = 1.0
    return tau3(CosineSeries(tuple(coeffs)).as_alt_function())


def grid_rhs(points: Any) -> AltFunction2:
    """Bilinear interpolation of tabulated (x, y, value) rows, symmetrized under (x,y) ↦ (1-y,(1-y)/(1-x)).

    Grid cells without a row are filled with the nearest tabulated value.
    """
    try:
        table = np.asarray(points, dtype=float)
    except (TypeError, ValueError) as err:
        raise InvalidInput(f"Grid points must be numeric [x, y, value] rows: {err}") from err
    if table.ndim != 2 or table.shape[1] != 3 or not np.all(np.isfinite(table)):
        raise InvalidInput("Grid points must be finite [x, y, value] rows")
    xs, ys = np.unique(table[:, 0]), np.unique(table[:, 1])
    if xs.size < 2 or ys.size < 2:
        raise InvalidInput("Grid needs at least two distinct x and y values")
    values = np.full((xs.size, ys.size), np.nan)
    values[np.searchsorted(xs, table[:, 0]), np.searchsorted(ys, table[:, 1])] = table[:, 2]
    missing = np.isnan(values)
    if missing.any():
        nearest = NearestNDInterpolator(table[:, :2], table[:, 2])
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        values[missing] = nearest(gx[missing], gy[missing])
    interpolator = RegularGridInterpolator((xs, ys), values, bounds_error=False, fill_value=None)

    def raw(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return interpolator(np.stack([x, y], axis=-1)).reshape(x.shape)

    _LOGGER.debug("Grid right-hand side on %d x %d nodes", xs.size, ys.size)
    return symmetrize(raw, 2, f"grid({len(table)} points)")


def rhs_from_dict(data: Any) -> AltFunction2:
    """Build a right-hand side from its JSON description."""
    kind = get_element_from_dict_maybe(data, "type")
    if kind == "tau3_of_cosine_series":
        coeffs = get_element_from_dict_maybe(data, "coeffs")
        if not isinstance(coeffs, list) or not coeffs or not all(isinstance(a, (int, float)) for a in coeffs):
            raise InvalidInput("'coeffs' must be a non-empty list of numbers")
        return tau3(CosineSeries(tuple(coeffs)).as_alt_function())
    if kind == "grid":
        return grid_rhs(get_element_from_dict_maybe(data, "points"))
    raise InvalidInput(f"Unknown right-hand side type {kind!r}")


def load_rhs(spec: str) -> AltFunction2:
    """Resolve a builtin id (`zero`, `tau3:cosK`) or a JSON file path."""
    if spec == BUILTIN_ZERO:
        return zero_rhs()
    match = _TAU3_COS.match(spec)
    if match:
        return cosine_rhs(int(match.group(1)))
    path = Path(spec)
    if not path.is_file():
        raise InvalidInput(f"Unknown right-hand side {spec!r}: neither a builtin id nor a file")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as err:
        raise InvalidInput(f"Cannot read right-hand side file {spec}: {err}") from err
    return rhs_from_dict(data)
