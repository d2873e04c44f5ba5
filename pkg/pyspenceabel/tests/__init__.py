"""Stored right-hand sides and shared test data."""

import json
from pathlib import Path
from typing import Any, Union

RHS_DIR = Path(__file__).parent / "rhs"

SAMPLE_XS = (0.1, 0.3, 0.5, 0.7, 0.9)


def load_rhs_file(path: Union[Path, str]) -> Any:
    """Load a stored right-hand side description."""
    with open(path, "rb") as file:
        return json.load(file)
