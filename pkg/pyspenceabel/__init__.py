"""Numerical toolkit for the perturbed Spence-Abel functional equation."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("pySpenceAbel")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"
