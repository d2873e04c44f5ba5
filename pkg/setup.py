"""Python package description."""
from setuptools import setup

setup()
