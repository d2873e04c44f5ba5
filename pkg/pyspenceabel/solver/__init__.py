"""Primitive integration pipeline and the general solver."""
