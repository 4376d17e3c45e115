"""Verification toolkit for pentagonal cocycles on affine-type groups."""

__version__ = "0.1.0"
