"""Exact-arithmetic engine for deriving the Born rule from consistency constraints."""

__version__ = "1.0.0"
