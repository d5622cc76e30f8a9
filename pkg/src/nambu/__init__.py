"""Exact-arithmetic toolkit for n-ary multiplicative Hom-Nambu-Lie superalgebras."""

__version__ = "0.1.0"
