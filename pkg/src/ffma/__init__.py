"""Finite-field multiple access (FFMA) with p-ary element-assemblage codes."""

__version__ = "0.1.0"
