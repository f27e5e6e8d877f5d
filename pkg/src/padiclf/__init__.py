"""Exact p-adic L-functions of small-slope eigensymbols.

See README.md for the layout; the CLI entry point is padiclf.cli:main.
"""

__version__ = "0.1.0"
