"""Explicit-state epistemic model checking of confidentiality properties."""

__version__ = "0.1.0"
