"""Command-line surface of the co-exploration engine."""

__version__ = "1.0.0"
