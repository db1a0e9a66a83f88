"""Paper-to-poster composition engine."""

__version__ = "0.1.0"
