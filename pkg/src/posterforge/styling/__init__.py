"""Palette, markup and run styling."""
