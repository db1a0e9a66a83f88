"""PPTX and SVG output."""
