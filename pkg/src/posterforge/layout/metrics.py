"""Glyph advance metrics and greedy line wrapping.

Widths come from bundled per-glyph tables (1000 units/em) so that wrapping is
identical on every platform. Unknown glyphs fall back to the variant average.
"""

import json
import re
from functools import lru_cache
from importlib import resources
from itertools import accumulate

from ..typography import POINTS_PER_INCH, FontSpec

_WORD = re.compile(r"\S+")


def _variant(bold: bool, italic: bool) -> str:
    if bold and italic:
        return "bold_italic"
    if bold:
        return "bold"
    return "italic" if italic else "regular"


class GlyphMetrics:
    """advance widths for one font family, in em units"""

    def __init__(self, variants: dict, units_per_em: int = 1000, family: str = "Arial"):
        self.family = family
        self.units_per_em = units_per_em
        self._advances = {
            name: {ch: w / units_per_em for ch, w in v["advances"].items()}
            for name, v in variants.items()
        }
        self._average = {name: v["average"] / units_per_em for name, v in variants.items()}

    @classmethod
    def bundled(cls) -> "GlyphMetrics":
        return _bundled()

    def advance(self, ch: str, bold: bool = False, italic: bool = False) -> float:
        name = _variant(bold, italic)
        return self._advances[name].get(ch, self._average[name])

    def advances(self, text: str, font: FontSpec) -> list:
        """per-glyph advances in points"""
        table = self._advances[_variant(font.bold, font.italic)]
        avg = self._average[_variant(font.bold, font.italic)]
        size = font.size_pt
        return [table.get(ch, avg) * size for ch in text]

    def text_width_pt(self, text: str, font: FontSpec) -> float:
        return sum(self.advances(text, font))


class MonospaceMetrics(GlyphMetrics):
    """every glyph advances by a fixed fraction of the em; used as a test oracle"""

    def __init__(self, em_fraction: float = 0.5):
        self.family = "monospace"
        self.units_per_em = 1000
        self.em_fraction = em_fraction

    def advance(self, ch, bold=False, italic=False):
        return self.em_fraction

    def advances(self, text, font):
        return [self.em_fraction * font.size_pt] * len(text)


@lru_cache(maxsize=1)
def _bundled() -> GlyphMetrics:
    raw = resources.files("posterforge.data").joinpath("sans_metrics.json").read_text(encoding="utf-8")
    data = json.loads(raw)
    return GlyphMetrics(data["variants"], data["units_per_em"], data["family"])


def _wrap_paragraph(par: str, base: int, limit_pt: float, adv: list) -> list:
    cum = [0.0, *accumulate(adv)]
    words = [(m.start(), m.end()) for m in _WORD.finditer(par)]
    if not words:
        return [(base, base)]

    def width(i, j):
        return cum[j] - cum[i]

    spans = []
    start = end = None
    for ws, we in words:
        if start is not None and width(start, we) <= limit_pt:
            end = we
            continue
        if start is not None:
            spans.append((base + start, base + end))
        start, end = ws, we
        # words wider than a line break at glyph granularity
        while width(start, end) > limit_pt:
            cut = start + 1
            while cut < end and width(start, cut + 1) <= limit_pt:
                cut += 1
            if cut >= end:
                break
            spans.append((base + start, base + cut))
            start = cut
    spans.append((base + start, base + end))
    return spans


@lru_cache(maxsize=65536)
def wrap_spans(text: str, width_in: float, font: FontSpec, metrics: GlyphMetrics) -> tuple:
    """greedy word wrap; returns (start, end) character spans, one per line

    Explicit newlines force a break and an empty paragraph still occupies a line.
    Empty text has no lines.
    """
    if not text:
        return ()
    limit_pt = width_in * POINTS_PER_INCH + 1e-9
    spans = []
    base = 0
    for par in text.split("\n"):
        spans.extend(_wrap_paragraph(par, base, limit_pt, metrics.advances(par, font)))
        base += len(par) + 1
    return tuple(spans)


def wrap_lines(text: str, width_in: float, font: FontSpec, metrics: GlyphMetrics = None) -> list:
    metrics = metrics or GlyphMetrics.bundled()
    return [text[s:e] for s, e in wrap_spans(text, width_in, font, metrics)]
