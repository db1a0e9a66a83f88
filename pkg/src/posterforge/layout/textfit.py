"""Text frame height estimation.

A closed textbox simulator (greedy wrap over bundled metrics) stands in for a
presentation engine; the minimum non-overflowing height is found by bisection and
then corrected by a per-newline offset.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from ..typography import POINTS_PER_INCH, FontSpec
from .metrics import GlyphMetrics, wrap_spans

DEFAULT_EPSILON = 0.001
DEFAULT_NEWLINE_OFFSET_RATIO = 1.0


class TextboxState(NamedTuple):
    overflowing: bool
    line_count: int
    natural_height: float


@dataclass(frozen=True)
class TextMeasureRequest:
    text: str
    width: float
    font: FontSpec
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"text width must be positive, got {self.width}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


class HeightSearch(NamedTuple):
    height: float
    iterations: int
    bounds: tuple


def natural_height(line_count: int, font: FontSpec) -> float:
    return line_count * font.size_pt * font.line_spacing / POINTS_PER_INCH


def simulate_textbox(text: str, width: float, height: float, font: FontSpec,
                     metrics: GlyphMetrics = None) -> TextboxState:
    if width <= 0:
        raise ValueError(f"textbox width must be positive, got {width}")
    metrics = metrics or GlyphMetrics.bundled()
    lines = len(wrap_spans(text, float(width), font, metrics))
    nat = natural_height(lines, font)
    return TextboxState(nat > height, lines, nat)


def newline_offset(text: str, font: FontSpec, ratio: float = DEFAULT_NEWLINE_OFFSET_RATIO) -> float:
    """corrective offset: one line-height per explicit newline, scaled by ratio"""
    return text.count("\n") * ratio * font.line_height_in


def max_iterations(lo: float, hi: float, epsilon: float) -> int:
    if hi - lo <= epsilon:
        return 0
    return math.ceil(math.log2((hi - lo) / epsilon))


def search_min_height(text: str, width: float, font: FontSpec, epsilon: float,
                      bounds: tuple, metrics: GlyphMetrics = None) -> HeightSearch:
    """bisection for the smallest non-overflowing height, to within epsilon

    If the upper bound overflows it is doubled until it brackets the text; the
    iteration bound then applies to the widened range reported in `bounds`.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if hi <= lo:
        raise ValueError(f"empty search interval {bounds}")
    while simulate_textbox(text, width, hi, font, metrics).overflowing:
        hi = lo + 2 * (hi - lo)
    bracket = (lo, hi)
    iterations = 0
    while hi - lo > epsilon:
        mid = (lo + hi) / 2
        if simulate_textbox(text, width, mid, font, metrics).overflowing:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return HeightSearch(hi, iterations, bracket)


def measure_text_height(req: TextMeasureRequest, bounds: tuple = (0.0, 60.0),
                        newline_offset_ratio: float = DEFAULT_NEWLINE_OFFSET_RATIO,
                        metrics: GlyphMetrics = None) -> float:
    """estimated rendered height of a text frame, in inches"""
    found = search_min_height(req.text, req.width, req.font, req.epsilon, bounds, metrics)
    return found.height + newline_offset(req.text, req.font, newline_offset_ratio)
