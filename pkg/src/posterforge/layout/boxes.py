"""CSS-style box model: content wrapped by padding, wrapped by margin."""

from dataclasses import dataclass, field
from typing import NamedTuple

ELEMENT_KINDS = ("section_header", "text_block", "image", "divider", "title", "authors", "logo")


class Rect(NamedTuple):
    x: float
    y: float
    w: float
    h: float

    @property
    def right(self):
        return self.x + self.w

    @property
    def bottom(self):
        return self.y + self.h

    @property
    def area(self):
        return self.w * self.h

    def contains(self, other: "Rect", tol: float = 1e-9) -> bool:
        return (other.x >= self.x - tol and other.y >= self.y - tol
                and other.right <= self.right + tol and other.bottom <= self.bottom + tol)

    def intersects(self, other: "Rect", tol: float = 1e-9) -> bool:
        """true when the interiors overlap; shared edges do not count"""
        return (min(self.right, other.right) - max(self.x, other.x) > tol
                and min(self.bottom, other.bottom) - max(self.y, other.y) > tol)

    def rounded(self, ndigits=4):
        return [round(v, ndigits) for v in self]


class Edges(NamedTuple):
    top: float = 0.0
    right: float = 0.0
    bottom: float = 0.0
    left: float = 0.0

    @classmethod
    def all(cls, v: float) -> "Edges":
        return cls(v, v, v, v)

    @property
    def vertical(self):
        return self.top + self.bottom

    @property
    def horizontal(self):
        return self.left + self.right


@dataclass(frozen=True)
class BoxModel:
    margin: Edges = Edges()
    padding: Edges = Edges()

    def __post_init__(self):
        object.__setattr__(self, "margin", Edges(*self.margin))
        object.__setattr__(self, "padding", Edges(*self.padding))
        if min(*self.margin, *self.padding) < 0:
            raise ValueError(f"box model values must be non-negative: {self}")

    @property
    def inset_left(self):
        return self.margin.left + self.padding.left

    @property
    def inset_top(self):
        return self.margin.top + self.padding.top

    @property
    def extra_width(self):
        return self.margin.horizontal + self.padding.horizontal

    @property
    def extra_height(self):
        return self.margin.vertical + self.padding.vertical

    def to_dict(self):
        return {"margin": list(self.margin), "padding": list(self.padding)}


@dataclass
class PositionedElement:
    kind: str
    outer_rect: Rect
    box: BoxModel
    source_ref: str = ""
    text: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def content_rect(self) -> Rect:
        o, b = self.outer_rect, self.box
        return Rect(o.x + b.inset_left, o.y + b.inset_top,
                    o.w - b.extra_width, o.h - b.extra_height)

    @property
    def padding_rect(self) -> Rect:
        """outer rect shrunk by margin only; the painted box"""
        o, m = self.outer_rect, self.box.margin
        return Rect(o.x + m.left, o.y + m.top, o.w - m.horizontal, o.h - m.vertical)

    def to_dict(self):
        return {
            "kind": self.kind,
            "source_ref": self.source_ref,
            "outer_rect": self.outer_rect.rounded(),
            "content_rect": self.content_rect.rounded(),
            "box": self.box.to_dict(),
        }


def apply_box_model(content_size: tuple, box: BoxModel, outer_x: float, outer_y: float,
                    kind: str = "text_block", source_ref: str = "") -> PositionedElement:
    w, h = content_size
    outer = Rect(outer_x, outer_y, w + box.extra_width, h + box.extra_height)
    return PositionedElement(kind, outer, box, source_ref)
