"""Three-column poster layout: stacking, utilization and final assembly."""

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from ..curator import COLUMNS, ordered_column
from ..errors import AssemblyError
from ..styling.markup import block_text
from ..typography import TypographyScheme
from .boxes import BoxModel, Edges, PositionedElement, Rect
from .metrics import GlyphMetrics
from .textfit import TextMeasureRequest, measure_text_height

UNDER, IN_BAND, OVERFLOW = "underutilized", "in_band", "overflow"


def _default_boxes():
    side = 0.3
    return {
        "section_header": BoxModel(Edges(0.35, 0, 0.05, 0), Edges(0.1, side, 0.1, side)),
        "text_block": BoxModel(Edges(0, 0, 0.1, 0), Edges(0.1, side, 0.1, side)),
        "image": BoxModel(Edges(0.1, 0, 0.2, 0), Edges(0, side, 0, side)),
        "divider": BoxModel(Edges(0.05, 0, 0.05, 0), Edges(0, side, 0, side)),
        "title": BoxModel(Edges(0, 0, 0, 0), Edges(0.05, 0, 0.05, 0)),
        "authors": BoxModel(Edges(0.1, 0, 0, 0), Edges(0.05, 0, 0.05, 0)),
        "logo": BoxModel(),
    }


@dataclass
class LayoutConfig:
    canvas_width: float = 48.0
    canvas_height: float = 36.0
    header_height: float = 5.5
    header_padding: float = 0.5
    outer_margin: float = 1.0
    column_gap: float = 1.0
    bottom_margin: float = 1.0
    epsilon: float = 0.001
    newline_offset_ratio: float = 1.0
    target_band: tuple = (0.85, 0.95)
    status_band: tuple = (0.80, 1.00)
    max_iterations: int = 3
    logo_width_cap: float = 0.15
    logo_gap: float = 0.5
    boxes: dict = field(default_factory=_default_boxes)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not self.target_band[0] < self.target_band[1]:
            raise ValueError(f"target band must satisfy lo < hi, got {self.target_band}")
        if not self.status_band[0] < self.status_band[1]:
            raise ValueError(f"status band must satisfy lo < hi, got {self.status_band}")
        if self.column_width <= 0:
            raise ValueError("margins and gaps leave no room for three columns")
        if self.available_height <= 0:
            raise ValueError("header and bottom margin leave no room for columns")
        if self.column_content_width <= 0:
            raise ValueError("column padding exceeds column width")

    @property
    def column_width(self) -> float:
        return (self.canvas_width - 2 * self.outer_margin - 2 * self.column_gap) / 3

    @property
    def column_content_width(self) -> float:
        """width available to text and images inside a column; shared with the curator"""
        return self.column_width - self.boxes["image"].extra_width

    @property
    def available_height(self) -> float:
        return self.canvas_height - self.header_height - self.bottom_margin

    @property
    def search_bounds(self) -> tuple:
        return (0.0, 2 * self.available_height)

    def column_geometry(self, index: int) -> "ColumnGeometry":
        x = self.outer_margin + index * (self.column_width + self.column_gap)
        return ColumnGeometry(index, x, self.column_width, self.header_height, self.available_height)


class ColumnGeometry(NamedTuple):
    index: int
    x: float
    width: float
    y_top: float
    available_height: float

    @property
    def bottom(self):
        return self.y_top + self.available_height

    @property
    def name(self):
        return COLUMNS[self.index]


@dataclass
class ColumnLayout:
    geometry: ColumnGeometry
    elements: list

    @property
    def used_height(self) -> float:
        return sum(e.outer_rect.h for e in self.elements)


class ColumnUtilization(NamedTuple):
    used_height: float
    available_height: float
    fraction: float
    status: str


@dataclass
class UtilizationReport:
    columns: dict  # column name -> ColumnUtilization

    def fractions(self) -> tuple:
        return tuple(self.columns[c].fraction for c in COLUMNS)

    def to_dict(self):
        return {c: {"used_height": round(u.used_height, 4), "available_height": round(u.available_height, 4),
                    "fraction": round(u.fraction, 4), "status": u.status}
                for c, u in self.columns.items()}


def utilization_status(fraction: float, band=(0.80, 1.00)) -> str:
    if fraction < band[0]:
        return UNDER
    if fraction > band[1]:
        return OVERFLOW
    return IN_BAND


def compute_utilization(columns, status_band=(0.80, 1.00)) -> UtilizationReport:
    out = {}
    for col in columns:
        avail = col.geometry.available_height
        used = col.used_height
        frac = used / avail
        out[col.geometry.name] = ColumnUtilization(used, avail, frac, utilization_status(frac, status_band))
    return UtilizationReport(out)


def stack(blocks, x: float, y_top: float) -> list:
    """place (kind, content_w, content_h, box, source_ref) blocks top-down, edge to edge"""
    out, y = [], y_top
    for kind, w, h, box, ref in blocks:
        el = PositionedElement(kind, Rect(x, y, w + box.extra_width, h + box.extra_height), box, ref)
        out.append(el)
        y += el.outer_rect.h
    return out


@dataclass
class PositionedPoster:
    canvas: tuple
    header: list
    columns: list
    utilization: UtilizationReport
    title: str = ""
    authors: str = ""
    key_visual: Optional[str] = None
    warnings: list = field(default_factory=list)

    def elements(self) -> list:
        out = list(self.header)
        for col in self.columns:
            out.extend(col.elements)
        return out

    def to_dict(self) -> dict:
        return {
            "canvas": [round(v, 4) for v in self.canvas],
            "title": self.title,
            "authors": self.authors,
            "header": [e.to_dict() for e in self.header],
            "columns": [
                {"index": c.geometry.index, "x": round(c.geometry.x, 4), "width": round(c.geometry.width, 4),
                 "y_top": round(c.geometry.y_top, 4),
                 "available_height": round(c.geometry.available_height, 4),
                 "elements": [e.to_dict() for e in c.elements]}
                for c in self.columns
            ],
            "utilization": self.utilization.to_dict(),
            "white_space_fraction": round(white_space_fraction(self), 4),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def white_space_fraction(poster: PositionedPoster) -> float:
    w, h = poster.canvas
    used = sum(e.content_rect.area for e in poster.elements())
    return 1.0 - used / (w * h)


def poster_violations(poster: PositionedPoster, tol: float = 1e-9) -> list:
    """invariant breaches: overlap, out-of-canvas, out-of-column, overflow"""
    out = []
    canvas = Rect(0, 0, *poster.canvas)
    els = poster.elements()
    for e in els:
        if not canvas.contains(e.outer_rect, tol):
            out.append(f"{e.kind} {e.source_ref} outside canvas")
        if not e.outer_rect.contains(e.content_rect, tol):
            out.append(f"{e.kind} {e.source_ref} content escapes its box")
    for col in poster.columns:
        g = col.geometry
        span = Rect(g.x, g.y_top, g.width, g.available_height)
        for e in col.elements:
            if e.outer_rect.x < g.x - tol or e.outer_rect.right > g.x + g.width + tol:
                out.append(f"{e.kind} {e.source_ref} outside column {g.name} x-span")
            if e.outer_rect.bottom > span.bottom + tol:
                out.append(f"{e.kind} {e.source_ref} overflows column {g.name}")
    rects = [(e, e.content_rect) for e in els]
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if rects[i][1].intersects(rects[j][1], tol):
                a, b = rects[i][0], rects[j][0]
                out.append(f"{a.kind} {a.source_ref} overlaps {b.kind} {b.source_ref}")
    return out


class Layouter:
    """binds layout config, typography and asset dimensions"""

    def __init__(self, cfg: LayoutConfig, typography: TypographyScheme, assets: dict,
                 metrics: GlyphMetrics = None):
        self.cfg = cfg
        self.typography = typography
        self.assets = assets
        self.metrics = metrics or GlyphMetrics.bundled()

    def measure(self, text: str, width: float, role: str) -> float:
        if not text:
            return 0.0
        req = TextMeasureRequest(text, width, self.typography[role], self.cfg.epsilon)
        return measure_text_height(req, self.cfg.search_bounds, self.cfg.newline_offset_ratio, self.metrics)

    def section_blocks(self, section, key_visual=None) -> list:
        boxes = self.cfg.boxes
        cw = self.cfg.column_content_width
        blocks = [("section_header", cw, self.measure(section.section_title, cw, "heading"),
                   boxes["section_header"], section.section_id)]
        text = block_text(section.text_content)
        if text:
            blocks.append(("text_block", cw, self.measure(text, cw, "body"), boxes["text_block"],
                           section.section_id))
        ids = sorted(section.visual_ids, key=lambda v: v != key_visual)
        for vid in ids:
            a = self.assets[vid]
            blocks.append(("image", cw, cw / a.aspect_ratio, boxes["image"], vid))
        return blocks

    def layout_column(self, sections, geom: ColumnGeometry, key_visual=None) -> list:
        blocks, owners = [], []
        for s in ordered_column(sections):
            for b in self.section_blocks(s, key_visual):
                blocks.append(b)
                owners.append(s)
        elements = stack(blocks, geom.x, geom.y_top)
        for el, s in zip(elements, owners):
            el.meta["section_id"] = s.section_id
            el.meta["importance_level"] = s.importance_level
            if el.kind == "section_header":
                el.text = s.section_title
            elif el.kind == "text_block":
                el.text = block_text(s.text_content)
                el.meta["markup"] = list(s.text_content)
        return elements

    def layout_columns(self, storyboard) -> list:
        out = []
        for i, col in enumerate(COLUMNS):
            geom = self.cfg.column_geometry(i)
            out.append(ColumnLayout(geom, self.layout_column(storyboard.column_sections(col), geom,
                                                             storyboard.key_visual)))
        return out

    def utilization(self, storyboard) -> UtilizationReport:
        return compute_utilization(self.layout_columns(storyboard), self.cfg.status_band)

    def header_elements(self, title: str, authors: str) -> tuple:
        """title and authors, left-aligned; the title shrinks until the header fits"""
        cfg, boxes = self.cfg, self.cfg.boxes
        reserve = 2 * cfg.logo_width_cap * cfg.canvas_width + cfg.logo_gap
        width = cfg.canvas_width - 2 * cfg.outer_margin - reserve - cfg.logo_gap
        room = cfg.header_height - 2 * cfg.header_padding
        warnings = []
        title_font = self.typography["title"]
        authors_h = self.measure(authors, width, "authors") if authors else 0.0
        size = title_font.size_pt
        while True:
            scheme = self.typography.fonts.copy()
            scheme["title"] = title_font.with_size(size)
            title_h = self._measure_font(title, width, scheme["title"]) if title else 0.0
            total = (title_h + boxes["title"].extra_height
                     + (authors_h + boxes["authors"].extra_height if authors else 0.0))
            if total <= room or size <= self.typography["heading"].size_pt:
                break
            size -= 2
        if size != title_font.size_pt:
            warnings.append(f"title font reduced to {size}pt to fit the header")
        if total > room:
            warnings.append("title and authors exceed the header height")
        blocks = []
        if title:
            blocks.append(("title", width, title_h, boxes["title"], "title"))
        if authors:
            blocks.append(("authors", width, authors_h, boxes["authors"], "authors"))
        els = stack(blocks, cfg.outer_margin, cfg.header_padding)
        for el in els:
            el.text = title if el.kind == "title" else authors
            if el.kind == "title":
                el.meta["size_pt"] = size
        return els, warnings

    def _measure_font(self, text, width, font):
        req = TextMeasureRequest(text, width, font, self.cfg.epsilon)
        return measure_text_height(req, self.cfg.search_bounds, self.cfg.newline_offset_ratio, self.metrics)

    def assemble(self, storyboard, title: str = "", authors: str = "", allow_overflow: bool = False):
        columns = self.layout_columns(storyboard)
        report = compute_utilization(columns, self.cfg.status_band)
        header, warnings = self.header_elements(title, authors)
        poster = PositionedPoster((self.cfg.canvas_width, self.cfg.canvas_height), header, columns,
                                  report, title, authors, storyboard.key_visual, warnings)
        if not allow_overflow:
            over = [c for c, u in report.columns.items() if u.status == OVERFLOW]
            if over:
                raise AssemblyError(
                    "residual overflow in " + ", ".join(
                        f"{c} column ({report.columns[c].fraction:.1%})" for c in over)
                )
        return poster


def layout_column(sections, geom, cfg, typography, assets, key_visual=None, metrics=None) -> list:
    return Layouter(cfg, typography, assets, metrics).layout_column(sections, geom, key_visual)


def assemble(storyboard, cfg, typography, assets, title="", authors="", metrics=None):
    return Layouter(cfg, typography, assets, metrics).assemble(storyboard, title, authors)
