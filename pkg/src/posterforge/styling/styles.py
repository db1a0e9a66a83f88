"""Keyword plans and resolution of every text run's font, weight, style and color."""

import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from .. import prompts
from ..errors import StylingError
from ..layout.boxes import Rect
from ..typography import FontSpec, TypographyScheme
from .color import MIN_CONTRAST, Color, ColorPalette, contrast_ratio
from .markup import BULLET_GLYPHS, parse_line

log = logging.getLogger(__name__)

KEYWORD_LIMITS = {"bold_contrast": 2, "bold": 3, "italic": 2}
HEADER_RULE_HEIGHT = 0.1


@dataclass
class SectionKeywords:
    bold_contrast: list = field(default_factory=list)
    bold: list = field(default_factory=list)
    italic: list = field(default_factory=list)

    def classes(self):
        return (("bold_contrast", self.bold_contrast), ("bold", self.bold), ("italic", self.italic))


@dataclass
class KeywordPlan:
    sections: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def summary(self) -> dict:
        return {f"total_{name}": sum(len(getattr(k, name)) for k in self.sections.values())
                for name in KEYWORD_LIMITS}

    def to_dict(self) -> dict:
        return {
            "section_keywords": {sid: {n: list(v) for n, v in k.classes()} for sid, k in self.sections.items()},
            "formatting_summary": self.summary(),
        }


def plan_from_json(value: dict) -> KeywordPlan:
    """enforce per-section limits by truncation and drop cross-class duplicates"""
    plan = KeywordPlan()
    for sid, entry in value.get("section_keywords", {}).items():
        kw = SectionKeywords()
        used = set()
        for name, limit in KEYWORD_LIMITS.items():
            phrases = [p for p in entry.get(name, []) if p and p.strip()]
            kept = []
            for p in phrases:
                if p in used:
                    plan.warnings.append(f"{sid}: '{p}' already highlighted in another class")
                    continue
                kept.append(p)
            if len(kept) > limit:
                plan.warnings.append(f"{sid}: {len(kept)} {name} keywords truncated to {limit}")
                kept = kept[:limit]
            used.update(kept)
            setattr(kw, name, kept)
        plan.sections[sid] = kw
    for w in plan.warnings:
        log.warning("keywords: %s", w)
    return plan


def keyword_violations(plan: KeywordPlan) -> list:
    out = []
    for sid, kw in plan.sections.items():
        seen = set()
        for name, phrases in kw.classes():
            if len(phrases) > KEYWORD_LIMITS[name]:
                out.append(f"{sid}: {len(phrases)} {name} > {KEYWORD_LIMITS[name]}")
            for p in phrases:
                if p in seen:
                    out.append(f"{sid}: '{p}' in two classes")
                seen.add(p)
    return out


def extract_keywords(storyboard, narrative, gw) -> KeywordPlan:
    req = gw.request("font", prompts.keywords(narrative.to_dict(), storyboard.dumps()), "json:keywords")
    try:
        value = gw.complete_json(req, "keywords")
    except Exception as e:
        raise StylingError(f"keyword extraction failed: {e}") from e
    return plan_from_json(value)


# -- styled output --------------------------------------------------------

@dataclass(frozen=True)
class StyledRun:
    text: str
    bold: bool
    italic: bool
    color: Color
    font: FontSpec

    def __post_init__(self):
        if not self.text:
            raise ValueError("styled runs must be non-empty")


@dataclass
class StyledParagraph:
    runs: list
    level: int = 0

    @property
    def text(self) -> str:
        return "".join(r.text for r in self.runs)


@dataclass
class StyledBlock:
    element: object  # PositionedElement
    paragraphs: list
    background: Color
    font: FontSpec


@dataclass
class Fill:
    rect: Rect
    color: Color
    role: str


@dataclass
class StyledPoster:
    poster: object  # PositionedPoster
    palette: ColorPalette
    typography: TypographyScheme
    fills: list
    blocks: list
    warnings: list = field(default_factory=list)

    @property
    def images(self) -> list:
        return [e for e in self.poster.elements() if e.kind in ("image", "logo")]


def _find_phrase(text: str, phrase: str) -> Optional[re.Match]:
    return re.search(r"(?<!\w)" + re.escape(phrase) + r"(?!\w)", text)


def _highlight(paragraphs, keywords: SectionKeywords, palette: ColorPalette):
    """style the first whole-phrase occurrence of each keyword in unstyled runs"""
    for name, phrases in keywords.classes():
        for phrase in phrases:
            done = False
            for par in paragraphs:
                for i, run in enumerate(par.runs):
                    if run.bold or run.italic or run.meta_prefix:
                        continue
                    m = _find_phrase(run.text, phrase)
                    if not m:
                        continue
                    pieces = []
                    if m.start():
                        pieces.append(run._replace(text=run.text[:m.start()]))
                    if name == "bold_contrast":
                        hit = run._replace(text=phrase, bold=True, color=palette.accent, keyword=name)
                    elif name == "bold":
                        hit = run._replace(text=phrase, bold=True, keyword=name)
                    else:
                        hit = run._replace(text=phrase, italic=True, keyword=name)
                    pieces.append(hit)
                    if m.end() < len(run.text):
                        pieces.append(run._replace(text=run.text[m.end():]))
                    par.runs[i:i + 1] = pieces
                    done = True
                    break
                if done:
                    break


class _Draft:
    """mutable run used while styling; frozen into StyledRun at the end"""

    __slots__ = ("text", "bold", "italic", "color", "meta_prefix", "keyword")

    def __init__(self, text, bold, italic, color, meta_prefix=False, keyword=""):
        self.text, self.bold, self.italic, self.color = text, bold, italic, color
        self.meta_prefix, self.keyword = meta_prefix, keyword

    def _replace(self, **kw):
        d = _Draft(self.text, self.bold, self.italic, self.color, self.meta_prefix, self.keyword)
        for k, v in kw.items():
            setattr(d, k, v)
        return d


class _DraftParagraph:
    def __init__(self, runs, level):
        self.runs, self.level = runs, level


def _text_paragraphs(lines, color: Color) -> list:
    out = []
    for line in lines:
        parsed = parse_line(line)
        runs = []
        if parsed.bullet:
            runs.append(_Draft(BULLET_GLYPHS[parsed.bullet], False, False, color, meta_prefix=True))
        runs.extend(_Draft(r.text, r.bold, r.italic, color) for r in parsed.runs)
        out.append(_DraftParagraph(runs, parsed.level))
    return out


def _freeze(drafts, font: FontSpec) -> list:
    return [StyledParagraph([StyledRun(r.text, r.bold, r.italic, r.color, font) for r in p.runs if r.text],
                            p.level) for p in drafts]


def anchor_section(poster) -> Optional[str]:
    """the level-1 middle-column section that receives the light tint"""
    middle = poster.columns[1]
    level1 = []
    for el in middle.elements:
        sid = el.meta.get("section_id")
        if el.meta.get("importance_level") == 1 and sid not in level1:
            level1.append(sid)
    if not level1:
        return None
    if poster.key_visual:
        for el in middle.elements:
            if el.kind == "image" and el.source_ref == poster.key_visual and el.meta["section_id"] in level1:
                return el.meta["section_id"]
    return level1[0]


def apply_styles(poster, palette: ColorPalette, plan: KeywordPlan, typography: TypographyScheme) -> StyledPoster:
    W, H = poster.canvas
    header_h = poster.columns[0].geometry.y_top if poster.columns else H
    fills = [Fill(Rect(0, 0, W, header_h), palette.theme, "header")]
    fills.append(Fill(Rect(0, header_h - HEADER_RULE_HEIGHT, W, HEADER_RULE_HEIGHT), palette.mono_dark, "rule"))
    warnings = []

    anchor = anchor_section(poster)
    if anchor is None:
        warnings.append("no importance-1 section in the middle column; no tinted anchor")
    else:
        col = poster.columns[1]
        own = [e for e in col.elements if e.meta.get("section_id") == anchor]
        top = own[0].outer_rect.y + own[0].box.margin.top
        bottom = own[-1].outer_rect.bottom - own[-1].box.margin.bottom
        g = col.geometry
        fills.append(Fill(Rect(g.x, top, g.width, bottom - top), palette.mono_light, "anchor"))

    blocks = []
    for el in poster.header:
        if el.kind not in ("title", "authors") or not el.text:
            continue
        font = typography["title"] if el.kind == "title" else typography["authors"]
        if el.kind == "title" and el.meta.get("size_pt"):
            font = font.with_size(el.meta["size_pt"])
        run = StyledRun(el.text, el.kind == "title", False, palette.background, font)
        blocks.append(StyledBlock(el, [StyledParagraph([run])], palette.theme, font))

    for col in poster.columns:
        for el in col.elements:
            sid = el.meta.get("section_id")
            bg = palette.mono_light if sid == anchor else palette.background
            if el.kind == "section_header":
                font = typography["heading"]
                paras = [StyledParagraph([StyledRun(el.text, True, False, palette.theme, font)])]
                blocks.append(StyledBlock(el, paras, bg, font))
            elif el.kind == "text_block":
                font = typography["body"]
                drafts = _text_paragraphs(el.meta.get("markup", el.text.split("\n")), palette.text_primary)
                kw = plan.sections.get(sid)
                if kw:
                    _highlight(drafts, kw, palette)
                blocks.append(StyledBlock(el, _freeze(drafts, font), bg, font))

    styled = StyledPoster(poster, palette, typography, fills, blocks, warnings)
    for w in warnings:
        log.warning("styling: %s", w)
    return styled


def contrast_violations(styled: StyledPoster) -> list:
    out = []
    for b in styled.blocks:
        for p in b.paragraphs:
            for r in p.runs:
                ratio = contrast_ratio(r.color, b.background)
                if ratio < MIN_CONTRAST:
                    out.append(f"'{r.text[:20]}' {r.color.hex} on {b.background.hex}: {ratio:.2f}")
    return out
