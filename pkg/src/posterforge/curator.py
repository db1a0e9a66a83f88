"""Storyboard planning: map narrative and sections onto three columns."""

import json
import re
from dataclasses import dataclass, field
from typing import Optional

from . import prompts
from .errors import CurationError

COLUMNS = ("left", "middle", "right")
PRIORITY_ORDER = {"top": 0, "middle": 1, "bottom": 2}
OVERSIZE_PCT = 0.50
MAX_TITLE_WORDS = 4
COLUMN_VISUAL_LIMITS = {"left": (1, 2), "middle": (0, 2), "right": (0, 2)}
_FORBIDDEN_TITLE = re.compile(r"\b(conclusion|takeaway|future|impact)s?\b", re.I)
_DEFAULT_FOCUS = {
    "left": "Foundation and context",
    "middle": "Core methodology",
    "right": "Results and validation",
}


@dataclass(frozen=True)
class ContentConstraints:
    min_sections: int = 5
    max_sections: int = 8
    min_visuals: int = 4
    max_visuals: int = 6
    max_words: int = 1000


@dataclass(frozen=True)
class VisualHeightInfo:
    visual_id: str
    rendered_height: float
    height_pct: float

    @property
    def oversized(self) -> bool:
        return self.height_pct > OVERSIZE_PCT


@dataclass
class VisualPlacement:
    visual_id: str
    purpose: str = ""
    rationale: str = ""


@dataclass
class StoryboardSection:
    section_id: str
    section_title: str
    column: str
    vertical_priority: str = "middle"
    importance_level: int = 2
    content_type: str = "method"
    text_content: list = field(default_factory=list)
    visual_assets: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def visual_ids(self) -> list:
        return [v.visual_id for v in self.visual_assets]

    def to_json(self) -> dict:
        d = {
            "section_id": self.section_id,
            "section_title": self.section_title,
            "column_assignment": self.column,
            "vertical_priority": self.vertical_priority,
            "importance_level": self.importance_level,
            "content_type": self.content_type,
            "text_content": list(self.text_content),
            "visual_assets": [
                {"visual_id": v.visual_id, "visual_purpose": v.purpose, "placement_rationale": v.rationale}
                for v in self.visual_assets
            ],
        }
        d.update(self.extra)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "StoryboardSection":
        known = {"section_id", "section_title", "column_assignment", "vertical_priority",
                 "importance_level", "content_type", "text_content", "visual_assets"}
        return cls(
            d["section_id"], d["section_title"], d["column_assignment"],
            d.get("vertical_priority", "middle"), int(d.get("importance_level", 2)),
            d.get("content_type", "method"), list(d.get("text_content", [])),
            [VisualPlacement(v["visual_id"], v.get("visual_purpose", ""), v.get("placement_rationale", ""))
             for v in d.get("visual_assets", [])],
            {k: v for k, v in d.items() if k not in known},
        )


@dataclass
class Storyboard:
    sections: list
    key_visual: Optional[str] = None
    narrative_flow: str = ""
    space_utilization_approach: str = ""
    column_balance_rationale: str = ""
    column_focus: dict = field(default_factory=lambda: dict(_DEFAULT_FOCUS))

    def column_sections(self, column: str) -> list:
        return [s for s in self.sections if s.column == column]

    def section(self, section_id: str) -> StoryboardSection:
        for s in self.sections:
            if s.section_id == section_id:
                return s
        raise KeyError(section_id)

    def column_distribution(self) -> dict:
        return {
            f"{col}_column": {
                "focus": self.column_focus.get(col, _DEFAULT_FOCUS[col]),
                "assigned_sections": [s.section_id for s in self.column_sections(col)],
            }
            for col in COLUMNS
        }

    def to_json(self) -> dict:
        return {
            "spatial_content_plan": {
                "poster_strategy": {
                    "narrative_flow": self.narrative_flow,
                    "space_utilization_approach": self.space_utilization_approach,
                    "column_balance_rationale": self.column_balance_rationale,
                },
                "sections": [s.to_json() for s in self.sections],
            },
            "column_distribution": self.column_distribution(),
            "key_visual": self.key_visual,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)

    @classmethod
    def from_json(cls, d: dict, key_visual: Optional[str] = None) -> "Storyboard":
        plan = d["spatial_content_plan"]
        strategy = plan.get("poster_strategy", {})
        focus = dict(_DEFAULT_FOCUS)
        for col in COLUMNS:
            entry = d.get("column_distribution", {}).get(f"{col}_column", {})
            if entry.get("focus"):
                focus[col] = entry["focus"]
        return cls(
            [StoryboardSection.from_json(s) for s in plan["sections"]],
            key_visual if key_visual is not None else d.get("key_visual"),
            strategy.get("narrative_flow", ""),
            strategy.get("space_utilization_approach", ""),
            strategy.get("column_balance_rationale", ""),
            focus,
        )

    def copy(self) -> "Storyboard":
        return Storyboard.from_json(json.loads(json.dumps(self.to_json())), self.key_visual)


def ordered_column(sections) -> list:
    """stable sort by vertical priority (top, middle, bottom)"""
    return sorted(sections, key=lambda s: PRIORITY_ORDER.get(s.vertical_priority, 1))


def compute_visual_heights(assets, content_width: float, available_height: float) -> list:
    if content_width <= 0 or available_height <= 0:
        raise ValueError("content width and available height must be positive")
    out = []
    for a in assets:
        rendered = content_width * a.height_px / a.width_px
        out.append(VisualHeightInfo(a.id, rendered, rendered / available_height))
    return out


def exclude_oversized(selected) -> list:
    """drop oversized visuals (>50% of a column) unless exactly one is selected,
    in which case it stays; with several, only the smallest survives"""
    oversized = [h for h in selected if h.oversized]
    if len(oversized) < 2:
        return list(selected)
    keep = min(oversized, key=lambda h: h.height_pct)
    return [h for h in selected if not h.oversized or h is keep]


def validate_storyboard(sb: Storyboard, classification, heights,
                        constraints: ContentConstraints = ContentConstraints()) -> list:
    """every hard-constraint breach, as human-readable strings; empty means valid"""
    heights = {h.visual_id: h for h in heights} if not isinstance(heights, dict) else heights
    key_visual = classification.key_visual if classification is not None else sb.key_visual
    out = []

    n = len(sb.sections)
    if n < constraints.min_sections:
        out.append(f"section count {n} < {constraints.min_sections}")
    if n > constraints.max_sections:
        out.append(f"section count {n} > {constraints.max_sections}")

    seen_ids = set()
    for s in sb.sections:
        if s.section_id in seen_ids:
            out.append(f"duplicate section id {s.section_id}")
        seen_ids.add(s.section_id)
        words = len(s.section_title.split())
        if words > MAX_TITLE_WORDS:
            out.append(f"section {s.section_id} title has {words} words > {MAX_TITLE_WORDS}")
        m = _FORBIDDEN_TITLE.search(s.section_title)
        if m:
            out.append(f"section {s.section_id} title contains forbidden word '{m.group(1).lower()}'")
        if any("..." in line or "…" in line for line in s.text_content):
            out.append(f"section {s.section_id} contains an ellipsis")

    placements = {}
    for s in sb.sections:
        for vid in s.visual_ids:
            placements.setdefault(vid, []).append(s)
    for vid, where in placements.items():
        if len(where) > 1:
            out.append(f"{vid} placed {len(where)} times")
        if vid not in heights:
            out.append(f"unknown visual {vid}")

    for col in COLUMNS:
        col_sections = sb.column_sections(col)
        if not col_sections:
            out.append(f"{col} column has no sections")
        count = sum(len(s.visual_assets) for s in col_sections)
        lo, hi = COLUMN_VISUAL_LIMITS[col]
        if count < lo:
            out.append(f"{col} column has {count} visuals < {lo}")
        if count > hi:
            out.append(f"{col} column has {count} visuals > {hi}")

    total = sum(len(s.visual_assets) for s in sb.sections)
    if total < constraints.min_visuals:
        out.append(f"total visuals {total} below minimum {constraints.min_visuals}")
    if total > constraints.max_visuals:
        out.append(f"total visuals {total} above maximum {constraints.max_visuals}")

    if key_visual is None:
        out.append("no key visual")
    elif key_visual not in placements:
        out.append(f"key visual {key_visual} not placed")
    else:
        home = placements[key_visual][0]
        if home.column != "middle":
            out.append("key visual must be middle column")
        else:
            first = ordered_column(sb.column_sections("middle"))[0]
            if first is not home:
                out.append(f"key visual section {home.section_id} must be first in middle column")

    selected = [heights[v] for v in placements if v in heights]
    retained = {h.visual_id for h in exclude_oversized(selected)}
    for h in selected:
        if h.visual_id not in retained:
            out.append(f"oversized visual {h.visual_id} ({h.height_pct:.0%} of column) must be excluded")
    return out


def build_storyboard(sections, narrative, classification, heights, gw,
                     constraints: ContentConstraints = ContentConstraints(),
                     available_height: float = 0.0) -> Storyboard:
    if classification.key_visual is None:
        raise CurationError("classification has no key visual; cannot anchor the middle column")
    messages = prompts.curator(
        [s.to_dict() for s in sections], narrative.to_dict(), classification.to_dict(),
        heights, available_height, constraints,
    )
    req = gw.request("curator", messages, "json:storyboard")

    def check(value):
        return validate_storyboard(Storyboard.from_json(value, classification.key_visual),
                                   classification, heights, constraints)

    value = gw.complete_json(req, "storyboard", check=check, error_cls=CurationError)
    return Storyboard.from_json(value, classification.key_visual)
