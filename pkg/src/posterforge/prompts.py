"""Prompt templates for every agent role.

Each builder returns a list of gateway Messages. Numeric rules embedded here are
the same ones the deterministic validators enforce afterwards.
"""

import json

from .gateway import Message

SYSTEM = "You are a careful assistant that designs academic conference posters. Reply with JSON only."


def _dump(value) -> str:
    return json.dumps(value, indent=2, ensure_ascii=False, sort_keys=True)


def title_authors(markdown: str) -> list:
    return [Message("system", SYSTEM), Message("user", f"""\
Read the document below and report its title and author list.

Rules:
- title: title case, keeping acronyms and other all-caps terms as written.
- authors: initials followed by surname, middle initials kept, joined by ", ".
  For example "Ada Byron King" becomes "A.B. King". No affiliations or emails.

Answer with {{"title": "...", "authors": "..."}}.

Paper:
{markdown}""")]


def narrative(markdown: str) -> list:
    return [Message("system", SYSTEM), Message("user", f"""\
Summarise the document as an And/But/Therefore story for a poster audience.

Keys (all required, none empty):
- "and": the established context, one or two sentences
- "but": the gap or problem, one or two sentences
- "therefore": the contribution and main findings, one or two sentences
- "poster_hook": a single attention-grabbing sentence
- "key_impact": why the work matters in practice

Paper:
{markdown}""")]


def visuals(assets) -> list:
    listing = "\n".join(f"- {a.id} ({a.kind}, {a.width_px}x{a.height_px}px): {a.caption}" for a in assets)
    return [Message("system", SYSTEM), Message("user", f"""\
Sort every visual below into exactly one poster role.

Roles:
- key_visual: the single most important method figure (string or null)
- problem_illustration: motivation and problem figures (left column)
- method_workflow: architecture and pipeline diagrams (middle column)
- main_results: headline results (right column)
- comparative_results: baselines and ablations (right column)
- supporting: anything else

Every id must appear in exactly one role. Answer with an object holding those six keys;
all but key_visual are lists of ids.

Visuals:
{listing}""")]


def sections(markdown: str, max_words: int) -> list:
    return [Message("system", SYSTEM), Message("user", f"""\
Split the document into its major sections for poster use.

For each section give section_name, section_type (foundation, method or evaluation),
content (at most {max_words} words, citations removed), key_points, importance
(high, medium or low), contains_figures and contains_tables (asset ids).
Answer with {{"paper_sections": [...], "paper_structure": {{...counts...}}}}.

Paper:
{markdown}""")]


def curator(structured, narrative_obj, classification, heights, available_height,
            constraints) -> list:
    heights_txt = "\n".join(
        f"- {h.visual_id}: {h.rendered_height:.2f} in ({h.height_pct:.0%} of a column)" for h in heights
    )
    return [Message("system", SYSTEM), Message("user", f"""\
Plan a three-column poster storyboard.

Hard rules:
- {constraints.min_sections} to {constraints.max_sections} sections; every column gets at least one.
- Section titles have at most 4 words. No conclusion, takeaway, future-work or impact sections.
- The key visual goes in the middle column, in its first (vertical_priority "top") section.
- Left column: 1 or 2 visuals. Middle column: at most 2. Right column: at most 2.
- {constraints.min_visuals} to {constraints.max_visuals} visuals in total, each used exactly once.
- Drop visuals taller than 50% of a column; if several are selected keep only the shortest.
- text_content lines use "* " for main bullets, "   - " for sub-points, **bold** and *italic*.
  Write complete bullets, never "...".

Available height per column: {available_height:.2f} in
Visual heights at column width:
{heights_txt}

Narrative: {_dump(narrative_obj)}
Visual roles: {_dump(classification)}
Sections: {_dump(structured)}

Answer with {{"spatial_content_plan": {{"poster_strategy": {{...}}, "sections": [...]}},
"column_distribution": {{...}}}}; each section has section_id, section_title,
column_assignment, vertical_priority, importance_level (1-3), content_type,
text_content and visual_assets ([{{"visual_id", "visual_purpose", "placement_rationale"}}]).""")]


def balancer(board_json, utilization, strategies, available_height, structured) -> list:
    status = "\n".join(
        f"- {name} column: {u.fraction:.1%} ({u.status}) -> strategy {strategies[name]}"
        for name, u in utilization.items()
    )
    return [Message("system", SYSTEM), Message("user", f"""\
Rebalance the storyboard so every column fills 85-95% of its {available_height:.2f} in height.

Column status:
{status}

Strategy A (column between 80% and 100%): edit text only. Keep each bullet under 25 words,
at most 2 sub-bullets per bullet, add at most 15 words per section, cut 30-50% when over.
Strategy B (column below 80% or above 100%): add a section drawn from the document sections,
or remove sections of importance 3 first, then 2. Never remove importance-1 sections.

Never move a section to another column and never change a section's id, title or visuals.
Return the complete storyboard JSON in the same structure.

Paper sections: {_dump(structured)}
Current storyboard: {board_json}""")]


def keywords(narrative_obj, board_json) -> list:
    return [Message("system", SYSTEM), Message("user", f"""\
Choose phrases to highlight in each storyboard section.

Per section id give:
- bold_contrast: names of this paper's own methods (at most 2)
- bold: key numbers and technical terms (at most 3)
- italic: defined terms or single-word emphasis (at most 2)
Phrases must appear verbatim in the section text.

Answer with {{"section_keywords": {{"<section_id>": {{"bold_contrast": [], "bold": [], "italic": []}}}},
"formatting_summary": {{...}}}}.

Narrative: {_dump(narrative_obj)}
Storyboard: {board_json}""")]


def theme_color(image: bytes) -> list:
    return [Message("system", SYSTEM), Message("user", """\
Pick the main brand colour of this logo for use as a poster theme colour. Ignore white,
black and near-grey background pixels. Answer with {"extracted_color": "#RRGGBB",
"color_name": "...", "suitability_score": 0-10, "reasoning": "..."}.""", image=image)]


def judge(focus_area: str, metric: str, descriptor: str, anchors, image: bytes) -> list:
    lines = []
    for level, label, kind, anchor_descriptor, examples in anchors:
        lines.append(f"Score {level} ({label}): {anchor_descriptor}")
        lines.append(f"  {kind} examples: {examples}")
    scale = "\n".join(lines)
    return [Message("system", "You are a strict, evidence-driven critic of academic poster design."),
            Message("user", f"""\
Examine the poster image and score one metric on a 1-5 scale. High scores need the positive
qualities listed; assign low scores whenever the listed failures appear.

FOCUS AREA: {focus_area}
METRIC: {metric} - {descriptor}
{scale}

Reply with a JSON array holding exactly one object:
[{{"metric": "{metric}", "explanation": "...", "score": <integer 1-5>}}]""", image=image)]
