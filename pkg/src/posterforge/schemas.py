"""JSON schemas for every structured agent response, keyed by schema id."""

_STR = {"type": "string"}
_NONEMPTY = {"type": "string", "minLength": 1}
_IDS = {"type": "array", "items": {"type": "string"}}

TITLE_AUTHORS = {
    "type": "object",
    "required": ["title", "authors"],
    "properties": {"title": _NONEMPTY, "authors": _NONEMPTY},
}

NARRATIVE = {
    "type": "object",
    "required": ["and", "but", "therefore", "poster_hook", "key_impact"],
    "properties": {k: _STR for k in ("and", "but", "therefore", "poster_hook", "key_impact")},
}

SECTIONS = {
    "type": "object",
    "required": ["paper_sections"],
    "properties": {
        "paper_sections": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["section_name", "section_type", "content"],
                "properties": {
                    "section_name": _NONEMPTY,
                    "section_type": {"enum": ["foundation", "method", "evaluation"]},
                    "content": _STR,
                    "key_points": {"type": "array", "items": _STR},
                    "importance": {"enum": ["high", "medium", "low"]},
                    "contains_figures": _IDS,
                    "contains_tables": _IDS,
                },
            },
        },
        "paper_structure": {"type": "object"},
    },
}

VISUALS = {
    "type": "object",
    "required": ["key_visual", "problem_illustration", "method_workflow",
                 "main_results", "comparative_results", "supporting"],
    "properties": {
        "key_visual": {"type": ["string", "null"]},
        "problem_illustration": _IDS,
        "method_workflow": _IDS,
        "main_results": _IDS,
        "comparative_results": _IDS,
        "supporting": _IDS,
    },
}

_STORY_SECTION = {
    "type": "object",
    "required": ["section_id", "section_title", "column_assignment", "text_content"],
    "properties": {
        "section_id": _NONEMPTY,
        "section_title": _NONEMPTY,
        "column_assignment": {"enum": ["left", "middle", "right"]},
        "vertical_priority": {"enum": ["top", "middle", "bottom"]},
        "importance_level": {"enum": [1, 2, 3]},
        "content_type": {"enum": ["foundation", "method", "results"]},
        "text_content": {"type": "array", "items": _STR},
        "visual_assets": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["visual_id"],
                "properties": {"visual_id": _NONEMPTY, "visual_purpose": _STR,
                               "placement_rationale": _STR},
            },
        },
    },
}

STORYBOARD = {
    "type": "object",
    "required": ["spatial_content_plan"],
    "properties": {
        "spatial_content_plan": {
            "type": "object",
            "required": ["sections"],
            "properties": {
                "poster_strategy": {"type": "object"},
                "sections": {"type": "array", "items": _STORY_SECTION},
            },
        },
        "column_distribution": {"type": "object"},
    },
}

_KW_CLASS = {"type": "array", "items": _STR}
KEYWORDS = {
    "type": "object",
    "required": ["section_keywords"],
    "properties": {
        "section_keywords": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {"bold_contrast": _KW_CLASS, "bold": _KW_CLASS, "italic": _KW_CLASS},
            },
        },
        "formatting_summary": {"type": "object"},
    },
}

THEME_COLOR = {
    "type": "object",
    "required": ["extracted_color"],
    "properties": {
        "extracted_color": {"type": "string", "pattern": "^#[0-9A-Fa-f]{6}$"},
        "suitability_score": {"type": "number"},
    },
}

JUDGE_SCORE = {
    "type": "array",
    "minItems": 1,
    "maxItems": 1,
    "items": {
        "type": "object",
        "required": ["metric", "explanation", "score"],
        "properties": {
            "metric": _STR,
            "explanation": _STR,
            "score": {"type": "integer", "minimum": 1, "maximum": 5},
        },
    },
}

REGISTRY = {
    "title_authors": TITLE_AUTHORS,
    "narrative": NARRATIVE,
    "sections": SECTIONS,
    "visuals": VISUALS,
    "storyboard": STORYBOARD,
    "keywords": KEYWORDS,
    "theme_color": THEME_COLOR,
    "judge_score": JUDGE_SCORE,
}
