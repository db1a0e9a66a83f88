import io
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from PIL import Image

from conftest import fixture_gateway, load_board, styled_poster
from posterforge.errors import StylingError
from posterforge.gateway import Gateway, GatewayConfig
from posterforge.styling.color import (Color, adjust_theme_color, contrast_ratio, derive_palette, dominant_color,
                                       extract_theme_color, palette_violations, relative_luminance)
from posterforge.styling.markup import block_text, parse_line, parse_markup, to_markup
from posterforge.styling.styles import (KEYWORD_LIMITS, SectionKeywords, StyledRun, _highlight, _text_paragraphs,
                                        anchor_section, contrast_violations, extract_keywords,
                                        keyword_violations, plan_from_json)
from posterforge.typography import FontSpec

WHITE = Color(255, 255, 255)


def _png(color, size=(40, 40), extra=None):
    im = Image.new("RGBA", size, color)
    if extra:
        box, c = extra
        im.paste(c, box)
    buf = io.BytesIO()
    im.save(buf, "PNG")
    return buf.getvalue()


# -- color ------------------------------------------------------------------

def test_contrast_examples():
    assert contrast_ratio(Color(0, 0, 0), WHITE) == 21.0
    assert contrast_ratio(Color.from_hex("#777777"), WHITE) == pytest.approx(4.48, abs=0.005)
    assert contrast_ratio(WHITE, WHITE) == 1.0
    assert relative_luminance(WHITE) == pytest.approx(1.0)


@pytest.mark.parametrize("src,want", [("#FFFF00", "#CCCC00"), ("#1E3A8A", "#1E3A8A")])
def test_adjust_theme(src, want):
    assert adjust_theme_color(Color.from_hex(src)).hex == want


def test_adjust_lifts_black():
    assert adjust_theme_color(Color(0, 0, 0)).lightness == pytest.approx(0.10)


def test_hex_and_channels():
    assert Color.from_hex("1e3a8a") == Color(0x1E, 0x3A, 0x8A)
    with pytest.raises(ValueError):
        Color.from_hex("#12345")
    with pytest.raises(ValueError):
        Color(256, 0, 0)


def test_from_hsl_keeps_exact_hue():
    c = Color.from_hsl(217.3, 0.05, 0.93)
    assert c.hue == 217.3
    assert c == Color(c.r, c.g, c.b)


def test_dominant_color_ignores_white_and_transparency():
    logo = _png((255, 255, 255, 255), extra=((0, 0, 20, 40), (200, 20, 20, 255)))
    c = dominant_color(logo)
    assert (c.r, c.g, c.b) == (200, 20, 20)
    assert dominant_color(_png((0, 0, 0, 0))) is None
    assert dominant_color(_png((250, 250, 250, 255))) is None


def test_extract_theme_fallbacks():
    white = _png((255, 255, 255, 255))
    kv = _png((20, 120, 40, 255))
    got = extract_theme_color(white, kv)
    assert got.source == "key_visual" and got.color == Color(20, 120, 40)
    got = extract_theme_color(None, white)
    assert got.source == "default" and got.color.hex == "#1E3A8A" and got.warnings
    assert extract_theme_color(_png((30, 60, 200, 255))).source == "affiliation_logo"


def test_palette_roles_and_hues():
    p = derive_palette(Color.from_hex("#1E3A8A"))
    assert palette_violations(p) == []
    assert p.mono_light.lightness == pytest.approx(0.93)
    assert p.mono_light.saturation == pytest.approx(p.theme.saturation * 0.3)
    assert abs(p.accent.hue - (p.theme.hue + 180) % 360) < 1e-9
    assert set(p.to_dict()["colors"]) == {"theme", "mono_light", "mono_dark", "accent", "text_primary", "background"}


def test_palette_darkens_light_theme():
    p = derive_palette(adjust_theme_color(Color.from_hex("#FFFF00")))
    assert contrast_ratio(p.theme, WHITE) >= 4.5
    assert contrast_ratio(p.accent, p.mono_light) >= 4.5


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_palette_always_passes(r, g, b):
    assert palette_violations(derive_palette(adjust_theme_color(Color(r, g, b)))) == []


# -- markup -----------------------------------------------------------------

def test_bullets_and_runs():
    p = parse_line("* plain **bold** and *ital* end")
    assert p.bullet == "primary" and p.level == 0
    assert [(r.text, r.bold, r.italic) for r in p.runs] == [
        ("plain ", False, False), ("bold", True, False), (" and ", False, False),
        ("ital", False, True), (" end", False, False)]
    assert p.plain == "• plain bold and ital end"
    assert parse_line("   - sub").bullet == "secondary"
    assert parse_line("  * sub").level == 1


def test_unterminated_markers_are_literal():
    assert [r.text for r in parse_markup("a **b and *c")] == ["a **b and *c"]
    assert [r.text for r in parse_markup("2 * 3 * 4")] == ["2 * 3 * 4"]


@given(st.text(alphabet="ab *\n-", max_size=30))
def test_parse_never_fails(line):
    parse_line(line)


def test_round_trip_markup():
    for line in ("* a **b** *c*", "   - x", "plain"):
        assert to_markup(parse_line(line)) == line


def test_block_text_joins_display_lines():
    assert block_text(["* a", "b"]) == "• a\nb"


# -- keyword plans ------------------------------------------------------------

def test_plan_truncates_and_dedups():
    plan = plan_from_json({"section_keywords": {"results": {
        "bold_contrast": ["X", "Y", "Z"], "bold": ["X", "1", "2", "3", "4"], "italic": []}}})
    kw = plan.sections["results"]
    assert kw.bold_contrast == ["X", "Y"]
    assert kw.bold == ["1", "2", "3"]
    assert keyword_violations(plan) == []
    assert len(plan.warnings) == 3
    assert plan.summary() == {"total_bold_contrast": 2, "total_bold": 3, "total_italic": 0}


def test_keyword_violations_detect_manual_plans():
    from posterforge.styling.styles import KeywordPlan

    plan = KeywordPlan({"s": SectionKeywords(["a", "b", "c"], ["a"], [])})
    assert keyword_violations(plan) == ["s: 3 bold_contrast > 2", "s: 'a' in two classes"]
    assert KEYWORD_LIMITS == {"bold_contrast": 2, "bold": 3, "italic": 2}


def test_keyword_extraction_failure_is_styling_error(corpus_paths):
    from posterforge.ingest import AbtNarrative

    board = load_board(corpus_paths[0])["board"]
    gw = Gateway(GatewayConfig(retry_budget=0), backend=lambda req, attempt: "[]")
    with pytest.raises(StylingError):
        extract_keywords(board, AbtNarrative("a", "b", "c", "d", "e"), gw)


# -- highlighting -------------------------------------------------------------

def _palette():
    return derive_palette(Color.from_hex("#1E3A8A"))


def _runs(line, kw):
    p = _palette()
    drafts = _text_paragraphs([line], p.text_primary)
    _highlight(drafts, kw, p)
    return [(r.text, r.bold, r.italic, r.color == p.accent) for r in drafts[0].runs]


def test_highlight_three_way_split():
    got = _runs("We propose DP-CutMixSL for privacy", SectionKeywords(["DP-CutMixSL"]))
    assert got == [("We propose ", False, False, False), ("DP-CutMixSL", True, False, True),
                   (" for privacy", False, False, False)]


def test_highlight_whole_phrase_and_first_only():
    got = _runs("* fast faster fast", SectionKeywords(bold=["fast"]))
    assert got == [("• ", False, False, False), ("fast", True, False, False), (" faster fast", False, False, False)]
    assert _runs("breakfast", SectionKeywords(bold=["fast"])) == [("breakfast", False, False, False)]
    assert _runs("Fast", SectionKeywords(bold=["fast"])) == [("Fast", False, False, False)]


def test_markup_wins_over_keywords():
    got = _runs("**robust** then robust", SectionKeywords(italic=["robust"]))
    assert got == [("robust", True, False, False), (" then ", False, False, False), ("robust", False, True, False)]


def test_empty_run_rejected():
    with pytest.raises(ValueError):
        StyledRun("", False, False, WHITE, FontSpec("body", 10))


# -- apply_styles -------------------------------------------------------------

@pytest.fixture(scope="module")
def styled(corpus_paths):
    return styled_poster(load_board(corpus_paths[0]), fixture_gateway())[0]


def test_fills_and_anchor(styled):
    roles = [f.role for f in styled.fills]
    assert roles == ["header", "rule", "anchor"]
    header, rule, anchor = styled.fills
    assert header.color == styled.palette.theme
    assert rule.color == styled.palette.mono_dark and rule.rect.bottom == pytest.approx(header.rect.bottom)
    assert anchor.color == styled.palette.mono_light
    assert anchor_section(styled.poster) == "method"


def test_text_colors(styled):
    assert contrast_violations(styled) == []
    title = next(b for b in styled.blocks if b.element.kind == "title")
    assert title.paragraphs[0].runs[0].color == styled.palette.background
    heads = [b for b in styled.blocks if b.element.kind == "section_header"]
    assert all(r.bold and r.color == styled.palette.theme for b in heads for p in b.paragraphs for r in p.runs)
    accents = [r for b in styled.blocks for p in b.paragraphs for r in p.runs if r.color == styled.palette.accent]
    assert accents and all(r.bold for r in accents)


def test_no_anchor_warns(corpus_paths):
    from posterforge.styling.styles import apply_styles, KeywordPlan

    entry = load_board(corpus_paths[0])
    board = entry["board"].copy()
    for s in board.sections:
        if s.column == "middle":
            s.importance_level = 2
    poster = entry["layouter"].assemble(board, "T", "A. B", allow_overflow=True)
    out = apply_styles(poster, _palette(), KeywordPlan(), entry["layouter"].typography)
    assert [f.role for f in out.fills] == ["header", "rule"]
    assert out.warnings == ["no importance-1 section in the middle column; no tinted anchor"]


def test_random_text_contrast_is_sound():
    rng = random.Random(7)
    for _ in range(50):
        p = derive_palette(adjust_theme_color(Color(rng.randrange(256), rng.randrange(256), rng.randrange(256))))
        assert contrast_ratio(p.background, p.theme) >= 4.5
