"""The nine acceptance criteria, each printing one PASS/FAIL line.

Run alone with:  pytest tests/test_acceptance.py -v
"""

import io
import math
import random
import time
import zipfile
from decimal import Decimal, getcontext
from xml.etree import ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BUNDLES, STORE, balanced_poster, load_board, styled_poster
from posterforge.cli import main as cli_main
from posterforge.curator import (ContentConstraints, Storyboard, StoryboardSection, VisualHeightInfo,
                                 VisualPlacement, exclude_oversized, validate_storyboard)
from posterforge.errors import ValidationError
from posterforge.ingest import VisualClassification
from posterforge.judge import DimensionScore, aggregate, check_score, domain_average, load_rubric
from posterforge.layout.engine import IN_BAND, poster_violations, white_space_fraction
from posterforge.layout.textfit import (TextMeasureRequest, max_iterations, measure_text_height,
                                        newline_offset, search_min_height, simulate_textbox)
from posterforge.render.pptx import package_problems, read_pptx, render_pptx
from posterforge.render.units import to_emu
from posterforge.styling.color import Color, contrast_ratio, derive_palette
from posterforge.typography import FontSpec


def _verdict(capsys, n, label, check):
    try:
        detail = check()
    except BaseException as e:
        with capsys.disabled():
            print(f"\n[FAIL] criterion {n}: {label} -- {type(e).__name__}: {e}")
        raise
    with capsys.disabled():
        print(f"\n[PASS] criterion {n}: {label}" + (f" ({detail})" if detail else ""))


# -- 1. text height search vs linear scan ---------------------------------

EPS = 0.001
BOUNDS = (0.0, 59.0)  # twice the default available column height
WORDS = "a an to of data model signal throughput reconfigurable x ∑ 12.5% Z-score é".split()


def _random_case(rng):
    n = rng.randint(0, 40)
    parts = []
    for _ in range(n):
        parts.append(rng.choice(WORDS))
        parts.append("\n" if rng.random() < 0.08 else " ")
    text = "".join(parts).strip(" ")
    size = rng.choice([18, 24, 32, 36])
    font = FontSpec("body", size, rng.choice(["regular", "bold"]), rng.random() < 0.3,
                    rng.choice([1.0, 1.2, 1.5]))
    return text, rng.uniform(1.0, 15.0), font


def _scan(text, width, font):
    """smallest multiple of eps that does not overflow, found by stepping

    steps of 100 eps find the bracket, then single eps steps walk it; overflow is
    monotone in height so this is the same answer as a plain eps walk from zero.
    """
    k = 0
    while simulate_textbox(text, width, (k + 100) * EPS, font).overflowing:
        k += 100
    while simulate_textbox(text, width, k * EPS, font).overflowing:
        k += 1
    return k * EPS


def test_criterion_1_height_search(capsys):
    def check():
        rng = random.Random(1)
        bound = max_iterations(*BOUNDS, EPS)
        assert bound == math.ceil(math.log2((BOUNDS[1] - BOUNDS[0]) / EPS))
        start = time.perf_counter()
        worst = 0.0
        for _ in range(500):
            text, width, font = _random_case(rng)
            req = TextMeasureRequest(text, width, font, EPS)
            h = measure_text_height(req, BOUNDS) - newline_offset(text, font)
            diff = abs(h - _scan(text, width, font))
            worst = max(worst, diff)
            assert diff <= 2 * EPS, (text, width, font, diff)
            found = search_min_height(text, width, font, EPS, BOUNDS)
            assert found.bounds == BOUNDS
            assert found.iterations <= bound
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0
        return f"500 cases, max |diff| {worst:.4f} in, iterations <= {bound}, {elapsed:.1f}s"

    _verdict(capsys, 1, "bisection height matches linear scan within 2 eps", check)


# -- 2 & 3. layout soundness and white space over the corpus --------------

@pytest.fixture(scope="module")
def corpus_posters(corpus_paths):
    from conftest import fixture_gateway

    start = time.perf_counter()
    out = []
    for p in corpus_paths:
        entry = load_board(p)
        board, poster, trace = balanced_poster(entry, fixture_gateway())
        out.append((p.name, poster))
    return out, time.perf_counter() - start


def test_criterion_2_layout_soundness(capsys, corpus_posters):
    def check():
        posters, elapsed = corpus_posters
        assert len(posters) == 20
        in_target = 0
        for name, poster in posters:
            assert poster_violations(poster) == [], name
            for col, u in poster.utilization.columns.items():
                assert 0.80 <= u.fraction <= 1.00, (name, col, u.fraction)
                assert u.status == IN_BAND
            in_target += all(0.85 <= f <= 0.95 for f in poster.utilization.fractions())
        assert in_target >= 15
        assert elapsed < 30.0
        return f"{in_target}/20 in the 0.85-0.95 band, {elapsed:.1f}s"

    _verdict(capsys, 2, "20 corpus posters: no overlap, inside canvas, no overflow", check)


def test_criterion_3_white_space(capsys, corpus_posters):
    def check():
        posters, _ = corpus_posters
        fractions = [white_space_fraction(p) for _, p in posters]
        assert all(f >= 0.25 for f in fractions), min(fractions)
        return f"min white space {min(fractions):.3f}"

    _verdict(capsys, 3, "white space fraction >= 0.25 on every accepted poster", check)


# -- 4. palette contrast ---------------------------------------------------

getcontext().prec = 50


def _lin_exact(c):
    s = Decimal(c) / Decimal(255)
    if s <= Decimal("0.04045"):
        return s / Decimal("12.92")
    return ((s + Decimal("0.055")) / Decimal("1.055")) ** Decimal("2.4")


def _contrast_exact(a: Color, b: Color) -> Decimal:
    def lum(c):
        return (Decimal("0.2126") * _lin_exact(c.r) + Decimal("0.7152") * _lin_exact(c.g)
                + Decimal("0.0722") * _lin_exact(c.b))
    la, lb = lum(a), lum(b)
    hi, lo = max(la, lb), min(la, lb)
    return (hi + Decimal("0.05")) / (lo + Decimal("0.05"))


def _hue_gap(a, b):
    d = abs(a - b) % 360
    return min(d, 360 - d)


def test_criterion_4_palette(capsys):
    def check():
        assert contrast_ratio(Color(0, 0, 0), Color(255, 255, 255)) == 21.0
        rng = random.Random(4)
        pairs = [("text_primary", "background"), ("text_primary", "mono_light"),
                 ("accent", "background"), ("accent", "mono_light"),
                 ("theme", "background"), ("theme", "mono_light")]
        worst = Decimal(100)
        for _ in range(1000):
            theme = Color(rng.randrange(256), rng.randrange(256), rng.randrange(256))
            p = derive_palette(theme)
            roles = p.roles()
            for fg, bg in pairs:
                exact = _contrast_exact(roles[fg], roles[bg])
                worst = min(worst, exact)
                assert exact >= Decimal("4.5"), (theme.hex, fg, bg, exact)
                assert contrast_ratio(roles[fg], roles[bg]) >= 4.5
            h = p.theme.hue
            assert _hue_gap(p.mono_light.hue, h) <= 0.5
            assert _hue_gap(p.mono_dark.hue, h) <= 0.5
            assert _hue_gap(p.accent.hue, (h + 180) % 360) <= 0.5
        return f"1000 themes, lowest required-pair contrast {float(worst):.3f}"

    _verdict(capsys, 4, "palette contrast >= 4.5, black/white = 21, hue kept within 0.5 deg", check)


# -- 5. curator constraint detection ---------------------------------------

def _h(vid, pct):
    return VisualHeightInfo(vid, pct * 29.5, pct)


HEIGHTS = [_h("figure_1", 0.24), _h("figure_2", 0.28), _h("figure_3", 0.21), _h("figure_4", 0.25),
           _h("table_1", 0.18), _h("figure_5", 0.79), _h("figure_6", 0.62), _h("figure_7", 0.20)]
CLASSIFICATION = VisualClassification("figure_2", ["figure_1"], ["figure_3"], ["figure_4"], ["table_1"],
                                      ["figure_5", "figure_6", "figure_7"])


def _sec(sid, col, prio="middle", level=2, visuals=(), title=None, text=("* A short point.",)):
    return StoryboardSection(sid, title or sid.title(), col, prio, level, "method", list(text),
                             [VisualPlacement(v) for v in visuals])


def _base():
    return Storyboard([
        _sec("motivation", "left", "top", 2, ["figure_1"]),
        _sec("background", "left", "bottom", 3),
        _sec("method", "middle", "top", 1, ["figure_2"]),
        _sec("design", "middle", "bottom", 2, ["figure_3"]),
        _sec("results", "right", "top", 1, ["figure_4"]),
        _sec("comparison", "right", "bottom", 2, ["table_1"]),
    ], "figure_2")


def _edit(fn):
    sb = _base()
    fn(sb)
    return sb


def _drop(sb, *ids):
    sb.sections = [s for s in sb.sections if s.section_id not in ids]


def _add_visual(sb, sid, vid):
    sb.section(sid).visual_assets.append(VisualPlacement(vid))


def _clear_visuals(sb, sid):
    sb.section(sid).visual_assets = []


ADVERSARIAL = [
    ("too few sections", lambda sb: _drop(sb, "background", "comparison"),
     {"section count 4 < 5"}, None),
    ("too many sections",
     lambda sb: sb.sections.extend(_sec(f"extra{i}", "left") for i in range(3)),
     {"section count 9 > 8"}, None),
    ("duplicate id", lambda sb: setattr(sb.section("background"), "section_id", "motivation"),
     {"duplicate section id motivation"}, None),
    ("long title", lambda sb: setattr(sb.section("design"), "section_title", "A Very Long Design Title"),
     {"section design title has 5 words > 4"}, None),
    ("forbidden title", lambda sb: setattr(sb.section("background"), "section_title", "Key Takeaways"),
     {"section background title contains forbidden word 'takeaway'"}, None),
    ("ellipsis", lambda sb: sb.section("results").text_content.append("* and so on..."),
     {"section results contains an ellipsis"}, None),
    ("visual twice", lambda sb: _add_visual(sb, "background", "figure_1"),
     {"figure_1 placed 2 times"}, None),
    ("unknown visual", lambda sb: _add_visual(sb, "background", "figure_9"),
     {"unknown visual figure_9"}, None),
    ("empty column", lambda sb: _drop(sb, "results", "comparison"),
     {"right column has no sections", "section count 4 < 5", "total visuals 3 below minimum 4"}, None),
    ("left without visual", lambda sb: _clear_visuals(sb, "motivation"),
     {"left column has 0 visuals < 1"}, None),
    ("left overfull", lambda sb: (_clear_visuals(sb, "design"), _add_visual(sb, "background", "figure_3"),
                                  _add_visual(sb, "motivation", "figure_7")),
     {"left column has 3 visuals > 2"}, None),
    ("middle overfull", lambda sb: _add_visual(sb, "design", "figure_7"),
     {"middle column has 3 visuals > 2"}, None),
    ("right overfull", lambda sb: _add_visual(sb, "comparison", "figure_7"),
     {"right column has 3 visuals > 2"}, None),
    ("too few visuals", lambda sb: (_clear_visuals(sb, "comparison"), _clear_visuals(sb, "design")),
     {"total visuals 3 below minimum 4"}, None),
    ("too many visuals", lambda sb: _add_visual(sb, "background", "figure_7"),
     {"total visuals 6 above maximum 5"}, ContentConstraints(max_visuals=5)),
    ("key visual not placed", lambda sb: _clear_visuals(sb, "method"),
     {"key visual figure_2 not placed"}, None),
    ("key visual off-centre", lambda sb: (_clear_visuals(sb, "method"), _clear_visuals(sb, "results"),
                                          _add_visual(sb, "method", "figure_4"),
                                          _add_visual(sb, "results", "figure_2")),
     {"key visual must be middle column"}, None),
    ("key visual not first", lambda sb: (setattr(sb.section("method"), "vertical_priority", "bottom"),
                                         setattr(sb.section("design"), "vertical_priority", "top")),
     {"key visual section method must be first in middle column"}, None),
    ("two oversized", lambda sb: (_add_visual(sb, "background", "figure_5"), _clear_visuals(sb, "design"),
                                  _add_visual(sb, "design", "figure_6")),
     {"oversized visual figure_5 (79% of column) must be excluded"}, None),
]

VALID = [
    ("base", lambda sb: None),
    ("five sections", lambda sb: _drop(sb, "background")),
    ("eight sections", lambda sb: sb.sections.extend(
        [_sec("x1", "left", "bottom"), _sec("x2", "right", "bottom")])),
    ("one oversized kept", lambda sb: _add_visual(sb, "background", "figure_5")),
    ("six visuals", lambda sb: _add_visual(sb, "background", "figure_7")),
]


def test_criterion_5_curator_constraints(capsys):
    def check():
        for name, mutate, expected, constraints in ADVERSARIAL:
            sb = _edit(mutate)
            got = set(validate_storyboard(sb, CLASSIFICATION, HEIGHTS, constraints or ContentConstraints()))
            assert got == expected, (name, got)
        no_key = VisualClassification(None, ["figure_1"], ["figure_3"], ["figure_4"], ["table_1"], [])
        got = set(validate_storyboard(_base(), no_key, HEIGHTS))
        assert got == {"no key visual"}, got
        for name, mutate in VALID:
            assert validate_storyboard(_edit(mutate), CLASSIFICATION, HEIGHTS) == [], name
        return f"{len(ADVERSARIAL) + 1} adversarial boards exact, {len(VALID)} valid boards clean"

    _verdict(capsys, 5, "validate_storyboard flags exactly the injected violations", check)


# -- 6. oversized exclusion --------------------------------------------------

@settings(max_examples=400, deadline=None)
@given(st.lists(st.floats(min_value=0.01, max_value=1.5, allow_nan=False), min_size=0, max_size=8))
def _oversized_property(pcts):
    selected = [_h(f"v{i}", p) for i, p in enumerate(pcts)]
    kept = exclude_oversized(selected)
    over = [h for h in selected if h.height_pct > 0.50]
    kept_over = [h for h in kept if h.height_pct > 0.50]
    assert len(kept_over) <= 1
    assert [h for h in kept if h.height_pct <= 0.50] == [h for h in selected if h.height_pct <= 0.50]
    if len(over) >= 2:
        assert kept_over[0].height_pct == min(h.height_pct for h in over)
    if len(over) == 1:
        assert kept_over == over


def test_criterion_6_oversized_exclusion(capsys):
    def check():
        _oversized_property()
        return "400 random height multisets"

    _verdict(capsys, 6, "at most one oversized visual kept, and it is the smallest", check)


# -- 7. renderer round trip ------------------------------------------------

def test_criterion_7_renderer_round_trip(capsys, corpus_paths):
    from pptx import Presentation

    from conftest import fixture_gateway
    from posterforge.render.shapes import build_shapes

    def check():
        for path in corpus_paths[:10]:
            styled, assets = styled_poster(load_board(path), fixture_gateway())
            data = render_pptx(styled, assets)
            assert render_pptx(styled, assets) == data
            assert package_problems(data) == []
            with zipfile.ZipFile(io.BytesIO(data)) as zf:
                assert zf.testzip() is None
            shapes = build_shapes(styled, assets)
            ours = read_pptx(data)["shapes"]
            theirs = list(Presentation(io.BytesIO(data)).slides[0].shapes)
            assert len(ours) == len(theirs) == len(shapes)
            for src, mine, other in zip(shapes, ours, theirs):
                want = tuple(to_emu(v) for v in src.rect)
                got = (other.left, other.top, other.width, other.height)
                assert all(abs(a - b) <= 1 for a, b in zip(want, mine["rect"])), src.name
                assert all(abs(a - b) <= 1 for a, b in zip(want, got)), src.name
                if src.kind != "textbox":
                    continue
                runs = [r for p in other.text_frame.paragraphs for r in p.runs]
                flat = [r for p in src.paragraphs for r in p.runs]
                assert len(runs) == len(flat)
                for want_run, run in zip(flat, runs):
                    assert run.text == want_run.text
                    assert bool(run.font.bold) == want_run.bold
                    assert bool(run.font.italic) == want_run.italic
                    assert str(run.font.color.rgb) == want_run.color.hex[1:]
                    assert run.font.size.pt == want_run.font.size_pt
        return "10 posters, rects within 1 EMU, runs exact, byte-identical re-render"

    _verdict(capsys, 7, "PPTX parses back to the source shapes and runs", check)


# -- 8. judge aggregation --------------------------------------------------

def test_criterion_8_judge_aggregation(capsys):
    def check():
        content = [4.80, 4.10, 4.80, 3.70, 4.60, 4.00]
        design = [4.00, 3.90, 3.10, 4.00, 4.10, 3.90, 4.80, 3.40, 4.10, 3.90]
        assert str(domain_average(content)) == "4.33"
        assert str(domain_average(design)) == "3.92"
        for bad in (0, 6, 2.5, True, "4"):
            with pytest.raises(ValidationError):
                check_score(bad)
            with pytest.raises(ValidationError):
                DimensionScore("Font", "", bad)
        rubric = load_rubric()
        scores = [DimensionScore(m, "", 3) for m in rubric.metrics()]
        report = aggregate([("p1", "judge", scores)], rubric)
        assert set(report.rows[0].means.values()) == {Decimal("3.00")}
        return "content 4.33, design 3.92, scores outside 1-5 rejected"

    _verdict(capsys, 8, "judge arithmetic reproduces the reference averages", check)


# -- 9. end to end ---------------------------------------------------------

def test_criterion_9_end_to_end(capsys, tmp_path):
    def check():
        start = time.perf_counter()
        outputs = {}
        for run in ("first", "second"):
            for bundle in sorted(p.name for p in BUNDLES.iterdir()):
                d = tmp_path / run / bundle
                code = cli_main(["generate", str(BUNDLES / bundle), "--fixtures", str(STORE),
                                 "--out", str(d / "poster.pptx"), "--svg", str(d / "poster.svg"),
                                 "--manifest", str(d / "manifest.json")])
                assert code == 0, bundle
                pptx = (d / "poster.pptx").read_bytes()
                svg = (d / "poster.svg").read_bytes()
                assert package_problems(pptx) == []
                root = ET.fromstring(svg)
                assert root.get("viewBox") == "0 0 3456 2592"
                outputs.setdefault(bundle, []).append((pptx, svg))
        assert len(outputs) >= 3
        for bundle, (a, b) in outputs.items():
            assert a == b, f"{bundle} differs between runs"
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0
        return f"{len(outputs)} bundles x 2 runs byte-identical, {elapsed:.1f}s"

    _verdict(capsys, 9, "offline generate over the fixture corpus is reproducible", check)
