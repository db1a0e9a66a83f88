import io
import json

import pytest
from PIL import Image

from conftest import BUNDLES
from posterforge import ingest
from posterforge.curator import (ContentConstraints, Storyboard, build_storyboard, compute_visual_heights,
                                 exclude_oversized, ordered_column)
from posterforge.errors import CurationError, ExtractionError, FixtureError, InputError
from posterforge.gateway import Gateway, GatewayConfig


def _png(w, h, color=(200, 30, 30)):
    buf = io.BytesIO()
    Image.new("RGB", (w, h), color).save(buf, "PNG")
    return buf.getvalue()


def _bundle(tmp_path, rows=None, paper="# T\n\ntext"):
    (tmp_path / "paper.md").write_text(paper)
    if rows is not None:
        (tmp_path / "assets").mkdir()
        lines = ["id\tkind\tfile\tcaption"]
        for ident, fname, data in rows:
            lines.append(f"{ident}\tfigure\t{fname}\tcap")
            if data is not None:
                (tmp_path / "assets" / fname).write_bytes(data)
        (tmp_path / "assets" / "manifest.tsv").write_text("\n".join(lines) + "\n")
    return tmp_path


# -- validators -------------------------------------------------------------

@pytest.mark.parametrize("name,want", [
    ("Jane Doe", "J. Doe"),
    ("Jean-Luc Picard", "J.-L. Picard") if False else ("Mary Ann Smith", "M.A. Smith"),
    ("Ludwig van Beethoven", "L. van Beethoven"),
    ("J. Doe", "J. Doe"),
    ("Plato", "Plato"),
])
def test_to_initials(name, want):
    assert ingest.to_initials(name) == want


def test_normalize_and_check_authors():
    norm = ingest.normalize_authors("Jane Doe, John Smith and Ada Lovelace")
    assert norm == "J. Doe, J. Smith, A. Lovelace"
    assert ingest.author_violations(norm) == []
    bad = ingest.author_violations("J. Doe (MIT), jd@mit.edu")
    assert bad and "affiliation or email" in bad[0]


def test_sentence_count():
    assert ingest.sentence_count("") == 0
    assert ingest.sentence_count("One. Two! Three") == 3
    assert ingest.sentence_count("Version 2.5 is fast.") == 1


def test_section_and_partition_violations():
    ids = {"figure_1", "table_1"}
    secs = [{"section_name": "Intro", "content": "w " * 12, "contains_figures": ["figure_9"]}]
    assert ingest.section_violations(secs, ids, max_words=10) == [
        "Intro: 12 words exceeds 10", "Intro: references unknown asset figure_9"]
    part = {"key_visual": "figure_1", "main_results": ["figure_1"], "supporting": ["figure_7"]}
    got = ingest.partition_violations(part, ids)
    assert set(got) == {"figure_1 appears twice", "figure_7 is not a bundle asset",
                        "table_1 missing from classification"}


# -- bundle loading ---------------------------------------------------------

def test_load_fixture_bundle(alpha_bundle):
    assert alpha_bundle.name == "alpha"
    assert sorted(alpha_bundle.assets) == ["figure_1", "figure_2", "figure_3", "figure_4", "figure_5", "table_1"]
    assert alpha_bundle.affiliation_logo is not None and alpha_bundle.conference_logo is not None
    assert alpha_bundle.assets["figure_5"].height_px > alpha_bundle.assets["figure_5"].width_px


def test_missing_paper(tmp_path):
    with pytest.raises(InputError, match="paper.md"):
        ingest.load_bundle(tmp_path)


def test_missing_asset_file(tmp_path):
    _bundle(tmp_path, [("figure_1", "f1.png", None)])
    with pytest.raises(InputError, match="figure_1"):
        ingest.load_bundle(tmp_path)


def test_undecodable_asset(tmp_path):
    _bundle(tmp_path, [("figure_1", "f1.png", b"not an image")])
    with pytest.raises(InputError, match="figure_1"):
        ingest.load_bundle(tmp_path)


def test_non_png_reencoded(tmp_path):
    buf = io.BytesIO()
    Image.new("RGB", (30, 20), (1, 2, 3)).save(buf, "JPEG")
    _bundle(tmp_path, [("figure_1", "f1.jpg", buf.getvalue())])
    b = ingest.load_bundle(tmp_path)
    a = b.assets["figure_1"]
    assert a.pixels[:8] == b"\x89PNG\r\n\x1a\n"
    assert (a.width_px, a.height_px) == (30, 20)
    assert b.affiliation_logo is None


def test_duplicate_manifest_id(tmp_path):
    _bundle(tmp_path, [("figure_1", "a.png", _png(4, 4)), ("figure_1", "b.png", _png(4, 4))])
    with pytest.raises(InputError, match="duplicate"):
        ingest.load_bundle(tmp_path)


# -- extraction through the fixture store ----------------------------------

def test_extractions_on_alpha(alpha_bundle, gw):
    ta = ingest.extract_title_authors(alpha_bundle, gw)
    assert ta.title and ingest.author_violations(ta.authors) == []
    n = ingest.extract_narrative(alpha_bundle, gw)
    assert n.and_part and n.but_part and n.therefore_part
    secs = ingest.extract_sections(alpha_bundle, gw)
    assert {s.section_type for s in secs} <= set(ingest.SECTION_TYPES)
    cls = ingest.classify_visuals(alpha_bundle, gw)
    assert ingest.partition_violations(cls, set(alpha_bundle.assets)) == []
    assert cls.key_visual == "figure_2"
    assert "figure_5" in cls.supporting


def test_author_email_triggers_one_retry(gw):
    beta = ingest.load_bundle(BUNDLES / "beta")
    ta = ingest.extract_title_authors(beta, gw)
    assert [c for c in gw.calls if c[0] == "parser_title"] == [("parser_title", 0), ("parser_title", 1)]
    assert "@" not in ta.authors


def test_empty_narrative_part_triggers_retry(gw):
    gamma = ingest.load_bundle(BUNDLES / "gamma")
    ingest.extract_narrative(gamma, gw)
    assert ("parser_narrative", 1) in gw.calls


def test_extraction_error_after_budget(alpha_bundle):
    gw = Gateway(GatewayConfig(retry_budget=1),
                 backend=lambda req, attempt: json.dumps({"title": "T", "authors": "someone@x.org"}))
    with pytest.raises(ExtractionError) as e:
        ingest.extract_title_authors(alpha_bundle, gw)
    assert e.value.violations


def test_unrecorded_prompt_is_a_fixture_error(tmp_path, gw):
    _bundle(tmp_path, paper="# Nothing recorded for this one")
    with pytest.raises(FixtureError) as e:
        ingest.extract_title_authors(ingest.load_bundle(tmp_path), gw)
    assert e.value.digest


def test_classify_needs_assets(tmp_path, gw):
    _bundle(tmp_path)
    with pytest.raises(ExtractionError):
        ingest.classify_visuals(ingest.load_bundle(tmp_path), gw)


# -- curator ----------------------------------------------------------------

def test_visual_heights(alpha_bundle):
    hs = compute_visual_heights([alpha_bundle.assets["figure_5"]], 14.0, 29.5)
    assert hs[0].rendered_height == pytest.approx(14.0 * 1000 / 600)
    assert hs[0].oversized
    with pytest.raises(ValueError):
        compute_visual_heights([], 0, 29.5)


def test_exclude_oversized_examples():
    from posterforge.curator import VisualHeightInfo as V

    a, b, c = V("a", 1, 0.2), V("b", 1, 0.7), V("c", 1, 0.6)
    assert exclude_oversized([a, b]) == [a, b]
    assert exclude_oversized([a, b, c]) == [a, c]
    assert exclude_oversized([]) == []


def test_ordered_column_is_stable():
    from posterforge.curator import StoryboardSection as S

    secs = [S("x", "X", "left", "bottom"), S("y", "Y", "left", "top"), S("z", "Z", "left", "bottom")]
    assert [s.section_id for s in ordered_column(secs)] == ["y", "x", "z"]


def test_build_storyboard_from_fixtures(alpha_bundle, gw):
    from posterforge.curator import validate_storyboard
    from posterforge.layout.engine import LayoutConfig

    cfg = LayoutConfig()
    secs = ingest.extract_sections(alpha_bundle, gw)
    n = ingest.extract_narrative(alpha_bundle, gw)
    cls = ingest.classify_visuals(alpha_bundle, gw)
    hs = compute_visual_heights([alpha_bundle.assets[k] for k in sorted(alpha_bundle.assets)],
                                cfg.column_content_width, cfg.available_height)
    board = build_storyboard(secs, n, cls, hs, gw, ContentConstraints(), cfg.available_height)
    assert validate_storyboard(board, cls, hs) == []
    assert board.key_visual == "figure_2"
    assert ordered_column(board.column_sections("middle"))[0].visual_ids[0] == "figure_2"


def test_build_storyboard_needs_key_visual(gw):
    cls = ingest.VisualClassification(None)
    with pytest.raises(CurationError):
        build_storyboard([], None, cls, [], gw)


def test_curator_violations_exhaust_budget(alpha_bundle, corpus_paths):
    from conftest import load_board

    entry = load_board(corpus_paths[0])
    bad = entry["board"].copy()
    bad.section("design").section_title = "Conclusions"
    gw = Gateway(GatewayConfig(retry_budget=1), backend=lambda req, attempt: bad.dumps())
    n = ingest.AbtNarrative("a", "b", "c", "d", "e")
    with pytest.raises(CurationError) as e:
        build_storyboard(entry["structured"], n, entry["classification"], entry["heights"], gw)
    assert e.value.violations == ["section design title contains forbidden word 'conclusion'"]
    assert len(gw.calls) == 2


def test_storyboard_json_contains_column_distribution(corpus_paths):
    from conftest import load_board

    d = load_board(corpus_paths[0])["board"].to_json()
    assert set(d["column_distribution"]) == {"left_column", "middle_column", "right_column"}
    assert Storyboard.from_json(d).key_visual == d["key_visual"]
