import json
from pathlib import Path

import pytest

from posterforge import ingest
from posterforge.curator import Storyboard, compute_visual_heights
from posterforge.gateway import Gateway, GatewayConfig
from posterforge.layout.engine import LayoutConfig, Layouter
from posterforge.typography import TypographyScheme

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
STORE = FIXTURES / "store"
BUNDLES = FIXTURES / "bundles"
CORPUS = FIXTURES / "layout_corpus"


def fixture_gateway():
    return Gateway(GatewayConfig(fixture_path=str(STORE)))


def load_board(path):
    """one layout-corpus entry with everything the balancer needs"""
    doc = json.loads(Path(path).read_text())
    bundle = ingest.load_bundle(BUNDLES / doc["bundle"])
    cfg = LayoutConfig()
    return {
        "doc": doc,
        "bundle": bundle,
        "board": Storyboard.from_json(doc["storyboard"]),
        "classification": ingest.VisualClassification(**doc["classification"]),
        "structured": [ingest.StructuredSection(**s) for s in doc["structured_sections"]],
        "heights": compute_visual_heights([bundle.assets[k] for k in sorted(bundle.assets)],
                                          cfg.column_content_width, cfg.available_height),
        "layouter": Layouter(cfg, TypographyScheme(), bundle.assets),
    }


@pytest.fixture(scope="session")
def corpus_paths():
    return sorted(CORPUS.glob("board_*.json"))


@pytest.fixture
def gw():
    return fixture_gateway()


@pytest.fixture(scope="session")
def alpha_bundle():
    return ingest.load_bundle(BUNDLES / "alpha")


def balanced_poster(entry, gw):
    """balance a corpus board through the fixture store and assemble it"""
    from posterforge.layout.balancer import balance_columns

    lay = entry["layouter"]
    report = lay.utilization(entry["board"])
    board, report, trace = balance_columns(entry["board"], report, entry["structured"], gw, lay,
                                           entry["classification"], entry["heights"])
    doc = entry["doc"]
    return board, lay.assemble(board, doc["title"], doc["authors"]), trace


def styled_poster(entry, gw):
    """corpus board -> StyledPoster plus the asset map the renderers need"""
    from posterforge.render.logos import place_logos
    from posterforge.styling.color import adjust_theme_color, derive_palette, extract_theme_color
    from posterforge.styling.styles import apply_styles, plan_from_json

    bundle = entry["bundle"]
    board, poster, _ = balanced_poster(entry, gw)
    place_logos(poster, bundle.affiliation_logo, bundle.conference_logo, entry["layouter"].cfg)
    logo = bundle.affiliation_logo.pixels if bundle.affiliation_logo else None
    theme = extract_theme_color(logo, bundle.assets[board.key_visual].pixels).color
    palette = derive_palette(adjust_theme_color(theme))
    method = entry["doc"]["title"].split(":")[0]
    plan = plan_from_json({"section_keywords": {
        s.section_id: {"bold_contrast": [method], "bold": [], "italic": ["robust", "adaptive"]}
        for s in board.sections}})
    styled = apply_styles(poster, palette, plan, entry["layouter"].typography)
    assets = dict(bundle.assets)
    for lg in (bundle.affiliation_logo, bundle.conference_logo):
        if lg is not None:
            assets[lg.id] = lg
    return styled, assets
