"""Regenerate the offline fixture corpus under fixtures/.

Writes three synthetic paper bundles, a 20-board layout corpus, two judge
images, and one fixture store holding every gateway response the tests and
the CLI replay. Responses come from a scripted responder (no network); the
balancer script measures columns with the real layout engine and edits
bullets until each column sits inside the target band.

    python3 scripts/build_fixtures.py [--out fixtures]
"""

import argparse
import io
import json
import random
import re
import shutil
import sys
from pathlib import Path

from PIL import Image, ImageDraw

from posterforge import ingest
from posterforge.curator import (COLUMNS, Storyboard, StoryboardSection, VisualPlacement,
                                 compute_visual_heights, validate_storyboard)
from posterforge.gateway import FixtureStore, Gateway, GatewayConfig, RecordingBackend
from posterforge.layout.balancer import balance_columns
from posterforge.layout.engine import LayoutConfig, Layouter
from posterforge.pipeline import Outputs, generate
from posterforge.config import load_config
from posterforge.typography import TypographyScheme

VOCAB = ("model training data signal sparse dense graph encoder decoder latency memory throughput "
         "accuracy benchmark baseline dataset sample noise filter kernel layer attention token batch "
         "gradient update schedule budget cache index query score metric robust stable efficient "
         "compact scalable adaptive hierarchical learned structured temporal spatial local global "
         "pipeline module stage feature embedding projection loss objective constraint search").split()

BUNDLES = [
    {
        "name": "alpha",
        "title": "GraphZip: Lossless Compression for Large Sparse Graphs",
        "authors": ["Maria Elena Santos", "Jun Park", "Oliver van der Berg"],
        "method": "GraphZip",
        "italic": "robust",
        "logo_rgb": (178, 34, 52),
        "conference": True,
        "bad_first": None,
    },
    {
        "name": "beta",
        "title": "EchoClean: Real-Time Speech Denoising on Edge Devices",
        "authors": ["Priya Natarajan", "Tomas Lindqvist", "Hana Sato", "Leo Brandt"],
        "method": "EchoClean",
        "italic": "adaptive",
        "logo_rgb": None,  # no affiliation logo: theme comes from the key visual
        "conference": True,
        "bad_first": "parser_title",
    },
    {
        "name": "gamma",
        "title": "PathWeave: Learned Motion Planning in Cluttered Scenes",
        "authors": ["Amara Okafor", "Felix Hoffmann"],
        "method": "PathWeave",
        "italic": "structured",
        "logo_rgb": (255, 255, 255),  # all-white logo: falls back to the key visual
        "conference": False,
        "bad_first": "parser_narrative",
    },
]

SECTION_PLAN = [
    # id, title, column, priority, importance, content type, paper section, visuals
    ("motivation", "Motivation", "left", "top", 2, "foundation", "Introduction", ["figure_1"]),
    ("background", "Background", "left", "bottom", 3, "foundation", "Related Work", []),
    ("method", "Method Overview", "middle", "top", 1, "method", "Method", ["figure_2"]),
    ("design", "Model Design", "middle", "bottom", 2, "method", "Architecture", ["figure_3"]),
    ("results", "Main Results", "right", "top", 1, "results", "Experiments", ["figure_4"]),
    ("comparison", "Baseline Comparison", "right", "bottom", 2, "results", "Ablations", ["table_1"]),
]

ASSETS = [
    # id, kind, px size, caption, role
    ("figure_1", "figure", (1000, 520), "Failure cases of existing approaches", "problem_illustration"),
    ("figure_2", "figure", (1200, 680), "Overview of the full system", "key_visual"),
    ("figure_3", "figure", (1000, 440), "Detailed module structure", "method_workflow"),
    ("figure_4", "figure", (1000, 560), "Headline accuracy and latency", "main_results"),
    ("table_1", "table", (1000, 380), "Comparison against baselines", "comparative_results"),
    ("figure_5", "figure", (600, 1000), "Extended qualitative examples", "supporting"),
]


def sentence(rng, lo=8, hi=16, extra=()):
    n = rng.randint(lo, hi)
    words = [rng.choice(VOCAB) for _ in range(n)]
    for w in extra:
        words.insert(rng.randint(1, len(words)), w)
    text = " ".join(words)
    return text[0].upper() + text[1:]


def bullet_bank(rng, profile, count=14) -> list:
    out = []
    for i in range(count):
        extra = []
        if i % 3 == 0:
            extra.append(profile["method"])
        if i % 4 == 1:
            extra.append(f"{rng.randint(2, 98)}.{rng.randint(0, 9)}%")
        if i % 5 == 2:
            extra.append(profile["italic"])
        body = sentence(rng, 7, 13, extra)
        if i % 4 == 0:
            label = rng.choice(["Key idea", "Finding", "Effect", "Setup", "Result"])
            out.append(f"* **{label}:** {body}")
        else:
            out.append(f"* {body}")
        if i % 6 == 3:
            out.append(f"   - {sentence(rng, 5, 9)}")
    return out


def draw_asset(rng, size, rgb, tall=False) -> bytes:
    w, h = size
    im = Image.new("RGB", (w, h), (255, 255, 255))
    d = ImageDraw.Draw(im)
    for i in range(6):
        x0 = int(w * (0.08 + 0.14 * i))
        bar = int(h * rng.uniform(0.25, 0.8))
        shade = tuple(min(255, int(c * (0.7 + 0.06 * i))) for c in rgb)
        d.rectangle([x0, h - 40 - bar, x0 + int(w * 0.1), h - 40], fill=shade)
    d.rectangle([10, 10, w - 10, h - 10], outline=(60, 60, 60), width=4)
    buf = io.BytesIO()
    im.save(buf, format="PNG", optimize=True)
    return buf.getvalue()


def draw_logo(size, rgb) -> bytes:
    w, h = size
    im = Image.new("RGB", (w, h), (255, 255, 255))
    d = ImageDraw.Draw(im)
    d.ellipse([w * 0.15, h * 0.15, w * 0.85, h * 0.85], fill=rgb)
    buf = io.BytesIO()
    im.save(buf, format="PNG", optimize=True)
    return buf.getvalue()


def png_bytes(im) -> bytes:
    buf = io.BytesIO()
    im.save(buf, format="PNG", optimize=True)
    return buf.getvalue()


class Paper:
    """everything the scripted responder knows about one bundle"""

    def __init__(self, profile, seed):
        rng = random.Random(seed)
        self.profile = profile
        self.rng = rng
        self.banks = {sid: bullet_bank(rng, profile) for sid, *_ in SECTION_PLAN}
        self.banks["details"] = bullet_bank(rng, profile)
        names = [p[6] for p in SECTION_PLAN] + ["Conclusion"]
        self.paper_sections = []
        for name in names:
            paras = [sentence(rng, 12, 20, (profile["method"],)) + "." for _ in range(4)]
            figs = [v for p in SECTION_PLAN if p[6] == name for v in p[7] if v.startswith("figure")]
            tabs = [v for p in SECTION_PLAN if p[6] == name for v in p[7] if v.startswith("table")]
            kind = ("foundation" if name in ("Introduction", "Related Work")
                    else "method" if name in ("Method", "Architecture") else "evaluation")
            self.paper_sections.append({
                "section_name": name, "section_type": kind, "content": " ".join(paras),
                "key_points": [sentence(rng, 6, 10) for _ in range(3)],
                "importance": "high" if name in ("Method", "Experiments") else "medium",
                "contains_figures": figs, "contains_tables": tabs,
            })

    def markdown(self) -> str:
        lines = [f"# {self.profile['title']}", "", ", ".join(self.profile["authors"]), ""]
        for s in self.paper_sections:
            lines += [f"## {s['section_name']}", "", s["content"], ""]
        return "\n".join(lines)

    def structured(self) -> list:
        return [ingest.StructuredSection(**s) for s in self.paper_sections]

    def classification(self) -> dict:
        out = {"key_visual": "figure_2", "problem_illustration": [], "method_workflow": [],
               "main_results": [], "comparative_results": [], "supporting": []}
        for ident, _, _, _, role in ASSETS:
            if role != "key_visual":
                out[role].append(ident)
        return out

    def storyboard(self, counts: dict) -> Storyboard:
        sections = []
        for sid, title, col, prio, level, ctype, _, vids in SECTION_PLAN:
            n = counts.get(sid, 3)
            if n == 0:
                continue
            sections.append(StoryboardSection(
                sid, title, col, prio, level, ctype, self.banks[sid][:n],
                [VisualPlacement(v, "supports the section", "sits beside its discussion") for v in vids],
            ))
        return Storyboard(sections, "figure_2", "context, then method, then evidence",
                          "visuals anchor each column", "text fills what visuals leave")


def _after(text: str, marker: str):
    return json.loads(text.split(marker, 1)[1].strip())


class Responder:
    """scripted stand-in for every agent role"""

    def __init__(self):
        self.paper = None
        self.layouter = None
        self.counts = {}
        self.judge_scores = {}

    def __call__(self, req, attempt):
        role = req.agent_role
        user = next(m for m in req.messages if m.role == "user")
        if role == "judge":
            return self.judge(user, attempt)
        p = self.paper
        if p.profile["bad_first"] == role and attempt == 0:
            if role == "parser_title":
                return json.dumps({"title": p.profile["title"],
                                   "authors": p.profile["authors"][0] + " (maria@example.org)"})
            return "```json\n" + json.dumps({"and": "", "but": "x", "therefore": "y",
                                             "poster_hook": "z", "key_impact": "w"}) + "\n```"
        if role == "parser_title":
            return json.dumps({"title": p.profile["title"], "authors": ", ".join(p.profile["authors"])})
        if role == "parser_narrative":
            m = p.profile["method"]
            return json.dumps({
                "and": "Large workloads of this kind are now routine in practice.",
                "but": "Existing pipelines waste memory and time on redundant structure.",
                "therefore": f"{m} removes that redundancy and is faster on every benchmark we ran.",
                "poster_hook": f"What if {m} made the slow part disappear?",
                "key_impact": "Cheaper deployment on commodity hardware.",
            })
        if role == "parser_sections":
            return "```json\n" + json.dumps({"paper_sections": p.paper_sections,
                                             "paper_structure": {"total_sections": len(p.paper_sections)}}) + "\n```"
        if role == "parser_visuals":
            return json.dumps(p.classification())
        if role == "curator":
            return p.storyboard(self.counts).dumps()
        if role == "balancer":
            return self.balance(_after(user.text, "Current storyboard:"), user.text)
        if role == "font":
            return self.keywords(_after(user.text, "Storyboard:"))
        raise KeyError(f"no script for role {role}")

    def balance(self, board_json, prompt) -> str:
        board = Storyboard.from_json(board_json)
        strategies = dict(re.findall(r"- (\w+) column: .*-> strategy (\w+)", prompt))
        lay = self.layouter
        for i, col in enumerate(COLUMNS):
            strategy = strategies.get(col, "none")
            if strategy == "none":
                continue
            geom = lay.cfg.column_geometry(i)

            def frac():
                els = lay.layout_column(board.column_sections(col), geom, board.key_visual)
                return sum(e.outer_rect.h for e in els) / geom.available_height

            if strategy == "B" and frac() > 1.0:
                # drop an importance-3 section without visuals when that alone helps
                for s in list(board.column_sections(col)):
                    if s.importance_level == 3 and not s.visual_assets:
                        board.sections.remove(s)
                        break
            secs = board.column_sections(col)
            guard = 0
            while frac() < 0.87 and guard < 60:
                guard += 1
                grew = False
                for s in sorted(secs, key=lambda s: len(s.text_content)):
                    bank = self.paper.banks.get(s.section_id, self.paper.banks["details"])
                    if len(s.text_content) < len(bank):
                        s.text_content.append(bank[len(s.text_content)])
                        grew = True
                        break
                if not grew and strategy == "B" and f"{col}_details" not in [x.section_id for x in secs]:
                    # every bullet used: add a low-importance section from the source
                    extra = StoryboardSection(f"{col}_details", "Further Details", col, "bottom", 3,
                                              "method", self.paper.banks["details"][:1])
                    board.sections.append(extra)
                    secs = board.column_sections(col)
                    grew = True
                if not grew:
                    break
            while frac() > 0.93 and guard < 120:
                guard += 1
                s = max(secs, key=lambda s: len(s.text_content))
                if len(s.text_content) <= 1:
                    break
                s.text_content.pop()
        return board.dumps()

    def keywords(self, board_json) -> str:
        profile = self.paper.profile
        out = {}
        for s in board_json["spatial_content_plan"]["sections"]:
            text = "\n".join(s["text_content"])
            plain = re.sub(r"\*\*[^*]+\*\*", "", text)
            entry = {"bold_contrast": [], "bold": [], "italic": []}
            if profile["method"] in plain:
                entry["bold_contrast"].append(profile["method"])
            nums = re.findall(r"\d+\.\d%", plain)
            entry["bold"] = nums[:4] if s["section_id"] == "results" else nums[:2]
            if re.search(rf"\b{profile['italic']}\b", plain):
                entry["italic"].append(profile["italic"])
            out[s["section_id"]] = entry
        summary = {f"total_{k}": sum(len(v[k]) for v in out.values()) for k in ("bold_contrast", "bold", "italic")}
        return json.dumps({"section_keywords": out, "formatting_summary": summary})

    def judge(self, user, attempt) -> str:
        metric = re.search(r"METRIC: (\w+) -", user.text).group(1)
        score = self.judge_scores[user.image][metric]
        if score == "six" and attempt == 0:
            return json.dumps([{"metric": metric, "explanation": "generous", "score": 6}])
        if score == "pair":
            item = {"metric": metric, "explanation": "two opinions", "score": 3}
            return json.dumps([item, item])
        value = 4 if score == "six" else score
        return json.dumps([{"metric": metric, "explanation": f"{metric} judged from the layout", "score": value}])


def write_bundle(paper: Paper, root: Path, rng) -> None:
    profile = paper.profile
    b = root / profile["name"]
    (b / "assets").mkdir(parents=True)
    (b / "paper.md").write_text(paper.markdown(), encoding="utf-8")
    rows = ["id\tkind\tfile\tcaption"]
    palette = [(30, 90, 160), (200, 110, 40), (60, 140, 80), (120, 60, 150)]
    for k, (ident, kind, size, caption, role) in enumerate(ASSETS):
        rgb = (40, 70, 170) if role == "key_visual" and profile["name"] != "gamma" else palette[k % 4]
        (b / "assets" / f"{ident}.png").write_bytes(draw_asset(rng, size, rgb))
        rows.append(f"{ident}\t{kind}\t{ident}.png\t{caption}")
    (b / "assets" / "manifest.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    if profile["logo_rgb"] or profile["conference"]:
        (b / "logos").mkdir()
    if profile["logo_rgb"]:
        (b / "logos" / "affiliation.png").write_bytes(draw_logo((300, 300), profile["logo_rgb"]))
    if profile["conference"]:
        (b / "logos" / "conference.png").write_bytes(draw_logo((600, 200), (20, 20, 20)))


def make_judge_images(root: Path) -> dict:
    root.mkdir(parents=True)
    out = {}
    for name, rgb in (("poster_a.png", (30, 58, 138)), ("poster_b.png", (150, 40, 40))):
        im = Image.new("RGB", (480, 360), (255, 255, 255))
        d = ImageDraw.Draw(im)
        d.rectangle([0, 0, 480, 55], fill=rgb)
        for i in range(3):
            d.rectangle([10 + 158 * i, 70, 150 + 158 * i, 350], outline=rgb, width=3)
        data = png_bytes(im)
        (root / name).write_bytes(data)
        out[name] = data
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "fixtures"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    if out.exists():
        shutil.rmtree(out)
    out.mkdir(parents=True)
    store = FixtureStore(out / "store")
    responder = Responder()
    gw = Gateway(GatewayConfig(fixture_path=str(out / "store")), RecordingBackend(responder, store))
    cfg = load_config(overrides={"gateway.fixture_path": str(out / "store")})
    typography = TypographyScheme()

    papers = {}
    for k, profile in enumerate(BUNDLES):
        paper = Paper(profile, 100 + k)
        papers[profile["name"]] = paper
        write_bundle(paper, out / "bundles", random.Random(200 + k))

    # end-to-end runs over the bundles
    initial = [
        {"motivation": 2, "background": 2, "method": 1, "design": 2, "results": 2, "comparison": 1},
        {"motivation": 9, "background": 8, "method": 2, "design": 5, "results": 1, "comparison": 1},
        {"motivation": 3, "background": 3, "method": 3, "design": 3, "results": 3, "comparison": 3},
    ]
    scratch = out / "_scratch"
    for (name, paper), counts in zip(papers.items(), initial):
        bundle = ingest.load_bundle(out / "bundles" / name)
        responder.paper = paper
        responder.counts = counts
        responder.layouter = Layouter(cfg.layout, typography, bundle.assets)
        res = generate(out / "bundles" / name, cfg, Outputs(pptx=str(scratch / f"{name}.pptx"),
                                                            svg=str(scratch / f"{name}.svg"),
                                                            manifest=str(scratch / f"{name}.json")), gw)
        print(name, {c: u["fraction"] for c, u in res.manifest["utilization"].items()},
              "ws", res.manifest["white_space_fraction"])

    # layout corpus: 20 storyboards with balancer responses
    corpus = out / "layout_corpus"
    corpus.mkdir()
    rng = random.Random(7)
    lay_cfg = LayoutConfig()
    in_target = 0
    for i in range(20):
        name = BUNDLES[i % 3]["name"]
        paper = papers[name]
        bundle = ingest.load_bundle(out / "bundles" / name)
        counts = {sid: rng.randint(1, 9) for sid, *_ in SECTION_PLAN}
        if i % 5 == 4:
            counts["background"] = 12  # forces strategy B with a removable section
        board = paper.storyboard(counts)
        classification = ingest.VisualClassification(**paper.classification())
        heights = compute_visual_heights([bundle.assets[k] for k in sorted(bundle.assets)],
                                         lay_cfg.column_content_width, lay_cfg.available_height)
        problems = validate_storyboard(board, classification, heights)
        assert not problems, problems
        layouter = Layouter(lay_cfg, typography, bundle.assets)
        responder.paper, responder.layouter = paper, layouter
        report = layouter.utilization(board)
        balanced, rep, trace = balance_columns(board, report, paper.structured(), gw, layouter,
                                               classification, heights)
        in_target += all(0.85 <= f <= 0.95 for f in rep.fractions())
        doc = {
            "bundle": name,
            "title": paper.profile["title"],
            "authors": ingest.normalize_authors(", ".join(paper.profile["authors"])),
            "classification": paper.classification(),
            "structured_sections": paper.paper_sections,
            "storyboard": board.to_json(),
        }
        (corpus / f"board_{i:02d}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"board {i:02d}", [round(f, 3) for f in report.fractions()], "->",
              [round(f, 3) for f in rep.fractions()])
    print("in target:", in_target, "/ 20")

    # judge images and scripted scores
    images = make_judge_images(out / "judge")
    from posterforge.judge import evaluate_poster, load_rubric

    rubric = load_rubric()
    metrics = rubric.metrics()
    r = random.Random(11)
    responder.judge_scores = {
        images["poster_a.png"]: {m: r.randint(3, 5) for m in metrics},
        images["poster_b.png"]: {m: r.randint(2, 5) for m in metrics},
    }
    responder.judge_scores[images["poster_b.png"]]["Alignment"] = "six"
    responder.judge_scores[images["poster_b.png"]]["Accent"] = "pair"
    for data in images.values():
        evaluate_poster(data, rubric, gw)
    expected = {name: {m: (None if v == "pair" else 4 if v == "six" else v)
                       for m, v in responder.judge_scores[data].items()}
                for name, data in images.items()}
    (out / "judge" / "expected_scores.json").write_text(json.dumps(expected, indent=2) + "\n", encoding="utf-8")

    shutil.rmtree(scratch)
    print("fixture responses:", len(store))
    return 0


if __name__ == "__main__":
    sys.exit(main())
