"""Command line: generate, judge, inspect."""

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, PosterError

log = logging.getLogger("posterforge")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="posterforge", description="compose a three-column poster from a paper bundle")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="run the full pipeline on a bundle")
    g.add_argument("bundle")
    g.add_argument("--config")
    g.add_argument("--fixtures", help="fixture store directory (forces fixture mode)")
    g.add_argument("--out", help="PPTX output path")
    g.add_argument("--svg", help="SVG preview path")
    g.add_argument("--no-svg", action="store_true")
    g.add_argument("--manifest")
    g.add_argument("--debug-svg", help="wireframe SVG path")
    g.add_argument("--dump-storyboard")
    g.add_argument("--dump-layout")
    g.add_argument("--dump-palette")
    g.add_argument("--stop-after", choices=("curator", "layout"))
    g.add_argument("--keep-partial", action="store_true")

    j = sub.add_parser("judge", help="score poster images against the rubric")
    j.add_argument("--poster", nargs="+", required=True)
    j.add_argument("--rubric")
    j.add_argument("--report", required=True)
    j.add_argument("--config")
    j.add_argument("--fixtures")

    i = sub.add_parser("inspect", help="summarize a bundle directory or a PPTX file")
    i.add_argument("path")
    return p


def _config(args):
    overrides = {}
    if getattr(args, "fixtures", None):
        overrides = {"gateway.mode": "fixture", "gateway.fixture_path": args.fixtures}
    return load_config(args.config, overrides=overrides)


def cmd_generate(args) -> int:
    from .pipeline import Outputs, generate

    cfg = _config(args)
    out = cfg.output
    outputs = Outputs(
        pptx=args.out or out.pptx,
        svg=None if args.no_svg else (args.svg or out.svg),
        manifest=args.manifest or out.manifest,
        debug_svg=args.debug_svg,
        storyboard=args.dump_storyboard,
        layout=args.dump_layout,
        palette=args.dump_palette,
    )
    result = generate(args.bundle, cfg, outputs, stop_after=args.stop_after, keep_partial=args.keep_partial)
    for path in result.written:
        print(path)
    util = result.manifest.get("utilization")
    if util:
        print("utilization: " + ", ".join(f"{c} {u['fraction']:.3f}" for c, u in util.items()))
    return 0


def cmd_judge(args) -> int:
    from .gateway import Gateway
    from .judge import aggregate, evaluate_poster, load_rubric

    cfg = _config(args)
    rubric = load_rubric(args.rubric)
    gw = Gateway(cfg.gateway)
    results = []
    for path in args.poster:
        image = Path(path).read_bytes()
        results.append((Path(path).name, cfg.gateway.model_id, evaluate_poster(image, rubric, gw)))
    report = aggregate(results, rubric)
    Path(args.report).write_text(report.dumps() + "\n", encoding="utf-8")
    for row in report.rows:
        avgs = ", ".join(f"{d}: {v}" for d, v in row.averages.items())
        print(f"{row.judge_model} ({row.n_posters} posters) {avgs}")
    return 0


def cmd_inspect(args) -> int:
    path = Path(args.path)
    if path.is_dir():
        from .ingest import load_bundle

        b = load_bundle(path)
        info = {
            "name": b.name,
            "words": len(b.markdown_text.split()),
            "assets": {a.id: {"kind": a.kind, "size_px": [a.width_px, a.height_px], "caption": a.caption}
                       for a in b.assets.values()},
            "logos": [l.id for l in (b.affiliation_logo, b.conference_logo) if l is not None],
        }
    else:
        from .render.pptx import package_problems, read_pptx

        data = path.read_bytes()
        doc = read_pptx(data)
        info = {
            "slide_emu": doc["size"],
            "shapes": [{"kind": s["kind"], "name": s["name"], "rect": s["rect"]} for s in doc["shapes"]],
            "problems": package_problems(data),
        }
    print(json.dumps(info, indent=2))
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"generate": cmd_generate, "judge": cmd_judge, "inspect": cmd_inspect}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (PosterError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
