"""End-to-end generation: ingest, curate, layout and balance, style, render."""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ingest
from .config import RunConfig
from .curator import build_storyboard, compute_visual_heights
from .errors import PosterError, StageError
from .gateway import Gateway
from .layout.balancer import balance_columns
from .layout.engine import Layouter, white_space_fraction
from .render.logos import place_logos
from .render.pptx import render_pptx
from .render.shapes import RenderOptions
from .render.svg import render_svg
from .styling.color import (Color, ThemeChoice, adjust_theme_color, derive_palette, extract_theme_color,
                            extract_theme_color_vlm)
from .styling.styles import apply_styles, contrast_violations, extract_keywords

log = logging.getLogger(__name__)

STAGES = ("ingest", "curator", "layout", "styling", "render")


@dataclass
class Outputs:
    pptx: Optional[str] = "poster.pptx"
    svg: Optional[str] = "poster.svg"
    manifest: Optional[str] = "manifest.json"
    debug_svg: Optional[str] = None
    storyboard: Optional[str] = None
    layout: Optional[str] = None
    palette: Optional[str] = None


@dataclass
class RunResult:
    manifest: dict
    written: list = field(default_factory=list)
    stopped_after: Optional[str] = None


class _Run:
    def __init__(self, outputs: Outputs, keep_partial: bool):
        self.outputs = outputs
        self.keep_partial = keep_partial
        self.written = []
        self.timings = []
        self.warnings = []

    def write(self, path, data):
        p = Path(path)
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            data = data.encode("utf-8")
        p.write_bytes(data)
        self.written.append(str(p))

    def stage(self, name, fn):
        start = time.perf_counter()
        log.info("stage %s", name)
        try:
            result = fn()
        except StageError:
            raise
        except Exception as e:
            self.cleanup()
            raise StageError(name, e) from e
        self.timings.append({"stage": name, "seconds": round(time.perf_counter() - start, 4)})
        return result

    def cleanup(self):
        if self.keep_partial:
            return
        for path in self.written:
            Path(path).unlink(missing_ok=True)
        self.written = []


def choose_theme(bundle, classification, cfg: RunConfig, gw) -> ThemeChoice:
    opts = cfg.palette
    if opts.theme:
        return ThemeChoice(Color.from_hex(opts.theme), "config")
    logo = bundle.affiliation_logo.pixels if bundle.affiliation_logo else None
    if opts.use_vlm and logo is not None:
        return extract_theme_color_vlm(logo, gw)
    kv = classification.key_visual
    key_pixels = bundle.assets[kv].pixels if kv in bundle.assets else None
    return extract_theme_color(logo, key_pixels, opts.default_theme)


def _dump(value) -> str:
    return json.dumps(value, indent=2, ensure_ascii=False) + "\n"


def generate(bundle_path, cfg: RunConfig, outputs: Outputs = None, gw: Gateway = None,
             stop_after: Optional[str] = None, keep_partial: bool = False) -> RunResult:
    if stop_after not in (None, "curator", "layout"):
        raise ValueError(f"--stop-after must be curator or layout, got {stop_after!r}")
    outputs = outputs or Outputs()
    run = _Run(outputs, keep_partial)
    if gw is None:
        try:
            gw = Gateway(cfg.gateway)
        except Exception as e:
            raise StageError("ingest", e) from e
    lay = cfg.layout

    def do_ingest():
        bundle = ingest.load_bundle(bundle_path)
        ta = ingest.extract_title_authors(bundle, gw)
        narrative = ingest.extract_narrative(bundle, gw)
        sections = ingest.extract_sections(bundle, gw, cfg.constraints.max_words)
        classification = ingest.classify_visuals(bundle, gw)
        run.warnings.extend(narrative.warnings)
        return bundle, ta, narrative, sections, classification

    bundle, ta, narrative, sections, classification = run.stage("ingest", do_ingest)

    def do_curate():
        heights = compute_visual_heights([bundle.assets[k] for k in sorted(bundle.assets)],
                                         lay.column_content_width, lay.available_height)
        board = build_storyboard(sections, narrative, classification, heights, gw,
                                 cfg.constraints, lay.available_height)
        if outputs.storyboard or stop_after == "curator":
            run.write(outputs.storyboard or "storyboard.json", board.dumps() + "\n")
        return board, heights

    board, heights = run.stage("curator", do_curate)
    manifest = {"bundle": bundle.name or Path(bundle_path).name, "title": ta.title, "authors": ta.authors}
    if stop_after == "curator":
        manifest.update(stages=run.timings, warnings=run.warnings, stopped_after="curator")
        return RunResult(manifest, run.written, "curator")

    layouter = Layouter(lay, cfg.typography, bundle.assets)

    def do_layout():
        report = layouter.utilization(board)
        balanced, report, trace = balance_columns(board, report, sections, gw, layouter, classification,
                                                  heights, cfg.constraints)
        poster = layouter.assemble(balanced, ta.title, ta.authors)
        run.warnings.extend(poster.warnings)
        if outputs.layout or stop_after == "layout":
            run.write(outputs.layout or "layout.json", poster.dumps() + "\n")
        return balanced, poster, trace

    balanced, poster, trace = run.stage("layout", do_layout)
    manifest.update(utilization=poster.utilization.to_dict(), balancer=trace.to_dict())
    if stop_after == "layout":
        manifest.update(stages=run.timings, warnings=run.warnings, stopped_after="layout")
        return RunResult(manifest, run.written, "layout")

    def do_style():
        choice = choose_theme(bundle, classification, cfg, gw)
        run.warnings.extend(choice.warnings)
        theme = adjust_theme_color(choice.color)
        palette = derive_palette(theme)
        plan = extract_keywords(balanced, narrative, gw)
        run.warnings.extend(plan.warnings)
        place_logos(poster, bundle.affiliation_logo, bundle.conference_logo, lay)
        styled = apply_styles(poster, palette, plan, cfg.typography)
        run.warnings.extend(styled.warnings)
        bad = contrast_violations(styled)
        if bad:
            raise PosterError("contrast check failed: " + "; ".join(bad[:3]))
        if outputs.palette:
            run.write(outputs.palette, _dump(palette.to_dict()))
        return choice, palette, plan, styled

    choice, palette, plan, styled = run.stage("styling", do_style)

    assets = dict(bundle.assets)
    for logo in (bundle.affiliation_logo, bundle.conference_logo):
        if logo is not None:
            assets[logo.id] = logo

    def do_render():
        opts = RenderOptions(emit_pptx=bool(outputs.pptx), emit_svg=bool(outputs.svg or outputs.debug_svg))
        if outputs.pptx:
            run.write(outputs.pptx, render_pptx(styled, assets, opts))
        if outputs.svg:
            run.write(outputs.svg, render_svg(styled, assets, opts))
        if outputs.debug_svg:
            wire = RenderOptions(emit_pptx=False, emit_svg=True, wireframe=True)
            run.write(outputs.debug_svg, render_svg(styled, assets, wire))

    run.stage("render", do_render)

    manifest.update(
        stages=run.timings,
        white_space_fraction=round(white_space_fraction(poster), 4),
        theme={"source": choice.source, "extracted": choice.color.hex,
               "suitability_score": choice.suitability_score},
        palette=palette.to_dict(),
        keywords=plan.to_dict(),
        warnings=run.warnings,
        gateway_calls=len(gw.calls),
        outputs={k: v for k, v in (("pptx", outputs.pptx), ("svg", outputs.svg),
                                   ("debug_svg", outputs.debug_svg)) if v},
    )
    if outputs.manifest:
        run.write(outputs.manifest, _dump(manifest))
    return RunResult(manifest, run.written)
