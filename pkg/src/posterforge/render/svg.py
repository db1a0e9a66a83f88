"""SVG preview: one user unit per point, images inlined as data URIs."""

import base64
from xml.sax.saxutils import escape, quoteattr

from ..layout.metrics import GlyphMetrics, wrap_spans
from .shapes import RenderOptions, build_shapes, png_bytes
from .units import to_pt

ASCENT = 0.8  # baseline offset below the line top, as a fraction of font size


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _rect_attrs(r) -> str:
    return (f'x="{_n(to_pt(r.x))}" y="{_n(to_pt(r.y))}" '
            f'width="{_n(to_pt(r.w))}" height="{_n(to_pt(r.h))}"')


def _line_runs(par, start: int, end: int) -> list:
    """slice a paragraph's runs to the character span [start, end)"""
    out, pos = [], 0
    for run in par.runs:
        lo, hi = max(start, pos), min(end, pos + len(run.text))
        if lo < hi:
            out.append((run, run.text[lo - pos:hi - pos]))
        pos += len(run.text)
    return out


def _text_shape(shape, metrics) -> list:
    font = shape.font
    size = font.size_pt
    line_pt = size * font.line_spacing
    x = to_pt(shape.rect.x)
    y = to_pt(shape.rect.y)
    r = shape.rect
    box = " ".join(_n(to_pt(v)) for v in (r.x, r.y, r.w, r.h))
    out = [f'<g data-name={quoteattr(shape.name)} data-box="{box}" '
           f'font-family={quoteattr(font.family)} font-size="{_n(size)}">']
    for i, par in enumerate(shape.paragraphs):
        if i:
            y += line_pt  # the paragraph gap mirrors the measured newline offset
        text = par.text
        spans = wrap_spans(text, shape.rect.w, font, metrics) if text else ((0, 0),)
        for s, e in spans:
            baseline = y + (line_pt - size) / 2 + ASCENT * size
            tspans = []
            for run, piece in _line_runs(par, s, e):
                weight = ' font-weight="bold"' if run.bold else ""
                style = ' font-style="italic"' if run.italic else ""
                tspans.append(f'<tspan fill="{run.color.hex}"{weight}{style}>{escape(piece)}</tspan>')
            if tspans:
                out.append(f'<text x="{_n(x)}" y="{_n(baseline)}" xml:space="preserve">{"".join(tspans)}</text>')
            y += line_pt
    out.append("</g>")
    return out


def render_svg(styled, assets: dict, opts: RenderOptions = None, metrics: GlyphMetrics = None) -> str:
    opts = opts or RenderOptions()
    metrics = metrics or GlyphMetrics.bundled()
    w, h = (to_pt(v) for v in styled.poster.canvas)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
           f'version="1.1" width="{_n(w)}pt" height="{_n(h)}pt" viewBox="0 0 {_n(w)} {_n(h)}">']
    if opts.wireframe:
        out.append(f'<rect x="0" y="0" width="{_n(w)}" height="{_n(h)}" fill="none" stroke="#000000"/>')
        for el in styled.poster.elements():
            out.append(f'<rect {_rect_attrs(el.outer_rect)} fill="none" stroke="#999999" stroke-width="0.5"/>')
            out.append(f'<rect {_rect_attrs(el.content_rect)} fill="none" stroke="#D03030" stroke-width="1"'
                       f' data-kind="{el.kind}"/>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
    out.append(f'<rect x="0" y="0" width="{_n(w)}" height="{_n(h)}" fill="{styled.palette.background.hex}"/>')
    for shape in build_shapes(styled, assets):
        if shape.kind == "rectangle":
            out.append(f'<rect {_rect_attrs(shape.rect)} fill="{shape.fill.hex}" data-name={quoteattr(shape.name)}/>')
        elif shape.kind == "picture":
            data = base64.b64encode(png_bytes(assets[shape.image_ref])).decode("ascii")
            out.append(f'<image {_rect_attrs(shape.rect)} preserveAspectRatio="none" '
                       f'data-name={quoteattr(shape.name)} xlink:href="data:image/png;base64,{data}"/>')
        else:
            out.extend(_text_shape(shape, metrics))
    out.append("</svg>")
    return "\n".join(out) + "\n"
