"""Single-slide PPTX writer (raw OOXML in a zip) and a reader for our own output."""

import io
import re
import time
import zipfile
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from ..errors import RenderError
from .shapes import RenderOptions, build_shapes, png_bytes
from .units import to_emu

NS = {
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
}
REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
CT = "application/vnd.openxmlformats-officedocument.presentationml"
EPOCH = (1980, 1, 1, 0, 0, 0)
XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
_NSDECL = f'xmlns:a="{NS["a"]}" xmlns:r="{NS["r"]}" xmlns:p="{NS["p"]}"'
_CTRL = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f]")


def _text(s: str) -> str:
    return escape(_CTRL.sub("", s))


def _rels(entries) -> str:
    body = "".join(f'<Relationship Id="{rid}" Type="{REL}/{kind}" Target="{target}"/>'
                   for rid, kind, target in entries)
    return f'{XML_DECL}<Relationships xmlns="{PKG_REL}">{body}</Relationships>'


def _content_types(media: bool) -> str:
    defaults = ('<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
                '<Default Extension="xml" ContentType="application/xml"/>')
    if media:
        defaults += '<Default Extension="png" ContentType="image/png"/>'
    overrides = [
        ("/ppt/presentation.xml", f"{CT}.presentation.main+xml"),
        ("/ppt/slideMasters/slideMaster1.xml", f"{CT}.slideMaster+xml"),
        ("/ppt/slideLayouts/slideLayout1.xml", f"{CT}.slideLayout+xml"),
        ("/ppt/slides/slide1.xml", f"{CT}.slide+xml"),
        ("/ppt/theme/theme1.xml", "application/vnd.openxmlformats-officedocument.theme+xml"),
    ]
    body = "".join(f'<Override PartName="{p}" ContentType="{t}"/>' for p, t in overrides)
    return (f'{XML_DECL}<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
            f"{defaults}{body}</Types>")


def _presentation(cx: int, cy: int) -> str:
    return (f"{XML_DECL}<p:presentation {_NSDECL} saveSubsetFonts=\"1\">"
            '<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>'
            '<p:sldIdLst><p:sldId id="256" r:id="rId2"/></p:sldIdLst>'
            f'<p:sldSz cx="{cx}" cy="{cy}"/><p:notesSz cx="6858000" cy="9144000"/>'
            "</p:presentation>")


_EMPTY_TREE = ('<p:spTree><p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
               '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/>'
               '<a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>')


def _master() -> str:
    return (f"{XML_DECL}<p:sldMaster {_NSDECL}><p:cSld>{_EMPTY_TREE}</p:spTree></p:cSld>"
            '<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" '
            'accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" '
            'folHlink="folHlink"/>'
            '<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>'
            "</p:sldMaster>")


def _layout() -> str:
    return (f'{XML_DECL}<p:sldLayout {_NSDECL} type="blank" preserve="1"><p:cSld name="Blank">'
            f"{_EMPTY_TREE}</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr>"
            "</p:sldLayout>")


def _theme(family: str) -> str:
    colors = [("dk1", "000000"), ("lt1", "FFFFFF"), ("dk2", "1A1A1A"), ("lt2", "EEEEEE"),
              ("accent1", "1E3A8A"), ("accent2", "8A6E1E"), ("accent3", "5A5A5A"), ("accent4", "3A5A8A"),
              ("accent5", "2E7D32"), ("accent6", "C62828"), ("hlink", "0563C1"), ("folHlink", "954F72")]
    clr = "".join(f"<a:{n}><a:srgbClr val=\"{v}\"/></a:{n}>" for n, v in colors)
    font = f'<a:latin typeface={quoteattr(family)}/><a:ea typeface=""/><a:cs typeface=""/>'
    solid = '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    line = '<a:ln w="9525"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    return (f'{XML_DECL}<a:theme xmlns:a="{NS["a"]}" name="Poster"><a:themeElements>'
            f'<a:clrScheme name="Poster">{clr}</a:clrScheme>'
            f'<a:fontScheme name="Poster"><a:majorFont>{font}</a:majorFont><a:minorFont>{font}</a:minorFont>'
            "</a:fontScheme>"
            f'<a:fmtScheme name="Poster"><a:fillStyleLst>{solid * 3}</a:fillStyleLst>'
            f"<a:lnStyleLst>{line * 3}</a:lnStyleLst>"
            f"<a:effectStyleLst>{'<a:effectStyle><a:effectLst/></a:effectStyle>' * 3}</a:effectStyleLst>"
            f"<a:bgFillStyleLst>{solid * 3}</a:bgFillStyleLst></a:fmtScheme>"
            "</a:themeElements></a:theme>")


def _xfrm(emu) -> str:
    x, y, cx, cy = emu
    return f'<a:xfrm><a:off x="{x}" y="{y}"/><a:ext cx="{cx}" cy="{cy}"/></a:xfrm>'


def _fill(color) -> str:
    return f'<a:solidFill><a:srgbClr val="{color.hex[1:]}"/></a:solidFill>'


def _run(run) -> str:
    attrs = f'lang="en-US" sz="{int(round(run.font.size_pt * 100))}" b="{int(run.bold)}" i="{int(run.italic)}"'
    return (f"<a:r><a:rPr {attrs} dirty=\"0\">{_fill(run.color)}"
            f"<a:latin typeface={quoteattr(run.font.family)}/></a:rPr><a:t>{_text(run.text)}</a:t></a:r>")


def _paragraphs(shape) -> str:
    font = shape.font
    spacing = int(round(font.line_spacing * 100000))
    # a blank line before each paragraph mirrors the measured newline offset
    gap = int(round(font.size_pt * font.line_spacing * 100))
    out = []
    for i, par in enumerate(shape.paragraphs):
        before = f'<a:spcBef><a:spcPts val="{gap}"/></a:spcBef>' if i else ""
        ppr = f'<a:pPr><a:lnSpc><a:spcPct val="{spacing}"/></a:lnSpc>{before}<a:buNone/></a:pPr>'
        end = f'<a:endParaRPr lang="en-US" sz="{int(round(font.size_pt * 100))}" dirty="0"/>'
        out.append(f"<a:p>{ppr}{''.join(_run(r) for r in par.runs)}{end}</a:p>")
    return "".join(out) or "<a:p/>"


def _shape_xml(sid: int, shape, rid: str = "") -> str:
    name = quoteattr(shape.name)
    geom = '<a:prstGeom prst="rect"><a:avLst/></a:prstGeom>'
    if shape.kind == "picture":
        return (f'<p:pic><p:nvPicPr><p:cNvPr id="{sid}" name={name}/><p:cNvPicPr>'
                '<a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr>'
                f'<p:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>'
                f"<p:spPr>{_xfrm(shape.emu)}{geom}</p:spPr></p:pic>")
    if shape.kind == "rectangle":
        return (f'<p:sp><p:nvSpPr><p:cNvPr id="{sid}" name={name}/><p:cNvSpPr/><p:nvPr/></p:nvSpPr>'
                f"<p:spPr>{_xfrm(shape.emu)}{geom}{_fill(shape.fill)}<a:ln><a:noFill/></a:ln></p:spPr></p:sp>")
    body = ('<a:bodyPr wrap="square" lIns="0" tIns="0" rIns="0" bIns="0" anchor="t" rtlCol="0">'
            "<a:noAutofit/></a:bodyPr><a:lstStyle/>")
    return (f'<p:sp><p:nvSpPr><p:cNvPr id="{sid}" name={name}/><p:cNvSpPr txBox="1"/><p:nvPr/></p:nvSpPr>'
            f"<p:spPr>{_xfrm(shape.emu)}{geom}<a:noFill/></p:spPr>"
            f"<p:txBody>{body}{_paragraphs(shape)}</p:txBody></p:sp>")


def build_parts(styled, assets: dict) -> dict:
    """part path -> bytes for the whole package"""
    cx, cy = (to_emu(v) for v in styled.poster.canvas)
    shapes = build_shapes(styled, assets)
    slide_rels = [("rId1", "slideLayout", "../slideLayouts/slideLayout1.xml")]
    parts = {}
    xml_shapes = []
    media_index = {}
    for i, shape in enumerate(shapes):
        x, y, w, h = shape.emu
        if x + w > cx or y + h > cy:
            raise RenderError(f"shape {shape.name} exceeds the slide")
        rid = ""
        if shape.kind == "picture":
            # one media part per picture; ids follow paint order
            n = len(media_index) + 1
            rid = f"rId{n + 1}"
            media_index[shape.name] = n
            parts[f"ppt/media/image{n}.png"] = png_bytes(assets[shape.image_ref])
            slide_rels.append((rid, "image", f"../media/image{n}.png"))
        xml_shapes.append(_shape_xml(i + 2, shape, rid))
    slide = (f"{XML_DECL}<p:sld {_NSDECL}><p:cSld>{_EMPTY_TREE}{''.join(xml_shapes)}</p:spTree></p:cSld>"
             "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>")
    family = styled.typography["body"].family
    text_parts = {
        "[Content_Types].xml": _content_types(bool(media_index)),
        "_rels/.rels": _rels([("rId1", "officeDocument", "ppt/presentation.xml")]),
        "ppt/presentation.xml": _presentation(cx, cy),
        "ppt/_rels/presentation.xml.rels": _rels([
            ("rId1", "slideMaster", "slideMasters/slideMaster1.xml"),
            ("rId2", "slide", "slides/slide1.xml"),
            ("rId3", "theme", "theme/theme1.xml"),
        ]),
        "ppt/slideMasters/slideMaster1.xml": _master(),
        "ppt/slideMasters/_rels/slideMaster1.xml.rels": _rels([
            ("rId1", "slideLayout", "../slideLayouts/slideLayout1.xml"),
            ("rId2", "theme", "../theme/theme1.xml"),
        ]),
        "ppt/slideLayouts/slideLayout1.xml": _layout(),
        "ppt/slideLayouts/_rels/slideLayout1.xml.rels": _rels([
            ("rId1", "slideMaster", "../slideMasters/slideMaster1.xml")]),
        "ppt/theme/theme1.xml": _theme(family),
        "ppt/slides/slide1.xml": slide,
        "ppt/slides/_rels/slide1.xml.rels": _rels(slide_rels),
    }
    parts.update({k: v.encode("utf-8") for k, v in text_parts.items()})
    return parts


def render_pptx(styled, assets: dict, opts: RenderOptions = None) -> bytes:
    opts = opts or RenderOptions()
    parts = build_parts(styled, assets)
    stamp = EPOCH if opts.deterministic_timestamps else time.localtime()[:6]
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for path in sorted(parts):
            info = zipfile.ZipInfo(path, date_time=stamp)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            info.create_system = 0
            zf.writestr(info, parts[path])
    return buf.getvalue()


# -- reading back ---------------------------------------------------------

def _q(tag: str) -> str:
    prefix, local = tag.split(":")
    return f"{{{NS[prefix]}}}{local}"


def _read_xfrm(node) -> tuple:
    off, ext = node.find(f".//{_q('a:off')}"), node.find(f".//{_q('a:ext')}")
    return (int(off.get("x")), int(off.get("y")), int(ext.get("cx")), int(ext.get("cy")))


def _read_color(node):
    clr = node.find(f"{_q('a:solidFill')}/{_q('a:srgbClr')}")
    return None if clr is None else "#" + clr.get("val")


def read_pptx(data: bytes) -> dict:
    """slide size plus every shape: kind, name, EMU rect, fill, runs, image target"""
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        pres = ET.fromstring(zf.read("ppt/presentation.xml"))
        size = pres.find(_q("p:sldSz"))
        slide = ET.fromstring(zf.read("ppt/slides/slide1.xml"))
        rels = ET.fromstring(zf.read("ppt/slides/_rels/slide1.xml.rels"))
    targets = {r.get("Id"): r.get("Target") for r in rels}
    shapes = []
    tree = slide.find(f"{_q('p:cSld')}/{_q('p:spTree')}")
    for node in tree:
        if node.tag == _q("p:pic"):
            name = node.find(f".//{_q('p:cNvPr')}").get("name")
            rid = node.find(f".//{_q('a:blip')}").get(f"{{{NS['r']}}}embed")
            shapes.append({"kind": "picture", "name": name, "rect": _read_xfrm(node.find(_q("p:spPr"))),
                           "image": targets.get(rid)})
        elif node.tag == _q("p:sp"):
            name = node.find(f".//{_q('p:cNvPr')}").get("name")
            sppr = node.find(_q("p:spPr"))
            body = node.find(_q("p:txBody"))
            rec = {"kind": "textbox" if body is not None else "rectangle", "name": name,
                   "rect": _read_xfrm(sppr), "fill": _read_color(sppr), "paragraphs": []}
            if body is not None:
                for p in body.findall(_q("a:p")):
                    runs = []
                    for r in p.findall(_q("a:r")):
                        rpr = r.find(_q("a:rPr"))
                        runs.append({"text": r.find(_q("a:t")).text or "", "bold": rpr.get("b") == "1",
                                     "italic": rpr.get("i") == "1", "color": _read_color(rpr),
                                     "size": int(rpr.get("sz"))})
                    rec["paragraphs"].append(runs)
            shapes.append(rec)
    return {"size": (int(size.get("cx")), int(size.get("cy"))), "shapes": shapes}


def package_problems(data: bytes) -> list:
    """archive completeness: relationship targets exist, content types cover every part"""
    out = []
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        names = set(zf.namelist())
        if zf.testzip() is not None:
            out.append("corrupt zip entry")
        for required in ("[Content_Types].xml", "_rels/.rels", "ppt/presentation.xml",
                         "ppt/slides/slide1.xml", "ppt/slides/_rels/slide1.xml.rels"):
            if required not in names:
                out.append(f"missing {required}")
        if "[Content_Types].xml" not in names:
            return out
        ct = ET.fromstring(zf.read("[Content_Types].xml"))
        ns = "{http://schemas.openxmlformats.org/package/2006/content-types}"
        exts = {d.get("Extension") for d in ct.findall(f"{ns}Default")}
        overrides = {o.get("PartName").lstrip("/") for o in ct.findall(f"{ns}Override")}
        for n in names:
            if n.endswith("/"):
                continue
            if n not in overrides and n.rsplit(".", 1)[-1] not in exts:
                out.append(f"no content type for {n}")
        for n in sorted(names):
            if not n.endswith(".rels"):
                continue
            folder, fname = n.rsplit("_rels/", 1)
            source_dir = folder
            for rel in ET.fromstring(zf.read(n)):
                if rel.get("TargetMode") == "External":
                    continue
                target = _resolve(source_dir, rel.get("Target"))
                if target not in names:
                    out.append(f"{n}: {rel.get('Id')} -> {target} missing")
    return out


def _resolve(base: str, target: str) -> str:
    parts = [p for p in base.split("/") if p]
    for seg in target.split("/"):
        if seg == "..":
            parts = parts[:-1]
        elif seg and seg != ".":
            parts.append(seg)
    return "/".join(parts)
