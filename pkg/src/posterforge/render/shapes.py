"""Flatten a StyledPoster into paint-ordered shape records shared by both writers."""

import io
from dataclasses import dataclass, field
from typing import Optional

from PIL import Image

from ..errors import RenderError
from ..layout.boxes import Rect
from .units import to_emu

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass
class RenderOptions:
    emit_pptx: bool = True
    emit_svg: bool = True
    deterministic_timestamps: bool = True
    wireframe: bool = False

    def __post_init__(self):
        if not (self.emit_pptx or self.emit_svg):
            raise ValueError("at least one of emit_pptx / emit_svg must be set")


@dataclass
class ShapeRecord:
    kind: str  # textbox | picture | rectangle
    name: str
    rect: Rect  # inches
    fill: Optional[object] = None
    paragraphs: list = field(default_factory=list)
    font: Optional[object] = None
    image_ref: str = ""

    @property
    def emu(self) -> tuple:
        return tuple(to_emu(v) for v in self.rect)


def png_bytes(asset) -> bytes:
    """the asset's pixels as PNG; re-encodes anything PIL can read"""
    data = getattr(asset, "pixels", b"")
    if data.startswith(PNG_MAGIC):
        return data
    try:
        im = Image.open(io.BytesIO(data))
        out = io.BytesIO()
        im.save(out, format="PNG")
        return out.getvalue()
    except Exception as e:
        raise RenderError(f"asset {asset.id}: cannot encode image ({e})") from e


def build_shapes(styled, assets: dict) -> list:
    """backgrounds, then pictures, then text"""
    shapes = [ShapeRecord("rectangle", f"fill:{f.role}", f.rect, f.color) for f in styled.fills]
    for el in styled.images:
        ref = el.meta.get("asset_id", el.source_ref)
        if ref not in assets:
            raise RenderError(f"asset {ref}: not available to the renderer")
        shapes.append(ShapeRecord("picture", f"{el.kind}:{el.source_ref}", el.content_rect, image_ref=ref))
    for b in styled.blocks:
        el = b.element
        name = f"{el.kind}:{el.meta.get('section_id', el.source_ref)}"
        shapes.append(ShapeRecord("textbox", name, el.content_rect, None, b.paragraphs, b.font))
    return shapes
