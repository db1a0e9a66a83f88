"""Header logo placement, flush right."""

from ..layout.boxes import BoxModel, PositionedElement, Rect


def logo_size(asset, max_height: float, max_width: float) -> tuple:
    """scale to max_height, then cap width; aspect ratio is always kept"""
    w, h = max_height * asset.aspect_ratio, max_height
    if w > max_width:
        w, h = max_width, max_width / asset.aspect_ratio
    return w, h


def place_logos(poster, affiliation_logo=None, conference_logo=None, cfg=None):
    """append logo elements to poster.header; conference logo sits rightmost"""
    from ..layout.engine import LayoutConfig

    cfg = cfg or LayoutConfig()
    canvas_w = poster.canvas[0]
    room = cfg.header_height - 2 * cfg.header_padding
    cap = cfg.logo_width_cap * canvas_w
    right = canvas_w - cfg.outer_margin
    for ref, asset in (("conference_logo", conference_logo), ("affiliation_logo", affiliation_logo)):
        if asset is None:
            continue
        w, h = logo_size(asset, room, cap)
        y = cfg.header_padding + (room - h) / 2
        el = PositionedElement("logo", Rect(right - w, y, w, h), BoxModel(), ref)
        el.meta["asset_id"] = asset.id
        poster.header.append(el)
        right -= w + cfg.logo_gap
    return poster
