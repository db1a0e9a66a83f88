"""Colors, WCAG contrast and theme-palette derivation."""

import colorsys
import io
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from PIL import Image

from ..errors import PaletteError

log = logging.getLogger(__name__)

MIN_CONTRAST = 4.5
DEFAULT_THEME = "#1E3A8A"
TEXT_PRIMARY = "#1A1A1A"
BACKGROUND = "#FFFFFF"
LIGHTNESS_FLOOR = 0.05
DARKEN_STEP = 0.02

# histogram bins and pixel filters for theme extraction
HUE_BINS, SAT_BINS, LIGHT_BINS = 12, 4, 4
MAX_LIGHTNESS, MIN_LIGHTNESS, MIN_SATURATION = 0.92, 0.08, 0.10

MONO_LIGHT_SAT_SCALE = 0.30
MONO_LIGHT_LIGHTNESS = 0.93
MONO_DARK_DROP = 0.15
MONO_DARK_FLOOR = 0.15


@dataclass(frozen=True)
class Color:
    """8-bit sRGB color; `hsl` keeps the exact HSL a color was built from

    Colors built from HSL remember their defining hue, saturation and lightness so
    that hue identity survives 8-bit quantization of low-saturation shades.
    """

    r: int
    g: int
    b: int
    hsl_exact: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        for ch in (self.r, self.g, self.b):
            if not (isinstance(ch, (int, np.integer)) and 0 <= ch <= 255):
                raise ValueError(f"channel out of range: {ch}")

    @classmethod
    def from_hex(cls, text: str) -> "Color":
        s = text.strip().lstrip("#")
        if len(s) != 6:
            raise ValueError(f"not a #RRGGBB color: {text!r}")
        return cls(int(s[0:2], 16), int(s[2:4], 16), int(s[4:6], 16))

    @classmethod
    def from_hsl(cls, hue: float, saturation: float, lightness: float) -> "Color":
        hue = hue % 360.0
        saturation = min(max(saturation, 0.0), 1.0)
        lightness = min(max(lightness, 0.0), 1.0)
        r, g, b = colorsys.hls_to_rgb(hue / 360.0, lightness, saturation)
        return cls(round(r * 255), round(g * 255), round(b * 255), (hue, saturation, lightness))

    @property
    def hex(self) -> str:
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}"

    @property
    def hsl(self) -> tuple:
        """(hue degrees in [0, 360), saturation, lightness)"""
        if self.hsl_exact is not None:
            return self.hsl_exact
        return rgb_to_hsl(self.r, self.g, self.b)

    @property
    def hue(self):
        return self.hsl[0]

    @property
    def saturation(self):
        return self.hsl[1]

    @property
    def lightness(self):
        return self.hsl[2]

    def __str__(self):
        return self.hex


def rgb_to_hsl(r: int, g: int, b: int) -> tuple:
    h, l, s = colorsys.rgb_to_hls(r / 255.0, g / 255.0, b / 255.0)
    return ((h * 360.0) % 360.0, s, l)


def _linear(c: int) -> float:
    s = c / 255.0
    return s / 12.92 if s <= 0.04045 else ((s + 0.055) / 1.055) ** 2.4


def relative_luminance(c: Color) -> float:
    return 0.2126 * _linear(c.r) + 0.7152 * _linear(c.g) + 0.0722 * _linear(c.b)


def contrast_ratio(c1: Color, c2: Color) -> float:
    l1, l2 = relative_luminance(c1), relative_luminance(c2)
    hi, lo = max(l1, l2), min(l1, l2)
    return (hi + 0.05) / (lo + 0.05)


# -- theme extraction -----------------------------------------------------

def _image_rgb(image) -> np.ndarray:
    if isinstance(image, (bytes, bytearray)):
        image = Image.open(io.BytesIO(image))
    im = image.convert("RGBA")
    arr = np.asarray(im, dtype=np.float64).reshape(-1, 4)
    # transparent pixels are background, not brand color
    arr = arr[arr[:, 3] >= 128]
    return arr[:, :3]


def _rgb_to_hsl_array(rgb: np.ndarray) -> tuple:
    x = rgb / 255.0
    mx, mn = x.max(axis=1), x.min(axis=1)
    light = (mx + mn) / 2
    delta = mx - mn
    denom = 1 - np.abs(2 * light - 1)
    sat = np.where(delta > 0, delta / np.where(denom > 0, denom, 1), 0.0)
    r, g, b = x[:, 0], x[:, 1], x[:, 2]
    safe = np.where(delta > 0, delta, 1)
    hue = np.where(mx == r, ((g - b) / safe) % 6,
                   np.where(mx == g, (b - r) / safe + 2, (r - g) / safe + 4)) * 60.0
    hue = np.where(delta > 0, hue, 0.0) % 360.0
    return hue, np.clip(sat, 0, 1), light


def dominant_color(image) -> Optional[Color]:
    """centroid of the most populous 12x4x4 HSL bin after dropping near-white,
    near-black and near-grey pixels; None when nothing survives the filter"""
    rgb = _image_rgb(image)
    if rgb.size == 0:
        return None
    hue, sat, light = _rgb_to_hsl_array(rgb)
    keep = (light <= MAX_LIGHTNESS) & (light >= MIN_LIGHTNESS) & (sat >= MIN_SATURATION)
    if not keep.any():
        return None
    rgb, hue, sat, light = rgb[keep], hue[keep], sat[keep], light[keep]
    hb = np.minimum((hue / (360.0 / HUE_BINS)).astype(int), HUE_BINS - 1)
    sb = np.minimum((sat * SAT_BINS).astype(int), SAT_BINS - 1)
    lb = np.minimum((light * LIGHT_BINS).astype(int), LIGHT_BINS - 1)
    bins = (hb * SAT_BINS + sb) * LIGHT_BINS + lb
    counts = np.bincount(bins, minlength=HUE_BINS * SAT_BINS * LIGHT_BINS)
    best = int(np.argmax(counts))  # lowest index wins ties
    centroid = rgb[bins == best].mean(axis=0)
    r, g, b = (int(v) for v in np.floor(centroid + 0.5))
    return Color(r, g, b)


@dataclass
class ThemeChoice:
    color: Color
    source: str  # affiliation_logo | key_visual | default | vlm
    warnings: list = field(default_factory=list)
    suitability_score: Optional[float] = None


def extract_theme_color(logo=None, key_visual=None, default: str = DEFAULT_THEME) -> ThemeChoice:
    for source, image in (("affiliation_logo", logo), ("key_visual", key_visual)):
        if image is None:
            continue
        c = dominant_color(image)
        if c is not None:
            return ThemeChoice(c, source)
        log.warning("%s: every pixel filtered out", source)
    msg = f"no usable theme color in logo or key visual; using default {default}"
    log.warning(msg)
    return ThemeChoice(Color.from_hex(default), "default", [msg])


def extract_theme_color_vlm(logo: bytes, gw) -> ThemeChoice:
    from .. import prompts

    req = gw.request("color", prompts.theme_color(logo), "json:theme_color")
    value = gw.complete_json(req, "theme_color")
    score = value.get("suitability_score")
    log.info("theme color %s suitability %s", value["extracted_color"], score)
    return ThemeChoice(Color.from_hex(value["extracted_color"]), "vlm", [], score)


def adjust_theme_color(c: Color) -> Color:
    """tone down very bright or saturated colors by 20% lightness; lift very dark ones"""
    h, s, l = c.hsl
    if l > 0.85 or s > 0.90:
        return Color.from_hsl(h, s, l * 0.80)
    if l < 0.25:
        return Color.from_hsl(h, s, l + 0.10)
    return c


# -- palette --------------------------------------------------------------

@dataclass(frozen=True)
class ColorPalette:
    theme: Color
    mono_light: Color
    mono_dark: Color
    accent: Color
    text_primary: Color = Color.from_hex(TEXT_PRIMARY)
    background: Color = Color.from_hex(BACKGROUND)

    def roles(self) -> dict:
        return {"theme": self.theme, "mono_light": self.mono_light, "mono_dark": self.mono_dark,
                "accent": self.accent, "text_primary": self.text_primary, "background": self.background}

    def to_dict(self) -> dict:
        roles = self.roles()
        return {
            "colors": {k: v.hex for k, v in roles.items()},
            "contrast": {a: {b: round(contrast_ratio(ca, cb), 3) for b, cb in roles.items()}
                         for a, ca in roles.items()},
        }


def palette_violations(p: ColorPalette) -> list:
    checks = [
        ("text_primary", "background"), ("text_primary", "mono_light"),
        ("accent", "background"), ("accent", "mono_light"),
        ("theme", "background"), ("theme", "mono_light"),
    ]
    roles = p.roles()
    out = []
    for fg, bg in checks:
        ratio = contrast_ratio(roles[fg], roles[bg])
        if ratio < MIN_CONTRAST:
            out.append(f"{fg} on {bg}: {ratio:.2f} < {MIN_CONTRAST}")
    return out


def _darken_until(c: Color, against) -> Color:
    h, s, l = c.hsl
    while any(contrast_ratio(c, bg) < MIN_CONTRAST for bg in against):
        l = round(l - DARKEN_STEP, 10)
        if l < LIGHTNESS_FLOOR:
            raise PaletteError(f"cannot reach {MIN_CONTRAST}:1 contrast for hue {h:.1f}")
        c = Color.from_hsl(h, s, l)
    return c


def derive_palette(theme: Color) -> ColorPalette:
    """monochromatic light/dark shades, complementary accent, all contrast-checked

    theme and accent are darkened in 0.02 lightness steps until they read at
    4.5:1 on both white and the light tint (theme also carries white header text).
    """
    h, s, l = theme.hsl
    white = Color.from_hex(BACKGROUND)
    mono_light = Color.from_hsl(h, s * MONO_LIGHT_SAT_SCALE, MONO_LIGHT_LIGHTNESS)
    mono_dark = Color.from_hsl(h, s, max(MONO_DARK_FLOOR, l - MONO_DARK_DROP))
    themed = _darken_until(Color.from_hsl(h, s, l) if theme.hsl_exact is None else theme,
                           (white, mono_light))
    accent = _darken_until(Color.from_hsl(h + 180.0, min(1.0, s + 0.10), l), (white, mono_light))
    text = Color.from_hex(TEXT_PRIMARY)
    if contrast_ratio(text, mono_light) < MIN_CONTRAST:
        raise PaletteError("text color unreadable on the light tint")
    p = ColorPalette(themed, mono_light, mono_dark, accent, text, white)
    problems = palette_violations(p)
    if problems:
        raise PaletteError("; ".join(problems))
    return p
