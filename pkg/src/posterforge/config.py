"""Run configuration: defaults plus a plain-text `key = value` file.

File format: one `section.key = value` per line, `#` starts a comment line.
Values are read as JSON when they parse (numbers, true/false, lists, quoted
strings) and as bare strings otherwise.
"""

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .curator import ContentConstraints
from .errors import ConfigError
from .gateway import GatewayConfig
from .layout.engine import LayoutConfig
from .styling.color import DEFAULT_THEME, Color
from .typography import TypographyScheme

_GATEWAY_KEYS = {"mode", "fixture_path", "endpoint_url", "model_id", "temperature", "retry_budget", "timeout_s"}
_LAYOUT_KEYS = {"canvas_width", "canvas_height", "header_height", "header_padding", "outer_margin",
                "column_gap", "bottom_margin", "epsilon", "newline_offset_ratio", "target_band",
                "status_band", "max_iterations", "logo_width_cap", "logo_gap"}
_TYPO_KEYS = {"title", "authors", "heading", "body", "caption"}
_PALETTE_KEYS = {"theme", "default_theme", "use_vlm"}
_CONSTRAINT_KEYS = {f.name for f in fields(ContentConstraints)}
_OUTPUT_KEYS = {"pptx", "svg", "manifest"}

KNOWN_KEYS = (
    {f"gateway.{k}" for k in _GATEWAY_KEYS} | {f"layout.{k}" for k in _LAYOUT_KEYS}
    | {f"typography.{k}" for k in _TYPO_KEYS} | {f"palette.{k}" for k in _PALETTE_KEYS}
    | {f"constraints.{k}" for k in _CONSTRAINT_KEYS} | {f"output.{k}" for k in _OUTPUT_KEYS}
)


@dataclass
class PaletteOptions:
    theme: Optional[str] = None  # fixed theme color; skips extraction
    default_theme: str = DEFAULT_THEME
    use_vlm: bool = False


@dataclass
class OutputPaths:
    pptx: str = "poster.pptx"
    svg: Optional[str] = "poster.svg"
    manifest: str = "manifest.json"


@dataclass
class RunConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    typography: TypographyScheme = field(default_factory=TypographyScheme)
    palette: PaletteOptions = field(default_factory=PaletteOptions)
    constraints: ContentConstraints = field(default_factory=ContentConstraints)
    output: OutputPaths = field(default_factory=OutputPaths)

    @property
    def fixture_path(self):
        return self.gateway.fixture_path


def parse_config_text(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: missing key")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _num(key, v, kind=float):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    return kind(v)


def build_config(values: dict, env=None) -> RunConfig:
    unknown = sorted(k for k in values if k not in KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")
    groups = {}
    for key, v in values.items():
        section, name = key.split(".", 1)
        groups.setdefault(section, {})[name] = v

    gw = {}
    for k, v in groups.get("gateway", {}).items():
        if k in ("temperature", "timeout_s"):
            v = _num(f"gateway.{k}", v)
        elif k == "retry_budget":
            v = _num(f"gateway.{k}", v, int)
        else:
            v = str(v)
        gw[k] = v
    gateway = replace(GatewayConfig(), **gw)
    if not 0.0 <= gateway.temperature <= 2.0:
        raise ConfigError(f"gateway.temperature {gateway.temperature} outside [0, 2]")
    if gateway.retry_budget < 0:
        raise ConfigError("gateway.retry_budget must be >= 0")
    if gateway.mode not in ("live", "fixture"):
        raise ConfigError(f"gateway.mode must be live or fixture, got {gateway.mode!r}")

    lay = {}
    for k, v in groups.get("layout", {}).items():
        if k in ("target_band", "status_band"):
            if not (isinstance(v, list) and len(v) == 2):
                raise ConfigError(f"layout.{k}: expected [lo, hi]")
            v = tuple(_num(f"layout.{k}", x) for x in v)
        elif k == "max_iterations":
            v = _num(f"layout.{k}", v, int)
        else:
            v = _num(f"layout.{k}", v)
        lay[k] = v
    try:
        layout = LayoutConfig(**lay)
        sizes = {k: _num(f"typography.{k}", v) for k, v in groups.get("typography", {}).items()}
        typography = TypographyScheme.with_sizes(**sizes)
        cons = {k: _num(f"constraints.{k}", v, int) for k, v in groups.get("constraints", {}).items()}
        constraints = ContentConstraints(**cons)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if not (1 <= constraints.min_sections <= constraints.max_sections
            and 0 <= constraints.min_visuals <= constraints.max_visuals and constraints.max_words > 0):
        raise ConfigError(f"inconsistent content constraints: {constraints}")

    pal = dict(groups.get("palette", {}))
    for k in ("theme", "default_theme"):
        if pal.get(k) is not None:
            try:
                Color.from_hex(str(pal[k]))
            except ValueError as e:
                raise ConfigError(f"palette.{k}: {e}") from e
    if "use_vlm" in pal and not isinstance(pal["use_vlm"], bool):
        raise ConfigError("palette.use_vlm: expected true or false")
    palette = PaletteOptions(**pal)
    output = replace(OutputPaths(), **{k: (None if v is None else str(v))
                                       for k, v in groups.get("output", {}).items()})
    cfg = RunConfig(gateway, layout, typography, palette, constraints, output)
    # the environment only ever supplies credentials, checked when a live gateway is built
    if gateway.mode == "live" and not (os.environ if env is None else env).get(gateway.credential_env):
        raise ConfigError(f"live mode requires the {gateway.credential_env} environment variable")
    return cfg


def load_config(path=None, env=None, overrides: dict = None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        values = parse_config_text(text)
    values.update(overrides or {})
    return build_config(values, env)
