"""Paper bundle loading and the parser-agent extractions.

Bundle layout on disk:

    <bundle>/paper.md
    <bundle>/assets/manifest.tsv     id, kind, file, caption (tab separated, header row)
    <bundle>/assets/*.png
    <bundle>/logos/affiliation.png   optional
    <bundle>/logos/conference.png    optional
"""

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from PIL import Image, UnidentifiedImageError

from . import prompts
from .errors import ExtractionError, InputError

log = logging.getLogger(__name__)

MAX_SECTION_WORDS = 1000
MAX_ABT_SENTENCES = 2
SECTION_TYPES = ("foundation", "method", "evaluation")
VISUAL_CATEGORIES = ("problem_illustration", "method_workflow", "main_results",
                     "comparative_results", "supporting")
MANIFEST_FIELDS = ("id", "kind", "file", "caption")

_SURNAME_PARTICLES = {"van", "von", "der", "den", "de", "da", "di", "del", "du", "le", "la", "dos"}
_AFFILIATION = re.compile(
    r"@|\b(university|institute|department|dept\.|laboratory|lab|school|college|inc\.|corp)\b", re.I
)
_AUTHOR_SHAPE = re.compile(r"^(?:[^\W\d_]\.(?:-[^\W\d_]\.)?)+(?: [^\W\d_][\w'’\-]*)+$")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")


@dataclass
class VisualAsset:
    id: str
    kind: str  # figure | table | logo
    width_px: int
    height_px: int
    caption: str = ""
    pixels: bytes = b""  # PNG-encoded

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError(f"asset {self.id}: dimensions must be positive")

    @property
    def aspect_ratio(self) -> float:
        return self.width_px / self.height_px


@dataclass
class PaperBundle:
    markdown_text: str
    assets: dict
    affiliation_logo: Optional[VisualAsset] = None
    conference_logo: Optional[VisualAsset] = None
    name: str = ""

    def __post_init__(self):
        if not self.markdown_text.strip():
            raise InputError("paper text is empty")
        for key, asset in self.assets.items():
            if key != asset.id:
                raise InputError(f"asset map key {key} does not match id {asset.id}")


@dataclass
class TitleAuthors:
    title: str
    authors: str


@dataclass
class AbtNarrative:
    and_part: str
    but_part: str
    therefore_part: str
    poster_hook: str
    key_impact: str
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"and": self.and_part, "but": self.but_part, "therefore": self.therefore_part,
                "poster_hook": self.poster_hook, "key_impact": self.key_impact}


@dataclass
class StructuredSection:
    section_name: str
    section_type: str
    content: str
    key_points: list = field(default_factory=list)
    importance: str = "medium"
    contains_figures: list = field(default_factory=list)
    contains_tables: list = field(default_factory=list)

    def to_dict(self):
        return {
            "section_name": self.section_name, "section_type": self.section_type,
            "content": self.content, "key_points": list(self.key_points),
            "importance": self.importance, "contains_figures": list(self.contains_figures),
            "contains_tables": list(self.contains_tables),
        }


@dataclass
class VisualClassification:
    key_visual: Optional[str]
    problem_illustration: list = field(default_factory=list)
    method_workflow: list = field(default_factory=list)
    main_results: list = field(default_factory=list)
    comparative_results: list = field(default_factory=list)
    supporting: list = field(default_factory=list)

    def to_dict(self):
        d = {"key_visual": self.key_visual}
        d.update({c: list(getattr(self, c)) for c in VISUAL_CATEGORIES})
        return d

    def all_ids(self) -> list:
        ids = [self.key_visual] if self.key_visual else []
        for c in VISUAL_CATEGORIES:
            ids.extend(getattr(self, c))
        return ids


# -- loading --------------------------------------------------------------

def decode_image(data: bytes, label: str) -> tuple:
    """(png_bytes, width, height); non-PNG input is re-encoded as PNG"""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            w, h = im.size
            if im.format == "PNG":
                return data, w, h
            buf = io.BytesIO()
            im.save(buf, format="PNG")
            return buf.getvalue(), w, h
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise InputError(f"asset {label}: image could not be decoded ({e})") from e


def _load_logo(path: Path, ident: str) -> Optional[VisualAsset]:
    if not path.exists():
        return None
    png, w, h = decode_image(path.read_bytes(), ident)
    return VisualAsset(ident, "logo", w, h, "", png)


def read_manifest(path: Path) -> list:
    rows = []
    reader = csv.DictReader(io.StringIO(path.read_text(encoding="utf-8")), delimiter="\t")
    if reader.fieldnames is None or tuple(reader.fieldnames[:4]) != MANIFEST_FIELDS:
        raise InputError(f"{path}: header must be {' / '.join(MANIFEST_FIELDS)}")
    for lineno, row in enumerate(reader, 2):
        if not row["id"] or row["id"].startswith("#"):
            continue
        if row["kind"] not in ("figure", "table"):
            raise InputError(f"{path}:{lineno}: asset kind must be figure or table, got {row['kind']!r}")
        rows.append(row)
    return rows


def load_bundle(path) -> PaperBundle:
    root = Path(path)
    paper = root / "paper.md"
    if not paper.is_file():
        raise InputError(f"{root}: paper.md not found")
    assets = {}
    manifest = root / "assets" / "manifest.tsv"
    if manifest.exists():
        for row in read_manifest(manifest):
            ident = row["id"]
            if ident in assets:
                raise InputError(f"asset {ident}: duplicate id in manifest")
            file = root / "assets" / row["file"]
            if not file.is_file():
                raise InputError(f"asset {ident}: file not found")
            png, w, h = decode_image(file.read_bytes(), ident)
            assets[ident] = VisualAsset(ident, row["kind"], w, h, row.get("caption") or "", png)
    return PaperBundle(
        paper.read_text(encoding="utf-8"),
        assets,
        _load_logo(root / "logos" / "affiliation.png", "affiliation_logo"),
        _load_logo(root / "logos" / "conference.png", "conference_logo"),
        root.name,
    )


# -- validators -----------------------------------------------------------

def word_count(text: str) -> int:
    return len(text.split())


def sentence_count(text: str) -> int:
    text = text.strip()
    if not text:
        return 0
    n = len(_SENTENCE_END.findall(text))
    # trailing fragment without terminal punctuation is a sentence too
    return n if text[-1] in ".!?" else n + 1


def to_initials(name: str) -> str:
    tokens = name.replace(".", ". ").split()
    if len(tokens) < 2:
        return name.strip()
    cut = len(tokens) - 1
    while cut > 1 and tokens[cut - 1].lower() in _SURNAME_PARTICLES:
        cut -= 1
    given, surname = tokens[:cut], tokens[cut:]
    initials = []
    for tok in given:
        for part in tok.split("-"):
            part = part.strip(".")
            if part:
                initials.append(part[0].upper() + ".")
    return "".join(initials) + " " + " ".join(surname)


def normalize_authors(authors: str) -> str:
    names = [n.strip() for n in re.split(r",|;|\band\b|&", authors) if n.strip()]
    return ", ".join(to_initials(n) for n in names)


def author_violations(authors: str) -> list:
    out = []
    if _AFFILIATION.search(authors):
        out.append(f"authors contain affiliation or email text: {authors!r}")
    for name in authors.split(", "):
        if not _AUTHOR_SHAPE.match(name.strip()):
            out.append(f"author {name!r} is not in initials-then-surname form")
    return out


def narrative_violations(value: dict) -> list:
    keys = ("and", "but", "therefore", "poster_hook", "key_impact")
    return [f"{k} is empty" for k in keys if not str(value.get(k, "")).strip()]


def narrative_warnings(n: AbtNarrative) -> list:
    out = []
    for label, text in (("and", n.and_part), ("but", n.but_part), ("therefore", n.therefore_part)):
        count = sentence_count(text)
        if count > MAX_ABT_SENTENCES:
            out.append(f"{label} has {count} sentences > {MAX_ABT_SENTENCES}")
    return out


def section_violations(sections, asset_ids, max_words=MAX_SECTION_WORDS) -> list:
    out = []
    for s in sections:
        name = s["section_name"] if isinstance(s, dict) else s.section_name
        content = s["content"] if isinstance(s, dict) else s.content
        n = word_count(content)
        if n > max_words:
            out.append(f"{name}: {n} words exceeds {max_words}")
        refs = (s.get("contains_figures", []) + s.get("contains_tables", [])) if isinstance(s, dict) \
            else list(s.contains_figures) + list(s.contains_tables)
        for ref in refs:
            if ref not in asset_ids:
                out.append(f"{name}: references unknown asset {ref}")
    return out


def partition_violations(value, asset_ids) -> list:
    if isinstance(value, VisualClassification):
        value = value.to_dict()
    seen = {}
    key = value.get("key_visual")
    if key is not None:
        seen[key] = 1
    for cat in VISUAL_CATEGORIES:
        for ident in value.get(cat, []):
            seen[ident] = seen.get(ident, 0) + 1
    out = []
    for ident, n in seen.items():
        if ident not in asset_ids:
            out.append(f"{ident} is not a bundle asset")
        elif n > 1:
            out.append(f"{ident} appears {'twice' if n == 2 else f'{n} times'}")
    out.extend(f"{ident} missing from classification" for ident in asset_ids if ident not in seen)
    return out


# -- extractions ----------------------------------------------------------

def extract_title_authors(bundle: PaperBundle, gw) -> TitleAuthors:
    req = gw.request("parser_title", prompts.title_authors(bundle.markdown_text), "json:title_authors")

    def check(value):
        raw = value["authors"]
        out = []
        # normalizing can mangle an email into initials, so screen the raw string too
        if _AFFILIATION.search(raw):
            out.append(f"authors contain affiliation or email text: {raw!r}")
        return out + [v for v in author_violations(normalize_authors(raw)) if v not in out]

    value = gw.complete_json(req, "title_authors", check=check, error_cls=ExtractionError)
    return TitleAuthors(value["title"].strip(), normalize_authors(value["authors"]))


def extract_narrative(bundle: PaperBundle, gw) -> AbtNarrative:
    req = gw.request("parser_narrative", prompts.narrative(bundle.markdown_text), "json:narrative")
    value = gw.complete_json(req, "narrative", check=narrative_violations, error_cls=ExtractionError)
    n = AbtNarrative(value["and"].strip(), value["but"].strip(), value["therefore"].strip(),
                     value["poster_hook"].strip(), value["key_impact"].strip())
    n.warnings = narrative_warnings(n)
    for w in n.warnings:
        log.warning("narrative: %s", w)
    return n


def extract_sections(bundle: PaperBundle, gw, max_words: int = MAX_SECTION_WORDS) -> list:
    req = gw.request("parser_sections", prompts.sections(bundle.markdown_text, max_words), "json:sections")
    ids = set(bundle.assets)
    value = gw.complete_json(
        req, "sections",
        check=lambda v: section_violations(v["paper_sections"], ids, max_words),
        error_cls=ExtractionError,
    )
    return [
        StructuredSection(
            s["section_name"], s["section_type"], s["content"], list(s.get("key_points", [])),
            s.get("importance", "medium"), list(s.get("contains_figures", [])),
            list(s.get("contains_tables", [])),
        )
        for s in value["paper_sections"]
    ]


def classify_visuals(bundle: PaperBundle, gw) -> VisualClassification:
    if not bundle.assets:
        raise ExtractionError("cannot classify visuals: bundle has no assets")
    assets = [bundle.assets[k] for k in sorted(bundle.assets)]
    req = gw.request("parser_visuals", prompts.visuals(assets), "json:visuals")
    ids = set(bundle.assets)
    value = gw.complete_json(req, "visuals", check=lambda v: partition_violations(v, ids),
                             error_cls=ExtractionError)
    return VisualClassification(value["key_visual"], *(list(value[c]) for c in VISUAL_CATEGORIES))
