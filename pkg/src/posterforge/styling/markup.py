"""Line-level markup used in storyboard text.

Grammar (one line at a time):
    "* text"          level-0 bullet
    "   - text"       level-1 bullet (any leading whitespace, also "  * text")
    "**bold**"        bold run
    "*italic*"        italic run
Unterminated markers are literal text, so parsing never fails.
"""

import re
from typing import NamedTuple

BULLET_GLYPHS = {"primary": "• ", "secondary": "– "}

_PRIMARY = re.compile(r"^\* ")
_SECONDARY = re.compile(r"^(?:\s*[-–] |\s+\* )")
_INLINE = re.compile(
    r"\*\*(?P<bold>[^*]+?)\*\*"
    r"|(?<!\*)\*(?=\S)(?P<italic>[^*]+?)(?<=\S)\*(?!\*)"
)


class MarkupRun(NamedTuple):
    text: str
    bold: bool
    italic: bool
    level: int
    bullet: str  # "primary" | "secondary" | ""


class ParsedLine(NamedTuple):
    bullet: str
    level: int
    runs: list

    @property
    def prefix(self) -> str:
        return BULLET_GLYPHS.get(self.bullet, "")

    @property
    def plain(self) -> str:
        """display text: bullet glyph plus run text, markers removed"""
        return self.prefix + "".join(r.text for r in self.runs)


def split_bullet(line: str) -> tuple:
    m = _PRIMARY.match(line)
    if m:
        return "primary", 0, line[m.end():]
    m = _SECONDARY.match(line)
    if m:
        return "secondary", 1, line[m.end():]
    return "", 0, line


def parse_line(line: str) -> ParsedLine:
    bullet, level, body = split_bullet(line)
    runs = []

    def emit(text, bold=False, italic=False):
        if not text:
            return
        if runs and not bold and not italic and not runs[-1].bold and not runs[-1].italic:
            runs[-1] = runs[-1]._replace(text=runs[-1].text + text)
        else:
            runs.append(MarkupRun(text, bold, italic, level, bullet))

    pos = 0
    for m in _INLINE.finditer(body):
        emit(body[pos:m.start()])
        if m.group("bold") is not None:
            emit(m.group("bold"), bold=True)
        else:
            emit(m.group("italic"), italic=True)
        pos = m.end()
    emit(body[pos:])
    return ParsedLine(bullet, level, runs)


def parse_markup(line: str) -> list:
    """list of MarkupRun for one line; each run carries the line's bullet level"""
    return parse_line(line).runs


def to_markup(parsed: ParsedLine) -> str:
    lead = {"primary": "* ", "secondary": "   - "}.get(parsed.bullet, "")
    body = []
    for r in parsed.runs:
        if r.bold:
            body.append(f"**{r.text}**")
        elif r.italic:
            body.append(f"*{r.text}*")
        else:
            body.append(r.text)
    return lead + "".join(body)


def block_text(lines) -> str:
    """the display string a text block is measured and rendered from"""
    return "\n".join(parse_line(line).plain for line in lines)
