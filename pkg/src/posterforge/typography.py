"""Font specifications and the default typographic scale."""

from dataclasses import dataclass, field, replace

FONT_FAMILY = "Arial"
POINTS_PER_INCH = 72.0


@dataclass(frozen=True)
class FontSpec:
    role: str
    size_pt: float
    weight: str = "regular"
    italic: bool = False
    line_spacing: float = 1.2
    family: str = FONT_FAMILY

    def __post_init__(self):
        if self.size_pt <= 0:
            raise ValueError(f"font size must be positive, got {self.size_pt}")
        if self.line_spacing < 1.0:
            raise ValueError(f"line spacing must be >= 1.0, got {self.line_spacing}")
        if self.weight not in ("regular", "bold"):
            raise ValueError(f"unknown weight {self.weight!r}")

    @property
    def bold(self) -> bool:
        return self.weight == "bold"

    @property
    def line_height_in(self) -> float:
        """one line of this font, in inches"""
        return self.size_pt * self.line_spacing / POINTS_PER_INCH

    def with_size(self, size_pt: float) -> "FontSpec":
        return replace(self, size_pt=size_pt)


def _default_fonts():
    return {
        "title": FontSpec("title", 60, "bold"),
        "authors": FontSpec("authors", 32),
        "heading": FontSpec("heading", 36, "bold"),
        "body": FontSpec("body", 24),
        "caption": FontSpec("caption", 18, italic=True),
    }


@dataclass
class TypographyScheme:
    fonts: dict = field(default_factory=_default_fonts)

    def __post_init__(self):
        missing = {"title", "authors", "heading", "body", "caption"} - set(self.fonts)
        if missing:
            raise ValueError(f"typography scheme missing roles: {sorted(missing)}")
        sizes = {role: font.size_pt for role, font in self.fonts.items()}
        if not sizes["title"] > sizes["heading"] > sizes["body"] >= sizes["caption"]:
            raise ValueError(
                "typographic hierarchy violated: need title > heading > body >= caption, "
                f"got {sizes['title']}/{sizes['heading']}/{sizes['body']}/{sizes['caption']}"
            )

    def __getitem__(self, role: str) -> FontSpec:
        return self.fonts[role]

    @classmethod
    def with_sizes(cls, **sizes):
        fonts = _default_fonts()
        for role, size in sizes.items():
            fonts[role] = fonts[role].with_size(float(size))
        return cls(fonts)
