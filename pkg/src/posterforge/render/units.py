"""Inch to EMU and point conversion."""

from ..errors import UnitError

EMU_PER_INCH = 914400
PT_PER_INCH = 72


def to_emu(x: float) -> int:
    if x < 0:
        raise UnitError(f"negative length {x} in")
    return int(round(x * EMU_PER_INCH))


def from_emu(v: int) -> float:
    return v / EMU_PER_INCH


def to_pt(x: float) -> float:
    return x * PT_PER_INCH
