"""Regenerate src/posterforge/data/sans_metrics.json from the Helvetica AFM files
shipped with matplotlib (Helvetica and Arial share advance widths).

Run once; the JSON is committed so the package never needs matplotlib at runtime.
"""

import json
from pathlib import Path

import matplotlib
from matplotlib._mathtext_data import uni2type1

AFM_DIR = Path(matplotlib.get_data_path()) / "fonts" / "afm"
VARIANTS = {
    "regular": "phvr8a.afm",
    "bold": "phvb8a.afm",
    "italic": "phvro8a.afm",
    "bold_italic": "phvbo8a.afm",
}
OUT = Path(__file__).resolve().parents[1] / "src" / "posterforge" / "data" / "sans_metrics.json"


def read_widths(path):
    widths = {}
    in_metrics = False
    for line in path.read_text(encoding="latin-1").splitlines():
        if line.startswith("StartCharMetrics"):
            in_metrics = True
            continue
        if line.startswith("EndCharMetrics"):
            break
        if not in_metrics:
            continue
        fields = dict(
            part.strip().split(" ", 1) for part in line.split(";") if part.strip()
        )
        widths[fields["N"]] = int(float(fields["WX"]))
    return widths


def main():
    name_to_uni = {}
    for code, name in uni2type1.items():
        name_to_uni.setdefault(name, code)
    for code in range(0x20, 0x7F):
        # ascii names missing from the table map to themselves
        name_to_uni.setdefault(chr(code), code)

    out = {"family": "Arial", "units_per_em": 1000, "variants": {}}
    for variant, fname in VARIANTS.items():
        widths = read_widths(AFM_DIR / fname)
        table = {}
        for name, wx in widths.items():
            code = name_to_uni.get(name)
            if code is not None:
                table[chr(code)] = wx
        table[" "] = widths["space"]
        avg = round(sum(table.values()) / len(table))
        out["variants"][variant] = {"average": avg, "advances": dict(sorted(table.items()))}
    OUT.write_text(json.dumps(out, ensure_ascii=False, indent=0, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
