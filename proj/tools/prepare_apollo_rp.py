#!/usr/bin/env python3
"""Extract the revealed-preference rows of the Apollo mode-choice CSV.

Keeps rows with RP == 1 and only the columns listed in data/modechoice.dict.md,
in dictionary order, so the result loads with that dictionary.

    python3 tools/prepare_apollo_rp.py apollo_modeChoiceData.csv data/apollo_rp.csv
"""

import argparse
import csv
import pathlib
import re
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def dictionary_columns(path):
    cols = []
    for line in path.read_text().splitlines():
        m = re.match(r"\|\s*([A-Za-z_][A-Za-z0-9_]*)\s*\|\s*(id|availability|attribute|covariate|choice)\s*\|", line)
        if m:
            cols.append(m.group(1))
    return cols


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source")
    ap.add_argument("dest")
    ap.add_argument("--dict", default=str(ROOT / "data" / "modechoice.dict.md"))
    args = ap.parse_args()

    cols = dictionary_columns(pathlib.Path(args.dict))
    with open(args.source, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in cols if c not in reader.fieldnames]
        if missing:
            sys.exit(f"missing columns: {', '.join(missing)}")
        rows = [r for r in reader if "RP" not in r or float(r["RP"]) == 1]
    with open(args.dest, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])
    print(f"{len(rows)} rows -> {args.dest}")


if __name__ == "__main__":
    main()
