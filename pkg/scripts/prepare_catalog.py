#!/usr/bin/env python3
"""Convert a delimited event table into a pot-tailrisk catalog file.

Reads a CSV/TSV export (for example a spreadsheet of per-event records),
keeps rows whose severity column is an integer >= 1, and writes either
``col1`` (one severity per line) or ``col2`` (``severity<TAB>tag``)
output. Prints counts and the SHA-256 of the written file so the input
of every later run can be checked against it.

Example::

    python scripts/prepare_catalog.py events.csv catalog.tsv \\
        --severity-column deaths --tag-column date
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from collections import Counter


def _column(header: list[str] | None, spec: str) -> int:
    if spec.isdigit():
        return int(spec)
    if header is None or spec not in header:
        raise SystemExit(f"column {spec!r} not found; header is {header}")
    return header.index(spec)


def _severity(text: str) -> int | None:
    text = text.strip().replace(",", "")
    try:
        value = float(text)
    except ValueError:
        return None
    if value != int(value) or value < 1:
        return None
    return int(value)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("source", help="delimited input file")
    parser.add_argument("dest", help="catalog file to write")
    parser.add_argument("--severity-column", default="0", help="column name or 0-based index (default 0)")
    parser.add_argument("--tag-column", default=None, help="column name or index; selects col2 output")
    parser.add_argument("--delimiter", default=None, help="field separator (sniffed when omitted)")
    parser.add_argument("--no-header", action="store_true", help="first row is data")
    args = parser.parse_args(argv)

    with open(args.source, newline="", encoding="utf-8-sig") as fh:
        sample = fh.read(65536)
        fh.seek(0)
        delimiter = args.delimiter or csv.Sniffer().sniff(sample, delimiters=",\t;|").delimiter
        rows = list(csv.reader(fh, delimiter=delimiter))
    header = None if args.no_header else rows.pop(0)
    sev_col = _column(header, args.severity_column)
    tag_col = None if args.tag_column is None else _column(header, args.tag_column)

    kept, skipped = [], Counter()
    for row in rows:
        if sev_col >= len(row):
            skipped["short row"] += 1
            continue
        value = _severity(row[sev_col])
        if value is None:
            skipped["severity missing, non-integer or < 1"] += 1
            continue
        if tag_col is None:
            kept.append(f"{value}\n")
        else:
            tag = row[tag_col].replace("\t", " ").strip() if tag_col < len(row) else ""
            kept.append(f"{value}\t{tag}\n")

    blob = "".join(kept).encode("utf-8")
    with open(args.dest, "wb") as fh:
        fh.write(blob)
    print(f"wrote {len(kept)} events to {args.dest} ({'col1' if tag_col is None else 'col2'})")
    for reason, count in sorted(skipped.items()):
        print(f"skipped {count} rows: {reason}")
    print(f"sha256 {hashlib.sha256(blob).hexdigest()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
