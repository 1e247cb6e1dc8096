"""Delimited output: ``T,k,delta`` blocks preceded by ``# key=value, ...`` headers."""

import math

COLUMNS = "T,k,delta"


class SeriesParseError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


def fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def format_header(fields):
    return "# " + ", ".join(f"{k}={fmt(v)}" for k, v in fields.items())


def parse_header(line):
    """Inverse of :func:`format_header`; lines without ``=`` give an empty dict."""
    body = line.lstrip("#").strip()
    out = {}
    for item in body.split(", "):
        key, sep, value = item.partition("=")
        if sep:
            out[key.strip()] = value.strip()
    return out


def write_block(fh, header_lines, records):
    for h in header_lines:
        fh.write(format_header(h) + "\n")
    fh.write(COLUMNS + "\n")
    for T, k, d in records:
        fh.write(f"{T},{k},{d:.17g}\n")


def read_blocks(path):
    """Parse a series file into ``[(header_dict, [(T, k, delta), ...]), ...]``.

    Header dicts of consecutive comment lines are merged.  A file without
    any data rows is an error.
    """
    blocks = []
    header, rows, in_data = {}, None, False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if in_data:
                    blocks.append((header, rows))
                    header, rows, in_data = {}, None, False
                header.update(parse_header(line))
                continue
            if line == COLUMNS:
                if rows is not None and in_data:
                    blocks.append((header, rows))
                    header = {}
                rows, in_data = [], True
                continue
            if rows is None:
                raise SeriesParseError(path, lineno, f"data before the '{COLUMNS}' column line")
            parts = line.split(",")
            if len(parts) != 3:
                raise SeriesParseError(path, lineno, f"expected 3 columns, found {len(parts)}")
            try:
                T, k, d = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise SeriesParseError(path, lineno, str(exc)) from None
            if T < 1 or k < 1 or not math.isfinite(d):
                raise SeriesParseError(path, lineno, "T and k must be positive, delta finite")
            rows.append((T, k, d))
    if rows is not None:
        blocks.append((header, rows))
    if not any(rows for _, rows in blocks):
        raise SeriesParseError(path, 0, "no data rows")
    return blocks
