"""Wide-format indicator CSV I/O and the bundled paper fixtures.

The wide layout is one row per series: a ``Series Name`` column followed by
one column per year, as produced by World Bank Databank exports.
"""

import csv
import io
import math
import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError

__all__ = [
    "TimeSeries",
    "ReferenceMatrix",
    "ListedExpansion",
    "Claim",
    "parse_number",
    "parse_wide_csv",
    "parse_reference_csv",
    "write_wide_csv",
    "load_fixture",
    "fixture_path",
    "resolve_label",
    "FIXTURES",
]

FIXTURES = {
    "table1": "table1.csv",
    "table2": "table2.csv",
    "table3": "table3.csv",
    "listings": "listings.csv",
    "discussion": "discussion.csv",
}

FIXTURE_ENV = "TAUCOV_FIXTURE_DIR"

_NUMBER = {
    False: re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"),
    True: re.compile(r"[+-]?(?:\d+(?:,\d*)?|,\d+)(?:[eE][+-]?\d+)?"),
}
_YEAR = re.compile(r"(\d{1,4})(?:\s*\[YR\d+\])?")


@dataclass(frozen=True)
class TimeSeries:
    label: str
    years: tuple
    values: tuple

    def __post_init__(self):
        years = tuple(int(y) for y in self.years)
        values = tuple(float(v) for v in self.values)
        if len(years) != len(values):
            raise DomainError(f"{self.label!r}: {len(years)} years but {len(values)} values")
        if len(years) < 2:
            raise DomainError(f"{self.label!r}: need at least 2 observations")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise DomainError(f"{self.label!r}: years must be strictly increasing")
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"{self.label!r}: values must be finite")
        object.__setattr__(self, "label", str(self.label).strip())
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def consecutive(self):
        return all(b - a == 1 for a, b in zip(self.years, self.years[1:]))

    def as_array(self):
        return np.array(self.values, dtype=float)

    def value_at(self, year):
        try:
            return self.values[self.years.index(int(year))]
        except ValueError:
            raise DomainError(f"{self.label!r} has no observation for {year}") from None


@dataclass(frozen=True)
class ReferenceMatrix:
    """A labelled square matrix stored verbatim; symmetry is not assumed."""

    labels: tuple
    entries: np.ndarray
    source: str = "user_file"

    def __post_init__(self):
        labels = tuple(str(s).strip() for s in self.labels)
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"reference matrix must be square, got shape {entries.shape}")
        if entries.shape[0] != len(labels):
            raise DomainError("label count does not match matrix dimension")
        entries.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "entries", entries)

    def index(self, label):
        return self.labels.index(resolve_label(label, self.labels))

    def get(self, row, col):
        return float(self.entries[self.index(row), self.index(col)])

    def asymmetric_pairs(self):
        """Unordered pairs (i < j) whose two printed cells differ."""
        n = len(self.labels)
        return [
            (self.labels[i], self.labels[j], float(self.entries[i, j]), float(self.entries[j, i]))
            for i in range(n)
            for j in range(i + 1, n)
            if self.entries[i, j] != self.entries[j, i]
        ]


@dataclass(frozen=True)
class ListedExpansion:
    """A Hermite expansion printed in the source publication, with its header."""

    label: str
    header: str
    coefficients: tuple


@dataclass(frozen=True)
class Claim:
    """A pairwise coefficient quoted in running text rather than in a table."""

    method: str
    label_a: str
    label_b: str
    value: float


def resolve_label(name, labels):
    """Exact match after whitespace trimming, else a unique prefix match."""
    name = str(name).strip()
    if name in labels:
        return name
    hits = [lab for lab in labels if lab.startswith(name)]
    if len(hits) == 1:
        return hits[0]
    if not hits:
        raise DomainError(f"no series matches {name!r}")
    raise DomainError(f"{name!r} is ambiguous: matches {hits}")


def parse_number(text, decimal_comma=False, row=None, column=None):
    """Parse one numeric cell; ``decimal_comma`` accepts ``1,19814E+11``."""
    s = text.strip()
    if not _NUMBER[bool(decimal_comma)].fullmatch(s):
        raise DataError(f"cannot parse number {text!r}", row, column)
    if decimal_comma:
        s = s.replace(",", ".")
    value = float(s)
    if not math.isfinite(value):
        raise DataError(f"number out of range {text!r}", row, column)
    return value


def _decode(data):
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data.lstrip("﻿")


def _sniff_delimiter(header, decimal_comma):
    for delim in (";", "\t", ","):
        if delim in header:
            break
    else:
        delim = ","
    if decimal_comma and delim == ",":
        raise DataError("decimal-comma input needs ';' or tab field separators", 1)
    return delim


def _read_rows(data, decimal_comma, delimiter):
    text = _decode(data)
    first = text.splitlines()[0] if text.strip() else ""
    delim = delimiter or _sniff_delimiter(first, decimal_comma)
    rows = [
        (lineno, row)
        for lineno, row in enumerate(csv.reader(io.StringIO(text), delimiter=delim), start=1)
        if any(cell.strip() for cell in row)
    ]
    return rows


def _parse_years(header):
    years = []
    for col, cell in enumerate(header[1:], start=2):
        m = _YEAR.fullmatch(cell.strip())
        if not m:
            raise DataError(f"header cell {cell!r} is not a year", 1, col)
        years.append(int(m.group(1)))
    for col, (a, b) in enumerate(zip(years, years[1:]), start=3):
        if b <= a:
            raise DataError(f"years not strictly increasing ({a} then {b})", 1, col)
    return years


def parse_wide_csv(data, decimal_comma=False, delimiter=None):
    """Parse wide-format CSV text or bytes into a list of :class:`TimeSeries`."""
    rows = _read_rows(data, decimal_comma, delimiter)
    if not rows:
        return []
    _, header = rows[0]
    if not header or header[0].strip() != "Series Name":
        raise DataError("first header cell must be 'Series Name'", 1, 1)
    years = _parse_years(header)
    if len(years) < 2:
        raise DataError("need at least two year columns", 1)

    out, seen = [], {}
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, found {len(row)}", lineno)
        label = row[0].strip()
        if not label:
            raise DataError("empty series label", lineno, 1)
        if label in seen:
            raise DataError(f"duplicate label {label!r} (first on row {seen[label]})", lineno, 1)
        seen[label] = lineno
        values = [
            parse_number(cell, decimal_comma, lineno, col)
            for col, cell in enumerate(row[1:], start=2)
        ]
        out.append(TimeSeries(label, years, values))
    return out


def parse_reference_csv(data, decimal_comma=False, delimiter=None, source="user_file"):
    """Parse a labelled square matrix: corner cell, column labels, then rows."""
    rows = _read_rows(data, decimal_comma, delimiter)
    if not rows:
        raise DataError("empty reference matrix")
    _, header = rows[0]
    labels = [c.strip() for c in header[1:]]
    if len(rows) - 1 != len(labels):
        raise DataError(f"{len(labels)} column labels but {len(rows) - 1} rows")
    entries = []
    for i, (lineno, row) in enumerate(rows[1:]):
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, found {len(row)}", lineno)
        if row[0].strip() != labels[i]:
            raise DataError(f"row label {row[0]!r} does not match column {labels[i]!r}", lineno, 1)
        entries.append([
            parse_number(cell, decimal_comma, lineno, col)
            for col, cell in enumerate(row[1:], start=2)
        ])
    return ReferenceMatrix(labels, entries, source)


def format_float(value):
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(value))


def write_wide_csv(series):
    """Serialize series (sharing one year grid) as comma-separated, dot-decimal CSV."""
    series = list(series)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    years = series[0].years if series else ()
    if any(s.years != years for s in series):
        raise DomainError("all series must share the same year grid")
    writer.writerow(["Series Name", *years])
    for s in series:
        writer.writerow([s.label, *(format_float(v) for v in s.values)])
    return buf.getvalue()


def fixture_path(name):
    if name not in FIXTURES:
        raise DomainError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    override = os.environ.get(FIXTURE_ENV)
    if override:
        return Path(override) / FIXTURES[name]
    return resources.files("taucov") / "data" / FIXTURES[name]


def load_fixture(name):
    """Load a bundled table.

    ``table1`` gives the eight indicator series; ``table2``/``table3`` give
    the printed Pearson and tau-covariance matrices exactly as printed;
    ``listings`` and ``discussion`` give the printed Hermite expansions and
    the pairwise values quoted in the running text.
    """
    data = fixture_path(name).read_bytes()
    if name == "table1":
        return parse_wide_csv(data, decimal_comma=True)
    if name in ("table2", "table3"):
        return parse_reference_csv(data, decimal_comma=True, source=f"paper_{name}")
    rows = _read_rows(data, True, None)[1:]
    if name == "listings":
        return [
            ListedExpansion(r[0].strip(), r[1].strip(),
                            tuple(parse_number(c, True, n) for c in r[2:]))
            for n, r in rows
        ]
    return [Claim(r[0].strip(), r[1].strip(), r[2].strip(), parse_number(r[3], True, n))
            for n, r in rows]
