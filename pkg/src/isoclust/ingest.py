"""Load delimited expression matrices, drop rows with missing values, z-score per gene."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datamodel import DataMatrix, default_col_ids, default_row_ids

DELIMITERS = ("\t", ",", ";")
MISSING_TOKENS = {"", "na", "nan", "null"}

CONSTANT_ROW_EPS = 1e-12


class ParseError(ValueError):
    """Malformed input table; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyDataError(ValueError):
    """No usable data rows remain."""


@dataclass(frozen=True)
class RawTable:
    """Rectangular numeric grid with NaN marking missing cells."""

    cells: np.ndarray                     # (n, d) float64, NaN = MISSING
    header: tuple[str, ...] | None
    row_labels: tuple[str, ...] | None

    @property
    def n_rows(self) -> int:
        return self.cells.shape[0]

    @property
    def n_cols(self) -> int:
        return self.cells.shape[1]


def _parse_cell(token: str) -> float:
    """Float value of a cell; NaN for missing or non-numeric tokens."""
    if token.strip().lower() in MISSING_TOKENS:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def _is_numeric(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def detect_delimiter(first_line: str) -> str:
    """Majority delimiter among tab/comma/semicolon in the first line; tab wins ties."""
    counts = [(first_line.count(d), -i) for i, d in enumerate(DELIMITERS)]
    best = max(range(len(DELIMITERS)), key=lambda i: counts[i])
    return DELIMITERS[best]


def parse_table(text: str | bytes, delimiter: str | None = None,
                header: bool | None = None) -> RawTable:
    """Parse delimited text into a RawTable.

    delimiter None = auto-detect from the first line. header None = auto:
    a first line with no numeric cell is lifted to a header. The first
    column becomes row labels when its first data cell is non-numeric.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from exc

    lines = text.splitlines()
    rows: list[tuple[int, list[str]]] = []       # (1-based line number, tokens)
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            continue
        if delimiter is None:
            delimiter = detect_delimiter(line)
        rows.append((lineno, line.split(delimiter)))

    if not rows:
        raise ParseError("no data rows")

    width = len(rows[0][1])
    for lineno, tokens in rows:
        if len(tokens) != width:
            raise ParseError(
                f"expected {width} fields, found {len(tokens)}", line=lineno)

    header_labels: tuple[str, ...] | None = None
    if header is None:
        header = not any(_is_numeric(tok) for tok in rows[0][1])
    if header:
        if len(rows) < 2:
            raise ParseError("no data rows below the header")
        header_labels = tuple(tok.strip() for tok in rows[0][1])
        rows = rows[1:]

    label_column = not _is_numeric(rows[0][1][0])
    if label_column and width < 2:
        raise ParseError("label column leaves no data columns",
                         line=rows[0][0])

    row_labels: tuple[str, ...] | None = None
    if label_column:
        row_labels = tuple(tokens[0].strip() for _, tokens in rows)
        if header_labels is not None and len(header_labels) == width:
            header_labels = header_labels[1:]
        cells = [[_parse_cell(tok) for tok in tokens[1:]] for _, tokens in rows]
    else:
        cells = [[_parse_cell(tok) for tok in tokens] for _, tokens in rows]

    return RawTable(
        cells=np.asarray(cells, dtype=np.float64),
        header=header_labels,
        row_labels=row_labels,
    )


def drop_missing_rows(raw: RawTable) -> tuple[DataMatrix, int]:
    """Remove every row with at least one missing cell, preserving order."""
    keep = ~np.any(np.isnan(raw.cells), axis=1)
    dropped = int(raw.n_rows - keep.sum())
    if not keep.any():
        raise EmptyDataError("all rows contain missing values")
    values = raw.cells[keep]
    if raw.row_labels is not None:
        row_ids = tuple(lab for lab, k in zip(raw.row_labels, keep) if k)
    else:
        row_ids = tuple(f"g{i + 1}" for i in np.flatnonzero(keep))
    col_ids = raw.header if raw.header is not None else default_col_ids(raw.n_cols)
    return DataMatrix(values, row_ids, col_ids), dropped


def zscore_rows(data: DataMatrix) -> DataMatrix:
    """Per-row (x - mean) / population-std; near-constant rows become all zeros."""
    if data.n_cols < 2:
        raise ValueError("z-scoring needs at least 2 columns per row")
    values = data.values
    mu = values.mean(axis=1, keepdims=True)
    sigma = values.std(axis=1, keepdims=True)        # population (divide by d)
    constant = sigma < CONSTANT_ROW_EPS
    out = (values - mu) / np.where(constant, 1.0, sigma)
    out[constant[:, 0]] = 0.0
    return data.replace_values(out)


def format_value(x: float) -> str:
    """17 significant digits: lossless for float64 round-trips."""
    return f"{x:.17g}"


def write_table(data: DataMatrix, delimiter: str = "\t",
                include_header: bool = True, include_row_labels: bool = True) -> str:
    """Serialize a DataMatrix in the format parse_table reads back."""
    lines = []
    if include_header:
        head = list(data.col_ids)
        if include_row_labels:
            head = ["id"] + head
        lines.append(delimiter.join(head))
    for i in range(data.n_rows):
        cells = [format_value(v) for v in data.values[i]]
        if include_row_labels:
            cells = [data.row_ids[i]] + cells
        lines.append(delimiter.join(cells))
    return "\n".join(lines) + "\n"


def load_matrix(path, delimiter: str | None = None,
                normalize: bool = False) -> tuple[DataMatrix, int]:
    """File -> parse -> drop missing rows -> optional z-score. Returns (matrix, dropped)."""
    with open(path, "rb") as fh:
        raw = parse_table(fh.read(), delimiter=delimiter)
    data, dropped = drop_missing_rows(raw)
    if normalize:
        data = zscore_rows(data)
    return data, dropped
