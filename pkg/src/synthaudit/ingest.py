"""CSV codec, schema inference, deduplication, robust scaling and stratified splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import make_rng
from .errors import (BadK, EmptyFile, NoNumericColumns, ParseError, RaggedRow,
                     SchemaMismatch, UnknownColumn)
from .table import ColumnSchema, Kind, Role, Table


# --------------------------------------------------------------------------
# CSV

def _parse_float(s):
    try:
        return float(s)
    except ValueError:
        return None


def read_schema_hint(path) -> list[ColumnSchema]:
    """Parse a schema hint file: one ``name,kind,role`` line per column.

    Blank lines and ``#`` comments are ignored; ``role`` defaults to feature.
    """
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            row = [c.strip() for c in row]
            if len(row) not in (2, 3):
                raise ParseError(lineno, "schema", ",".join(row), "expected name,kind,role")
            try:
                kind = Kind(row[1].lower())
                role = Role(row[2].lower()) if len(row) == 3 else Role.FEATURE
            except ValueError:
                raise ParseError(lineno, "schema", ",".join(row), "bad kind or role") from None
            out.append(ColumnSchema(row[0], kind, role))
    return out


def write_schema_hint(schema, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for c in schema:
            w.writerow([c.name, c.kind.value, c.role.value])


def read_csv(path, schema_hint=None, label: str | None = None) -> Table:
    """Read an RFC-4180 CSV file with a header row into a Table.

    Without a hint a column is numeric iff every cell parses as a finite real.
    A cell that parses as a real but is not finite (``1e309``, ``inf``) is a
    ParseError rather than a reason to fall back to categorical. Empty cells
    are missing values and are rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyFile(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if body and body[-1] == []:
        body = body[:-1]
    width = len(header)
    for i, r in enumerate(body, start=2):
        if len(r) != width:
            raise RaggedRow(i, width, len(r))

    hints = {c.name: c for c in (schema_hint or [])}
    for name in hints:
        if name not in header:
            raise UnknownColumn(name)
    if label is not None and label not in header:
        raise UnknownColumn(label)

    columns, kinds = {}, {}
    label_name = label
    for j, name in enumerate(header):
        cells = [r[j] for r in body]
        for i, c in enumerate(cells):
            if c == "":
                raise ParseError(i + 2, name, c, "missing value")
        hint = hints.get(name)
        if hint is not None and hint.role is Role.LABEL and label is None:
            label_name = name
        parsed = [_parse_float(c) for c in cells]
        for i, v in enumerate(parsed):
            if v is not None and not math.isfinite(v):
                raise ParseError(i + 2, name, cells[i], "non-finite number")
        if name == label_name:
            kind = Kind.CATEGORICAL
        elif hint is not None:
            kind = hint.kind
        else:
            kind = Kind.NUMERIC if all(v is not None for v in parsed) else Kind.CATEGORICAL
        if kind is Kind.NUMERIC:
            for i, v in enumerate(parsed):
                if v is None:
                    raise ParseError(i + 2, name, cells[i])
            columns[name] = parsed
        else:
            columns[name] = cells
        kinds[name] = kind
    if label_name is not None and label is None:
        # a label declared only in the hint still has to be categorical
        kinds[label_name] = Kind.CATEGORICAL
    if not body:
        schema = [ColumnSchema(n, kinds[n], Role.LABEL if n == label_name else Role.FEATURE)
                  for n in header]
        n_num = sum(k is Kind.NUMERIC for k in kinds.values())
        return Table(schema, np.empty((0, n_num)),
                     np.empty((0, width - n_num), dtype=np.int64),
                     {n: () for n in header if kinds[n] is Kind.CATEGORICAL})
    return Table.from_columns(columns, label=label_name, kinds=kinds)


def _format_cell(v):
    return repr(float(v))


def write_csv(t: Table, path):
    """Write ``t`` as CSV; numeric values use the shortest round-trip repr."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(t.names)
        for row in t.rows():
            w.writerow([_format_cell(v) if isinstance(v, float) else v for v in row])


# --------------------------------------------------------------------------
# dedupe

def dedupe(t: Table) -> Table:
    """Drop full-row duplicates, keeping first occurrences in their original order."""
    if t.n_rows < 2:
        return t
    # numeric bits + codes as one byte record per row
    num = np.ascontiguousarray(t.numeric)
    num = num + 0.0  # fold -0.0 into 0.0 so they compare equal
    rec = np.hstack([num.view(np.int64), t.codes]) if num.size or t.codes.size \
        else np.zeros((t.n_rows, 1), dtype=np.int64)
    rec = np.ascontiguousarray(rec)
    void = rec.view(np.dtype((np.void, rec.dtype.itemsize * rec.shape[1]))).ravel()
    _, first = np.unique(void, return_index=True)
    if first.size == t.n_rows:
        return t
    return t.take(np.sort(first))


# --------------------------------------------------------------------------
# robust scaling

@dataclass(frozen=True)
class RobustScalerParams:
    columns: tuple
    median: np.ndarray
    iqr: np.ndarray
    constant: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.constant is None:
            object.__setattr__(self, "constant", np.asarray(self.iqr) == 0)

    def to_dict(self):
        return {"columns": list(self.columns), "median": self.median.tolist(),
                "iqr": self.iqr.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["columns"]), np.asarray(d["median"], dtype=float),
                   np.asarray(d["iqr"], dtype=float))

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Scale a matrix whose columns follow ``self.columns``."""
        scale = np.where(self.constant, 1.0, self.iqr)
        return (x - self.median) / scale

    def inverse(self, x: np.ndarray) -> np.ndarray:
        scale = np.where(self.constant, 1.0, self.iqr)
        return x * scale + self.median


def fit_robust_scaler(train: Table, columns=None) -> RobustScalerParams:
    """Median and interquartile range per numeric column (type-7 quantiles).

    By default every numeric column is fitted; pass ``columns`` to restrict.
    """
    columns = list(columns) if columns is not None else train.numeric_names
    if not columns:
        raise NoNumericColumns("no numeric columns to scale")
    if train.n_rows == 0:
        raise ValueError("cannot fit a scaler on an empty table")
    x = np.column_stack([train.column(c) for c in columns])
    # numpy's default 'linear' method is the type-7 convention
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], axis=0, method="linear")
    iqr = np.maximum(q3 - q1, 0.0)
    return RobustScalerParams(tuple(columns), med, iqr)


def apply_scaler(t: Table, p: RobustScalerParams) -> Table:
    for c in p.columns:
        if c not in t or t.column_schema(c).kind is not Kind.NUMERIC:
            raise SchemaMismatch(c, "scaler column missing or not numeric")
    idx = [t.numeric_names.index(c) for c in p.columns]
    num = np.array(t.numeric)
    num[:, idx] = p.transform(num[:, idx])
    return t.with_numeric(num)


def invert_scaler(t: Table, p: RobustScalerParams) -> Table:
    idx = [t.numeric_names.index(c) for c in p.columns]
    num = np.array(t.numeric)
    num[:, idx] = p.inverse(num[:, idx])
    return t.with_numeric(num)


# --------------------------------------------------------------------------
# splitting

@dataclass(frozen=True)
class SplitSpec:
    stratify_on: str
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")


def _class_groups(codes):
    """Row indices per class code, classes in ascending code order."""
    order = np.argsort(codes, kind="stable")
    uniq, starts = np.unique(codes[order], return_index=True)
    return list(np.split(order, starts[1:])) if uniq.size else []


def stratified_split_indices(strata, test_fraction, seed):
    strata = np.asarray(strata)
    rng = make_rng(seed, "split")
    test = []
    for rows in _class_groups(strata):
        n_c = rows.size
        n_test = 0 if n_c == 1 else min(max(round(n_c * test_fraction), 0), n_c)
        if n_test:
            test.append(rng.permutation(rows)[:n_test])
    test_idx = np.sort(np.concatenate(test)) if test else np.empty(0, dtype=np.int64)
    mask = np.ones(strata.size, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx


def stratified_split(t: Table, s: SplitSpec):
    """Per-class seeded 80/20-style split; rows keep their original order."""
    if s.stratify_on not in t:
        raise UnknownColumn(s.stratify_on)
    train_idx, test_idx = stratified_split_indices(t.column(s.stratify_on), s.test_fraction,
                                                   s.seed)
    return t.take(train_idx), t.take(test_idx)


def stratified_kfold_indices(strata, k, seed):
    strata = np.asarray(strata)
    n = strata.size
    if k < 2 or k > n:
        raise BadK(f"k must lie in [2, {n}], got {k}")
    rng = make_rng(seed, "kfold")
    fold_of = np.empty(n, dtype=np.int64)
    offset = 0
    for rows in _class_groups(strata):
        rows = rng.permutation(rows)
        # the fold cursor carries over between classes so small classes spread out
        fold_of[rows] = (offset + np.arange(rows.size)) % k
        offset = (offset + rows.size) % k
    folds = []
    for j in range(k):
        val = np.flatnonzero(fold_of == j)
        folds.append((np.flatnonzero(fold_of != j), val))
    return folds


def stratified_kfold(t: Table, k: int = 10, seed: int = 0, stratify_on: str | None = None):
    """List of ``(train_indices, validation_indices)`` pairs."""
    name = stratify_on or t.require_label()
    return stratified_kfold_indices(t.column(name), k, seed)
