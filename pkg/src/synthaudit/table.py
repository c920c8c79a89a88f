"""Column-ordered dataset model shared by every metric, learner and generator.

Numeric columns live in one row-major float matrix, categorical columns in one
row-major integer code matrix with a per-column code -> string dictionary.
Tables are immutable; every transformation returns a new Table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NoLabelColumn, SchemaMismatch, UnknownColumn


class Kind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Role(str, enum.Enum):
    FEATURE = "feature"
    LABEL = "label"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: Kind
    role: Role = Role.FEATURE

    def to_dict(self):
        return {"name": self.name, "kind": self.kind.value, "role": self.role.value}


@dataclass(frozen=True)
class LabelDistribution:
    categories: tuple
    proportions: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.proportions, dtype=float)
        if p.shape != (len(self.categories),):
            raise ValueError("one proportion per category required")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("proportions must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "proportions", p)

    def as_dict(self):
        return {c: float(v) for c, v in zip(self.categories, self.proportions)}


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


class Table:
    """An immutable, schema-carrying table.

    ``numeric`` has shape ``(n_rows, n_numeric)`` with columns in schema order
    of the numeric columns; ``codes`` likewise for categorical columns.
    """

    def __init__(self, schema: Sequence[ColumnSchema], numeric, codes,
                 dictionaries: Mapping[str, Sequence[str]]):
        schema = tuple(schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise SchemaMismatch(dup, "duplicate column name")
        if sum(c.role is Role.LABEL for c in schema) > 1:
            raise SchemaMismatch(names[0], "more than one label column")

        num_names = [c.name for c in schema if c.kind is Kind.NUMERIC]
        cat_names = [c.name for c in schema if c.kind is Kind.CATEGORICAL]
        numeric = np.asarray(numeric, dtype=np.float64)
        codes = np.asarray(codes, dtype=np.int64)
        n = numeric.shape[0] if num_names else codes.shape[0]
        numeric = numeric.reshape(n, len(num_names))
        codes = codes.reshape(n, len(cat_names))
        if numeric.shape[0] != codes.shape[0]:
            raise SchemaMismatch(names[0], "numeric and categorical row counts differ")
        if not np.all(np.isfinite(numeric)):
            raise ValueError("numeric entries must be finite")
        dicts = {}
        for j, name in enumerate(cat_names):
            if name not in dictionaries:
                raise SchemaMismatch(name, "missing dictionary")
            d = tuple(str(s) for s in dictionaries[name])
            if len(set(d)) != len(d):
                raise SchemaMismatch(name, "dictionary has duplicate entries")
            col = codes[:, j]
            if col.size and (col.min() < 0 or col.max() >= len(d)):
                raise SchemaMismatch(name, "code outside dictionary")
            dicts[name] = d

        self._schema = schema
        self._numeric = _frozen(numeric, np.float64)
        self._codes = _frozen(codes, np.int64)
        self._dicts = dicts
        self._num_index = {nm: i for i, nm in enumerate(num_names)}
        self._cat_index = {nm: i for i, nm in enumerate(cat_names)}
        self._by_name = {c.name: c for c in schema}

    # construction helpers -------------------------------------------------

    @classmethod
    def from_columns(cls, columns: Mapping[str, Iterable], label: str | None = None,
                     kinds: Mapping[str, Kind] | None = None) -> "Table":
        """Build a table from named value sequences.

        Columns holding only real numbers become numeric unless ``kinds``
        says otherwise; anything else is dictionary-encoded in first-appearance
        order. The ``label`` column is always categorical.
        """
        kinds = dict(kinds or {})
        schema, num_cols, cat_cols, dicts = [], [], [], {}
        n = None
        for name, values in columns.items():
            values = list(values)
            if n is None:
                n = len(values)
            elif len(values) != n:
                raise SchemaMismatch(name, "column length differs")
            kind = kinds.get(name)
            if name == label:
                kind = Kind.CATEGORICAL
            if kind is None:
                numeric_like = all(isinstance(v, (int, float, np.integer, np.floating))
                                   and not isinstance(v, bool) for v in values)
                kind = Kind.NUMERIC if numeric_like else Kind.CATEGORICAL
            role = Role.LABEL if name == label else Role.FEATURE
            schema.append(ColumnSchema(name, kind, role))
            if kind is Kind.NUMERIC:
                num_cols.append(np.asarray(values, dtype=np.float64))
            else:
                codes, d = encode_first_appearance([str(v) for v in values])
                cat_cols.append(codes)
                dicts[name] = d
        if label is not None and label not in columns:
            raise UnknownColumn(label)
        n = n or 0
        numeric = np.column_stack(num_cols) if num_cols else np.empty((n, 0))
        codes = np.column_stack(cat_cols) if cat_cols else np.empty((n, 0), dtype=np.int64)
        return cls(schema, numeric, codes, dicts)

    @classmethod
    def from_arrays(cls, numeric, names=None, labels=None, label_name="label",
                    categories=None) -> "Table":
        """Numeric feature matrix plus an optional label vector."""
        numeric = np.atleast_2d(np.asarray(numeric, dtype=np.float64))
        if numeric.shape[0] == 1 and numeric.shape[1] != 1 and names is not None \
                and len(names) == 1:
            numeric = numeric.T
        p = numeric.shape[1]
        names = list(names) if names is not None else [f"x{i}" for i in range(p)]
        schema = [ColumnSchema(nm, Kind.NUMERIC) for nm in names]
        dicts = {}
        codes = np.empty((numeric.shape[0], 0), dtype=np.int64)
        if labels is not None:
            labels = [str(v) for v in labels]
            if categories is None:
                codes1, d = encode_first_appearance(labels)
            else:
                d = tuple(str(c) for c in categories)
                lookup = {c: i for i, c in enumerate(d)}
                codes1 = np.array([lookup[v] for v in labels], dtype=np.int64)
            schema.append(ColumnSchema(label_name, Kind.CATEGORICAL, Role.LABEL))
            codes = codes1.reshape(-1, 1)
            dicts[label_name] = d
        return cls(schema, numeric, codes, dicts)

    # schema accessors -----------------------------------------------------

    @property
    def schema(self):
        return self._schema

    @property
    def numeric(self) -> np.ndarray:
        return self._numeric

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def dictionaries(self):
        return dict(self._dicts)

    @property
    def n_rows(self) -> int:
        return self._numeric.shape[0]

    @property
    def names(self):
        return [c.name for c in self._schema]

    @property
    def numeric_names(self):
        return list(self._num_index)

    @property
    def categorical_names(self):
        return list(self._cat_index)

    @property
    def label_name(self):
        for c in self._schema:
            if c.role is Role.LABEL:
                return c.name
        return None

    def require_label(self) -> str:
        name = self.label_name
        if name is None:
            raise NoLabelColumn("table has no label column")
        return name

    def column_schema(self, name) -> ColumnSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownColumn(name) from None

    def dictionary(self, name):
        self.column_schema(name)
        try:
            return self._dicts[name]
        except KeyError:
            raise SchemaMismatch(name, "column is not categorical") from None

    def __contains__(self, name):
        return name in self._by_name

    def __len__(self):
        return self.n_rows

    def __repr__(self):
        return f"Table(n_rows={self.n_rows}, columns={self.names})"

    # data access ----------------------------------------------------------

    def column(self, name) -> np.ndarray:
        """Read-only view of one column: floats for numeric, codes otherwise."""
        col = self.column_schema(name)
        if col.kind is Kind.NUMERIC:
            return self._numeric[:, self._num_index[name]]
        return self._codes[:, self._cat_index[name]]

    def labels(self) -> np.ndarray:
        return self.column(self.require_label())

    def label_categories(self):
        return self._dicts[self.require_label()]

    def decoded(self, name):
        d = self.dictionary(name)
        return [d[c] for c in self.column(name)]

    def feature_names(self, kind: Kind | None = None):
        return [c.name for c in self._schema if c.role is Role.FEATURE
                and (kind is None or c.kind is kind)]

    def numeric_features(self) -> np.ndarray:
        """Matrix of numeric feature columns (label excluded)."""
        idx = [self._num_index[n] for n in self.feature_names(Kind.NUMERIC)]
        return self._numeric[:, idx]

    def categorical_features(self) -> np.ndarray:
        idx = [self._cat_index[n] for n in self.feature_names(Kind.CATEGORICAL)]
        return self._codes[:, idx]

    def rows(self):
        """Iterate rows as tuples of decoded values in schema order."""
        for i in range(self.n_rows):
            out = []
            for c in self._schema:
                if c.kind is Kind.NUMERIC:
                    out.append(float(self._numeric[i, self._num_index[c.name]]))
                else:
                    out.append(self._dicts[c.name][self._codes[i, self._cat_index[c.name]]])
            yield tuple(out)

    # derivation -----------------------------------------------------------

    def take(self, indices) -> "Table":
        indices = np.asarray(indices, dtype=np.int64)
        return Table(self._schema, self._numeric[indices], self._codes[indices], self._dicts)

    def with_numeric(self, numeric) -> "Table":
        return Table(self._schema, numeric, self._codes, self._dicts)

    def with_codes(self, codes, dictionaries=None) -> "Table":
        return Table(self._schema, self._numeric, codes, dictionaries or self._dicts)

    def drop(self, names) -> "Table":
        names = set(names)
        for n in names:
            self.column_schema(n)
        keep = [c for c in self._schema if c.name not in names]
        num = [self._num_index[c.name] for c in keep if c.kind is Kind.NUMERIC]
        cat = [self._cat_index[c.name] for c in keep if c.kind is Kind.CATEGORICAL]
        return Table(keep, self._numeric[:, num], self._codes[:, cat],
                     {k: v for k, v in self._dicts.items() if k not in names})

    def without_label(self) -> "Table":
        lab = self.label_name
        return self if lab is None else self.drop([lab])

    def with_label(self, name: str | None) -> "Table":
        """Same data with ``name`` as the only label column (None clears it)."""
        if name is not None:
            col = self.column_schema(name)
            if col.kind is not Kind.CATEGORICAL:
                raise SchemaMismatch(name, "label column must be categorical")
        schema = [ColumnSchema(c.name, c.kind, Role.LABEL if c.name == name else Role.FEATURE)
                  for c in self._schema]
        return Table(schema, self._numeric, self._codes, self._dicts)

    def with_label_codes(self, codes) -> "Table":
        name = self.require_label()
        new = np.array(self._codes)
        new[:, self._cat_index[name]] = codes
        return self.with_codes(new)

    def equals(self, other: "Table") -> bool:
        return (self._schema == other._schema and self._dicts == other._dicts
                and np.array_equal(self._numeric, other._numeric)
                and np.array_equal(self._codes, other._codes))


def encode_first_appearance(values: Sequence[str]):
    """Dictionary-encode strings; dictionary order is first-appearance order."""
    lookup = {}
    codes = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        codes[i] = lookup.setdefault(v, len(lookup))
    return codes, tuple(lookup)


def column_view(t: Table, name: str) -> np.ndarray:
    return t.column(name)


def label_distribution(t: Table) -> LabelDistribution:
    name = t.require_label()
    cats = t.dictionary(name)
    if t.n_rows == 0:
        raise ValueError("label distribution of an empty table is undefined")
    counts = np.bincount(t.column(name), minlength=len(cats)).astype(float)
    return LabelDistribution(cats, counts / t.n_rows)


def unify_dictionaries(a: Table, b: Table):
    """Re-encode shared categorical columns of ``a`` and ``b`` onto one dictionary.

    The merged dictionary keeps ``a``'s order and appends categories that only
    ``b`` has, in ``b``'s order. Columns that are categorical in only one table
    are left alone.
    """
    shared = [n for n in a.categorical_names if n in b and n in b.categorical_names]
    if not shared:
        return a, b
    a_dicts, b_dicts = a.dictionaries, b.dictionaries
    a_codes, b_codes = np.array(a.codes), np.array(b.codes)
    changed_a = changed_b = False
    for name in shared:
        da, db = a_dicts[name], b_dicts[name]
        if da == db:
            continue
        merged = list(da) + [c for c in db if c not in set(da)]
        lookup = {c: i for i, c in enumerate(merged)}
        remap = np.array([lookup[c] for c in db], dtype=np.int64)
        j = b.categorical_names.index(name)
        if remap.size:
            b_codes[:, j] = remap[b_codes[:, j]]
        a_dicts[name] = b_dicts[name] = tuple(merged)
        changed_a = changed_a or len(merged) != len(da)
        changed_b = True
    a2 = a.with_codes(a_codes, a_dicts) if changed_a else a
    b2 = b.with_codes(b_codes, b_dicts) if changed_b else b
    return a2, b2


def check_same_schema(a: Table, b: Table):
    """Raise SchemaMismatch naming the first column whose name, kind or role differ."""
    for ca, cb in zip(a.schema, b.schema):
        if ca != cb:
            raise SchemaMismatch(ca.name, f"{ca} vs {cb}")
    if len(a.schema) != len(b.schema):
        longer = a.schema if len(a.schema) > len(b.schema) else b.schema
        raise SchemaMismatch(longer[min(len(a.schema), len(b.schema))].name,
                             "column present in only one table")


def vertical_concat(a: Table, b: Table) -> Table:
    check_same_schema(a, b)
    if b.n_rows == 0 and all(len(v) == 0 or a.dictionaries.get(k) == v
                             for k, v in b.dictionaries.items()):
        return a
    a, b = unify_dictionaries(a, b)
    return Table(a.schema, np.vstack([a.numeric, b.numeric]),
                 np.vstack([a.codes, b.codes]), a.dictionaries)


def conform(t: Table, schema: Sequence[ColumnSchema]) -> Table:
    """Coerce ``t`` to carry exactly the columns, kinds and roles of ``schema``.

    Kind changes are converted through the string form of each value; a value
    that cannot become a finite number raises SchemaMismatch.
    """
    cols = {}
    kinds = {}
    label = None
    for c in schema:
        if c.name not in t:
            raise SchemaMismatch(c.name, "column missing")
        cur = t.column_schema(c.name)
        if cur.kind is Kind.NUMERIC:
            vals = [float(v) for v in t.column(c.name)]
            if c.kind is Kind.CATEGORICAL:
                vals = [_fmt_number(v) for v in vals]
        else:
            vals = t.decoded(c.name)
            if c.kind is Kind.NUMERIC:
                try:
                    vals = [float(v) for v in vals]
                except ValueError:
                    raise SchemaMismatch(c.name, "categorical values are not numeric") from None
                if not np.all(np.isfinite(vals)):
                    raise SchemaMismatch(c.name, "non-finite value")
        cols[c.name] = vals
        kinds[c.name] = c.kind
        if c.role is Role.LABEL:
            label = c.name
    if all(t.column_schema(c.name) == c for c in schema) and len(schema) == len(t.schema):
        return t
    out = Table.from_columns(cols, label=label, kinds=kinds)
    if t.n_rows == 0:
        out = Table(list(schema), np.empty((0, len(out.numeric_names))),
                    np.empty((0, len(out.categorical_names)), dtype=np.int64),
                    {n: t.dictionaries.get(n, ()) for n in out.categorical_names})
    return out


def _fmt_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))
