"""Fidelity (quality report) and structural (diagnostic report) scores.

Quality combines per-column marginal shape scores with pairwise correlation
similarity; diagnostics combine type agreement with min/max boundary
adherence. Both overall scores are plain means of their two components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyColumn, NoSharedColumns, TooFewNumericColumns
from .table import Kind, Table, unify_dictionaries

QUALITY_GATE = 0.65
DIAGNOSTIC_GATE = 0.95

CATEGORICAL_SHAPE_ASSUMPTION = (
    "categorical column shapes scored with the total-variation complement")


def ks_complement(real_col, synth_col) -> float:
    """1 minus the two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(real_col, dtype=float))
    b = np.sort(np.asarray(synth_col, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptyColumn("KS complement needs two non-empty columns")
    support = np.concatenate([a, b])
    fa = np.searchsorted(a, support, side="right") / a.size
    fb = np.searchsorted(b, support, side="right") / b.size
    return float(1.0 - np.max(np.abs(fa - fb)))


def tv_complement(real_col, synth_col, n_categories=None) -> float:
    """1 minus the total-variation distance between category frequencies.

    Both code vectors must index the same dictionary.
    """
    a = np.asarray(real_col, dtype=np.int64)
    b = np.asarray(synth_col, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise EmptyColumn("TV complement needs two non-empty columns")
    m = n_categories or int(max(a.max(), b.max())) + 1
    p = np.bincount(a, minlength=m) / a.size
    q = np.bincount(b, minlength=m) / b.size
    return float(1.0 - 0.5 * np.abs(p - q).sum())


@dataclass
class CorrelationResult:
    pairs: dict
    average: float | None
    skipped: list = field(default_factory=list)


def correlation_similarity(real: Table, synth: Table) -> CorrelationResult:
    """Score ``1 - |rho_real - rho_synth| / 2`` for every numeric column pair.

    Pairs involving a zero-variance column in either table are skipped and
    listed in ``skipped``.
    """
    cols = [c for c in real.numeric_names
            if c in synth and synth.column_schema(c).kind is Kind.NUMERIC]
    if len(cols) < 2:
        raise TooFewNumericColumns("correlation similarity needs two numeric columns")
    xr = np.column_stack([real.column(c) for c in cols])
    xs = np.column_stack([synth.column(c) for c in cols])
    live = (np.ptp(xr, axis=0) > 0) & (np.ptp(xs, axis=0) > 0) if min(len(xr), len(xs)) \
        else np.zeros(len(cols), dtype=bool)
    with np.errstate(invalid="ignore", divide="ignore"):
        cr = np.corrcoef(xr, rowvar=False) if xr.shape[0] > 1 else None
        cs = np.corrcoef(xs, rowvar=False) if xs.shape[0] > 1 else None
    pairs, skipped = {}, []
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            key = f"{cols[i]}|{cols[j]}"
            if not (live[i] and live[j]) or cr is None or cs is None:
                skipped.append(key)
                continue
            rho_r = float(np.clip(cr[i, j], -1.0, 1.0))
            rho_s = float(np.clip(cs[i, j], -1.0, 1.0))
            pairs[key] = 1.0 - abs(rho_r - rho_s) / 2.0
    avg = float(np.mean(list(pairs.values()))) if pairs else None
    return CorrelationResult(pairs, avg, skipped)


def _shared_columns(real: Table, synth: Table):
    return [c.name for c in real.schema
            if c.name in synth and synth.column_schema(c.name).kind is c.kind]


@dataclass
class QualityReport:
    column_shapes: dict
    shapes_average: float
    correlation_pairs: dict
    correlation_average: float | None
    overall: float
    skipped_pairs: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "column_shapes": self.column_shapes,
            "column_shapes_average": self.shapes_average,
            "correlation_similarity": self.correlation_pairs,
            "correlation_average": self.correlation_average,
            "skipped_pairs": self.skipped_pairs,
            "overall": self.overall,
            "notes": self.notes,
        }


def quality_report(real: Table, synth: Table) -> QualityReport:
    real, synth = unify_dictionaries(real, synth)
    shapes = {}
    for name in _shared_columns(real, synth):
        kind = real.column_schema(name).kind
        if kind is Kind.NUMERIC:
            shapes[name] = ks_complement(real.column(name), synth.column(name))
        else:
            shapes[name] = tv_complement(real.column(name), synth.column(name),
                                         len(real.dictionary(name)))
    if not shapes:
        raise NoSharedColumns("real and synthetic tables share no columns")
    shapes_avg = float(np.mean(list(shapes.values())))
    notes = [CATEGORICAL_SHAPE_ASSUMPTION]
    try:
        corr = correlation_similarity(real, synth)
    except TooFewNumericColumns:
        corr = CorrelationResult({}, None, [])
    if corr.average is None:
        overall = shapes_avg
        notes.append("no scorable numeric pair; overall equals the column-shapes average")
    else:
        overall = (shapes_avg + corr.average) / 2.0
    return QualityReport(shapes, shapes_avg, corr.pairs, corr.average, overall,
                         corr.skipped, notes)


def table_structure(real: Table, synth: Table) -> float:
    """Share of the union of column names present in both tables with the same kind."""
    names = set(real.names) | set(synth.names)
    if not names:
        return 1.0
    same = sum(1 for c in real.schema
               if c.name in synth and synth.column_schema(c.name).kind is c.kind)
    return same / len(names)


def boundary_adherence(real: Table, synth: Table, per_column=False):
    """Mean over shared columns of the share of synthetic values inside real's support.

    Numeric columns use the inclusive real min/max range; categorical columns
    count codes whose category occurs in the real column.
    """
    cols = _shared_columns(real, synth)
    if not cols:
        raise NoSharedColumns("real and synthetic tables share no columns")
    scores = {}
    for name in cols:
        s = synth.column(name)
        if s.size == 0:
            scores[name] = 1.0
            continue
        if real.column_schema(name).kind is Kind.NUMERIC:
            r = real.column(name)
            lo, hi = (r.min(), r.max()) if r.size else (np.inf, -np.inf)
            scores[name] = float(np.mean((s >= lo) & (s <= hi)))
        else:
            seen = set(real.decoded(name))
            sd = synth.dictionary(name)
            ok = np.array([sd[i] in seen for i in range(len(sd))], dtype=bool)
            scores[name] = float(np.mean(ok[s]))
    score = float(np.mean(list(scores.values())))
    return (score, scores) if per_column else score


@dataclass
class DiagnosticReport:
    table_structure: float
    boundary_adherence: float
    overall: float
    boundary_by_column: dict = field(default_factory=dict)

    def to_dict(self):
        return {"table_structure": self.table_structure,
                "boundary_adherence": self.boundary_adherence,
                "boundary_by_column": self.boundary_by_column,
                "overall": self.overall}


def diagnostic_report(real: Table, synth: Table) -> DiagnosticReport:
    structure = table_structure(real, synth)
    adherence, by_col = boundary_adherence(real, synth, per_column=True)
    return DiagnosticReport(structure, adherence, (structure + adherence) / 2.0, by_col)


@dataclass
class GateDecision:
    passed: bool
    reasons: list

    def to_dict(self):
        return {"passed": self.passed, "reasons": self.reasons}


def gate(q, d, quality_threshold=QUALITY_GATE, diagnostic_threshold=DIAGNOSTIC_GATE):
    """Pass iff quality overall >= 0.65 and diagnostic overall >= 0.95 (inclusive).

    ``q`` and ``d`` may be reports or bare overall scores.
    """
    qo = q.overall if hasattr(q, "overall") else float(q)
    do = d.overall if hasattr(d, "overall") else float(d)
    reasons = []
    if not qo >= quality_threshold:
        reasons.append(f"quality overall {qo:.6g} < {quality_threshold:.6g}")
    if not do >= diagnostic_threshold:
        reasons.append(f"diagnostic overall {do:.6g} < {diagnostic_threshold:.6g}")
    return GateDecision(not reasons, reasons)
