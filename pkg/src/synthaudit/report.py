"""EvalReport: the JSON + Markdown record of one evaluation run.

The JSON body is deterministic for fixed inputs, flags and seed; wall-clock
timestamps live in their own top-level field so callers can drop it before
comparing runs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"
SECTION_ORDER = ("quality", "diagnostic", "gate", "cross_validation", "distinguishability",
                 "utility", "divergences", "stat_tests", "privacy", "generator", "sample")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def to_plain(obj):
    """Recursively convert numpy scalars/arrays, tuples and non-finite floats to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    return obj


@dataclass
class EvalReport:
    tool_version: str
    command: str
    config: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)
    exit_code: int = 0
    timestamps: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def add(self, name, payload):
        self.sections[name] = to_plain(payload)

    def to_dict(self):
        ordered = {k: self.sections[k] for k in SECTION_ORDER if k in self.sections}
        ordered.update({k: v for k, v in self.sections.items() if k not in ordered})
        return {"schema_version": self.schema_version, "tool_version": self.tool_version,
                "command": self.command, "exit_code": self.exit_code,
                "config": to_plain(self.config), "inputs": to_plain(self.inputs),
                "sections": ordered, "timestamps": self.timestamps}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        return cls(d["tool_version"], d["command"], d["config"], d["inputs"], d["sections"],
                   d.get("exit_code", 0), d.get("timestamps", {}), d["schema_version"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def write(self, out_dir):
        from pathlib import Path
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        (out / "report.md").write_text(render_markdown(self.to_dict()))
        return out / "report.json", out / "report.md"


def deterministic_view(report: dict) -> dict:
    """The report without its timestamps, for reproducibility checks."""
    return {k: v for k, v in report.items() if k != "timestamps"}


# --------------------------------------------------------------------------
# markdown

def fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, list):
        return ", ".join(fmt(x) for x in v) if v else "none"
    return str(v).replace("|", "\\|")


def _table(header, rows):
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(fmt(c) for c in r) + " |" for r in rows]
    return lines


def _kv(d, skip=()):
    return _table(["Field", "Value"], [(k, v) for k, v in d.items()
                                       if k not in skip and not isinstance(v, dict)])


def _md_quality(s):
    out = ["Column shapes:", ""]
    out += _table(["Column", "Score"], list(s["column_shapes"].items()))
    if s["correlation_similarity"]:
        out += ["", "Column pair trends:", ""]
        out += _table(["Pair", "Score"], list(s["correlation_similarity"].items()))
    out += [""] + _table(["Metric", "Value"], [
        ("column shapes average", s["column_shapes_average"]),
        ("column pair trends average", s["correlation_average"]),
        ("overall", s["overall"])])
    return out


def _md_gate(s):
    return _table(["Passed", "Reasons", "Quality threshold", "Diagnostic threshold"],
                  [(s["passed"], s["reasons"], s.get("quality_threshold"),
                    s.get("diagnostic_threshold"))])


def _md_distinguish(s):
    rows = [(r["classifier"], r["f1_synthetic"], r["roc_auc"], r["n_real"], r["n_synth"],
             r["seed"]) for r in s]
    return _table(["Classifier", "F1 (synthetic)", "ROC-AUC", "Real rows", "Synthetic rows",
                   "Seed"], rows)


def _md_utility(s):
    rows = [(r["protocol"], r["train_precision"], r["train_recall"], r["test_precision"],
             r["test_recall"], r["missing_classes"]) for r in s["results"]]
    return _table(["Protocol", "Train precision", "Train recall", "Test precision",
                   "Test recall", "Missing classes"], rows) + ["", f"Classifier: {s['classifier']}"]


def _md_divergences(s):
    out = _table(["Metric", "Value"], [("Jensen-Shannon", s["jensen_shannon"]),
                                       ("Hellinger", s["hellinger"]),
                                       ("Wasserstein", s["wasserstein"])])
    out += ["", "Label distribution:", ""]
    out += _table(["Class", "Real", "Synthetic"],
                  list(zip(s["categories"], s["real"], s["synthetic"])))
    return out


def _md_stat(s):
    rows = [(r["statistic_name"], r["observed"], r["p_value"], r["permutations"],
             r["alpha"], r["reject_h0"], r["seed"]) for r in s["results"]]
    return _table(["Test", "Statistic", "p-value", "Permutations", "Alpha", "Reject H0",
                   "Seed"], rows)


def _md_privacy(s):
    return _table(["Train NNDR", "Test NNDR", "Difference", "Band", "Overfit flag"],
                  [(s["train_nndr"], s["test_nndr"], s["difference"], s["band"],
                    s["overfit_flag"])])


def _md_cv(s):
    rows = [(m, v["range"], v["stable"]) for m, v in s["stability"].items()]
    return _table(["Metric", "Fold range", "Stable"], rows) + ["", f"Band: {fmt(s['band'])}"]


_RENDER = {"quality": _md_quality, "gate": _md_gate, "distinguishability": _md_distinguish,
           "utility": _md_utility, "divergences": _md_divergences, "stat_tests": _md_stat,
           "privacy": _md_privacy, "cross_validation": _md_cv}


def render_markdown(d: dict) -> str:
    lines = [f"# Synthetic data evaluation: `{d['command']}`", "",
             f"Tool version {d['tool_version']}, report schema {d['schema_version']}, "
             f"exit code {d['exit_code']}.", "", "## Configuration", ""]
    lines += _kv(d["config"])
    if d["inputs"]:
        lines += ["", "## Inputs", ""]
        lines += _table(["Input", "Path", "Rows", "SHA-256"],
                        [(k, v["path"], v.get("rows"), v["sha256"])
                         for k, v in d["inputs"].items()])
    for name, sec in d["sections"].items():
        lines += ["", f"## {name.replace('_', ' ').capitalize()}", ""]
        render = _RENDER.get(name)
        lines += render(sec) if render else _kv(sec)
        notes = sec.get("notes") if isinstance(sec, dict) else None
        if notes:
            lines += [""] + [f"- {n}" for n in notes]
    return "\n".join(lines) + "\n"
