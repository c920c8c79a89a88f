"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 quality gate failed (``full``
without ``--force``), 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import derive_seed
from .divergence import divergence_report
from .errors import SynthAuditError, TooFewNumericColumns
from .generators import (GanSpec, fit_gmm_sampler, gan_sample, generator_to_dict,
                         load_generator, sample, save_generator, train_gan)
from .harness import PRIVACY_BAND, distinguishability, privacy_report, utility_suite
from .ingest import (SplitSpec, dedupe, fit_robust_scaler, read_csv, read_schema_hint,
                     stratified_split, write_csv)
from .learners import FOREST, LOGISTIC, ClassifierSpec, cross_validate
from .quality import DIAGNOSTIC_GATE, QUALITY_GATE, diagnostic_report, gate, quality_report
from .report import EvalReport, sha256_file
from .stattests import TESTS, TestConfig
from .table import Kind, conform, label_distribution, unify_dictionaries

EXIT_OK, EXIT_ERROR, EXIT_GATE, EXIT_USAGE = 0, 1, 2, 64
COMMANDS = ("quality", "diagnose", "distinguish", "utility", "divergence", "stattest",
            "privacy", "fitgen", "sample", "full")
GENERATORS = ("gmm", "vanilla", "conditional", "wgan", "wgan_gp", "fgan_kl", "fgan_h2")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _common(p, synth=True):
    p.add_argument("--real", required=True, help="real data CSV")
    if synth:
        p.add_argument("--synth", required=True, help="synthetic data CSV")
    p.add_argument("--label", help="label column name")
    p.add_argument("--schema", help="schema hint file (name,kind,role per line)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default=".", help="where report.json/report.md go")


def _test_flags(p):
    p.add_argument("--permutations", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--subsample", type=int, default=2000,
                   help="per-group row cap for the permutation tests (0 = no cap)")


def build_parser():
    parser = _Parser(prog="synthaudit", description="Evaluate synthetic tabular data.")
    parser.add_argument("--version", action="version", version=f"synthaudit {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("quality", help="column shapes and pair trends")
    _common(p)
    p = sub.add_parser("diagnose", help="table structure and boundary adherence")
    _common(p)
    p = sub.add_parser("distinguish", help="real-vs-synthetic classifier")
    _common(p)
    p.add_argument("--classifier", choices=("forest", "logistic", "both"), default="both")
    p = sub.add_parser("utility", help="TRTR / TRTS / TSTR")
    _common(p)
    p.add_argument("--real-test", help="held-out real CSV (default: 80/20 split of --real)")
    p.add_argument("--classifier", choices=("forest", "logistic"), default="forest")
    p = sub.add_parser("divergence", help="label distribution divergences")
    _common(p)
    p = sub.add_parser("stattest", help="permutation two-sample tests")
    _common(p)
    _test_flags(p)
    p.add_argument("--test", choices=tuple(TESTS) + ("all",), default="all")
    p = sub.add_parser("privacy", help="nearest-neighbour distance ratio")
    _common(p)
    p.add_argument("--real-test", help="held-out real CSV (default: 80/20 split of --real)")
    p.add_argument("--stability-band", type=float, default=PRIVACY_BAND)
    p = sub.add_parser("fitgen", help="fit a generator on real data")
    _common(p, synth=False)
    p.add_argument("--generator", choices=GENERATORS, default="gmm")
    p.add_argument("--components", type=int, default=3, help="mixture components per class")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--model", help="output model file (default OUTPUT_DIR/generator.json)")
    p = sub.add_parser("sample", help="draw rows from a fitted generator")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--proportions", choices=("match_real", "uniform"), default="match_real")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--output-dir", default=".")
    p = sub.add_parser("full", help="the whole evaluation pipeline")
    _common(p)
    _test_flags(p)
    p.add_argument("--quality-gate", type=float, default=QUALITY_GATE)
    p.add_argument("--diagnostic-gate", type=float, default=DIAGNOSTIC_GATE)
    p.add_argument("--stability-band", type=float, default=PRIVACY_BAND)
    p.add_argument("--cv-folds", type=int, default=0,
                   help="also cross-validate a forest on real train rows (0 = skip)")
    p.add_argument("--force", action="store_true", help="continue after a failed gate")
    return parser


# --------------------------------------------------------------------------
# loading

def _load(args, report):
    hint = read_schema_hint(args.schema) if args.schema else None
    real = read_csv(args.real, hint, args.label)
    report.inputs["real"] = {"path": str(args.real), "sha256": sha256_file(args.real),
                             "rows": real.n_rows}
    synth = None
    if getattr(args, "synth", None):
        synth = conform(read_csv(args.synth, list(real.schema)), real.schema)
        report.inputs["synth"] = {"path": str(args.synth), "sha256": sha256_file(args.synth),
                                  "rows": synth.n_rows}
    return real, synth


def _real_split(args, real, report, seed):
    if getattr(args, "real_test", None):
        hint = list(real.schema)
        test = conform(read_csv(args.real_test, hint), real.schema)
        report.inputs["real_test"] = {"path": str(args.real_test),
                                      "sha256": sha256_file(args.real_test),
                                      "rows": test.n_rows}
        return real, test
    return stratified_split(real, SplitSpec(real.require_label(), 0.2,
                                            derive_seed(seed, "split")))


def _scaled_numeric(real_train, synth):
    cols = real_train.without_label().feature_names(Kind.NUMERIC)
    if not cols:
        raise TooFewNumericColumns("the permutation tests need numeric features")
    sc = fit_robust_scaler(real_train, cols)
    x = sc.transform(np.column_stack([real_train.column(c) for c in cols]))
    y = sc.transform(np.column_stack([synth.column(c) for c in cols]))
    return x, y


# --------------------------------------------------------------------------
# sections

def _quality(real, synth):
    return quality_report(real, synth)


def _distinguish(real, synth, which, seed):
    specs = {"forest": [FOREST], "logistic": [LOGISTIC], "both": [FOREST, LOGISTIC]}[which]
    return [distinguishability(real, synth, s, derive_seed(seed, "distinguish")).to_dict()
            for s in specs]


def _utility(train, test, synth, spec: ClassifierSpec, seed):
    res = utility_suite(train, test, synth, spec, derive_seed(seed, "utility"))
    return {"classifier": spec.kind, "results": [r.to_dict() for r in res]}


def _divergences(real, synth):
    a, b = unify_dictionaries(real, synth)
    return divergence_report(label_distribution(a), label_distribution(b))


def _stat_tests(x, y, args, seed, which="all"):
    cfg = TestConfig(permutations=args.permutations, alpha=args.alpha,
                     subsample=args.subsample or None, seed=derive_seed(seed, "stattest"))
    names = list(TESTS) if which == "all" else [which]
    return {"config": {"permutations": cfg.permutations, "alpha": cfg.alpha,
                       "ridge_scale": cfg.ridge_scale, "subsample": cfg.subsample,
                       "seed": cfg.seed},
            "results": [TESTS[n](x, y, cfg).to_dict() for n in names],
            "notes": ["numeric features robust-scaled with the real table's scaler"]}


def _privacy(synth, train, test, band):
    return privacy_report(synth, train, test, band).to_dict()


# --------------------------------------------------------------------------
# commands

def _config(args):
    skip = {"output_dir", "command", "model", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(args) -> tuple[EvalReport, int]:
    report = EvalReport(__version__, args.command, _config(args))
    seed = getattr(args, "seed", 0)
    cmd = args.command
    code = EXIT_OK
    if cmd == "sample":
        model = load_generator(args.model)
        if model.kind == "gmm":
            t = sample(model, args.n, args.proportions, args.seed)
        else:
            t = gan_sample(model, args.n, args.proportions, args.seed)
        write_csv(t, args.out)
        report.inputs["model"] = {"path": str(args.model), "sha256": sha256_file(args.model)}
        report.add("sample", {"rows": t.n_rows, "kind": model.kind,
                              "proportions": args.proportions, "seed": args.seed})
        return report, code

    real, synth = _load(args, report)
    if cmd == "quality":
        report.add("quality", _quality(real, synth).to_dict())
    elif cmd == "diagnose":
        report.add("diagnostic", diagnostic_report(real, synth).to_dict())
    elif cmd == "distinguish":
        report.add("distinguishability", _distinguish(real, synth, args.classifier, seed))
    elif cmd == "utility":
        train, test = _real_split(args, real, report, seed)
        spec = FOREST if args.classifier == "forest" else LOGISTIC
        report.add("utility", _utility(train, test, synth, spec, seed))
    elif cmd == "divergence":
        report.add("divergences", _divergences(real, synth))
    elif cmd == "stattest":
        x, y = _scaled_numeric(real, synth)
        report.add("stat_tests", _stat_tests(x, y, args, seed, args.test))
    elif cmd == "privacy":
        train, test = _real_split(args, real, report, seed)
        report.add("privacy", _privacy(synth, train, test, args.stability_band))
    elif cmd == "fitgen":
        code = _fitgen(args, real, report, seed)
    elif cmd == "full":
        code = _full(args, real, synth, report, seed)
    return report, code


def _fitgen(args, real, report, seed):
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = Path(args.model) if args.model else out_dir / "generator.json"
    info = {"generator": args.generator, "rows": real.n_rows}
    if args.generator == "gmm":
        model = fit_gmm_sampler(real, args.components, 1e-6, derive_seed(seed, "gmm"))
        info["components"] = args.components
        info["iterations"] = [m.n_iter if m else None for m in model.mixtures]
    else:
        objective, _, div = args.generator.partition("_")
        if objective == "wgan" and div == "gp":
            objective, div = "wgan_gp", ""
        spec = GanSpec(objective=objective, f_divergence=div or "kl", epochs=args.epochs,
                       seed=derive_seed(seed, "gan"))
        model, trace = train_gan(real, spec)
        trace_path = out_dir / "trace.csv"
        trace.to_csv(trace_path)
        info["trace"] = trace.to_dict()
    save_generator(model, path)
    info["model_digest"] = sha256_file(path)
    info["format_version"] = generator_to_dict(model)["version"]
    report.add("generator", info)
    return EXIT_OK


def _full(args, real, synth, report, seed):
    real = dedupe(real)
    train, test = _real_split(args, real, report, seed)
    q = quality_report(train, synth)
    d = diagnostic_report(train, synth)
    report.add("quality", q.to_dict())
    report.add("diagnostic", d.to_dict())
    g = gate(q, d, args.quality_gate, args.diagnostic_gate)
    report.add("gate", {**g.to_dict(), "quality_threshold": args.quality_gate,
                        "diagnostic_threshold": args.diagnostic_gate, "forced": args.force})
    if not g.passed and not args.force:
        return EXIT_GATE
    if args.cv_folds:
        cv = cross_validate(train, FOREST, args.cv_folds, args.stability_band,
                            derive_seed(seed, "cv"))
        report.add("cross_validation", cv.to_dict())
    report.add("distinguishability", _distinguish(train, synth, "both", seed))
    report.add("utility", _utility(train, test, synth, FOREST, seed))
    report.add("divergences", _divergences(train, synth))
    x, y = _scaled_numeric(train, synth)
    report.add("stat_tests", _stat_tests(x, y, args, seed))
    report.add("privacy", _privacy(synth, train, test, args.stability_band))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    started = datetime.now(timezone.utc).isoformat()
    try:
        report, code = run(args)
    except (SynthAuditError, OSError, ValueError) as exc:
        sys.stderr.write(f"synthaudit: error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    report.exit_code = code
    report.timestamps = {"started": started,
                         "finished": datetime.now(timezone.utc).isoformat()}
    json_path, md_path = report.write(args.output_dir)
    if code == EXIT_GATE:
        sys.stderr.write("synthaudit: quality gate failed; rerun with --force to continue\n")
    print(json_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
