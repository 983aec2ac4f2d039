"""Command-line interface and end-to-end pipeline.

``momentest run`` executes the whole estimation pipeline on one program:
obtain exact moments, sample the loop, fit the ME and GC densities, test
both fits against the sample, and write report.json plus CSV artifacts.
Every stage is also exposed as its own subcommand operating on files, and
chaining the subcommands reproduces the pipeline bit for bit.

Exit codes: 0 success (test verdicts are data, not errors), 1 stage
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import engine, gof, moments
from .dsl import desugar, parse_program, validate
from .errors import MomentestError
from .estimate import (
    DensityEstimate,
    cdf_eval,
    default_support,
    fit_gram_charlier,
    fit_max_entropy,
    pdf_eval,
    total_mass,
)

DEFAULT_N = 100
DEFAULT_E = 1000
DEFAULT_ALPHA = 0.05
DEFAULT_BINS = 15
DEFAULT_ERROR_ORDER = 8


class PipelineConfigError(MomentestError):
    pass


class StageError(MomentestError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass
class PipelineConfig:
    program: Path
    var: str
    n: int = DEFAULT_N
    e: int = DEFAULT_E
    master_seed: int = 0
    m: int = 2
    moment_source: str = "propagate"  # propagate | external | empirical
    moments_file: Path | None = None
    support: tuple[float, float] | None = None
    alpha: float = DEFAULT_ALPHA
    bins: int = DEFAULT_BINS
    max_error_order: int | None = None
    out_dir: Path | None = None

    def check(self) -> None:
        if self.m < 2:
            raise PipelineConfigError("need at least two moments (m >= 2)")
        if self.e < 1:
            raise PipelineConfigError("need at least one execution (e >= 1)")
        if self.n < 0:
            raise PipelineConfigError("iteration count must be >= 0")
        if not 0.0 < self.alpha < 1.0:
            raise PipelineConfigError("alpha must lie strictly in (0, 1)")
        if self.bins < 2:
            raise PipelineConfigError("need at least two bins")
        if self.moment_source not in ("propagate", "external", "empirical"):
            raise PipelineConfigError(
                f"unknown moment source {self.moment_source!r}")
        if (self.moment_source == "external") != (self.moments_file is not None):
            raise PipelineConfigError(
                "--moments-file is required for (and only for) external moments")
        if self.support is not None and not self.support[0] < self.support[1]:
            raise PipelineConfigError("support needs l < u")
        if not Path(self.program).exists():
            raise PipelineConfigError(f"program file not found: {self.program}")


@dataclass
class ReportBundle:
    report: dict
    paths: dict[str, Path]


def sample_support(column: np.ndarray) -> tuple[float, float]:
    """Default working interval: sample range padded by 3 IQR widths."""
    q1, q3 = np.percentile(column, [25.0, 75.0])
    pad = 3.0 * float(q3 - q1)
    if pad <= 0.0:
        pad = max(1.0, float(column.max() - column.min()))
    return (float(column.min()) - pad, float(column.max()) + pad)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except MomentestError as err:
        raise StageError(name, err) from err


def _load_core(path: Path):
    program = parse_program(Path(path).read_text(encoding="utf-8"))
    report = validate(program)
    if not report.ok:
        raise MomentestError(
            "; ".join(issue.message for issue in report.errors))
    return program, report, desugar(program)


def _exact_moments(cfg: PipelineConfig, core, data) -> moments.MomentSet:
    want = max(cfg.m, cfg.max_error_order or DEFAULT_ERROR_ORDER)
    if cfg.moment_source == "propagate":
        try:
            return moments.propagated_moments(core, cfg.var, want, cfg.n)
        except MomentestError:
            if cfg.max_error_order is not None:
                raise
            return moments.propagated_moments(core, cfg.var, cfg.m, cfg.n)
    if cfg.moment_source == "empirical":
        return engine.empirical_moments(data, cfg.var, want)
    document = json.loads(Path(cfg.moments_file).read_text(encoding="utf-8"))
    ms = moments.load_moments(document)
    if ms.var != cfg.var:
        raise MomentestError(
            f"moments file is for {ms.var!r}, requested {cfg.var!r}")
    if ms.order < cfg.m:
        raise MomentestError(
            f"moments file has {ms.order} orders, need {cfg.m}")
    return ms


def run_pipeline(cfg: PipelineConfig) -> ReportBundle:
    """Full estimation pipeline; writes artifacts when cfg.out_dir is set."""
    cfg.check()
    _, validation, core = _stage("validate", _load_core, cfg.program)
    data = _stage("sample", engine.sample, core, cfg.n, cfg.e, cfg.master_seed)
    column = _stage("sample", data.column, cfg.var)
    exact = _stage("moments", _exact_moments, cfg, core, data)
    fit_ms = exact.prefix(min(cfg.m, exact.order))
    validity = moments.moment_validity(fit_ms)
    if not validity.ok:
        raise StageError("moments",
                         MomentestError(f"invalid moment sequence: {validity.detail}"))
    support = cfg.support if cfg.support is not None else sample_support(column)

    me_est, me_diag = _stage("estimate", fit_max_entropy, fit_ms, support)
    gc_est = _stage("estimate", fit_gram_charlier, fit_ms, support)

    tests = {}
    verdicts = {}
    for est in (me_est, gc_est):
        chi = _stage("gof", gof.chi_square_test, column, est, cfg.bins, cfg.alpha)
        ks = _stage("gof", gof.ks_test, column, est, cfg.alpha)
        tests[est.kind] = {"chi_square": chi, "ks": ks}
        accepted = (chi.verdict == gof.NOT_REJECTED
                    or ks.verdict == gof.NOT_REJECTED)
        verdicts[est.kind] = gof.NOT_REJECTED if accepted else gof.REJECTED

    table = _stage("gof", gof.error_report, exact, data, [me_est, gc_est])
    curve = gof.kde(column)

    report = {
        "config": {
            "program": str(cfg.program),
            "var": cfg.var,
            "n": cfg.n,
            "e": cfg.e,
            "seed": cfg.master_seed,
            "m": cfg.m,
            "moment_source": cfg.moment_source,
            "alpha": cfg.alpha,
            "bins": cfg.bins,
        },
        "validation": {
            "propagation_eligible": validation.propagation_eligible,
            "warnings": [issue.message for issue in validation.warnings],
        },
        "support": [float(support[0]), float(support[1])],
        "moments": exact.to_json(),
        "fitted_orders": fit_ms.order,
        "sample_summary": {
            "min": float(column.min()),
            "max": float(column.max()),
            "mean": float(column.mean()),
        },
        "estimates": {
            me_est.kind: {
                **me_est.to_json(),
                "mass": total_mass(me_est),
                "diagnostics": {
                    "iterations": me_diag.iterations,
                    "residual_norm": me_diag.residual_norm,
                    "converged": me_diag.converged,
                    "constraint_residuals": list(me_diag.constraint_residuals),
                    "entropy": me_diag.entropy,
                },
            },
            gc_est.kind: {
                **gc_est.to_json(),
                "mass": total_mass(gc_est),
            },
        },
        "tests": {
            kind: {name: result.to_json() for name, result in pair.items()}
            for kind, pair in tests.items()
        },
        "verdicts": verdicts,
        "errors": table.to_json(),
    }

    paths: dict[str, Path] = {}
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths["report"] = out / "report.json"
        paths["report"].write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        paths["histogram"] = out / "histogram.csv"
        chi_me = tests["ME"]["chi_square"]
        chi_gc = tests["GC"]["chi_square"]
        edges = np.linspace(column.min(), column.max(), cfg.bins + 1)
        lines = ["bin_lo,bin_hi,observed,expected_me,expected_gc"]
        for i in range(cfg.bins):
            lines.append(",".join([
                repr(float(edges[i])), repr(float(edges[i + 1])),
                repr(chi_me.observed[i]), repr(chi_me.expected[i]),
                repr(chi_gc.expected[i]),
            ]))
        paths["histogram"].write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths["pdf_curves"] = out / "pdf_curves.csv"
        xs = curve[:, 0]
        me_vals = pdf_eval(me_est, xs)
        gc_vals = pdf_eval(gc_est, xs)
        lines = ["x,f_me,f_gc,kde"]
        for x, fm, fg, fk in zip(xs, me_vals, gc_vals, curve[:, 1]):
            lines.append(f"{x!r},{float(fm)!r},{float(fg)!r},{float(fk)!r}")
        paths["pdf_curves"].write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths["errors"] = out / "errors.csv"
        paths["errors"].write_text(table.to_csv(), encoding="utf-8")
    return ReportBundle(report, paths)


# ---------------------------------------------------------------------------
# argument parsing


def _seed_default() -> int:
    env = os.environ.get("MOMENTEST_SEED")
    return int(env) if env else 0


def _parse_support(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            "support must be two comma-separated numbers, e.g. -0.8,1.2")
    return (lo, hi)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentest",
        description="Estimate distributions of probabilistic-loop variables "
                    "from exact moments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, var=False):
        p.add_argument("--program", type=Path, required=True,
                       help="loop program (.pp file)")
        if var:
            p.add_argument("--var", required=True, help="target variable")
        p.add_argument("--n", type=int, default=DEFAULT_N,
                       help="loop iteration (default 100)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default $MOMENTEST_SEED or 0)")

    p = sub.add_parser("validate", help="parse and check a program")
    p.add_argument("--program", type=Path, required=True)

    p = sub.add_parser("sample", help="run the loop e times, emit CSV")
    common(p)
    p.add_argument("--e", type=int, default=DEFAULT_E)
    p.add_argument("--out", type=Path, default=None,
                   help="output file (default stdout)")

    p = sub.add_parser("moments", help="exact moments at iteration n")
    common(p, var=True)
    p.add_argument("--m", type=int, default=2, help="number of moments")

    p = sub.add_parser("estimate", help="fit a density from a moments file")
    p.add_argument("--moments", type=Path, required=True,
                   help="moments JSON file")
    p.add_argument("--method", choices=("me", "gc"), required=True)
    p.add_argument("--m", type=int, default=None,
                   help="use only the first m moments")
    p.add_argument("--support", type=_parse_support, default=None)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("gof", help="test an estimate against sample data")
    p.add_argument("--sample", type=Path, required=True, help="sample CSV")
    p.add_argument("--var", required=True)
    p.add_argument("--estimate", type=Path, required=True,
                   help="estimate JSON file")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)

    p = sub.add_parser("run", help="full pipeline, writes report artifacts")
    common(p, var=True)
    p.add_argument("--e", type=int, default=DEFAULT_E)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--support", type=_parse_support, default=None)
    p.add_argument("--moments-source", default="propagate",
                   choices=("propagate", "external", "empirical"))
    p.add_argument("--moments-file", type=Path, default=None)
    p.add_argument("--max-order", type=int, default=None,
                   help="deepest moment order in the error table")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    return parser


def _emit_error(stage: str, err: Exception) -> None:
    doc = {"stage": stage, "error": type(err).__name__, "message": str(err)}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def _cmd_validate(args) -> int:
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    report = validate(program)
    print(json.dumps({
        "ok": report.ok,
        "propagation_eligible": report.propagation_eligible,
        "errors": [issue.message for issue in report.errors],
        "warnings": [issue.message for issue in report.warnings],
    }, indent=2, sort_keys=True))
    return 0 if report.ok else 2


def _cmd_sample(args) -> int:
    _, _, core = _load_core(args.program)
    data = engine.sample(core, args.n, args.e, args.seed)
    if args.out is None:
        data.to_csv("/dev/stdout")
    else:
        data.to_csv(args.out)
    return 0


def _cmd_moments(args) -> int:
    _, _, core = _load_core(args.program)
    ms = moments.propagated_moments(core, args.var, args.m, args.n)
    print(json.dumps(ms.to_json(), sort_keys=True))
    return 0


def _cmd_estimate(args) -> int:
    document = json.loads(Path(args.moments).read_text(encoding="utf-8"))
    ms = moments.load_moments(document)
    if args.m is not None:
        ms = ms.prefix(args.m)
    support = args.support
    if support is None:
        support = default_support(ms)
    if args.method == "me":
        est, diagnostics = fit_max_entropy(ms, support)
        if not diagnostics.converged:
            raise MomentestError(
                f"maximum-entropy fit did not converge "
                f"(residual {diagnostics.residual_norm:.3g})")
    else:
        est = fit_gram_charlier(ms, support)
    text = json.dumps(est.to_json(), sort_keys=True)
    if args.out is None:
        print(text)
    else:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def _cmd_gof(args) -> int:
    data = engine.SampleData.from_csv(args.sample)
    est = DensityEstimate.from_json(
        json.loads(Path(args.estimate).read_text(encoding="utf-8")))
    column = data.column(args.var)
    chi = gof.chi_square_test(column, est, args.bins, args.alpha)
    ks = gof.ks_test(column, est, args.alpha)
    print(json.dumps({
        "chi_square": chi.to_json(),
        "ks": ks.to_json(),
    }, indent=2, sort_keys=True))
    return 0


def _cmd_run(args) -> int:
    cfg = PipelineConfig(
        program=args.program,
        var=args.var,
        n=args.n,
        e=args.e,
        master_seed=args.seed,
        m=args.m,
        moment_source=args.moments_source,
        moments_file=args.moments_file,
        support=args.support,
        alpha=args.alpha,
        bins=args.bins,
        max_error_order=args.max_order,
        out_dir=args.out,
    )
    bundle = run_pipeline(cfg)
    print(json.dumps(bundle.report, indent=2, sort_keys=True))
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "sample": _cmd_sample,
    "moments": _cmd_moments,
    "estimate": _cmd_estimate,
    "gof": _cmd_gof,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = _seed_default()
    try:
        return _COMMANDS[args.command](args)
    except PipelineConfigError as err:
        _emit_error("config", err)
        return 2
    except StageError as err:
        _emit_error(err.stage, err.cause)
        return 1
    except MomentestError as err:
        _emit_error(args.command, err)
        return 1
    except OSError as err:
        _emit_error(args.command, err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
