"""Batch runner: JSON config in, ``report.json`` plus CSV tables out.

    shimorin run --config run.json --out results/ [--max-n 10] [--tol 1e-10]
                 [--grid-points 48] [--eval x=0.25 ...]

Mathematical verdicts (PRW converges, D-hat fails, Infeasible-at-N) are data in
the report.  The exit status is 0 iff no task raised; 1 if some task errored;
2 if the config could not be parsed or validated.  Wall-clock timings go to a
separate ``timings.json`` so that ``report.json`` is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .berg_duran import (
    NotBergmanKernel,
    complete_monotonicity_report,
    omega_moments_from_nu,
    reciprocal_partial_sums,
)
from .bernstein import BernsteinFunction, kernel_coefficients
from .charfit import FitProblem, FitResult, certify, default_grid, fit_h
from .kernels import (
    DiskPoint,
    KernelSeries,
    eval_integral,
    eval_series,
    kernel_match,
    terms_needed,
)
from .measure import MeasureOnUnitInterval, PRWVerdict, prw_classify
from .weights import (
    HProfile,
    RadialWeight,
    dhat_moment_check,
    dhat_tail_check,
    rkhs_check,
    weight_from_dict,
    weight_moments,
)

SCHEMA_VERSION = "1.0"
TASKS = (
    "classify",
    "coefficients",
    "kernel-eval",
    "weight-moments",
    "dhat",
    "fit-h",
    "certify",
    "round-trip",
)
WEIGHT_TASKS = frozenset({"weight-moments"})
MEASURE_TASKS = frozenset({"classify", "coefficients", "kernel-eval", "fit-h", "certify", "round-trip"})
MAX_SERIES_TERMS = 200_000
TAIL_RADII = np.linspace(0.0, 0.99, 100)

log = logging.getLogger("shimorin")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    tasks: list[str]
    measure: MeasureOnUnitInterval | None = None
    weight: RadialWeight | None = None
    h_profile: HProfile | None = None
    max_n: int = 24
    fit_n: int = 24
    tol: float = 1e-10
    eps_feas: float = 1e-8
    grid_points: int = 48
    eval_points: list[float] = field(default_factory=lambda: [0.25, 0.5])

    def __post_init__(self) -> None:
        if not self.tasks:
            raise ConfigError("field 'tasks': at least one task is required")
        seen = set()
        for name in self.tasks:
            if name not in TASKS:
                raise ConfigError(f"field 'tasks': unknown task {name!r}; choose from {', '.join(TASKS)}")
            if name in seen:
                raise ConfigError(f"field 'tasks': task {name!r} listed twice")
            seen.add(name)
        for name in self.tasks:
            if name in WEIGHT_TASKS and self.weight is None:
                raise ConfigError(f"field 'weight': task {name!r} requires a weight")
            if name in MEASURE_TASKS and self.measure is None:
                raise ConfigError(f"field 'measure': task {name!r} requires a measure")
        if "dhat" in seen and self.measure is None and self.weight is None:
            raise ConfigError("field 'weight': task 'dhat' requires a weight or a measure")
        if self.max_n < 1:
            raise ConfigError("field 'max_n': must be at least 1")
        if self.fit_n < 2:
            raise ConfigError("field 'fit_n': must be at least 2")
        if self.grid_points < 3:
            raise ConfigError("field 'grid_points': must be at least 3")
        for key in ("tol", "eps_feas"):
            v = getattr(self, key)
            if not (v > 0.0 and math.isfinite(v)):
                raise ConfigError(f"field {key!r}: must be a positive finite number")
        for x in self.eval_points:
            if not abs(x) < 1.0:
                raise ConfigError(f"field 'eval': point {x} is not inside the unit disk")

    @classmethod
    def from_dict(cls, doc: Any) -> RunConfig:
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {"tasks", "measure", "weight", "h_profile", "max_n", "fit_n", "tol",
                 "eps_feas", "grid_points", "eval"}
        extra = sorted(set(doc) - known)
        if extra:
            raise ConfigError(f"field {extra[0]!r}: unknown config key")
        tasks = doc.get("tasks")
        if not isinstance(tasks, list) or not all(isinstance(t, str) for t in tasks):
            raise ConfigError("field 'tasks': expected a list of task names")
        kwargs: dict[str, Any] = {"tasks": list(tasks)}
        for key, parse in (
            ("measure", MeasureOnUnitInterval.from_dict),
            ("weight", weight_from_dict),
            ("h_profile", HProfile.from_dict),
        ):
            if doc.get(key) is not None:
                try:
                    kwargs[key] = parse(doc[key])
                except (KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"field {key!r}: {exc}") from exc
        for key, kind in (("max_n", int), ("fit_n", int), ("grid_points", int),
                          ("tol", float), ("eps_feas", float)):
            if key in doc:
                kwargs[key] = _number(key, doc[key], kind)
        if "eval" in doc:
            pts = doc["eval"]
            if not isinstance(pts, list):
                raise ConfigError("field 'eval': expected a list of reals")
            kwargs["eval_points"] = [_number("eval", x, float) for x in pts]
        return cls(**kwargs)

    def as_dict(self) -> dict[str, Any]:
        return {
            "tasks": list(self.tasks),
            "measure": None if self.measure is None else self.measure.to_dict(),
            "weight": None if self.weight is None else self.weight.to_dict(),
            "h_profile": None if self.h_profile is None else self.h_profile.to_dict(),
            "max_n": self.max_n,
            "fit_n": self.fit_n,
            "tol": self.tol,
            "eps_feas": self.eps_feas,
            "grid_points": self.grid_points,
            "eval": list(self.eval_points),
        }


def _number(key: str, value: Any, kind: type) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field {key!r}: expected a number, got {value!r}")
    if kind is int:
        if value != int(value):
            raise ConfigError(f"field {key!r}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def load_config(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


# -- output helpers -------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _clean(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


# -- tasks ----------------------------------------------------------------------


@dataclass
class _Context:
    config: RunConfig
    out: Path
    fit: FitResult | None = None

    @property
    def nu(self) -> MeasureOnUnitInterval:
        return self.config.measure

    def grid(self) -> np.ndarray:
        return default_grid(self.config.grid_points)

    def run_fit(self) -> FitResult:
        if self.fit is None:
            problem = FitProblem(self.nu, N=self.config.fit_n, grid=self.grid(),
                                 eps_feas=self.config.eps_feas)
            self.fit = fit_h(problem)
        return self.fit


def task_classify(ctx: _Context) -> dict:
    verdict = prw_classify(ctx.nu)
    return {
        "prw": verdict.value,
        "bergman_kernel": True if verdict is PRWVerdict.DIVERGES
        else (None if verdict is PRWVerdict.UNKNOWN else False),
        "total_mass": ctx.nu.total_mass,
    }


def task_coefficients(ctx: _Context) -> dict:
    N = ctx.config.max_n
    c = kernel_coefficients(ctx.nu, N).values
    write_csv(ctx.out / "coefficients.csv", ["n", "c_n"], ((n, v) for n, v in enumerate(c)))
    b = reciprocal_partial_sums(kernel_coefficients(ctx.nu, N))
    K = min(8, N)
    cm = complete_monotonicity_report(b, K) if K >= 1 else None
    return {
        "N": N,
        "table": "coefficients.csv",
        "first": c[: min(5, c.size)],
        "reciprocal_cm": None if cm is None else cm.as_dict(),
    }


def task_kernel_eval(ctx: _Context) -> dict:
    tol = ctx.config.tol
    f = BernsteinFunction(ctx.nu)
    rows, points = [], []
    for x in ctx.config.eval_points:
        p = DiskPoint.from_x(x)
        N = terms_needed(abs(x), f.mass, tol)
        if N > MAX_SERIES_TERMS:
            raise ValueError(f"x = {x}: {N} terms needed, cap is {MAX_SERIES_TERMS}")
        ks = KernelSeries.from_measure(f, max(N, 1))
        sv = eval_series(ks, p, tol)
        iv = eval_integral(ctx.nu, p)
        diff = abs(sv.value - iv)
        rows.append((x, sv.value.real, sv.value.imag, iv.real, iv.imag, sv.tail_bound, diff))
        points.append({"x": x, "series": sv.value.real, "integral": iv.real,
                       "terms": N + 1, "tail_bound": sv.tail_bound, "abs_diff": diff})
    write_csv(ctx.out / "kernel_eval.csv",
              ["x", "series_re", "series_im", "integral_re", "integral_im", "tail_bound", "abs_diff"],
              rows)
    return {"table": "kernel_eval.csv", "points": points, "tol": tol}


def task_weight_moments(ctx: _Context) -> dict:
    w = ctx.config.weight
    N = ctx.config.max_n
    om = weight_moments(w, 2 * N + 1)
    write_csv(ctx.out / "weight_moments.csv", ["n", "omega_n"], enumerate(om.values))
    out: dict[str, Any] = {"table": "weight_moments.csv", "rkhs_admissible": rkhs_check(w)}
    if ctx.nu is not None:
        out["kernel_match"] = kernel_match(ctx.nu, om, N, ctx.config.tol).as_dict()
    return out


def task_dhat(ctx: _Context) -> dict:
    N = ctx.config.max_n
    w = ctx.config.weight
    if w is not None:
        moment_form = dhat_moment_check(weight_moments(w, 2 * N), n_check=N)
        tail_form = dhat_tail_check(w, TAIL_RADII)
        return {"source": "weight", "moment": moment_form.as_dict(), "tail": tail_form.as_dict()}
    try:
        om = omega_moments_from_nu(ctx.nu, 2 * N)
    except NotBergmanKernel as exc:
        return {"source": "measure", "applicable": False, "reason": str(exc)}
    return {"source": "measure", "applicable": True,
            "moment": dhat_moment_check(om, n_check=N).as_dict()}


def _write_fit_tables(ctx: _Context, res: FitResult) -> None:
    write_csv(ctx.out / "fit_residuals.csv", ["n", "target", "achieved", "relative_residual"],
              res.residual_rows())
    write_csv(ctx.out / "h_profile.csv", ["t", "log_h"], zip(res.profile.t, res.profile.log_h))


def task_fit_h(ctx: _Context) -> dict:
    res = ctx.run_fit()
    out = res.as_dict()
    if res.profile is not None:
        _write_fit_tables(ctx, res)
        out["tables"] = ["fit_residuals.csv", "h_profile.csv"]
    return out


def task_certify(ctx: _Context) -> dict:
    if ctx.fit is not None:
        hp, source = ctx.fit.profile, "fit-h"
    elif ctx.config.h_profile is not None:
        hp, source = ctx.config.h_profile, "config"
    else:
        hp, source = ctx.run_fit().profile, "fit-h"
    if hp is None:
        return {"source": source, "verdict": "NotCertified", "failures": ["precheck"]}
    cert = certify(ctx.nu, hp, ctx.config.fit_n, tol=ctx.config.eps_feas)
    out = cert.as_dict()
    out["source"] = source
    out["verdict"] = "Certified" if cert.certified else "NotCertified"
    return out


def task_round_trip(ctx: _Context) -> dict:
    N = ctx.config.max_n
    out: dict[str, Any] = {"N": N}
    try:
        om = omega_moments_from_nu(ctx.nu, 2 * N + 1)
    except NotBergmanKernel as exc:
        out.update(bergman_kernel=False, match="NoMatch", reason=str(exc))
    else:
        mr = kernel_match(ctx.nu, om, N, ctx.config.tol)
        out.update(bergman_kernel=True, match="Match" if mr.match else "NoMatch",
                   kernel_match=mr.as_dict())
    res = ctx.run_fit()
    out["fit_verdict"] = res.verdict.value
    if res.profile is None:
        out["certificate"] = "NotCertified"
        return out
    cert = certify(ctx.nu, res.profile, ctx.config.fit_n, tol=ctx.config.eps_feas)
    out["certificate"] = "Certified" if cert.certified else "NotCertified"
    out["certificate_failures"] = list(cert.failures)
    return out


HANDLERS: dict[str, Callable[[_Context], dict]] = {
    "classify": task_classify,
    "coefficients": task_coefficients,
    "kernel-eval": task_kernel_eval,
    "weight-moments": task_weight_moments,
    "dhat": task_dhat,
    "fit-h": task_fit_h,
    "certify": task_certify,
    "round-trip": task_round_trip,
}


def run(config: RunConfig, out_dir: str | Path) -> tuple[dict, dict]:
    """Execute the tasks in order; write report.json, timings.json and tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = _Context(config, out)
    entries, timings = [], {}
    for name in config.tasks:
        t0 = time.perf_counter()
        try:
            entry = {"task": name, "status": "ok", "result": HANDLERS[name](ctx)}
        except Exception as exc:  # a failing task must not sink the batch
            log.warning("task %s failed: %s", name, exc)
            entry = {"task": name, "status": "error", "error": f"{type(exc).__name__}: {exc}"}
        timings[name] = time.perf_counter() - t0
        entries.append(entry)
    report = _clean({"schema_version": SCHEMA_VERSION, "config": config.as_dict(), "tasks": entries,
                     "ok": all(e["status"] == "ok" for e in entries)})
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    timing_doc = {"schema_version": SCHEMA_VERSION, "seconds": timings}
    (out / "timings.json").write_text(json.dumps(timing_doc, sort_keys=True, indent=2) + "\n")
    return report, timing_doc


def _eval_flag(text: str) -> float:
    key, sep, value = text.partition("=")
    if sep != "=" or key.strip() != "x":
        raise argparse.ArgumentTypeError(f"expected x=<real>, got {text!r}")
    try:
        return float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a real number: {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shimorin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the tasks of a JSON config")
    p.add_argument("--config", required=True, help="path to the JSON config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--max-n", type=int, help="override max_n")
    p.add_argument("--tol", type=float, help="override tol")
    p.add_argument("--grid-points", type=int, help="override grid_points")
    p.add_argument("--eval", type=_eval_flag, action="append", metavar="x=<real>",
                   help="evaluation point (repeatable); replaces the config list")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        doc = load_config(args.config)
        if isinstance(doc, dict):
            for key, value in (("max_n", args.max_n), ("tol", args.tol),
                               ("grid_points", args.grid_points), ("eval", args.eval)):
                if value is not None:
                    doc[key] = value
        config = RunConfig.from_dict(doc)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report, _ = run(config, args.out)
    for entry in report["tasks"]:
        log.info("%s: %s", entry["task"], entry["status"])
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
