"""Command-line interface: ``pot-tailrisk {fit,prob,mrl,qq,sweep}``.

Exit codes: 0 success, 2 data error, 3 numeric failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bootstrap import BootstrapError
from .catalog import CatalogError, ExclusionRule, exceedances, exclude, read_catalog, tail_count
from .diagnostics import DPL_QUANTITIES, GPD_QUANTITIES, dpl_sweep, mrl_curve, qq_points, threshold_sweep
from .distributions import DomainError
from .fitting import FitError, fit_gpd
from .rare_event import EventProbabilityInput, event_probability
from .rng import GENERATOR_VERSION, MASK64, stream
from .svg import Chart

EXIT_OK, EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64
SEED_ENV = "POT_TAILRISK_SEED"
DEFAULT_EXCLUDE_TAG = "9/11"
# Stream index reserved for jitter noise; replicate streams use 0..B-1.
JITTER_STREAM = 1 << 63

DEFAULT_EMIT = {"fit": ["json"], "prob": ["json"], "mrl": ["tsv"], "qq": ["tsv"], "sweep": ["tsv", "json"]}
DEFAULT_GRID = {"mrl": "1:300:1", "sweep": "10:100:5"}

SWEEP_COLUMNS = ["mu", "n_tail", "tail_fraction", "converged", "xi", "xi_lo", "xi_hi", "sigma", "sigma_lo",
                 "sigma_hi", "reduction_stat", "reduction_stat_lo", "reduction_stat_hi", "ks", "prob_event",
                 "prob_event_lo", "prob_event_hi"]
DPL_COLUMNS = ["xmin", "n_tail", "tail_fraction", "alpha", "alpha_lo", "alpha_hi", "ks",
               "prob_event", "prob_event_lo", "prob_event_hi"]
MRL_COLUMNS = ["threshold", "mean_excess", "lo", "hi", "n_exceed"]
QQ_COLUMNS = ["model_q", "empirical_q"]


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, code: int, message: str):
        self.stage = stage
        self.code = code
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    input_path: str
    format: str = "col1"
    exclude_tags: list = field(default_factory=list)
    exclude_severities: list = field(default_factory=list)
    mu: Optional[float] = None
    grid: Optional[list] = None
    y: float = 2749.0
    n: Optional[int] = None
    B: int = 2000
    level: float = 0.90
    seed: Optional[int] = None
    seed_source: Optional[str] = None
    jobs: int = 1
    out: Optional[str] = None
    emit: list = field(default_factory=list)
    model: str = "gpd"
    jitter: bool = False
    strict: bool = False
    generator: str = GENERATOR_VERSION
    version: str = __version__

    def to_json(self, runtime: bool = False) -> dict:
        """Serializable form; ``runtime=True`` keeps ``jobs``, which never changes results."""
        d = asdict(self)
        d.pop("out")
        if not runtime:
            d.pop("jobs")
        return d


def parse_grid(text: str) -> list[float]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be LO:HI:STEP, got {text!r}") from None
    if step <= 0 or hi < lo or lo < 0:
        raise UsageError(f"invalid grid {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", required=True, metavar="PATH", help="catalog file")
    common.add_argument("--format", choices=("col1", "col2"), default="col1",
                        help="col1: one severity per line; col2: severity<TAB>tag")
    common.add_argument("--exclude-tag", action="append", default=[], metavar="T",
                        help="drop every event with this tag (repeatable)")
    common.add_argument("--exclude-severity", action="append", type=float, default=[], metavar="V",
                        help="drop the single event with this severity (repeatable)")
    common.add_argument("--no-exclude", action="store_true",
                        help=f"disable the default exclusion of tag {DEFAULT_EXCLUDE_TAG!r}")
    common.add_argument("--y", type=float, default=2749.0, metavar="F", help="event size of interest (default 2749)")
    common.add_argument("--n", type=int, default=None, metavar="INT",
                        help="number of events for the probability (default: catalog size)")
    common.add_argument("--B", type=int, default=2000, metavar="INT", help="bootstrap replicates; 0 disables")
    common.add_argument("--level", type=float, default=0.90, metavar="F", help="interval coverage (default 0.90)")
    common.add_argument("--seed", type=int, default=None, metavar="U64", help=f"master seed (fallback: ${SEED_ENV})")
    common.add_argument("--jobs", type=int, default=1, metavar="INT", help="worker processes; results do not depend on it")
    common.add_argument("--out", default=None, metavar="DIR", help="write all artifacts here instead of stdout")
    common.add_argument("--emit", action="append", default=None, choices=("json", "tsv", "svg"),
                        help="artifact kinds to produce (repeatable)")
    common.add_argument("--jitter", action="store_true", help="add seeded uniform(0, 1) noise to severities")
    common.add_argument("--strict", action="store_true", help="require an explicit seed when randomness is used")

    parser = _Parser(prog="pot-tailrisk", description="Peaks-over-threshold tail risk for event-severity catalogs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("fit", "GPD fit at one threshold with bootstrap brackets"),
                        ("prob", "probability of at least one event of size y"),
                        ("qq", "qq points of the fitted GPD")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--mu", type=float, default=10.0, metavar="F", help="threshold (default 10)")
    for name, help_ in (("mrl", "mean residual life curve"),
                        ("sweep", "threshold sensitivity sweep")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--grid", default=None, metavar="LO:HI:STEP", help=f"inclusive grid (default {DEFAULT_GRID[name]})")
        if name == "sweep":
            p.add_argument("--model", choices=("gpd", "dpl"), default="gpd",
                           help="dpl sweeps x_min of a discrete power law")
    return parser


def _resolve_seed(args, needs_seed: bool) -> tuple[Optional[int], Optional[str]]:
    if args.seed is not None:
        source = "flag"
        seed = args.seed
    elif os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
        source = "env"
    elif not needs_seed:
        return None, None
    elif args.strict:
        raise UsageError("--seed (or POT_TAILRISK_SEED) is required with --strict")
    else:
        seed = time.time_ns() & MASK64
        source = "time"
        warnings.warn(f"no --seed given; using time-based seed {seed}", stacklevel=2)
    if not 0 <= seed <= MASK64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return seed, source


def make_config(args) -> RunConfig:
    if args.B < 0:
        raise UsageError("--B must be >= 0")
    if not 0 < args.level < 1:
        raise UsageError("--level must lie in (0, 1)")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.n is not None and args.n < 0:
        raise UsageError("--n must be >= 0")
    emit = sorted(set(args.emit)) if args.emit else DEFAULT_EMIT[args.command]
    if "svg" in emit and args.out is None:
        raise UsageError("--emit svg needs --out")
    tags = list(args.exclude_tag)
    if not tags and not args.exclude_severity and not args.no_exclude:
        tags = [DEFAULT_EXCLUDE_TAG]
    uses_bootstrap = args.command in ("fit", "sweep") and args.B > 0
    seed, source = _resolve_seed(args, uses_bootstrap or args.jitter)
    cfg = RunConfig(
        command=args.command,
        input_path=args.input,
        format=args.format,
        exclude_tags=tags,
        exclude_severities=list(args.exclude_severity),
        y=args.y,
        n=args.n,
        B=args.B if args.command in ("fit", "sweep") else 0,
        level=args.level,
        seed=seed,
        seed_source=source,
        jobs=args.jobs,
        out=args.out,
        emit=list(emit),
        model=getattr(args, "model", "gpd"),
        jitter=args.jitter,
        strict=args.strict,
    )
    if hasattr(args, "mu"):
        cfg.mu = args.mu
    if hasattr(args, "grid"):
        cfg.grid = parse_grid(args.grid or DEFAULT_GRID[args.command])
    return cfg


def load_catalog(cfg: RunConfig):
    try:
        catalog = read_catalog(cfg.input_path, cfg.format)
        for tag in cfg.exclude_tags:
            catalog = exclude(catalog, ExclusionRule(tag=tag))
        for sev in cfg.exclude_severities:
            catalog = exclude(catalog, ExclusionRule(severity=sev))
    except (OSError, UnicodeDecodeError, CatalogError) as exc:
        raise StageError("load", EXIT_DATA, str(exc)) from None
    if cfg.jitter:
        catalog = catalog.jittered(stream(cfg.seed, JITTER_STREAM))
    return catalog


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _interval(row, name):
    iv = row.intervals.get(name)
    return None if iv is None else [_num(iv[0]), _num(iv[1])]


def gpd_row_json(row) -> dict:
    fit = row.fit
    d = {
        "mu": row.mu,
        "n_tail": row.n_tail,
        "tail_fraction": row.tail_fraction,
        "converged": row.converged,
        "xi": _num(fit.xi) if fit else None,
        "sigma": _num(fit.sigma) if fit else None,
        "reduction_stat": _num(row.reduction_stat),
        "ks": _num(row.ks),
        "prob_event": _num(row.prob_event),
        "log_likelihood": _num(fit.log_likelihood) if fit else None,
        "optimizer_iterations": fit.optimizer_iterations if fit else None,
        "error": row.error,
    }
    if row.intervals:
        d["intervals"] = {q: _interval(row, q) for q in GPD_QUANTITIES}
        d["n_failed"] = {q: row.n_failed.get(q) for q in GPD_QUANTITIES}
    return d


def dpl_row_json(row) -> dict:
    fit = row.fit
    d = {
        "xmin": row.xmin,
        "n_tail": row.n_tail,
        "tail_fraction": row.tail_fraction,
        "converged": row.converged,
        "alpha": _num(fit.alpha) if fit else None,
        "ks": _num(fit.ks_statistic) if fit else None,
        "prob_event": _num(row.prob_event),
        "error": row.error,
    }
    if row.intervals:
        d["intervals"] = {q: _interval(row, q) for q in DPL_QUANTITIES}
        d["n_failed"] = {q: row.n_failed.get(q) for q in DPL_QUANTITIES}
    return d


def _cell(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def tsv(columns, rows) -> str:
    lines = ["\t".join(columns)]
    lines += ["\t".join(_cell(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def gpd_tsv_rows_from_json(json_rows):
    for d in json_rows:
        ivs = d.get("intervals", {})
        out = [d["mu"], d["n_tail"], d["tail_fraction"], d["converged"]]
        for q in ("xi", "sigma", "reduction_stat"):
            lo, hi = ivs.get(q) or (None, None)
            out += [d[q], lo, hi]
        lo, hi = ivs.get("prob_event") or (None, None)
        yield out + [d["ks"], d["prob_event"], lo, hi]


def dpl_tsv_rows(rows):
    for r in rows:
        d = dpl_row_json(r)
        ivs = d.get("intervals", {})
        a = ivs.get("alpha") or (None, None)
        p = ivs.get("prob_event") or (None, None)
        yield [d["xmin"], d["n_tail"], d["tail_fraction"], d["alpha"], a[0], a[1], d["ks"], d["prob_event"], p[0], p[1]]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


class Output:
    """Collects named artifacts; writes them under ``--out`` or prints the primary one."""

    def __init__(self, cfg: RunConfig, primary: str):
        self.cfg = cfg
        self.primary = primary
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str):
        self.files[name] = text

    def flush(self, stdout):
        if self.cfg.out is None:
            stdout.write(self.files[self.primary])
            return
        out = Path(self.cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        self.files["config.json"] = dumps(self.cfg.to_json(runtime=True))
        for name, text in sorted(self.files.items()):
            (out / name).write_text(text, encoding="utf-8")


def _band_chart(x, point, ivs, title, xlabel, ylabel, ylog=False):
    chart = Chart(title=title, xlabel=xlabel, ylabel=ylabel, ylog=ylog)
    lo = [iv[0] if iv else math.nan for iv in ivs]
    hi = [iv[1] if iv else math.nan for iv in ivs]
    if any(iv for iv in ivs):
        chart.band(x, lo, hi)
    return chart.line(x, point).points(x, point)


def _gpd_fit(catalog, mu):
    try:
        tail = exceedances(catalog, mu)
    except CatalogError as exc:
        raise StageError("threshold", EXIT_DATA, str(exc)) from None
    try:
        return tail, fit_gpd(tail, mu)
    except CatalogError as exc:
        raise StageError("fit", EXIT_DATA, str(exc)) from None
    except FitError as exc:
        raise StageError("fit", EXIT_NUMERIC, str(exc)) from None


def cmd_fit(cfg: RunConfig, catalog) -> tuple[dict, int]:
    _gpd_fit(catalog, cfg.mu)  # stage-specific errors before the sweep machinery
    try:
        (row,) = threshold_sweep(catalog, [cfg.mu], cfg.y, cfg.B, cfg.seed or 0, cfg.level, cfg.n, cfg.jobs)
    except BootstrapError as exc:
        raise StageError("bootstrap", EXIT_NUMERIC, str(exc)) from None
    except DomainError as exc:
        raise StageError("probability", EXIT_DATA, str(exc)) from None
    report = {"command": "fit", "config": cfg.to_json(), "source": catalog.source, "n_events": catalog.n,
              "rows": [gpd_row_json(row)]}
    code = EXIT_OK if row.converged else EXIT_NUMERIC
    return report, code


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cfg = make_config(args)
            catalog = load_catalog(cfg)
            code = _dispatch(cfg, catalog, stdout)
        except UsageError as exc:
            stderr.write(f"pot-tailrisk: usage error: {exc}\n")
            code = EXIT_USAGE
        except StageError as exc:
            stderr.write(f"pot-tailrisk: error [{exc.stage}]: {exc}\n")
            code = exc.code
    for w in caught:
        stderr.write(f"pot-tailrisk: warning: {w.message}\n")
    return code


def _dispatch(cfg: RunConfig, catalog, stdout) -> int:
    cmd = cfg.command
    if cmd == "fit":
        report, code = cmd_fit(cfg, catalog)
        out = Output(cfg, "report.json")
        out.add("report.json", dumps(report))
        if "tsv" in cfg.emit:
            out.add("sweep.tsv", tsv(SWEEP_COLUMNS, gpd_tsv_rows_from_json(report["rows"])))
        out.flush(stdout)
        return code

    if cmd == "prob":
        _, fit = _gpd_fit(catalog, cfg.mu)
        count, frac = tail_count(catalog, cfg.mu)
        n = catalog.n if cfg.n is None else cfg.n
        try:
            prob = event_probability(EventProbabilityInput(cfg.y, n, 1.0 - frac, fit))
        except DomainError as exc:
            raise StageError("probability", EXIT_DATA, str(exc)) from None
        report = {"command": "prob", "config": cfg.to_json(), "mu": cfg.mu, "y": cfg.y, "n": n,
                  "p_hat": 1.0 - frac, "xi": fit.xi, "sigma": fit.sigma, "converged": fit.converged,
                  "prob_event": prob}
        out = Output(cfg, "report.json")
        out.add("report.json", dumps(report))
        out.flush(stdout)
        return EXIT_OK if fit.converged else EXIT_NUMERIC

    if cmd == "qq":
        tail, fit = _gpd_fit(catalog, cfg.mu)
        pts = qq_points(fit, tail)
        out = Output(cfg, "qq.tsv")
        out.add("qq.tsv", tsv(QQ_COLUMNS, pts.tolist()))
        if "svg" in cfg.emit:
            chart = Chart(title=f"GPD qq plot, mu={cfg.mu:g}", xlabel="fitted GPD quantile",
                          ylabel="empirical quantile", xlog=True, ylog=True)
            out.add("qq.svg", chart.diagonal().points(pts[:, 0], pts[:, 1]).render())
        out.flush(stdout)
        return EXIT_OK if fit.converged else EXIT_NUMERIC

    if cmd == "mrl":
        try:
            curve = mrl_curve(catalog, cfg.grid)
        except CatalogError as exc:
            raise StageError("mrl", EXIT_DATA, str(exc)) from None
        rows = zip(curve.thresholds.tolist(), curve.mean_excess.tolist(), curve.lo.tolist(), curve.hi.tolist(),
                   curve.n_exceed.tolist())
        out = Output(cfg, "mrl.tsv")
        out.add("mrl.tsv", tsv(MRL_COLUMNS, rows))
        if "svg" in cfg.emit:
            chart = Chart(title="Mean residual life", xlabel="threshold", ylabel="mean excess")
            chart.band(curve.thresholds, curve.lo, curve.hi).line(curve.thresholds, curve.mean_excess)
            out.add("mrl.svg", chart.render())
        out.flush(stdout)
        return EXIT_OK

    # sweep
    try:
        if cfg.model == "dpl":
            rows = dpl_sweep(catalog, [int(round(v)) for v in cfg.grid], cfg.y, cfg.B, cfg.seed or 0, cfg.level,
                             cfg.n, cfg.jobs)
            json_rows = [dpl_row_json(r) for r in rows]
            table = tsv(DPL_COLUMNS, dpl_tsv_rows(rows))
        else:
            rows = threshold_sweep(catalog, cfg.grid, cfg.y, cfg.B, cfg.seed or 0, cfg.level, cfg.n, cfg.jobs)
            json_rows = [gpd_row_json(r) for r in rows]
            table = tsv(SWEEP_COLUMNS, gpd_tsv_rows_from_json(json_rows))
    except BootstrapError as exc:
        raise StageError("bootstrap", EXIT_NUMERIC, str(exc)) from None
    except DomainError as exc:
        raise StageError("probability", EXIT_DATA, str(exc)) from None
    report = {"command": "sweep", "config": cfg.to_json(), "source": catalog.source, "n_events": catalog.n,
              "model": cfg.model, "rows": json_rows}
    out = Output(cfg, "sweep.tsv" if "tsv" in cfg.emit else "report.json")
    if "tsv" in cfg.emit:
        out.add("sweep.tsv", table)
    if "json" in cfg.emit:
        out.add("report.json", dumps(report))
    if "svg" in cfg.emit:
        key = "xmin" if cfg.model == "dpl" else "mu"
        x = [r[key] for r in json_rows]
        shape = "alpha" if cfg.model == "dpl" else "xi"
        ivs = lambda q: [(r.get("intervals") or {}).get(q) for r in json_rows]  # noqa: E731
        label = "x_min" if cfg.model == "dpl" else "threshold mu"
        out.add(f"{shape}.svg", _band_chart(x, [_nan(r[shape]) for r in json_rows], ivs(shape),
                                            f"estimated {shape}", label, shape).render())
        out.add("prob.svg", _band_chart(x, [_nan(r["prob_event"]) for r in json_rows], ivs("prob_event"),
                                        f"probability of an event of size >= {cfg.y:g}", label,
                                        "probability").render())
    out.flush(stdout)
    return EXIT_OK


def _nan(v):
    return math.nan if v is None else v


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
