"""Command-line front end.

Every table-producing command writes a header that records its full
configuration; ``config_from_header`` reads it back so the file can be
regenerated.  Exit codes: 0 success, 2 usage, 3 numeric domain, 4 I/O.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .experiments import (DEFAULT_SEED, default_s_grid, run_coupling_experiment, run_largest_family_experiment,
                          run_tail_decay_experiment, run_tail_experiment)
from .limit_laws import g_of_S, ml_cdf, ml_density, ml_moment, z_moment
from .partitions import (CRPParams, SetPartition, crp_table_counts, dup_partition_prob, enumerate_partitions,
                         ewens_prob)
from .sim_core import ModelParams, census, simulate_duplication

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

TABLE_COMMANDS = ("simulate", "tail", "coupling", "largest", "decay", "crp", "partition-prob")
EVAL_TARGETS = ("g", "ml-density", "ml-cdf", "ml-moment", "z-moment", "dup-prob", "ewens-prob")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    r: Optional[float] = None
    n: Optional[int] = None
    reps: Optional[int] = None
    seed: int = DEFAULT_SEED
    k: Optional[int] = None
    alpha: Optional[float] = None
    theta: Optional[float] = None
    s_grid: Optional[str] = None
    x_grid: Optional[str] = None
    n_list: Optional[str] = None
    partition: Optional[str] = None
    format: str = "csv"
    # not part of the header: neither changes the numbers
    out: Optional[str] = None
    threads: Optional[int] = None

    HEADER_EXCLUDE = ("out", "threads")

    def header_items(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name not in self.HEADER_EXCLUDE and v is not None:
                yield f.name, v

    def validate(self):
        c = self.command
        if c not in TABLE_COMMANDS:
            raise UsageError(f"unknown command {c!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.seed < 0:
            raise UsageError("--seed must be nonnegative")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads must be >= 1")
        need = {
            "simulate": ("r", "n"),
            "tail": ("r", "n", "reps"),
            "coupling": ("r", "n_list", "reps"),
            "largest": ("r", "n", "reps"),
            "decay": ("r", "n", "reps", "x_grid"),
            "crp": ("alpha", "theta", "n", "reps"),
            "partition-prob": ("r",),
        }[c]
        for name in need:
            if getattr(self, name) is None:
                raise UsageError(f"{c} requires --{name.replace('_', '-')}")
        if self.reps is not None and self.reps < 1:
            raise UsageError("--reps must be >= 1")
        if self.n is not None and self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.r is not None:
            lo_ok = 0.0 <= self.r <= 1.0 if c == "simulate" else 0.0 < self.r < 1.0
            if not lo_ok:
                raise UsageError(f"--r={self.r} is outside the allowed range for {c}")
        if c == "largest":
            k = 1 if self.k is None else self.k
            if not 1 <= k <= self.n:
                raise UsageError("--k must satisfy 1 <= k <= n")
        if c == "partition-prob":
            if (self.partition is None) == (self.n is None):
                raise UsageError("partition-prob takes exactly one of --partition and --n")
            if self.n is not None and self.n > 12:
                raise UsageError("--n is capped at 12 for enumeration")
        if c == "crp":
            try:
                CRPParams(self.alpha, self.theta)
            except ValueError as e:
                raise UsageError(str(e)) from None
        # grids must parse
        if self.s_grid is not None:
            parse_grid(self.s_grid, integer=True)
        if self.x_grid is not None:
            parse_grid(self.x_grid)
        if self.n_list is not None:
            parse_grid(self.n_list, integer=True)


# --------------------------------------------------------------------------
# grids and number formatting

def parse_grid(spec: str, integer: bool = False) -> np.ndarray:
    """``"1,2,5"`` or ``"geom:LO:HI:POINTS"``; integer grids are rounded and deduplicated."""
    try:
        if spec.startswith("geom:"):
            lo, hi, pts = spec[5:].split(":")
            vals = np.geomspace(float(lo), float(hi), int(pts))
        else:
            vals = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse grid {spec!r}") from None
    if vals.size == 0 or not np.all(np.isfinite(vals)):
        raise UsageError(f"empty or non-finite grid {spec!r}")
    if np.any(np.diff(vals) <= 0):
        raise UsageError(f"grid {spec!r} must be ascending")
    if integer:
        vals = np.unique(np.round(vals).astype(np.int64))
    return vals


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


# --------------------------------------------------------------------------
# tables

@dataclass
class Table:
    columns: List[str]
    rows: List[Sequence]
    name: str = "table"


def _simulate(cfg: RunConfig, threads) -> List[Table]:
    labels = simulate_duplication(ModelParams(cfg.r, cfg.n), cfg.seed)
    fc = census(labels)
    sizes = fc.sizes
    census_rows = [(k, s) for k, s in sizes.items()]
    S = np.arange(1, int(fc.family_sizes[-1]) + 1)
    counts = fc.tail_counts(S)
    # one row per distinct tail count change keeps the table plot-ready and short
    keep = np.r_[True, np.diff(counts) != 0]
    tail_rows = list(zip(S[keep].tolist(), counts[keep].tolist()))
    return [Table(["label", "size"], census_rows, "census"), Table(["S", "count"], tail_rows, "tail")]


def _tail(cfg, threads):
    grid = default_s_grid(cfg.r, cfg.n) if cfg.s_grid is None else parse_grid(cfg.s_grid, integer=True)
    t = run_tail_experiment(cfg.r, cfg.n, cfg.reps, grid, cfg.seed, threads)
    return [Table(["S", "mean_F", "stderr", "g_S"], t.rows(), "tail")]


def _coupling(cfg, threads):
    rep = run_coupling_experiment(cfg.r, parse_grid(cfg.n_list, integer=True), cfg.reps, cfg.seed, threads)
    return [Table(["N", "mean_gap", "stderr", "bound", "ratio"], rep.rows(), "coupling")]


def _largest(cfg, threads):
    k = 1 if cfg.k is None else cfg.k
    rep = run_largest_family_experiment(cfg.r, cfg.n, cfg.reps, k, cfg.seed, threads)
    rows = [(f"moment_{int(m)}", mean, se, th) for m, mean, se, th in rep.moments]
    rows.append(("ks_D", rep.ks_D, math.nan, math.nan))
    rows.append(("ks_p", rep.ks_p, math.nan, math.nan))
    rows.append(("kept_fraction", rep.acceptance, math.nan, math.nan))
    return [Table(["statistic", "value", "stderr", "theory"], rows, "largest")]


def _decay(cfg, threads):
    d = run_tail_decay_experiment(cfg.r, cfg.n, cfg.reps, parse_grid(cfg.x_grid), cfg.seed, threads)
    u = d.x ** (1.0 / d.r)
    rows = [(x, ui, e, s) for (x, e, s), ui in zip(d.rows(), u.tolist())]
    rows.append(("slope", d.slope, d.slope_stderr, d.t_stat))
    return [Table(["x", "x_pow", "estimate", "stderr"], rows, "decay")]


def _crp(cfg, threads):
    k = crp_table_counts(CRPParams(cfg.alpha, cfg.theta), cfg.n, cfg.reps, cfg.seed)
    vals, cnt = np.unique(k, return_counts=True)
    rows = [(int(v), int(c), c / cfg.reps) for v, c in zip(vals, cnt)]
    return [Table(["tables", "count", "frequency"], rows, "crp")]


def _partition_prob(cfg, threads):
    parts = [SetPartition.parse(cfg.partition)] if cfg.partition else enumerate_partitions(cfg.n)
    cols = ["partition", "blocks", "dup_prob"] + (["ewens_prob"] if cfg.theta is not None else [])
    rows = []
    for p in parts:
        row = [str(p), p.k, dup_partition_prob(cfg.r, p)]
        if cfg.theta is not None:
            row.append(ewens_prob(cfg.theta, p))
        rows.append(row)
    return [Table(cols, rows, "partitions")]


RUNNERS = {
    "simulate": _simulate, "tail": _tail, "coupling": _coupling, "largest": _largest,
    "decay": _decay, "crp": _crp, "partition-prob": _partition_prob,
}


def render(cfg: RunConfig, tables: List[Table]) -> str:
    if cfg.format == "json":
        doc = {
            "yulefam": __version__,
            "config": dict(cfg.header_items()),
            "tables": {t.name: {"columns": t.columns, "rows": [[_json_value(v) for v in row] for row in t.rows]}
                       for t in tables},
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# yulefam v{__version__}\n")
    for key, v in cfg.header_items():
        buf.write(f"# {key}={v!r}\n" if isinstance(v, float) else f"# {key}={fmt(v)}\n")
    for i, t in enumerate(tables):
        if i:
            buf.write(f"# table={t.name}\n")
        buf.write(",".join(t.columns) + "\n")
        for row in t.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def run_config(cfg: RunConfig) -> str:
    """Validate, compute and return the rendered output (no I/O)."""
    cfg.validate()
    threads = cfg.threads if cfg.threads is not None else (os.cpu_count() or 1)
    return render(cfg, RUNNERS[cfg.command](cfg, threads))


_FIELD_TYPES = {"r": float, "alpha": float, "theta": float, "n": int, "reps": int, "seed": int, "k": int,
                "threads": int}


def _coerce(key, value):
    typ = _FIELD_TYPES.get(key)
    if typ is None:
        return value
    try:
        if typ is float:
            return float(value)
        try:
            return int(value)
        except ValueError:
            f = float(value)
            if not f.is_integer():
                raise
            return int(f)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None


def config_from_header(text: str) -> RunConfig:
    """Rebuild the ``RunConfig`` recorded in a CSV or JSON output."""
    if text.lstrip().startswith("{"):
        items = json.loads(text)["config"]
    else:
        items = {}
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# yulefam v"):
            raise UsageError("not a yulefam output file")
        for line in lines[1:]:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].partition("=")
            items[key] = value
    names = {f.name for f in dataclasses.fields(RunConfig)}
    kwargs = {k: _coerce(k, v) for k, v in items.items() if k in names}
    return RunConfig(**kwargs)


# --------------------------------------------------------------------------
# eval

def evaluate(target: str, ns: argparse.Namespace) -> float:
    def need(*names):
        missing = [n for n in names if getattr(ns, n) is None]
        if missing:
            raise UsageError(f"eval {target} requires " + ", ".join("--" + m for m in missing))
        return [getattr(ns, n) for n in names]

    if target == "g":
        r, n, s = need("r", "n", "s")
        return float(g_of_S(r, n, s))
    if target == "ml-density":
        a, x = need("alpha", "x")
        return float(ml_density(a, x))
    if target == "ml-cdf":
        a, x = need("alpha", "x")
        return float(ml_cdf(a, x))
    if target == "ml-moment":
        a, m = need("alpha", "m")
        return float(ml_moment(a, m))
    if target == "z-moment":
        r, k, m = need("r", "k", "m")
        return float(z_moment(r, k, m))
    if target == "dup-prob":
        r, p = need("r", "partition")
        return dup_partition_prob(r, SetPartition.parse(p))
    if target == "ewens-prob":
        th, p = need("theta", "partition")
        return ewens_prob(th, SetPartition.parse(p))
    raise UsageError(f"unknown eval target {target!r}")


# --------------------------------------------------------------------------
# argument handling

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="yulefam", description="Simulate the duplication model and evaluate its limit laws.")
    p.add_argument("--version", action="version", version=f"yulefam {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *flags):
        for f in flags:
            typ = {"--r": float, "--n": int, "--reps": int, "--k": int, "--alpha": float, "--theta": float,
                   "--seed": int, "--threads": int}.get(f, str)
            sp.add_argument(f, type=typ, default=None)
        sp.add_argument("--seed", type=int, default=None, help="master seed (default: $YULEFAM_SEED or built-in)")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
        sp.add_argument("--config", default=None, help="key=value file; flags take precedence")

    common(sub.add_parser("simulate", help="one population: census and tail counts"), "--r", "--n")
    common(sub.add_parser("tail", help="mean family counts against g(S)"), "--r", "--n", "--reps", "--s-grid")
    common(sub.add_parser("coupling", help="coupling gap against 5/sqrt(N)"), "--r", "--n-list", "--reps")
    common(sub.add_parser("largest", help="scaled size of family k"), "--r", "--n", "--reps", "--k")
    common(sub.add_parser("decay", help="families larger than x N^(1-r)"), "--r", "--n", "--reps", "--x-grid")
    common(sub.add_parser("crp", help="table counts of the Chinese restaurant process"),
           "--alpha", "--theta", "--n", "--reps")
    common(sub.add_parser("partition-prob", help="exact partition probabilities"),
           "--r", "--theta", "--n", "--partition")

    ev = sub.add_parser("eval", help="evaluate a closed form or special function")
    ev.add_argument("target", choices=EVAL_TARGETS)
    for f, typ in (("--r", float), ("--n", int), ("--s", float), ("--alpha", float), ("--x", float),
                   ("--m", float), ("--k", int), ("--theta", float), ("--partition", str)):
        ev.add_argument(f, type=typ, default=None)
    return p


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"config line without '=': {line!r}")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def config_from_args(ns: argparse.Namespace, environ=os.environ) -> RunConfig:
    names = [f.name for f in dataclasses.fields(RunConfig) if f.name != "command"]
    values = {}
    if ns.config:
        file_vals = read_config_file(ns.config)
        unknown = set(file_vals) - set(names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update({k: _coerce(k, v) for k, v in file_vals.items()})
    for name in names:
        v = getattr(ns, name, None)
        if v is not None:
            values[name] = v
    if "seed" not in values:
        env = environ.get("YULEFAM_SEED")
        if env is not None:
            values["seed"] = _coerce("seed", env)
    return RunConfig(ns.command, **values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command == "eval":
            print(format(evaluate(ns.target, ns), ".15g"))
            return 0
        cfg = config_from_args(ns)
        text = run_config(cfg)
    except UsageError as e:
        print(f"yulefam: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"yulefam: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as e:
        print(f"yulefam: numeric error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        if cfg.out:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as e:
        print(f"yulefam: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
