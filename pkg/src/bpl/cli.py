"""``bpl`` experiment runner.

Every command writes a CSV with the fixed header :data:`HEADER`, sorted by
``(family, n, L, target)``, plus a JSON ``.meta`` sidecar holding run metadata
(wall time, workers, version).  Data files carry no timestamps, so identical
configurations give byte-identical CSVs.

Usage::

    bpl fig2 --samples 50000 --seed 7 --n 1:60:1 --L 4 --out fig2.csv
    bpl fig3-right --n 4:28:2 --L 4:48:4 --out fig3right.csv
    bpl fit --input fig3right.csv --model powerL --per n --min-n 16 --min-L 4
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__, analytic, dicke, estimator, scaling, statevec
from .core import BplError, CostFamily, FamilyTag, Target
from .estimator import GradientSpec, GradMethod, Integration
from .kernels import BACKEND

HEADER = ("family", "n", "L", "gamma", "delta", "target", "estimate", "stderr", "samples", "seed", "method")
FIT_HEADER = ("model", "per", "group", "exponent", "prefactor", "r_squared", "points", "domain_filter")

COMMANDS = ("cost", "variance", "fig2", "fig3-left", "fig3-right", "grover-sweep", "qaoa-ring", "fit", "xi-separable")
QUADRATURE_MAX_N = 24


class ConfigError(BplError, ValueError):
    pass


@dataclass(frozen=True)
class ResultRow:
    family: str
    n: int
    L: int
    gamma: float
    delta: float
    target: str
    estimate: float
    stderr: float
    samples: int
    seed: int
    method: str

    def sort_key(self):
        return (self.family, self.n, self.L, self.target, self.delta, self.gamma, self.method)


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    n: tuple[int, ...] = ()
    L: tuple[int, ...] = ()
    samples: int | None = None
    seed: int = 0
    gamma: float | None = None
    delta: float | None = None
    out: Path = Path("bpl.csv")
    format: str = "csv"
    family: str | None = None
    alpha: float | None = None
    L_max: int | None = None
    nodes: int = estimator.QUADRATURE_NODES
    grid: int = 32
    input: Path | None = None
    model: str = "powerL"
    per: str = "n"
    min_n: int = scaling.MIN_N
    min_L: int = scaling.MIN_L
    target: str | None = None
    workers: int | None = None


# -- formatting ----------------------------------------------------------------------

def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in sorted(rows, key=ResultRow.sort_key):
        w.writerow([
            r.family, r.n, r.L, fmt_float(r.gamma), fmt_float(r.delta), r.target,
            fmt_float(r.estimate), fmt_float(r.stderr), r.samples, r.seed, r.method,
        ])
    return buf.getvalue()


def read_rows(path: Path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != HEADER:
            raise ConfigError(f"{path}: not a bpl result CSV")
        return [
            ResultRow(
                r["family"], int(r["n"]), int(r["L"]), float(r["gamma"]), float(r["delta"]), r["target"],
                float(r["estimate"]), float(r["stderr"]), int(r["samples"]), int(r["seed"]), r["method"],
            )
            for r in reader
        ]


def fits_to_csv(fits: Sequence[tuple[str, str, scaling.ScalingFit]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_HEADER)
    for per, group, f in fits:
        w.writerow([f.model.value, per, group, fmt_float(f.exponent), fmt_float(f.prefactor),
                    fmt_float(f.r_squared), f.points, f.domain_filter])
    return buf.getvalue()


# -- parsing ------------------------------------------------------------------------

def parse_range(text: str) -> tuple[int, ...]:
    """``A:B:S`` inclusive of ``B`` when hit exactly; ``A:B`` steps by 1; ``A`` is a single value."""
    parts = str(text).strip().split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected start:stop:step") from None
    if len(nums) == 1:
        return (nums[0],)
    if len(nums) == 2:
        nums.append(1)
    if len(nums) != 3:
        raise ConfigError(f"bad range {text!r}; expected start:stop:step")
    start, stop, step = nums
    if step <= 0:
        raise ConfigError(f"range step must be positive in {text!r}")
    values = tuple(range(start, stop + 1, step))
    if not values:
        raise ConfigError(f"empty range {text!r}")
    return values


def load_config_file(path: Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


_DEFAULTS = {
    "cost": {"n": "4:12:2", "L": "4", "samples": 10_000, "family": "separable_pure"},
    "variance": {"n": "4:12:2", "L": "4", "samples": 10_000, "family": "separable_pure"},
    "fig2": {"n": "1:60:1", "L": "4", "samples": 50_000},
    "fig3-left": {"n": "4:28:2", "L": "4:48:4", "samples": 20_000},
    "fig3-right": {"n": "4:28:2", "L": "4:48:4", "samples": 20_000},
    "grover-sweep": {"n": "8:20:2", "L": "0", "samples": 0},
    "qaoa-ring": {"n": "4:10:2", "L": "1:5:1", "samples": 0},
    "fit": {"n": "0", "L": "0", "samples": 0},
    "xi-separable": {"n": "1,2,4,8", "L": "0", "samples": 100_000},
}


def _parse_list_or_range(text: str) -> tuple[int, ...]:
    if "," in str(text):
        try:
            return tuple(int(x) for x in str(text).split(","))
        except ValueError:
            raise ConfigError(f"bad list {text!r}") from None
    return parse_range(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpl", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"bpl {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--n", help="qubit range start:stop:step (xi range for xi-separable)")
        s.add_argument("--L", help="layer range start:stop:step")
        s.add_argument("--samples", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--gamma", type=float)
        s.add_argument("--delta", type=float)
        s.add_argument("--out", type=Path)
        s.add_argument("--format", choices=("csv", "csv+svg"))
        s.add_argument("--config", type=Path)
        s.add_argument("--family", choices=[t.value for t in FamilyTag])
        s.add_argument("--alpha", type=float, help="grover-sweep rotation angle (default 2pi/n)")
        s.add_argument("--L-max", dest="L_max", type=int, help="grover-sweep depth cap (default ceil(4 2^(n/2)))")
        s.add_argument("--nodes", type=int, help="quadrature nodes for fig3-right")
        s.add_argument("--grid", type=int, help="grid resolution for qaoa-ring")
        s.add_argument("--input", type=Path, help="result CSV for fit")
        s.add_argument("--model", choices=("powerL", "expN"))
        s.add_argument("--per", choices=("n", "L"), help="fit one curve per value of this column")
        s.add_argument("--min-n", dest="min_n", type=int)
        s.add_argument("--min-L", dest="min_L", type=int)
        s.add_argument("--target", help="restrict fit to rows with this target")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    file_cfg = load_config_file(args.config) if getattr(args, "config", None) else {}
    defaults = _DEFAULTS[args.command]

    def pick(key, conv=str, default=None):
        v = getattr(args, key, None)
        if v is not None:
            return v
        if key in file_cfg:
            try:
                return conv(file_cfg[key])
            except ValueError:
                raise ConfigError(f"config value {key}={file_cfg[key]!r} is not valid") from None
        return defaults.get(key, default)

    seed = pick("seed", int, 0)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    fmt = pick("format", str, "csv")
    if fmt not in ("csv", "csv+svg"):
        raise ConfigError(f"unknown format {fmt!r}")
    cfg = ExperimentConfig(
        command=args.command,
        n=_parse_list_or_range(pick("n")),
        L=_parse_list_or_range(pick("L")),
        samples=pick("samples", int),
        seed=seed,
        gamma=pick("gamma", float),
        delta=pick("delta", float),
        out=Path(pick("out", Path, f"{args.command}.csv")),
        format=fmt,
        family=pick("family"),
        alpha=pick("alpha", float),
        L_max=pick("L_max", int),
        nodes=pick("nodes", int, estimator.QUADRATURE_NODES),
        grid=pick("grid", int, 32),
        input=pick("input", Path),
        model=pick("model", str, "powerL"),
        per=pick("per", str, "n"),
        min_n=pick("min_n", int, scaling.MIN_N),
        min_L=pick("min_L", int, scaling.MIN_L),
        target=pick("target"),
    )
    validate(cfg)
    return cfg


def _family_tag(cfg: ExperimentConfig) -> FamilyTag:
    try:
        return FamilyTag(cfg.family or "separable_pure")
    except ValueError:
        raise ConfigError(f"unknown family {cfg.family!r}") from None


def validate(cfg: ExperimentConfig) -> None:
    """Reject configurations whose grid violates the target family's preconditions."""
    c = cfg.command
    if c not in COMMANDS:
        raise ConfigError(f"unknown command {c!r}")
    if c in ("cost", "variance", "fig2", "fig3-left", "fig3-right", "xi-separable") and (cfg.samples or 0) < 100:
        raise ConfigError("--samples must be >= 100")
    if c in ("cost", "variance"):
        tag = _family_tag(cfg)
        if tag is FamilyTag.XI_SEPARABLE_M1:
            raise ConfigError("use the xi-separable command for the Haar family")
        for n in cfg.n:
            for L in cfg.L:
                try:
                    _family(tag, n, L, cfg)
                except BplError as exc:
                    raise ConfigError(f"n={n}, L={L}: {exc}") from None
    if c == "fig2" and min(cfg.n) < 1:
        raise ConfigError("fig2 needs n >= 1")
    if c in ("fig3-left", "fig3-right"):
        bad = [n for n in cfg.n if n % 2 or n < 2]
        if bad:
            raise ConfigError(f"{c} needs even n >= 2, got {bad}")
        bad = [L for L in cfg.L if L % 4 or L < 4]
        if bad:
            raise ConfigError(f"{c} needs L = 0 mod 4, got {bad}")
    if c == "grover-sweep" and any(n % 2 or n < 2 for n in cfg.n):
        raise ConfigError("grover-sweep needs even n >= 2")
    if c == "qaoa-ring":
        if any(n % 2 or not 4 <= n <= 10 for n in cfg.n):
            raise ConfigError("qaoa-ring needs even 4 <= n <= 10")
        if any(not 1 <= L <= 6 for L in cfg.L):
            raise ConfigError("qaoa-ring needs 1 <= L <= 6")
    if c == "xi-separable":
        if any(x < 1 for x in cfg.n):
            raise ConfigError("xi must be >= 1")
        if cfg.delta is not None and not 0 <= cfg.delta < 0.5:
            raise ConfigError("delta must lie in [0, 1/2)")
    if c == "fit":
        if cfg.input is None:
            raise ConfigError("fit needs --input")
        if cfg.model not in ("powerL", "expN") or cfg.per not in ("n", "L"):
            raise ConfigError("fit needs --model powerL|expN and --per n|L")
    if cfg.delta is not None and not 0 <= cfg.delta < 0.5:
        raise ConfigError("delta must lie in [0, 1/2)")


# -- commands -------------------------------------------------------------------------

def _family(tag: FamilyTag, n: int, L: int, cfg: ExperimentConfig) -> CostFamily:
    extras = {}
    if tag is FamilyTag.SEPARABLE_MIXED:
        extras["delta"] = cfg.delta if cfg.delta is not None else 0.01
    if tag in (FamilyTag.GROVER_SLOW_GENERAL, FamilyTag.GROVER_SLOW_CORRELATED, FamilyTag.ROD_LOCAL,
               FamilyTag.ROD_GLOBAL):
        extras["gamma"] = cfg.gamma if cfg.gamma is not None else 0.01
    if tag is FamilyTag.GROVER_EXACT:
        extras["gamma"] = cfg.gamma if cfg.gamma is not None else math.pi
    return CostFamily(tag, n, L, extras)


def _default_scheme(fam: CostFamily):
    from .core import CorrelationKind

    correlated = fam.tag in (FamilyTag.GROVER_SLOW_CORRELATED, FamilyTag.ROD_GLOBAL, FamilyTag.GROVER_EXACT)
    kind = CorrelationKind.PERFECTLY_CORRELATED if correlated else CorrelationKind.UNCORRELATED
    return estimator.scheme_for(fam, kind)


def _parallel(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _mc_rows(cfg: ExperimentConfig, target: Target, workers: int) -> list[ResultRow]:
    tag = _family_tag(cfg)

    def point(nl):
        n, L = nl
        fam = _family(tag, n, L, cfg)
        grad = GradientSpec(GradMethod.CENTRAL_FD if tag in (FamilyTag.GROVER_EXACT, FamilyTag.JXJY_ASYMPTOTIC)
                            else GradMethod.ANALYTIC)
        rec = estimator.mc_moments(fam, _default_scheme(fam), target, cfg.samples, cfg.seed, grad, workers=1)
        if target is Target.COST:
            est, se, name = rec.mean, rec.stderr, "cost"
        else:
            est, se, name = rec.variance, rec.variance_stderr, "variance"
        return ResultRow(tag.value, n, L, fam.gamma, fam.delta, name, est, se, rec.samples, cfg.seed, rec.method)

    return _parallel(point, [(n, L) for n in cfg.n for L in cfg.L], workers)


def cmd_cost(cfg, workers):
    return _mc_rows(cfg, Target.COST, workers)


def cmd_variance(cfg, workers):
    return _mc_rows(cfg, Target.DERIVATIVE, workers)


FIG2_DELTAS = (0.01, 0.10)


def cmd_fig2(cfg, workers):
    from .core import CorrelationScheme

    L = cfg.L[0]
    traces = [(FamilyTag.SEPARABLE_PURE, 0.0)] + [(FamilyTag.SEPARABLE_MIXED, d) for d in FIG2_DELTAS]

    def point(item):
        (tag, delta), n = item
        fam = CostFamily(tag, n, L, {"delta": delta} if tag is FamilyTag.SEPARABLE_MIXED else {})
        rec = estimator.mc_moments(fam, CorrelationScheme.uncorrelated(L), Target.DERIVATIVE, cfg.samples, cfg.seed,
                                   workers=1)
        return ResultRow(tag.value, n, L, 0.0, delta, "variance", rec.variance, rec.variance_stderr, rec.samples,
                         cfg.seed, rec.method)

    return _parallel(point, [(t, n) for t in traces for n in cfg.n], workers)


def cmd_fig3_left(cfg, workers):
    def point(nl):
        n, L = nl
        rec = estimator.fig3_left_point(n, L, cfg.samples, cfg.seed, workers=1)
        return ResultRow("grover_slow_correlated", n, L, 0.0, 0.0, "gamma4_dtheta_second_moment", rec.mean,
                         rec.stderr, rec.samples, cfg.seed, rec.method)

    return _parallel(point, [(n, L) for n in cfg.n for L in cfg.L], workers)


def cmd_fig3_right(cfg, workers):
    def point(nl):
        n, L = nl
        if n <= QUADRATURE_MAX_N:
            rec = estimator.grover_exact_second_moment(n, L, Integration.QUADRATURE, cfg.nodes, cfg.seed)
        else:
            rec = estimator.grover_exact_second_moment(n, L, Integration.MC, cfg.samples, cfg.seed, workers=1)
        return ResultRow("grover_exact", n, L, math.pi, 0.0, "dalpha_second_moment", rec.mean, rec.stderr,
                         rec.samples, cfg.seed, rec.method)

    return _parallel(point, [(n, L) for n in cfg.n for L in cfg.L], workers)


@dataclass(frozen=True)
class SweepResult:
    n: int
    alpha: float
    costs: np.ndarray
    argmin_L: int
    min_cost: float


def grover_sweep_point(n: int, alpha: float | None = None, gamma: float = math.pi,
                       L_max: int | None = None) -> SweepResult:
    """Costs for ``L = 0..L_max`` and the best depth ``L >= 1``."""
    alpha = 2 * math.pi / n if alpha is None else alpha
    L_max = L_max or math.ceil(4 * 2 ** (n / 2))
    costs = dicke.grover_cost_trace(alpha, gamma, n, L_max)
    best = int(np.argmin(costs[1:])) + 1
    return SweepResult(n, alpha, costs, best, float(costs[best]))


def grover_sweep(cfg: ExperimentConfig, workers: int = 1):
    """Sweep depth for each n; returns ``(rows, sweeps, fit)``."""
    gamma = cfg.gamma if cfg.gamma is not None else math.pi
    sweeps = _parallel(lambda n: grover_sweep_point(n, cfg.alpha, gamma, cfg.L_max), list(cfg.n), workers)
    rows = []
    for sw in sweeps:
        for L, c in enumerate(sw.costs):
            rows.append(ResultRow("grover_exact", sw.n, L, gamma, 0.0, "cost", c, 0.0, 1, cfg.seed, "dicke/exact"))
        L_max = len(sw.costs) - 1
        rows.append(ResultRow("grover_exact", sw.n, L_max, gamma, 0.0, "argmin_L", sw.argmin_L, 0.0, 1, cfg.seed,
                              "sweep"))
        rows.append(ResultRow("grover_exact", sw.n, L_max, gamma, 0.0, "min_cost", sw.min_cost, 0.0, 1, cfg.seed,
                              "sweep"))
    fit = None
    if len(sweeps) >= 3:
        fit = scaling.fit_exp_n([(sw.n, sw.argmin_L) for sw in sweeps], min_n=min(cfg.n))
    return rows, sweeps, fit


def cmd_qaoa_ring(cfg, workers):
    def point(nl):
        n, L = nl
        opt = statevec.maximize_correlated_qaoa(n, L, grid=cfg.grid)
        method = f"grid{cfg.grid}+coordinate"
        return [
            ResultRow("rod_local", n, L, opt.gamma, 0.0, "max_local_cost", opt.value, 0.0, 1, cfg.seed, method),
            ResultRow("rod_local", n, L, opt.gamma, 0.0, "argmax_beta", opt.beta, 0.0, 1, cfg.seed, method),
        ]

    return [r for rows in _parallel(point, [(n, L) for n in cfg.n for L in cfg.L], workers) for r in rows]


def cmd_xi_separable(cfg, workers):
    delta = cfg.delta if cfg.delta is not None else 0.0

    def point(xi):
        rec = estimator.xi_separable_grad_mc(xi, delta, cfg.samples, cfg.seed, workers=1)
        fam = "xi_separable_m1"
        return [
            ResultRow(fam, xi, 0, 0.0, delta, "variance_mc", rec.mean, rec.stderr, rec.samples, cfg.seed, rec.method),
            ResultRow(fam, xi, 0, 0.0, delta, "variance_residue", analytic.variance_xi_separable_m1(xi, delta), 0.0,
                      1, cfg.seed, "closed_form"),
            ResultRow(fam, xi, 0, 0.0, delta, "variance_direct", analytic.variance_xi_separable_direct(xi, delta),
                      0.0, 1, cfg.seed, "closed_form"),
        ]

    return [r for rows in _parallel(point, list(cfg.n), workers) for r in rows]


def fit_rows(rows: Sequence[ResultRow], model: str, per: str, min_n: int, min_L: int,
             target: str | None = None) -> list[tuple[str, str, scaling.ScalingFit]]:
    """One fit per distinct value of ``per``, plus a ``mean`` row averaging the exponents."""
    if target:
        rows = [r for r in rows if r.target == target]
    groups: dict[int, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault(getattr(r, per), []).append(r)
    fits = []
    for key in sorted(groups):
        g = groups[key]
        if model == "powerL":
            if per == "n" and key < min_n:
                continue
            pts = [(r.L, r.estimate) for r in g]
            try:
                f = scaling.fit_power_L(pts, min_L)
            except scaling.InsufficientData:
                continue
        else:
            if per == "L" and key < min_L:
                continue
            pts = [(r.n, r.estimate) for r in g]
            try:
                f = scaling.fit_exp_n(pts, min_n)
            except scaling.InsufficientData:
                continue
        fits.append((per, str(key), f))
    if fits:
        ex = scaling.mean_exponent([f for _, _, f in fits])
        first = fits[0][2]
        mean_fit = scaling.ScalingFit(first.model, ex, math.nan, min(f.r_squared for _, _, f in fits),
                                      f"mean over {len(fits)} {per}-groups", len(fits))
        fits.append((per, "mean", mean_fit))
    return fits


# -- output ---------------------------------------------------------------------------

def _write_svg(path: Path, rows: Sequence[ResultRow], title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "bpl"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    curves: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        if r.estimate > 0:
            curves.setdefault((r.family, r.target, r.delta, r.L), []).append(r)
    for (family, target, delta, L), rs in sorted(curves.items()):
        rs = sorted(rs, key=lambda r: r.n)
        ax.plot([r.n for r in rs], [r.estimate for r in rs], marker=".", label=f"{family} d={delta:g} L={L}")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_title(title)
    if len(curves) <= 16:
        ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_meta(cfg: ExperimentConfig, workers: int, wall: float, extra: dict) -> None:
    meta = {
        "command": cfg.command,
        "version": __version__,
        "kernel_backend": BACKEND,
        "workers": workers,
        "wall_time_s": round(wall, 3),
        "config": {f.name: (str(getattr(cfg, f.name)) if isinstance(getattr(cfg, f.name), Path)
                            else getattr(cfg, f.name)) for f in fields(cfg)},
        **extra,
    }
    _write_text(cfg.out.with_suffix(cfg.out.suffix + ".meta"), json.dumps(meta, indent=2, default=str) + "\n")


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute one configured command and write its files; returns the exit status."""
    stdout = stdout or sys.stdout
    workers = cfg.workers or estimator.default_workers()
    t0 = time.perf_counter()
    extra: dict = {}
    fits_text = None
    if cfg.command == "fit":
        try:
            rows_in = read_rows(cfg.input)
        except OSError as exc:
            print(f"bpl: cannot read {cfg.input}: {exc}", file=sys.stderr)
            return 3
        fits = fit_rows(rows_in, cfg.model, cfg.per, cfg.min_n, cfg.min_L, cfg.target)
        if not fits:
            print("bpl: no group had enough points to fit", file=sys.stderr)
            return 2
        text = fits_to_csv(fits)
        mean = fits[-1][2]
        print(f"{cfg.model} per {cfg.per}: mean exponent {mean.exponent:.4f} over {mean.points} groups", file=stdout)
        rows = None
    else:
        handlers = {
            "cost": cmd_cost, "variance": cmd_variance, "fig2": cmd_fig2, "fig3-left": cmd_fig3_left,
            "fig3-right": cmd_fig3_right, "qaoa-ring": cmd_qaoa_ring, "xi-separable": cmd_xi_separable,
        }
        if cfg.command == "grover-sweep":
            rows, sweeps, fit = grover_sweep(cfg, workers)
            if fit is not None:
                fits_text = fits_to_csv([("n", "all", fit)])
                print(f"log2(argmin L) vs n slope {-fit.exponent:.4f} (R2 {fit.r_squared:.3f})", file=stdout)
        else:
            rows = handlers[cfg.command](cfg, workers)
        text = rows_to_csv(rows)
    try:
        _write_text(cfg.out, text)
        if fits_text is not None:
            _write_text(cfg.out.with_suffix(".fit.csv"), fits_text)
        if rows and cfg.format == "csv+svg" and cfg.command in ("fig2", "fig3-left", "fig3-right", "cost",
                                                                 "variance", "grover-sweep", "xi-separable"):
            plot_rows = [r for r in rows if r.target not in ("cost",)] if cfg.command == "grover-sweep" else rows
            _write_svg(cfg.out.with_suffix(".svg"), plot_rows, cfg.command)
        _write_meta(cfg, workers, time.perf_counter() - t0, extra)
    except ImportError:
        print("bpl: --format csv+svg needs matplotlib (pip install bpl[plot])", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bpl: cannot write output: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {cfg.out}", file=stdout)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"bpl: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bpl: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        return run(cfg)
    except BplError as exc:
        print(f"bpl: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
