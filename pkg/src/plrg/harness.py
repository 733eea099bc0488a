"""Experiment runner: config in, deterministic CSV and a JSON manifest out."""
from __future__ import annotations

import json
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from ._rng import stream
from .bernoulli import lone_clique_follower_stats, mc_nonisolated_given_no_clique
from .dist import Regime, TailModel, classify_regime, regime_trend, sample_iid, scaling_a_n
from .errors import InvalidParameterError, NumericError, PLRGError
from .graphex import sample_graphex
from .graphon import GraphonGrid, clique_stretch_ensemble, expected_clique_size, mismatch_fraction, stretch_by_clique
from .hardgraph import build_hard_graph
from .height import BoundaryReport, FluctuationSummary, boundary_profile, fluctuation_summary
from .stats import (
    MotifEvent, edge_count_samples, expected_edges, expected_vertices, motif_mc, supercritical_clique_stats,
    vertex_count_samples,
)

log = logging.getLogger(__name__)

EXPERIMENTS = ("motifs", "edges_vertices", "supercritical", "graphex", "height", "graphon", "bernoulli", "regimes")
CSV_COLUMNS = ("experiment", "event", "alpha", "gamma", "n", "reps", "estimate", "se", "asymptote", "ratio")
PLOT_KINDS = ("graphon_heatmap", "boundary_curve", "cov_matrix")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    experiment: str
    alpha: float = 2.0
    gamma: tuple[float, ...] = (1.5,)
    n_list: tuple[int, ...] = (1000,)
    reps: int = 1000
    seed: int = 0
    x_grid: tuple[float, ...] = (0.25, 0.5, 0.75)
    output_dir: str = "out"
    threads: int = 1
    method: str = "plain"
    x0: float = 4.0
    check: bool = False

    def __post_init__(self):
        self.gamma = tuple(float(g) for g in np.atleast_1d(self.gamma))
        self.n_list = tuple(int(n) for n in np.atleast_1d(self.n_list))
        self.x_grid = tuple(float(x) for x in np.atleast_1d(self.x_grid))
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidParameterError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.reps < 1:
            raise InvalidParameterError("reps must be >= 1")
        if not self.n_list or min(self.n_list) < 2:
            raise InvalidParameterError("n_list must be non-empty with every n >= 2")
        if not self.gamma or min(self.gamma) <= 0:
            raise InvalidParameterError("gamma values must be positive")
        if self.alpha <= 0:
            raise InvalidParameterError("alpha must be positive")
        if any(not 0 < x < 1 for x in self.x_grid):
            raise InvalidParameterError("x_grid must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise InvalidParameterError("threads must be >= 1")
        if self.method not in ("plain", "importance"):
            raise InvalidParameterError("method must be 'plain' or 'importance'")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameterError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidParameterError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise InvalidParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("gamma", "n_list", "x_grid"):
            d[k] = list(d[k])
        return d


@dataclass
class Row:
    experiment: str
    event: str
    alpha: float
    gamma: float
    n: int
    reps: int
    estimate: float
    se: float
    asymptote: float
    ratio: float

    def fields(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _ratio(est, asym):
    return est / asym if asym else float("nan")


@dataclass
class ExperimentResult:
    rows: list[Row]
    checks: dict[str, bool] = field(default_factory=dict)
    artifacts: dict[str, object] = field(default_factory=dict)
    sub_seeds: dict[str, int] = field(default_factory=dict)


def sub_seed(seed: int, *key) -> int:
    """Seed for one (experiment, gamma, n) cell, derived from the master seed."""
    return int(stream(seed, "sub_seed", *key).integers(2**63))


def _cells(cfg: ExperimentConfig):
    for gi, g in enumerate(cfg.gamma):
        for n in cfg.n_list:
            yield g, n, sub_seed(cfg.seed, cfg.experiment, gi, n)


def _slope(ns, ys):
    ns, ys = np.asarray(ns, float), np.asarray(ys, float)
    if ns.size < 2 or np.any(ys <= 0):
        return float("nan")
    return float(np.polyfit(np.log(ns), np.log(ys), 1)[0])


# ------------------------------------------------------------ experiments

def _motifs(cfg):
    res = ExperimentResult([])
    for g, n, s in _cells(cfg):
        res.sub_seeds[f"{g!r}/{n}"] = s
        est = {}
        for ev in MotifEvent:
            if n < ev.order:
                continue
            r = motif_mc(ev, cfg.alpha, g, n, cfg.reps, s, cfg.method, threads=cfg.threads)
            est[ev] = r
            res.rows.append(Row("motifs", ev.value, cfg.alpha, g, n, r.reps, r.mc_mean, r.mc_se, r.asymptote, r.ratio))
        # no path hits means the comparison carries no information
        if MotifEvent.TRIANGLE in est and MotifEvent.PATH2 in est and est[MotifEvent.PATH2].mc_mean > 0:
            res.checks[f"triangle<path gamma={g!r} n={n}"] = est[MotifEvent.TRIANGLE].mc_mean < est[MotifEvent.PATH2].mc_mean
    return res


def _edges_vertices(cfg):
    res = ExperimentResult([])
    for gi, g in enumerate(cfg.gamma):
        means = []
        for n in cfg.n_list:
            s = sub_seed(cfg.seed, cfg.experiment, gi, n)
            res.sub_seeds[f"{g!r}/{n}"] = s
            e = edge_count_samples(cfg.alpha, g, n, cfg.reps, s, threads=cfg.threads)
            v = vertex_count_samples(cfg.alpha, g, n, cfg.reps, s + 1, threads=cfg.threads)
            ea, va = expected_edges(cfg.alpha, g, n, "asymptotic"), expected_vertices(cfg.alpha, g, n, "asymptotic")
            se_e = float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else float("nan")
            se_v = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
            res.rows.append(Row("edges_vertices", "edges", cfg.alpha, g, n, cfg.reps, float(e.mean()), se_e, ea, _ratio(e.mean(), ea)))
            res.rows.append(Row("edges_vertices", "vertices", cfg.alpha, g, n, cfg.reps, float(v.mean()), se_v, va, _ratio(v.mean(), va)))
            means.append(float(e.mean()))
        if len(cfg.n_list) >= 3 and g < 2:
            slope = _slope(cfg.n_list, means)
            res.rows.append(Row("edges_vertices", "edges_loglog_slope", cfg.alpha, g, max(cfg.n_list), cfg.reps,
                                slope, float("nan"), 2 - g, _ratio(slope, 2 - g)))
            res.checks[f"edge slope gamma={g!r}"] = abs(slope - (2 - g)) <= 0.1
    return res


def _supercritical(cfg):
    res = ExperimentResult([])
    for g, n, s in _cells(cfg):
        res.sub_seeds[f"{g!r}/{n}"] = s
        r = supercritical_clique_stats(cfg.alpha, g, n, cfg.reps, s, threads=cfg.threads)
        for rep in (r.lone_star, r.lone_star_one_follower):
            res.rows.append(Row("supercritical", rep.event, cfg.alpha, g, n, r.reps, rep.mc_mean, rep.mc_se, rep.asymptote, rep.ratio))
        res.rows.append(Row("supercritical", "p_clique_ge1", cfg.alpha, g, n, r.reps, r.p_clique_ge1, 0.0,
                            r.clique_asymptote, _ratio(r.p_clique_ge1, r.clique_asymptote)))
        res.rows.append(Row("supercritical", "p_clique_eq1", cfg.alpha, g, n, r.reps, r.p_clique_eq1, 0.0,
                            r.clique_asymptote, _ratio(r.p_clique_eq1, r.clique_asymptote)))
        for (v, k0), c in sorted(r.configurations.items()):
            p = c / r.reps
            res.rows.append(Row("supercritical", f"config_v{v}_k{k0}", cfg.alpha, g, n, r.reps, p,
                                math.sqrt(p * (1 - p) / r.reps), float("nan"), float("nan")))
        if r.n_nonempty:
            res.checks[f"modal (2,1) gamma={g!r} n={n}"] = r.modal_configuration == (2, 1)
    return res


def _graphex(cfg):
    # n_list holds the graphex times t
    res = ExperimentResult([])
    for g, t, s in _cells(cfg):
        res.sub_seeds[f"{g!r}/{t}"] = s
        k0 = np.empty(cfg.reps)
        edges = np.empty(cfg.reps)
        for i in range(cfg.reps):
            gx = sample_graphex(float(t), cfg.x0, cfg.alpha, stream(s, "graphex", i))
            k0[i] = gx.k0
            edges[i] = gx.edge_count
        lam = t * cfg.x0 ** (-cfg.alpha / 2)
        se = float(k0.std(ddof=1) / math.sqrt(cfg.reps)) if cfg.reps > 1 else float("nan")
        res.rows.append(Row("graphex", "clique_size", cfg.alpha, g, t, cfg.reps, float(k0.mean()), se, lam, _ratio(k0.mean(), lam)))
        se_e = float(edges.std(ddof=1) / math.sqrt(cfg.reps)) if cfg.reps > 1 else float("nan")
        res.rows.append(Row("graphex", "edges", cfg.alpha, g, t, cfg.reps, float(edges.mean()), se_e, float("nan"), float("nan")))
        if cfg.reps > 1:
            res.checks[f"poisson mean t={t}"] = abs(k0.mean() - lam) <= 3 * math.sqrt(lam / cfg.reps) + 1e-12
    return res


def _height(cfg):
    res = ExperimentResult([])
    model = TailModel(cfg.alpha)
    for g, n, s in _cells(cfg):
        res.sub_seeds[f"{g!r}/{n}"] = s
        a = scaling_a_n(cfg.alpha, g, n)
        f = fluctuation_summary(model, n, a, cfg.x_grid, cfg.reps, s, threads=cfg.threads)
        xs = f.x_grid
        for i, x in enumerate(xs):
            for j, y in enumerate(xs):
                if j < i:
                    continue
                e, t = f.emp_cov[i, j], f.target_cov[i, j]
                res.rows.append(Row("height", f"cov({x!r};{y!r})", cfg.alpha, g, n, cfg.reps, float(e), float("nan"), float(t), _ratio(e, t)))
        res.rows.append(Row("height", "identity_residual", cfg.alpha, g, n, cfg.reps, f.max_identity_residual, 0.0, 0.0, float("nan")))
        diag = np.diag(f.emp_cov) / np.diag(f.target_cov)
        res.checks[f"variance within 15% gamma={g!r} n={n}"] = bool(np.all(np.abs(diag - 1) <= 0.15))
        res.checks[f"identity gamma={g!r} n={n}"] = f.max_identity_residual <= 1e-9
        res.artifacts[f"cov_gamma{g!r}_n{n}"] = f
        b = boundary_profile(model, n, a, list(cfg.x_grid) + [1.0], max(1, cfg.reps // 10), s + 1, threads=cfg.threads)
        for x, h, ref in zip(b.x_grid, b.h_hat, b.h_ref):
            res.rows.append(Row("height", f"boundary({x!r})", cfg.alpha, g, n, b.reps, float(h), float("nan"), float(ref), _ratio(h, ref)))
        res.artifacts[f"boundary_gamma{g!r}_n{n}"] = b
    return res


def _graphon(cfg):
    res = ExperimentResult([])
    for gi, g in enumerate(cfg.gamma):
        fracs = []
        for n in cfg.n_list:
            s = sub_seed(cfg.seed, cfg.experiment, gi, n)
            res.sub_seeds[f"{g!r}/{n}"] = s
            w = clique_stretch_ensemble(cfg.alpha, g, n, cfg.reps, s, threads=cfg.threads)
            m = mismatch_fraction(w)
            fracs.append(m)
            res.rows.append(Row("graphon", "mismatch_fraction", cfg.alpha, g, n, cfg.reps, m, float("nan"), 0.0, float("nan")))
            res.artifacts[f"heatmap_gamma{g!r}_n{n}"] = w
            one = single_clique_stretch(cfg.alpha, g, n, s + 1)
            res.rows.append(Row("graphon", "mismatch_fraction_single", cfg.alpha, g, n, 1, mismatch_fraction(one),
                                float("nan"), 0.0, float("nan")))
            res.artifacts[f"single_gamma{g!r}_n{n}"] = one
        if g < 2 and len(fracs) >= 2:
            res.checks[f"mismatch trend gamma={g!r}"] = fracs[-1] < fracs[0]
    return res


def single_clique_stretch(alpha: float, gamma: float, n: int, seed: int, window: float = 3.0, k: int = 60) -> GraphonGrid:
    """Clique-stretched graphon of one full sample of size ``n``."""
    a = scaling_a_n(alpha, gamma, n)
    g = build_hard_graph(sample_iid(TailModel(alpha), n, seed), a)
    return stretch_by_clique(g, expected_clique_size(alpha, n, a), window, k)


def _bernoulli(cfg):
    res = ExperimentResult([])
    for g, n, s in _cells(cfg):
        res.sub_seeds[f"{g!r}/{n}"] = s
        r = mc_nonisolated_given_no_clique(cfg.alpha, g, n, cfg.reps, s, threads=cfg.threads)
        res.rows.append(Row("bernoulli", r.event, cfg.alpha, g, n, r.reps, r.mc_mean, r.mc_se, r.asymptote, r.ratio))
        if g / cfg.alpha < 1:
            res.checks[f"non-isolated gamma={g!r} n={n}"] = r.mc_mean >= 0.9
        else:
            res.checks[f"X1 constant gamma={g!r} n={n}"] = 0.7 <= r.ratio <= 1.3
        lc = lone_clique_follower_stats(cfg.alpha, g, n, cfg.reps, s + 1, threads=cfg.threads)
        res.rows.append(Row("bernoulli", "lone_clique_one_follower_share", cfg.alpha, g, n, lc.reps,
                            lc.p_one_follower, float("nan"), float("nan"), float("nan")))
    return res


def _regimes(cfg):
    res = ExperimentResult([])
    model = TailModel(cfg.alpha)
    ns = np.array([2**p for p in range(10, 21)])
    for g in cfg.gamma:
        reg = classify_regime(model, gamma=g)
        trend = regime_trend(model, lambda n, g=g: scaling_a_n(cfg.alpha, g, n), ns)
        slope = _slope(ns, trend)
        res.rows.append(Row("regimes", reg.value, cfg.alpha, g, int(ns[-1]), 0, slope, float("nan"),
                            1 - g / 2, _ratio(slope, 1 - g / 2)))
        expect = Regime.SUB_CRITICAL if g < 2 else Regime.SUPER_CRITICAL
        res.checks[f"regime gamma={g!r}"] = reg is expect
    return res


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "motifs": _motifs, "edges_vertices": _edges_vertices, "supercritical": _supercritical,
    "graphex": _graphex, "height": _height, "graphon": _graphon, "bernoulli": _bernoulli, "regimes": _regimes,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)


def write_csv(rows: list[Row], path) -> None:
    lines = [",".join(CSV_COLUMNS)] + [",".join(r.fields()) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(report, kind: str, out_dir, stem: str = "plot") -> list[Path]:
    """Whitespace-delimited files for external plotting."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind not in PLOT_KINDS:
        raise InvalidParameterError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    if kind == "graphon_heatmap":
        if not isinstance(report, GraphonGrid):
            raise InvalidParameterError("graphon_heatmap needs a GraphonGrid")
        p = out / f"{stem}.heatmap.txt"
        np.savetxt(p, report.values, fmt="%.17g", header=f"k={report.k} side={report.side!r}")
        return [p]
    if kind == "boundary_curve":
        if not isinstance(report, BoundaryReport):
            raise InvalidParameterError("boundary_curve needs a boundary profile report")
        p1, p2 = out / f"{stem}.boundary.txt", out / f"{stem}.reference.txt"
        np.savetxt(p1, np.column_stack([report.x_grid, report.h_hat]), fmt="%.17g", header="x h_hat")
        np.savetxt(p2, np.column_stack([report.x_grid, report.h_ref]), fmt="%.17g", header="x one_over_x")
        return [p1, p2]
    if not isinstance(report, FluctuationSummary):
        raise InvalidParameterError("cov_matrix needs a fluctuation summary")
    xs = report.x_grid
    p = out / f"{stem}.cov.txt"
    rows = [(x, y, report.emp_cov[i, j], report.target_cov[i, j]) for i, x in enumerate(xs) for j, y in enumerate(xs)]
    np.savetxt(p, np.array(rows), fmt="%.17g", header="x y emp_cov target_cov")
    return [p]


def _emit_artifacts(res: ExperimentResult, out: Path, experiment: str) -> list[str]:
    files = []
    for name, obj in sorted(res.artifacts.items()):
        if isinstance(obj, GraphonGrid):
            kind = "graphon_heatmap"
        elif isinstance(obj, BoundaryReport):
            kind = "boundary_curve"
        elif isinstance(obj, FluctuationSummary):
            kind = "cov_matrix"
            obj.to_csv(out / f"{experiment}_{name}.csv")
            files.append(f"{experiment}_{name}.csv")
        else:
            continue
        files += [p.name for p in emit_plot_data(obj, kind, out, f"{experiment}_{name}")]
    return files


def run(config: ExperimentConfig | dict, check: bool | None = None) -> int:
    """Run one experiment; returns a process exit code."""
    try:
        cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig(**config)
    except (PLRGError, TypeError, ValueError) as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    check = cfg.check if check is None else check
    out = Path(cfg.output_dir)
    start = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_experiment(cfg)
    except NumericError as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except (PLRGError, ValueError) as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    wall = time.perf_counter() - start
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.experiment}.csv"
    write_csv(res.rows, csv_path)
    files = _emit_artifacts(res, out, cfg.experiment)
    manifest = {
        "config": cfg.to_dict(),
        "version": __version__,
        "seed": cfg.seed,
        "sub_seeds": res.sub_seeds,
        "wall_time_s": wall,
        "csv": csv_path.name,
        "plot_files": files,
        "checks": {k: bool(v) for k, v in res.checks.items()},
    }
    (out / f"{cfg.experiment}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    failed = [k for k, ok in res.checks.items() if not ok]
    for k in failed:
        log.warning("check failed: %s", k)
    if check and failed:
        return EXIT_CHECK
    return EXIT_OK
