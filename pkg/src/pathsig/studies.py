"""Monte Carlo studies: null calibration, independence, screening, model-size
selection, and power.

Each study maps a pure per-replication function over rep indices 0..n_reps-1
(serially or on a process pool) and folds the rows into summary aggregates.
Replication r draws from streams keyed by ``seed XOR r`` with independent
sub-streams for the design and the noise, so the per-rep table is identical
whatever the execution order or worker count.  Summaries are recomputable
exactly from the per-rep rows.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import repeat

import numpy as np

from .covtest import (
    CovSeries,
    cov_stat_general,
    cov_stat_orthogonal,
    pvalue_exp,
    series_from_path,
)
from .designs import DesignMatrix, ResponseSpec, make_design, padded_beta, simulate_response
from .errors import ContractError, ParameterError
from .model_size import SelectorConfig, q_statistic, select_k0
from .path import orthogonal_knots, path_until_entering
from .penalties import LASSO, PenaltySpec, mcp, scad
from .rng import rep_seed, substream_seed

STUDIES = ("null_qq", "independence", "screening", "table1", "power")
STATISTICS = ("cov_lasso", "cov_scad", "cov_mcp", "max_rss_drop", "max_cov12")
COV_STATISTICS = ("cov_lasso", "cov_scad", "cov_mcp")

_GRID_MIN_REPS = 80  # 4x4 cells need expected counts >= 5


@dataclass(frozen=True)
class StudyConfig:
    """Full description of one study run; reproducible from (config, seed)."""

    study: str
    family: str
    n: int
    p: int
    rho: float = 0.0
    block_size: int | None = None
    s: int | None = None
    beta: tuple[float, ...] = ()
    sigma: float = 1.0
    n_reps: int = 500
    seed: int = 42
    statistics: tuple[str, ...] = ("cov_lasso",)
    scad_a: float = 3.7
    mcp_gamma: float = 3.0
    level: float = 0.05
    theta_grid: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
    k0: int = 0
    d: int = 3
    k_min: int = 0
    k_max: int = 4
    fixed_design: bool = False
    threads: int | None = None

    @property
    def sigma2(self) -> float:
        return self.sigma**2

    def full_beta(self) -> np.ndarray:
        return padded_beta(np.asarray(self.beta, dtype=float), self.p)


@dataclass
class StudyResult:
    """Per-replication records plus summary aggregates for one study."""

    study: str
    config: dict
    columns: list[str]
    per_rep: list[dict]
    summary: list[tuple[str, float, float | None]]
    extras: dict[str, list[dict]] = field(default_factory=dict)
    wall_seconds: float = 0.0

    def summary_value(self, metric: str) -> float:
        for name, value, _ in self.summary:
            if name == metric:
                return value
        raise KeyError(metric)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.per_rep], dtype=float)


def default_config(study: str, **overrides) -> StudyConfig:
    """Paper-default configuration for each study."""
    defaults = {
        "null_qq": dict(family="orthogonal", n=100, p=50, n_reps=500, d=3),
        "independence": dict(family="orthogonal", n=100, p=10, n_reps=500, k0=0),
        "screening": dict(
            family="irrep_violating", n=600, p=2000, s=6,
            beta=(5.0,) * 6, n_reps=500, k0=6,
        ),
        "table1": dict(
            family="iid_gaussian", n=500, p=10, beta=(6.0, 6.0),
            n_reps=1000, d=6, k_min=0, k_max=4,
        ),
        "power": dict(
            family="iid_gaussian", n=100, p=10, n_reps=1000, level=0.05,
            statistics=("cov_lasso", "max_cov12", "max_rss_drop"),
        ),
    }
    if study not in defaults:
        raise ParameterError(f"unknown study {study!r}; expected one of {STUDIES}")
    params = dict(defaults[study])
    params.update(overrides)
    return StudyConfig(study=study, **params)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _validate(cfg: StudyConfig) -> None:
    if cfg.study not in STUDIES:
        raise ParameterError(f"unknown study {cfg.study!r}; expected one of {STUDIES}")
    if cfg.n_reps < 1:
        raise ParameterError(f"n_reps must be >= 1, got {cfg.n_reps}")
    if not 0.0 < cfg.level < 1.0:
        raise ParameterError(f"level must be in (0, 1), got {cfg.level}")
    if cfg.d < 1:
        raise ParameterError(f"d must be >= 1, got {cfg.d}")
    if cfg.k0 < 0:
        raise ParameterError(f"k0 must be >= 0, got {cfg.k0}")
    for stat in cfg.statistics:
        if stat not in STATISTICS:
            raise ParameterError(f"unknown statistic {stat!r}; expected one of {STATISTICS}")
    if cfg.family != "orthogonal":
        for stat in cfg.statistics:
            if stat in ("cov_scad", "cov_mcp"):
                raise ContractError(
                    f"{stat} uses the orthogonal closed form and requires the "
                    f"orthogonal family, got {cfg.family!r}"
                )
    beta = cfg.full_beta()
    if cfg.study in ("null_qq", "independence"):
        if np.any(beta != 0.0):
            raise ContractError(f"{cfg.study} study requires the global null (beta = 0)")
        for stat in cfg.statistics:
            if stat not in COV_STATISTICS:
                raise ParameterError(f"{cfg.study} accepts covariance statistics only")
    elif cfg.study == "screening":
        if cfg.family != "irrep_violating":
            raise ContractError("screening study requires the irrep_violating family")
        s = cfg.s or 0
        if s < 1 or s > 25:
            raise ParameterError(f"screening requires 1 <= s <= 25, got {s}")
        if not (np.all(beta[:s] != 0.0) and np.all(beta[s:] == 0.0)):
            raise ParameterError(
                "screening study requires beta nonzero exactly on the first s coordinates"
            )
    elif cfg.study == "table1":
        if cfg.family != "iid_gaussian":
            raise ContractError("table1 study requires the iid_gaussian family")
        if cfg.k_min < 0 or cfg.k_max < cfg.k_min:
            raise ParameterError("need 0 <= k_min <= k_max")
    elif cfg.study == "power":
        if cfg.family not in ("iid_gaussian", "orthogonal"):
            raise ContractError("power study requires iid_gaussian or orthogonal designs")
        if len(cfg.theta_grid) == 0:
            raise ParameterError("power study requires a nonempty theta_grid")
        if any(t < 0 for t in cfg.theta_grid):
            raise ParameterError("theta_grid entries must be nonnegative")
        allowed = ("cov_lasso", "max_cov12", "max_rss_drop")
        for stat in cfg.statistics:
            if stat not in allowed:
                raise ParameterError(f"power study accepts statistics {allowed}, got {stat!r}")


# ---------------------------------------------------------------------------
# Per-replication records
# ---------------------------------------------------------------------------


def _instance_seeds(cfg: StudyConfig, rep: int, instance: int = 0) -> tuple[int, int]:
    base = rep_seed(cfg.seed, rep)
    design_base = rep_seed(cfg.seed, 0) if cfg.fixed_design else base
    return (
        substream_seed(design_base, 2 * instance),
        substream_seed(base, 2 * instance + 1),
    )


def _draw(cfg: StudyConfig, beta: np.ndarray, rep: int, instance: int = 0):
    dseed, nseed = _instance_seeds(cfg, rep, instance)
    X = make_design(
        cfg.family, cfg.n, cfg.p,
        rho=cfg.rho, block_size=cfg.block_size, s=cfg.s, seed=dseed,
    )
    y = simulate_response(X, ResponseSpec(beta=beta, sigma=cfg.sigma, seed=nseed))
    return X, y


def _penalty_for(cfg: StudyConfig, stat: str) -> PenaltySpec:
    if stat == "cov_lasso":
        return LASSO
    if stat == "cov_scad":
        return scad(cfg.scad_a)
    return mcp(cfg.mcp_gamma)


def _cov_series(cfg: StudyConfig, X: DesignMatrix, y: np.ndarray, n_stats: int,
                stat: str = "cov_lasso") -> np.ndarray:
    """T_1..T_{n_stats} for one instance (closed form on orthogonal designs)."""
    if cfg.family == "orthogonal":
        V = orthogonal_knots(X, y)
        pen = _penalty_for(cfg, stat)
        return np.array(
            [cov_stat_orthogonal(V, k, cfg.sigma2, pen) for k in range(1, n_stats + 1)]
        )
    path = path_until_entering(X, y, min_entering=n_stats + 1)
    return series_from_path(X, y, path, cfg.sigma2, n_stats).values


def _null_qq_rep(cfg: StudyConfig, rep: int) -> dict:
    X, y = _draw(cfg, np.zeros(cfg.p), rep)
    row = {"rep": rep}
    if cfg.family == "orthogonal":
        V = orthogonal_knots(X, y)
        for stat in cfg.statistics:
            pen = _penalty_for(cfg, stat)
            for j in range(1, cfg.d + 1):
                row[f"{stat}_T{j}"] = cov_stat_orthogonal(V, j, cfg.sigma2, pen)
    else:
        T = _cov_series(cfg, X, y, cfg.d)
        for j in range(1, cfg.d + 1):
            row[f"cov_lasso_T{j}"] = float(T[j - 1])
    return row


def _independence_rep(cfg: StudyConfig, rep: int) -> dict:
    X, y = _draw(cfg, np.zeros(cfg.p), rep)
    T = _cov_series(cfg, X, y, cfg.k0 + 2)
    t1, t2 = float(T[cfg.k0]), float(T[cfg.k0 + 1])
    # general-design statistics can dip slightly below 0; the null upper-tail
    # probability there is 1
    return {
        "rep": rep,
        "T1": t1,
        "T2": t2,
        "p1": pvalue_exp(max(t1, 0.0), 1),
        "p2": pvalue_exp(max(t2, 0.0), 2),
    }


def _screening_rep(cfg: StudyConfig, rep: int) -> dict:
    X, y = _draw(cfg, cfg.full_beta(), rep)
    path = path_until_entering(X, y, min_entering=cfg.k0 + 2)
    numbers = path.entering_knot_numbers()
    entered = [path.knots[i - 1].index for i in numbers]
    truth = set(range(cfg.s))
    screened = truth.issubset(set(entered[: cfg.k0]))
    row = {
        "rep": rep,
        "sure_screen": int(screened),
        "t_next": float("nan"),
        "n_entering": path.n_entering,
        "n_events": path.n_events,
        "valid": 0,
    }
    if len(numbers) >= cfg.k0 + 1:
        knot_number = numbers[cfg.k0]
        if knot_number < path.n_events or path.exhausted:
            row["t_next"] = cov_stat_general(X, y, path, knot_number, cfg.sigma2)
            row["valid"] = 1
    return row


def _table1_rep(cfg: StudyConfig, rep: int) -> dict:
    X, y = _draw(cfg, cfg.full_beta(), rep)
    need = cfg.k_max + cfg.d
    row = {"rep": rep, "valid": 0}
    for k in range(cfg.k_min, cfg.k_max + 1):
        row[f"Q_{k}"] = float("nan")
    row["k0_hat"] = -1
    path = path_until_entering(X, y, min_entering=need + 1)
    numbers = path.entering_knot_numbers()
    if len(numbers) < need:
        return row
    if len(numbers) == need:
        last = numbers[-1]
        if last == path.n_events and not path.exhausted:
            return row
    series = series_from_path(X, y, path, cfg.sigma2, need)
    for k in range(cfg.k_min, cfg.k_max + 1):
        row[f"Q_{k}"] = q_statistic(series, k, cfg.d)
    row["k0_hat"] = select_k0(series, SelectorConfig(d=cfg.d, k_min=cfg.k_min, k_max=cfg.k_max))
    row["valid"] = 1
    return row


def _power_instance_stats(cfg: StudyConfig, X: DesignMatrix, y: np.ndarray) -> dict[str, float]:
    if cfg.family == "orthogonal":
        V = orthogonal_knots(X, y)
        t1 = cov_stat_orthogonal(V, 1, cfg.sigma2)
        t2 = cov_stat_orthogonal(V, 2, cfg.sigma2)
        v1 = float(V[0])
    else:
        T = _cov_series(cfg, X, y, 2)
        t1, t2 = float(T[0]), float(T[1])
        v1 = float(np.max(np.abs(X.values.T @ y)))
    return {
        "cov_T1": t1,
        "max_cov12": max(t1, t2),
        "max_rss_drop": v1 * v1,
    }


def _power_rep(cfg: StudyConfig, rep: int) -> dict:
    row = {"rep": rep}
    X, y = _draw(cfg, np.zeros(cfg.p), rep, instance=0)
    null_stats = _power_instance_stats(cfg, X, y)
    for name, value in null_stats.items():
        row[f"null_{name}"] = value
    for i, theta in enumerate(cfg.theta_grid, start=1):
        if theta == 0.0:
            # theta = 0 is the null itself; reusing the phase-1 draw makes the
            # size exactly equal the level under the empirical critical value
            stats = null_stats
        else:
            beta = padded_beta((theta, theta), cfg.p)
            X, y = _draw(cfg, beta, rep, instance=i)
            stats = _power_instance_stats(cfg, X, y)
        for name, value in stats.items():
            row[f"{name}_theta_{theta:g}"] = value
    return row


_REP_FUNCS = {
    "null_qq": _null_qq_rep,
    "independence": _independence_rep,
    "screening": _screening_rep,
    "table1": _table1_rep,
    "power": _power_rep,
}


def _rep_record(cfg: StudyConfig, rep: int) -> dict:
    return _REP_FUNCS[cfg.study](cfg, rep)


# ---------------------------------------------------------------------------
# Goodness of fit
# ---------------------------------------------------------------------------


def exp1_cdf(t: np.ndarray) -> np.ndarray:
    """CDF of the standard exponential."""
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, -np.expm1(-np.clip(t, 0, None)), 0.0)


def _kolmogorov_sf(z: float, terms: int = 100) -> float:
    if z <= 0:
        return 1.0
    k = np.arange(1, terms + 1)
    s = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * z**2))
    return float(min(max(s, 0.0), 1.0))


def ks_statistic(sample: np.ndarray, cdf) -> tuple[float, float]:
    """Kolmogorov-Smirnov distance of a sample from a CDF and the asymptotic
    p-value of sqrt(n) * D (series truncated at 100 terms)."""
    x = np.sort(np.asarray(sample, dtype=float).reshape(-1))
    n = x.shape[0]
    if n == 0:
        raise ParameterError("KS statistic requires a nonempty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    D = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return D, _kolmogorov_sf(np.sqrt(n) * D)


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


def _mean_row(name: str, vals: np.ndarray) -> tuple[str, float, float]:
    vals = np.asarray(vals, dtype=float)
    se = float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return (name, float(np.mean(vals)), se)


def _qq_rows(stat: str, j: int, vals: np.ndarray) -> list[dict]:
    n = vals.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo = -np.log1p(-probs) / j  # Exp(1)/j quantiles
    emp = np.sort(vals)
    return [
        {"statistic": stat, "j": j, "prob": float(q), "theoretical": float(t), "empirical": float(e)}
        for q, t, e in zip(probs, theo, emp)
    ]


def _summarize_null_qq(cfg: StudyConfig, rows: list[dict]):
    summary, qq = [], []
    stats = cfg.statistics if cfg.family == "orthogonal" else ("cov_lasso",)
    for stat in stats:
        for j in range(1, cfg.d + 1):
            vals = np.array([r[f"{stat}_T{j}"] for r in rows])
            D, pval = ks_statistic(j * vals, exp1_cdf)
            summary.append((f"{stat}_ks_D_j{j}", D, None))
            summary.append((f"{stat}_ks_p_j{j}", pval, None))
            summary.append(_mean_row(f"{stat}_mean_T{j}", vals))
            qq.extend(_qq_rows(stat, j, vals))
    return summary, {"qq": qq}


def _summarize_independence(cfg: StudyConfig, rows: list[dict]):
    from scipy.stats import chi2

    p1 = np.array([r["p1"] for r in rows])
    p2 = np.array([r["p2"] for r in rows])
    n = p1.size
    r_val = float(np.corrcoef(p1, p2)[0, 1]) if n > 1 else float("nan")
    summary = [("pearson_r", r_val, None)]
    skipped = n < _GRID_MIN_REPS
    summary.append(("grid_skipped", float(skipped), None))
    if not skipped:
        edges = np.array([0.0, 0.25, 0.5, 0.75, 1.0 + 1e-12])
        counts, _, _ = np.histogram2d(p1, p2, bins=[edges, edges])
        expected = n / 16.0
        x2 = float(np.sum((counts - expected) ** 2) / expected)
        summary.append(("chi2_grid", x2, None))
        summary.append(("chi2_grid_p", float(chi2.sf(x2, df=15)), None))
        summary.append(("chi2_grid_accept_01", float(x2 <= chi2.ppf(0.99, df=15)), None))
    return summary, {}


def _summarize_screening(cfg: StudyConfig, rows: list[dict]):
    flags = np.array([r["sure_screen"] for r in rows], dtype=float)
    frac = float(np.mean(flags))
    n = flags.size
    summary = [
        ("screen_fraction", frac, float(np.sqrt(frac * (1 - frac) / n))),
        ("n_valid", float(sum(r["valid"] for r in rows)), None),
        ("qq_ref_slope", 1.0 / 9.0, None),
    ]
    t_next = np.array([r["t_next"] for r in rows if r["valid"]])
    extras = {}
    if t_next.size:
        D, pval = ks_statistic(t_next, exp1_cdf)
        summary.append(_mean_row("mean_t_next", t_next))
        summary.append(("t_next_ks_D_exp1", D, None))
        summary.append(("t_next_ks_p_exp1", pval, None))
        extras["qq"] = _qq_rows("t_next", 1, t_next)
    return summary, extras


def _summarize_table1(cfg: StudyConfig, rows: list[dict]):
    valid = [r for r in rows if r["valid"]]
    n_excluded = len(rows) - len(valid)
    summary = [("n_excluded", float(n_excluded), None)]
    if not valid:
        return summary, {}
    n = len(valid)
    for k in range(cfg.k_min, cfg.k_max + 1):
        q = np.array([r[f"Q_{k}"] for r in valid])
        summary.append(_mean_row(f"mean_Q_{k}", q))
        summary.append((f"sd_Q_{k}", float(np.std(q, ddof=1)) if n > 1 else 0.0, None))
    hats = np.array([r["k0_hat"] for r in valid])
    for k in range(cfg.k_min, cfg.k_max + 1):
        f = float(np.mean(hats == k))
        summary.append((f"prob_k0hat_{k}", f, float(np.sqrt(f * (1 - f) / n))))
    return summary, {}


def _summarize_power(cfg: StudyConfig, rows: list[dict]):
    n = len(rows)
    stats = cfg.statistics
    names = {"cov_lasso": "cov_T1", "max_cov12": "max_cov12", "max_rss_drop": "max_rss_drop"}
    summary, curve = [], []
    crit = {}
    for stat in stats:
        col = names[stat]
        null_vals = np.array([r[f"null_{col}"] for r in rows])
        crit[(stat, "simulation")] = float(np.quantile(null_vals, 1.0 - cfg.level))
        summary.append((f"crit_sim_{col}", crit[(stat, "simulation")], None))
    crit[("cov_lasso", "theory")] = float(-np.log(cfg.level))
    summary.append(("crit_theory_cov_T1", crit[("cov_lasso", "theory")], None))
    for theta in cfg.theta_grid:
        for stat in stats:
            col = names[stat]
            vals = np.array([r[f"{col}_theta_{theta:g}"] for r in rows])
            rules = ("simulation", "theory") if stat == "cov_lasso" else ("simulation",)
            for rule in rules:
                power = float(np.mean(vals > crit[(stat, rule)]))
                se = float(np.sqrt(power * (1 - power) / n))
                summary.append((f"power_{col}_{rule}_theta_{theta:g}", power, se))
                curve.append(
                    {"theta": float(theta), "statistic": col, "rule": rule, "power": power}
                )
    return summary, {"power_curve": curve}


_SUMMARIZERS = {
    "null_qq": _summarize_null_qq,
    "independence": _summarize_independence,
    "screening": _summarize_screening,
    "table1": _summarize_table1,
    "power": _summarize_power,
}


def summarize(cfg: StudyConfig, rows: list[dict]):
    """Recompute all summary aggregates from the per-rep rows."""
    return _SUMMARIZERS[cfg.study](cfg, rows)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        if threads < 1:
            raise ParameterError(f"threads must be >= 1, got {threads}")
        return threads
    return os.cpu_count() or 1


def _map_reps(cfg: StudyConfig) -> list[dict]:
    workers = _resolve_threads(cfg.threads)
    if workers <= 1 or cfg.n_reps <= 1:
        return [_rep_record(cfg, r) for r in range(cfg.n_reps)]
    chunk = max(1, cfg.n_reps // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_rep_record, repeat(cfg), range(cfg.n_reps), chunksize=chunk))


def run_study(cfg: StudyConfig) -> StudyResult:
    """Run any study described by the config."""
    _validate(cfg)
    start = time.perf_counter()
    rows = _map_reps(cfg)
    summary, extras = summarize(cfg, rows)
    return StudyResult(
        study=cfg.study,
        config=asdict(cfg),
        columns=list(rows[0].keys()),
        per_rep=rows,
        summary=summary,
        extras=extras,
        wall_seconds=time.perf_counter() - start,
    )


def _run_named(cfg: StudyConfig, study: str) -> StudyResult:
    if cfg.study != study:
        raise ParameterError(f"config is for study {cfg.study!r}, expected {study!r}")
    return run_study(cfg)


def run_null_qq(cfg: StudyConfig) -> StudyResult:
    return _run_named(cfg, "null_qq")


def run_independence(cfg: StudyConfig) -> StudyResult:
    return _run_named(cfg, "independence")


def run_screening(cfg: StudyConfig) -> StudyResult:
    return _run_named(cfg, "screening")


def run_table1(cfg: StudyConfig) -> StudyResult:
    return _run_named(cfg, "table1")


def run_power(cfg: StudyConfig) -> StudyResult:
    return _run_named(cfg, "power")
