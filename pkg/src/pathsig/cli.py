"""Command-line front end.

Subcommands:

    gen-design   generate a design matrix (and optionally a response) as CSV
    path         print the lasso path knots of a design/response pair
    covtest      print covariance statistics T_1..T_m with p-values
    select-k0    pick the model size from a statistic series
    study        run a Monte Carlo study and write per_rep/summary CSVs
                 plus a rerun manifest (null-qq, independence, screening,
                 table1, power)

Exit codes: 0 success, 1 parameter/usage error, 2 numerical failure.
Config files are JSON (a manifest written by a previous run also works);
explicit flags override config entries.  PATHSIG_THREADS is the fallback
for --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .covtest import pvalue_exp, series_from_knot_values, series_from_path
from .designs import FAMILIES, ResponseSpec, make_design, padded_beta, simulate_response
from .errors import NumericalError, ParameterError, PathsigError
from .model_size import SelectorConfig, q_statistic, select_k0
from .path import lars_lasso_path, path_until_entering
from .penalties import LASSO, mcp, scad
from .reports import format_cell, utcnow, write_csv, write_manifest, write_study_outputs
from .rng import substream_seed
from .studies import STUDIES, default_config, run_study

_STUDY_NAMES = {s.replace("_", "-"): s for s in STUDIES}


class _UsageError(ParameterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad flags, per contract
        raise _UsageError(f"{self.prog}: {message}")


def _add_design_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--block-size", type=int, dest="block_size")
    p.add_argument("--s", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--beta", type=str, help="comma-separated leading coefficients, zero-padded")
    p.add_argument("--sigma", type=float)


def _add_penalty_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--penalty", choices=("lasso", "scad", "mcp"), default="lasso")
    p.add_argument("--a", type=float, default=3.7, help="SCAD parameter (a > 2)")
    p.add_argument("--gamma", type=float, default=3.0, help="MCP parameter (gamma > 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="pathsig", description=__doc__, add_help=True)
    parser.add_argument("--version", action="version", version=f"pathsig {__version__}")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("gen-design", parents=[], help="generate a design matrix CSV")
    _add_design_flags(g)
    g.add_argument("-o", "--out", required=True)

    pa = sub.add_parser("path", help="lasso path knots of a design/response pair")
    pa.add_argument("--design", required=True, help="design CSV path or family name")
    pa.add_argument("--y", help="response CSV path (generated if omitted)")
    pa.add_argument("--max-steps", type=int, dest="max_steps")
    _add_design_flags(pa)
    pa.add_argument("-o", "--out")

    cv = sub.add_parser("covtest", help="covariance statistics along the path")
    cv.add_argument("--design", required=True, help="design CSV path or family name")
    cv.add_argument("--y", help="response CSV path (generated if omitted)")
    cv.add_argument("--sigma2", type=float, default=1.0)
    cv.add_argument("--n-stats", type=int, dest="n_stats")
    _add_penalty_flags(cv)
    _add_design_flags(cv)
    cv.add_argument("-o", "--out")

    sk = sub.add_parser("select-k0", help="model-size selection from a statistic series")
    sk.add_argument("--stats", required=True, help="CSV of T values (column 'T' or single column)")
    sk.add_argument("--d", type=int, required=True)
    sk.add_argument("--k-min", type=int, default=0, dest="k_min")
    sk.add_argument("--k-max", type=int, default=4, dest="k_max")

    st = sub.add_parser("study", help="run a Monte Carlo study")
    st.add_argument("name", choices=sorted(_STUDY_NAMES))
    _add_design_flags(st)
    st.add_argument("--reps", type=int)
    st.add_argument("--statistics", type=str, help="comma-separated statistic names")
    st.add_argument("--scad-a", type=float, dest="scad_a")
    st.add_argument("--mcp-gamma", type=float, dest="mcp_gamma")
    st.add_argument("--level", type=float)
    st.add_argument("--theta-grid", type=str, dest="theta_grid")
    st.add_argument("--k0", type=int)
    st.add_argument("--d", type=int)
    st.add_argument("--k-min", type=int, dest="k_min")
    st.add_argument("--k-max", type=int, dest="k_max")
    st.add_argument("--fixed-design", action="store_true", default=None, dest="fixed_design")
    st.add_argument("--threads", type=int)
    st.add_argument("--config", help="JSON config or manifest from a previous run")
    st.add_argument("-o", "--out", required=True)

    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ParameterError(f"cannot parse float list {text!r}") from exc


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise _UsageError(f"missing required flag --{name.replace('_', '-')}")


def _load_matrix(path: str) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline()
    skip = 0
    try:
        [float(tok) for tok in first.strip().split(",") if tok]
    except ValueError:
        skip = 1
    return np.loadtxt(path, delimiter=",", ndmin=2, skiprows=skip)


def _design_from_args(args):
    _require(args, "family", "n", "p")
    seed = args.seed if args.seed is not None else 42
    return make_design(
        args.family, args.n, args.p,
        rho=args.rho or 0.0, block_size=args.block_size, s=args.s,
        seed=substream_seed(seed, 0),
    )


def _design_and_response(args):
    """Resolve --design (file or family) and --y (file or generated)."""
    if args.design in FAMILIES:
        args.family = args.design
        X = _design_from_args(args)
        Xv = X.values
    else:
        Xv = _load_matrix(args.design)
        X = Xv
    if args.y is not None:
        y = _load_matrix(args.y).reshape(-1)
    else:
        seed = args.seed if args.seed is not None else 42
        beta = padded_beta(_parse_floats(args.beta) if args.beta else (), Xv.shape[1])
        sigma = args.sigma if args.sigma is not None else 1.0
        spec = ResponseSpec(beta=beta, sigma=sigma, seed=substream_seed(seed, 1))
        y = Xv @ spec.beta + spec.sigma * np.random.default_rng(spec.seed).standard_normal(
            Xv.shape[0]
        )
    return X, Xv, y


def _emit(rows: list[list], header: list[str], out: str | None, fname: str) -> None:
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        write_csv(outdir / fname, header, rows)
    else:
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(format_cell(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_gen_design(args) -> int:
    started = utcnow()
    X = _design_from_args(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    design_path = outdir / "design.csv"
    write_csv(design_path, [f"x{j}" for j in range(X.p)], X.values.tolist())
    outputs = [design_path]
    if args.beta is not None:
        seed = args.seed if args.seed is not None else 42
        spec = ResponseSpec(
            beta=padded_beta(_parse_floats(args.beta), X.p),
            sigma=args.sigma if args.sigma is not None else 1.0,
            seed=substream_seed(seed, 1),
        )
        y = simulate_response(X, spec)
        response_path = outdir / "response.csv"
        write_csv(response_path, ["y"], [[v] for v in y.tolist()])
        outputs.append(response_path)
    config = {
        "family": args.family, "n": args.n, "p": args.p, "rho": args.rho or 0.0,
        "block_size": args.block_size, "s": args.s,
        "seed": args.seed if args.seed is not None else 42,
        "beta": args.beta, "sigma": args.sigma,
    }
    write_manifest(outdir / "manifest.json", "gen-design", config, outputs,
                   config["seed"], started, __version__)
    return 0


def _cmd_path(args) -> int:
    X, Xv, y = _design_and_response(args)
    n, p = Xv.shape
    max_steps = args.max_steps if args.max_steps is not None else min(n - 1, p)
    result = lars_lasso_path(Xv, y, max_steps)
    rows = [
        [i + 1, k.lam, k.event, k.index, len(k.active_after)]
        for i, k in enumerate(result.knots)
    ]
    _emit(rows, ["step", "lambda", "event", "variable", "n_active"], args.out, "knots.csv")
    return 0


def _cmd_covtest(args) -> int:
    X, Xv, y = _design_and_response(args)
    sigma2 = args.sigma2
    if args.penalty == "lasso":
        penalty = LASSO
    elif args.penalty == "scad":
        penalty = scad(args.a)
    else:
        penalty = mcp(args.gamma)

    n, p = Xv.shape
    if penalty.kind != "lasso":
        gram = Xv.T @ Xv
        if np.max(np.abs(gram - np.eye(p))) > 1e-8:
            raise ParameterError(
                f"{penalty.kind} statistics use the orthogonal closed form and "
                "require an orthogonal design"
            )
        V = np.sort(np.abs(Xv.T @ y))[::-1]
        n_stats = args.n_stats if args.n_stats is not None else min(p, n - 1)
        series = series_from_knot_values(V, sigma2, n_stats, penalty)
    else:
        want = args.n_stats if args.n_stats is not None else min(p, n - 1)
        path = path_until_entering(Xv, y, min_entering=want + 1)
        n_stats = min(want, path.n_entering - (0 if path.exhausted else 1))
        if n_stats < 1:
            raise ParameterError("path produced no entering events with a successor knot")
        series = series_from_path(Xv, y, path, sigma2, n_stats)

    rows = [
        [k, float(series.values[k - 1]), pvalue_exp(max(float(series.values[k - 1]), 0.0), 1)]
        for k in range(1, len(series.values) + 1)
    ]
    _emit(rows, ["k", "T", "pvalue_exp1"], args.out, "covtest.csv")
    return 0


def _cmd_select_k0(args) -> int:
    import csv as _csv

    with open(args.stats) as fh:
        reader = _csv.reader(fh)
        rows = [r for r in reader if r]
    header = rows[0]
    if "T" in header:
        col = header.index("T")
        vals = [float(r[col]) for r in rows[1:]]
    else:
        try:
            vals = [float(r[0]) for r in rows]
        except ValueError:
            vals = [float(r[0]) for r in rows[1:]]
    from .covtest import CovSeries

    series = CovSeries(values=np.array(vals), sigma2=1.0)
    cfg = SelectorConfig(d=args.d, k_min=args.k_min, k_max=args.k_max)
    k_hat = select_k0(series, cfg)
    out_rows = [["k0_hat", k_hat, ""]] + [
        [f"Q_{k}", q_statistic(series, k, args.d), ""]
        for k in range(args.k_min, args.k_max + 1)
    ]
    sys.stdout.write("metric,value,stderr\n")
    for row in out_rows:
        sys.stdout.write(",".join(format_cell(v) for v in row) + "\n")
    return 0


_STUDY_FLAG_FIELDS = (
    "family", "n", "p", "rho", "block_size", "s", "sigma", "seed",
    "scad_a", "mcp_gamma", "level", "k0", "d", "k_min", "k_max",
    "fixed_design", "threads",
)


def _cmd_study(args) -> int:
    started = utcnow()
    study = _STUDY_NAMES[args.name]
    overrides: dict = {}

    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]  # manifest from a previous run
        loaded.pop("study", None)
        overrides.update(loaded)

    for name in _STUDY_FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.reps is not None:
        overrides["n_reps"] = args.reps
    if args.beta is not None:
        overrides["beta"] = _parse_floats(args.beta)
    if args.statistics is not None:
        overrides["statistics"] = tuple(
            tok.strip() for tok in args.statistics.split(",") if tok.strip()
        )
    if args.theta_grid is not None:
        overrides["theta_grid"] = _parse_floats(args.theta_grid)
    if "threads" not in overrides or overrides["threads"] is None:
        env = os.environ.get("PATHSIG_THREADS")
        if env is not None:
            overrides["threads"] = int(env)

    # JSON round-trips tuples as lists; normalize
    for key in ("beta", "statistics", "theta_grid"):
        if key in overrides and overrides[key] is not None:
            overrides[key] = tuple(overrides[key])

    cfg = default_config(study, **overrides)
    result = run_study(cfg)

    outdir = Path(args.out)
    outputs = write_study_outputs(outdir, result)
    write_manifest(
        outdir / "manifest.json", f"study {args.name}", result.config, outputs,
        cfg.seed, started, __version__,
    )
    sys.stdout.write(
        f"study {args.name}: {cfg.n_reps} reps in {result.wall_seconds:.1f}s -> {outdir}\n"
    )
    return 0


_COMMANDS = {
    "gen-design": _cmd_gen_design,
    "path": _cmd_path,
    "covtest": _cmd_covtest,
    "select-k0": _cmd_select_k0,
    "study": _cmd_study,
}


def parse_and_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except PathsigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except SystemExit as exc:  # argparse --help/--version
        code = exc.code
        return int(code) if isinstance(code, int) else 0


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
