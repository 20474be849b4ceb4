"""Lasso solution path via least-angle regression with the lasso modification.

The path is a piecewise-linear function of the penalty lambda; a *knot* is a
lambda where the active set changes (a variable enters or leaves).  Each knot
records the event, the active set just before it, the signs of the active
coefficients after it, and the exact solution at that lambda, certified by
the KKT conditions:

    |X_j' (y - X beta)| = lambda   for active j,
    |X_j' (y - X beta)| <= lambda  for inactive j.

Active-set linear algebra uses an updatable Cholesky factorization of the
active Gram matrix (append by rank-one update, delete by Givens
re-triangularization) with a 1e-10 rank tolerance.

Columns of X must be unit-norm (the designs module standardizes).  Deletion
events consume a path step like entering events; ``LassoPath`` exposes both
the event count and the entering-event count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .designs import DesignMatrix
from .errors import ContractError, NumericalError, ParameterError, SingularityError

RANK_TOL = 1e-10
_TIE_REL = 1e-10


def design_values(X) -> np.ndarray:
    """Accept a DesignMatrix or a plain 2-d array."""
    if isinstance(X, DesignMatrix):
        return X.values
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ParameterError(f"design must be 2-dimensional, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True)
class PathKnot:
    """One path event: lambda, event type, and the solution at that lambda.

    ``coef`` is the lasso solution at ``lam`` (continuous across the event);
    ``active_before``/``signs`` are the active set just before the event and
    the coefficient signs just after it.
    """

    lam: float
    event: str  # "enter" | "leave"
    index: int
    active_before: tuple[int, ...]
    signs: dict[int, int]
    coef: np.ndarray

    @property
    def active_after(self) -> tuple[int, ...]:
        return tuple(self.signs.keys())


@dataclass
class LassoPath:
    """Ordered knots of the lasso path for one (X, y) problem."""

    knots: list[PathKnot]
    n: int
    p: int
    max_steps: int
    exhausted: bool
    coef_zero: np.ndarray | None = field(default=None, repr=False)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([k.lam for k in self.knots])

    @property
    def n_events(self) -> int:
        return len(self.knots)

    @property
    def n_entering(self) -> int:
        return sum(1 for k in self.knots if k.event == "enter")

    def entering_knot_numbers(self) -> list[int]:
        """1-based knot indices of the entering events, in path order."""
        return [i + 1 for i, k in enumerate(self.knots) if k.event == "enter"]

    def next_lambda(self, k: int) -> float:
        """Lambda of the knot after knot k (1-based); 0 when the path is
        exhausted past its final knot."""
        if not 1 <= k <= len(self.knots):
            raise ParameterError(f"knot index {k} out of range 1..{len(self.knots)}")
        if k < len(self.knots):
            return self.knots[k].lam
        if not self.exhausted:
            raise ParameterError(
                "path was truncated at max_steps; the successor lambda of the "
                "final knot is unknown"
            )
        return 0.0

    def coef_at(self, lam: float) -> np.ndarray:
        """Exact solution at any lambda covered by the path (piecewise linear)."""
        if lam < 0:
            raise ParameterError(f"lambda must be nonnegative, got {lam}")
        if not self.knots:
            return np.zeros(self.p)
        if lam >= self.knots[0].lam:
            return np.zeros(self.p)
        lams = self.lambdas
        # last knot with knots[i].lam >= lam (lams is nonincreasing)
        i = int(np.searchsorted(-lams, -lam, side="right")) - 1
        hi_lam, hi_coef = self.knots[i].lam, self.knots[i].coef
        if lam == hi_lam:
            return hi_coef.copy()
        if i + 1 < len(self.knots):
            lo_lam, lo_coef = self.knots[i + 1].lam, self.knots[i + 1].coef
        else:
            if not self.exhausted:
                raise ParameterError(
                    f"path was truncated at max_steps before reaching lambda={lam}"
                )
            lo_lam, lo_coef = 0.0, self.coef_zero
        if hi_lam == lo_lam:
            return lo_coef.copy()
        t = (hi_lam - lam) / (hi_lam - lo_lam)
        return hi_coef + t * (lo_coef - hi_coef)


# ---------------------------------------------------------------------------
# Updatable Cholesky of the active Gram matrix
# ---------------------------------------------------------------------------


class _ActiveChol:
    """Lower Cholesky factor of X_A' X_A, updatable as A changes."""

    def __init__(self) -> None:
        self.L = np.zeros((0, 0))

    @property
    def k(self) -> int:
        return self.L.shape[0]

    def append(self, XA: np.ndarray, xj: np.ndarray) -> None:
        g = XA.T @ xj if self.k else np.zeros(0)
        w = solve_triangular(self.L, g, lower=True, check_finite=False) if self.k else g
        d2 = float(xj @ xj - w @ w)
        if d2 <= RANK_TOL:
            raise SingularityError("active Gram matrix is rank deficient within 1e-10")
        k = self.k
        L = np.zeros((k + 1, k + 1))
        L[:k, :k] = self.L
        L[k, :k] = w
        L[k, k] = np.sqrt(d2)
        self.L = L

    def delete(self, pos: int) -> None:
        k = self.k
        M = np.delete(self.L, pos, axis=0)
        for j in range(pos, k - 1):
            a, b = M[j, j], M[j, j + 1]
            r = np.hypot(a, b)
            if r == 0.0:
                continue
            c, s = a / r, b / r
            cj, cj1 = M[:, j].copy(), M[:, j + 1].copy()
            M[:, j] = c * cj + s * cj1
            M[:, j + 1] = -s * cj + c * cj1
            M[j, j] = r
            M[j, j + 1] = 0.0
        self.L = M[:, : k - 1]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        z = solve_triangular(self.L, rhs, lower=True, check_finite=False)
        return solve_triangular(self.L.T, z, lower=False, check_finite=False)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def _lars_engine(
    Xv: np.ndarray,
    y: np.ndarray,
    max_events: int | None,
    min_entering: int | None = None,
) -> tuple[list[PathKnot], bool, np.ndarray | None]:
    n, p = Xv.shape
    c0 = Xv.T @ y
    hard_cap = max_events if max_events is not None else 50 * p + 1000

    active: list[int] = []
    signs: list[float] = []
    chol = _ActiveChol()
    knots: list[PathKnot] = []
    lam_cur = np.inf
    just_dropped: int | None = None
    n_enter = 0

    while len(knots) < hard_cap:
        if not active:
            j_star = int(np.argmax(np.abs(c0)))
            lam_next = float(np.abs(c0[j_star]))
            if lam_next <= 1e-14 * max(1.0, float(np.linalg.norm(y, np.inf) if y.size else 0.0)):
                return knots, True, np.zeros(p)
            lam_next = min(lam_next, lam_cur)
            event, index, sigma = "enter", j_star, float(np.sign(c0[j_star]))
            coef = np.zeros(p)
            bA = np.zeros(0)
        else:
            XA = Xv[:, active]
            sA = np.array(signs)
            bA = chol.solve(c0[active])
            wA = chol.solve(sA)
            d = Xv.T @ (y - XA @ bA)
            e = Xv.T @ (XA @ wA)
            tie_tol = _TIE_REL * max(1.0, lam_cur)

            is_active = np.zeros(p, dtype=bool)
            is_active[active] = True
            with np.errstate(divide="ignore", invalid="ignore"):
                lam_plus = d / (1.0 - e)
                lam_minus = -d / (1.0 + e)

            best_enter, enter_j, enter_sign = -np.inf, -1, 0.0
            for cand, sgn in ((lam_plus, 1.0), (lam_minus, -1.0)):
                ok = np.isfinite(cand) & ~is_active
                ok &= (cand >= 0.0) & (cand <= lam_cur + tie_tol)
                if just_dropped is not None and ok[just_dropped]:
                    if cand[just_dropped] > lam_cur - tie_tol:
                        ok[just_dropped] = False
                if np.any(ok):
                    vals = np.where(ok, cand, -np.inf)
                    j = int(np.argmax(vals))
                    if vals[j] > best_enter:
                        best_enter, enter_j, enter_sign = float(vals[j]), j, sgn

            with np.errstate(divide="ignore", invalid="ignore"):
                lam_drop = np.where(wA != 0.0, bA / wA, -np.inf)
            ok_drop = (lam_drop > RANK_TOL) & (lam_drop < lam_cur - tie_tol)
            best_leave, leave_pos = -np.inf, -1
            if np.any(ok_drop):
                vals = np.where(ok_drop, lam_drop, -np.inf)
                leave_pos = int(np.argmax(vals))
                best_leave = float(vals[leave_pos])

            if best_enter < 0.0 and best_leave < 0.0:
                coef_zero = np.zeros(p)
                coef_zero[active] = bA
                return knots, True, coef_zero

            if best_leave > best_enter:
                event, index = "leave", active[leave_pos]
                lam_next = min(best_leave, lam_cur)
            else:
                event, index, sigma = "enter", enter_j, enter_sign
                lam_next = min(best_enter, lam_cur)
            coef = np.zeros(p)
            coef[active] = bA - lam_next * wA
            if event == "leave":
                coef[index] = 0.0  # exact zero at the crossing, not roundoff

        if event == "enter":
            XA = Xv[:, active] if active else np.zeros((n, 0))
            chol.append(XA, Xv[:, index])
            active.append(index)
            signs.append(sigma)
            just_dropped = None
            n_enter += 1
        else:
            pos = active.index(index)
            chol.delete(pos)
            del active[pos]
            del signs[pos]
            just_dropped = index

        knots.append(
            PathKnot(
                lam=float(lam_next),
                event=event,
                index=int(index),
                active_before=tuple(
                    active[:-1] if event == "enter" else
                    active[:pos] + [index] + active[pos:]
                ),
                signs={int(a): int(s) for a, s in zip(active, signs)},
                coef=coef,
            )
        )
        lam_cur = float(lam_next)
        if min_entering is not None and n_enter >= min_entering:
            return knots, False, None

    if max_events is None:
        raise NumericalError("lasso path failed to terminate within the safety cap")
    return knots, False, None


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _check_unit_columns(Xv: np.ndarray) -> None:
    norms = np.linalg.norm(Xv, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ParameterError("design columns must be standardized to unit l2 norm")


def lars_lasso_path(
    X,
    y: np.ndarray,
    max_steps: int,
    *,
    min_entering: int | None = None,
) -> LassoPath:
    """Exact lasso path knots in decreasing lambda, deletions included.

    Stops after ``max_steps`` events, when ``min_entering`` entering events
    have occurred, or when the path reaches lambda = 0.
    """
    Xv = design_values(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, p = Xv.shape
    if y.shape[0] != n:
        raise ParameterError(f"y has length {y.shape[0]} but design has n={n}")
    if not 1 <= max_steps <= min(n - 1, p):
        raise ParameterError(
            f"max_steps must be in [1, min(n-1, p)] = [1, {min(n - 1, p)}], got {max_steps}"
        )
    _check_unit_columns(Xv)
    knots, exhausted, coef_zero = _lars_engine(Xv, y, max_steps, min_entering)
    return LassoPath(
        knots=knots, n=n, p=p, max_steps=max_steps, exhausted=exhausted, coef_zero=coef_zero
    )


def path_until_entering(X, y: np.ndarray, min_entering: int) -> LassoPath:
    """Path computed until ``min_entering`` entering events have occurred (or
    the path is exhausted), with no cap on total events.

    Unlike ``lars_lasso_path``, deletion events do not count against a step
    budget; the Monte Carlo studies use this when T_k sequences of a fixed
    length are required.
    """
    Xv = design_values(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != Xv.shape[0]:
        raise ParameterError(f"y has length {y.shape[0]} but design has n={Xv.shape[0]}")
    if min_entering < 1:
        raise ParameterError(f"min_entering must be >= 1, got {min_entering}")
    _check_unit_columns(Xv)
    knots, exhausted, coef_zero = _lars_engine(Xv, y, None, min_entering)
    return LassoPath(
        knots=knots, n=Xv.shape[0], p=Xv.shape[1], max_steps=len(knots) or 1,
        exhausted=exhausted, coef_zero=coef_zero,
    )


def orthogonal_knots(X, y: np.ndarray) -> np.ndarray:
    """Path knots of an orthogonal design: |X'y| sorted descending."""
    Xv = design_values(X)
    if isinstance(X, DesignMatrix):
        if X.family != "orthogonal":
            raise ContractError(
                f"orthogonal_knots requires the orthogonal family, got {X.family!r}"
            )
    else:
        gram = Xv.T @ Xv
        if np.max(np.abs(gram - np.eye(Xv.shape[1]))) > 1e-8:
            raise ContractError("orthogonal_knots requires orthonormal columns")
    y = np.asarray(y, dtype=float).reshape(-1)
    return np.sort(np.abs(Xv.T @ y))[::-1]


def restricted_lasso_fit(X, y: np.ndarray, A, lam: float) -> np.ndarray:
    """Lasso solution at ``lam`` using only the predictors in A.

    Runs the path on the column submatrix to exhaustion and evaluates it at
    ``lam``; coordinates outside A are zero.  A may be empty.
    """
    Xv = design_values(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if lam < 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam}")
    idx = sorted(set(int(a) for a in A))
    p = Xv.shape[1]
    if any(a < 0 or a >= p for a in idx):
        raise ParameterError(f"active set {idx} out of range for p={p}")
    beta = np.zeros(p)
    if not idx:
        return beta
    sub = Xv[:, idx]
    knots, exhausted, coef_zero = _lars_engine(sub, y, max_events=None)
    path = LassoPath(
        knots=knots, n=Xv.shape[0], p=len(idx), max_steps=len(knots) or 1,
        exhausted=exhausted, coef_zero=coef_zero,
    )
    beta[idx] = path.coef_at(lam)
    return beta


def kkt_violation(X, y: np.ndarray, coef: np.ndarray, lam: float, active) -> tuple[float, float]:
    """KKT residuals of a candidate solution at lambda.

    Returns (max | |X_j'r| - lam | over active j,
             max ( |X_j'r| - lam )_+ over inactive j).
    """
    Xv = design_values(X)
    r = np.asarray(y, dtype=float).reshape(-1) - Xv @ coef
    corr = np.abs(Xv.T @ r)
    active = sorted(set(int(a) for a in active))
    mask = np.zeros(Xv.shape[1], dtype=bool)
    mask[active] = True
    eq_gap = float(np.max(np.abs(corr[mask] - lam))) if active else 0.0
    ineq = corr[~mask] - lam
    ineq_excess = float(max(np.max(ineq), 0.0)) if ineq.size else 0.0
    return eq_gap, ineq_excess
