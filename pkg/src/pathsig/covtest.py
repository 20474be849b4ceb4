"""Covariance test statistics along the solution path.

General designs use the two-fit form at knot k (an entering event):

    T_k = ( y' X b_full(lam_{k+1}) - y' X_A b_A(lam_{k+1}) ) / sigma2

where lam_{k+1} is the next knot lambda (0 past an exhausted path's final
knot), b_full is the full-path lasso solution at lam_{k+1}, and b_A is the
lasso fit restricted to the active set A just before the entering variable
joined.  On orthogonal designs this reduces, for a penalty with thresholding
operator h, to

    T_k = V_k * h_{V_{k+1}}(V_k) / sigma2

with V the descending |X'y| values; for the lasso this is
V_k (V_k - V_{k+1}) / sigma2.

``scad_piecewise`` is the SCAD specialization written out by branches.  Note
the middle branch: direct calculation from V_k * h gives the inner factor
a/(a-1), i.e.

    (a-1)/(a-2) * V_k * (V_k - a/(a-1) * V_{k+1}) / sigma2,

which the grid-search thresholding oracle confirms.

Deletion events carry no statistic; series builders index T_k by entering
events in path order.  sigma2 is a required, known input throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DeletionEventError, ParameterError
from .path import LassoPath, design_values, restricted_lasso_fit
from .penalties import LASSO, PenaltySpec, threshold


@dataclass(frozen=True)
class CovSeries:
    """Statistics T_{k_offset+1} .. T_{k_offset+m} with the noise variance
    and penalty that produced them."""

    values: np.ndarray
    sigma2: float
    penalty: PenaltySpec = LASSO
    k_offset: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(-1))
        if not self.sigma2 > 0:
            raise ParameterError(f"sigma2 must be positive, got {self.sigma2}")
        if self.k_offset < 0:
            raise ParameterError(f"k_offset must be >= 0, got {self.k_offset}")

    def t(self, k: int) -> float:
        """T_k by absolute index (k > k_offset)."""
        i = k - self.k_offset - 1
        if not 0 <= i < self.values.shape[0]:
            raise ParameterError(
                f"series holds T_{self.k_offset + 1}..T_{self.k_offset + len(self.values)}, "
                f"requested T_{k}"
            )
        return float(self.values[i])


def cov_stat_general(X, y: np.ndarray, path: LassoPath, k: int, sigma2: float) -> float:
    """Two-fit covariance statistic at knot k (1-based) of a general design."""
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    if not 1 <= k <= len(path.knots):
        raise ParameterError(f"knot index {k} out of range 1..{len(path.knots)}")
    knot = path.knots[k - 1]
    if knot.event != "enter":
        raise DeletionEventError(
            f"knot {k} is a deletion event; the covariance statistic is defined "
            "for entering events only"
        )
    Xv = design_values(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    lam_next = path.next_lambda(k)
    beta_full = path.knots[k].coef if k < len(path.knots) else path.coef_at(lam_next)
    fit_full = float(y @ (Xv @ beta_full))
    A = knot.active_before
    if A:
        beta_restricted = restricted_lasso_fit(Xv, y, A, lam_next)
        fit_restricted = float(y @ (Xv @ beta_restricted))
    else:
        fit_restricted = 0.0
    return (fit_full - fit_restricted) / sigma2


def _check_descending(V: np.ndarray) -> np.ndarray:
    V = np.asarray(V, dtype=float).reshape(-1)
    if np.any(np.diff(V) > 1e-12):
        raise ContractError("V must be sorted in descending order")
    return V


def cov_stat_orthogonal(
    V: np.ndarray, k: int, sigma2: float, penalty: PenaltySpec = LASSO
) -> float:
    """Closed-form statistic V_k * h_{V_{k+1}}(V_k) / sigma2 on an orthogonal
    design, for any supported penalty.  V_{k+1} is taken as 0 when k is the
    last index."""
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    V = _check_descending(V)
    if not 1 <= k <= V.shape[0]:
        raise ParameterError(f"k={k} out of range 1..{V.shape[0]}")
    vk = float(V[k - 1])
    vk1 = float(V[k]) if k < V.shape[0] else 0.0
    if penalty.kind == "lasso":
        return vk * (vk - vk1) / sigma2
    return vk * threshold(penalty, vk1, vk) / sigma2


def scad_piecewise(vk: float, vk1: float, a: float, sigma2: float = 1.0) -> float:
    """SCAD statistic as an explicit three-branch display (middle branch
    carries the inner factor a/(a-1), as direct calculation from V_k * h
    requires)."""
    if not a > 2:
        raise ParameterError(f"SCAD requires a > 2, got {a}")
    if vk < vk1 or vk1 < 0:
        raise ContractError("need V_k >= V_{k+1} >= 0")
    if vk <= 2.0 * vk1:
        return vk * (vk - vk1) / sigma2
    if vk < a * vk1:
        return (a - 1.0) / (a - 2.0) * vk * (vk - a / (a - 1.0) * vk1) / sigma2
    return vk * vk / sigma2


def mcp_piecewise(vk: float, vk1: float, gamma: float, sigma2: float = 1.0) -> float:
    """MCP statistic by branches: gamma/(gamma-1)-scaled lasso gap in the
    middle regime, V_k^2 beyond gamma * V_{k+1}, zero at V_k = V_{k+1}."""
    if not gamma > 1:
        raise ParameterError(f"MCP requires gamma > 1, got {gamma}")
    if vk < vk1 or vk1 < 0:
        raise ContractError("need V_k >= V_{k+1} >= 0")
    if vk <= gamma * vk1:
        return gamma / (gamma - 1.0) * vk * (vk - vk1) / sigma2
    return vk * vk / sigma2


def pvalue_exp(t: float, j: int) -> float:
    """Upper-tail probability of Exp(1)/j at t, i.e. exp(-j t)."""
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    if j < 1:
        raise ParameterError(f"j must be a positive integer, got {j}")
    return float(np.exp(-j * t))


def tilde_transform(series: CovSeries, k0: int, d: int) -> np.ndarray:
    """(1*T_{k0+1}, 2*T_{k0+2}, ..., d*T_{k0+d}); i.i.d. Exp(1) in the limit
    when k0 is the true model size."""
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return np.array([j * series.t(k0 + j) for j in range(1, d + 1)])


def series_from_path(
    X, y: np.ndarray, path: LassoPath, sigma2: float, n_stats: int
) -> CovSeries:
    """T_1..T_{n_stats} from a general-design path, indexing entering events."""
    numbers = path.entering_knot_numbers()
    if len(numbers) < n_stats:
        raise ParameterError(
            f"path has {len(numbers)} entering events, need {n_stats}"
        )
    vals = [cov_stat_general(X, y, path, kn, sigma2) for kn in numbers[:n_stats]]
    return CovSeries(values=np.array(vals), sigma2=sigma2, penalty=LASSO, k_offset=0)


def series_from_knot_values(
    V: np.ndarray, sigma2: float, n_stats: int, penalty: PenaltySpec = LASSO
) -> CovSeries:
    """T_1..T_{n_stats} from orthogonal-design knot values."""
    V = _check_descending(V)
    if V.shape[0] < n_stats:
        raise ParameterError(f"V has {V.shape[0]} entries, need {n_stats}")
    vals = [cov_stat_orthogonal(V, k, sigma2, penalty) for k in range(1, n_stats + 1)]
    return CovSeries(values=np.array(vals), sigma2=sigma2, penalty=penalty, k_offset=0)
