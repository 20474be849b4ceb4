"""Model-size selection from the covariance statistic sequence.

When k equals the true model size, the rescaled statistics j*T_{k+j} are
asymptotically i.i.d. Exp(1), so the window average

    Q_k = (1/d) * sum_{j=1..d} j * T_{k+j}

is close to 1; the selector picks the k in a search range minimizing
|Q_k - 1|.  ``expected_q_after`` and ``snr`` are the closed-form reference
values for the window one past the truth and for the separation signal-to-
noise ratio E(Q_k0 - Q_k0+1) / sd(Q_k0 - Q_k0+1), which grows like
log(d) / sqrt(1 + pi^2/6).
"""

from __future__ import annotations

from dataclasses import dataclass

from .covtest import CovSeries
from .errors import ParameterError


@dataclass(frozen=True)
class SelectorConfig:
    """Window length d and the inclusive search range [k_min, k_max]."""

    d: int
    k_min: int = 0
    k_max: int = 4

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ParameterError(f"d must be >= 1, got {self.d}")
        if self.k_min < 0 or self.k_max < self.k_min:
            raise ParameterError(
                f"need 0 <= k_min <= k_max, got k_min={self.k_min}, k_max={self.k_max}"
            )


def q_statistic(series: CovSeries, k: int, d: int) -> float:
    """(1/d) * sum_{j=1..d} j * T_{k+j}."""
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return sum(j * series.t(k + j) for j in range(1, d + 1)) / d


def select_k0(series: CovSeries, cfg: SelectorConfig) -> int:
    """argmin over k in [k_min, k_max] of |Q_k - 1|, smallest k on ties."""
    best_k, best_gap = None, None
    for k in range(cfg.k_min, cfg.k_max + 1):
        gap = abs(q_statistic(series, k, cfg.d) - 1.0)
        if best_gap is None or gap < best_gap:
            best_k, best_gap = k, gap
    return best_k


def expected_q_after(d: int) -> float:
    """E(Q_{k0+1}) under the null window model: 1 - (1/d) sum_{j=1..d} 1/(j+1)."""
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return 1.0 - sum(1.0 / (j + 1) for j in range(1, d + 1)) / d


def snr(d: int) -> float:
    """E(Q_k0 - Q_k0+1) / sd(Q_k0 - Q_k0+1) in closed form:

    sum_{j=1..d} 1/(j+1)  over  sqrt(1 + 2^-2 + ... + d^-2 + d^2/(d+1)^2).
    """
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    numer = sum(1.0 / (j + 1) for j in range(1, d + 1))
    denom = sum(1.0 / j**2 for j in range(1, d + 1)) + d**2 / (d + 1) ** 2
    return numer / denom**0.5
