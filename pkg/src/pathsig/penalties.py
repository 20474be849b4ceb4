"""Penalty functions and their scalar thresholding operators.

For a penalty p_lam the thresholding operator is

    h_lam(x) = argmin_u { (u - x)^2 / 2 + p_lam(u) },

soft-thresholding for the lasso, and the usual piecewise closed forms for
SCAD (parameter a > 2) and MCP (parameter gamma > 1).  ``threshold_oracle``
minimizes the objective by brute-force grid search plus local ternary
refinement and serves as the independent check on the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

KINDS = ("lasso", "scad", "mcp")


@dataclass(frozen=True)
class PenaltySpec:
    """Tagged penalty choice: lasso, scad(a) with a > 2, or mcp(gamma) with gamma > 1."""

    kind: str
    a: float | None = None
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ParameterError(f"unknown penalty kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "scad":
            if self.a is None or not self.a > 2.0:
                raise ParameterError(f"SCAD requires a > 2, got {self.a}")
        elif self.kind == "mcp":
            if self.gamma is None or not self.gamma > 1.0:
                raise ParameterError(f"MCP requires gamma > 1, got {self.gamma}")
        else:
            if self.a is not None or self.gamma is not None:
                raise ParameterError("lasso carries no penalty parameter")


LASSO = PenaltySpec("lasso")


def scad(a: float = 3.7) -> PenaltySpec:
    return PenaltySpec("scad", a=a)


def mcp(gamma: float) -> PenaltySpec:
    return PenaltySpec("mcp", gamma=gamma)


def _check_lambda(lam: float) -> float:
    if lam < 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam}")
    return float(lam)


def penalty_value(spec: PenaltySpec, lam: float, u: float) -> float:
    """Evaluate p_lam(|u|).  Even in u, nondecreasing in |u|, zero at 0."""
    lam = _check_lambda(lam)
    t = abs(float(u))
    if spec.kind == "lasso":
        return lam * t
    if spec.kind == "scad":
        a = spec.a
        if t <= lam:
            return lam * t
        if t <= a * lam:
            # antiderivative of the SCAD derivative on (lam, a*lam]
            return (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0))
        return (a + 1.0) * lam * lam / 2.0
    # mcp
    gamma = spec.gamma
    if t <= gamma * lam:
        return lam * t - t * t / (2.0 * gamma)
    return gamma * lam * lam / 2.0


def threshold(spec: PenaltySpec, lam: float, x: float) -> float:
    """Closed-form h_lam(x).  Odd in x, with |h_lam(x)| <= |x|.

    Branch boundaries are assigned as written (<= goes to the earlier
    branch); the objective value ties there, so the choice only fixes
    determinism.
    """
    lam = _check_lambda(lam)
    x = float(x)
    t = abs(x)
    sign = -1.0 if x < 0 else 1.0
    if spec.kind == "lasso":
        return sign * max(t - lam, 0.0)
    if spec.kind == "scad":
        a = spec.a
        if t <= 2.0 * lam:
            return sign * max(t - lam, 0.0)
        if t <= a * lam:
            return sign * ((a - 1.0) * t - a * lam) / (a - 2.0)
        return x
    # mcp
    gamma = spec.gamma
    if t <= lam:
        return 0.0
    if t <= gamma * lam:
        return sign * gamma * (t - lam) / (gamma - 1.0)
    return x


def _objective(spec: PenaltySpec, lam: float, x: float, u: np.ndarray) -> np.ndarray:
    t = np.abs(u)
    if spec.kind == "lasso":
        pen = lam * t
    elif spec.kind == "scad":
        a = spec.a
        pen = np.where(
            t <= lam,
            lam * t,
            np.where(
                t <= a * lam,
                (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0)),
                (a + 1.0) * lam * lam / 2.0,
            ),
        )
    else:
        gamma = spec.gamma
        pen = np.where(t <= gamma * lam, lam * t - t * t / (2.0 * gamma), gamma * lam * lam / 2.0)
    return 0.5 * (u - x) ** 2 + pen


def threshold_oracle(
    spec: PenaltySpec,
    lam: float,
    x: float,
    half_width: float | None = None,
    step: float | None = None,
) -> float:
    """Brute-force argmin of (u-x)^2/2 + p_lam(u).

    Exhaustive grid over [x - half_width, x + half_width] plus the point 0,
    followed by ternary refinement around the best grid point.  Defaults:
    half_width = |x| + 1, step = 1e-4 * max(1, |x|).
    """
    lam = _check_lambda(lam)
    x = float(x)
    if half_width is None:
        half_width = abs(x) + 1.0
    if step is None:
        step = 1e-4 * max(1.0, abs(x))
    if half_width <= 0 or step <= 0:
        raise ParameterError("half_width and step must be positive")

    grid = np.arange(x - half_width, x + half_width + step, step)
    grid = np.append(grid, 0.0)
    vals = _objective(spec, lam, x, grid)
    best = grid[int(np.argmin(vals))]

    lo, hi = best - step, best + step
    for _ in range(200):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if _objective(spec, lam, x, np.array([m1]))[0] <= _objective(spec, lam, x, np.array([m2]))[0]:
            hi = m2
        else:
            lo = m1
    refined = 0.5 * (lo + hi)

    candidates = np.array([refined, best, 0.0])
    return float(candidates[int(np.argmin(_objective(spec, lam, x, candidates)))])
