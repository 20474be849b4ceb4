"""Design-matrix families and Gaussian response simulation.

Six families are supported:

- ``orthogonal``      exact orthonormal columns (QR of a Gaussian draw)
- ``equal_corr``      population correlation rho off the diagonal
- ``ar1``             population correlation rho^|i-j|
- ``block_diag``      equal correlation rho inside blocks, 0 across
- ``iid_gaussian``    all entries i.i.d. standard normal
- ``irrep_violating`` i.i.d. normals for the first p-50 columns; each of the
  last 50 columns is a fixed signed combination of the first s columns plus
  fresh noise, scaled so its population variance is 1.  This construction
  breaks the irrepresentable condition, so lasso screening fails often.

Every family is column-standardized to unit l2 norm after generation; the
orthogonal family already satisfies this.  All generation is a pure function
of (family, dims, params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng import generator

FAMILIES = (
    "orthogonal",
    "equal_corr",
    "ar1",
    "block_diag",
    "irrep_violating",
    "iid_gaussian",
)

_IRREP_TAIL = 50  # fixed number of dependent trailing columns
_IRREP_MAX_S = 25


@dataclass(frozen=True)
class DesignMatrix:
    """An n x p design with unit-norm columns plus its generation metadata."""

    n: int
    p: int
    values: np.ndarray
    family: str
    rho: float = 0.0
    block_size: int | None = None
    s: int | None = None
    seed: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.p)


@dataclass(frozen=True)
class ResponseSpec:
    """True coefficients, noise level, and noise seed for y = X beta + sigma z."""

    beta: np.ndarray
    sigma: float
    seed: int

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        object.__setattr__(self, "beta", beta)
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")

    @property
    def is_global_null(self) -> bool:
        return bool(np.all(self.beta == 0.0))


def standardize_columns(values: np.ndarray) -> np.ndarray:
    """Scale each column to unit l2 norm (idempotent)."""
    norms = np.linalg.norm(values, axis=0)
    if np.any(norms == 0.0):
        raise ParameterError("cannot standardize a zero column")
    return values / norms


def population_covariance(
    family: str, p: int, rho: float = 0.0, block_size: int | None = None
) -> np.ndarray:
    """Population column covariance for the correlated families."""
    if family == "equal_corr":
        return np.full((p, p), rho) + (1.0 - rho) * np.eye(p)
    if family == "ar1":
        idx = np.arange(p)
        return rho ** np.abs(idx[:, None] - idx[None, :])
    if family == "block_diag":
        if block_size is None or block_size < 1:
            raise ParameterError("block_diag requires a positive block_size")
        blocks = np.arange(p) // block_size
        same = blocks[:, None] == blocks[None, :]
        return np.where(same, np.full((p, p), rho), 0.0) + (1.0 - rho) * np.eye(p)
    raise ParameterError(f"no population covariance for family {family!r}")


def _check_common(family: str, n: int, p: int) -> None:
    if family not in FAMILIES:
        raise ParameterError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")


def make_design(
    family: str,
    n: int,
    p: int,
    *,
    rho: float = 0.0,
    block_size: int | None = None,
    s: int | None = None,
    seed: int = 0,
) -> DesignMatrix:
    """Generate a design matrix of the requested family.

    Correlated families multiply an i.i.d. Gaussian matrix by the Cholesky
    factor of the population covariance, so the population column covariance
    is exact.  Columns are standardized to unit l2 norm afterwards.
    """
    _check_common(family, n, p)
    rng = generator(seed)

    if family == "orthogonal":
        if n < p:
            raise ParameterError(f"orthogonal family requires n >= p, got n={n}, p={p}")
        Z = rng.standard_normal((n, p))
        Q, R = np.linalg.qr(Z)
        # canonical sign: positive R diagonal, so the draw is LAPACK-independent
        Q = Q * np.sign(np.diag(R))
        values = Q
    elif family == "iid_gaussian":
        values = rng.standard_normal((n, p))
    elif family in ("equal_corr", "ar1", "block_diag"):
        if not 0.0 <= rho < 1.0:
            raise ParameterError(f"rho must be in [0, 1), got {rho}")
        sigma = population_covariance(family, p, rho=rho, block_size=block_size)
        L = np.linalg.cholesky(sigma)
        values = rng.standard_normal((n, p)) @ L.T
    elif family == "irrep_violating":
        if p <= _IRREP_TAIL:
            raise ParameterError(f"irrep_violating requires p > {_IRREP_TAIL}, got p={p}")
        if s is None or s < 1:
            raise ParameterError("irrep_violating requires a positive s")
        if s > _IRREP_MAX_S:
            raise ParameterError(f"irrep_violating requires s <= {_IRREP_MAX_S}, got s={s}")
        if s > p - _IRREP_TAIL:
            raise ParameterError(f"irrep_violating requires s <= p - {_IRREP_TAIL}")
        head = rng.standard_normal((n, p - _IRREP_TAIL))
        eps = rng.standard_normal((n, _IRREP_TAIL))
        # X_k = sum_j ((-1)^(j+1)/5) X_j + sqrt(25-s)/5 * eps_k, j = 1..s
        signs = np.array([(-1.0) ** j / 5.0 for j in range(s)])  # j=0 -> +1/5
        parent_mix = head[:, :s] @ signs
        tail = parent_mix[:, None] + (np.sqrt(25.0 - s) / 5.0) * eps
        values = np.concatenate([head, tail], axis=1)
    else:  # pragma: no cover - FAMILIES guard above
        raise ParameterError(f"unhandled family {family!r}")

    values = standardize_columns(values)
    return DesignMatrix(
        n=n,
        p=p,
        values=values,
        family=family,
        rho=float(rho),
        block_size=block_size,
        s=s,
        seed=int(seed),
    )


def simulate_response(X: DesignMatrix, spec: ResponseSpec) -> np.ndarray:
    """Draw y = X beta + sigma z with z ~ N(0, I) from the seeded stream."""
    if spec.beta.shape[0] != X.p:
        raise ParameterError(
            f"beta has length {spec.beta.shape[0]} but design has p={X.p}"
        )
    z = generator(spec.seed).standard_normal(X.n)
    return X.values @ spec.beta + spec.sigma * z


def padded_beta(head: np.ndarray | list[float] | tuple[float, ...], p: int) -> np.ndarray:
    """Zero-pad a leading coefficient spec to length p."""
    head = np.asarray(head, dtype=float).reshape(-1)
    if head.shape[0] > p:
        raise ParameterError(f"beta spec has {head.shape[0]} entries but p={p}")
    beta = np.zeros(p)
    beta[: head.shape[0]] = head
    return beta
