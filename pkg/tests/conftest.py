import pytest

from pathsig import default_config, run_study


@pytest.fixture(scope="session")
def orthogonal_null_p50():
    """Shared 500-rep orthogonal null run (n=100, p=50) with all three
    penalty statistics; feeds acceptance criteria 1, 2 (baseline) and 8."""
    cfg = default_config(
        "null_qq", n=100, p=50, n_reps=500, seed=101,
        statistics=("cov_lasso", "cov_scad", "cov_mcp"),
    )
    return run_study(cfg)


@pytest.fixture(scope="session")
def table1_row1():
    """Shared Table-1 row (n=500, p=10, d=6, 1000 reps)."""
    cfg = default_config("table1", p=10, d=6, seed=106, n_reps=1000)
    return run_study(cfg)
