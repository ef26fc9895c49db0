"""Shared fixtures; the expensive artifacts are session-scoped."""

import numpy as np
import pytest

from schrodheat.grids import auto_r_max, build_grid
from schrodheat.heat import compute_sectors, small_time_diag
from schrodheat.model import make_params
from schrodheat.spectral import build_sector_family, ground_state
from schrodheat.verify import VerifyContext, VerifySettings


@pytest.fixture(scope="session")
def osc():
    return make_params(3, 0, 2, sanity_mode=True)


@pytest.fixture(scope="session")
def free():
    return make_params(3, 0, 0, sanity_mode=True)


@pytest.fixture(scope="session")
def p324():
    return make_params(3, 2, 4)


@pytest.fixture(scope="session")
def p444():
    return make_params(4, 4, 4)


@pytest.fixture(scope="session")
def osc_ground(osc):
    return ground_state(osc, tol=1e-7, n0=512, max_depth=5, n_modes=2)


@pytest.fixture(scope="session")
def gs324(p324):
    return ground_state(p324, tol=1e-7, n0=512, max_depth=6)


@pytest.fixture(scope="session")
def pack324(p324):
    grid = build_grid(p324, r_max=auto_r_max(p324), n=2048)
    return compute_sectors(p324, grid, ell_max=16, n_modes=40)


@pytest.fixture(scope="session")
def free_pack(free):
    grid = build_grid(free, r_max=12.0, n=4000)
    return compute_sectors(free, grid, ell_max=32, n_modes=80)


@pytest.fixture(scope="session")
def free_smalltime(free):
    gc = build_grid(free, r_max=12.0, n=1536)
    gf = build_grid(free, r_max=12.0, n=3072)
    ts = np.geomspace(0.01, 1.0, 12)
    return small_time_diag(free, build_sector_family(free, gc),
                           build_sector_family(free, gf),
                           [0.35, 0.5, 0.7], ts, rel_dt=1.0 / 32.0)


@pytest.fixture(scope="session")
def ctx324(p324):
    """Default-resolution verify context shared by the acceptance tests."""
    return VerifyContext(p324)


@pytest.fixture(scope="session")
def ctx324_fast(p324):
    return VerifyContext(p324, VerifySettings().fast())
