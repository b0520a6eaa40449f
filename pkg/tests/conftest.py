"""Shared fixtures; the expensive artifacts (enumerations, the N=12 dense
diagonalization, the continuation chain) are computed once per session."""

import time
import warnings

import numpy as np
import pytest

from xyzgaudin import acsm, bethe, elliptic, spinops

THREE_SPIN_COEFFS = [(0, -1.0), (1, -0.5)]

# reference energy tables of the three-spin demo system (sector l=0 / l=1)
TABLE_L0 = np.sort([-8.13147, -5.64950, -5.48168, -0.850805, -0.758290,
                    -0.649792, -0.615993, -0.606659, -0.394121,
                    6.69616, 6.88050, 7.22436])
TABLE_L1 = np.sort([-5.86850, -5.64331, -5.59109, -5.52799, -0.714459,
                    -0.649689, -0.619842, -0.395533,
                    6.59546, 6.64346, 6.88448, 7.22431])

# continuation checkpoints: N -> (lambda1*N, min Re, max Re, E/N)
TABLE_CHAIN = {
    12: (0.327300, 2.120138, 2.120487, -0.821616),
    20: (0.329466, 2.106036, 2.106256, -0.792253),
    40: (0.330390, 2.095787, 2.095898, -0.772954),
    80: (0.330681, 2.090745, 2.090800, -0.7640486),
    100: (0.330726, 2.089743, 2.089787, -0.762322),
    200: (0.330805, 2.087743, 2.087765, -0.758920),
    300: (0.330828, 2.0870780, 2.0870926, -0.757801),
}
CHAIN_LIMITS = {"lambda1_n": 0.330869, "min_re": 2.0857505,
                "max_re": 2.0857505, "energy_per_spin": -0.755586}


@pytest.fixture(scope="session")
def ctx05():
    return elliptic.make_context(0.5)


@pytest.fixture(scope="session")
def three_spin(ctx05):
    return spinops.spin_system([0.5, 1.0, 1.5], [0.0, 0.2, 0.4], ctx05)


@pytest.fixture(scope="session")
def three_spin_blocks(three_spin):
    H = spinops.build_hamiltonian(THREE_SPIN_COEFFS, three_spin)
    return spinops.parity_split(H, three_spin)


@pytest.fixture(scope="session")
def three_spin_ed(three_spin, three_spin_blocks):
    out = {}
    for l in (0, 1):
        par = bethe.sector_parity(three_spin, l)
        block = (three_spin_blocks.even_block if par == 1
                 else three_spin_blocks.odd_block)
        out[l] = spinops.eigensolve(block)
    return out


@pytest.fixture(scope="session")
def three_spin_solutions(three_spin):
    """Complete enumeration of both sectors plus the wall time it took."""
    out = {}
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("error", category=UserWarning)
        for l in (0, 1):
            out[l] = bethe.enumerate_solutions(three_spin, l, seed=0)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def acsm_params():
    return acsm.AcsmParams(N=12, a=0.2, b=0.6, k=0.5)


@pytest.fixture(scope="session")
def acsm_trace(acsm_params):
    t0 = time.perf_counter()
    trace = acsm.run_continuation(acsm_params, seed=0)
    return trace, time.perf_counter() - t0


@pytest.fixture(scope="session")
def acsm_ed12(acsm_params):
    """Even-sector block spectrum of the dense N=12 Hamiltonian."""
    system, H = acsm.build_acsm(acsm_params)
    blocks = spinops.parity_split(H, system)
    par = bethe.sector_parity(system, 0)
    block = blocks.even_block if par == 1 else blocks.odd_block
    other = blocks.odd_block if par == 1 else blocks.even_block
    return {
        "sector_lowest": spinops.eigensolve(block, n_lowest=6),
        "other_lowest": spinops.eigensolve(other, n_lowest=2),
    }
