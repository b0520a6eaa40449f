"""Elliptic kernel: constants, Jacobi functions, theta log-derivatives.

Independent oracle values were computed beforehand with mpmath (jtheta and
ellipfun at 25 digits) and with an AGM/Landen evaluation; they are frozen
here.  Finite differences and identity checks act as runtime oracles.
"""

import numpy as np
import pytest

from xyzgaudin import elliptic, kernels_numba, kernels_numpy
from xyzgaudin.errors import DomainError, PoleProximityError

# mpmath oracles, k = 0.5
K05 = 1.685750354812596
KP05 = 2.1565156474996432
SN02 = 0.19834539121447199
CN02 = 0.98013218791343551
DN02 = 0.99507023694108875
PHI1_U0 = 2.9135222261029956 - 1.029190783208376j
PHI4_U0 = 0.037345381316447391 + 0.010847145947171411j
CNDNSN_U0 = 2.8761768447865482 - 1.0400379291555474j
K_QUARTER = 1.5962422221317835   # K(k = 0.25)


def test_context_constants(ctx05):
    assert ctx05.K == pytest.approx(K05, rel=1e-14)
    assert ctx05.Kprime == pytest.approx(KP05, rel=1e-14)
    assert ctx05.q == pytest.approx(np.exp(-np.pi * KP05 / K05), rel=1e-13)
    # measured quasi-period shift agrees with the analytic candidate -pi/K
    assert ctx05.C == pytest.approx(-np.pi / K05, abs=1e-12)
    assert elliptic.make_context(0.25).K == pytest.approx(K_QUARTER, rel=1e-14)


def test_context_table_values(ctx05):
    # the constants quoted alongside the reference tables
    assert round(ctx05.K, 5) == 1.68575
    assert round(2 * ctx05.K, 4) == 3.3715
    assert round(ctx05.Kprime / 2, 5) == 1.07826


def test_context_small_k_limit():
    assert elliptic.make_context(1e-6).K == pytest.approx(np.pi / 2, abs=1e-10)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.7])
def test_context_domain(bad):
    with pytest.raises(DomainError):
        elliptic.make_context(bad)


def test_jacobi_origin_and_quarter_period(ctx05):
    sn, cn, dn = elliptic.jacobi_elliptic(0.0, ctx05)
    assert sn == 0
    assert cn == pytest.approx(1.0, abs=1e-14)
    assert dn == pytest.approx(1.0, abs=1e-14)
    sn, _, _ = elliptic.jacobi_elliptic(ctx05.K, ctx05)
    assert sn == pytest.approx(1.0, abs=1e-13)


def test_jacobi_oracle_point(ctx05):
    sn, cn, dn = elliptic.jacobi_elliptic(0.2, ctx05)
    assert sn.real == pytest.approx(SN02, abs=1e-13)
    assert cn.real == pytest.approx(CN02, abs=1e-13)
    assert dn.real == pytest.approx(DN02, abs=1e-13)
    assert abs(sn.imag) < 1e-15


def test_jacobi_identities_bulk(ctx05):
    rng = np.random.default_rng(1)
    u = (rng.uniform(0.0, 2 * ctx05.K, 1000)
         + 1j * rng.uniform(-ctx05.Kprime / 2, ctx05.Kprime / 2, 1000))
    sn, cn, dn = elliptic.jacobi_elliptic(u, ctx05)
    assert np.abs(sn ** 2 + cn ** 2 - 1).max() < 1e-10
    assert np.abs(dn ** 2 + ctx05.k ** 2 * sn ** 2 - 1).max() < 1e-10


def test_jacobi_pole_guard(ctx05):
    with pytest.raises(PoleProximityError) as err:
        elliptic.jacobi_elliptic(1j * ctx05.Kprime + 1e-9, ctx05)
    assert err.value.lattice_point == pytest.approx(1j * ctx05.Kprime)
    with pytest.raises(PoleProximityError):
        elliptic.jacobi_elliptic(2 * ctx05.K + 1j * ctx05.Kprime, ctx05)
    with pytest.raises(DomainError):
        elliptic.jacobi_elliptic(np.inf, ctx05)


def test_phi_odd(ctx05):
    rng = np.random.default_rng(2)
    u = (rng.uniform(0.05, 2 * ctx05.K - 0.05, 50)
         + 1j * rng.uniform(-ctx05.Kprime / 2, ctx05.Kprime / 2, 50))
    p1, p4 = elliptic.phi(u, ctx05)
    m1, m4 = elliptic.phi(-u, ctx05)
    assert np.abs(p1 + m1).max() < 1e-11
    assert np.abs(p4 + m4).max() < 1e-11


def test_phi_small_k_reduces_to_cot():
    ctx = elliptic.make_context(1e-6)
    u = np.linspace(0.2, 1.4, 7) + 0j
    p1, p4 = elliptic.phi(u, ctx)
    assert np.abs(p4).max() < 1e-10
    assert np.abs(p1 - 1 / np.tan(u)).max() < 1e-9


def test_phi_oracle_point(ctx05):
    p1, p4 = elliptic.phi(0.3 + 0.1j, ctx05)
    assert p1 == pytest.approx(PHI1_U0, abs=1e-12)
    assert p4 == pytest.approx(PHI4_U0, abs=1e-12)
    # d/du log sn = cn dn / sn
    assert p1 - p4 == pytest.approx(CNDNSN_U0, abs=1e-10)


def test_phi_pole_guard_names_lattice_point(ctx05):
    with pytest.raises(PoleProximityError) as err:
        elliptic.phi(2 * ctx05.K + 1e-10, ctx05)
    assert err.value.lattice_point == pytest.approx(2 * ctx05.K)


def test_phi_sum_matches_pair(ctx05):
    u = 0.7 - 0.3j
    p1, p4 = elliptic.phi(u, ctx05)
    assert elliptic.phi_sum(u, ctx05) == pytest.approx(p1 + p4, rel=1e-14)


def test_phi_sum_real_period(ctx05):
    rng = np.random.default_rng(3)
    u = (rng.uniform(0.05, 2 * ctx05.K - 0.05, 1000)
         + 1j * rng.uniform(-ctx05.Kprime / 2, ctx05.Kprime / 2, 1000))
    d = elliptic.phi_sum(u + 2 * ctx05.K, ctx05) - elliptic.phi_sum(u, ctx05)
    assert np.abs(d).max() < 1e-10


def test_phi_sum_quasi_period_measured_raw(ctx05):
    # raw series (no reduction) so the shift identity is actually exercised
    rng = np.random.default_rng(4)
    u = (rng.uniform(0.1, 2 * ctx05.K - 0.1, 100)
         - 1j * rng.uniform(ctx05.Kprime / 8, ctx05.Kprime / 2, 100))
    d = (elliptic._phi_sum_raw(u + 1j * ctx05.Kprime, ctx05.two_K, ctx05.q)
         - elliptic._phi_sum_raw(u, ctx05.two_K, ctx05.q))
    assert np.abs(d.real).max() < 1e-10
    assert np.abs(d.imag - ctx05.C).max() < 1e-10


def test_phi_derivative_vs_finite_difference(ctx05):
    u = 0.4 + 0.2j
    h = 1e-5
    fd = (elliptic.phi_sum(u + h, ctx05) - elliptic.phi_sum(u - h, ctx05)) / (2 * h)
    assert elliptic.phi_sum_derivative(u, ctx05) == pytest.approx(fd, abs=1e-6)


def test_phi_derivative_even(ctx05):
    for u in (0.31 + 0.21j, 1.4 - 0.6j):
        assert elliptic.phi_sum_derivative(-u, ctx05) == pytest.approx(
            elliptic.phi_sum_derivative(u, ctx05), rel=1e-12)


def test_phi1_simple_pole_unit_residue(ctx05):
    # u * phi1(u) -> 1 along any ray into the origin
    for theta in (0.0, 0.6, 2.1, -1.0):
        u = 1e-6 * np.exp(1j * theta)
        p1, _ = elliptic.phi(u, ctx05)
        assert abs(u * p1 - 1) < 1e-5


def test_sn_limits_trig_hyperbolic():
    u = np.linspace(0.05, 1.45, 60)
    sn0 = elliptic.jacobi_elliptic(u + 0j, elliptic.make_context(1e-6))[0].real
    assert np.abs(sn0 - np.sin(u)).max() < 1e-5
    sn1 = elliptic.jacobi_elliptic(u + 0j, elliptic.make_context(1 - 1e-9))[0].real
    assert np.abs(sn1 - np.tanh(u)).max() < 1e-4


@pytest.mark.parametrize("k", [0.01, 0.5, 0.9, 0.99])
def test_identities_across_moduli(k):
    ctx = elliptic.make_context(k)
    rng = np.random.default_rng(5)
    u = (rng.uniform(0.05, 2 * ctx.K - 0.05, 200)
         + 1j * rng.uniform(-ctx.Kprime / 2, ctx.Kprime / 2, 200))
    sn, cn, dn = elliptic.jacobi_elliptic(u, ctx)
    assert np.abs(sn ** 2 + cn ** 2 - 1).max() < 1e-10
    assert np.abs(dn ** 2 + k ** 2 * sn ** 2 - 1).max() < 1e-10


def test_backends_agree(ctx05):
    rng = np.random.default_rng(6)
    u = (rng.uniform(0.05, 2 * ctx05.K - 0.05, 300)
         + 1j * rng.uniform(-0.9 * ctx05.Kprime, 0.9 * ctx05.Kprime, 300))
    args = (ctx05.two_K, ctx05.Kprime, ctx05.q)
    for fn in ("phi_sum", "phi_sum_deriv"):
        a = getattr(kernels_numpy, fn)(u, *args)
        b = getattr(kernels_numba, fn)(u, *args)
        assert np.abs(a - b).max() < 1e-12
    a1, a4 = kernels_numpy.phi_pair(u, *args)
    b1, b4 = kernels_numba.phi_pair(u, *args)
    assert np.abs(a1 - b1).max() < 1e-12
    assert np.abs(a4 - b4).max() < 1e-12
    for pair in zip(kernels_numpy.jacobi_sncndn(u, *args),
                    kernels_numba.jacobi_sncndn(u, *args)):
        assert np.abs(pair[0] - pair[1]).max() < 1e-12


def test_backend_newton_agrees(ctx05):
    z = np.array([0.0, 0.2, 0.4])
    s = np.array([0.5, 1.0, 1.5])
    start = np.array([0.28 + 0.01j, 0.26 + 0.12j, 0.26 - 0.11j])
    args = (z, s, 0, ctx05.two_K, ctx05.Kprime, ctx05.q, 1e-11, 60, 1e-8)
    ra, fa, sta, _, _ = kernels_numpy.newton(start, *args)
    rb, fb, stb, _, _ = kernels_numba.newton(start, *args)
    assert sta == stb == kernels_numpy.NEWTON_CONVERGED
    assert np.abs(np.sort_complex(ra) - np.sort_complex(rb)).max() < 1e-9
