"""Complete elliptic integrals, Jacobi elliptic functions of complex argument,
and the theta log-derivatives phi1 = H'/H, phi4 = Theta'/Theta.

Everything is parameterized by an immutable :class:`EllipticContext` holding
the modulus k, the quarter periods K and K', the nome q, and the measured
quasi-period shift constant C with phi(u + iK') = phi(u) + iC.  The measured
value agrees with the theta functional equation's prediction C = -pi/K; the
sign is fixed numerically at context creation rather than assumed.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, PoleProximityError

GUARD_RADIUS = 1e-8


@dataclass(frozen=True)
class EllipticContext:
    """Modulus k with derived constants; safe to share between threads."""
    k: float
    K: float
    Kprime: float
    q: float
    C: float

    @property
    def two_K(self):
        return 2.0 * self.K


def _agm(a, b):
    # quadratic convergence; the bound guards against 1-ulp oscillation of
    # the stopping test once |a - b| reaches rounding level
    for _ in range(64):
        if abs(a - b) <= 1e-15 * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def _phi_sum_raw(u, twoK, q):
    """phi1+phi4 by direct series, no quasi-period reduction.

    Only used to measure C(k); converges for |Im u| < K', progressively
    slower toward the boundary.
    """
    v = (np.pi / twoK) * np.asarray(u, np.complex128)
    acc = np.cos(v) / np.sin(v)
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P, Q = E.copy(), Einv.copy()
    qn = q
    for _ in range(1, 20000):
        term = (4.0 * qn / (1.0 - qn)) * (-0.5j) * (P - Q)
        acc = acc + term
        if np.abs(term).max() <= 1e-17 * max(np.abs(acc).max(), 1.0):
            break
        P *= E
        Q *= Einv
        qn *= q
    return (np.pi / twoK) * acc


def make_context(k):
    """Build an EllipticContext for modulus k in (0, 1).

    K and K' come from the arithmetic-geometric mean, q = exp(-pi K'/K), and
    C is measured from phi(lambda + iK') - phi(lambda) at a reference point
    and validated at two more.
    """
    k = float(k)
    if not (0.0 < k < 1.0):
        raise DomainError(f"modulus k must lie in (0, 1), got {k}")
    kp = np.sqrt((1.0 - k) * (1.0 + k))
    K = np.pi / (2.0 * _agm(1.0, kp))
    Kp = np.pi / (2.0 * _agm(1.0, k))
    q = float(np.exp(-np.pi * Kp / K))

    # consistency of (K, K', q) against the theta-constant identity k = (t2/t3)^2
    t2, t3, _ = kernels.theta_constants(q)
    if abs((t2 / t3) ** 2 - k) > 1e-9:
        raise DomainError(f"internal constant mismatch for k={k}")

    twoK = 2.0 * K
    refs = np.array([0.23 * twoK, 0.41 * twoK, 0.67 * twoK]) - 0.25j * Kp
    d = _phi_sum_raw(refs + 1j * Kp, twoK, q) - _phi_sum_raw(refs, twoK, q)
    C_vals = d.imag
    if np.abs(d.real).max() > 1e-10 or np.abs(C_vals - C_vals[0]).max() > 1e-10:
        raise DomainError(f"quasi-period shift not constant for k={k}")
    return EllipticContext(k=k, K=float(K), Kprime=float(Kp), q=q,
                           C=float(C_vals[0]))


def _prepare(u):
    arr = np.asarray(u, dtype=np.complex128)
    return arr, arr.ndim == 0


def _finish(val, scalar):
    return complex(val.ravel()[0]) if scalar else val


def _nearest_phi_pole(u, ctx):
    m = np.rint(np.real(u) / ctx.two_K)
    n = np.rint(np.imag(u) / ctx.Kprime)
    return m * ctx.two_K + 1j * n * ctx.Kprime, int(np.rint(n))


def _check_phi_guard(u, ctx):
    d = kernels.phi_pole_dist(u, ctx.two_K, ctx.Kprime)
    if np.min(d) < GUARD_RADIUS:
        bad = np.asarray(u, np.complex128).ravel()[int(np.argmin(d))]
        point, n = _nearest_phi_pole(bad, ctx)
        which = "H" if n % 2 == 0 else "Theta"
        raise PoleProximityError(
            f"argument {bad} within {GUARD_RADIUS} of a zero of {which} at "
            f"{point}", lattice_point=point)


def jacobi_elliptic(u, ctx):
    """(sn, cn, dn) at complex u for the context modulus.

    Rejects arguments within the guard radius of a pole (iK' mod lattice).
    """
    arr, scalar = _prepare(u)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite argument")
    d = kernels.sn_pole_dist(arr, ctx.two_K, ctx.Kprime)
    if np.min(d) < GUARD_RADIUS:
        bad = arr.ravel()[int(np.argmin(d))]
        m = np.rint(bad.real / ctx.two_K)
        n = np.rint((bad.imag - ctx.Kprime) / (2 * ctx.Kprime))
        point = m * ctx.two_K + 1j * ((2 * n + 1) * ctx.Kprime)
        raise PoleProximityError(
            f"argument {bad} within {GUARD_RADIUS} of the sn pole at {point}",
            lattice_point=point)
    sn, cn, dn = kernels.jacobi_sncndn(arr, ctx.two_K, ctx.Kprime, ctx.q)
    return _finish(sn, scalar), _finish(cn, scalar), _finish(dn, scalar)


def phi(u, ctx):
    """(phi1, phi4) at complex u; derivatives are taken with respect to u."""
    arr, scalar = _prepare(u)
    _check_phi_guard(arr, ctx)
    p1, p4 = kernels.phi_pair(arr, ctx.two_K, ctx.Kprime, ctx.q)
    return _finish(p1, scalar), _finish(p4, scalar)


def phi_sum(u, ctx):
    """phi(u) = phi1(u) + phi4(u), the kernel of the Bethe system."""
    arr, scalar = _prepare(u)
    _check_phi_guard(arr, ctx)
    return _finish(kernels.phi_sum(arr, ctx.two_K, ctx.Kprime, ctx.q), scalar)


def phi_sum_derivative(u, ctx):
    """phi'(u) by termwise differentiation of the q-series."""
    arr, scalar = _prepare(u)
    _check_phi_guard(arr, ctx)
    return _finish(kernels.phi_sum_deriv(arr, ctx.two_K, ctx.Kprime, ctx.q),
                   scalar)
