"""Vectorized numpy kernels for the theta-series functions and the Bethe system.

Conventions used by every kernel here and in the numba twin:

* ``twoK``   -- real period 2K of the coupling kernel phi,
* ``Kp``     -- imaginary quasi-period K',
* ``q``      -- nome exp(-pi K'/K), 0 < q < 1,
* arguments u are first reduced by integer multiples of iK' into the strip
  Im(u) in [-K'/2, K'/2] where the log-derivative Fourier series converges
  fast; the exact quasi-periodicity phi(u + iK') = phi(u) - i*pi/K restores
  the shift.  The series is truncated when the last term drops below 1e-17
  relative to the running sum (floored at unit scale; the tail is geometric).
"""

import numpy as np

SERIES_TOL = 1e-17
SERIES_NMAX = 4000


def _reduce_im(u, Kp):
    n = np.rint(u.imag / Kp)
    return u - 1j * (Kp * n), n


def phi_sum(u, twoK, Kp, q):
    """phi(u) = phi1(u) + phi4(u) for complex array u."""
    u = np.asarray(u, dtype=np.complex128)
    w, n = _reduce_im(u, Kp)
    v = (np.pi / twoK) * w
    acc = np.cos(v) / np.sin(v)
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P, Q = E.copy(), Einv.copy()
    qn = q
    for _ in range(1, SERIES_NMAX):
        term = (4.0 * qn / (1.0 - qn)) * (-0.5j) * (P - Q)
        acc = acc + term
        if np.abs(term).max() <= SERIES_TOL * max(np.abs(acc).max(), 1.0):
            break
        P *= E
        Q *= Einv
        qn *= q
    return (np.pi / twoK) * acc - 1j * ((2.0 * np.pi / twoK) * n)


def phi_sum_deriv(u, twoK, Kp, q):
    """d/du of phi_sum, by termwise differentiation of the same series."""
    u = np.asarray(u, dtype=np.complex128)
    w, _ = _reduce_im(u, Kp)
    v = (np.pi / twoK) * w
    sv = np.sin(v)
    acc = -1.0 / (sv * sv)
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P, Q = E.copy(), Einv.copy()
    qn = q
    for m in range(1, SERIES_NMAX):
        term = (8.0 * m * qn / (1.0 - qn)) * 0.5 * (P + Q)
        acc = acc + term
        if np.abs(term).max() <= SERIES_TOL * max(np.abs(acc).max(), 1.0):
            break
        P *= E
        Q *= Einv
        qn *= q
    return (np.pi / twoK) ** 2 * acc


def phi_pair(u, twoK, Kp, q):
    """(phi1, phi4) for complex array u.

    Under one iK' shift the two log-derivatives swap and each picks up
    -i*pi/(2K), so after reducing by n shifts the pair is swapped when n is
    odd and both components carry -n*i*pi/(2K).
    """
    u = np.asarray(u, dtype=np.complex128)
    w, n = _reduce_im(u, Kp)
    v = (np.pi / twoK) * w
    a1 = np.cos(v) / np.sin(v)
    a4 = np.zeros_like(a1)
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P, Q = E.copy(), Einv.copy()
    qn = q
    q2n = q * q
    for _ in range(1, SERIES_NMAX):
        s2 = (-0.5j) * (P - Q)
        t1 = (4.0 * q2n / (1.0 - q2n)) * s2
        t4 = (4.0 * qn / (1.0 - q2n)) * s2
        a1 = a1 + t1
        a4 = a4 + t4
        big = max(np.abs(a1).max(), np.abs(a4).max(), 1.0)
        if max(np.abs(t1).max(), np.abs(t4).max()) <= SERIES_TOL * big:
            break
        P *= E
        Q *= Einv
        qn *= q
        q2n *= q * q
    scale = np.pi / twoK
    shift = -1j * scale * n
    p1 = scale * a1 + shift
    p4 = scale * a4 + shift
    odd = (n % 2) != 0
    phi1 = np.where(odd, p4, p1)
    phi4 = np.where(odd, p1, p4)
    return phi1, phi4


def theta_series(v, q):
    """theta_1..theta_4 at argument v (complex array) and nome q.

    Term n combines the odd harmonic 2n+1 (theta1/theta2, nome power
    q^{(n+1/2)^2}) with the even harmonic 2(n+1) (theta3/theta4, q^{(n+1)^2}).
    """
    v = np.asarray(v, dtype=np.complex128)
    F = np.exp(1j * v)
    F2 = F * F
    F2inv = 1.0 / F2
    Po, Qo = F.copy(), (1.0 / F)
    Pe, Qe = F2.copy(), F2inv.copy()
    qo = q ** 0.25
    qe = q
    t1 = np.zeros_like(v)
    t2 = np.zeros_like(v)
    t3 = np.ones_like(v)
    t4 = np.ones_like(v)
    sgn = 1.0   # (-1)^n
    for n in range(SERIES_NMAX):
        so = (-0.5j) * (Po - Qo)
        co = 0.5 * (Po + Qo)
        ce = 0.5 * (Pe + Qe)
        t1 = t1 + (2.0 * sgn * qo) * so
        t2 = t2 + (2.0 * qo) * co
        t3 = t3 + (2.0 * qe) * ce
        t4 = t4 + (-2.0 * sgn * qe) * ce
        big = max(np.abs(t3).max(), np.abs(t4).max(), np.abs(t2).max(), 1.0)
        if max(np.abs(qo * so).max(), np.abs(qe * ce).max()) <= SERIES_TOL * big:
            break
        qo *= q ** (2 * n + 2)
        qe *= q ** (2 * n + 3)
        Po *= F2
        Qo *= F2inv
        Pe *= F2
        Qe *= F2inv
        sgn = -sgn
    return t1, t2, t3, t4


def jacobi_sncndn(u, twoK, Kp, q):
    """(sn, cn, dn) from theta-function ratios at v = pi*u/(2K)."""
    u = np.asarray(u, dtype=np.complex128)
    v = (np.pi / twoK) * u
    t1, t2, t3, t4 = theta_series(v, q)
    z0 = np.zeros(1, dtype=np.complex128)
    c1, c2, c3, c4 = theta_series(z0, q)
    sn = (c3[0] / c2[0]) * t1 / t4
    cn = (c4[0] / c2[0]) * t2 / t4
    dn = (c4[0] / c3[0]) * t3 / t4
    return sn, cn, dn


def theta_constants(q):
    """theta_2(0), theta_3(0), theta_4(0)."""
    z0 = np.zeros(1, dtype=np.complex128)
    _, c2, c3, c4 = theta_series(z0, q)
    return c2[0].real, c3[0].real, c4[0].real


def phi_pole_dist(u, twoK, Kp):
    """Distance from u to the nearest pole of phi (lattice 2mK + inK')."""
    u = np.asarray(u, dtype=np.complex128)
    w, _ = _reduce_im(u, Kp)
    re = w.real - twoK * np.rint(w.real / twoK)
    return np.hypot(re, w.imag)


def sn_pole_dist(u, twoK, Kp):
    """Distance from u to the nearest pole of sn/cn/dn (iK' mod (2K, 2iK'))."""
    u = np.asarray(u, dtype=np.complex128)
    d = u - 1j * Kp
    re = d.real - twoK * np.rint(d.real / twoK)
    im = d.imag - 2 * Kp * np.rint(d.imag / (2 * Kp))
    return np.hypot(re, im)


def residual(roots, z, s, l, twoK, Kp, q):
    roots = np.asarray(roots, dtype=np.complex128)
    dz = roots[:, None] - z[None, :]
    F = (s[None, :] * phi_sum(dz, twoK, Kp, q)).sum(axis=1)
    M = roots.shape[0]
    if M > 1:
        dr = roots[:, None] - roots[None, :]
        np.fill_diagonal(dr, 1.0)
        pr = phi_sum(dr, twoK, Kp, q)
        np.fill_diagonal(pr, 0.0)
        F = F - pr.sum(axis=1)
    return F + 1j * (np.pi * l / twoK)


def jacobian(roots, z, s, twoK, Kp, q):
    roots = np.asarray(roots, dtype=np.complex128)
    M = roots.shape[0]
    dz = roots[:, None] - z[None, :]
    diag = (s[None, :] * phi_sum_deriv(dz, twoK, Kp, q)).sum(axis=1)
    J = np.zeros((M, M), dtype=np.complex128)
    if M > 1:
        dr = roots[:, None] - roots[None, :]
        np.fill_diagonal(dr, 1.0)
        pd = phi_sum_deriv(dr, twoK, Kp, q)
        np.fill_diagonal(pd, 0.0)
        diag = diag - pd.sum(axis=1)
        J[:, :] = pd
    np.fill_diagonal(J, diag)
    return J


def min_guard_dist(roots, z, twoK, Kp):
    """Smallest pole distance over all root-parameter and root-root pairs."""
    roots = np.asarray(roots, dtype=np.complex128)
    dz = roots[:, None] - z[None, :]
    d = phi_pole_dist(dz, twoK, Kp).min()
    M = roots.shape[0]
    if M > 1:
        dr = roots[:, None] - roots[None, :]
        np.fill_diagonal(dr, 1e6)
        d = min(d, phi_pole_dist(dr, twoK, Kp).min())
    return float(d)


def fold(roots, twoK, Kp, margin=0.0):
    """Fold into [0, 2K) x [-K'/2, K'/2]; boundary Im = +-K'/2 kept as is.

    margin > 0 adds fold hysteresis: roots within that distance beyond the
    boundary stay unfolded (used by the Newton iteration so that solutions
    sitting exactly on the boundary can be approached from either side).
    """
    roots = np.asarray(roots, dtype=np.complex128)
    re = roots.real - twoK * np.floor(roots.real / twoK)
    n = np.rint(roots.imag / Kp)
    n[(n != 0) & (np.abs(roots.imag) <= 0.5 * Kp + margin)] = 0.0
    return re + 1j * (roots.imag - Kp * n), bool(np.any(n != 0))


# Newton status codes (shared with the numba twin)
NEWTON_CONVERGED = 0
NEWTON_MAXITER = 1
NEWTON_STALLED = 2
NEWTON_POLE_BLOCKED = 3

# hysteresis for mid-iteration quasi-period folding (see kernels_numba)
FOLD_IM_MARGIN = 1e-9


def newton(roots0, z, s, l, twoK, Kp, q, tol, maxit, guard, patience=None):
    """Damped Newton with step-halving line search on max|F|.

    Returns (roots, fn, status, niter, history).  The iterate is folded back
    into the fundamental rectangle after every accepted step; an imaginary
    fold changes the equations, so the residual is recomputed at the folded
    point (restart semantics).  ``patience`` aborts attempts whose residual
    has not halved for that many iterations while still far from tolerance
    (multi-start throughput knob; None disables).
    """
    if patience is None:
        patience = maxit
    roots, _ = fold(np.asarray(roots0, np.complex128), twoK, Kp,
                    FOLD_IM_MARGIN)
    hist = np.full(maxit + 1, np.nan)
    if min_guard_dist(roots, z, twoK, Kp) < guard:
        return roots, np.inf, NEWTON_POLE_BLOCKED, 0, hist[:1]
    F = residual(roots, z, s, l, twoK, Kp, q)
    fn = np.abs(F).max()
    hist[0] = fn
    fn_mark, it_mark = fn, 0
    for it in range(maxit):
        if fn < tol:
            return roots, fn, NEWTON_CONVERGED, it, hist[: it + 1]
        if it - it_mark >= patience and fn > 1e6 * tol:
            return roots, fn, NEWTON_STALLED, it, hist[: it + 1]
        J = jacobian(roots, z, s, twoK, Kp, q)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return roots, fn, NEWTON_STALLED, it, hist[: it + 1]
        t = 1.0
        accepted = False
        blocked = True
        trial = roots
        Ft = F
        fnt = fn
        while t >= 2.0 ** -20:
            trial = roots + t * step
            if min_guard_dist(trial, z, twoK, Kp) >= guard:
                blocked = False
                Ft = residual(trial, z, s, l, twoK, Kp, q)
                fnt = np.abs(Ft).max()
                if fnt < fn:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            status = NEWTON_POLE_BLOCKED if blocked else NEWTON_STALLED
            return roots, fn, status, it, hist[: it + 1]
        trial, im_folded = fold(trial, twoK, Kp, FOLD_IM_MARGIN)
        if im_folded:
            if min_guard_dist(trial, z, twoK, Kp) < guard:
                return roots, fn, NEWTON_POLE_BLOCKED, it, hist[: it + 1]
            Ft = residual(trial, z, s, l, twoK, Kp, q)
            fnt = np.abs(Ft).max()
        roots, F, fn = trial, Ft, fnt
        hist[it + 1] = fn
        if fn < 0.5 * fn_mark:
            fn_mark, it_mark = fn, it + 1
    status = NEWTON_CONVERGED if fn < tol else NEWTON_MAXITER
    return roots, fn, status, maxit, hist[: maxit + 1]


def newton_batch(starts, z, s, l, twoK, Kp, q, tol, maxit, guard,
                 patience=None):
    """Serial fallback for the batched multi-start interface."""
    starts = np.asarray(starts, np.complex128)
    B, M = starts.shape
    roots_out = np.empty((B, M), np.complex128)
    fn_out = np.empty(B)
    st_out = np.empty(B, np.int64)
    for b in range(B):
        roots, fn, st, _, _ = newton(starts[b], z, s, l, twoK, Kp, q, tol,
                                     maxit, guard, patience)
        roots_out[b] = roots
        fn_out[b] = fn
        st_out[b] = st
    return roots_out, fn_out, st_out
