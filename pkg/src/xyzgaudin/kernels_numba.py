"""Numba @njit kernels: same contracts as kernels_numpy, scalar inner loops.

Array-level entry points mirror the numpy module one for one so the backend
dispatch in ``kernels.py`` can swap them freely.  Hot path: the Bethe
residual/Jacobian and the full damped-Newton iteration run entirely in
nopython mode.
"""

import numpy as np
from numba import njit, prange

SERIES_TOL = 1e-17
SERIES_NMAX = 4000

PI = np.pi

NEWTON_CONVERGED = 0
NEWTON_MAXITER = 1
NEWTON_STALLED = 2
NEWTON_POLE_BLOCKED = 3

# hysteresis for mid-iteration quasi-period folding: solutions may sit
# exactly on Im = +-Kp/2, and restart-folding a hair-crossing iterate would
# wreck convergence toward them
FOLD_IM_MARGIN = 1e-9


@njit(cache=True)
def _phi_sum_scalar(u, twoK, Kp, q):
    n = np.rint(u.imag / Kp)
    w = u - 1j * (Kp * n)
    v = (PI / twoK) * w
    acc = np.cos(v) / np.sin(v)
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P = E
    Q = Einv
    qn = q
    for _ in range(1, SERIES_NMAX):
        term = (4.0 * qn / (1.0 - qn)) * (-0.5j) * (P - Q)
        acc += term
        if abs(term) <= SERIES_TOL * max(abs(acc), 1.0):
            break
        P *= E
        Q *= Einv
        qn *= q
    return (PI / twoK) * acc - 1j * ((2.0 * PI / twoK) * n)


@njit(cache=True)
def _phi_sum_deriv_scalar(u, twoK, Kp, q):
    n = np.rint(u.imag / Kp)
    w = u - 1j * (Kp * n)
    v = (PI / twoK) * w
    sv = np.sin(v)
    acc = -1.0 / (sv * sv)
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P = E
    Q = Einv
    qn = q
    m = 1
    for _ in range(1, SERIES_NMAX):
        term = (8.0 * m * qn / (1.0 - qn)) * 0.5 * (P + Q)
        acc += term
        if abs(term) <= SERIES_TOL * max(abs(acc), 1.0):
            break
        P *= E
        Q *= Einv
        qn *= q
        m += 1
    return (PI / twoK) ** 2 * acc


@njit(cache=True)
def _phi_pair_scalar(u, twoK, Kp, q):
    n = np.rint(u.imag / Kp)
    w = u - 1j * (Kp * n)
    v = (PI / twoK) * w
    a1 = np.cos(v) / np.sin(v)
    a4 = 0.0 + 0.0j
    E = np.exp(2j * v)
    Einv = 1.0 / E
    P = E
    Q = Einv
    qn = q
    q2n = q * q
    for _ in range(1, SERIES_NMAX):
        s2 = (-0.5j) * (P - Q)
        t1 = (4.0 * q2n / (1.0 - q2n)) * s2
        t4 = (4.0 * qn / (1.0 - q2n)) * s2
        a1 += t1
        a4 += t4
        big = max(abs(a1), abs(a4), 1.0)
        if max(abs(t1), abs(t4)) <= SERIES_TOL * big:
            break
        P *= E
        Q *= Einv
        qn *= q
        q2n *= q * q
    scale = PI / twoK
    shift = -1j * (scale * n)
    p1 = scale * a1 + shift
    p4 = scale * a4 + shift
    if int(n) % 2 != 0:
        return p4, p1
    return p1, p4


@njit(cache=True)
def _theta_scalar(v, q):
    F = np.exp(1j * v)
    F2 = F * F
    F2inv = 1.0 / F2
    Po = F
    Qo = 1.0 / F
    Pe = F2
    Qe = F2inv
    qo = q ** 0.25
    qe = q
    t1 = 0.0 + 0.0j
    t2 = 0.0 + 0.0j
    t3 = 1.0 + 0.0j
    t4 = 1.0 + 0.0j
    sgn = 1.0
    for n in range(SERIES_NMAX):
        so = (-0.5j) * (Po - Qo)
        co = 0.5 * (Po + Qo)
        ce = 0.5 * (Pe + Qe)
        t1 += (2.0 * sgn * qo) * so
        t2 += (2.0 * qo) * co
        t3 += (2.0 * qe) * ce
        t4 += (-2.0 * sgn * qe) * ce
        big = max(abs(t3), abs(t4), abs(t2), 1.0)
        if max(abs(qo * so), abs(qe * ce)) <= SERIES_TOL * big:
            break
        qo *= q ** (2 * n + 2)
        qe *= q ** (2 * n + 3)
        Po *= F2
        Qo *= F2inv
        Pe *= F2
        Qe *= F2inv
        sgn = -sgn
    return t1, t2, t3, t4


@njit(cache=True)
def _phi_pole_dist_scalar(u, twoK, Kp):
    n = np.rint(u.imag / Kp)
    wim = u.imag - Kp * n
    wre = u.real - twoK * np.rint(u.real / twoK)
    return np.hypot(wre, wim)


# ---- array wrappers (match kernels_numpy signatures) ----

@njit(cache=True)
def _phi_sum_arr(u, twoK, Kp, q):
    out = np.empty(u.shape, np.complex128)
    uf = u.ravel()
    of = out.ravel()
    for i in range(uf.shape[0]):
        of[i] = _phi_sum_scalar(uf[i], twoK, Kp, q)
    return out


def phi_sum(u, twoK, Kp, q):
    u = np.ascontiguousarray(np.asarray(u, dtype=np.complex128))
    return _phi_sum_arr(u, twoK, Kp, q)


@njit(cache=True)
def _phi_sum_deriv_arr(u, twoK, Kp, q):
    out = np.empty(u.shape, np.complex128)
    uf = u.ravel()
    of = out.ravel()
    for i in range(uf.shape[0]):
        of[i] = _phi_sum_deriv_scalar(uf[i], twoK, Kp, q)
    return out


def phi_sum_deriv(u, twoK, Kp, q):
    u = np.ascontiguousarray(np.asarray(u, dtype=np.complex128))
    return _phi_sum_deriv_arr(u, twoK, Kp, q)


@njit(cache=True)
def _phi_pair_arr(u, twoK, Kp, q):
    p1 = np.empty(u.shape, np.complex128)
    p4 = np.empty(u.shape, np.complex128)
    uf = u.ravel()
    f1 = p1.ravel()
    f4 = p4.ravel()
    for i in range(uf.shape[0]):
        f1[i], f4[i] = _phi_pair_scalar(uf[i], twoK, Kp, q)
    return p1, p4


def phi_pair(u, twoK, Kp, q):
    u = np.ascontiguousarray(np.asarray(u, dtype=np.complex128))
    return _phi_pair_arr(u, twoK, Kp, q)


@njit(cache=True)
def _theta_arr(v, q):
    t1 = np.empty(v.shape, np.complex128)
    t2 = np.empty(v.shape, np.complex128)
    t3 = np.empty(v.shape, np.complex128)
    t4 = np.empty(v.shape, np.complex128)
    vf = v.ravel()
    f1, f2, f3, f4 = t1.ravel(), t2.ravel(), t3.ravel(), t4.ravel()
    for i in range(vf.shape[0]):
        f1[i], f2[i], f3[i], f4[i] = _theta_scalar(vf[i], q)
    return t1, t2, t3, t4


def theta_series(v, q):
    v = np.ascontiguousarray(np.asarray(v, dtype=np.complex128))
    return _theta_arr(v, q)


def jacobi_sncndn(u, twoK, Kp, q):
    u = np.ascontiguousarray(np.asarray(u, dtype=np.complex128))
    v = (np.pi / twoK) * u
    t1, t2, t3, t4 = theta_series(v, q)
    c1, c2, c3, c4 = _theta_scalar(0.0 + 0.0j, q)
    sn = (c3 / c2) * t1 / t4
    cn = (c4 / c2) * t2 / t4
    dn = (c4 / c3) * t3 / t4
    return sn, cn, dn


def theta_constants(q):
    _, c2, c3, c4 = _theta_scalar(0.0 + 0.0j, q)
    return c2.real, c3.real, c4.real


@njit(cache=True)
def _phi_pole_dist_arr(u, twoK, Kp):
    out = np.empty(u.shape, np.float64)
    uf = u.ravel()
    of = out.ravel()
    for i in range(uf.shape[0]):
        of[i] = _phi_pole_dist_scalar(uf[i], twoK, Kp)
    return out


def phi_pole_dist(u, twoK, Kp):
    u = np.ascontiguousarray(np.asarray(u, dtype=np.complex128))
    return _phi_pole_dist_arr(u, twoK, Kp)


def sn_pole_dist(u, twoK, Kp):
    u = np.asarray(u, dtype=np.complex128)
    d = u - 1j * Kp
    re = d.real - twoK * np.rint(d.real / twoK)
    im = d.imag - 2 * Kp * np.rint(d.imag / (2 * Kp))
    return np.hypot(re, im)


@njit(cache=True)
def _residual_kernel(roots, z, s, l, twoK, Kp, q, out):
    M = roots.shape[0]
    N = z.shape[0]
    const = 1j * (PI * l / twoK)
    for a in range(M):
        acc = const
        for j in range(N):
            acc += s[j] * _phi_sum_scalar(roots[a] - z[j], twoK, Kp, q)
        for b in range(M):
            if b != a:
                acc -= _phi_sum_scalar(roots[a] - roots[b], twoK, Kp, q)
        out[a] = acc


def residual(roots, z, s, l, twoK, Kp, q):
    roots = np.ascontiguousarray(roots, dtype=np.complex128)
    out = np.empty(roots.shape[0], np.complex128)
    _residual_kernel(roots, z, s, float(l), twoK, Kp, q, out)
    return out


@njit(cache=True)
def _jacobian_kernel(roots, z, s, twoK, Kp, q, J):
    M = roots.shape[0]
    N = z.shape[0]
    for a in range(M):
        diag = 0.0 + 0.0j
        for j in range(N):
            diag += s[j] * _phi_sum_deriv_scalar(roots[a] - z[j], twoK, Kp, q)
        for b in range(M):
            if b != a:
                pd = _phi_sum_deriv_scalar(roots[a] - roots[b], twoK, Kp, q)
                diag -= pd
                J[a, b] = pd
        J[a, a] = diag


def jacobian(roots, z, s, twoK, Kp, q):
    roots = np.ascontiguousarray(roots, dtype=np.complex128)
    M = roots.shape[0]
    J = np.zeros((M, M), np.complex128)
    _jacobian_kernel(roots, z, s, twoK, Kp, q, J)
    return J


@njit(cache=True)
def _min_guard_kernel(roots, z, twoK, Kp):
    M = roots.shape[0]
    N = z.shape[0]
    d = 1e300
    for a in range(M):
        for j in range(N):
            dd = _phi_pole_dist_scalar(roots[a] - z[j], twoK, Kp)
            if dd < d:
                d = dd
        for b in range(M):
            if b != a:
                dd = _phi_pole_dist_scalar(roots[a] - roots[b], twoK, Kp)
                if dd < d:
                    d = dd
    return d


def min_guard_dist(roots, z, twoK, Kp):
    roots = np.ascontiguousarray(roots, dtype=np.complex128)
    return float(_min_guard_kernel(roots, z, twoK, Kp))


@njit(cache=True)
def _fold_kernel(roots, twoK, Kp, margin=0.0):
    """margin > 0 leaves roots within that distance beyond |Im| = Kp/2 alone
    (hysteresis for iterates hugging the quasi-period boundary)."""
    M = roots.shape[0]
    out = np.empty(M, np.complex128)
    any_im = False
    for a in range(M):
        re = roots[a].real - twoK * np.floor(roots[a].real / twoK)
        im = roots[a].imag
        n = np.rint(im / Kp)
        if n != 0.0 and abs(im) <= 0.5 * Kp + margin:
            n = 0.0
        if n != 0.0:
            any_im = True
        out[a] = re + 1j * (im - Kp * n)
    return out, any_im


def fold(roots, twoK, Kp, margin=0.0):
    roots = np.ascontiguousarray(roots, dtype=np.complex128)
    out, any_im = _fold_kernel(roots, twoK, Kp, margin)
    return out, bool(any_im)


@njit(cache=True)
def _newton_kernel(roots0, z, s, l, twoK, Kp, q, tol, maxit, guard,
                   patience, hist):
    """Core iteration; hist may be length 0 (no recording) or maxit+1.

    patience: abort as stalled when the residual has not halved for that
    many consecutive iterations while still far from the tolerance; pass
    patience >= maxit to disable.
    """
    roots, _ = _fold_kernel(roots0, twoK, Kp, FOLD_IM_MARGIN)
    M = roots.shape[0]
    record = hist.shape[0] > 0
    F = np.empty(M, np.complex128)
    Ft = np.empty(M, np.complex128)
    J = np.zeros((M, M), np.complex128)
    if _min_guard_kernel(roots, z, twoK, Kp) < guard:
        return roots, 1e300, NEWTON_POLE_BLOCKED, 0
    _residual_kernel(roots, z, s, l, twoK, Kp, q, F)
    fn = np.abs(F).max()
    if record:
        hist[0] = fn
    fn_mark = fn
    it_mark = 0
    for it in range(maxit):
        if fn < tol:
            return roots, fn, NEWTON_CONVERGED, it
        if it - it_mark >= patience and fn > 1e6 * tol:
            return roots, fn, NEWTON_STALLED, it
        _jacobian_kernel(roots, z, s, twoK, Kp, q, J)
        step = np.linalg.solve(J, -F)
        t = 1.0
        accepted = False
        blocked = True
        trial = roots
        fnt = fn
        while t >= 2.0 ** -20:
            trial = roots + t * step
            if _min_guard_kernel(trial, z, twoK, Kp) >= guard:
                blocked = False
                _residual_kernel(trial, z, s, l, twoK, Kp, q, Ft)
                fnt = np.abs(Ft).max()
                if fnt < fn:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            st = NEWTON_POLE_BLOCKED if blocked else NEWTON_STALLED
            return roots, fn, st, it
        trial, im_folded = _fold_kernel(trial, twoK, Kp, FOLD_IM_MARGIN)
        if im_folded:
            if _min_guard_kernel(trial, z, twoK, Kp) < guard:
                return roots, fn, NEWTON_POLE_BLOCKED, it
            _residual_kernel(trial, z, s, l, twoK, Kp, q, Ft)
            fnt = np.abs(Ft).max()
        roots = trial
        for a in range(M):
            F[a] = Ft[a]
        fn = fnt
        if record:
            hist[it + 1] = fn
        if fn < 0.5 * fn_mark:
            fn_mark = fn
            it_mark = it + 1
    st = NEWTON_CONVERGED if fn < tol else NEWTON_MAXITER
    return roots, fn, st, maxit


def newton(roots0, z, s, l, twoK, Kp, q, tol, maxit, guard, patience=None):
    roots0 = np.ascontiguousarray(roots0, dtype=np.complex128)
    if patience is None:
        patience = maxit
    hist = np.full(maxit + 1, np.nan)
    roots, fn, st, it = _newton_kernel(
        roots0, z, s, float(l), twoK, Kp, q, tol, maxit, guard, patience,
        hist)
    return roots, float(fn), int(st), int(it), hist[: it + 1]


@njit(cache=True, parallel=True)
def _newton_batch_kernel(starts, z, s, l, twoK, Kp, q, tol, maxit, guard,
                         patience):
    B, M = starts.shape
    roots_out = np.empty((B, M), np.complex128)
    fn_out = np.empty(B, np.float64)
    st_out = np.empty(B, np.int64)
    empty = np.empty(0, np.float64)
    for b in prange(B):
        roots, fn, st, _ = _newton_kernel(
            starts[b].copy(), z, s, l, twoK, Kp, q, tol, maxit, guard,
            patience, empty)
        roots_out[b] = roots
        fn_out[b] = fn
        st_out[b] = st
    return roots_out, fn_out, st_out


def newton_batch(starts, z, s, l, twoK, Kp, q, tol, maxit, guard,
                 patience=None):
    """Independent Newton solves for a (B, M) array of starting points.

    Solves run in parallel; outputs are indexed by starting point, so the
    result is deterministic regardless of thread scheduling.
    """
    starts = np.ascontiguousarray(starts, dtype=np.complex128)
    if patience is None:
        patience = maxit
    return _newton_batch_kernel(starts, z, s, float(l), twoK, Kp, q, tol,
                                maxit, guard, patience)
