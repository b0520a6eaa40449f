"""Anisotropic central-spin pipeline.

One spin-1/2 at z=0 coupled to N-1 bath spins uniformly spread over [a, b]
with fully anisotropic antiferromagnetic exchange; the Hamiltonian is the
first integral of motion with flipped sign, H = -R_1.  This module builds
the system, evaluates the classical energy and its closed-form N -> infinity
limit, finds the ground-state Bethe roots at small N, continues them to
large N with arc-fit initial guesses, and extrapolates to the thermodynamic
limit with a cubic in 1/N.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import bethe, kernels, spinops
from .elliptic import jacobi_elliptic, make_context
from .errors import (ContinuationError, DomainError, FitDivergenceError,
                     InsufficientPointsError, PoleCollisionError,
                     SeedNotFoundError)

DEFAULT_SCHEDULE = (12, 20, 40, 80, 100, 200, 300)


@dataclass(frozen=True)
class AcsmParams:
    """Spin count N, bath interval [a, b], elliptic modulus k."""
    N: int
    a: float
    b: float
    k: float

    def __post_init__(self):
        if self.N < 3:
            raise DomainError(f"N must be at least 3, got {self.N}")
        if not (0.0 < self.k < 1.0):
            raise DomainError(f"modulus k must lie in (0,1), got {self.k}")
        ctx = make_context(self.k)
        if not (0.0 < self.a < self.b <= ctx.K):
            raise DomainError(
                f"need 0 < a < b <= K = {ctx.K:.6f}, got a={self.a}, b={self.b}")

    def context(self):
        return make_context(self.k)


def bath_grid(params):
    """z_1 = 0 plus N-1 equidistant bath positions from a to b."""
    i = np.arange(2, params.N + 1)
    return np.concatenate(
        [[0.0], params.a + (i - 2) / (params.N - 2) * (params.b - params.a)])


def build_acsm(params, with_hamiltonian=None):
    """(SpinSystem, H = -R_1) for the central-spin chain.

    The dense Hamiltonian is only constructed within the matrix budget
    (N <= 12); above that the second element is None unless explicitly
    requested, in which case the size error propagates.
    """
    ctx = params.context()
    system = spinops.spin_system(np.full(params.N, 0.5), bath_grid(params), ctx)
    if with_hamiltonian is None:
        with_hamiltonian = system.dim <= spinops.MATRIX_DIM_LIMIT
    H = spinops.build_hamiltonian([(0, -1.0)], system) if with_hamiltonian else None
    return system, H


def classical_energy(params):
    """Classical energy per spin of the x-aligned antiferromagnetic state,
    -(1/4N) sum_j Jx(z_j)."""
    ctx = params.context()
    zj = bath_grid(params)[1:]
    total = sum(spinops.couplings(z, ctx)[0] for z in zj)
    return -total / (4.0 * params.N)


def classical_axis_energy(params, axis):
    """Classical per-spin energy of the antiferromagnetic state aligned with
    one axis; the x choice minimizes since Jx > Jy > Jz on (0, K)."""
    idx = {"x": 0, "y": 1, "z": 2}[axis]
    ctx = params.context()
    zj = bath_grid(params)[1:]
    total = sum(spinops.couplings(z, ctx)[idx] for z in zj)
    return -total / (4.0 * params.N)


def classical_limit(params):
    """Closed form of lim E_cl/N: the bath integral of -Jx/4 with uniform
    density 1/(b-a) has an elementary antiderivative in sn, cn, dn."""
    ctx = params.context()
    a, b, k = params.a, params.b, params.k
    sa, ca, da = (w.real for w in jacobi_elliptic(a, ctx))
    sb, cb, db = (w.real for w in jacobi_elliptic(b, ctx))
    return (1.0 / (4.0 * (a - b))) * math.log(
        (sb * (ca + da) * (db - k * cb)) / (sa * (cb + db) * (da - k * ca)))


# ---------------------------------------------------------------------------
# ground state and continuation
# ---------------------------------------------------------------------------

def split_ground_roots(roots, params):
    """(lambda_1, arc) when the roots show the ground-state topology:
    exactly one real root in (0, a), the rest on a conjugate-symmetric set
    with Re > b.  Returns None otherwise."""
    order = np.argsort(roots.real)
    lam1 = roots[order[0]]
    arc = roots[order[1:]]
    if not (0.0 < lam1.real < params.a and abs(lam1.imag) < 1e-8):
        return None
    if len(arc) and arc.real.min() <= params.b:
        return None
    sa = arc[np.lexsort((arc.imag, arc.real))]
    sc = np.conj(arc)[np.lexsort((-arc.imag, arc.real))]
    if len(arc) and np.abs(sa - sc).max() > 1e-7:
        return None
    return lam1, arc


def ground_state_seed(params, budget=600, seed=0):
    """Multi-start search for the l=0 ground state of a small chain.

    Seeds combine a real root in (0, a) with a near-vertical trial arc to
    the right of b; accepted solutions must show the ground-state root
    topology, and the lowest energy among them is returned.
    """
    if params.N > 16:
        raise DomainError("ground_state_seed is for small systems (N <= 16)")
    if params.N % 2:
        raise DomainError("all-1/2 chains need even N for integer root count")
    system, _ = build_acsm(params, with_hamiltonian=False)
    ctx = system.ctx
    M = system.M
    rng = np.random.default_rng(seed)
    best = None
    agree = 0
    for _ in range(budget):
        lam1 = rng.uniform(0.05 * params.a, 0.95 * params.a)
        span = 2 * ctx.K - params.b
        xc = rng.uniform(params.b + 0.15 * span, 2 * ctx.K - 0.15 * span)
        sy = rng.uniform(0.3, 0.95)
        ys = sy * (ctx.Kprime / 2) * np.linspace(-1.0, 1.0, M - 1)
        start = np.concatenate([[lam1 + 0j], xc + 1j * ys])
        try:
            sol = bethe.newton_solve(bethe.RootSet(0, start), system,
                                     max_iter=60)
        except PoleCollisionError:
            continue
        if not sol.converged:
            continue
        if split_ground_roots(sol.roots, params) is None:
            continue
        energy = -sol.r[0]
        if best is None or energy < best[0] - 1e-9:
            best = (energy, sol)
            agree = 1
        elif abs(energy - best[0]) < 1e-9:
            agree += 1
            if agree >= 3:
                break
    if best is None:
        raise SeedNotFoundError(
            f"no ground-state pattern found in {budget} attempts")
    return best[1]


@dataclass
class ArcFit:
    """Parameters of the arc model x = alpha + beta dn(c1 y) cn(c2 y)."""
    alpha: float
    beta: float
    c1: float
    c2: float
    rms: float

    def __call__(self, y, ctx):
        y = np.asarray(y, float)
        dn = jacobi_elliptic(self.c1 * y + 0j, ctx)[2].real
        cn = jacobi_elliptic(self.c2 * y + 0j, ctx)[1].real
        return self.alpha + self.beta * dn * cn


def arc_fit(solution, params):
    """Least-squares arc model through the non-central ground-state roots,
    treating y = Im(lambda) as the independent variable.

    Gauss-Newton with step halving from alpha = mean, beta = spread,
    c1 = c2 = 1; raises FitDivergenceError when no descent is possible
    (callers fall back to a vertical-line fit).
    """
    ctx = params.context()
    roots = solution.roots
    order = np.argsort(roots.real)
    arc = roots[order[1:]]
    if len(arc) < 4:
        raise InsufficientPointsError("arc fit needs at least 4 arc roots")
    x = arc.real
    y = arc.imag

    def kfun(c):
        sn, cn, dn = jacobi_elliptic(c * y + 0j, ctx)
        return sn.real, cn.real, dn.real

    def model_resid(p):
        al, be, c1, c2 = p
        _, _, dn1 = kfun(c1)
        _, cn2, _ = kfun(c2)
        return x - (al + be * dn1 * cn2)

    def jac(p):
        al, be, c1, c2 = p
        s1, c1n, d1 = kfun(c1)
        s2, c2n, d2 = kfun(c2)
        k2 = ctx.k ** 2
        return np.stack([
            np.ones_like(y),
            d1 * c2n,
            be * (-k2 * s1 * c1n * y) * c2n,
            be * d1 * (-s2 * d2 * y),
        ], axis=1)

    p = np.array([x.mean(),
                  x[np.argmin(np.abs(y))] - x[np.argmax(np.abs(y))],
                  1.0, 1.0])
    r = model_resid(p)
    rms = float(np.sqrt((r * r).mean()))
    for _ in range(200):
        dp, *_ = np.linalg.lstsq(jac(p), r, rcond=None)
        t = 1.0
        while t > 1e-8:
            pt = p + t * dp
            rt = model_resid(pt)
            rmst = float(np.sqrt((rt * rt).mean()))
            if rmst < rms:
                break
            t *= 0.5
        else:
            break
        p, r, rms = pt, rt, rmst
        if np.abs(t * dp).max() < 1e-15:
            break
    if not np.isfinite(rms):
        raise FitDivergenceError("arc fit diverged")
    return ArcFit(alpha=float(p[0]), beta=float(p[1]), c1=float(p[2]),
                  c2=float(p[3]), rms=rms)


def vertical_fit(solution):
    """Fallback arc model: constant real part."""
    roots = solution.roots
    arc = roots[np.argsort(roots.real)][1:]
    rms = float(np.sqrt(((arc.real - arc.real.mean()) ** 2).mean()))
    return ArcFit(alpha=float(arc.real.mean()), beta=0.0, c1=1.0, c2=1.0,
                  rms=rms)


class TracePoint(NamedTuple):
    N: int
    solution: object
    fit: ArcFit
    energy_per_spin: float
    lambda1: float


@dataclass
class ContinuationTrace:
    a: float
    b: float
    k: float
    points: list

    @property
    def last(self):
        return self.points[-1]

    def params_at(self, N):
        return AcsmParams(N=N, a=self.a, b=self.b, k=self.k)


def _trace_point(solution, params):
    split = split_ground_roots(solution.roots, params)
    if split is None:
        raise ContinuationError(
            f"solution at N={params.N} lost the ground-state root topology",
            last_good_n=None)
    lam1, _ = split
    try:
        fit = arc_fit(solution, params)
    except (FitDivergenceError, InsufficientPointsError):
        fit = vertical_fit(solution)
    return TracePoint(N=params.N, solution=solution, fit=fit,
                      energy_per_spin=-solution.r[0] / params.N,
                      lambda1=float(lam1.real))


def start_trace(params, budget=600, seed=0):
    """Seed a continuation trace with the small-N ground state."""
    sol = ground_state_seed(params, budget=budget, seed=seed)
    return ContinuationTrace(a=params.a, b=params.b, k=params.k,
                             points=[_trace_point(sol, params)])


def _quantile_interp(y_old, m_new, Kp):
    """Empirical-quantile resampling of arc imaginary parts, with linear
    tail extrapolation clipped inside the physical strip."""
    y_old = np.sort(np.asarray(y_old, float))
    m_old = len(y_old)
    p_old = (np.arange(m_old) + 0.5) / m_old
    p_new = (np.arange(m_new) + 0.5) / m_new
    y_new = np.interp(p_new, p_old, y_old)
    lo = p_new < p_old[0]
    hi = p_new > p_old[-1]
    slope_lo = (y_old[1] - y_old[0]) / (p_old[1] - p_old[0])
    slope_hi = (y_old[-1] - y_old[-2]) / (p_old[-1] - p_old[-2])
    y_new[lo] = y_old[0] + slope_lo * (p_new[lo] - p_old[0])
    y_new[hi] = y_old[-1] + slope_hi * (p_new[hi] - p_old[-1])
    return np.clip(y_new, -0.49975 * Kp, 0.49975 * Kp)


def _step_once(trace, N_next):
    prev = trace.last
    params_next = trace.params_at(N_next)
    system, _ = build_acsm(params_next, with_hamiltonian=False)
    ctx = system.ctx
    prev_params = trace.params_at(prev.N)
    lam1_prev, arc_prev = split_ground_roots(prev.solution.roots, prev_params)
    m_new = N_next // 2 - 1
    ys = _quantile_interp(arc_prev.imag, m_new, ctx.Kprime)
    xs = prev.fit(ys, ctx)
    start = np.concatenate([[lam1_prev.real * prev.N / N_next + 0j],
                            xs + 1j * ys])
    sol = bethe.newton_solve(bethe.RootSet(0, start), system, max_iter=200)
    if not sol.converged:
        raise ContinuationError(
            f"Newton failed at N={N_next} "
            f"(residual {sol.residual_norm:.2e})", last_good_n=prev.N)
    return _trace_point(sol, params_next)


def _advance(trace, N_next, depth):
    try:
        point = _step_once(trace, N_next)
    except ContinuationError:
        if depth <= 0:
            raise
        half = (N_next - trace.last.N) // 2
        half -= half % 2
        if half <= 0:
            raise
        _advance(trace, trace.last.N + half, depth - 1)
        return _advance(trace, N_next, depth - 1)
    trace.points.append(point)
    return trace


def continuation_step(trace, N_next, max_bisection=3):
    """Extend the trace to N_next; bisects the size jump on failure.

    The initial guess scales lambda_1 by N_prev/N_next and places the new
    arc at quantile-resampled imaginary parts on the previous step's fitted
    curve.  Equal N_next is a no-op; intermediate bisection sizes are used
    as stepping stones only and stripped from the reported trace.
    """
    N_last = trace.last.N
    if N_next == N_last:
        return trace
    if N_next < N_last or N_next % 2:
        raise DomainError(f"N_next must be even and above {N_last}")
    _advance(trace, N_next, max_bisection)
    trace.points = [p for p in trace.points
                    if p.N <= N_last or p.N == N_next]
    return trace


def run_continuation(params, schedule=None, budget=600, seed=0):
    """Seed at schedule[0] (= params.N) and walk the whole schedule."""
    if schedule is None:
        schedule = DEFAULT_SCHEDULE
    schedule = list(schedule)
    if schedule[0] != params.N:
        raise DomainError("schedule must start at params.N")
    trace = start_trace(params, budget=budget, seed=seed)
    for N in schedule[1:]:
        continuation_step(trace, N)
    return trace


@dataclass
class ExtrapolationResult:
    quantity: str
    limit_value: float
    coefficients: np.ndarray
    residual: float


_QUANTITIES = {
    "energy_per_spin": lambda p: p.energy_per_spin,
    "lambda1_n": lambda p: p.lambda1 * p.N,
    "min_re": lambda p: min(np.real(r) for r in _arc_of(p)),
    "max_re": lambda p: max(np.real(r) for r in _arc_of(p)),
}


def _arc_of(point):
    roots = point.solution.roots
    return roots[np.argsort(roots.real)][1:]


def extrapolate(trace, quantity="energy_per_spin"):
    """Cubic-in-1/N least squares; the constant term is the N->inf limit.

    The min/max real-part quantities refer to the arc roots only (the
    central-spin root lambda_1 is excluded).
    """
    if quantity not in _QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}")
    if len(trace.points) < 4:
        raise InsufficientPointsError(
            "extrapolation needs at least 4 trace points")
    fn = _QUANTITIES[quantity]
    x = np.array([1.0 / p.N for p in trace.points])
    yv = np.array([fn(p) for p in trace.points])
    coeffs = np.polyfit(x, yv, 3)
    resid = float(np.abs(np.polyval(coeffs, x) - yv).max())
    return ExtrapolationResult(quantity=quantity,
                               limit_value=float(coeffs[-1]),
                               coefficients=coeffs, residual=resid)


def low_excited_states(params, count=3, budget=60000, seed=0):
    """Bethe solutions for the lowest l=0 states of a small chain, matched
    against block diagonalization (qualitative root-pattern survey).

    Returns (targets, matches): the lowest count+1 even-sector energies and
    a dict target-index -> BetheSolution for every state found in budget.
    """
    system, H = build_acsm(params)
    blocks = spinops.parity_split(H, system)
    block = (blocks.even_block if bethe.sector_parity(system, 0) == 1
             else blocks.odd_block)
    targets = spinops.eigensolve(block, n_lowest=count + 1)[: count + 1]

    ctx = system.ctx
    M = system.M
    z = np.ascontiguousarray(system.z)
    s = np.ascontiguousarray(system.spins)
    rng = np.random.default_rng(seed)
    gs = ground_state_seed(params, seed=seed)
    lam1, arc = split_ground_roots(gs.roots, params)
    matches = {0: gs}
    forms = [bethe.canonical_forms(gs.roots, ctx)]

    def rand_re():
        u = rng.random()
        if u < 0.4:
            return rng.uniform(0.02, 2 * ctx.K - 0.02)
        if u < 0.7:
            return np.median(arc.real) + rng.normal(0, 0.2)
        return rng.uniform(params.b, 2 * ctx.K - 0.05)

    def one_seed():
        start = np.concatenate([[lam1], np.median(arc.real) + 1j * arc.imag])
        mode = int(rng.integers(0, 6))
        if mode == 0:
            i = int(rng.integers(1, M))
            start[i] = (rng.uniform(0.05, 2 * ctx.K - 0.05)
                        + 1j * rng.uniform(-ctx.Kprime / 2, ctx.Kprime / 2))
        elif mode == 1:
            i = int(rng.integers(0, M))
            start[i] = (rng.uniform(0.05, 2 * ctx.K - 0.05)
                        + 1j * ctx.Kprime / 2 * rng.choice([-1.0, 1.0]))
        elif mode == 2:
            start[0] = rng.uniform(0.01, params.a)
            start[int(rng.integers(1, M))] = rng.uniform(params.a, params.b) + 0j
        elif mode == 3:
            start = (rng.uniform(0.02, 2 * ctx.K - 0.02, M)
                     + 1j * rng.uniform(-ctx.Kprime / 2, ctx.Kprime / 2, M))
        else:
            # boundary-heavy: several roots pinned at +-K'/2 (the deepest
            # basins have four of them), remainder real near the arc
            nb = int(rng.integers(2, min(4, M - 1) + 1))
            for slot in range(nb):
                start[1 + slot] = (rand_re()
                                   + 1j * ctx.Kprime / 2 * rng.choice([-1.0, 1.0]))
            for slot in range(nb, M - 1):
                start[1 + slot] = rand_re() + 0j
        return start

    pending = []
    attempts = 0
    batch = 512
    while attempts < budget and len(matches) < count + 1:
        n_batch = min(batch, budget - attempts)
        starts = np.empty((n_batch, M), np.complex128)
        for i in range(n_batch):
            cand = pending.pop() if pending else one_seed()
            for _ in range(4):
                if kernels.min_guard_dist(cand, z, ctx.two_K, ctx.Kprime) >= 1e-4:
                    break
                cand = one_seed()
            starts[i] = cand
        attempts += n_batch
        roots_b, fn_b, st_b = kernels.newton_batch(
            starts, z, s, 0, ctx.two_K, ctx.Kprime, ctx.q, 1e-11, 40,
            bethe.GUARD_RADIUS, patience=8)
        for i in range(n_batch):
            if st_b[i] != kernels.NEWTON_CONVERGED:
                continue
            found = []
            sol = bethe._accept_candidate(roots_b[i], fn_b[i], system, 0,
                                          forms, found)
            if sol is None:
                continue
            pending.extend(bethe._mutations(sol.roots, rng, ctx))
            energy = -sol.r[0]
            for ti, tv in enumerate(targets):
                if ti not in matches and abs(energy - tv) < 1e-6:
                    matches[ti] = sol
                    break
            if len(matches) >= count + 1:
                break
    return targets, matches
