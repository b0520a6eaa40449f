"""Bethe system of the XYZ Gaudin magnet: residuals, analytic Jacobian,
damped Newton iteration, fundamental-rectangle folding, eigenvalue assembly
and exhaustive enumeration for small systems.

The M coupled equations for the roots lambda_a in parity sector l are

    F_a = sum_j s_j phi(lambda_a - z_j)
          - sum_{b != a} phi(lambda_a - lambda_b) + i pi l / (2K) = 0,

with phi = phi1 + phi4, and the integral-of-motion eigenvalues follow as

    r_i = s_i [ sum_{j != i} s_j phi(z_i - z_j)
                - sum_a phi(z_i - lambda_a) + i pi l / (2K) ].

Physical roots live in the fundamental rectangle [0, 2K) x [-K'/2, K'/2].
Shifting one root by the full imaginary quasi-period changes every equation
by iC, so folding in the imaginary direction is treated as a restart (the
residual is recomputed at the folded point), never as an invariance.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kernels
from .elliptic import GUARD_RADIUS  # noqa: F401  (re-exported for callers)
from .errors import (DomainError, IncompleteEnumerationWarning,
                     PoleCollisionError)
from .spinops import parity_vector

DEDUP_TOL = 1e-6
BOUNDARY_TOL = 1e-6
PHYSICAL_IMAG_TOL = 1e-8


@dataclass(frozen=True)
class RootSet:
    """Parity sector l in {0, 1} plus the ordered M complex roots."""
    l: int
    roots: np.ndarray

    def __post_init__(self):
        if self.l not in (0, 1):
            raise DomainError(f"sector l must be 0 or 1, got {self.l}")
        object.__setattr__(self, "roots",
                           np.atleast_1d(np.asarray(self.roots, np.complex128)))

    @property
    def M(self):
        return len(self.roots)


@dataclass
class BetheSolution:
    rootset: RootSet
    residual_norm: float
    r: np.ndarray
    converged: bool
    residual_history: np.ndarray = field(default=None, repr=False)

    @property
    def roots(self):
        return self.rootset.roots


def _sys_arrays(system):
    return (np.ascontiguousarray(system.z, np.float64),
            np.ascontiguousarray(system.spins, np.float64),
            system.ctx.two_K, system.ctx.Kprime, system.ctx.q)


def _check_root_guards(roots, system):
    """Raise PoleCollisionError naming the offending pair if guards violated."""
    z, _, twoK, Kp, _ = _sys_arrays(system)
    dz = roots[:, None] - z[None, :]
    d = kernels.phi_pole_dist(dz, twoK, Kp)
    if d.min() < GUARD_RADIUS:
        a, j = np.unravel_index(np.argmin(d), d.shape)
        raise PoleCollisionError(
            f"root {a} within guard radius of parameter z_{j}")
    M = len(roots)
    if M > 1:
        dr = roots[:, None] - roots[None, :]
        np.fill_diagonal(dr, 1e6)
        d = kernels.phi_pole_dist(dr, twoK, Kp)
        if d.min() < GUARD_RADIUS:
            a, b = np.unravel_index(np.argmin(d), d.shape)
            raise PoleCollisionError(
                f"roots {a} and {b} within guard radius of each other")


def residual(rootset, system):
    """Residual vector of the M Bethe equations."""
    z, s, twoK, Kp, q = _sys_arrays(system)
    roots = rootset.roots
    _check_root_guards(roots, system)
    return kernels.residual(roots, z, s, rootset.l, twoK, Kp, q)


def jacobian(rootset, system):
    """Analytic M x M Jacobian dF_a/dlambda_b via phi'."""
    z, s, twoK, Kp, q = _sys_arrays(system)
    roots = rootset.roots
    _check_root_guards(roots, system)
    return kernels.jacobian(roots, z, s, twoK, Kp, q)


def fold_fundamental(rootset, ctx):
    """Fold roots into [0, 2K) x [-K'/2, K'/2].

    Returns (folded rootset, per-root imaginary-fold flags).  Real folding
    uses the exact 2K period; an imaginary fold alters the equations by iC
    per affected term, which is why the flags exist -- callers re-solve from
    the folded point instead of assuming invariance.  Points exactly on
    Im = +-K'/2 stay where they are.
    """
    roots = rootset.roots
    twoK, Kp = ctx.two_K, ctx.Kprime
    re = roots.real - twoK * np.floor(roots.real / twoK)
    n = np.rint(roots.imag / Kp)
    folded = re + 1j * (roots.imag - Kp * n)
    return RootSet(rootset.l, folded), n != 0


def eigenvalues(rootset, system):
    """Integral-of-motion eigenvalues r_i from a converged root set.

    Imaginary parts below 1e-8 are truncated so physical solutions come back
    real; larger imaginary parts are returned as-is (unphysical root sets).
    """
    z, s, twoK, Kp, q = _sys_arrays(system)
    roots = rootset.roots
    n = len(z)
    diffs = z[:, None] - z[None, :]
    np.fill_diagonal(diffs, 1.0)
    pz = kernels.phi_sum(diffs.astype(np.complex128), twoK, Kp, q)
    np.fill_diagonal(pz, 0.0)
    r = (s[None, :] * pz).sum(axis=1).astype(np.complex128)
    if len(roots):
        dl = z[:, None].astype(np.complex128) - roots[None, :]
        r -= kernels.phi_sum(dl, twoK, Kp, q).sum(axis=1)
    r += 1j * (np.pi * rootset.l / twoK)
    r *= s
    if np.abs(r.imag).max() < PHYSICAL_IMAG_TOL:
        return r.real
    return r


def solution_energy(coeffs, solution):
    """Energy sum_i c_i r_i of a converged solution."""
    r = np.real(solution.r)
    out = 0.0
    for i, c in coeffs:
        out += c * r[i]
    return float(out)


def newton_solve(initial, system, tol=1e-11, max_iter=200, guard=GUARD_RADIUS,
                 patience=None):
    """Damped Newton with step-halving line search on max|F|.

    Never raises on slow convergence (converged=False after the iteration
    cap); raises PoleCollisionError only when every damped step down to the
    2^-20 floor is blocked by a pole guard.  ``patience`` (optional) bails
    out early on stagnating iterations, for multi-start throughput.
    """
    if isinstance(initial, RootSet):
        l, roots0 = initial.l, initial.roots
    else:
        raise DomainError("initial must be a RootSet")
    expected = system.M
    if len(roots0) != expected:
        raise DomainError(
            f"root count {len(roots0)} does not match M = {expected}")
    z, s, twoK, Kp, q = _sys_arrays(system)
    roots, fn, status, _, hist = kernels.newton(
        roots0, z, s, l, twoK, Kp, q, tol, max_iter, guard, patience)
    if status == kernels.NEWTON_POLE_BLOCKED:
        raise PoleCollisionError(
            "Newton step could not avoid a pole even at minimal damping")
    rootset = RootSet(l, roots)
    converged = status == kernels.NEWTON_CONVERGED
    r = eigenvalues(rootset, system) if converged else np.full(
        system.n_sites, np.nan)
    return BetheSolution(rootset=rootset, residual_norm=float(fn), r=r,
                         converged=converged, residual_history=hist)


# ---------------------------------------------------------------------------
# enumeration machinery
# ---------------------------------------------------------------------------

def canonical_forms(roots, ctx, tol=BOUNDARY_TOL):
    """Two canonical sorted forms of a root multiset: as-is and conjugated.

    Roots on the quasi-period boundary Im = +-K'/2 are mapped to +K'/2 first;
    a boundary root shifted by the full quasi-period represents the same
    eigenstate (the eigenvalues are invariant), so this identifies the
    conjugate-equivalent sets the source tables list once.
    """
    twoK, Kp = ctx.two_K, ctx.Kprime
    out = []
    for rr in (roots, np.conj(roots)):
        rr, _ = kernels.fold(rr, twoK, Kp)
        rr = rr.copy()
        at_boundary = np.abs(np.abs(rr.imag) - Kp / 2) < tol
        rr[at_boundary] = rr[at_boundary].real + 1j * (Kp / 2)
        order = np.lexsort((rr.imag, rr.real))
        out.append(rr[order])
    return out


def _assignment_match(a, b, tol):
    if len(a) != len(b):
        return False
    d = np.abs(a[:, None] - b[None, :])
    ri, ci = linear_sum_assignment(d)
    return bool(d[ri, ci].max() < tol)


def same_solution(forms_a, forms_b, tol=DEDUP_TOL):
    """Whether two canonical-form pairs describe the same root multiset."""
    return any(_assignment_match(a, b, tol) for a in forms_a for b in forms_b)


def is_conjugation_closed(roots, ctx, tol=DEDUP_TOL):
    """Physicality filter: the root multiset equals its conjugate image
    modulo boundary refolds (the root-reality classes of the model)."""
    fa, fb = canonical_forms(roots, ctx)
    return _assignment_match(fa, fb, tol)


_SEED_MODE_WEIGHTS = (0.15, 0.15, 0.10, 0.12, 0.10, 0.28, 0.10)


def _seed_roots(rng, M, z, ctx):
    """One structured random starting point (several strategies mixed;
    boundary-heavy seeds get extra weight since those basins are smallest)."""
    twoK, Kp2 = ctx.two_K, ctx.Kprime / 2

    def rand_re():
        u = rng.random()
        if u < 0.5:
            return rng.uniform(0.02, twoK - 0.02)
        if u < 0.8:
            return float(rng.choice(z)) + rng.uniform(0.02, 0.35)
        return twoK - rng.uniform(0.02, 0.45)

    mode = int(rng.choice(7, p=_SEED_MODE_WEIGHTS))
    roots = []
    if mode == 0:
        roots = [rand_re() + 1j * rng.uniform(-Kp2, Kp2) for _ in range(M)]
    elif mode == 1:
        left = M
        while left >= 2:
            x, y = rand_re(), rng.uniform(0.02, Kp2)
            roots += [x + 1j * y, x - 1j * y]
            left -= 2
        if left:
            roots.append(rand_re() + 0j)
    elif mode == 2:
        roots = [rand_re() + 1j * Kp2] + [rand_re() + 0j for _ in range(M - 1)]
    elif mode == 3 and M >= 2:
        roots = ([rand_re() + 1j * Kp2, rand_re() - 1j * Kp2]
                 + [rand_re() + 0j for _ in range(M - 2)])
    elif mode == 4:
        roots = [rand_re() + 1j * Kp2]
        left = M - 1
        while left >= 2:
            x, y = rand_re(), rng.uniform(0.02, Kp2)
            roots += [x + 1j * y, x - 1j * y]
            left -= 2
        if left:
            roots.append(rand_re() + 0j)
    elif mode == 5:
        nb = int(rng.integers(1, M + 1))
        roots = [rand_re() + 1j * Kp2 * rng.choice([-1.0, 1.0])
                 for _ in range(nb)]
        roots += [rand_re() + 0j for _ in range(M - nb)]
    else:
        roots = [rand_re() + 0j for _ in range(M)]
    return np.asarray(roots, np.complex128)


def _mutations(roots, rng, ctx):
    """Derived seeds from a found solution; these reach small basins that
    plain random starts miss (boundary-sign flips especially)."""
    twoK, Kp = ctx.two_K, ctx.Kprime
    out = []
    for i in range(len(roots)):
        if abs(abs(roots[i].imag) - Kp / 2) < BOUNDARY_TOL:
            rr = roots.copy()
            rr[i] = rr[i].real - 1j * rr[i].imag
            out.append(rr)
    out.append(twoK - np.conj(roots))
    out.append(roots + rng.normal(0, 0.05, len(roots))
               + 1j * rng.normal(0, 0.05, len(roots)))
    return out


def sector_parity(system, l):
    """Parity eigenvalue of the block sector l maps to: (-1)^(M+l).

    Each Bethe root acts as one lowering from the stretched reference state
    (parity +1), so the l=0 solutions carry parity (-1)^M and l=1 flips the
    sign; verified against block diagonalization for several spin mixtures.
    """
    return 1 if (system.M + l) % 2 == 0 else -1


def expected_solution_count(system, l):
    """Dimension of the parity block the sector maps to."""
    par = parity_vector(system)
    return int(np.sum(par == sector_parity(system, l)))


def _accept_candidate(roots, fn, system, l, forms, found):
    """Shared reducer step: physicality filters plus dedup insert."""
    ctx = system.ctx
    rootset = RootSet(l, kernels.fold(roots, ctx.two_K, ctx.Kprime)[0])
    r = eigenvalues(rootset, system)
    if np.iscomplexobj(r):
        return None
    if not is_conjugation_closed(rootset.roots, ctx):
        return None
    f = canonical_forms(rootset.roots, ctx)
    if any(same_solution(f, g) for g in forms):
        return None
    forms.append(f)
    sol = BetheSolution(rootset=rootset, residual_norm=float(fn), r=r,
                        converged=True)
    found.append(sol)
    return sol


def enumerate_solutions(system, l, budget=120000, seed=0, target=None,
                        newton_iters=40, batch_size=512):
    """Multi-start enumeration of all physical solutions in one sector.

    Structured random seeds plus a mutation queue of already-found solutions
    run through the batched Newton kernel (attempts are independent, so they
    may execute in parallel; collection stays a serialized, deterministic
    reducer over batch order).  Candidates must converge, produce real
    eigenvalues, and pass the conjugation-closure physicality filter.  Stops
    at the expected parity-block count (or ``target``); warns when the
    budget runs out first.
    """
    M = system.M
    z, s, twoK, Kp, q = _sys_arrays(system)
    ctx = system.ctx
    if target is None:
        target = expected_solution_count(system, l)
    rng = np.random.default_rng(seed)
    found = []
    forms = []
    pending = []
    attempts = 0
    while attempts < budget and len(found) < target:
        n_batch = min(batch_size, budget - attempts)
        starts = np.empty((n_batch, M), np.complex128)
        for i in range(n_batch):
            cand = pending.pop() if pending else _seed_roots(rng, M, z, ctx)
            for _ in range(4):      # resample ill-conditioned starts
                if kernels.min_guard_dist(cand, z, twoK, Kp) >= 1e-4:
                    break
                cand = _seed_roots(rng, M, z, ctx)
            starts[i] = cand
        attempts += n_batch
        roots_b, fn_b, st_b = kernels.newton_batch(
            starts, z, s, l, twoK, Kp, q, 1e-11, newton_iters, GUARD_RADIUS,
            patience=8)
        for i in range(n_batch):
            if st_b[i] != kernels.NEWTON_CONVERGED:
                continue
            sol = _accept_candidate(roots_b[i], fn_b[i], system, l, forms,
                                    found)
            if sol is not None:
                pending.extend(_mutations(sol.roots, rng, ctx))
                if len(found) >= target:
                    break
    if len(found) < target:
        warnings.warn(IncompleteEnumerationWarning(
            f"found {len(found)} of {target} expected solutions "
            f"in {attempts} attempts", found=len(found), expected=target))
    return found
