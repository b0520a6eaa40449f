"""Self-contained verification suites: function identities, commutators,
limit reductions, Bethe/ED equivalence, and the spin-cluster degeneration.

Each check returns a dict {name, passed, detail}; ``run_checks`` collects
them into the machine-readable report the CLI emits.  The commutator check
accepts an alternative couplings function so a deliberately wrong modulus
convention can serve as a negative control in tests.
"""

import numpy as np

from . import bethe, spinops
from .elliptic import _phi_sum_raw, jacobi_elliptic, make_context, phi, phi_sum

CHECK_NAMES = ("identities", "quasi_period", "commutators", "parity",
               "limits_trig", "limits_hyper", "bethe_ed_three_spin",
               "cluster_degeneration")


def _sample_rectangle(rng, ctx, n, margin=0.05):
    """Random points in the fundamental rectangle, away from phi poles."""
    out = np.empty(0, complex)
    while len(out) < n:
        u = (rng.uniform(0.0, 2 * ctx.K, 2 * n)
             + 1j * rng.uniform(-ctx.Kprime / 2, ctx.Kprime / 2, 2 * n))
        from . import kernels
        d = kernels.phi_pole_dist(u, ctx.two_K, ctx.Kprime)
        out = np.concatenate([out, u[d > margin]])
    return out[:n]


def check_identities(seed=0, n=1000, k=0.5, tol=1e-10):
    """sn^2+cn^2 = 1, dn^2+k^2 sn^2 = 1, phi1-phi4 = cn dn/sn, and the real
    period phi(u + 2K) = phi(u), each over n random rectangle points."""
    ctx = make_context(k)
    rng = np.random.default_rng(seed)
    u = _sample_rectangle(rng, ctx, n)
    sn, cn, dn = jacobi_elliptic(u, ctx)
    worst = max(
        np.abs(sn ** 2 + cn ** 2 - 1).max(),
        np.abs(dn ** 2 + ctx.k ** 2 * sn ** 2 - 1).max(),
    )
    p1, p4 = phi(u, ctx)
    worst = max(worst, np.abs((p1 - p4) - cn * dn / sn).max())
    worst = max(worst, np.abs(phi_sum(u + 2 * ctx.K, ctx) - phi_sum(u, ctx)).max())
    return {"name": "identities", "passed": bool(worst < tol),
            "detail": f"worst identity deviation {worst:.3e} over {n} points"}


def check_quasi_period(seed=0, n=200, k=0.5, tol=1e-10):
    """Im(phi(u+iK') - phi(u)) is a u-independent constant.

    Evaluated with the raw series (no quasi-period reduction), so the check
    exercises the mathematics instead of the folding code; it also confirms
    the measured context constant C.
    """
    ctx = make_context(k)
    rng = np.random.default_rng(seed)
    u = (rng.uniform(0.1, 2 * ctx.K - 0.1, n)
         + 1j * rng.uniform(-ctx.Kprime / 2, -ctx.Kprime / 8, n))
    d = (_phi_sum_raw(u + 1j * ctx.Kprime, ctx.two_K, ctx.q)
         - _phi_sum_raw(u, ctx.two_K, ctx.q))
    spread = np.abs(d.imag - d.imag[0]).max()
    real_part = np.abs(d.real).max()
    dc = abs(d.imag.mean() - ctx.C)
    worst = max(spread, real_part, dc)
    return {"name": "quasi_period", "passed": bool(worst < tol),
            "detail": f"shift spread {spread:.2e}, Re part {real_part:.2e}, "
                      f"|mean - C| {dc:.2e}"}


def _random_system(rng, ctx, n_sites=4):
    spins = rng.choice([0.5, 1.0], n_sites)
    if (2 * spins.sum()) % 2:          # keep the total root count integral
        spins[0] = 1.0 if spins[0] == 0.5 else 0.5
    z = np.sort(rng.uniform(0.05, ctx.K - 0.05, n_sites))
    while np.diff(z).min() < 0.05:
        z = np.sort(rng.uniform(0.05, ctx.K - 0.05, n_sites))
    return spinops.spin_system(spins, z, ctx)


def _commutator_rel(Ra, Rb):
    c = Ra @ Rb - Rb @ Ra
    return np.abs(c).max() / (np.linalg.norm(Ra, 2) * np.linalg.norm(Rb, 2))


def check_commutators(seed=0, n_random=4, tol=1e-9, couplings_fn=None):
    """max|[R_i, R_j]| < tol * |R_i||R_j| for the three-spin system and for
    random four-site mixed-spin systems.

    This simultaneously pins the coupling convention: with the modulus
    replaced by its square in the couplings the commutators are O(1e-2).
    ``couplings_fn(z, ctx) -> (Jx, Jy, Jz)`` overrides the couplings for
    negative-control tests.
    """
    ctx = make_context(0.5)
    saved = spinops.couplings
    if couplings_fn is not None:
        spinops.couplings = couplings_fn
    try:
        worst = 0.0
        systems = [spinops.spin_system([0.5, 1.0, 1.5], [0.0, 0.2, 0.4], ctx)]
        rng = np.random.default_rng(seed)
        systems += [_random_system(rng, ctx) for _ in range(n_random)]
        for system in systems:
            R = [np.asarray(spinops.build_integral(i, system))
                 for i in range(system.n_sites)]
            for i in range(len(R)):
                for j in range(i + 1, len(R)):
                    worst = max(worst, _commutator_rel(R[i], R[j]))
    finally:
        spinops.couplings = saved
    return {"name": "commutators", "passed": bool(worst < tol),
            "detail": f"worst relative commutator {worst:.3e}"}


def check_parity(seed=0, tol=1e-10):
    """P^2 = 1 and max|[R_i, P]| < tol for three-spin and random systems."""
    ctx = make_context(0.5)
    rng = np.random.default_rng(seed)
    systems = [spinops.spin_system([0.5, 1.0, 1.5], [0.0, 0.2, 0.4], ctx),
               _random_system(rng, ctx)]
    worst = 0.0
    for system in systems:
        P = np.asarray(spinops.parity_operator(system))
        worst = max(worst, np.abs(P @ P - np.eye(system.dim)).max())
        for i in range(system.n_sites):
            R = np.asarray(spinops.build_integral(i, system))
            worst = max(worst, np.abs(R @ P - P @ R).max())
    return {"name": "parity", "passed": bool(worst < tol),
            "detail": f"worst parity commutator {worst:.3e}"}


def _lifted_sum(system, coeff_fn):
    """sum over ordered pairs j != i of axis-wise couplings, for reference
    forms of the integrals; coeff_fn(dz) -> (cx, cy, cz)."""
    n = system.n_sites
    mats = [spinops.spin_matrices(s) for s in system.spins]
    z = system.z
    out = []
    for i in range(n):
        R = np.zeros((system.dim, system.dim))
        for j in range(n):
            if j == i:
                continue
            cx, cy, cz = coeff_fn(z[i] - z[j])
            yi = mats[i].sy.entries.imag
            yj = mats[j].sy.entries.imag
            R += cx * spinops.lift_two_site(mats[i].sx.entries, i,
                                            mats[j].sx.entries, j, system)
            R -= cy * spinops.lift_two_site(yi, i, yj, j, system)
            R += cz * spinops.lift_two_site(mats[i].sz.entries, i,
                                            mats[j].sz.entries, j, system)
        out.append(R)
    return out


def check_limits_trig(tol=1e-5):
    """k -> 0: the integrals reduce to the trigonometric family
    (1/sin)(SxSx + SySy) + cot SzSz, and sn -> sin on the real axis."""
    k = 1e-6
    ctx = make_context(k)
    system = spinops.spin_system([0.5, 1.0, 0.5], [0.1, 0.35, 0.7], ctx)
    ref = _lifted_sum(system, lambda dz: (1 / np.sin(dz), 1 / np.sin(dz),
                                          1 / np.tan(dz)))
    worst = 0.0
    for i in range(system.n_sites):
        R = np.asarray(spinops.build_integral(i, system))
        worst = max(worst, np.abs(R - ref[i]).max())
    u = np.linspace(0.05, 1.45, 40)
    sn = jacobi_elliptic(u + 0j, ctx)[0].real
    worst_sn = np.abs(sn - np.sin(u)).max()
    return {"name": "limits_trig",
            "passed": bool(worst < tol and worst_sn < 1e-5),
            "detail": f"max entry deviation {worst:.3e}, sn-sin {worst_sn:.3e}"}


def check_limits_hyper(tol=1e-4):
    """k -> 1: after the cyclic axis relabeling the integrals match twice
    the standard hyperbolic family with eta_i = 2 z_i.

    The direct k -> 1 limit of the couplings gives Jx -> 2 coth(2dz) and
    Jy = Jz -> 2/sinh(2dz); the conventional hyperbolic normalization is
    half of that, hence the factor 2 here.  sn -> tanh is checked too.
    """
    k = 1.0 - 1e-9
    ctx = make_context(k)
    system = spinops.spin_system([0.5, 0.5, 1.0], [0.1, 0.35, 0.7], ctx)

    def hyper(dz):
        eta = 2.0 * dz
        # original axes: x carries coth, y and z carry 1/sinh
        return (2.0 / np.tanh(eta), 2.0 / np.sinh(eta), 2.0 / np.sinh(eta))

    ref = _lifted_sum(system, hyper)
    worst = 0.0
    for i in range(system.n_sites):
        R = np.asarray(spinops.build_integral(i, system))
        worst = max(worst, np.abs(R - ref[i]).max())
    u = np.linspace(0.05, 1.45, 40)
    sn = jacobi_elliptic(u + 0j, ctx)[0].real
    worst_sn = np.abs(sn - np.tanh(u)).max()
    return {"name": "limits_hyper",
            "passed": bool(worst < tol and worst_sn < 1e-4),
            "detail": f"max entry deviation {worst:.3e}, sn-tanh {worst_sn:.3e}"}


def check_bethe_ed_three_spin(seed=0, budget=120000, tol=1e-8):
    """Complete enumeration of both sectors of the three-spin system matches
    the block spectra of the default Hamiltonian to tol."""
    ctx = make_context(0.5)
    system = spinops.spin_system([0.5, 1.0, 1.5], [0.0, 0.2, 0.4], ctx)
    coeffs = [(0, -1.0), (1, -0.5)]
    H = spinops.build_hamiltonian(coeffs, system)
    blocks = spinops.parity_split(H, system)
    worst = 0.0
    complete = True
    for l in (0, 1):
        block = (blocks.even_block if bethe.sector_parity(system, l) == 1
                 else blocks.odd_block)
        ed = spinops.eigensolve(block)
        sols = bethe.enumerate_solutions(system, l, budget=budget, seed=seed)
        if len(sols) != len(ed):
            complete = False
            continue
        energies = np.sort([bethe.solution_energy(coeffs, s) for s in sols])
        worst = max(worst, np.abs(energies - ed).max())
    return {"name": "bethe_ed_three_spin",
            "passed": bool(complete and worst < tol),
            "detail": (f"max |E_bethe - E_ed| = {worst:.3e}" if complete
                       else "enumeration incomplete")}


_TRIPLET_ISOMETRY = np.array([[1, 0, 0],
                              [0, 1 / np.sqrt(2), 0],
                              [0, 1 / np.sqrt(2), 0],
                              [0, 0, 1]])


def cluster_spectral_error(eps, k=0.5, z0=0.3, z3=0.9):
    """Spectral distance between two spin-1/2 sites at separation eps
    (compressed to their triplet subspace) and a single spin-1 site."""
    ctx = make_context(k)
    pair_sys = spinops.spin_system([0.5, 0.5, 0.5], [z0, z0 + eps, z3], ctx)
    R_cluster = (np.asarray(spinops.build_integral(0, pair_sys))
                 + np.asarray(spinops.build_integral(1, pair_sys)))
    V = np.kron(_TRIPLET_ISOMETRY, np.eye(2))
    compressed = V.T @ R_cluster @ V
    ref_sys = spinops.spin_system([1.0, 0.5], [z0, z3], ctx)
    R_ref = np.asarray(spinops.build_integral(0, ref_sys))
    ev_a = np.linalg.eigvalsh(compressed)
    ev_b = np.linalg.eigvalsh(R_ref)
    return float(np.abs(ev_a - ev_b).max())


def check_cluster_degeneration():
    """Merging two adjacent spin-1/2 sites reproduces one spin-1 site with
    O(eps) spectral error: the errors at eps = 1e-3 and 1e-4 shrink ~10x."""
    e3 = cluster_spectral_error(1e-3)
    e4 = cluster_spectral_error(1e-4)
    ratio = e3 / e4
    passed = 5.0 < ratio < 20.0 and e4 < 1e-3
    return {"name": "cluster_degeneration", "passed": bool(passed),
            "detail": f"err(1e-3)={e3:.3e}, err(1e-4)={e4:.3e}, ratio={ratio:.2f}"}


def run_checks(only=None, seed=0, budget=120000):
    """Run the named suites (all by default); returns the report dict."""
    table = {
        "identities": lambda: check_identities(seed=seed),
        "quasi_period": lambda: check_quasi_period(seed=seed),
        "commutators": lambda: check_commutators(seed=seed),
        "parity": lambda: check_parity(seed=seed),
        "limits_trig": check_limits_trig,
        "limits_hyper": check_limits_hyper,
        "bethe_ed_three_spin": lambda: check_bethe_ed_three_spin(
            seed=seed, budget=budget),
        "cluster_degeneration": check_cluster_degeneration,
    }
    names = CHECK_NAMES if not only else tuple(only)
    unknown = [n for n in names if n not in table]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}; valid: {CHECK_NAMES}")
    checks = [table[n]() for n in names]
    return {"passed": all(c["passed"] for c in checks), "checks": checks}
