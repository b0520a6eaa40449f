"""Bethe system: residuals at published roots, Jacobian against finite
differences, Newton behavior, folding, eigenvalue assembly, enumeration."""

import warnings

import numpy as np
import pytest
from conftest import TABLE_L0, TABLE_L1, THREE_SPIN_COEFFS

from xyzgaudin import bethe, elliptic, spinops
from xyzgaudin.errors import (DomainError, IncompleteEnumerationWarning,
                              PoleCollisionError)

GS_ROOTS = np.array([0.277673, 0.261164 + 0.115827j, 0.261164 - 0.115827j])
L1_ROW1 = [0.239016 + 1.0782578237498216j,
           0.280492 + 0.0487235j, 0.280492 - 0.0487235j]


def test_rootset_validation():
    with pytest.raises(DomainError):
        bethe.RootSet(2, [0.1])
    rs = bethe.RootSet(0, [0.1 + 0.2j])
    assert rs.M == 1


def test_residual_at_published_roots(three_spin):
    # limited by the 6-digit published roots; the Jacobian norm near these
    # roots is ~1.5e2, so half-ulp root rounding allows residuals up to
    # ~2e-4 (the measured value, 1.3e-4, matches an independent evaluation)
    F = bethe.residual(bethe.RootSet(0, GS_ROOTS), three_spin)
    assert np.abs(F).max() < 2e-4
    F1 = bethe.residual(bethe.RootSet(1, L1_ROW1), three_spin)
    assert np.abs(F1).max() < 5e-5


def test_residual_nonzero_for_generic_roots(three_spin):
    rs = bethe.RootSet(0, [0.5 + 0.3j, 1.2 - 0.4j, 2.5 + 0.1j])
    assert np.abs(bethe.residual(rs, three_spin)).max() > 0.1


def test_conjugated_solution_still_solves(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS), three_spin)
    assert sol.converged
    F = bethe.residual(bethe.RootSet(0, np.conj(sol.roots)), three_spin)
    assert np.abs(F).max() < 1e-10


def test_jacobian_vs_finite_difference(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS), three_spin)
    rs = sol.rootset
    J = bethe.jacobian(rs, three_spin)
    h = 1e-6
    for b in range(3):
        e = np.zeros(3, complex)
        e[b] = h
        Fp = bethe.residual(bethe.RootSet(0, rs.roots + e), three_spin)
        Fm = bethe.residual(bethe.RootSet(0, rs.roots - e), three_spin)
        assert np.abs((Fp - Fm) / (2 * h) - J[:, b]).max() < 1e-6


def test_jacobian_offdiagonal_symmetry(three_spin):
    rs = bethe.RootSet(0, [0.5 + 0.3j, 1.2 - 0.4j, 2.5 + 0.1j])
    J = bethe.jacobian(rs, three_spin)
    for a in range(3):
        for b in range(a + 1, 3):
            assert J[a, b] == pytest.approx(J[b, a], rel=1e-12)


def test_jacobian_single_root(ctx05):
    system = spinops.spin_system([0.5, 0.5], [0.0, 0.3], ctx05)
    rs = bethe.RootSet(0, [0.6 + 0.2j])
    J = bethe.jacobian(rs, system)
    expected = sum(s * elliptic.phi_sum_derivative(rs.roots[0] - z, ctx05)
                   for s, z in zip(system.spins, system.z))
    assert J[0, 0] == pytest.approx(expected, rel=1e-12)


def test_newton_reconverges_from_perturbation(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS + 1e-3), three_spin)
    assert sol.converged
    assert sol.residual_norm < 1e-11
    assert np.abs(np.sort_complex(sol.roots)
                  - np.sort_complex(GS_ROOTS)).max() < 1e-3
    exact = bethe.newton_solve(bethe.RootSet(0, sol.roots), three_spin)
    assert np.abs(np.sort_complex(exact.roots)
                  - np.sort_complex(sol.roots)).max() < 1e-8


def test_newton_zero_iterations_at_fixed_point(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS), three_spin)
    again = bethe.newton_solve(bethe.RootSet(0, sol.roots), three_spin)
    assert again.converged
    assert len(again.residual_history) == 1     # already below tolerance


def test_newton_quadratic_tail(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS + 3e-2), three_spin)
    assert sol.converged
    h = sol.residual_history
    assert len(h) >= 3
    # quadratic contraction over the last steps (allow floor effects)
    assert h[-1] <= max(10 * h[-2] ** 2 / h[-3], 1e-13)


def test_newton_pole_collision(three_spin):
    start = np.array([0.2 + 1e-9j, 0.5, 1.5])    # on top of z_2
    with pytest.raises(PoleCollisionError):
        bethe.newton_solve(bethe.RootSet(0, start), three_spin)


def test_newton_root_count_check(three_spin):
    with pytest.raises(DomainError):
        bethe.newton_solve(bethe.RootSet(0, [0.5, 0.7]), three_spin)


def test_fold_fundamental(ctx05):
    K2, Kp = 2 * ctx05.K, ctx05.Kprime
    rs = bethe.RootSet(0, [K2 + 0.3, 0.4 + 1j * Kp / 2, 0.7 - 0.1j,
                           0.9 + 1j * 0.9 * Kp])
    folded, flags = bethe.fold_fundamental(rs, ctx05)
    assert folded.roots[0] == pytest.approx(0.3, rel=1e-12)
    assert folded.roots[1] == pytest.approx(0.4 + 1j * Kp / 2)   # boundary kept
    assert folded.roots[2] == pytest.approx(0.7 - 0.1j)
    assert folded.roots[3] == pytest.approx(0.9 - 1j * 0.1 * Kp, abs=1e-12)
    assert list(flags) == [False, False, False, True]


def test_eigenvalues_three_spin_tables(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS), three_spin)
    E = bethe.solution_energy(THREE_SPIN_COEFFS, sol)
    assert E == pytest.approx(-8.13147, abs=1e-4)
    sol1 = bethe.newton_solve(bethe.RootSet(1, L1_ROW1), three_spin)
    assert sol1.converged
    E1 = bethe.solution_energy(THREE_SPIN_COEFFS, sol1)
    assert E1 == pytest.approx(-5.86850, abs=1e-4)


def test_eigenvalues_empty_rootset(three_spin):
    rs = bethe.RootSet(0, np.empty(0, complex))
    r = bethe.eigenvalues(rs, three_spin)
    z, s = three_spin.z, three_spin.spins
    for i in range(3):
        expected = s[i] * sum(
            s[j] * elliptic.phi_sum(z[i] - z[j], three_spin.ctx)
            for j in range(3) if j != i)
        assert r[i] == pytest.approx(expected.real, rel=1e-10)


def test_solution_energy_zero_coeffs(three_spin):
    sol = bethe.newton_solve(bethe.RootSet(0, GS_ROOTS), three_spin)
    assert bethe.solution_energy([(0, 0.0), (1, 0.0), (2, 0.0)], sol) == 0.0


def test_physical_eigenvalues_real(three_spin_solutions):
    sols, _ = three_spin_solutions
    for l in (0, 1):
        for sol in sols[l]:
            assert not np.iscomplexobj(sol.r)


def test_enumeration_counts_and_energies(three_spin_solutions):
    sols, _ = three_spin_solutions
    for l, table in ((0, TABLE_L0), (1, TABLE_L1)):
        assert len(sols[l]) == 12
        energies = np.sort([bethe.solution_energy(THREE_SPIN_COEFFS, s)
                            for s in sols[l]])
        assert np.abs(energies - table).max() < 1e-4


def test_enumeration_matches_ed(three_spin_solutions, three_spin_ed):
    sols, _ = three_spin_solutions
    for l in (0, 1):
        energies = np.sort([bethe.solution_energy(THREE_SPIN_COEFFS, s)
                            for s in sols[l]])
        assert np.abs(energies - three_spin_ed[l]).max() < 1e-8


def test_root_reality_classes(three_spin_solutions, ctx05):
    sols, _ = three_spin_solutions
    for l in (0, 1):
        for sol in sols[l]:
            assert bethe.is_conjugation_closed(sol.roots, ctx05)


def test_l1_boundary_root_balance(three_spin_solutions, ctx05):
    # each odd-sector solution compensates the sector constant with exactly
    # one net root on Im = +K'/2 (pairs at +-K'/2 are conjugate partners)
    sols, _ = three_spin_solutions
    half = ctx05.Kprime / 2
    for sol in sols[1]:
        plus = int(np.sum(np.abs(sol.roots.imag - half) < 1e-6))
        minus = int(np.sum(np.abs(sol.roots.imag + half) < 1e-6))
        assert plus - minus == 1
        assert plus >= 1
    for sol in sols[0]:
        plus = int(np.sum(np.abs(sol.roots.imag - half) < 1e-6))
        minus = int(np.sum(np.abs(sol.roots.imag + half) < 1e-6))
        assert plus == minus


def test_two_spin_sector_counts(ctx05):
    # M = 1: solutions per sector equal the parity block dimensions, and the
    # energies match the 4-dimensional diagonalization
    system = spinops.spin_system([0.5, 0.5], [0.0, 0.3], ctx05)
    H = spinops.build_hamiltonian([(0, -1.0)], system)
    blocks = spinops.parity_split(H, system)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for l in (0, 1):
            sols = bethe.enumerate_solutions(system, l, budget=4000, seed=0)
            par = bethe.sector_parity(system, l)
            block = blocks.even_block if par == 1 else blocks.odd_block
            assert len(sols) == block.dim == 2
            energies = np.sort([bethe.solution_energy([(0, -1.0)], s)
                                for s in sols])
            assert np.abs(energies - spinops.eigensolve(block)).max() < 1e-9


def test_dedup_identifies_equivalent_sets(ctx05):
    half = ctx05.Kprime / 2
    roots = np.array([0.286691, 0.726263 + 1j * half, 3.15855 - 1j * half])
    fa = bethe.canonical_forms(roots, ctx05)
    fb = bethe.canonical_forms(np.conj(roots), ctx05)
    assert bethe.same_solution(fa, fb)
    other = np.array([0.0481756, 0.825910 - 1j * half, 3.29741 + 1j * half])
    fc = bethe.canonical_forms(other, ctx05)
    assert not bethe.same_solution(fa, fc)


def test_enumeration_budget_warning(three_spin):
    with pytest.warns(IncompleteEnumerationWarning) as rec:
        sols = bethe.enumerate_solutions(three_spin, 0, budget=4, seed=0,
                                         batch_size=4)
    assert rec[0].message.expected == 12
    assert rec[0].message.found == len(sols) < 12


def test_sector_parity_rule(three_spin, ctx05):
    assert bethe.sector_parity(three_spin, 0) == -1     # M = 3
    assert bethe.sector_parity(three_spin, 1) == 1
    sys2 = spinops.spin_system([0.5, 0.5], [0.0, 0.3], ctx05)
    assert bethe.sector_parity(sys2, 0) == -1           # M = 1
    sys4 = spinops.spin_system([0.5] * 4, [0.0, 0.2, 0.45, 0.7], ctx05)
    assert bethe.sector_parity(sys4, 0) == 1            # M = 2
