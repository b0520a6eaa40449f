"""Spin operator algebra on the dense product basis.

Builds the commuting integrals of motion R_i of the fully anisotropic
(XYZ) Gaudin magnet,

    R_i = sum_{j != i} Jx(z_i - z_j) Sx_i Sx_j + Jy(...) Sy_i Sy_j
                         + Jz(...) Sz_i Sz_j,
    Jx(z) = (1 + k sn^2 z)/sn z,  Jy(z) = (1 - k sn^2 z)/sn z,
    Jz(z) = cn z dn z / sn z,

linear combinations of them, the parity operator with its block
decomposition, and a Hermitian eigensolver used for cross-validation.
Note the couplings carry the modulus k itself, not k^2; the vanishing
commutators [R_i, R_j] pin this convention (see tests).

The basis orders each site's magnetic quantum number descending
(m = s, s-1, ..., -s), so every S^y S^y product is real and all matrices
here are real symmetric.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse.linalg as spla

from .elliptic import EllipticContext, jacobi_elliptic
from .errors import (DomainError, EigensolverError, NonCommutingError,
                     NonHermitianError, SingularCouplingError)

DENSE_DIM_LIMIT = 1024      # full spectrum below, iterative extremes above
MATRIX_DIM_LIMIT = 4096     # hard cap for dense construction
HERMITICITY_TOL = 1e-12
PARITY_COMMUTE_TOL = 1e-10


@dataclass(frozen=True)
class SpinSite:
    """One site: spin magnitude s (2s a positive integer) and parameter z."""
    s: float
    z: float

    def __post_init__(self):
        twos = 2 * self.s
        if twos <= 0 or abs(twos - round(twos)) > 1e-12:
            raise DomainError(f"2s must be a positive integer, got s={self.s}")

    @property
    def dim(self):
        return int(round(2 * self.s)) + 1


@dataclass(frozen=True)
class SpinSystem:
    """Ordered sites plus the elliptic context they share.

    The product dimension may exceed the dense-matrix budget; the cap is
    enforced by the matrix builders, not here, so large systems remain
    usable for root-space work.
    """
    sites: tuple
    ctx: EllipticContext

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        z = self.z
        if len(z) != len(set(z)):
            raise DomainError("inhomogeneity parameters z_i must be distinct")

    @property
    def n_sites(self):
        return len(self.sites)

    @property
    def z(self):
        return np.array([site.z for site in self.sites])

    @property
    def spins(self):
        return np.array([site.s for site in self.sites])

    @property
    def dims(self):
        return [site.dim for site in self.sites]

    @property
    def dim(self):
        return int(np.prod(self.dims))

    @property
    def M(self):
        """Total root count sum(s_i); must be an integer for Bethe work."""
        total = float(self.spins.sum())
        if abs(total - round(total)) > 1e-9:
            raise DomainError(f"sum of spins is {total}, not an integer")
        return int(round(total))


def spin_system(spins, zs, ctx):
    """Convenience constructor from parallel spin/parameter sequences."""
    return SpinSystem(tuple(SpinSite(s, z) for s, z in zip(spins, zs)), ctx)


@dataclass
class OperatorMatrix:
    """Dense operator in the product basis with a verified hermitian flag."""
    dim: int
    entries: np.ndarray
    hermitian: bool = field(default=False)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @staticmethod
    def from_entries(entries):
        entries = np.asarray(entries)
        herm = bool(np.abs(entries - entries.conj().T).max() < HERMITICITY_TOL)
        return OperatorMatrix(dim=entries.shape[0], entries=entries,
                              hermitian=herm)


class SpinMatrices(NamedTuple):
    sx: OperatorMatrix
    sy: OperatorMatrix
    sz: OperatorMatrix
    splus: OperatorMatrix
    sminus: OperatorMatrix


def spin_matrices(s):
    """Standard spin-s matrices (dimension 2s+1, m descending)."""
    site = SpinSite(s, 0.0)
    d = site.dim
    m = s - np.arange(d)
    sz = np.diag(m)
    sp = np.zeros((d, d))
    for i in range(1, d):
        mm = m[i]
        sp[i - 1, i] = np.sqrt(s * (s + 1) - mm * (mm + 1))
    sm = sp.T.copy()
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    return SpinMatrices(*(OperatorMatrix.from_entries(a)
                          for a in (sx, sy, sz, sp, sm)))


def couplings(z, ctx):
    """(Jx, Jy, Jz) at separation z; odd functions of z."""
    z = float(z)
    if not (0.0 < abs(z) < 2 * ctx.K):
        raise DomainError(f"separation must satisfy 0 < |z| < 2K, got {z}")
    sn, cn, dn = jacobi_elliptic(z, ctx)
    sn, cn, dn = sn.real, cn.real, dn.real
    if abs(sn) < 1e-10:
        raise SingularCouplingError(f"sn({z}) vanishes; coupling singular")
    k = ctx.k
    return ((1.0 + k * sn * sn) / sn, (1.0 - k * sn * sn) / sn, cn * dn / sn)


def lift_two_site(a, i, b, j, system):
    """Dense product-basis matrix of (a at site i) * (b at site j)."""
    if i == j:
        raise DomainError("two-site lift requires distinct sites")
    dims = system.dims
    out = np.ones((1, 1))
    for t, d in enumerate(dims):
        if t == i:
            out = np.kron(out, np.asarray(a))
        elif t == j:
            out = np.kron(out, np.asarray(b))
        else:
            out = np.kron(out, np.eye(d))
    return out


def _check_budget(system):
    if system.dim > MATRIX_DIM_LIMIT:
        raise DomainError(
            f"product dimension {system.dim} exceeds the dense budget "
            f"{MATRIX_DIM_LIMIT}")


def build_integral(i, system):
    """The i-th integral of motion R_i as a dense real symmetric matrix."""
    _check_budget(system)
    n = system.n_sites
    if not (0 <= i < n):
        raise DomainError(f"site index {i} out of range")
    z = system.z
    dim = system.dim
    mats = [spin_matrices(s) for s in system.spins]
    R = np.zeros((dim, dim))
    for j in range(n):
        if j == i:
            continue
        jx, jy, jz = couplings(z[i] - z[j], system.ctx)
        # S^y = i*Y with Y real, so Sy_i Sy_j = -Y_i Y_j stays real
        yi = mats[i].sy.entries.imag
        yj = mats[j].sy.entries.imag
        R += jx * lift_two_site(mats[i].sx.entries, i, mats[j].sx.entries, j, system)
        R -= jy * lift_two_site(yi, i, yj, j, system)
        R += jz * lift_two_site(mats[i].sz.entries, i, mats[j].sz.entries, j, system)
    op = OperatorMatrix.from_entries(R)
    if not op.hermitian:
        raise NonHermitianError("constructed integral failed hermiticity check")
    return op


def build_hamiltonian(coeffs, system):
    """Linear combination sum_i c_i R_i from (site_index, c_i) pairs."""
    _check_budget(system)
    H = np.zeros((system.dim, system.dim))
    for i, c in coeffs:
        if c != 0.0:
            H += c * build_integral(i, system).entries
    return OperatorMatrix.from_entries(H)


def pair_couplings(coeffs, system, per="unordered"):
    """Pair exchange couplings of H = sum_i c_i R_i.

    Collecting S_i^a S_j^a for an unordered pair {i,j} gives the coefficient
    (c_i - c_j) J^a(z_i - z_j).  With per="ordered" the value is halved,
    matching the convention in which H is written as a sum over ordered site
    pairs and each bond is counted twice.
    """
    if per not in ("unordered", "ordered"):
        raise DomainError(f"per must be 'unordered' or 'ordered', got {per!r}")
    factor = 1.0 if per == "unordered" else 0.5
    c = np.zeros(system.n_sites)
    for i, ci in coeffs:
        c[i] = ci
    z = system.z
    out = {}
    for i in range(system.n_sites):
        for j in range(i + 1, system.n_sites):
            if c[i] == c[j]:
                out[(i, j)] = (0.0, 0.0, 0.0)
                continue
            jx, jy, jz = couplings(z[i] - z[j], system.ctx)
            w = factor * (c[i] - c[j])
            out[(i, j)] = (w * jx, w * jy, w * jz)
    return out


def parity_vector(system):
    """Parity (+-1) of each product-basis state.

    The basis digit at a site is s - m, so the state parity is
    (-1)^{sum_i (s_i - m_i)}; the fully stretched state |s_1 ... s_N> gets +1.
    """
    par = np.zeros(1, dtype=np.int64)
    for d in system.dims:
        par = (par[:, None] + np.arange(d)[None, :]) % 2
        par = par.ravel()
    return 1 - 2 * par


def parity_operator(system):
    """The parity operator, diagonal in the product basis."""
    return OperatorMatrix.from_entries(np.diag(parity_vector(system).astype(float)))


@dataclass
class ParityBlocks:
    even_indices: np.ndarray
    odd_indices: np.ndarray
    even_block: OperatorMatrix
    odd_block: OperatorMatrix


def parity_split(op, system):
    """Split a parity-commuting operator into its even/odd sector blocks."""
    A = np.asarray(op.entries if isinstance(op, OperatorMatrix) else op)
    par = parity_vector(system)
    even = np.where(par == 1)[0]
    odd = np.where(par == -1)[0]
    cross = max(np.abs(A[np.ix_(even, odd)]).max(initial=0.0),
                np.abs(A[np.ix_(odd, even)]).max(initial=0.0))
    comm_norm = 2.0 * cross
    if comm_norm > PARITY_COMMUTE_TOL:
        raise NonCommutingError(
            f"operator does not commute with parity; max|[A,P]| = {comm_norm:.3e}",
            commutator_norm=comm_norm)
    return ParityBlocks(
        even_indices=even, odd_indices=odd,
        even_block=OperatorMatrix.from_entries(A[np.ix_(even, even)]),
        odd_block=OperatorMatrix.from_entries(A[np.ix_(odd, odd)]))


def eigensolve(op, n_lowest=6, vectors=False):
    """Sorted real spectrum of a Hermitian operator.

    Full dense spectrum up to dimension 1024; above that (up to 4096) the
    n_lowest extreme eigenvalues come from an iterative Lanczos solver.
    """
    if not isinstance(op, OperatorMatrix):
        op = OperatorMatrix.from_entries(op)
    if not op.hermitian:
        raise NonHermitianError("eigensolve requires a verified Hermitian operator")
    A = op.entries
    if op.dim <= DENSE_DIM_LIMIT:
        if vectors:
            vals, vecs = np.linalg.eigh(A)
            return vals, vecs
        return np.linalg.eigvalsh(A)
    if op.dim > MATRIX_DIM_LIMIT:
        raise DomainError(f"dimension {op.dim} beyond solver budget")
    k = min(n_lowest, op.dim - 2)
    try:
        out = spla.eigsh(A, k=k, which="SA", return_eigenvectors=vectors)
    except spla.ArpackNoConvergence as exc:
        raise EigensolverError(
            f"Lanczos failed to converge: {exc}",
            residual=getattr(exc, "eigenvalues", None)) from exc
    if vectors:
        vals, vecs = out
        order = np.argsort(vals)
        return vals[order], vecs[:, order]
    return np.sort(out)
