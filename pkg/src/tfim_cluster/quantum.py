"""Exact diagonalization for the transverse-field Ising chain.

Hamiltonian on n sites (open chain):

    H = -J * sum_x sigma3_x sigma3_{x+1} - h * sum_x sigma1_x,

so a single bond contributes -J (the ordered-pair sum with J/2 collapsed to
unordered bonds).  Basis ordering is the tensor order site 0 ... site n-1,
with the spin-up state (+1 eigenvalue of sigma3) first.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

log = logging.getLogger(__name__)

__all__ = [
    "ChainParams",
    "DensityMatrix",
    "build_hamiltonian",
    "ground_state",
    "spectral_gap",
    "thermal_density",
    "thermal_expectation",
    "reduced_density",
    "von_neumann_entropy",
    "trace_distance",
    "operator_norm",
    "sigma1_total",
    "sigma3_site",
]

_DIM_CAP = 2**22
_DENSE_CUTOFF = 2**11
_EIG_CLIP_TOL = 1e-10

_S1 = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_S3 = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))


@dataclass(frozen=True)
class ChainParams:
    """Chain Lambda_m = {-m, ..., L+m} with observation block {0, ..., L}."""

    m: int
    L: int
    J: float
    h: float

    def __post_init__(self):
        if self.m < 0 or self.L < 0:
            raise ValueError("m and L must be nonnegative")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if 2 ** self.n_sites > _DIM_CAP:
            raise ValueError("Hilbert space dimension exceeds the cap")

    @property
    def n_sites(self):
        return 2 * self.m + self.L + 1

    @property
    def block(self):
        """(start, length) of the observation block within the chain."""
        return self.m, self.L + 1


def _site_op(op, site, n_sites):
    mats = [sp.identity(2, format="csr")] * n_sites
    mats[site] = op
    out = mats[0]
    for mat in mats[1:]:
        out = sp.kron(out, mat, format="csr")
    return out


def sigma1_total(n_sites):
    return sum(_site_op(_S1, x, n_sites) for x in range(n_sites))


def sigma3_site(site, n_sites):
    return _site_op(_S3, site, n_sites)


def build_hamiltonian(n_sites, J, h):
    """Sparse CSR Hamiltonian of the open chain."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    if 2**n_sites > _DIM_CAP:
        raise ValueError("Hilbert space dimension exceeds the cap")
    H = (-h) * sigma1_total(n_sites)
    for x in range(n_sites - 1):
        H = H - J * (sigma3_site(x, n_sites) @ sigma3_site(x + 1, n_sites))
    return H.tocsr()


def ground_state(H):
    """(energy, vector) of the lowest eigenstate; sign-fixed so the largest
    amplitude is positive.  Warns if the spectral gap is numerically tiny."""
    dim = H.shape[0]
    if dim <= _DENSE_CUTOFF:
        w, V = np.linalg.eigh(H.toarray() if sp.issparse(H) else H)
        e0, e1 = w[0], w[1] if dim > 1 else np.inf
        v = V[:, 0]
    else:
        w, V = eigsh(H, k=2, which="SA")
        order = np.argsort(w)
        e0, e1 = w[order[0]], w[order[1]]
        v = V[:, order[0]]
    if e1 - e0 < 1e-10:
        warnings.warn("near-degenerate ground state; gap below 1e-10")
    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        v = -v
    return float(e0), v


def spectral_gap(H):
    """Difference between the two lowest eigenvalues."""
    dim = H.shape[0]
    if dim <= _DENSE_CUTOFF:
        w = np.linalg.eigvalsh(H.toarray() if sp.issparse(H) else H)
        return float(w[1] - w[0]) if dim > 1 else math.inf
    w = eigsh(H, k=2, which="SA", return_eigenvectors=False)
    w = np.sort(w)
    return float(w[1] - w[0])


def thermal_density(H, beta):
    """Dense Gibbs state exp(-beta H)/Z (spectrum shifted for stability)."""
    Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
    w, V = np.linalg.eigh(Hd)
    weights = np.exp(-beta * (w - w[0]))
    weights /= weights.sum()
    return (V * weights) @ V.T


def thermal_expectation(H, beta, A):
    """tr(A exp(-beta H)) / tr(exp(-beta H))."""
    rho = thermal_density(H, beta)
    Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
    return float(np.trace(Ad @ rho).real)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD unit-trace operator with its sorted spectrum."""

    matrix: np.ndarray
    eigenvalues: np.ndarray

    @classmethod
    def from_matrix(cls, rho):
        rho = np.asarray(rho)
        if not np.allclose(rho, rho.conj().T, atol=1e-10):
            raise ValueError("density matrix must be Hermitian")
        rho = 0.5 * (rho + rho.conj().T)
        w = np.linalg.eigvalsh(rho)
        if w.min() < -_EIG_CLIP_TOL or abs(w.sum() - 1.0) > 1e-8:
            raise ValueError("density matrix must be PSD with unit trace")
        if w.min() < 0:
            log.debug("clipping tiny negative eigenvalues (min %.3e)", w.min())
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
        return cls(matrix=rho, eigenvalues=np.sort(w)[::-1])


def reduced_density(state, n_sites, block_start, block_len):
    """Partial trace onto a contiguous block of sites.

    `state` is either a pure-state vector of length 2**n_sites or a full
    density matrix of that dimension.
    """
    if block_len < 1 or block_start < 0 or block_start + block_len > n_sites:
        raise ValueError("block must be a nonempty sub-interval of the chain")
    dl = 2 ** block_start
    db = 2 ** block_len
    dr = 2 ** (n_sites - block_start - block_len)
    state = np.asarray(state)
    if state.ndim == 1:
        psi = state.reshape(dl, db, dr)
        rho = np.einsum("abc,adc->bd", psi, psi.conj())
    else:
        full = state.reshape(dl, db, dr, dl, db, dr)
        rho = np.einsum("abcadc->bd", full)
    return DensityMatrix.from_matrix(rho)


def von_neumann_entropy(rho):
    """Entropy -sum alpha log alpha in nats."""
    w = rho.eigenvalues if isinstance(rho, DensityMatrix) else np.linalg.eigvalsh(rho)
    w = np.clip(w, 0.0, None)
    nz = w[w > 1e-300]
    return float(-(nz * np.log(nz)).sum())


def trace_distance(rho, sigma):
    """(1/2) * trace norm of the difference."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    sv = np.linalg.svd(a - b, compute_uv=False)
    return float(0.5 * sv.sum())


def operator_norm(A):
    a = A.matrix if isinstance(A, DensityMatrix) else np.asarray(A)
    if sp.issparse(a):
        a = a.toarray()
    sv = np.linalg.svd(a, compute_uv=False)
    return float(sv[0]) if sv.size else 0.0
