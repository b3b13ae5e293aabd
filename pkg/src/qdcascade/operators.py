"""Operators on the four-level dot x two polarized cavity modes.

Basis ordering is (dot level, n_H, n_V) row-major with dot levels
G=0, H=1, V=2, B=3, so the full dimension is 4*(n_max+1)^2.  Operators
are built sparse (CSR); density matrices stay dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

G, H, V, B = 0, 1, 2, 3
QD_LEVELS = {"G": G, "H": H, "V": V, "B": B}
QD_DIM = 4


@dataclass(frozen=True)
class HilbertLayout:
    """Index bookkeeping for the composite Hilbert space."""

    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ValueError("n_max must be an integer >= 1")

    @property
    def fock_dim(self) -> int:
        return self.n_max + 1

    @property
    def qd_dim(self) -> int:
        return QD_DIM

    @property
    def total_dim(self) -> int:
        return QD_DIM * self.fock_dim ** 2

    def index(self, qd: int, n_h: int, n_v: int) -> int:
        f = self.fock_dim
        if not (0 <= qd < QD_DIM and 0 <= n_h < f and 0 <= n_v < f):
            raise IndexError(f"state ({qd}, {n_h}, {n_v}) outside layout")
        return (qd * f + n_h) * f + n_v

    def unindex(self, i: int) -> tuple[int, int, int]:
        f = self.fock_dim
        if not 0 <= i < self.total_dim:
            raise IndexError(f"index {i} outside dimension {self.total_dim}")
        qd, rem = divmod(i, f * f)
        n_h, n_v = divmod(rem, f)
        return qd, n_h, n_v


def _destroy(fock_dim: int) -> sp.csr_matrix:
    data = np.sqrt(np.arange(1, fock_dim, dtype=float))
    return sp.diags(data, offsets=1, shape=(fock_dim, fock_dim),
                    dtype=complex).tocsr()


def _qd_transition(ket: int, bra: int) -> sp.csr_matrix:
    m = sp.lil_matrix((QD_DIM, QD_DIM), dtype=complex)
    m[ket, bra] = 1.0
    return m.tocsr()


def embed_qd(layout: HilbertLayout, m) -> sp.csr_matrix:
    eye_f = sp.identity(layout.fock_dim, dtype=complex, format="csr")
    return sp.kron(sp.kron(m, eye_f), eye_f, format="csr")


def embed_fock_h(layout: HilbertLayout, m) -> sp.csr_matrix:
    eye_q = sp.identity(QD_DIM, dtype=complex, format="csr")
    eye_f = sp.identity(layout.fock_dim, dtype=complex, format="csr")
    return sp.kron(sp.kron(eye_q, m), eye_f, format="csr")


def embed_fock_v(layout: HilbertLayout, m) -> sp.csr_matrix:
    eye_q = sp.identity(QD_DIM, dtype=complex, format="csr")
    eye_f = sp.identity(layout.fock_dim, dtype=complex, format="csr")
    return sp.kron(sp.kron(eye_q, eye_f), m, format="csr")


@dataclass(frozen=True)
class OperatorSet:
    """Elementary operators embedded in the full space.

    sigma_H1 = |H><B|, sigma_H2 = |G><H| and the V analogues; a_H/a_V are
    the mode annihilators; proj maps level names to projectors.
    """

    layout: HilbertLayout
    a_H: sp.csr_matrix
    a_V: sp.csr_matrix
    sigma_H1: sp.csr_matrix
    sigma_H2: sp.csr_matrix
    sigma_V1: sp.csr_matrix
    sigma_V2: sp.csr_matrix
    proj: dict
    identity: sp.csr_matrix

    @property
    def number_H(self) -> sp.csr_matrix:
        return (self.a_H.conj().T @ self.a_H).tocsr()

    @property
    def number_V(self) -> sp.csr_matrix:
        return (self.a_V.conj().T @ self.a_V).tocsr()


def build_elementary_ops(layout: HilbertLayout) -> OperatorSet:
    a = _destroy(layout.fock_dim)
    proj = {name: embed_qd(layout, _qd_transition(lvl, lvl))
            for name, lvl in QD_LEVELS.items()}
    return OperatorSet(
        layout=layout,
        a_H=embed_fock_h(layout, a),
        a_V=embed_fock_v(layout, a),
        sigma_H1=embed_qd(layout, _qd_transition(H, B)),
        sigma_H2=embed_qd(layout, _qd_transition(G, H)),
        sigma_V1=embed_qd(layout, _qd_transition(V, B)),
        sigma_V2=embed_qd(layout, _qd_transition(G, V)),
        proj=proj,
        identity=sp.identity(layout.total_dim, dtype=complex, format="csr"),
    )


def dagger(op) -> sp.csr_matrix:
    return sp.csr_matrix(op).conj().T.tocsr()


def expectation(op, rho: np.ndarray) -> complex:
    """Tr(op rho) for a dense density matrix and sparse/dense operator."""
    if op.shape[1] != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: op {op.shape}, rho {rho.shape}")
    if sp.issparse(op):
        return complex((op @ rho).diagonal().sum())
    return complex(np.trace(op @ rho))


def basis_ket(layout: HilbertLayout, qd: int, n_h: int = 0, n_v: int = 0) -> np.ndarray:
    ket = np.zeros(layout.total_dim, dtype=complex)
    ket[layout.index(qd, n_h, n_v)] = 1.0
    return ket


def initial_state(layout: HilbertLayout) -> np.ndarray:
    """Density matrix |G,0,0><G,0,0|."""
    ket = basis_ket(layout, G, 0, 0)
    return np.outer(ket, ket.conj())
