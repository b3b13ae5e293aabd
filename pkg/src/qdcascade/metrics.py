"""Entanglement and key-rate figures of merit for the photon-pair matrix.

All functions take the 4x4 pair matrix in the (HH, HV, VH, VV) basis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .params import HBAR_MEV_PS, PhysicalParams

EIG_CLIP = -1e-9     # eigenvalues above this are numerical noise, clipped
EIG_ERROR = -1e-6    # below this the matrix is rejected
TRACE_TOL = 1e-8
HERM_TOL = 1e-8

# spin flip in the linear-polarization basis
_FLIP = np.array([[0, 0, 0, -1],
                  [0, 0, 1, 0],
                  [0, 1, 0, 0],
                  [-1, 0, 0, 0]], dtype=float)

_DIAG_KET = np.array([1.0, 1.0]) / np.sqrt(2.0)     # D = (H+V)/sqrt(2)
_ANTI_KET = np.array([1.0, -1.0]) / np.sqrt(2.0)    # A = (H-V)/sqrt(2)


class MatrixValidationError(ValueError):
    pass


def _check_pair_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise MatrixValidationError(f"expected a 4x4 matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > HERM_TOL:
        raise MatrixValidationError("pair matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise MatrixValidationError("pair matrix is not normalized")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < EIG_ERROR:
        raise MatrixValidationError(
            f"pair matrix has negative eigenvalue {eigs.min():.3e}")
    return rho


def spin_flip_spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of rho (flip rho* flip), sorted descending.

    The product is not Hermitian, so a general solver is used; imaginary
    residue above 1e-9 triggers a warning, small negatives are clipped.
    """
    rho = _check_pair_matrix(rho)
    flipped = _FLIP @ rho.conj() @ _FLIP
    lam = np.linalg.eigvals(rho @ flipped)
    if np.abs(lam.imag).max() > 1e-9:
        warnings.warn(f"spin-flip spectrum has imaginary residue "
                      f"{np.abs(lam.imag).max():.3e}", RuntimeWarning,
                      stacklevel=2)
    lam = lam.real
    if lam.min() < EIG_ERROR:
        raise MatrixValidationError(
            f"spin-flip spectrum has negative eigenvalue {lam.min():.3e}")
    lam = np.clip(lam, 0.0, None)
    return np.sort(lam)[::-1]


def concurrence(rho: np.ndarray) -> float:
    """Two-qubit concurrence of the pair matrix."""
    lam = np.sqrt(spin_flip_spectrum(rho))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def qber(rho: np.ndarray) -> float:
    """Intrinsic qubit error rate of an entanglement-based key exchange:
    mean error probability of the rectilinear and diagonal bases."""
    rho = _check_pair_matrix(rho)
    p_hv = rho[1, 1].real
    p_vh = rho[2, 2].real
    da = np.kron(_DIAG_KET, _ANTI_KET)
    ad = np.kron(_ANTI_KET, _DIAG_KET)
    p_da = float(np.real(da @ rho @ da))
    p_ad = float(np.real(ad @ rho @ ad))
    return 0.5 * (p_hv + p_vh + p_da + p_ad)


def _partial_transpose(rho: np.ndarray) -> np.ndarray:
    blocks = rho.reshape(2, 2, 2, 2)
    return blocks.transpose(0, 3, 2, 1).reshape(4, 4)


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    qber: float
    spin_flip_eigenvalues: tuple[float, float, float, float]  # descending
    gamma_coherence: complex      # HH-VV element
    pair_coherence_abs: float
    peres_entangled: bool
    min_eigenvalue: float


def entanglement_report(rho: np.ndarray) -> EntanglementReport:
    rho = _check_pair_matrix(rho)
    pt_min = float(np.linalg.eigvalsh(_partial_transpose(rho)).min())
    gamma = complex(rho[0, 3])
    lam = spin_flip_spectrum(rho)
    sq = np.sqrt(lam)
    return EntanglementReport(
        concurrence=float(max(0.0, sq[0] - sq[1] - sq[2] - sq[3])),
        qber=qber(rho),
        spin_flip_eigenvalues=tuple(float(x) for x in lam),
        gamma_coherence=gamma,
        pair_coherence_abs=abs(gamma),
        peres_entangled=pt_min < EIG_CLIP,
        min_eigenvalue=float(np.linalg.eigvalsh(rho).min()))


@dataclass(frozen=True)
class StarkReport:
    """Photon-number-dependent dispersive shifts of the two transitions."""

    shift_H_mev: float
    shift_V_mev: float
    splitting_mev: float
    n_H: float
    n_V: float


def stark_shifts(params: PhysicalParams, b_avg: float,
                 n_H: float, n_V: float) -> StarkReport:
    """Dispersive transition shifts 2 n (B g)^2 / detuning, reported in meV.

    The detunings are the laser-frame offsets of the two exciton levels;
    the dot-cavity coupling is scaled by the Franck-Condon factor.
    """
    if abs(params.delta_H) < 1e-12 or abs(params.delta_V) < 1e-12:
        raise ZeroDivisionError("dispersive shift diverges at zero detuning")
    g_eff_sq = (b_avg * params.g) ** 2
    shift_h = 2.0 * n_H * g_eff_sq / params.delta_H
    shift_v = 2.0 * n_V * g_eff_sq / params.delta_V
    return StarkReport(
        shift_H_mev=shift_h * HBAR_MEV_PS,
        shift_V_mev=shift_v * HBAR_MEV_PS,
        splitting_mev=abs(shift_h - shift_v) * HBAR_MEV_PS,
        n_H=float(n_H), n_V=float(n_V))
