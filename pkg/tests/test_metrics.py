"""Entanglement and error-rate figures of merit, checked against closed forms."""
import dataclasses

import numpy as np
import pytest

from qdcascade.metrics import (
    MatrixValidationError,
    concurrence,
    entanglement_report,
    qber,
    spin_flip_spectrum,
    stark_shifts,
)

HH = np.array([1.0, 0.0, 0.0, 0.0])
HV = np.array([0.0, 1.0, 0.0, 0.0])
VH = np.array([0.0, 0.0, 1.0, 0.0])
VV = np.array([0.0, 0.0, 0.0, 1.0])


def pure(ket):
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())

PHI_P = pure(HH + VV)
PHI_M = pure(HH - VV)
PSI_P = pure(HV + VH)
PSI_M = pure(HV - VH)
MIXED = np.eye(4) / 4.0


def werner(p):
    return p * PHI_P + (1.0 - p) * MIXED


def test_concurrence_oracle_states():
    assert np.abs(concurrence(PHI_P) - 1.0) < 1e-12
    assert np.abs(concurrence(PSI_M) - 1.0) < 1e-12
    assert concurrence(MIXED) == 0.0
    assert concurrence(pure(HH)) == 0.0
    assert np.abs(concurrence(werner(0.5)) - 0.25) < 1e-12
    assert concurrence(werner(1.0 / 3.0)) < 1e-12  # separability edge


def test_concurrence_on_bell_diagonal_states():
    # closed form: max(0, 2 max_i lambda_i - 1)
    rng = np.random.default_rng(21)
    bells = [PHI_P, PHI_M, PSI_P, PSI_M]
    for _ in range(25):
        lam = rng.dirichlet(np.ones(4))
        rho = sum(l * b for l, b in zip(lam, bells))
        want = max(0.0, 2.0 * lam.max() - 1.0)
        assert np.abs(concurrence(rho) - want) < 1e-10


def test_concurrence_on_random_x_states():
    # closed form 2 max(0, |g| - sqrt(b c), |w| - sqrt(a d))
    rng = np.random.default_rng(22)
    for _ in range(25):
        a, b, c, d = rng.dirichlet(np.ones(4))
        g = rng.uniform(0, np.sqrt(a * d)) * np.exp(2j * np.pi * rng.uniform())
        w = rng.uniform(0, np.sqrt(b * c)) * np.exp(2j * np.pi * rng.uniform())
        rho = np.diag([a, b, c, d]).astype(complex)
        rho[0, 3], rho[3, 0] = g, np.conj(g)
        rho[1, 2], rho[2, 1] = w, np.conj(w)
        want = 2.0 * max(0.0, abs(g) - np.sqrt(b * c), abs(w) - np.sqrt(a * d))
        assert np.abs(concurrence(rho) - want) < 1e-10


def test_concurrence_local_unitary_invariance():
    rng = np.random.default_rng(23)
    rho = werner(0.7)
    for _ in range(5):
        u1, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        u2, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        u = np.kron(u1, u2)
        assert np.abs(concurrence(u @ rho @ u.conj().T)
                      - concurrence(rho)) < 1e-10


def test_spin_flip_spectrum_order():
    lam = spin_flip_spectrum(PHI_P)
    assert np.allclose(lam, [1.0, 0.0, 0.0, 0.0], atol=1e-12)
    lam = spin_flip_spectrum(werner(0.5))
    assert np.all(np.diff(lam) <= 1e-15)
    assert np.all(lam >= 0.0)


def test_qber_oracle_states():
    assert np.abs(qber(PHI_P)) < 1e-12
    assert np.abs(qber(PSI_M) - 1.0) < 1e-12
    assert np.abs(qber(PSI_P) - 0.5) < 1e-12
    assert np.abs(qber(MIXED) - 0.5) < 1e-12
    assert np.abs(qber(pure(HH)) - 0.25) < 1e-12
    dd = np.kron([1, 1], [1, 1]) / 2.0
    assert np.abs(qber(pure(dd)) - 0.25) < 1e-12
    assert np.abs(qber(werner(0.5)) - 0.25) < 1e-12


def test_qber_on_random_x_states():
    # closed form (b + c)/2 + (1 - 2 Re g - 2 Re w)/4
    rng = np.random.default_rng(24)
    for _ in range(25):
        a, b, c, d = rng.dirichlet(np.ones(4))
        g = rng.uniform(0, np.sqrt(a * d)) * np.exp(2j * np.pi * rng.uniform())
        w = rng.uniform(0, np.sqrt(b * c)) * np.exp(2j * np.pi * rng.uniform())
        rho = np.diag([a, b, c, d]).astype(complex)
        rho[0, 3], rho[3, 0] = g, np.conj(g)
        rho[1, 2], rho[2, 1] = w, np.conj(w)
        want = 0.5 * (b + c) + 0.25 * (1.0 - 2.0 * g.real - 2.0 * w.real)
        assert np.abs(qber(rho) - want) < 1e-12


def test_validation_rejects_malformed_input():
    with pytest.raises(MatrixValidationError, match="4x4"):
        concurrence(np.eye(3) / 3.0)
    bad = PHI_P.copy()
    bad[0, 1] = 0.3
    with pytest.raises(MatrixValidationError, match="Hermitian"):
        concurrence(bad)
    with pytest.raises(MatrixValidationError, match="normalized"):
        concurrence(2.0 * PHI_P)
    neg = 1.01 * PHI_P - 0.01 * MIXED
    with pytest.raises(MatrixValidationError, match="negative"):
        concurrence(neg)


def test_validation_tolerates_numerical_noise():
    rho = PHI_P + np.diag([1e-10, -1e-10, 0.0, 0.0])
    assert np.abs(concurrence(rho) - 1.0) < 1e-8
    assert np.abs(qber(rho)) < 1e-8


def test_entanglement_report_bundle():
    rep = entanglement_report(werner(0.8))
    assert np.abs(rep.concurrence - 0.7) < 1e-12
    assert np.abs(rep.qber - 0.1) < 1e-12
    assert np.abs(rep.gamma_coherence - 0.4) < 1e-12
    assert rep.pair_coherence_abs == abs(rep.gamma_coherence)
    assert rep.peres_entangled is True
    assert len(rep.spin_flip_eigenvalues) == 4
    assert rep.min_eigenvalue > 0.0


def test_peres_criterion_boundary():
    assert entanglement_report(werner(0.5)).peres_entangled is True
    assert entanglement_report(werner(0.2)).peres_entangled is False
    assert entanglement_report(pure(HH)).peres_entangled is False
    assert entanglement_report(MIXED).peres_entangled is False


def test_stark_shifts_frozen(defaults):
    b4 = 0.9120867525783238
    rep = stark_shifts(defaults, b4, 1.0, 1.0)
    assert np.abs(rep.shift_H_mev - 0.007411492721777) < 1e-12
    assert np.abs(rep.shift_V_mev - 0.007548742586995) < 1e-12
    assert np.abs(rep.splitting_mev - 0.000137249865218) < 1e-12
    # the lower-lying polarization is shifted harder
    assert rep.shift_V_mev > rep.shift_H_mev


def test_stark_shifts_scale_linearly_in_photon_number(defaults):
    rep0 = stark_shifts(defaults, 0.9, 0.0, 0.0)
    assert rep0.shift_H_mev == 0.0 and rep0.splitting_mev == 0.0
    r1 = stark_shifts(defaults, 0.9, 1.0, 2.0)
    r2 = stark_shifts(defaults, 0.9, 2.0, 4.0)
    assert np.abs(r2.shift_H_mev - 2.0 * r1.shift_H_mev) < 1e-15
    assert np.abs(r2.shift_V_mev - 2.0 * r1.shift_V_mev) < 1e-15


def test_stark_shifts_carry_franck_condon_squared(defaults):
    bare = stark_shifts(defaults, 1.0, 1.0, 1.0)
    dressed = stark_shifts(defaults, 0.5, 1.0, 1.0)
    assert np.abs(dressed.shift_H_mev - 0.25 * bare.shift_H_mev) < 1e-15


def test_stark_shifts_reject_zero_detuning(defaults):
    broken = dataclasses.replace(defaults, detuning=0.0, delta_fss=0.0)
    with pytest.raises(ZeroDivisionError):
        stark_shifts(broken, 0.9, 1.0, 1.0)
