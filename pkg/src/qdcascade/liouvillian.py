"""Master-equation generator for the driven cascade in the polaron frame.

The generator splits into a constant part and four pulse-following parts:

    d rho/dt = [ L_const
                 + B Omega(t)        * S_drive      (coherent drive)
                 + Omega(t)^2        * S_omega2     (drive-dressed rates)
                 + Gamma_R(t)        * S_rabi_r     (Rabi-dressed, real)
                 + Gamma_I(t)        * S_rabi_i     (Rabi-dressed, imag) ] rho

with Omega(t) the Gaussian pulse envelope, B the Franck-Condon factor and
Gamma_{R,I}(t) interpolated from the Rabi table.  Dissipators follow the
convention D(a, b) rho = 2 a rho b^+ - a^+ b rho - rho a^+ b; terms whose
printed form is not Hermiticity-preserving on its own are paired with
their Hermitian conjugates, which turns every imaginary rate into an
effective (Lamb-type) Hamiltonian shift.  Cross terms proportional to
g*Omega_H are excluded to preserve the Lindblad form.

Past the gate time the pulse envelope is treated as exactly zero (it has
decayed to ~4e-6 of its peak by then), making the generator strictly
time-independent for t >= t_gate; dynamics and correlation code exploit
this with exponential propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .operators import OperatorSet, HilbertLayout, build_elementary_ops
from .params import PhysicalParams, ValidationError
from .phonon import PhononKernel, rabi_dependent_rates

# ------------------------------------------------------------------
# superoperator helpers, row-major vectorization: vec(A rho B) = (A (x) B^T) vec(rho)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1)


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim)


def spre(a) -> sp.csr_matrix:
    n = a.shape[0]
    return sp.kron(a, sp.identity(n, dtype=complex, format="csr"), format="csr")


def spost(b) -> sp.csr_matrix:
    n = b.shape[0]
    return sp.kron(sp.identity(n, dtype=complex, format="csr"), b.T, format="csr")


def sandwich(a, b) -> sp.csr_matrix:
    """Superoperator of rho -> a rho b."""
    return sp.kron(a, b.T, format="csr")


def ham_super(h) -> sp.csr_matrix:
    """rho -> -i [h, rho]."""
    return (-1j * (spre(h) - spost(h))).tocsr()


def dissipator(a, b=None) -> sp.csr_matrix:
    """rho -> 2 a rho b^+ - a^+ b rho - rho a^+ b  (b defaults to a)."""
    if b is None:
        b = a
    adag_b = (a.conj().T @ b).tocsr()
    return (2.0 * sandwich(a, b.conj().T) - spre(adag_b) - spost(adag_b)).tocsr()


def paired_dissipator(a, b) -> sp.csr_matrix:
    """D(a,b) + D(b,a): the Hermiticity-preserving combination."""
    return (dissipator(a, b) + dissipator(b, a)).tocsr()


# ------------------------------------------------------------------


@dataclass(frozen=True)
class PulseShape:
    """Gaussian drive envelope Omega_H(t) = Omega_H0 exp(-((t-t0)/t_p)^2)."""

    omega_H0: float
    t_p: float
    t_0: float

    def __call__(self, t):
        return self.omega_H0 * np.exp(-(((np.asarray(t, dtype=float) - self.t_0)
                                         / self.t_p) ** 2))

    def area_two_photon(self, detuning: float) -> float:
        """Integral of Omega(t)^2/(2 detuning) dt, the two-photon pulse area."""
        return (self.omega_H0 ** 2 * self.t_p * math.sqrt(math.pi / 2.0)
                / (2.0 * detuning))


@dataclass(frozen=True)
class ModelConfig:
    """Which optional families of phonon terms enter the generator."""

    phonons_enabled: bool = True
    include_lamb_shifts: bool = True
    include_cross_coupling: bool = True
    include_tp_terms: bool = True

    def __post_init__(self):
        if not self.phonons_enabled and (self.include_lamb_shifts
                                         or self.include_cross_coupling
                                         or self.include_tp_terms):
            raise ValidationError(
                "model_config",
                "phonon term toggles require phonons_enabled = true")

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "ModelConfig":
        on = params.phonons_enabled
        return cls(phonons_enabled=on, include_lamb_shifts=on,
                   include_cross_coupling=on, include_tp_terms=on)


# coefficient kinds: how a term's prefactor evolves in time
KIND_HAMILTONIAN = "hamiltonian"  # constant Hermitian part
KIND_CONSTANT = "constant"        # constant dissipator
KIND_DRIVE = "drive"              # x B*Omega(t)
KIND_OMEGA_SQ = "omega_sq"        # x Omega(t)^2
KIND_RABI_R = "rabi_r"            # x Gamma_R(t) from the Rabi table
KIND_RABI_I = "rabi_i"            # x Gamma_I(t) from the Rabi table


@dataclass(frozen=True)
class LiouvillianTerm:
    label: str
    kind: str
    value: float           # scalar prefactor of superop
    superop: sp.csr_matrix


def build_hamiltonian(params: PhysicalParams, ops: OperatorSet,
                      b_avg: float, t: float) -> sp.csr_matrix:
    """System Hamiltonian (angular-frequency units) at time t:
    level splittings plus the Franck-Condon-renormalized couplings."""
    pulse = PulseShape(params.omega_H0, params.t_p, params.t_0)
    h = (params.delta_H * ops.proj["H"] + params.delta_V * ops.proj["V"]).tolil()
    x_cav = (ops.a_H.conj().T @ (ops.sigma_H1 + ops.sigma_H2)
             + ops.a_V.conj().T @ (ops.sigma_V1 + ops.sigma_V2))
    x_drv = 0.5 * (ops.sigma_H1 + ops.sigma_H2)
    x = params.g * x_cav + float(pulse(t)) * x_drv
    h = h.tocsr() + b_avg * (x + x.conj().T)
    return h.tocsr()


def build_liouvillian_terms(params: PhysicalParams, kernel: PhononKernel,
                            ops: OperatorSet,
                            config: ModelConfig | None = None) -> list[LiouvillianTerm]:
    """Every term of the master equation as (label, kind, value, superop)."""
    if config is None:
        config = ModelConfig.from_params(params)
    if config.phonons_enabled != params.phonons_enabled:
        raise ValidationError(
            "model_config", "phonons_enabled disagrees with the parameter set")

    b_avg = kernel.b_avg if config.phonons_enabled else 1.0
    r = kernel.rates
    terms: list[LiouvillianTerm] = []

    a_h, a_v = ops.a_H, ops.a_V
    s_h1, s_h2 = ops.sigma_H1, ops.sigma_H2
    s_v1, s_v2 = ops.sigma_V1, ops.sigma_V2
    p_g, p_h, p_v, p_b = (ops.proj[k] for k in "GHVB")

    # --- coherent part -------------------------------------------------
    h_const = (params.delta_H * p_h + params.delta_V * p_v).tocsr()
    x_cav = (a_h.conj().T @ (s_h1 + s_h2) + a_v.conj().T @ (s_v1 + s_v2))
    h_const = h_const + b_avg * params.g * (x_cav + x_cav.conj().T)
    terms.append(LiouvillianTerm("H_system", KIND_HAMILTONIAN, 1.0,
                                 ham_super(h_const)))

    x_drv = 0.5 * (s_h1 + s_h2)
    terms.append(LiouvillianTerm("H_drive", KIND_DRIVE, 1.0,
                                 ham_super((x_drv + x_drv.conj().T).tocsr())))

    # --- bare dissipators ----------------------------------------------
    terms.append(LiouvillianTerm("cavity_H", KIND_CONSTANT,
                                 params.kappa / 2.0, dissipator(a_h)))
    terms.append(LiouvillianTerm("cavity_V", KIND_CONSTANT,
                                 params.kappa / 2.0, dissipator(a_v)))
    terms.append(LiouvillianTerm("rad_B_H", KIND_CONSTANT,
                                 params.gamma_B / 2.0, dissipator(s_h1)))
    terms.append(LiouvillianTerm("rad_B_V", KIND_CONSTANT,
                                 params.gamma_B / 2.0, dissipator(s_v1)))
    terms.append(LiouvillianTerm("rad_E_H", KIND_CONSTANT,
                                 params.gamma_E / 2.0, dissipator(s_h2)))
    terms.append(LiouvillianTerm("rad_E_V", KIND_CONSTANT,
                                 params.gamma_E / 2.0, dissipator(s_v2)))
    terms.append(LiouvillianTerm("deph_B", KIND_CONSTANT,
                                 params.gamma_B_deph / 2.0, dissipator(p_b)))
    terms.append(LiouvillianTerm("deph_H", KIND_CONSTANT,
                                 params.gamma_E_deph / 2.0, dissipator(p_h)))
    terms.append(LiouvillianTerm("deph_V", KIND_CONSTANT,
                                 params.gamma_E_deph / 2.0, dissipator(p_v)))

    if not config.phonons_enabled:
        return terms

    ah_sh1 = (a_h @ s_h1.conj().T).tocsr()   # a_H sigma_H1^+
    ah_sh2 = (a_h @ s_h2.conj().T).tocsr()
    ahd_sh1 = (a_h.conj().T @ s_h1).tocsr()  # a_H^+ sigma_H1
    ahd_sh2 = (a_h.conj().T @ s_h2).tocsr()
    av_sv1 = (a_v @ s_v1.conj().T).tocsr()
    av_sv2 = (a_v @ s_v2.conj().T).tocsr()
    avd_sv1 = (a_v.conj().T @ s_v1).tocsr()
    avd_sv2 = (a_v.conj().T @ s_v2).tocsr()
    gb = (s_h2 @ s_h1).tocsr()               # |G><B|

    # --- phonon-assisted cavity feeding (constant) ----------------------
    terms.append(LiouvillianTerm(
        "gamma_plus_H", KIND_CONSTANT, r.gamma_plus_H,
        dissipator(ah_sh1) + dissipator(ahd_sh2)))
    terms.append(LiouvillianTerm(
        "gamma_plus_V", KIND_CONSTANT, r.gamma_plus_V,
        dissipator(av_sv1) + dissipator(avd_sv2)))
    terms.append(LiouvillianTerm(
        "gamma_minus_H", KIND_CONSTANT, r.gamma_minus_H,
        dissipator(ah_sh2) + dissipator(ahd_sh1)))
    terms.append(LiouvillianTerm(
        "gamma_minus_V", KIND_CONSTANT, r.gamma_minus_V,
        dissipator(av_sv2) + dissipator(avd_sv1)))

    if config.include_cross_coupling:
        # The two printed cross lines are each other's conjugates but carry
        # Gamma_plus_V and Gamma_plus_H respectively; the mean keeps the
        # pair Hermiticity-preserving at delta_fss != 0 and reduces to the
        # printed form when the two rates coincide.
        g_cross = 0.5 * (r.gamma_plus_H + r.gamma_plus_V)
        terms.append(LiouvillianTerm(
            "gamma_cross_plus", KIND_CONSTANT, g_cross,
            paired_dissipator(ah_sh1, av_sv1) + paired_dissipator(ahd_sh2, avd_sv2)))

    if config.include_tp_terms:
        terms.append(LiouvillianTerm(
            "gamma_tp_H", KIND_CONSTANT, r.gamma_tp_H,
            paired_dissipator(ah_sh2, ahd_sh1)))
        terms.append(LiouvillianTerm(
            "gamma_tp_V", KIND_CONSTANT, r.gamma_tp_V,
            paired_dissipator(av_sv2, avd_sv1)))

    if config.include_lamb_shifts:
        # The two cross-shift commutator lines conjugate each other, so the
        # pair is complete as printed; with unequal H/V rates the Hermitian
        # part survives, which is the mean rate on O + O^+.
        o1 = (ahd_sh1 @ av_sv1).tocsr()   # a_H^+ s_H1 a_V s_V1^+
        o2 = (ah_sh2 @ avd_sv2).tocsr()   # a_H s_H2^+ a_V^+ s_V2
        h_cross = o1 + o1.conj().T + o2 + o2.conj().T
        terms.append(LiouvillianTerm(
            "shift_cross", KIND_HAMILTONIAN,
            0.5 * (r.delta_plus_V + r.delta_plus_H), ham_super(h_cross)))

        # bracketed +i D-_k commutators, doubled by the closing H.c.
        n_h = ops.number_H
        n_v = ops.number_V
        q_h = (n_h @ p_g + (a_h @ a_h.conj().T) @ p_b).tocsr()
        q_v = (n_v @ p_g + (a_v @ a_v.conj().T) @ p_b).tocsr()
        terms.append(LiouvillianTerm(
            "shift_minus_H", KIND_HAMILTONIAN, -2.0 * r.delta_minus_H,
            ham_super(q_h)))
        terms.append(LiouvillianTerm(
            "shift_minus_V", KIND_HAMILTONIAN, -2.0 * r.delta_minus_V,
            ham_super(q_v)))

        # bracketed +i D-_pk two-photon coherence shifts
        r_h = (a_h.conj().T @ a_h.conj().T @ gb).tocsr()
        r_v = (a_v.conj().T @ a_v.conj().T @ gb).tocsr()
        terms.append(LiouvillianTerm(
            "shift_minus_pH", KIND_HAMILTONIAN, -r.delta_minus_pH,
            ham_super(r_h + r_h.conj().T)))
        terms.append(LiouvillianTerm(
            "shift_minus_pV", KIND_HAMILTONIAN, -r.delta_minus_pV,
            ham_super(r_v + r_v.conj().T)))

    # --- drive-dressed terms, coefficient Omega(t)^2 ---------------------
    terms.append(LiouvillianTerm(
        "gamma_plus_omega", KIND_OMEGA_SQ, r.k_plus_omega / 4.0,
        dissipator(s_h1.conj().T) + dissipator(s_h2)))
    terms.append(LiouvillianTerm(
        "gamma_minus_omega", KIND_OMEGA_SQ, r.k_minus_omega / 4.0,
        dissipator(s_h2.conj().T) + dissipator(s_h1)))
    if config.include_tp_terms:
        terms.append(LiouvillianTerm(
            "gamma_tp_omega", KIND_OMEGA_SQ, r.k_tp_omega / 4.0,
            paired_dissipator(s_h1, s_h2.conj().T)))
    if config.include_lamb_shifts:
        # +i D-_Omega on two copies of P_H, doubled by the bracket H.c.
        terms.append(LiouvillianTerm(
            "shift_minus_omega", KIND_OMEGA_SQ, -r.delta_minus_omega_kernel,
            ham_super(p_h)))
        # +i D^p_Omega on |G><B|, plus H.c.
        terms.append(LiouvillianTerm(
            "shift_p_omega", KIND_OMEGA_SQ, -r.delta_p_omega_kernel / 4.0,
            ham_super(gb + gb.conj().T)))

    # --- Rabi-dressed terms ----------------------------------------------
    terms.append(LiouvillianTerm(
        "gamma_R_B", KIND_RABI_R, 1.0,
        2.0 * (dissipator(s_h1) + dissipator(s_h2))
        - paired_dissipator(s_h2.conj().T, s_h1)))
    terms.append(LiouvillianTerm(
        "gamma_I_B", KIND_RABI_I, 1.0,
        2.0 * (sandwich(s_h1, p_b) + sandwich(p_b, s_h1.conj().T)
               - sandwich(s_h2.conj().T, p_g) - sandwich(p_g, s_h2))))

    return terms


@dataclass
class CascadeGenerator:
    """Assembled master-equation generator; rhs acts on vec(rho)."""

    layout: HilbertLayout
    params: PhysicalParams
    kernel: PhononKernel
    config: ModelConfig
    terms: list[LiouvillianTerm]
    pulse: PulseShape
    b_avg: float
    t_off: float  # pulse treated as zero from here on
    L_const: sp.csr_matrix
    S_drive: sp.csr_matrix | None
    S_omega2: sp.csr_matrix | None
    S_rabi_r: sp.csr_matrix | None
    S_rabi_i: sp.csr_matrix | None
    propagator_cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def n_super(self) -> int:
        return self.dim ** 2

    @property
    def constant_after(self) -> float:
        return self.t_off

    def omega(self, t: float) -> float:
        if t >= self.t_off:
            return 0.0
        return float(self.pulse(t))

    def rabi_coefficients(self, t: float) -> tuple[float, float]:
        """Drive-dressed rate pair at time t, all prefactors included."""
        om = self.omega(t)
        if om == 0.0 or self.kernel.rates.rabi_table is None:
            return 0.0, 0.0
        return rabi_dependent_rates(self.kernel.correlation, self.b_avg * om,
                                    self.kernel.rates.rabi_table)

    def coefficient(self, term: LiouvillianTerm, t: float) -> float:
        if term.kind in (KIND_HAMILTONIAN, KIND_CONSTANT):
            return term.value
        if term.kind == KIND_DRIVE:
            return term.value * self.b_avg * self.omega(t)
        if term.kind == KIND_OMEGA_SQ:
            return term.value * self.omega(t) ** 2
        g_r, g_i = self.rabi_coefficients(t)
        return term.value * (g_r if term.kind == KIND_RABI_R else g_i)

    def rhs_vec(self, t: float, v: np.ndarray) -> np.ndarray:
        out = self.L_const @ v
        om = self.omega(t)
        if om != 0.0:
            if self.S_drive is not None:
                out = out + (self.b_avg * om) * (self.S_drive @ v)
            if self.S_omega2 is not None:
                out = out + om ** 2 * (self.S_omega2 @ v)
            g_r, g_i = self.rabi_coefficients(t)
            if self.S_rabi_r is not None and g_r != 0.0:
                out = out + g_r * (self.S_rabi_r @ v)
            if self.S_rabi_i is not None and g_i != 0.0:
                out = out + g_i * (self.S_rabi_i @ v)
        return out

    def rhs_matrix(self, rho: np.ndarray, t: float) -> np.ndarray:
        return unvec(self.rhs_vec(t, vec(rho)), self.dim)


def coefficient_table(gen: CascadeGenerator, t: float) -> list[tuple[str, float]]:
    """(label, coefficient) of every term at time t, for diagnostics."""
    return [(term.label, gen.coefficient(term, t)) for term in gen.terms]


def build_generator(params: PhysicalParams, kernel: PhononKernel,
                    ops: OperatorSet | None = None,
                    config: ModelConfig | None = None) -> CascadeGenerator:
    if config is None:
        config = ModelConfig.from_params(params)
    layout = HilbertLayout(params.n_max)
    if ops is None:
        ops = build_elementary_ops(layout)
    terms = build_liouvillian_terms(params, kernel, ops, config)

    n2 = layout.total_dim ** 2
    sums: dict[str, sp.csr_matrix] = {}
    for term in terms:
        kind = term.kind
        if kind in (KIND_HAMILTONIAN, KIND_CONSTANT):
            kind = "const"
        add = term.value * term.superop
        acc = sums.get(kind)
        sums[kind] = add if acc is None else acc + add

    pulse = PulseShape(params.omega_H0, params.t_p, params.t_0)
    t_off = max(params.t_gate, params.t_0 + 2.5 * params.t_p)
    b_avg = kernel.b_avg if config.phonons_enabled else 1.0
    empty = sp.csr_matrix((n2, n2), dtype=complex)
    return CascadeGenerator(
        layout=layout, params=params, kernel=kernel, config=config,
        terms=terms, pulse=pulse, b_avg=b_avg, t_off=t_off,
        L_const=sums.get("const", empty).tocsr(),
        S_drive=sums.get(KIND_DRIVE),
        S_omega2=sums.get(KIND_OMEGA_SQ),
        S_rabi_r=sums.get(KIND_RABI_R),
        S_rabi_i=sums.get(KIND_RABI_I),
    )
