"""Physical parameters, unit handling and the run configuration file format.

All frequencies are stored internally as angular frequencies in ps^-1 and
all times in ps.  The configuration file (and every CSV/JSON artifact)
speaks meV / ueV / ps / K; conversion happens in exactly one place, here.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

HBAR_MEV_PS = 0.6582119  # hbar in meV*ps
KB_MEV_K = 0.08617333  # Boltzmann constant in meV/K

VALIDITY_THRESHOLD = 0.1


def mev_to_inv_ps(x: float) -> float:
    """Convert an energy in meV to an angular frequency in ps^-1."""
    return x / HBAR_MEV_PS


def inv_ps_to_mev(x: float) -> float:
    """Convert an angular frequency in ps^-1 to an energy in meV."""
    return x * HBAR_MEV_PS


def thermal_frequency(temperature_K: float) -> float:
    """k_B*T as an angular frequency in ps^-1."""
    return temperature_K * KB_MEV_K / HBAR_MEV_PS


class ConfigError(ValueError):
    """Raised when a configuration file cannot be parsed."""


class ValidationError(ValueError):
    """Raised when a parameter value violates a physical constraint."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# Configuration schema: key -> (attribute, converter to internal units,
# converter back to file units, default in file units).
_IDENT = (lambda x: x, lambda x: x)
_ENERGY_MEV = (mev_to_inv_ps, inv_ps_to_mev)
_ENERGY_UEV = (lambda x: mev_to_inv_ps(x * 1e-3), lambda x: inv_ps_to_mev(x) * 1e3)

_SCHEMA = {
    "alpha_p_ps2": ("alpha_p", *_IDENT, 0.06),
    "omega_b_meV": ("omega_b", *_ENERGY_MEV, 1.0),
    "temperature_K": ("temperature", *_IDENT, 4.0),
    "delta_fss_ueV": ("delta_fss", *_ENERGY_UEV, 20.0),
    "detuning_meV": ("detuning", *_ENERGY_MEV, 1.1),
    "g_ueV": ("g", *_ENERGY_UEV, 70.0),
    "kappa_ueV": ("kappa", *_ENERGY_UEV, 65.0),
    "gamma_B_ueV": ("gamma_B", *_ENERGY_UEV, 2.0),
    "gamma_E_ueV": ("gamma_E", *_ENERGY_UEV, 1.0),
    "gamma_Bp_ueV": ("gamma_B_deph", *_ENERGY_UEV, 4.0),
    "gamma_Ep_ueV": ("gamma_E_deph", *_ENERGY_UEV, 2.0),
    "omega_H0_meV": ("omega_H0", *_ENERGY_MEV, 0.8),
    "t_p_ps": ("t_p", *_IDENT, 6.0),
    "t0_ps": ("t_0", *_IDENT, None),  # default 4*t_p, resolved at load
    "n_max": ("n_max", int, int, 2),
    "Tp_ps": ("T_p", *_IDENT, None),  # default: same as Tpprime_ps
    "Tpprime_ps": ("T_p_prime", *_IDENT, 200.0),
    "t_gate_ps": ("t_gate", *_IDENT, None),  # default t0 + 2.5*t_p
    "phonons_enabled": ("phonons_enabled", bool, bool, True),
}


@dataclass(frozen=True)
class PhysicalParams:
    """Complete parameter set of one run, in internal units (ps^-1 / ps / K).

    Attributes
    ----------
    alpha_p : float
        Phonon coupling strength of the cubic spectral density, ps^2.
    omega_b : float
        Spectral density cutoff frequency, ps^-1.
    temperature : float
        Lattice temperature, K.
    delta_fss : float
        Fine-structure splitting between the two exciton levels, ps^-1.
    detuning : float
        Laser-exciton detuning Delta = (E_B/hbar + delta_fss)/2, ps^-1.
        Equals the rotating-frame energy of the H exciton; the V exciton
        sits at detuning - delta_fss.
    g : float
        Exciton-cavity coupling (same for both modes), ps^-1.
    kappa : float
        Cavity intensity decay rate, ps^-1.
    gamma_B, gamma_E : float
        Radiative decay rates of biexciton and exciton levels, ps^-1.
    gamma_B_deph, gamma_E_deph : float
        Pure dephasing rates of biexciton and exciton levels, ps^-1.
    omega_H0 : float
        Peak Rabi frequency of the H-polarized Gaussian pulse, ps^-1.
    t_p, t_0 : float
        Pulse duration parameter and pulse center, ps.
    n_max : int
        Fock truncation per cavity mode.
    T_p, T_p_prime : float
        Detection windows for the first-photon and second-photon time
        integrals, ps.
    t_gate : float
        Start of the detection window (temporal gate), ps.
    phonons_enabled : bool
        If false, the phonon environment is removed entirely (B=1, no
        phonon-induced rates).
    """

    alpha_p: float
    omega_b: float
    temperature: float
    delta_fss: float
    detuning: float
    g: float
    kappa: float
    gamma_B: float
    gamma_E: float
    gamma_B_deph: float
    gamma_E_deph: float
    omega_H0: float
    t_p: float
    t_0: float
    n_max: int
    T_p: float
    T_p_prime: float
    t_gate: float
    phonons_enabled: bool

    # rotating-frame level splittings entering the phonon rates
    @property
    def delta_H(self) -> float:
        return self.detuning

    @property
    def delta_V(self) -> float:
        return self.detuning - self.delta_fss

    @property
    def horizon(self) -> float:
        """Default end of the simulated time window, ps."""
        return self.t_gate + self.T_p + self.T_p_prime

    def validate(self) -> None:
        positive = ["omega_b", "kappa", "t_p", "T_p", "T_p_prime"]
        nonneg = ["alpha_p", "delta_fss", "g", "gamma_B", "gamma_E",
                  "gamma_B_deph", "gamma_E_deph", "omega_H0", "t_0", "t_gate"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be > 0")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ValidationError(name, "must be >= 0")
        if self.phonons_enabled and not self.temperature > 0:
            raise ValidationError("temperature", "must be > 0 when phonons are enabled")
        if not isinstance(self.n_max, int) or not 1 <= self.n_max <= 4:
            raise ValidationError("n_max", "must be an integer in [1, 4]")
        if not self.detuning > self.delta_fss:
            raise ValidationError("detuning", "must exceed delta_fss so both "
                                  "exciton splittings stay positive")

    def to_config_dict(self) -> dict:
        out = {}
        for key, (attr, _to_int, to_file, _default) in _SCHEMA.items():
            out[key] = to_file(getattr(self, attr))
        return out

    def replace(self, **internal_fields) -> "PhysicalParams":
        p = dataclasses.replace(self, **internal_fields)
        p.validate()
        return p


def default_params() -> PhysicalParams:
    return _build({})


def parse_value(key: str, raw: str, where: str = "value"):
    """Parse one raw string for a known configuration key."""
    if key not in _SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    if key == "n_max":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where}: n_max must be an integer, got {raw!r}")
    if key == "phonons_enabled":
        low = raw.strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{where}: phonons_enabled must be true/false, got {raw!r}")
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value {raw!r} for {key}")


def _parse_value(key: str, raw: str, lineno: int):
    return parse_value(key, raw, f"line {lineno}")


def _build(file_values: dict) -> PhysicalParams:
    """Assemble PhysicalParams from file-unit values, applying defaults."""
    vals = {}
    for key, (attr, to_int, _to_file, default) in _SCHEMA.items():
        if key in file_values:
            vals[attr] = to_int(file_values[key])
        elif default is not None:
            vals[attr] = to_int(default)
        else:
            vals[attr] = None
    if vals["t_0"] is None:
        vals["t_0"] = 4.0 * vals["t_p"]
    if vals["t_gate"] is None:
        vals["t_gate"] = vals["t_0"] + 2.5 * vals["t_p"]
    if vals["T_p"] is None:
        vals["T_p"] = vals["T_p_prime"]
    params = PhysicalParams(**vals)
    params.validate()
    return params


def loads_config(text: str) -> PhysicalParams:
    """Parse 'key = value' configuration text into PhysicalParams."""
    seen: dict[str, int] = {}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} "
                              f"(first set on line {seen[key]})")
        seen[key] = lineno
        values[key] = _parse_value(key, raw, lineno)
    return _build(values)


def load_config(path) -> PhysicalParams:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_config(fh.read())


def from_config_dict(values: dict) -> PhysicalParams:
    """Build from a file-unit mapping, e.g. one edited copy of to_config_dict()."""
    unknown = set(values) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    return _build(dict(values))


def serialize(params: PhysicalParams) -> str:
    """Canonical configuration text; load(serialize(p)) == p."""
    lines = []
    for key, value in params.to_config_dict().items():
        if isinstance(value, bool):
            lines.append(f"{key} = {'true' if value else 'false'}")
        elif isinstance(value, int):
            lines.append(f"{key} = {value}")
        else:
            lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"


def run_id(params: PhysicalParams) -> str:
    """Stable 12-hex-digit identifier of a configuration."""
    return hashlib.sha256(serialize(params).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class ValidityReport:
    value: float
    threshold: float
    passed: bool


def check_polaron_validity(params: PhysicalParams, b_avg: float) -> ValidityReport:
    """Weak-drive condition (Omega_H0/omega_b)^2 * (1 - B^4) << 1.

    The returned value should be well below 1 for the polaron treatment of
    the drive to hold; `passed` compares against the fixed threshold 0.1.
    """
    if not 0.0 < b_avg <= 1.0:
        raise ValidationError("b_avg", "must lie in (0, 1]")
    value = (params.omega_H0 / params.omega_b) ** 2 * (1.0 - b_avg ** 4)
    return ValidityReport(value=value, threshold=VALIDITY_THRESHOLD,
                          passed=value < VALIDITY_THRESHOLD)


def polaron_validity_value(params: PhysicalParams, b_avg: float) -> float:
    return check_polaron_validity(params, b_avg).value
