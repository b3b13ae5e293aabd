"""Configuration parsing, unit conversion, validation, serialization."""
import numpy as np
import pytest

from qdcascade.params import (
    HBAR_MEV_PS,
    KB_MEV_K,
    ConfigError,
    ValidationError,
    check_polaron_validity,
    default_params,
    from_config_dict,
    load_config,
    loads_config,
    parse_value,
    polaron_validity_value,
    run_id,
    serialize,
)


def test_constants():
    assert np.abs(HBAR_MEV_PS - 0.6582119) < 1e-7
    assert np.abs(KB_MEV_K - 0.08617333) < 1e-8


def test_default_values_internal_units():
    p = default_params()
    assert p.alpha_p == 0.06
    assert p.temperature == 4.0
    assert np.abs(p.omega_b - 1.0 / HBAR_MEV_PS) < 1e-12
    assert np.abs(p.detuning - 1.1 / HBAR_MEV_PS) < 1e-12
    assert np.abs(p.g - 0.07 / HBAR_MEV_PS) < 1e-12
    assert np.abs(p.kappa - 0.065 / HBAR_MEV_PS) < 1e-12
    assert np.abs(p.delta_fss - 0.02 / HBAR_MEV_PS) < 1e-12
    assert np.abs(p.omega_H0 - 0.8 / HBAR_MEV_PS) < 1e-12
    assert p.n_max == 2
    assert p.phonons_enabled is True


def test_derived_time_defaults():
    p = default_params()
    assert p.t_p == 6.0
    assert p.t_0 == 24.0          # 4 t_p
    assert p.t_gate == 39.0       # t_0 + 2.5 t_p
    assert p.T_p == 200.0
    assert p.T_p_prime == 200.0
    assert p.horizon == 439.0


def test_level_splittings():
    p = default_params()
    assert p.delta_H == p.detuning
    assert np.abs(p.delta_V - (p.detuning - p.delta_fss)) < 1e-15


def test_serialize_roundtrip_is_fixed_point():
    p = default_params()
    q = loads_config(serialize(p))
    assert q == p
    assert serialize(q) == serialize(p)


def test_run_id_frozen_and_deterministic():
    p = default_params()
    rid = run_id(p)
    assert rid == "da5f96310c03"
    assert len(rid) == 12
    assert all(c in "0123456789abcdef" for c in rid)
    assert run_id(p.replace(temperature=20.0)) != rid


def test_replace_revalidates():
    p = default_params()
    with pytest.raises(ValidationError):
        p.replace(kappa=0.0)
    with pytest.raises(ValidationError):
        p.replace(n_max=0)
    with pytest.raises(ValidationError):
        p.replace(n_max=5)
    # detuning must stay above the fine-structure splitting
    with pytest.raises(ValidationError, match="detuning"):
        p.replace(detuning=0.5 * p.delta_fss)


def test_temperature_constraint_tracks_phonon_toggle():
    p = default_params()
    with pytest.raises(ValidationError, match="temperature"):
        p.replace(temperature=0.0)
    q = p.replace(phonons_enabled=False, temperature=0.0)
    assert q.temperature == 0.0


def test_validation_error_carries_field():
    p = default_params()
    try:
        p.replace(t_p=-1.0)
    except ValidationError as exc:
        assert exc.field == "t_p"
    else:
        raise AssertionError("no error raised")


def test_loads_config_overrides_and_defaults():
    p = loads_config("temperature_K = 20\ng_ueV = 30\n")
    assert p.temperature == 20.0
    assert np.abs(p.g - 0.03 / HBAR_MEV_PS) < 1e-12
    assert p.n_max == 2  # untouched keys keep defaults


def test_loads_config_comments_and_blank_lines():
    text = "# comment line\n\ntemperature_K = 8  # trailing\n"
    assert loads_config(text).temperature == 8.0


def test_loads_config_unknown_key_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        loads_config("temperature_K = 4\nbogus_key = 1\n")


def test_loads_config_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        loads_config("g_ueV = 70\ng_ueV = 30\n")


def test_loads_config_bad_syntax():
    with pytest.raises(ConfigError, match="line 1"):
        loads_config("just some words\n")


def test_parse_value_types():
    assert parse_value("n_max", "3") == 3
    assert isinstance(parse_value("n_max", "3"), int)
    for raw in ("true", "1", "yes", "on"):
        assert parse_value("phonons_enabled", raw) is True
    for raw in ("false", "0", "no", "off"):
        assert parse_value("phonons_enabled", raw) is False
    assert parse_value("t_p_ps", "6.5") == 6.5


def test_parse_value_errors_name_the_source():
    with pytest.raises(ConfigError, match="--n_max"):
        parse_value("n_max", "2.5", where="--n_max")
    with pytest.raises(ConfigError):
        parse_value("phonons_enabled", "maybe")
    with pytest.raises(ConfigError):
        parse_value("g_ueV", "seventy")


def test_from_config_dict_roundtrip_and_unknown_keys():
    p = default_params()
    assert from_config_dict(p.to_config_dict()) == p
    with pytest.raises(ConfigError, match="unknown"):
        from_config_dict({"not_a_key": 1.0})


def test_load_config_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("temperature_K = 16\nn_max = 3\n")
    p = load_config(f)
    assert p.temperature == 16.0
    assert p.n_max == 3


def test_serialize_format():
    text = serialize(default_params())
    assert "phonons_enabled = true" in text
    assert "n_max = 2" in text
    assert text.endswith("\n")


def test_polaron_validity_at_defaults():
    p = default_params()
    rep = check_polaron_validity(p, 0.9120867525783238)
    assert np.abs(rep.value - 0.19708073987005786) < 1e-12
    assert rep.threshold == 0.1
    assert rep.passed is False  # defaults exceed the weak-drive window


def test_polaron_validity_limits():
    p = default_params()
    assert polaron_validity_value(p, 1.0) == 0.0
    with pytest.raises(ValidationError, match="b_avg"):
        check_polaron_validity(p, 0.0)
    with pytest.raises(ValidationError, match="b_avg"):
        check_polaron_validity(p, 1.5)


def test_weaker_drive_passes_validity():
    p = default_params().replace(omega_H0=0.1 / HBAR_MEV_PS)
    assert check_polaron_validity(p, 0.9120867525783238).passed
