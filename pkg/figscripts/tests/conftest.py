import json

import pytest


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture()
def artifacts(tmp_path):
    """One directory holding a small synthetic copy of every artifact."""
    tmp_path = tmp_path / "artifacts"
    tmp_path.mkdir()
    write_csv(tmp_path / "rates.csv",
              ["delta_meV", "gamma_plus", "gamma_minus", "gamma_tp",
               "temperature_K"],
              [[0.5 + 0.2 * i, 1.2e-3 / (1 + i), 5e-5 * (1 + i),
                -6e-5 + 1e-5 * i, temp]
               for temp in (4.0, 20.0) for i in range(5)])
    write_csv(tmp_path / "sweep_g.csv",
              ["axis", "axis_value", "concurrence", "qber", "b_avg",
               "validity", "runtime_s", "error"],
              [["g", 30.0 + 20 * i, 0.9 - 0.1 * i, 0.05 + 0.02 * i,
                0.91, 0.2, 1.0, ""] for i in range(5)]
              + [["g", -5.0, "", "", "", "", "", "ValidationError: g"]])
    write_csv(tmp_path / "sweep_temperature.csv",
              ["axis", "axis_value", "concurrence", "qber", "b_avg",
               "validity", "runtime_s", "error"],
              [["temperature", 4.0 + 4 * i, 0.8 - 0.12 * i,
                0.05 + 0.033 * i, 0.9, 0.2, 1.0, ""] for i in range(5)])
    bell = {
        "basis": ["HH", "HV", "VH", "VV"],
        "real": [[0.5, 0.0, 0.0, 0.5], [0.0] * 4, [0.0] * 4,
                 [0.5, 0.0, 0.0, 0.5]],
        "imag": [[0.0] * 4 for _ in range(4)],
        "norm": 1.0,
        "concurrence": 1.0,
        "qber": 0.0,
    }
    (tmp_path / "tpdm.json").write_text(json.dumps(bell, indent=2))
    write_csv(tmp_path / "stark.csv",
              ["n_H", "n_V", "shift_H_meV", "shift_V_meV", "splitting_meV",
               "b_avg"],
              [[0.4, 0.38, 0.0074, 0.0075, 0.00014, 0.912]])
    write_csv(tmp_path / "ettocf.csv",
              ["t_ps", "ettocf"],
              [[float(t), 1.5e-3 * (t / 24.0) ** 2 * 2.718 ** (-t / 12.0)]
               for t in range(0, 40, 2)])
    return tmp_path
