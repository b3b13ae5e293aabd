"""Single-run and sweep orchestration with on-disk artifacts.

A run executes the full pipeline (phonon kernel, generator, trajectory,
pair correlations, metrics) and writes its artifact bundle under
out/<run-id>/, where the run id is a hash of the exact configuration.
Sweeps fan runs out over a process pool and aggregate one summary row
per point, recording failures without aborting the remaining points.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correlations import build_tpdm, ettocf_series, TwoPhotonMatrix
from .dynamics import Trajectory, evolve
from .liouvillian import build_generator
from .metrics import (EntanglementReport, StarkReport, entanglement_report,
                      stark_shifts)
from .operators import build_elementary_ops
from .params import (PhysicalParams, ValidityReport, check_polaron_validity,
                     from_config_dict, run_id, serialize)
from .phonon import build_kernel, rate_curve

ALL_OUTPUTS = frozenset(
    {"concurrence", "qber", "tpdm", "rates", "stark", "ettocf", "trajectory"})
TRAJECTORY_STEP = 1.0   # ps
RATES_DELTA_GRID = np.round(np.arange(0.1, 2.0 + 1e-9, 0.05), 10)

WORKERS_ENV = "QDCASCADE_WORKERS"


class RunStageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunResult:
    params: PhysicalParams
    run_id: str
    b_avg: float
    validity: ValidityReport
    tpdm: TwoPhotonMatrix
    report: EntanglementReport
    stark: StarkReport
    trajectory: Trajectory
    populations: dict[str, np.ndarray]
    n_photons: dict[str, np.ndarray]
    trace_series: np.ndarray
    min_eig_series: np.ndarray
    ettocf: np.ndarray | None
    runtime_s: float

    def summary_line(self) -> str:
        return (f"run {self.run_id}: C={self.report.concurrence:.4f} "
                f"q={self.report.qber:.4f} B={self.b_avg:.4f} "
                f"validity={self.validity.value:.4f} "
                f"({'ok' if self.validity.passed else 'exceeded'})")


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, RunStageError):
                raise RunStageError(name, exc) from exc
            return False

    return _Ctx()


def compute_run(params: PhysicalParams, want_ettocf: bool = True) -> RunResult:
    """Full pipeline in memory; no files touched."""
    t_begin = time.perf_counter()
    params.validate()

    with _stage("phonon-kernel"):
        kernel = build_kernel(params)
        validity = check_polaron_validity(params, kernel.b_avg)
    with _stage("model"):
        generator = build_generator(params, kernel)
        ops = build_elementary_ops(generator.layout)
    with _stage("dynamics"):
        times = np.arange(0.0, params.horizon + 0.5 * TRAJECTORY_STEP,
                          TRAJECTORY_STEP)
        traj = evolve(generator, times)
        pops = {k: traj.expectation(ops.proj[k]) for k in "GHVB"}
        photons = {"H": traj.expectation(ops.number_H),
                   "V": traj.expectation(ops.number_V)}
        traces = np.einsum("tii->t", traj.states).real
        min_eigs = np.array([np.linalg.eigvalsh(s).min()
                             for s in traj.states])
    with _stage("correlations"):
        tpdm = build_tpdm(generator, ops)
        ettocf = ettocf_series(generator, traj, ops) if want_ettocf else None
    with _stage("metrics"):
        report = entanglement_report(tpdm.matrix)
        stark = stark_shifts(params, kernel.b_avg,
                             float(photons["H"].max()),
                             float(photons["V"].max()))

    return RunResult(
        params=params, run_id=run_id(params), b_avg=kernel.b_avg,
        validity=validity, tpdm=tpdm, report=report, stark=stark,
        trajectory=traj, populations=pops, n_photons=photons,
        trace_series=traces, min_eig_series=min_eigs, ettocf=ettocf,
        runtime_s=time.perf_counter() - t_begin)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            # repr(float) round-trips exactly; plain str() would not
            writer.writerow([repr(float(x)) if isinstance(x, float) else x
                             for x in row])


def write_artifacts(result: RunResult, out_root: Path | str,
                    outputs: frozenset[str] = ALL_OUTPUTS) -> Path:
    """Write the artifact bundle; returns the run directory."""
    unknown = set(outputs) - ALL_OUTPUTS
    if unknown:
        raise ValueError(f"unknown outputs: {sorted(unknown)}")
    run_dir = Path(out_root) / result.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    p = result.params

    (run_dir / "config.echo").write_text(serialize(p), encoding="utf-8")

    write_csv(run_dir / "summary.csv",
               ["run_id", "concurrence", "qber", "pair_coherence_abs",
                "b_avg", "validity_value", "validity_passed", "tpdm_norm",
                "tpdm_min_eig", "runtime_s"],
               [[result.run_id, result.report.concurrence, result.report.qber,
                 result.report.pair_coherence_abs, result.b_avg,
                 result.validity.value, result.validity.passed,
                 result.tpdm.norm, result.tpdm.min_eigenvalue,
                 result.runtime_s]])

    if "tpdm" in outputs or "concurrence" in outputs or "qber" in outputs:
        blob = {
            "basis": list(result.tpdm.basis),
            "real": result.tpdm.matrix.real.tolist(),
            "imag": result.tpdm.matrix.imag.tolist(),
            "norm": result.tpdm.norm,
            "t_window_ps": list(result.tpdm.t_window),
            "tau_window_ps": list(result.tpdm.tau_window),
            "min_eigenvalue": result.tpdm.min_eigenvalue,
            "concurrence": result.report.concurrence,
            "qber": result.report.qber,
            "run_id": result.run_id,
        }
        (run_dir / "tpdm.json").write_text(
            json.dumps(blob, indent=2), encoding="utf-8")

    if "rates" in outputs:
        p_rates = p if p.phonons_enabled else p.replace(alpha_p=0.0)
        rows = rate_curve(p_rates, RATES_DELTA_GRID,
                          [max(p.temperature, 1e-6)])
        write_csv(run_dir / "rates.csv",
                   ["delta_meV", "gamma_plus", "gamma_minus", "gamma_tp",
                    "temperature_K"],
                   [[r["delta_meV"], r["gamma_plus"], r["gamma_minus"],
                     r["gamma_tp"], r["temperature_K"]] for r in rows])

    if "trajectory" in outputs:
        t = result.trajectory.times
        rows = [[t[i], result.populations["G"][i], result.populations["H"][i],
                 result.populations["V"][i], result.populations["B"][i],
                 result.n_photons["H"][i], result.n_photons["V"][i],
                 result.trace_series[i], result.min_eig_series[i]]
                for i in range(len(t))]
        write_csv(run_dir / "trajectory.csv",
                   ["t_ps", "pop_G", "pop_H", "pop_V", "pop_B",
                    "n_H", "n_V", "trace", "min_eig"], rows)

    if "stark" in outputs:
        write_csv(run_dir / "stark.csv",
                   ["n_H", "n_V", "shift_H_meV", "shift_V_meV",
                    "splitting_meV", "b_avg"],
                   [[result.stark.n_H, result.stark.n_V,
                     result.stark.shift_H_mev, result.stark.shift_V_mev,
                     result.stark.splitting_mev, result.b_avg]])

    if "ettocf" in outputs and result.ettocf is not None:
        t = result.trajectory.times
        write_csv(run_dir / "ettocf.csv", ["t_ps", "ettocf"],
                   [[t[i], result.ettocf[i]] for i in range(len(t))])

    return run_dir


def run_single(params: PhysicalParams, out_root: Path | str = "out",
               outputs: frozenset[str] = ALL_OUTPUTS,
               quiet: bool = False) -> tuple[RunResult, Path]:
    result = compute_run(params, want_ettocf="ettocf" in outputs)
    run_dir = write_artifacts(result, out_root, outputs)
    if not quiet:
        print(result.summary_line())
    return result, run_dir


# --- sweeps ---------------------------------------------------------------

SWEEP_AXES = {
    "g": "g_ueV",
    "temperature": "temperature_K",
    "delta_fss": "delta_fss_ueV",
    "T_p_prime": "Tpprime_ps",
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    base: PhysicalParams
    outputs: frozenset[str] = ALL_OUTPUTS

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {sorted(SWEEP_AXES)}")
        if not self.values:
            raise ValueError("sweep needs at least one value")

    def point_config(self, value: float) -> dict:
        """File-unit config of one sweep point; not yet validated."""
        cfg = self.base.to_config_dict()
        cfg[SWEEP_AXES[self.axis]] = float(value)
        return cfg

    def point_params(self, value: float) -> PhysicalParams:
        return from_config_dict(self.point_config(value))


def _sweep_point(args: tuple[dict, str, float]) -> dict:
    cfg, axis, value = args
    row = {"axis": axis, "axis_value": value, "error": ""}
    try:
        params = from_config_dict(cfg)
        result = compute_run(params, want_ettocf=False)
        row.update(concurrence=result.report.concurrence,
                   qber=result.report.qber, b_avg=result.b_avg,
                   validity=result.validity.value,
                   runtime_s=result.runtime_s)
    except Exception as exc:  # recorded, sweep continues
        row.update(concurrence="", qber="", b_avg="", validity="",
                   runtime_s="", error=f"{type(exc).__name__}: {exc}")
    return row


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"{WORKERS_ENV} must be an integer") from exc
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1")
        return n
    return min(4, os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """One summary row per sweep value, in the order given."""
    if workers is None:
        workers = default_workers()
    jobs = [(spec.point_config(v), spec.axis, float(v))
            for v in spec.values]
    if workers <= 1 or len(jobs) == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    return rows


def write_sweep_csv(rows: list[dict], path: Path | str) -> None:
    header = ["axis", "axis_value", "concurrence", "qber", "b_avg",
              "validity", "runtime_s", "error"]
    write_csv(Path(path), header,
               [[row[k] for k in header] for row in rows])
