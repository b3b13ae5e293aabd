"""Time evolution of the cascade master equation.

Two-phase propagation: an adaptive high-order Runge-Kutta integration
while the pulse envelope is nonzero, then matrix-exponential stepping
once the generator has become time independent.  For repeated uniform
steps with a moderate Hilbert space the exponential is formed densely
once and applied as matrix-vector products; otherwise each step uses
sparse expm_multiply.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .liouvillian import CascadeGenerator, vec, unvec
from .operators import initial_state

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
DENSE_PROPAGATOR_MAX_DIM = 2500   # superoperator dimension cutoff for dense expm
NEGATIVITY_WARN = -1e-6
UNIFORM_STEP_RTOL = 1e-9


class PropagationError(RuntimeError):
    pass


def step_propagator(generator: CascadeGenerator, dt: float,
                    dense_max_dim: int | None = None):
    """Dense exp(L_const dt) when the superoperator is small enough, else None.

    Cached on the generator since grids reuse the same step width.  A
    propagator already present in the cache is returned regardless of the
    size cutoff, so callers may precompute one for a large system when
    they know memory allows it.
    """
    key = round(float(dt), 12)
    cached = generator.propagator_cache.get(key)
    if cached is not None:
        return cached
    if dense_max_dim is None:
        dense_max_dim = DENSE_PROPAGATOR_MAX_DIM
    if generator.n_super > dense_max_dim:
        return None
    prop = scipy.linalg.expm(generator.L_const.toarray() * dt)
    generator.propagator_cache[key] = prop
    return prop


def precompute_step_propagator(generator: CascadeGenerator,
                               dt: float) -> np.ndarray:
    """Build exp(L_const dt) column-block-wise and cache it.

    Uses expm_multiply on the identity, which peaks at a few copies of the
    n_super x n_super result instead of the larger Pade working set; the
    price is more matvec work.  Intended for systems above the dense
    cutoff (e.g. three-photon truncation) on memory-constrained hosts.
    """
    key = round(float(dt), 12)
    cached = generator.propagator_cache.get(key)
    if cached is None:
        eye = np.eye(generator.n_super, dtype=complex)
        cached = expm_multiply(generator.L_const * dt, eye)
        generator.propagator_cache[key] = cached
    return cached


def _integrate_pulse(generator: CascadeGenerator, v0: np.ndarray, t_start: float,
                     t_end: float, t_eval: np.ndarray, rtol: float,
                     atol: float) -> np.ndarray:
    """Adaptive integration over [t_start, t_end]; returns states at t_eval
    (all strictly below t_end) plus the final state as the last column."""
    want = np.concatenate([t_eval, [t_end]])
    sol = solve_ivp(generator.rhs_vec, (t_start, t_end), v0, method="DOP853",
                    t_eval=want, rtol=rtol, atol=atol,
                    max_step=generator.params.t_p / 2.0)
    if not sol.success:
        raise PropagationError(f"integration failed: {sol.message}")
    return sol.y


def _step_constant(generator: CascadeGenerator, v0: np.ndarray, t_start: float,
                   times: np.ndarray,
                   dense_max_dim: int | None = None) -> np.ndarray:
    """Propagate under the constant generator from t_start to each of times
    (sorted, all >= t_start).  Returns (len(times), n_super)."""
    out = np.empty((len(times), v0.size), dtype=complex)
    if len(times) == 0:
        return out
    gaps = np.diff(np.concatenate([[t_start], times]))
    if np.any(gaps < -1e-9):
        raise PropagationError("constant-phase times must be nondecreasing")
    gaps = np.clip(gaps, 0.0, None)

    L = generator.L_const
    v = v0
    if gaps[0] > 0.0:
        v = expm_multiply(L * gaps[0], v)
    out[0] = v
    if len(times) == 1:
        return out

    rest = gaps[1:]
    dt = float(rest.max())
    uniform = dt > 0.0 and np.ptp(rest) <= UNIFORM_STEP_RTOL * max(dt, 1.0)
    if uniform:
        prop = step_propagator(generator, dt, dense_max_dim)
        if prop is not None:
            for i in range(1, len(times)):
                v = prop @ v
                out[i] = v
        elif len(times) > 2:
            out[1:] = expm_multiply(L, v, start=dt, stop=dt * (len(times) - 1),
                                    num=len(times) - 1, endpoint=True)
        else:
            out[1] = expm_multiply(L * dt, v)
    else:
        for i in range(1, len(times)):
            if rest[i - 1] > 0.0:
                v = expm_multiply(L * rest[i - 1], v)
            out[i] = v
    return out


def propagate_states(generator: CascadeGenerator, v0: np.ndarray, t_start: float,
                     times: np.ndarray, rtol: float = DEFAULT_RTOL,
                     atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Propagate vec(rho) from t_start through sorted checkpoint times.

    Works for any matrix seed (not only density operators), so correlation
    functions can reuse it.  Returns an array of shape (len(times), n_super).
    """
    times = np.asarray(times, dtype=float)
    if times.size and times[0] < t_start - 1e-12:
        raise PropagationError("checkpoint before the start time")
    if np.any(np.diff(times) < 0):
        raise PropagationError("checkpoint times must be sorted")

    t_off = generator.constant_after
    out = np.empty((len(times), v0.size), dtype=complex)
    if len(times) == 0:
        return out

    if t_start >= t_off:
        out[:] = _step_constant(generator, v0, t_start, times)
        return out

    t_end = min(t_off, times[-1])
    n_pulse = int(np.searchsorted(times, t_end - 1e-12, side="left"))
    cols = _integrate_pulse(generator, v0, t_start, t_end, times[:n_pulse],
                            rtol, atol)
    out[:n_pulse] = cols[:, :n_pulse].T
    if n_pulse < len(times):
        v_end = cols[:, -1]
        out[n_pulse:] = _step_constant(generator, v_end, t_end, times[n_pulse:])
    return out


def propagate_from(generator: CascadeGenerator, rho: np.ndarray, t: float,
                   dt: float, rtol: float = DEFAULT_RTOL,
                   atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Advance a density matrix from absolute time t by dt."""
    if dt < 0:
        raise PropagationError("dt must be nonnegative")
    rho = np.asarray(rho, dtype=complex)
    if dt == 0.0:
        return rho.copy()
    v = propagate_states(generator, vec(rho), t, np.array([t + dt]),
                         rtol, atol)[0]
    return unvec(v, generator.dim)


@dataclass(frozen=True)
class EvolutionDiagnostics:
    max_trace_drift: float
    min_eigenvalue: float
    max_hermiticity_defect: float


@dataclass
class Trajectory:
    """Density matrices at requested checkpoint times."""

    times: np.ndarray
    states: np.ndarray        # (n_times, dim, dim), hermitized
    diagnostics: EvolutionDiagnostics

    def state_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise KeyError(f"no checkpoint at t = {t}")
        return self.states[i]

    def expectation(self, op) -> np.ndarray:
        """Real part of Tr[op rho(t)] over all checkpoints."""
        mat = op.toarray() if sp.issparse(op) else np.asarray(op)
        return np.einsum("ij,tji->t", mat, self.states).real


def evolve(generator: CascadeGenerator, times, rho0: np.ndarray | None = None,
           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> Trajectory:
    """Evolve from rho0 at t = 0 (default: ground state, empty cavity)."""
    times = np.asarray(times, dtype=float)
    dim = generator.dim
    if rho0 is None:
        rho0 = initial_state(generator.layout)
    v0 = vec(np.asarray(rho0, dtype=complex))

    raw = propagate_states(generator, v0, 0.0, times, rtol, atol)
    states = raw.reshape(len(times), dim, dim)

    traces = np.einsum("tii->t", states)
    max_drift = float(np.abs(traces - 1.0).max()) if len(times) else 0.0
    herm_defect = 0.0
    min_eig = np.inf
    herm = np.empty_like(states)
    for i, rho in enumerate(states):
        defect = np.abs(rho - rho.conj().T).max()
        herm_defect = max(herm_defect, float(defect))
        herm[i] = 0.5 * (rho + rho.conj().T)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(herm[i]).min()))
    if len(times) == 0:
        min_eig = 0.0

    if min_eig < NEGATIVITY_WARN:
        warnings.warn(f"density matrix developed negative population "
                      f"{min_eig:.3e}", RuntimeWarning, stacklevel=2)

    diag = EvolutionDiagnostics(max_trace_drift=max_drift,
                                min_eigenvalue=float(min_eig),
                                max_hermiticity_defect=herm_defect)
    return Trajectory(times=times, states=herm, diagnostics=diag)
