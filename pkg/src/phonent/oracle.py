"""Independent verification engines for the steady-state solvers.

Two slow-but-simple routes compute the same covariance matrices as the
algebraic solvers:

- direct fixed-step integration of the (periodic) Lyapunov ODE
  dV/dt = A(t) V + V A(t)^T + N, and
- Euler-Maruyama Monte Carlo over the linear Langevin equations.

Neither shares code with the Schur-based solver or the frequency-space
assembler, so agreement between the routes validates both.

Randomness comes from numpy's default generator (PCG64); fixed seeds give
bit-identical results.  Trajectories are propagated in one vectorized batch
with a single draw order, so results do not depend on any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gaussian import CovarianceMatrix
from .lyapunov import UnstableSystemError
from .model import DiffusionMatrix, DriftModel

__all__ = [
    "OdeResult",
    "MonteCarloResult",
    "integrate_lyapunov_ode",
    "monte_carlo_covariance",
    "sample_fourth_moments",
]

TWO_PI = 2.0 * math.pi

#: dt must resolve the fastest dynamical scale by at least this factor
STEP_RESOLUTION = 0.01

#: ||V|| growth beyond this factor over the initial scale aborts the run
DIVERGENCE_FACTOR = 1e6


def _max_rate(model: DriftModel) -> float:
    return max(model.base_frequency * model.max_order, model.rate_scale())


def _check_dt(model: DriftModel, dt: float) -> None:
    limit = STEP_RESOLUTION * TWO_PI / _max_rate(model)
    if dt > limit * (1 + 1e-12):
        raise ValueError(
            f"dt = {dt:.3g} s too coarse for the fastest scale; need dt <= {limit:.3g} s"
        )


@dataclass(frozen=True)
class OdeResult:
    """Trajectory of V(t), its final value, and the period-averaged component.

    For periodic models ``times``/``covariances`` sample the final period and
    ``dc_component`` is the average over it; for constant models the samples
    span the whole run and ``dc_component`` equals the final covariance.
    """

    times: np.ndarray = field(repr=False)
    covariances: np.ndarray = field(repr=False)
    final: np.ndarray = field(repr=False)
    dc_component: np.ndarray = field(repr=False)


def _rk4_step(model: DriftModel, n: np.ndarray, t: float, v: np.ndarray, dt: float) -> np.ndarray:
    def f(tt, vv):
        a = model.at(tt)
        return a @ vv + vv @ a.T + n

    k1 = f(t, v)
    k2 = f(t + dt / 2, v + dt / 2 * k1)
    k3 = f(t + dt / 2, v + dt / 2 * k2)
    k4 = f(t + dt, v + dt * k3)
    return v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_lyapunov_ode(model: DriftModel, noise: DiffusionMatrix,
                           v0: CovarianceMatrix | np.ndarray | None,
                           t_end: float, dt: float) -> OdeResult:
    """Integrate dV/dt = A(t) V + V A(t)^T + N with fixed-step RK4.

    For periodic models dt is snapped down to divide the period exactly and
    t_end is rounded up to a whole number of periods, so the final-period
    average is a clean DC component.  Divergence (||V|| beyond 1e6 times the
    initial scale) raises ``UnstableSystemError``.
    """
    if t_end <= 0 or dt <= 0:
        raise ValueError("t_end and dt must be positive")
    _check_dt(model, dt)
    n = noise.matrix
    if noise.dim != model.dim:
        raise ValueError(f"dimension mismatch: drift {model.dim}, diffusion {noise.dim}")
    if v0 is None:
        v = np.zeros((model.dim, model.dim))
    elif isinstance(v0, CovarianceMatrix):
        v = np.array(v0.matrix)
    else:
        v = np.array(v0, dtype=float)
    scale0 = max(np.linalg.norm(v), 1.0)

    if model.is_constant:
        steps = int(math.ceil(t_end / dt))
        stride = max(1, steps // 256)
        times, covs = [], []
        t = 0.0
        for i in range(steps):
            v = _rk4_step(model, n, t, v, dt)
            t += dt
            if np.linalg.norm(v) > DIVERGENCE_FACTOR * scale0:
                raise UnstableSystemError(
                    float("nan"), f"covariance diverged at t = {t:.3g} s; no steady state"
                )
            if (i + 1) % stride == 0 or i == steps - 1:
                times.append(t)
                covs.append(v.copy())
        final = (v + v.T) / 2
        return OdeResult(np.array(times), np.array(covs), final, final)

    period = TWO_PI / model.base_frequency
    m_steps = int(math.ceil(period / dt))
    dt_eff = period / m_steps
    n_periods = max(1, int(math.ceil(t_end / period)))
    t = 0.0
    v = np.asarray(v, dtype=float)
    for _ in range(n_periods - 1):
        for _ in range(m_steps):
            v = _rk4_step(model, n, t, v, dt_eff)
            t += dt_eff
        if np.linalg.norm(v) > DIVERGENCE_FACTOR * scale0:
            raise UnstableSystemError(
                float("nan"), f"covariance diverged at t = {t:.3g} s; no steady state"
            )
    times, covs = [], []
    acc = np.zeros_like(v)
    for _ in range(m_steps):
        times.append(t)
        covs.append((v + v.T) / 2)
        acc += v
        v = _rk4_step(model, n, t, v, dt_eff)
        t += dt_eff
    dc = acc / m_steps
    return OdeResult(np.array(times), np.array(covs), (v + v.T) / 2, (dc + dc.T) / 2)


@dataclass(frozen=True)
class MonteCarloResult:
    """Vacuum-normalized sample covariance 2 Cov(r) with per-entry errors."""

    covariance: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    n_trajectories: int
    seed: int


def monte_carlo_covariance(model: DriftModel, noise: DiffusionMatrix,
                           n_traj: int, t_end: float, dt: float,
                           seed: int) -> MonteCarloResult:
    """Euler-Maruyama estimate of the steady-state covariance.

    Integrates dr = A(t) r dt + dW for ``n_traj`` trajectories from r = 0.
    The Wiener increments have covariance (N/2) dt, the symmetrized spectral
    density of the vacuum-normalized input noise, so the returned sample
    covariance 2 Cov(r) estimates the same V that solves the Lyapunov
    equation with diffusion N.  Standard errors are per entry, from the
    sample spread of the r_i r_j products.
    """
    if n_traj < 2:
        raise ValueError("need at least two trajectories")
    _check_dt(model, dt)
    if noise.dim != model.dim:
        raise ValueError(f"dimension mismatch: drift {model.dim}, diffusion {noise.dim}")
    d = model.dim
    steps = int(math.ceil(t_end / dt))
    rng = np.random.default_rng(seed)
    amp = np.sqrt(noise.diagonal * dt / 2.0)
    r = np.zeros((n_traj, d))
    t = 0.0
    if model.is_constant:
        prop = np.eye(d) + dt * model.constant.T
        for _ in range(steps):
            r = r @ prop + rng.standard_normal((n_traj, d)) * amp
    else:
        for _ in range(steps):
            r = r + dt * (r @ model.at(t).T) + rng.standard_normal((n_traj, d)) * amp
            t += dt
    prods = 2.0 * r[:, :, None] * r[:, None, :]
    cov = prods.mean(axis=0)
    se = prods.std(axis=0, ddof=1) / math.sqrt(n_traj)
    return MonteCarloResult((cov + cov.T) / 2, (se + se.T) / 2, n_traj, seed)


def sample_fourth_moments(v: CovarianceMatrix | np.ndarray,
                          indices: Sequence[int], n_samples: int,
                          seed: int) -> tuple[float, float]:
    """Empirical nested-anticommutator fourth moment with its standard error.

    Draws zero-mean Gaussian samples with ordinary covariance V/2 and
    estimates 8 <z_i z_j z_k z_l>, which for Gaussian statistics equals the
    closed form 2 (V_ij V_kl + V_ik V_jl + V_il V_jk).
    """
    m = v.matrix if isinstance(v, CovarianceMatrix) else np.asarray(v, dtype=float)
    i, j, k, l = indices
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(m / 2.0)
    z = rng.standard_normal((n_samples, m.shape[0])) @ chol.T
    prods = 8.0 * z[:, i] * z[:, j] * z[:, k] * z[:, l]
    return float(prods.mean()), float(prods.std(ddof=1) / math.sqrt(n_samples))
