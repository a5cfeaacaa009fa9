"""Continuous-time algebraic Lyapunov equation A V + V A^T + N = 0.

The steady-state covariance matrix of a stable linear Langevin system
solves this equation.  The solve is a Schur-decomposition direct method
(Bartels-Stewart family via scipy / LAPACK trsyl), O(d^3) in the matrix
dimension, which keeps frequency-space embeddings of a few hundred rows
tractable.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .gaussian import CovarianceMatrix, generic_basis
from .model import DiffusionMatrix, DriftModel, stability_check

__all__ = ["UnstableSystemError", "Residual", "solve_lyapunov", "solve_steady_state", "residual"]

#: Hurwitz margin: the spectral abscissa must lie below -HURWITZ_RTOL * ||A||_F
HURWITZ_RTOL = 1e-12

#: output asymmetry beyond this relative level triggers a solver-health warning
ASYMMETRY_WARN_RTOL = 1e-8


class UnstableSystemError(RuntimeError):
    """No steady state: the drift is not Hurwitz.  Carries the abscissa."""

    def __init__(self, abscissa: float, message: str | None = None):
        self.abscissa = abscissa
        super().__init__(
            message or f"drift is not Hurwitz (spectral abscissa {abscissa:.6g} rad/s)"
        )


class Residual(NamedTuple):
    absolute: float
    relative: float


def solve_lyapunov(a: np.ndarray, n: np.ndarray, *, check_stability: bool = True) -> np.ndarray:
    """Solve A V + V A^T + N = 0 for plain arrays.

    The drift must be Hurwitz with margin (abscissa < -1e-12 ||A||_F);
    marginal cases are rejected rather than regularized.  The output is
    symmetrized unconditionally; asymmetry beyond 1e-8 relative raises a
    solver-health warning.
    """
    a = np.asarray(a, dtype=float)
    n = np.asarray(n, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"drift must be square, got {a.shape}")
    if n.shape != a.shape:
        raise ValueError(f"dimension mismatch: drift {a.shape}, diffusion {n.shape}")
    if check_stability:
        abscissa = float(np.max(np.linalg.eigvals(a).real))
        if not abscissa < -HURWITZ_RTOL * max(np.linalg.norm(a), 1.0):
            raise UnstableSystemError(abscissa)
    v = solve_continuous_lyapunov(a, -n)
    asym = np.linalg.norm(v - v.T)
    if asym > ASYMMETRY_WARN_RTOL * max(np.linalg.norm(v), 1.0):
        warnings.warn(
            f"Lyapunov solution asymmetry {asym:.3g} exceeds the health threshold",
            RuntimeWarning,
            stacklevel=2,
        )
    return (v + v.T) / 2


def solve_steady_state(model: DriftModel, noise: DiffusionMatrix) -> CovarianceMatrix:
    """Steady-state covariance of a time-independent model.

    Raises
    ------
    ValueError
        If the model carries harmonics (solve those in the Floquet space)
        or the dimensions disagree.
    UnstableSystemError
        If the drift is not Hurwitz with margin.
    """
    if not model.is_constant:
        raise ValueError(
            "model has harmonic content; use the Floquet solver for periodic drift"
        )
    if noise.dim != model.dim:
        raise ValueError(f"dimension mismatch: drift {model.dim}, diffusion {noise.dim}")
    v = solve_lyapunov(model.constant, noise.matrix)
    basis = model.basis if model.basis is not None else generic_basis(model.dim // 2)
    return CovarianceMatrix(basis, v)


def residual(a, v, n) -> Residual:
    """Frobenius norm of A V + V A^T + N, absolute and relative to ||N||_F."""
    a = a.constant if isinstance(a, DriftModel) else np.asarray(a, dtype=float)
    v = v.matrix if isinstance(v, CovarianceMatrix) else np.asarray(v, dtype=float)
    n = n.matrix if isinstance(n, DiffusionMatrix) else np.asarray(n, dtype=float)
    if a.shape != v.shape or a.shape != n.shape:
        raise ValueError(
            f"dimension mismatch: drift {a.shape}, covariance {v.shape}, diffusion {n.shape}"
        )
    r = np.linalg.norm(a @ v + v @ a.T + n)
    norm_n = np.linalg.norm(n)
    return Residual(float(r), float(r / norm_n) if norm_n > 0 else float(r))


def _check_stability_for(model: DriftModel):
    """Shared gate used by callers that want the stability_check route."""
    res = stability_check(model)
    if not res.stable:
        raise UnstableSystemError(res.abscissa)
    return res
