"""Frequency-space (Floquet) embedding of periodic drift matrices.

A periodic drift A(t) = A0 + sqrt(2) sum_n [Ac_n cos(n w t) + As_n sin(n w t)]
admits a periodic steady-state covariance V(t) expanded in the same harmonics.
Harmonic balance turns the periodic Lyapunov equation into a time-independent
one, A_F V_F + V_F A_F^T + N_F = 0, on the enlarged space whose blocks are the
DC component and the cosine/sine components of each retained harmonic.  The
period-averaged covariance is the DC (upper-left) block of V_F.

Block layout with truncation K (d = base dimension):

    block 0          DC
    blocks 2k-1, 2k  cosine / sine sector of harmonic k, k = 1..K

A_F carries A0 on every diagonal block, -/+ k w I rotation blocks inside each
harmonic pair, full-weight couplings between the DC block and the harmonics
of A, and 1/sqrt(2)-weighted couplings between harmonic sectors following the
trigonometric product rules.  The assembly is validated against direct
integration of the periodic Lyapunov ODE (see the test suite); note that the
eigenvalues of the truncated A_F are NOT a stability witness for the
underlying periodic system, which is why stability is checked on the
one-period propagator instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gaussian import CovarianceMatrix, generic_basis
from .lyapunov import UnstableSystemError, solve_lyapunov
from .model import DiffusionMatrix, DriftModel, stability_check

__all__ = [
    "FloquetSystem",
    "assemble_floquet_drift",
    "solve_floquet_steady_state",
    "convergence_scan",
    "ConvergenceScan",
    "ScanEntry",
]

#: successive-truncation difference below which the scan declares convergence
CONVERGENCE_THRESHOLD = 1e-6

#: relative residual of the embedded solve accepted as healthy
EMBEDDED_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class FloquetSystem:
    """Embedded drift and diffusion of a periodic model at truncation K."""

    base_dim: int
    truncation: int
    drift: np.ndarray = field(repr=False)
    diffusion: np.ndarray = field(repr=False)
    base_frequency: float

    def __post_init__(self):
        self.drift.flags.writeable = False
        self.diffusion.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.base_dim * (2 * self.truncation + 1)


def assemble_floquet_drift(model: DriftModel, truncation: int,
                           noise: DiffusionMatrix | None = None) -> FloquetSystem:
    """Build the frequency-space drift (and block-diagonal diffusion).

    The coupling rules follow from substituting the harmonic expansions of
    A(t) and r(t) into dr = A(t) r dt and matching trigonometric components:

    - DC row and column couple to harmonic n of A with full weight,
    - sectors k and m couple through harmonic n = |k -/+ m| with weight
      1/sqrt(2) and signs fixed by the product-to-sum identities,
    - rotation blocks -/+ k w I pair the cosine and sine sectors of each k.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    if model.is_constant:
        raise ValueError(
            "constant model has no harmonic content; solve it directly "
            "with the Lyapunov solver"
        )
    d = model.dim
    k_max = truncation
    nb = 2 * k_max + 1
    w = model.base_frequency
    af = np.zeros((d * nb, d * nb))
    isq = 1.0 / math.sqrt(2.0)

    def blk(i: int, j: int):
        return np.s_[i * d:(i + 1) * d, j * d:(j + 1) * d]

    for i in range(nb):
        af[blk(i, i)] += model.constant
    for k in range(1, k_max + 1):
        af[blk(2 * k - 1, 2 * k)] += -k * w * np.eye(d)
        af[blk(2 * k, 2 * k - 1)] += k * w * np.eye(d)
    for h in model.harmonics:
        n, c, s = h.order, h.cosine, h.sine
        if n <= k_max:
            af[blk(0, 2 * n - 1)] += c
            af[blk(0, 2 * n)] += s
            af[blk(2 * n - 1, 0)] += c
            af[blk(2 * n, 0)] += s
        for m in range(1, k_max + 1):
            for k in range(1, k_max + 1):
                if abs(n - m) == k:
                    af[blk(2 * k - 1, 2 * m - 1)] += isq * c
                    af[blk(2 * k - 1, 2 * m)] += isq * s
                if n + m == k:
                    af[blk(2 * k - 1, 2 * m - 1)] += isq * c
                    af[blk(2 * k - 1, 2 * m)] += -isq * s
                if m - n == k:
                    af[blk(2 * k, 2 * m)] += isq * c
                    af[blk(2 * k, 2 * m - 1)] += -isq * s
                if n - m == k:
                    af[blk(2 * k, 2 * m)] += -isq * c
                    af[blk(2 * k, 2 * m - 1)] += isq * s
                if n + m == k:
                    af[blk(2 * k, 2 * m)] += isq * c
                    af[blk(2 * k, 2 * m - 1)] += isq * s

    if noise is not None:
        if noise.dim != d:
            raise ValueError(f"dimension mismatch: drift {d}, diffusion {noise.dim}")
        nf = np.kron(np.eye(nb), noise.matrix)
    else:
        nf = np.zeros_like(af)
    return FloquetSystem(d, k_max, af, nf, w)


def solve_embedded(model: DriftModel, noise: DiffusionMatrix,
                   truncation: int) -> tuple[CovarianceMatrix, float]:
    """Solve the embedded equation; return the DC block and solve residual.

    The truncated embedding may carry spurious non-Hurwitz directions even
    for stable periodic systems, so the algebraic solve runs unguarded and
    is accepted on its relative residual instead.
    """
    sys = assemble_floquet_drift(model, truncation, noise)
    try:
        vf = solve_lyapunov(sys.drift, sys.diffusion, check_stability=False)
    except np.linalg.LinAlgError as exc:
        raise UnstableSystemError(
            float("nan"), f"embedded Lyapunov solve failed: {exc}"
        ) from exc
    r = np.linalg.norm(sys.drift @ vf + vf @ sys.drift.T + sys.diffusion)
    rel = float(r / max(np.linalg.norm(sys.diffusion), 1e-300))
    if not rel <= EMBEDDED_RESIDUAL_TOL:
        raise UnstableSystemError(
            float("nan"),
            f"embedded Lyapunov solve residual {rel:.3g} exceeds "
            f"{EMBEDDED_RESIDUAL_TOL}; solution rejected",
        )
    d = model.dim
    v0 = vf[:d, :d]
    v0 = (v0 + v0.T) / 2
    basis = model.basis if model.basis is not None else generic_basis(d // 2)
    return CovarianceMatrix(basis, v0), rel


def solve_floquet_steady_state(model: DriftModel, noise: DiffusionMatrix,
                               truncation: int, *,
                               check_stability: bool = True) -> CovarianceMatrix:
    """Period-averaged steady-state covariance of a periodic model.

    Solves the embedded Lyapunov equation and returns the symmetrized DC
    block.  Stability is certified on the one-period propagator before
    solving; the embedded solve itself is validated by its residual.

    Raises
    ------
    UnstableSystemError
        If the periodic system has a Floquet exponent with positive real
        part (no steady state), or the embedded solve is unhealthy.
    """
    if check_stability:
        res = stability_check(model)
        if not res.stable:
            raise UnstableSystemError(
                res.abscissa,
                f"periodic drift has a Floquet exponent with real part "
                f"{res.abscissa:.6g} rad/s; no steady state",
            )
    v, _ = solve_embedded(model, noise, truncation)
    return v


@dataclass(frozen=True)
class ScanEntry:
    truncation: int
    covariance: CovarianceMatrix
    successive_difference: float | None


@dataclass(frozen=True)
class ConvergenceScan:
    entries: tuple[ScanEntry, ...]
    production_truncation: int | None
    monotone: bool

    @property
    def converged(self) -> bool:
        return self.production_truncation is not None


def convergence_scan(model: DriftModel, noise: DiffusionMatrix,
                     truncations: Sequence[int],
                     threshold: float = CONVERGENCE_THRESHOLD) -> ConvergenceScan:
    """Solve at increasing truncations and report successive differences.

    The production truncation is the smallest K whose solution differs from
    the previous entry's by less than ``threshold`` in relative Frobenius
    norm.  A tail where differences rise back above the threshold after
    convergence is flagged by ``monotone = False``.  Non-convergence is
    reported (production truncation None), not raised.
    """
    ks = list(truncations)
    if ks != sorted(ks) or len(set(ks)) != len(ks):
        raise ValueError("truncations must be strictly increasing")
    entries: list[ScanEntry] = []
    production = None
    prev = None
    diffs = []
    for k in ks:
        v = solve_floquet_steady_state(model, noise, k, check_stability=False)
        diff = None
        if prev is not None:
            diff = float(np.linalg.norm(v.matrix - prev) / max(np.linalg.norm(prev), 1e-300))
            diffs.append(diff)
            if production is None and diff < threshold:
                production = k
        entries.append(ScanEntry(k, v, diff))
        prev = v.matrix
    monotone = True
    if production is not None:
        past = [d for k, d in zip(ks[1:], diffs) if k > production]
        monotone = all(d < threshold for d in past)
    return ConvergenceScan(tuple(entries), production, monotone)
