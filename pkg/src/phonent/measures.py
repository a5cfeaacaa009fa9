"""Entanglement and state diagnostics of the two-particle mechanical block.

Every formula takes the vacuum-normalized covariance matrix V (vacuum =
identity) over the basis (x1, p1, x2, p2); ordinary variances are V/2.
The factor-of-2 handling is therefore centralized here:

- EPR variance:  Delta = (1/2)[Var(x1+x2) + Var(p1-p2)] with Var from V/2,
  which reduces to (1/4)[V11 + V33 + 2 V13 + V22 + V44 - 2 V24]; values
  below 1 certify entanglement.
- mean phonon numbers: <n1> = (V11 + V22 - 2)/4, <n2> = (V33 + V44 - 2)/4.
- the phonon-number-difference variance reduces to a quadratic form in the
  entries of V through the Gaussian fourth-moment identity.

The logarithmic negativity uses the natural logarithm; the smallest
partially transposed symplectic eigenvalue is reported alongside so any
other base can be recovered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian import (
    CovarianceMatrix,
    InvalidStateError,
    marginal,
    partial_transpose,
    purity,
    symplectic_eigenvalues,
)

__all__ = [
    "EntanglementReport",
    "log_negativity",
    "epr_variance",
    "nrf",
    "mean_phonons",
    "full_report",
]

#: symplectic eigenvalues may dip this far below 1 before V counts as unphysical
PHYSICALITY_TOL = 1e-9

#: total phonon number below which the noise reduction factor is undefined (0/0)
NRF_DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class EntanglementReport:
    """Diagnostics of one steady-state solution.

    Measure fields are None when no steady state exists (stable = False) or,
    for ``nrf``, when the mean phonon number vanishes and the noise reduction
    factor is a 0/0 form.  ``nu_min`` is the smallest symplectic eigenvalue
    of the partial transpose, from which the logarithmic negativity in any
    base can be recovered.
    """

    stable: bool
    log_negativity: float | None = None
    epr_variance: float | None = None
    nrf: float | None = None
    purity: float | None = None
    mean_phonons: tuple[float, float] | None = None
    nu_min: float | None = None


def _require_two_mode_physical(v: CovarianceMatrix) -> None:
    if v.mode_count != 2:
        raise ValueError(f"expected a two-mode covariance, got {v.mode_count} modes")
    nus = symplectic_eigenvalues(v)
    if np.min(nus) < 1.0 - PHYSICALITY_TOL:
        raise InvalidStateError(
            f"unphysical state: smallest symplectic eigenvalue {np.min(nus):.12g} < 1"
        )


def log_negativity(v: CovarianceMatrix) -> float:
    """E_N = max(0, -ln nu_min) of the partially transposed state."""
    en, _ = _log_negativity_nu(v)
    return en


def _log_negativity_nu(v: CovarianceMatrix) -> tuple[float, float]:
    _require_two_mode_physical(v)
    nus = symplectic_eigenvalues(partial_transpose(v, 1))
    nu_min = float(np.min(nus))
    return max(0.0, -np.log(nu_min)), nu_min


def epr_variance(v: CovarianceMatrix) -> float:
    """Duan EPR variance (1/2)[Var(x1+x2) + Var(p1-p2)], unity for vacuum."""
    _require_two_mode_physical(v)
    m = v.matrix
    return 0.25 * (m[0, 0] + m[2, 2] + 2 * m[0, 2] + m[1, 1] + m[3, 3] - 2 * m[1, 3])


def nrf(v: CovarianceMatrix) -> float | None:
    """Noise reduction factor: Var(n1 - n2) / <n1 + n2>.

    Values below one signal sub-Poissonian phonon-number correlations; the
    factor vanishes for pure two-mode squeezing.  Returns None for the
    vacuum-like 0/0 case.
    """
    _require_two_mode_physical(v)
    m = v.matrix
    numerator = (
        (m[0, 0] ** 2 + m[1, 1] ** 2 + m[2, 2] ** 2 + m[3, 3] ** 2) / 8.0
        + (m[0, 1] ** 2 + m[2, 3] ** 2
           - m[0, 2] ** 2 - m[0, 3] ** 2 - m[1, 2] ** 2 - m[1, 3] ** 2) / 4.0
        - 0.5
    )
    n1, n2 = mean_phonons(v)
    denominator = n1 + n2
    if denominator < NRF_DENOMINATOR_FLOOR:
        return None
    return numerator / denominator


def mean_phonons(v: CovarianceMatrix) -> tuple[float, float]:
    """Mean phonon numbers (<n1>, <n2>) from the quadrature variances."""
    m = v.matrix
    return (
        (m[0, 0] + m[1, 1] - 2.0) / 4.0,
        (m[2, 2] + m[3, 3] - 2.0) / 4.0,
    )


def full_report(v_joint: CovarianceMatrix | None,
                mech_modes: Sequence[int] = (-2, -1),
                stable: bool = True) -> EntanglementReport:
    """Marginalize to the mechanical pair and evaluate every measure.

    ``mech_modes`` selects the two mechanical modes in the joint basis
    (defaults to the last two).  When ``stable`` is False the measure fields
    stay empty.
    """
    if not stable:
        return EntanglementReport(stable=False)
    if v_joint is None:
        raise ValueError("a covariance matrix is required when stable=True")
    modes = [i % v_joint.mode_count for i in mech_modes]
    if len(modes) != 2:
        raise ValueError("exactly two mechanical modes are required")
    vm = marginal(v_joint, modes)
    en, nu_min = _log_negativity_nu(vm)
    return EntanglementReport(
        stable=True,
        log_negativity=en,
        epr_variance=epr_variance(vm),
        nrf=nrf(vm),
        purity=purity(vm),
        mean_phonons=mean_phonons(vm),
        nu_min=nu_min,
    )
