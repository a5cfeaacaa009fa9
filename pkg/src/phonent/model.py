"""Drift and diffusion matrices for two levitated particles in a cavity.

Two mechanical modes couple to a first cavity mode by coherent scattering
(rates lambda1, lambda2; beam-splitter and two-mode-squeezing channels) and
optionally to a second, dispersively coupled cavity mode (rates g1, g2).
Builders return the drift of the linear Langevin dynamics dr = A(t) r dt + noise
in one of two quadrature bases:

    6x6:  (X1, Y1, x1, p1, x2, p2)            one cavity mode
    8x8:  (X1, Y1, X2, Y2, x1, p1, x2, p2)    two cavity modes

Time-periodic drifts are stored as a constant part plus harmonic
coefficient matrices with the convention

    A(t) = A0 + sqrt(2) * sum_n [Ac_n cos(n w t) + As_n sin(n w t)],

i.e. the sqrt(2) is absorbed into the stored matrices at build time so the
Floquet assembler can treat every harmonic uniformly.

All rates are angular frequencies in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .gaussian import QuadratureBasis

__all__ = [
    "SystemParams",
    "DriftModel",
    "Harmonic",
    "DiffusionMatrix",
    "BogoliubovData",
    "StabilityResult",
    "cs_basis",
    "full_basis",
    "build_rwa_cs_drift",
    "build_rwa_full_drift",
    "build_counterrotating_drift",
    "build_detuned_drift_mode2_resonant",
    "build_detuned_drift_mode1_resonant",
    "build_diffusion",
    "bogoliubov",
    "stability_check",
]

TWO_PI = 2.0 * math.pi

#: spectral abscissa above this value counts as unstable (rad/s)
STABILITY_TOL = 1e-12


def cs_basis() -> QuadratureBasis:
    """Basis (X1, Y1, x1, p1, x2, p2) of the single-cavity model."""
    return QuadratureBasis(("cav1", "mech1", "mech2"))


def full_basis() -> QuadratureBasis:
    """Basis (X1, Y1, X2, Y2, x1, p1, x2, p2) of the two-cavity model."""
    return QuadratureBasis(("cav1", "cav2", "mech1", "mech2"))


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and occupations of the two-particle model.

    Parameters are angular frequencies in rad/s except the dimensionless
    thermal occupations n1, n2.  ``delta12`` stores omega1 - omega2
    redundantly and is validated against the frequencies on construction.
    """

    lambda1: float
    lambda2: float
    kappa1: float
    omega1: float
    gamma1: float
    g1: float = 0.0
    g2: float = 0.0
    kappa2: float = 0.0
    omega2: float | None = None
    gamma2: float | None = None
    n1: float = 0.0
    n2: float | None = None
    delta12: float | None = None

    def __post_init__(self):
        if self.omega2 is None:
            object.__setattr__(self, "omega2", self.omega1)
        if self.gamma2 is None:
            object.__setattr__(self, "gamma2", self.gamma1)
        if self.n2 is None:
            object.__setattr__(self, "n2", self.n1)
        for name in ("lambda1", "lambda2", "g1", "g2", "kappa1", "kappa2",
                     "gamma1", "gamma2", "n1", "n2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.omega1 <= 0 or self.omega2 <= 0:
            raise ValueError("mechanical frequencies must be positive")
        detuning = self.omega1 - self.omega2
        if self.delta12 is None:
            object.__setattr__(self, "delta12", detuning)
        else:
            scale = max(abs(detuning), abs(self.delta12), self.omega1)
            if abs(self.delta12 - detuning) > 1e-9 * scale:
                raise ValueError(
                    f"delta12 = {self.delta12} inconsistent with omega1 - omega2 = {detuning}"
                )

    @property
    def q1(self) -> float:
        return self.omega1 / self.gamma1 if self.gamma1 > 0 else math.inf

    @property
    def q2(self) -> float:
        return self.omega2 / self.gamma2 if self.gamma2 > 0 else math.inf

    @classmethod
    def from_khz(cls, *, lambda1, lambda2=0.0, g1=0.0, g2=0.0,
                 kappa1, kappa2=None, omega1, omega2=None, delta12=None,
                 q1, q2=None, n1=0.0, n2=None) -> "SystemParams":
        """Build from rates quoted as frequency / 2 pi in kHz.

        Damping rates derive from quality factors, gamma_j = Omega_j / Q_j.
        Unspecified second-mode values default to the first mode's
        (kappa2 = kappa1, q2 = q1, n2 = n1).  ``delta12`` (kHz) may be given
        instead of ``omega2``.
        """
        to_rad = lambda khz: TWO_PI * 1e3 * khz
        w1 = to_rad(omega1)
        if omega2 is not None and delta12 is not None:
            if abs(to_rad(omega2) - (w1 - to_rad(delta12))) > 1e-9 * w1:
                raise ValueError("omega2 and delta12 are inconsistent")
        if omega2 is not None:
            w2 = to_rad(omega2)
        elif delta12 is not None:
            w2 = w1 - to_rad(delta12)
        else:
            w2 = w1
        if w2 <= 0:
            raise ValueError("omega2 must be positive; check delta12")
        q2 = q1 if q2 is None else q2
        return cls(
            lambda1=to_rad(lambda1),
            lambda2=to_rad(lambda2),
            g1=to_rad(g1),
            g2=to_rad(g2),
            kappa1=to_rad(kappa1),
            kappa2=to_rad(kappa1 if kappa2 is None else kappa2),
            omega1=w1,
            omega2=w2,
            gamma1=w1 / q1,
            gamma2=w2 / q2,
            n1=float(n1),
            n2=float(n1 if n2 is None else n2),
        )

    def replace(self, **changes) -> "SystemParams":
        """Copy with fields replaced; delta12 is re-derived unless given."""
        if ("omega1" in changes or "omega2" in changes) and "delta12" not in changes:
            changes["delta12"] = None
        return replace(self, **changes)


@dataclass(frozen=True)
class Harmonic:
    """Cosine/sine coefficient matrices of one harmonic order."""

    order: int
    cosine: np.ndarray = field(repr=False)
    sine: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("harmonic order must be >= 1")
        c = np.array(self.cosine, dtype=float)
        s = np.array(self.sine, dtype=float)
        if c.shape != s.shape or c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("cosine and sine matrices must be square and equally sized")
        c.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "cosine", c)
        object.__setattr__(self, "sine", s)


@dataclass(frozen=True)
class DriftModel:
    """Constant drift plus an optional harmonic series at one base frequency."""

    constant: np.ndarray = field(repr=False)
    harmonics: tuple[Harmonic, ...] = ()
    base_frequency: float = 0.0
    basis: QuadratureBasis | None = None

    def __post_init__(self):
        a = np.array(self.constant, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"drift matrix must be square, got {a.shape}")
        a.flags.writeable = False
        object.__setattr__(self, "constant", a)
        object.__setattr__(self, "harmonics", tuple(self.harmonics))
        orders = [h.order for h in self.harmonics]
        if len(set(orders)) != len(orders):
            raise ValueError("duplicate harmonic orders")
        for h in self.harmonics:
            if h.cosine.shape != a.shape:
                raise ValueError("harmonic matrices must match the constant part's shape")
        if self.harmonics and self.base_frequency <= 0:
            raise ValueError("harmonic model needs a positive base frequency")
        if self.basis is not None and self.basis.dim != a.shape[0]:
            raise ValueError("basis dimension does not match the drift matrix")

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    @property
    def is_constant(self) -> bool:
        return not self.harmonics

    @property
    def max_order(self) -> int:
        return max((h.order for h in self.harmonics), default=0)

    def at(self, t: float) -> np.ndarray:
        """Evaluate A(t) = A0 + sqrt(2) sum_n [Ac_n cos + As_n sin](n w t)."""
        a = np.array(self.constant)
        for h in self.harmonics:
            phase = h.order * self.base_frequency * t
            a += math.sqrt(2.0) * (h.cosine * math.cos(phase) + h.sine * math.sin(phase))
        return a

    def rate_scale(self) -> float:
        """Frobenius-norm bound on ||A(t)||, used for step-size control."""
        s = np.linalg.norm(self.constant)
        for h in self.harmonics:
            s += math.sqrt(2.0) * (np.linalg.norm(h.cosine) + np.linalg.norm(h.sine))
        return s


@dataclass(frozen=True)
class DiffusionMatrix:
    """Diagonal input-noise matrix N (rad/s)."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim == 1:
            m = np.diag(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"diffusion matrix must be square, got {m.shape}")
        if np.any(m - np.diag(np.diag(m)) != 0):
            raise ValueError("diffusion matrix must be diagonal")
        if np.any(np.diag(m) < 0):
            raise ValueError("diffusion entries must be nonnegative")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix)


class BogoliubovData(NamedTuple):
    """Effective coupling and weights of the cooled collective mode."""

    lambda_eff: float
    weights: tuple[float, float]


class StabilityResult(NamedTuple):
    stable: bool
    abscissa: float


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _decay_diagonal(p: SystemParams, two_cavities: bool) -> np.ndarray:
    if two_cavities:
        rates = [p.kappa1, p.kappa1, p.kappa2, p.kappa2,
                 p.gamma1, p.gamma1, p.gamma2, p.gamma2]
    else:
        rates = [p.kappa1, p.kappa1, p.gamma1, p.gamma1, p.gamma2, p.gamma2]
    return np.diag([-r / 2.0 for r in rates])


def build_rwa_cs_drift(p: SystemParams) -> DriftModel:
    """6x6 coherent-scattering drift under the rotating wave approximation.

    Basis (X1, Y1, x1, p1, x2, p2); lambda1 couples the cavity to the first
    particle as a beam splitter, lambda2 to the second as two-mode squeezing.
    """
    a = _decay_diagonal(p, two_cavities=False)
    l1, l2 = p.lambda1, p.lambda2
    a[0, 3] = -l1
    a[0, 5] = l2
    a[1, 2] = l1
    a[1, 4] = l2
    a[2, 1] = -l1
    a[3, 0] = l1
    a[4, 1] = l2
    a[5, 0] = l2
    return DriftModel(a, basis=cs_basis())


def build_rwa_full_drift(p: SystemParams) -> DriftModel:
    """8x8 drift with both cavities under the rotating wave approximation.

    Basis (X1, Y1, X2, Y2, x1, p1, x2, p2); g1, g2 are the beam-splitter
    couplings of the second cavity to each particle.
    """
    a = _decay_diagonal(p, two_cavities=True)
    l1, l2, g1, g2 = p.lambda1, p.lambda2, p.g1, p.g2
    a[0, 5] = -l1
    a[0, 7] = l2
    a[1, 4] = l1
    a[1, 6] = l2
    a[2, 5] = g1
    a[2, 7] = g2
    a[3, 4] = -g1
    a[3, 6] = -g2
    a[4, 1] = -l1
    a[4, 3] = g1
    a[5, 0] = l1
    a[5, 2] = -g1
    a[6, 1] = l2
    a[6, 3] = g2
    a[7, 0] = l2
    a[7, 2] = -g2
    return DriftModel(a, basis=full_basis())


def build_counterrotating_drift(p: SystemParams) -> DriftModel:
    """8x8 drift retaining the terms oscillating at 2 Omega1.

    Requires omega1 = omega2.  The constant part equals the full RWA drift;
    one harmonic at base frequency 2 Omega1 carries the counterrotating
    couplings (stored with the sqrt(2) convention absorbed).
    """
    if abs(p.omega1 - p.omega2) > 1e-9 * p.omega1:
        raise ValueError(
            "counterrotating model requires equal mechanical frequencies; "
            "use a detuned builder for omega1 != omega2"
        )
    a0 = build_rwa_full_drift(p)
    l1, l2, g1, g2 = p.lambda1, p.lambda2, p.g1, p.g2
    c = np.zeros((8, 8))
    s = np.zeros((8, 8))
    # cos(2 Omega1 t) coefficients
    c[0, 5] = l1
    c[0, 7] = -l2
    c[1, 4] = l1
    c[1, 6] = l2
    c[2, 5] = -g1
    c[2, 7] = -g2
    c[3, 4] = -g1
    c[3, 6] = -g2
    c[4, 1] = l1
    c[4, 3] = -g1
    c[5, 0] = l1
    c[5, 2] = -g1
    c[6, 1] = -l2
    c[6, 3] = -g2
    c[7, 0] = l2
    c[7, 2] = -g2
    # sin(2 Omega1 t) coefficients
    s[0, 4] = -l1
    s[0, 6] = l2
    s[1, 5] = l1
    s[1, 7] = l2
    s[2, 4] = g1
    s[2, 6] = g2
    s[3, 5] = -g1
    s[3, 7] = -g2
    s[4, 0] = -l1
    s[4, 2] = g1
    s[5, 1] = l1
    s[5, 3] = -g1
    s[6, 0] = -l2
    s[6, 2] = g2
    s[7, 1] = -l2
    s[7, 3] = -g2
    rt2 = math.sqrt(2.0)
    harm = Harmonic(1, c / rt2, s / rt2)
    return DriftModel(a0.constant, (harm,), base_frequency=2.0 * p.omega1, basis=full_basis())


def _detuned_model(p: SystemParams, a0: np.ndarray, c: np.ndarray, s: np.ndarray) -> DriftModel:
    if p.delta12 == 0.0:
        # resonant limit: cos -> 1, sin -> 0 folds the harmonic into the constant part
        return DriftModel(a0 + c, basis=full_basis())
    base = abs(p.delta12)
    if p.delta12 < 0:
        s = -s  # cos is even, sin is odd: keep base_frequency positive
    rt2 = math.sqrt(2.0)
    return DriftModel(a0, (Harmonic(1, c / rt2, s / rt2),), base_frequency=base, basis=full_basis())


def build_detuned_drift_mode2_resonant(p: SystemParams) -> DriftModel:
    """8x8 drift with the second cavity resonant with the second particle.

    The g1 coupling rotates at delta12 = Omega1 - Omega2 and is stored as a
    harmonic at base |delta12|; everything else is constant.  delta12 = 0
    degenerates to the full RWA drift.
    """
    a0 = build_rwa_full_drift(p.replace(g1=0.0)).constant
    g1 = p.g1
    c = np.zeros((8, 8))
    s = np.zeros((8, 8))
    c[2, 5] = g1
    c[3, 4] = -g1
    c[4, 3] = g1
    c[5, 2] = -g1
    s[2, 4] = -g1
    s[3, 5] = -g1
    s[4, 2] = g1
    s[5, 3] = g1
    return _detuned_model(p, a0, c, s)


def build_detuned_drift_mode1_resonant(p: SystemParams) -> DriftModel:
    """8x8 drift with the second cavity resonant with the first particle.

    The g2 coupling rotates at delta12; the g1 coupling is static.
    """
    a0 = build_rwa_full_drift(p.replace(g2=0.0)).constant
    g2 = p.g2
    c = np.zeros((8, 8))
    s = np.zeros((8, 8))
    c[2, 7] = g2
    c[3, 6] = -g2
    c[6, 3] = g2
    c[7, 2] = -g2
    s[2, 6] = g2
    s[3, 7] = g2
    s[6, 2] = -g2
    s[7, 3] = -g2
    return _detuned_model(p, a0, c, s)


def build_diffusion(p: SystemParams, n_cavities: int = 2) -> DiffusionMatrix:
    """Input-noise matrix diag(kappa, ..., gamma_j (2 n_j + 1), ...)."""
    if n_cavities not in (1, 2):
        raise ValueError("n_cavities must be 1 or 2")
    mech = [p.gamma1 * (2 * p.n1 + 1), p.gamma1 * (2 * p.n1 + 1),
            p.gamma2 * (2 * p.n2 + 1), p.gamma2 * (2 * p.n2 + 1)]
    if n_cavities == 2:
        diag = [p.kappa1, p.kappa1, p.kappa2, p.kappa2] + mech
    else:
        diag = [p.kappa1, p.kappa1] + mech
    return DiffusionMatrix(np.diag(diag))


def bogoliubov(p: SystemParams) -> BogoliubovData:
    """Effective coupling lambda_eff = sqrt(lambda1^2 - lambda2^2) and weights.

    The cooled collective mode is (lambda1 b1 + lambda2 b2')/lambda_eff where
    b2' is the conjugated second mode; it is well defined only for
    lambda1 > lambda2.
    """
    if p.lambda2 >= p.lambda1:
        raise ValueError(
            f"lambda2 = {p.lambda2} must be smaller than lambda1 = {p.lambda1} "
            "for a well-defined collective mode (and dynamical stability)"
        )
    lam_eff = math.sqrt(p.lambda1**2 - p.lambda2**2)
    return BogoliubovData(lam_eff, (p.lambda1 / lam_eff, p.lambda2 / lam_eff))


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------

#: hard cap on one-period propagator steps before giving up
_MONODROMY_MAX_STEPS = 2_000_000


def _floquet_exponents_real(m: DriftModel) -> np.ndarray:
    """Real parts of the Floquet exponents from the one-period propagator.

    Integrates dPhi/dt = A(t) Phi over one period with fixed-step RK4 and
    returns log|eig(Phi(T))| / T.
    """
    base = m.base_frequency
    period = TWO_PI / base
    scale = max(base * m.max_order, m.rate_scale())
    steps = int(math.ceil(period * scale / (0.01 * TWO_PI)))
    steps = max(steps, 64)
    if steps > _MONODROMY_MAX_STEPS:
        raise ValueError(
            "base frequency too small relative to the drift rates to "
            "integrate one period; treat the model as quasi-constant instead"
        )
    dt = period / steps
    phi = np.eye(m.dim)
    t = 0.0
    for _ in range(steps):
        k1 = m.at(t) @ phi
        k2 = m.at(t + dt / 2) @ (phi + dt / 2 * k1)
        k3 = m.at(t + dt / 2) @ (phi + dt / 2 * k2)
        k4 = m.at(t + dt) @ (phi + dt * k3)
        phi = phi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    mu = np.linalg.eigvals(phi)
    return np.log(np.abs(mu)) / period


def stability_check(m: DriftModel | np.ndarray, tol: float = STABILITY_TOL) -> StabilityResult:
    """Decide whether the drift admits a steady state.

    For constant models this is the spectral abscissa of the drift matrix.
    For harmonic models the abscissa is the largest real part of the Floquet
    exponents, obtained from the one-period propagator: the spectrum of the
    truncated frequency-space embedding is not a reliable stability witness
    (rotating couplings leave spurious unstable directions in it at every
    truncation), whereas the propagator is exact up to integration error.
    """
    if isinstance(m, np.ndarray):
        m = DriftModel(m)
    if m.is_constant:
        abscissa = float(np.max(np.linalg.eigvals(m.constant).real))
    else:
        abscissa = float(np.max(_floquet_exponents_real(m)))
    return StabilityResult(bool(abscissa < -tol), abscissa)
