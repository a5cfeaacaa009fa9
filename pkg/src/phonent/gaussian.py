"""Covariance-matrix algebra for Gaussian states of bosonic modes.

All covariance matrices use the vacuum-normalized convention

    V_jk = <r_j r_k + r_k r_j> - 2 <r_j><r_k>,

so the vacuum state has V = identity and ordinary variances are V_jj / 2.
The quadrature vector is ordered mode by mode, position-like then
momentum-like: (x_1, p_1, x_2, p_2, ...).  A state is physical when
V + i*Omega >= 0, with Omega the block-diagonal symplectic form built from
2x2 blocks [[0, 1], [-1, 0]].
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InvalidStateError",
    "QuadratureBasis",
    "CovarianceMatrix",
    "symplectic_form",
    "symplectic_eigenvalues",
    "partial_transpose",
    "marginal",
    "purity",
    "gaussian_fourth_moment",
    "vacuum_cov",
    "thermal_cov",
    "two_mode_squeezed_cov",
    "to_text",
    "from_text",
]

#: relative asymmetry accepted (and symmetrized away) on construction
SYMMETRY_RTOL = 1e-10

#: relative tolerance for pairing +/- i*nu eigenvalues of Omega @ V
PAIRING_RTOL = 1e-9

#: slack allowed below nu = 1 before a state is called unphysical
PHYSICALITY_TOL = 1e-9


class InvalidStateError(ValueError):
    """Raised when a matrix does not describe a valid Gaussian state."""


@dataclass(frozen=True)
class QuadratureBasis:
    """Ordered quadrature labels for a register of bosonic modes.

    Each mode named in ``modes`` contributes an adjacent (position-like,
    momentum-like) pair, in that order.
    """

    modes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(str(m) for m in self.modes))
        if len(self.modes) == 0:
            raise ValueError("basis needs at least one mode")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"duplicate mode names in {self.modes}")

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    @property
    def dim(self) -> int:
        return 2 * len(self.modes)

    @property
    def labels(self) -> tuple[tuple[str, str], ...]:
        """(mode, kind) pairs, kind in {'x', 'p'}."""
        out = []
        for m in self.modes:
            out.append((m, "x"))
            out.append((m, "p"))
        return tuple(out)

    def index(self, mode: str, kind: str) -> int:
        """Row/column index of one quadrature; ``kind`` is 'x' or 'p'."""
        if kind not in ("x", "p"):
            raise ValueError("kind must be 'x' or 'p'")
        return 2 * self.modes.index(mode) + (0 if kind == "x" else 1)

    def subset(self, mode_indices: Sequence[int]) -> "QuadratureBasis":
        return QuadratureBasis(tuple(self.modes[i] for i in mode_indices))


def generic_basis(mode_count: int, prefix: str = "mode") -> QuadratureBasis:
    """Basis with synthesized mode names mode1, mode2, ..."""
    return QuadratureBasis(tuple(f"{prefix}{i+1}" for i in range(mode_count)))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric, vacuum-normalized covariance matrix over a quadrature basis.

    The matrix is symmetrized as (V + V.T)/2 on construction; relative
    asymmetry beyond ``SYMMETRY_RTOL`` is rejected.  Instances are immutable
    (the stored array is marked read-only) and safe to share across threads.
    """

    basis: QuadratureBasis
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"covariance matrix must be square, got {m.shape}")
        if m.shape[0] != self.basis.dim:
            raise InvalidStateError(
                f"matrix dimension {m.shape[0]} does not match basis dimension {self.basis.dim}"
            )
        scale = max(np.linalg.norm(m), 1.0)
        if np.linalg.norm(m - m.T) > SYMMETRY_RTOL * scale:
            raise InvalidStateError("matrix is not symmetric within tolerance")
        m = (m + m.T) / 2
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def mode_count(self) -> int:
        return self.basis.mode_count

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        """True when every symplectic eigenvalue is >= 1 - tol."""
        try:
            nus = symplectic_eigenvalues(self)
        except InvalidStateError:
            return False
        return bool(np.min(nus) >= 1.0 - tol)


def symplectic_form(mode_count: int) -> np.ndarray:
    """Block-diagonal symplectic form with 2x2 blocks [[0, 1], [-1, 0]]."""
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(mode_count), j)


def _as_array(v) -> tuple[np.ndarray, int]:
    if isinstance(v, CovarianceMatrix):
        return v.matrix, v.mode_count
    a = np.asarray(v, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise InvalidStateError(f"expected an even-dimensional square matrix, got {a.shape}")
    return a, a.shape[0] // 2


def symplectic_eigenvalues(v) -> np.ndarray:
    """Symplectic spectrum of a positive-definite covariance matrix.

    Returns the ``mode_count`` moduli of the eigenvalues of i*Omega*V in
    ascending order, computed in real arithmetic from Omega @ V whose
    eigenvalues come in +/- i*nu pairs.  Physical states have every nu >= 1.

    Raises
    ------
    InvalidStateError
        If ``v`` is not symmetric positive definite.
    """
    a, m = _as_array(v)
    scale = max(np.linalg.norm(a), 1.0)
    if np.linalg.norm(a - a.T) > SYMMETRY_RTOL * scale:
        raise InvalidStateError("matrix is not symmetric")
    if np.min(np.linalg.eigvalsh(a)) <= 0:
        raise InvalidStateError("matrix is not positive definite")
    ev = np.linalg.eigvals(symplectic_form(m) @ a)
    mods = np.sort(np.abs(ev))
    pairs = mods.reshape(m, 2)
    spread = np.abs(pairs[:, 1] - pairs[:, 0])
    if np.any(spread > PAIRING_RTOL * np.maximum(pairs[:, 1], 1.0)):
        warnings.warn(
            "symplectic eigenvalues did not pair within tolerance; "
            "the input may be ill-conditioned",
            RuntimeWarning,
            stacklevel=2,
        )
    return pairs.mean(axis=1)


def partial_transpose(v: CovarianceMatrix, mode: int) -> CovarianceMatrix:
    """Flip the sign of one mode's momentum row and column.

    This is the covariance-level action of partial transposition on the
    selected mode; applying it twice returns the original matrix.
    """
    if not 0 <= mode < v.mode_count:
        raise IndexError(f"mode {mode} out of range for {v.mode_count} modes")
    p = np.ones(v.dim)
    p[2 * mode + 1] = -1.0
    return CovarianceMatrix(v.basis, v.matrix * np.outer(p, p))


def marginal(v: CovarianceMatrix, modes: Sequence[int]) -> CovarianceMatrix:
    """Covariance of a subset of modes, basis restricted accordingly."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise IndexError("mode indices must be distinct")
    for i in modes:
        if not 0 <= i < v.mode_count:
            raise IndexError(f"mode {i} out of range for {v.mode_count} modes")
    idx = []
    for i in modes:
        idx.extend([2 * i, 2 * i + 1])
    sub = v.matrix[np.ix_(idx, idx)]
    return CovarianceMatrix(v.basis.subset(modes), sub)


def purity(v) -> float:
    """State purity 1/sqrt(det V); equals 1 for pure states."""
    a, _ = _as_array(v)
    det = np.linalg.det(a)
    if det <= 0:
        raise InvalidStateError(f"covariance determinant must be positive, got {det}")
    return 1.0 / np.sqrt(det)


def gaussian_fourth_moment(v, i: int, j: int, k: int, l: int) -> float:
    """Nested-anticommutator fourth moment of a zero-mean Gaussian state.

    Returns <{r_i, {r_j, {r_k, r_l}}}> = 2 (V_ij V_kl + V_ik V_jl + V_il V_jk).
    """
    a, _ = _as_array(v)
    d = a.shape[0]
    for idx in (i, j, k, l):
        if not 0 <= idx < d:
            raise IndexError(f"index {idx} out of range for dimension {d}")
    return 2.0 * (a[i, j] * a[k, l] + a[i, k] * a[j, l] + a[i, l] * a[j, k])


# ---------------------------------------------------------------------------
# standard states
# ---------------------------------------------------------------------------

def vacuum_cov(basis: QuadratureBasis | int) -> CovarianceMatrix:
    """Vacuum state, V = identity."""
    if isinstance(basis, int):
        basis = generic_basis(basis)
    return CovarianceMatrix(basis, np.eye(basis.dim))


def thermal_cov(occupations: Iterable[float], basis: QuadratureBasis | None = None) -> CovarianceMatrix:
    """Product of thermal states, V = diag(2 n_j + 1) per quadrature pair."""
    occ = list(occupations)
    if basis is None:
        basis = generic_basis(len(occ))
    diag = np.repeat([2.0 * n + 1.0 for n in occ], 2)
    return CovarianceMatrix(basis, np.diag(diag))


def two_mode_squeezed_cov(r: float, basis: QuadratureBasis | None = None) -> CovarianceMatrix:
    """Two-mode squeezed state squeezing x1 + x2 and p1 - p2.

    Var(x1 + x2) and Var(p1 - p2) are both exp(-2r); the x quadratures are
    anticorrelated, the p quadratures correlated.
    """
    if basis is None:
        basis = generic_basis(2)
    if basis.mode_count != 2:
        raise ValueError("two-mode squeezed state needs a two-mode basis")
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    m = np.array(
        [
            [c, 0.0, -s, 0.0],
            [0.0, c, 0.0, s],
            [-s, 0.0, c, 0.0],
            [0.0, s, 0.0, c],
        ]
    )
    return CovarianceMatrix(basis, m)


# ---------------------------------------------------------------------------
# plain-text serialization
# ---------------------------------------------------------------------------

def to_text(v: CovarianceMatrix) -> str:
    """Serialize to the plain-text matrix format.

    First line is ``dim <2m>``, a comment line carries the basis labels,
    then one whitespace-separated row per line.
    """
    lines = [f"dim {v.dim}"]
    lines.append("# " + " ".join(f"{m}:{k}" for m, k in v.basis.labels))
    for row in v.matrix:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> CovarianceMatrix:
    """Parse the format written by :func:`to_text`."""
    lines = [ln.strip() for ln in io.StringIO(text) if ln.strip()]
    if not lines or not lines[0].startswith("dim"):
        raise ValueError("expected first line 'dim <2m>'")
    try:
        dim = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed dimension line {lines[0]!r}") from exc
    if dim <= 0 or dim % 2:
        raise ValueError(f"dimension must be a positive even integer, got {dim}")
    basis = None
    rows = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            if basis is None:
                tokens = ln[1:].split()
                if len(tokens) == dim and all(":" in t for t in tokens):
                    modes = tuple(tokens[i].split(":")[0] for i in range(0, dim, 2))
                    basis = QuadratureBasis(modes)
            continue
        rows.append([float(x) for x in ln.split()])
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise ValueError(f"expected {dim} rows of {dim} entries")
    if basis is None:
        basis = generic_basis(dim // 2)
    return CovarianceMatrix(basis, np.array(rows))


def save(v: CovarianceMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_text(v))


def load(path) -> CovarianceMatrix:
    with open(path) as fh:
        return from_text(fh.read())
