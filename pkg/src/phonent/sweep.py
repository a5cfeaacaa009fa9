"""Single-point runs, one-dimensional parameter sweeps, and bundled presets.

A sweep evaluates the steady state of one model variant over a grid of a
single parameter and writes one CSV row per grid point.  Unstable points
produce rows with ``stable = False`` and empty measure columns; solver
failures produce rows with a message in the ``error`` column.  Rows are
always ordered by grid index, also when points run in a worker pool.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .floquet import convergence_scan, solve_floquet_steady_state
from .lyapunov import UnstableSystemError, residual, solve_steady_state
from .measures import EntanglementReport, full_report
from .model import (
    DiffusionMatrix,
    DriftModel,
    SystemParams,
    build_counterrotating_drift,
    build_detuned_drift_mode1_resonant,
    build_detuned_drift_mode2_resonant,
    build_diffusion,
    build_rwa_cs_drift,
    build_rwa_full_drift,
    stability_check,
)

__all__ = [
    "VARIANTS",
    "SWEEP_PARAMETERS",
    "CSV_COLUMNS",
    "CSV_SCHEMA_VERSION",
    "PRESETS",
    "SweepSpec",
    "PointResult",
    "build_model",
    "run_point",
    "run_sweep",
    "run_preset",
    "write_csv",
]

VARIANTS = (
    "cs-only-rwa",
    "full-rwa",
    "counterrotating",
    "detuned-mode2-resonant",
    "detuned-mode1-resonant",
)

#: sweepable parameter names
SWEEP_PARAMETERS = ("lambda_ratio", "g_ratio", "delta12_khz", "q", "n")

#: stable CSV schema; bump the version when columns change
CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "series",
    "parameter",
    "value",
    "log_negativity",
    "epr_variance",
    "nrf",
    "purity",
    "n1_mean",
    "n2_mean",
    "stable",
    "k_used",
    "residual",
    "error",
)

#: truncations tried by the automatic convergence scan
AUTO_TRUNCATIONS = tuple(range(1, 13))

TWO_PI = 2.0 * math.pi

_BUILDERS: dict[str, Callable[[SystemParams], DriftModel]] = {
    "cs-only-rwa": build_rwa_cs_drift,
    "full-rwa": build_rwa_full_drift,
    "counterrotating": build_counterrotating_drift,
    "detuned-mode2-resonant": build_detuned_drift_mode2_resonant,
    "detuned-mode1-resonant": build_detuned_drift_mode1_resonant,
}


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a model variant, a swept parameter, and fixed parameters.

    ``truncation`` is an integer or "auto" (convergence scan per point).
    ``series`` labels the rows this spec contributes to a CSV.
    """

    variant: str
    parameter: str
    grid: tuple[float, ...]
    params: SystemParams
    truncation: int | str = "auto"
    series: str = ""
    output_path: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"unknown parameter {self.parameter!r}; choose from {SWEEP_PARAMETERS}"
            )
        grid = tuple(float(g) for g in self.grid)
        if len(grid) == 0:
            raise ValueError("sweep grid is empty")
        diffs = np.diff(grid)
        if len(grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep grid must be strictly monotone")
        if self.parameter == "delta12_khz" and not self.variant.startswith("detuned"):
            raise ValueError("a delta12 sweep requires a detuned variant")
        if isinstance(self.truncation, str) and self.truncation != "auto":
            raise ValueError("truncation must be an integer or 'auto'")
        if isinstance(self.truncation, int) and self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class PointResult:
    report: EntanglementReport
    k_used: int
    residual: float | None
    error: str | None = None


def apply_parameter(params: SystemParams, name: str, value: float) -> SystemParams:
    """Set one swept parameter, holding every other physical rate fixed.

    - lambda_ratio scales lambda2 = value * lambda1,
    - g_ratio scales g2 = value * g1,
    - delta12_khz moves omega2 = omega1 - 2 pi * 1e3 * value while keeping
      the damping rates gamma_j fixed (quality factors are re-derived),
    - q sets both quality factors (gamma_j = omega_j / q),
    - n sets both thermal occupations.
    """
    if name == "lambda_ratio":
        return params.replace(lambda2=value * params.lambda1)
    if name == "g_ratio":
        return params.replace(g2=value * params.g1)
    if name == "delta12_khz":
        omega2 = params.omega1 - TWO_PI * 1e3 * value
        if omega2 <= 0:
            raise ValueError(f"delta12 = {value} kHz pushes omega2 below zero")
        return params.replace(omega2=omega2)
    if name == "q":
        return params.replace(gamma1=params.omega1 / value, gamma2=params.omega2 / value)
    if name == "n":
        return params.replace(n1=value, n2=value)
    raise ValueError(f"unknown parameter {name!r}")


def build_model(params: SystemParams, variant: str) -> tuple[DriftModel, DiffusionMatrix]:
    """Drift and diffusion for a variant; 6x6 for cs-only-rwa, 8x8 otherwise."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    model = _BUILDERS[variant](params)
    noise = build_diffusion(params, n_cavities=1 if variant == "cs-only-rwa" else 2)
    return model, noise


def run_point(params: SystemParams, variant: str,
              truncation: int | str = "auto") -> PointResult:
    """Solve one parameter point and report every measure.

    Constant models go through the direct Lyapunov solve, harmonic models
    through the frequency-space solver at the given truncation ("auto" runs
    a convergence scan and uses the smallest converged truncation).
    Instability yields a report with ``stable = False``; solver failures are
    captured in ``error``.
    """
    model, noise = build_model(params, variant)
    stab = stability_check(model)
    if not stab.stable:
        return PointResult(full_report(None, stable=False), 0, None)
    try:
        if model.is_constant:
            v = solve_steady_state(model, noise)
            rel = residual(model.constant, v.matrix, noise.matrix).relative
            k_used = 0
        else:
            if truncation == "auto":
                scan = convergence_scan(model, noise, AUTO_TRUNCATIONS)
                if not scan.converged:
                    return PointResult(
                        full_report(None, stable=False), 0, None,
                        error="truncation scan did not converge",
                    )
                k_used = scan.production_truncation
                v = scan.entries[[e.truncation for e in scan.entries].index(k_used)].covariance
            else:
                k_used = int(truncation)
                v = solve_floquet_steady_state(model, noise, k_used, check_stability=False)
            rel = _embedded_residual(model, noise, v, k_used)
    except UnstableSystemError as exc:
        return PointResult(full_report(None, stable=False), 0, None, error=str(exc))
    report = full_report(v, mech_modes=(-2, -1), stable=True)
    return PointResult(report, k_used, rel)


def _embedded_residual(model: DriftModel, noise: DiffusionMatrix,
                       v: object, k_used: int) -> float:
    from .floquet import assemble_floquet_drift
    from .lyapunov import solve_lyapunov

    sys = assemble_floquet_drift(model, k_used, noise)
    vf = solve_lyapunov(sys.drift, sys.diffusion, check_stability=False)
    r = np.linalg.norm(sys.drift @ vf + vf @ sys.drift.T + sys.diffusion)
    return float(r / np.linalg.norm(sys.diffusion))


def _row_for(spec: SweepSpec, value: float) -> dict:
    try:
        point_params = apply_parameter(spec.params, spec.parameter, value)
        result = run_point(point_params, spec.variant, spec.truncation)
    except (ValueError, UnstableSystemError) as exc:
        return _format_row(spec, value, PointResult(
            full_report(None, stable=False), 0, None, error=str(exc)))
    return _format_row(spec, value, result)


def _format_row(spec: SweepSpec, value: float, result: PointResult) -> dict:
    rep = result.report
    fmt = lambda x: "" if x is None else f"{x:.12g}"
    return {
        "series": spec.series,
        "parameter": spec.parameter,
        "value": f"{value:.12g}",
        "log_negativity": fmt(rep.log_negativity),
        "epr_variance": fmt(rep.epr_variance),
        "nrf": fmt(rep.nrf),
        "purity": fmt(rep.purity),
        "n1_mean": fmt(rep.mean_phonons[0] if rep.mean_phonons else None),
        "n2_mean": fmt(rep.mean_phonons[1] if rep.mean_phonons else None),
        "stable": "true" if rep.stable else "false",
        "k_used": str(result.k_used),
        "residual": fmt(result.residual),
        "error": result.error or "",
    }


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[dict]:
    """Evaluate every grid point, ordered by grid index.

    With ``workers > 1`` the points run in a process pool; the output order
    and content are identical either way (solves are deterministic).
    """
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_for, [spec] * len(spec.grid), spec.grid))
    else:
        rows = [_row_for(spec, v) for v in spec.grid]
    if spec.output_path:
        write_csv(rows, spec.output_path)
    return rows


def write_csv(rows: Sequence[dict], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

LAMBDA_RATIO_GRID = tuple(np.linspace(0.01, 0.99, 101))
G_RATIO_GRID = tuple(np.geomspace(1.0, 100.0, 49))


def _base_params(q: float = 1e8, n: float = 0.0, with_dispersive: bool = False,
                 lambda2_khz: float = 0.0) -> SystemParams:
    return SystemParams.from_khz(
        lambda1=100.0,
        lambda2=lambda2_khz,
        g1=3.0 if with_dispersive else 0.0,
        g2=20.0 if with_dispersive else 0.0,
        kappa1=120.0,
        omega1=300.0,
        q1=q,
        n1=n,
    )


def _preset_fig2ad() -> list[SweepSpec]:
    return [
        SweepSpec("cs-only-rwa", "lambda_ratio", LAMBDA_RATIO_GRID,
                  _base_params(q=1e8, n=n), series=f"n={n:g}")
        for n in (0.0, 1.0, 1e6, 2e7)
    ]


def _preset_fig2eh() -> list[SweepSpec]:
    return [
        SweepSpec("full-rwa", "lambda_ratio", LAMBDA_RATIO_GRID,
                  _base_params(q=q, n=2e7, with_dispersive=True), series=f"Q={q:g}")
        for q in (1e8, 1e9, 1e10)
    ]


def _preset_fig3() -> list[SweepSpec]:
    specs = []
    for g1_khz in (0.3, 3.0, 30.0):
        params = _base_params(q=1e9, n=2e7, with_dispersive=True, lambda2_khz=80.0)
        params = params.replace(g1=TWO_PI * 1e3 * g1_khz, g2=TWO_PI * 1e3 * g1_khz)
        specs.append(SweepSpec("full-rwa", "g_ratio", G_RATIO_GRID, params,
                               series=f"g1={g1_khz:g}kHz"))
    return specs


def _detuned_series(variant: str, detunings_khz: tuple[float, ...]) -> list[SweepSpec]:
    specs = []
    for d in detunings_khz:
        params = _base_params(q=1e9, n=2e7, with_dispersive=True)
        # the detuning moves omega2 only; damping rates stay at their
        # resonant values so the comparison isolates the drift structure
        params = apply_parameter(params, "delta12_khz", d)
        specs.append(SweepSpec(variant, "lambda_ratio", LAMBDA_RATIO_GRID, params,
                               series=f"delta12={d:g}kHz"))
    return specs


def _preset_fig4ac() -> list[SweepSpec]:
    return _detuned_series("detuned-mode2-resonant", (0.0, 240.0))


def _preset_fig4df() -> list[SweepSpec]:
    return _detuned_series("detuned-mode1-resonant", (0.0, 60.0, 120.0, 240.0))


def _preset_fig5() -> list[SweepSpec]:
    params = _base_params(q=1e9, n=2e7, with_dispersive=True)
    return [
        SweepSpec("full-rwa", "lambda_ratio", LAMBDA_RATIO_GRID, params, series="rwa"),
        SweepSpec("counterrotating", "lambda_ratio", LAMBDA_RATIO_GRID, params,
                  series="floquet"),
    ]


PRESETS: dict[str, Callable[[], list[SweepSpec]]] = {
    "fig2ad": _preset_fig2ad,
    "fig2eh": _preset_fig2eh,
    "fig3": _preset_fig3,
    "fig4ac": _preset_fig4ac,
    "fig4df": _preset_fig4df,
    "fig5": _preset_fig5,
}


def run_preset(name: str, output_path=None, workers: int = 1) -> list[dict]:
    """Run every series of a bundled preset and optionally write one CSV."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    rows: list[dict] = []
    for spec in PRESETS[name]():
        rows.extend(run_sweep(spec, workers=workers))
    if output_path:
        write_csv(rows, output_path)
    return rows
