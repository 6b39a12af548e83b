"""Numerical certificates: factorization identity, coercivity sandwich,
point-spread-profile bounds, and data symmetries.

Every check reduces to a single `measured <= tolerance` comparison.
Composite checks normalize each subcheck by its own tolerance and report
the worst ratio against an overall tolerance of 1.  Checks are
deterministic given (scenario, seed).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .forward import FrequencyGrid, MultiFreqDataset, generate_dataset
from .geometry import annulus_radii, quadrature
from .imaging import psf_closed_form, psf_discrete
from .operators import (
    FreqFunction,
    distance_analysis,
    factorization_residual,
    far_quadratic_form,
    near_quadratic_form,
    planewave_analysis,
    support_norm,
)

_COERCIVITY_SALT = 0x51D3
_PSF_FINE_COUNT = 4000
_PSF_CONVERGENCE_TS = (0.5, 1.0, 5.0)

CHECK_NAMES = ("factorization", "coercivity", "psf", "symmetries")


@dataclass
class VerificationReport:
    check: str
    scenario: str
    measured: float
    tolerance: float
    passed: bool
    runtime_s: float
    details: dict[str, float] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"check: {self.check}",
            f"scenario: {self.scenario}",
            f"measured: {self.measured!r}",
            f"tolerance: {self.tolerance!r}",
            f"pass: {'true' if self.passed else 'false'}",
            f"runtime_s: {self.runtime_s!r}",
        ]
        for key in sorted(self.details):
            lines.append(f"detail.{key}: {self.details[key]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, block: str) -> "VerificationReport":
        fields: dict[str, str] = {}
        details: dict[str, float] = {}
        for line in block.strip().splitlines():
            key, _, val = line.partition(":")
            key, val = key.strip(), val.strip()
            if key.startswith("detail."):
                details[key[len("detail."):]] = float(val)
            else:
                fields[key] = val
        return cls(
            check=fields["check"],
            scenario=fields["scenario"],
            measured=float(fields["measured"]),
            tolerance=float(fields["tolerance"]),
            passed=fields["pass"] == "true",
            runtime_s=float(fields["runtime_s"]),
            details=details,
        )


def check_factorization(scenario, sensor: int = 0, trials: int = 20,
                        tol: float = 1e-10) -> VerificationReport:
    """Certify the exact operator factorization on noiseless matched-quadrature data."""
    if scenario.noise_level != 0:
        raise ValueError("factorization check requires a noiseless scenario")
    t0 = time.perf_counter()
    residual = factorization_residual(scenario, sensor=sensor, trials=trials)
    return VerificationReport(
        check="factorization",
        scenario=scenario.summary(),
        measured=residual,
        tolerance=tol,
        passed=residual <= tol,
        runtime_s=time.perf_counter() - t0,
        details={"trials": float(trials), "sensor": float(sensor)},
    )


def check_coercivity(scenario, sensor: int = 0, trials: int = 100,
                     tol: float = 1e-10) -> VerificationReport:
    """Certify the two-sided quadratic-form bounds against the analysis-side factor norm.

    Near kind: |(N g, g)| / ||analysis g||^2 must lie in
    [c_f / (4 pi r2), C_f / (4 pi r1)], with r1, r2 the sensor's exact
    distance bounds to the support.  Far kind: the interval is [c_f, C_f].
    """
    if scenario.noise_level != 0:
        raise ValueError("coercivity check requires a noiseless scenario")
    t0 = time.perf_counter()
    data = generate_dataset(scenario)
    rule = quadrature(scenario.support, scenario.h)
    grid = scenario.frequencies
    c_f, C_f = scenario.support.amplitude_bounds()
    if scenario.kind == "near":
        x = scenario.measurement.array[sensor]
        r1, r2 = annulus_radii(scenario.support, x)
        lower, upper = c_f / (4 * math.pi * r2), C_f / (4 * math.pi * r1)
    else:
        x = scenario.measurement.array[sensor]
        lower, upper = c_f, C_f
    rng = np.random.default_rng([scenario.seed, sensor, _COERCIVITY_SALT])
    J = grid.count
    worst = 0.0
    ratio_min, ratio_max = math.inf, -math.inf
    for _ in range(trials):
        while True:
            g = FreqFunction(grid, (rng.standard_normal(J) + 1j * rng.standard_normal(J))
                             / math.sqrt(2))
            if scenario.kind == "near":
                denom = support_norm(distance_analysis(x, rule, g)) ** 2
                quad = near_quadratic_form(data, sensor, g)
            else:
                denom = support_norm(planewave_analysis(x, rule, g)) ** 2
                quad = far_quadratic_form(data, sensor, g)
            if denom > 1e-30:
                break
        ratio = abs(quad) / denom
        ratio_min, ratio_max = min(ratio_min, ratio), max(ratio_max, ratio)
        violation = max((lower - ratio) / lower, (ratio - upper) / upper, 0.0)
        worst = max(worst, violation)
    return VerificationReport(
        check="coercivity",
        scenario=scenario.summary(),
        measured=worst,
        tolerance=tol,
        passed=worst <= tol,
        runtime_s=time.perf_counter() - t0,
        details={"ratio_min": ratio_min, "ratio_max": ratio_max,
                 "lower_bound": lower, "upper_bound": upper, "trials": float(trials)},
    )


def check_psf(grid: FrequencyGrid, t_samples=None) -> VerificationReport:
    """Certify the point spread profile: peak value, envelope bounds, first zero,
    and convergence of the grid analogue to the closed form.

    Subchecks are normalized by their individual tolerances; the report
    passes when the worst normalized ratio is at most 1.
    """
    t0 = time.perf_counter()
    k_max = grid.k_max
    if t_samples is None:
        t_samples = np.linspace(-100.0, 100.0, 10_000)
    t_samples = np.asarray(t_samples, dtype=float)

    peak_err = abs(abs(psf_closed_form(0.0, k_max)) - k_max)

    bound_violation = 0.0
    strict_violation = 0.0
    for t in t_samples:
        mag = abs(psf_closed_form(float(t), k_max))
        if t == 0.0:
            continue
        envelope = min(k_max, 2.0 / abs(t))
        bound_violation = max(bound_violation, (mag - envelope) / envelope)
        strict_violation = max(strict_violation, mag - k_max * (1 - 1e-15))

    t_zero = 2 * math.pi / k_max
    zero_loc = brentq(lambda t: psf_closed_form(t, k_max).real,
                      0.75 * t_zero, 1.25 * t_zero, xtol=1e-15)
    zero_err = abs(zero_loc - t_zero)

    fine = FrequencyGrid(k_max=k_max, count=_PSF_FINE_COUNT)
    conv_err = max(abs(psf_discrete(t, fine) - psf_closed_form(t, k_max))
                   for t in _PSF_CONVERGENCE_TS)
    # right-endpoint rectangle rule: |error| <= (dk/2)|e^{i k_max t} - 1| + O(dk^2) <= dk
    conv_tol = 1.1 * fine.spacing

    subchecks = {
        "peak_error": (peak_err, 1e-300),  # exact equality demanded
        "envelope_violation": (bound_violation, 1e-12),
        "strict_peak_violation": (strict_violation, 1e-12),
        "first_zero_error": (zero_err, 1e-12),
        "convergence_error": (conv_err, conv_tol),
    }
    ratios = {name: (0.0 if v == 0 else v / tol) for name, (v, tol) in subchecks.items()}
    worst = max(ratios.values())
    details = {name: v for name, (v, _) in subchecks.items()}
    details["first_zero_location"] = zero_loc
    return VerificationReport(
        check="psf",
        scenario=f"k_max={k_max!r} J={grid.count}",
        measured=worst,
        tolerance=1.0,
        passed=worst <= 1.0,
        runtime_s=time.perf_counter() - t0,
        details=details,
    )


def symmetry_violation(data: MultiFreqDataset) -> float:
    """Worst per-row relative deviation from the kind's frequency symmetry."""
    J = data.grid.count
    worst = 0.0
    if data.kind == "near":
        for ell in range(len(data.sensors)):
            row = data.values[ell]
            scale = np.abs(row).max()
            if scale == 0:
                continue
            dev = np.abs(row[J - 1::-1] - np.conj(row[J + 1:])).max()
            worst = max(worst, float(dev / scale))
    else:
        neg = data.sensors.negation_index()
        for ell in range(len(data.sensors)):
            row = data.values[ell]
            scale = np.abs(row).max()
            if scale == 0:
                continue
            dev = np.abs(row[J - 1::-1] - data.values[neg[ell], J + 1:]).max()
            worst = max(worst, float(dev / scale))
    return worst


def check_symmetries(data: MultiFreqDataset, tol: float = 1e-14) -> VerificationReport:
    """Certify conjugate symmetry (near) or antipodal symmetry (far) of the data."""
    t0 = time.perf_counter()
    violation = symmetry_violation(data)
    return VerificationReport(
        check="symmetries",
        scenario=f"kind={data.kind} L={len(data.sensors)} J={data.grid.count} "
                 f"noise={data.noise_level!r}",
        measured=violation,
        tolerance=tol,
        passed=violation <= tol,
        runtime_s=time.perf_counter() - t0,
    )
