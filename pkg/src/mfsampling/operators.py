"""Discrete multi-frequency operators and their factorization.

The data-driven operator convolves a sensor's multi-frequency samples
against a frequency function over the band; it factors exactly (on
matched quadrature) into an outer synthesis/analysis pair and a middle
multiplication operator.  All reductions run in a fixed order so results
are reproducible across platforms and thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .forward import FrequencyGrid, MultiFreqDataset, generate_dataset
from .geometry import QuadratureRule, SourceSupport, quadrature, _point

if TYPE_CHECKING:
    from .scenario import Scenario

_DENSE_FREQ_LIMIT = 64
_FACTORIZATION_SALT = 0x8F1E


@dataclass(frozen=True)
class FreqFunction:
    """Samples of a band function on the positive frequency nodes."""

    grid: FrequencyGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("frequency samples must be finite")
        object.__setattr__(self, "samples", s)


@dataclass(frozen=True)
class SupportFunction:
    """Samples of a support-domain function on quadrature nodes."""

    rule: QuadratureRule
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (len(self.rule),):
            raise ValueError(f"expected {len(self.rule)} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("support samples must be finite")
        object.__setattr__(self, "samples", s)


def freq_inner(a: FreqFunction, b: FreqFunction) -> complex:
    """Discrete band inner product dk * sum a conj(b)."""
    if a.grid != b.grid:
        raise ValueError("frequency grid mismatch")
    return complex(a.grid.spacing * np.sum(a.samples * np.conj(b.samples)))

def freq_norm(a: FreqFunction) -> float:
    return math.sqrt(abs(freq_inner(a, a)))

def support_inner(u: SupportFunction, v: SupportFunction) -> complex:
    """Discrete support inner product sum w * u conj(v)."""
    if u.rule is not v.rule and len(u.rule) != len(v.rule):
        raise ValueError("quadrature rule mismatch")
    return complex(np.sum(u.rule.weights * u.samples * np.conj(v.samples)))

def support_norm(u: SupportFunction) -> float:
    return math.sqrt(abs(support_inner(u, u)))


def _toeplitz_block(data: MultiFreqDataset, sensor: int) -> np.ndarray:
    """J x J block B[j, l] = values[sensor, j - l] over the difference columns."""
    J = data.grid.count
    idx = (np.arange(J)[:, None] - np.arange(J)[None, :]) + J
    return data.values[sensor][idx]


def _check_grid(data: MultiFreqDataset, g: FreqFunction) -> None:
    if g.grid != data.grid:
        raise ValueError("frequency grid mismatch between dataset and test function")


def apply_near_operator(data: MultiFreqDataset, sensor: int, g: FreqFunction) -> FreqFunction:
    """Band convolution (N g)(k_j) = dk * sum_l values[sensor, j-l] g(k_l)."""
    if data.kind != "near":
        raise ValueError("near operator requires a near-field dataset")
    _check_grid(data, g)
    block = _toeplitz_block(data, sensor)
    out = data.grid.spacing * np.einsum("jl,l->j", block, g.samples)
    return FreqFunction(grid=data.grid, samples=out)


def apply_far_operator(data: MultiFreqDataset, sensor: int, phi: FreqFunction) -> FreqFunction:
    """Far-field analogue of the band convolution."""
    if data.kind != "far":
        raise ValueError("far operator requires a far-field dataset")
    _check_grid(data, phi)
    block = _toeplitz_block(data, sensor)
    out = data.grid.spacing * np.einsum("jl,l->j", block, phi.samples)
    return FreqFunction(grid=data.grid, samples=out)


def near_quadratic_form(data: MultiFreqDataset, sensor: int, g: FreqFunction) -> complex:
    """(N g, g) under the discrete band inner product."""
    if data.kind != "near":
        raise ValueError("near quadratic form requires a near-field dataset")
    _check_grid(data, g)
    block = _toeplitz_block(data, sensor)
    dk = data.grid.spacing
    return complex(dk * dk * np.einsum("jl,l,j->", block, g.samples, np.conj(g.samples)))


def far_quadratic_form(data: MultiFreqDataset, sensor: int, phi: FreqFunction) -> complex:
    """(F phi, phi) under the discrete band inner product."""
    if data.kind != "far":
        raise ValueError("far quadratic form requires a far-field dataset")
    _check_grid(data, phi)
    block = _toeplitz_block(data, sensor)
    dk = data.grid.spacing
    return complex(dk * dk * np.einsum("jl,l,j->", block, phi.samples, np.conj(phi.samples)))


def distance_synthesis(x, rule: QuadratureRule, psi: SupportFunction,
                       grid: FrequencyGrid) -> FreqFunction:
    """Support -> band map with kernel e^{i t |x-y|} (outer factor of the near operator)."""
    r = np.linalg.norm(_point(x) - rule.nodes, axis=1)
    phases = np.exp(1j * np.outer(grid.nodes, r))
    out = np.einsum("jq,q->j", phases, rule.weights * psi.samples)
    return FreqFunction(grid=grid, samples=out)


def distance_analysis(x, rule: QuadratureRule, phi: FreqFunction) -> SupportFunction:
    """Band -> support adjoint with kernel e^{-i s |x-y|}."""
    r = np.linalg.norm(_point(x) - rule.nodes, axis=1)
    phases = np.exp(-1j * np.outer(phi.grid.nodes, r))
    out = phi.grid.spacing * np.einsum("jq,j->q", phases, phi.samples)
    return SupportFunction(rule=rule, samples=out)


def planewave_synthesis(xhat, rule: QuadratureRule, psi: SupportFunction,
                        grid: FrequencyGrid) -> FreqFunction:
    """Support -> band map with kernel e^{-i t xhat.y} (outer factor of the far operator)."""
    d = rule.nodes @ _point(xhat)
    phases = np.exp(-1j * np.outer(grid.nodes, d))
    out = np.einsum("jq,q->j", phases, rule.weights * psi.samples)
    return FreqFunction(grid=grid, samples=out)


def planewave_analysis(xhat, rule: QuadratureRule, phi: FreqFunction) -> SupportFunction:
    """Band -> support adjoint with kernel e^{i s xhat.y}."""
    d = rule.nodes @ _point(xhat)
    phases = np.exp(1j * np.outer(phi.grid.nodes, d))
    out = phi.grid.spacing * np.einsum("jq,j->q", phases, phi.samples)
    return SupportFunction(rule=rule, samples=out)


def apply_near_multiplier(x, support: SourceSupport, rule: QuadratureRule,
                          h: SupportFunction) -> SupportFunction:
    """Middle operator of the near factorization: multiply by f(y) / (4 pi |x-y|)."""
    r = np.linalg.norm(_point(x) - rule.nodes, axis=1)
    f = support.amplitude_at(rule.nodes)
    return SupportFunction(rule=rule, samples=h.samples * f / (4 * math.pi * r))


def apply_far_multiplier(support: SourceSupport, rule: QuadratureRule,
                         h: SupportFunction) -> SupportFunction:
    """Middle operator of the far factorization: multiply by the source density f."""
    f = support.amplitude_at(rule.nodes)
    return SupportFunction(rule=rule, samples=h.samples * f)


def _dense_operator_pair(scenario: "Scenario", sensor: int):
    """Dense (data operator, factored product) matrices on matched quadrature."""
    if scenario.noise_level != 0:
        raise ValueError("factorization identity requires a noiseless scenario")
    grid = scenario.frequencies
    if grid.count > _DENSE_FREQ_LIMIT:
        raise ValueError(f"dense factorization check limited to {_DENSE_FREQ_LIMIT} frequencies")
    data = generate_dataset(scenario)
    rule = quadrature(scenario.support, scenario.h)
    dk = grid.spacing
    N = dk * _toeplitz_block(data, sensor)
    f = scenario.support.amplitude_at(rule.nodes)
    if scenario.measurement.kind == "near":
        r = np.linalg.norm(scenario.measurement.array[sensor] - rule.nodes, axis=1)
        E = np.exp(1j * np.outer(grid.nodes, r))
        mid = rule.weights * f / (4 * math.pi * r)
    else:
        d = rule.nodes @ scenario.measurement.array[sensor]
        E = np.exp(-1j * np.outer(grid.nodes, d))
        mid = rule.weights * f
    M = dk * np.einsum("jq,q,lq->jl", E, mid, np.conj(E))
    return N, M


def factorization_residual(scenario: "Scenario", sensor: int = 0, trials: int = 20) -> float:
    """Max over random test functions of ||(N - PTP*) g|| / ||N g|| on matched quadrature."""
    N, M = _dense_operator_pair(scenario, sensor)
    J = scenario.frequencies.count
    rng = np.random.default_rng([scenario.seed, sensor, _FACTORIZATION_SALT])
    worst = 0.0
    for _ in range(trials):
        g = (rng.standard_normal(J) + 1j * rng.standard_normal(J)) / math.sqrt(2)
        num = np.linalg.norm(np.einsum("jl,l->j", N - M, g))
        den = np.linalg.norm(np.einsum("jl,l->j", N, g))
        if den == 0.0:
            raise ValueError("degenerate scenario: data operator annihilates a random test function")
        worst = max(worst, float(num / den))
    return worst
