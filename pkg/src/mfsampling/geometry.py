"""Parametric source supports: membership tests, voxel quadrature, sensor distance bounds.

Supports are open regions in R^3 built from a small family of primitives
(ball, axis-aligned box, rounded cylinder, peanut, L-shape) and finite
unions of those.  Each leaf component carries a constant amplitude, the
value the source density takes on that component.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator

import numpy as np


class GeometryError(ValueError):
    """Raised for geometric precondition violations (point inside support, empty rule)."""


def _point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3D point, got shape {a.shape}")
    return a


def _points(p) -> np.ndarray:
    a = np.atleast_2d(np.asarray(p, dtype=float))
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"expected an (N, 3) array of points, got shape {np.shape(p)}")
    return a


def _triple(v) -> tuple[float, float, float]:
    x, y, z = (float(c) for c in v)
    return (x, y, z)


class SourceSupport(ABC):
    """Bounded open region carrying a constant source amplitude per component."""

    @abstractmethod
    def contains_points(self, points) -> np.ndarray:
        """Strict-interior membership for an (N, 3) array; returns (N,) bool."""

    @abstractmethod
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned (lo, hi) corners enclosing the support."""

    @abstractmethod
    def signed_distance_bounds(self, x) -> tuple[float, float]:
        """(inf, sup) of |x - y| over the closed support; inf is signed (< 0 inside)."""

    def components(self) -> Iterator["SourceSupport"]:
        yield self

    @property
    def amplitude(self) -> float:
        raise NotImplementedError

    def amplitude_at(self, points) -> np.ndarray:
        """Source density sampled at points: amplitude of the first containing component."""
        pts = _points(points)
        out = np.zeros(len(pts))
        unset = np.ones(len(pts), dtype=bool)
        for part in self.components():
            hit = unset & part.contains_points(pts)
            out[hit] = part.amplitude
            unset &= ~hit
        return out

    def amplitude_bounds(self) -> tuple[float, float]:
        """(min |amplitude|, max |amplitude|) over components."""
        amps = [abs(part.amplitude) for part in self.components()]
        return (min(amps), max(amps))

    def _check_amplitudes(self) -> None:
        amps = [part.amplitude for part in self.components()]
        if any(a == 0 for a in amps):
            raise ValueError("component amplitude must be nonzero")
        if not (all(a > 0 for a in amps) or all(a < 0 for a in amps)):
            raise ValueError("all component amplitudes must share the same sign")


def _box_signed_bounds(lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    """Signed inf and sup of |x - y| over a closed axis-aligned box."""
    gap = np.maximum(lo - x, x - hi)
    if np.all(gap < 0):
        r1 = float(gap.max())  # negative: inside
    else:
        r1 = float(np.sqrt((np.maximum(gap, 0.0) ** 2).sum()))
    far = np.maximum(np.abs(x - lo), np.abs(x - hi))
    r2 = float(np.sqrt((far**2).sum()))
    return r1, r2


@dataclass(frozen=True)
class Ball(SourceSupport):
    center: tuple[float, float, float]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _triple(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        self._check_amplitudes()

    def contains_points(self, points):
        pts = _points(points)
        d2 = ((pts - np.asarray(self.center)) ** 2).sum(axis=1)
        return d2 < self.radius**2

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def signed_distance_bounds(self, x):
        d = float(np.linalg.norm(_point(x) - np.asarray(self.center)))
        return d - self.radius, d + self.radius


@dataclass(frozen=True)
class Cube(SourceSupport):
    """Axis-aligned box given by center and per-axis half-widths."""

    center: tuple[float, float, float]
    half_widths: tuple[float, float, float]
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _triple(self.center))
        object.__setattr__(self, "half_widths", _triple(self.half_widths))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if any(w <= 0 for w in self.half_widths):
            raise ValueError("cube half-widths must be positive")
        self._check_amplitudes()

    def _corners(self):
        c, w = np.asarray(self.center), np.asarray(self.half_widths)
        return c - w, c + w

    def contains_points(self, points):
        pts = _points(points)
        lo, hi = self._corners()
        return np.all((pts > lo) & (pts < hi), axis=1)

    def bounding_box(self):
        return self._corners()

    def signed_distance_bounds(self, x):
        lo, hi = self._corners()
        return _box_signed_bounds(lo, hi, _point(x))


@dataclass(frozen=True)
class RoundedCylinder(SourceSupport):
    """Vertical cylinder |x3| < half_height of the given radius, capped by hemispheres."""

    radius: float
    half_height: float
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "half_height", float(self.half_height))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if self.radius <= 0 or self.half_height <= 0:
            raise ValueError("rounded cylinder radius and half-height must be positive")
        self._check_amplitudes()

    def _cap_centers(self):
        return np.array([0.0, 0.0, self.half_height]), np.array([0.0, 0.0, -self.half_height])

    def contains_points(self, points):
        pts = _points(points)
        rho2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        in_cyl = (rho2 < self.radius**2) & (np.abs(pts[:, 2]) < self.half_height)
        top, bot = self._cap_centers()
        in_top = ((pts - top) ** 2).sum(axis=1) < self.radius**2
        in_bot = ((pts - bot) ** 2).sum(axis=1) < self.radius**2
        return in_cyl | in_top | in_bot

    def bounding_box(self):
        r, h = self.radius, self.half_height
        return np.array([-r, -r, -(h + r)]), np.array([r, r, h + r])

    def signed_distance_bounds(self, x):
        p = _point(x)
        rho = float(np.hypot(p[0], p[1]))
        dr, dz = rho - self.radius, abs(p[2]) - self.half_height
        if dr <= 0 and dz <= 0:
            cyl_inf = max(dr, dz)
        else:
            cyl_inf = float(np.hypot(max(dr, 0.0), max(dz, 0.0)))
        cyl_sup = float(np.hypot(rho + self.radius, abs(p[2]) + self.half_height))
        r1, r2 = cyl_inf, cyl_sup
        for c in self._cap_centers():
            d = float(np.linalg.norm(p - c))
            r1 = min(r1, d - self.radius)
            r2 = max(r2, d + self.radius)
        return r1, r2


@dataclass(frozen=True)
class Peanut(SourceSupport):
    """Union of two overlapping balls of a common radius, treated as one component."""

    centers: tuple[tuple[float, float, float], tuple[float, float, float]]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        a, b = self.centers
        object.__setattr__(self, "centers", (_triple(a), _triple(b)))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if self.radius <= 0:
            raise ValueError("peanut radius must be positive")
        self._check_amplitudes()

    def contains_points(self, points):
        pts = _points(points)
        hit = np.zeros(len(pts), dtype=bool)
        for c in self.centers:
            hit |= ((pts - np.asarray(c)) ** 2).sum(axis=1) < self.radius**2
        return hit

    def bounding_box(self):
        cs = np.asarray(self.centers)
        return cs.min(axis=0) - self.radius, cs.max(axis=0) + self.radius

    def signed_distance_bounds(self, x):
        p = _point(x)
        ds = [float(np.linalg.norm(p - np.asarray(c))) for c in self.centers]
        return min(d - self.radius for d in ds), max(d + self.radius for d in ds)


@dataclass(frozen=True)
class LShape(SourceSupport):
    """Union of two axis-aligned boxes, each given as (min corner, max corner)."""

    box1: tuple[tuple[float, float, float], tuple[float, float, float]]
    box2: tuple[tuple[float, float, float], tuple[float, float, float]]
    amplitude: float = 1.0

    def __post_init__(self):
        for name in ("box1", "box2"):
            lo, hi = getattr(self, name)
            lo, hi = _triple(lo), _triple(hi)
            if any(a >= b for a, b in zip(lo, hi)):
                raise ValueError(f"{name} must satisfy min < max per axis")
            object.__setattr__(self, name, (lo, hi))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        self._check_amplitudes()

    def _boxes(self):
        return (
            (np.asarray(self.box1[0]), np.asarray(self.box1[1])),
            (np.asarray(self.box2[0]), np.asarray(self.box2[1])),
        )

    def contains_points(self, points):
        pts = _points(points)
        hit = np.zeros(len(pts), dtype=bool)
        for lo, hi in self._boxes():
            hit |= np.all((pts > lo) & (pts < hi), axis=1)
        return hit

    def bounding_box(self):
        boxes = self._boxes()
        lo = np.minimum(boxes[0][0], boxes[1][0])
        hi = np.maximum(boxes[0][1], boxes[1][1])
        return lo, hi

    def signed_distance_bounds(self, x):
        p = _point(x)
        bounds = [_box_signed_bounds(lo, hi, p) for lo, hi in self._boxes()]
        return min(b[0] for b in bounds), max(b[1] for b in bounds)


@dataclass(frozen=True)
class Union(SourceSupport):
    parts: tuple[SourceSupport, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("union must have at least one part")
        self._check_amplitudes()

    def components(self):
        for part in self.parts:
            yield from part.components()

    def contains_points(self, points):
        pts = _points(points)
        hit = np.zeros(len(pts), dtype=bool)
        for part in self.parts:
            hit |= part.contains_points(pts)
        return hit

    def bounding_box(self):
        boxes = [part.bounding_box() for part in self.parts]
        lo = np.minimum.reduce([b[0] for b in boxes])
        hi = np.maximum.reduce([b[1] for b in boxes])
        return lo, hi

    def signed_distance_bounds(self, x):
        bounds = [part.signed_distance_bounds(x) for part in self.parts]
        return min(b[0] for b in bounds), max(b[1] for b in bounds)


@dataclass(frozen=True)
class QuadratureRule:
    """Midpoint voxel rule: interior voxel centers with equal weights h^3."""

    nodes: np.ndarray  # (Q, 3)
    weights: np.ndarray  # (Q,)
    spacing: float

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def contains(support: SourceSupport, point) -> bool:
    """True iff the point lies strictly inside the support."""
    return bool(support.contains_points(_point(point)[None, :])[0])


def quadrature(support: SourceSupport, h: float) -> QuadratureRule:
    """Voxelize the support's bounding box at spacing h, keeping interior midpoints.

    Nodes are emitted in lexicographic voxel-index order; every weight is h^3.
    Raises GeometryError when no voxel midpoint lies inside the support.
    """
    h = float(h)
    if h <= 0:
        raise ValueError("quadrature spacing h must be positive")
    lo, hi = support.bounding_box()
    counts = [max(1, int(np.ceil((hi[a] - lo[a]) / h - 1e-12))) for a in range(3)]
    axes = [lo[a] + (np.arange(counts[a]) + 0.5) * h for a in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    inside = support.contains_points(pts)
    nodes = pts[inside]
    if len(nodes) == 0:
        raise GeometryError(f"spacing h={h} too coarse: no voxel midpoint inside the support")
    return QuadratureRule(nodes=nodes, weights=np.full(len(nodes), h**3), spacing=h)


def annulus_radii(support: SourceSupport, x) -> tuple[float, float]:
    """Exact (inf, sup) of |x - y| over the support, for x outside its closure."""
    r1, r2 = support.signed_distance_bounds(x)
    if r1 <= 0:
        raise GeometryError("point lies inside or on the closed source support")
    return r1, r2
