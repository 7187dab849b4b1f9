"""Boundary curves, configurations and bounding regions.

Curves are closed, counterclockwise, sampled at (approximately) equal
arclength.  Every sample carries the outward unit normal, signed curvature
(positive where the region is locally convex) and an arclength weight, so
that downstream code never needs the generating primitive again.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import shapely
from scipy.interpolate import CubicSpline
from scipy.spatial import ConvexHull
from shapely.geometry import Polygon

from .errors import ContainmentError, GeometryError, ParameterError

TWO_PI = 2.0 * math.pi


def cross2(u, v):
    """z-component of the 2D cross product; works on (..., 2) arrays."""
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def unit(v):
    n = np.linalg.norm(v)
    if n == 0:
        raise ParameterError("zero vector cannot be normalized")
    return v / n


def height_function(x, v) -> float:
    """Height of point x in direction v (v must be a unit vector)."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ParameterError("direction must be a unit vector")
    return float(np.dot(np.asarray(x, dtype=float), v))


def distance_sq(x, u) -> float:
    """Squared Euclidean distance between two points."""
    d = np.asarray(x, dtype=float) - np.asarray(u, dtype=float)
    return float(np.dot(d, d))


@dataclass
class BoundaryCurve:
    """A closed sampled boundary, oriented counterclockwise.

    positions : (n, 2) sample points
    normals   : (n, 2) outward unit normals
    curvature : (n,) signed curvature, > 0 where locally convex
    weights   : (n,) arclength weight per sample; sums to the perimeter
    """

    region_id: int
    positions: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.region_id < 1:
            raise ParameterError("region_id must be >= 1")

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())

    @property
    def mean_spacing(self) -> float:
        return self.perimeter / self.n

    def polygon(self) -> Polygon:
        return Polygon(self.positions)

    def signed_area(self) -> float:
        p = self.positions
        q = np.roll(p, -1, axis=0)
        return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))

    def tangents(self) -> np.ndarray:
        """Discrete unit tangents (central differences, cyclic)."""
        p = self.positions
        t = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
        return t / np.linalg.norm(t, axis=1, keepdims=True)

    def transformed(self, rotation: float, translation, scale: float) -> "BoundaryCurve":
        """Similarity image of the curve (scale > 0)."""
        if scale <= 0:
            raise ParameterError("scale must be positive")
        c, s = math.cos(rotation), math.sin(rotation)
        R = np.array([[c, -s], [s, c]])
        pos = scale * self.positions @ R.T + np.asarray(translation, dtype=float)
        return BoundaryCurve(
            region_id=self.region_id,
            positions=pos,
            normals=self.normals @ R.T,
            curvature=self.curvature / scale,
            weights=self.weights * scale,
        )


# ---------------------------------------------------------------------------
# primitive -> dense polyline evaluation
# ---------------------------------------------------------------------------

def _dense_circle(spec, m):
    r = float(spec["radius"])
    if r <= 0:
        raise ParameterError("circle radius must be positive")
    cx, cy = spec.get("center", (0.0, 0.0))
    t = np.linspace(0, TWO_PI, m, endpoint=False)
    pts = np.stack([cx + r * np.cos(t), cy + r * np.sin(t)], axis=1)
    return pts, t


def _dense_ellipse(spec, m):
    a, b = float(spec["a"]), float(spec["b"])
    if a <= 0 or b <= 0:
        raise ParameterError("ellipse axes must be positive")
    cx, cy = spec.get("center", (0.0, 0.0))
    phi = float(spec.get("rotation", 0.0))
    t = np.linspace(0, TWO_PI, m, endpoint=False)
    x, y = a * np.cos(t), b * np.sin(t)
    c, s = math.cos(phi), math.sin(phi)
    pts = np.stack([cx + c * x - s * y, cy + s * x + c * y], axis=1)
    return pts, t


def _dense_superellipse(spec, m):
    a, b = float(spec["a"]), float(spec["b"])
    p = float(spec.get("exponent", 3.0))
    if a <= 0 or b <= 0 or p < 2:
        raise ParameterError("superellipse needs a,b > 0 and exponent >= 2")
    cx, cy = spec.get("center", (0.0, 0.0))
    t = np.linspace(0, TWO_PI, m, endpoint=False)
    e = 2.0 / p
    x = a * np.sign(np.cos(t)) * np.abs(np.cos(t)) ** e
    y = b * np.sign(np.sin(t)) * np.abs(np.sin(t)) ** e
    return np.stack([cx + x, cy + y], axis=1), t


def _dense_spline(spec, m):
    ctrl = np.asarray(spec["points"], dtype=float)
    if len(ctrl) < 4:
        raise ParameterError("closed spline needs at least 4 control points")
    t_ctrl = np.arange(len(ctrl) + 1, dtype=float)
    closed = np.vstack([ctrl, ctrl[:1]])
    cs = CubicSpline(t_ctrl, closed, bc_type="periodic")
    t = np.linspace(0, len(ctrl), m, endpoint=False)
    return cs(t), t


def _dense_polygon(spec, m):
    verts = np.asarray(spec["points"], dtype=float)
    if len(verts) < 3:
        raise ParameterError("polygon needs at least 3 vertices")
    seg = np.roll(verts, -1, axis=0) - verts
    lens = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = cum[-1]
    s = np.linspace(0, total, m, endpoint=False)
    idx = np.searchsorted(cum, s, side="right") - 1
    idx = np.clip(idx, 0, len(verts) - 1)
    frac = (s - cum[idx]) / lens[idx]
    return verts[idx] + frac[:, None] * seg[idx], s


_DENSE = {
    "circle": _dense_circle,
    "ellipse": _dense_ellipse,
    "superellipse": _dense_superellipse,
    "spline": _dense_spline,
    "polygon": _dense_polygon,
}


def _resample_equal_arclength(dense: np.ndarray, n: int) -> np.ndarray:
    seg = np.linalg.norm(np.roll(dense, -1, axis=0) - dense, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    s = np.linspace(0, total, n, endpoint=False)
    closed = np.vstack([dense, dense[:1]])
    x = np.interp(s, cum, closed[:, 0])
    y = np.interp(s, cum, closed[:, 1])
    return np.stack([x, y], axis=1)


def _fit_curvature(positions: np.ndarray) -> np.ndarray:
    """Signed curvature by a quadratic fit in the local tangent/normal frame.

    Uses a 5-sample cyclic window; positive where the curve bends away from
    the outward normal (locally convex region).
    """
    n = len(positions)
    t = np.roll(positions, -1, axis=0) - np.roll(positions, 1, axis=0)
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    n_out = np.stack([t[:, 1], -t[:, 0]], axis=1)
    kappa = np.empty(n)
    offs = np.array([-2, -1, 0, 1, 2])
    for i in range(n):
        w = positions[(i + offs) % n] - positions[i]
        xi = w @ t[i]
        eta = w @ n_out[i]
        A = np.stack([xi * xi, xi, np.ones_like(xi)], axis=1)
        coef, *_ = np.linalg.lstsq(A, eta, rcond=None)
        a2, a1 = coef[0], coef[1]
        kappa[i] = -2.0 * a2 / (1.0 + a1 * a1) ** 1.5
    return kappa


def _analytic_curvature(kind, spec, pts):
    if kind == "circle":
        return np.full(len(pts), 1.0 / float(spec["radius"]))
    if kind == "ellipse":
        a, b = float(spec["a"]), float(spec["b"])
        cx, cy = spec.get("center", (0.0, 0.0))
        phi = float(spec.get("rotation", 0.0))
        c, s = math.cos(phi), math.sin(phi)
        # back to canonical frame
        q = (pts - np.array([cx, cy])) @ np.array([[c, s], [-s, c]]).T
        t = np.arctan2(q[:, 1] / b, q[:, 0] / a)
        return a * b / (a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2) ** 1.5
    return None


def _check_simple(positions: np.ndarray):
    ring = shapely.linearrings(positions)
    if not shapely.is_valid(shapely.polygons(ring)):
        raise GeometryError("boundary curve is self-intersecting")


def _check_corners(positions: np.ndarray):
    t = np.roll(positions, -1, axis=0) - positions
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    turn = np.abs(np.arctan2(cross2(t, np.roll(t, -1, axis=0)),
                             np.sum(t * np.roll(t, -1, axis=0), axis=1)))
    med = np.median(turn)
    bad = (turn > 0.6) & (turn > 4.0 * med + 0.05)
    if bad.any():
        k = int(np.argmax(turn))
        raise GeometryError(
            f"corner detected near sample {k} (turning angle {turn[k]:.2f} rad); "
            "smooth-boundary pipeline requires corner-free curves"
        )


def sample_boundary(primitive: dict, n: int, region_id: int = 1,
                    require_smooth: bool = True) -> BoundaryCurve:
    """Sample a curve primitive into a BoundaryCurve with n samples.

    primitive: {"kind": circle|ellipse|superellipse|spline|polygon, ...}.
    Curvature is analytic for circles/ellipses, otherwise estimated by a
    local quadratic fit over a 5-sample window.
    """
    if n < 16:
        raise ParameterError("n must be >= 16")
    kind = primitive.get("kind")
    if kind not in _DENSE:
        raise ParameterError(f"unknown primitive kind: {kind!r}")
    dense, _ = _DENSE[kind](primitive, max(8 * n, 2048))
    # enforce counterclockwise orientation
    area2 = float(np.sum(dense[:, 0] * np.roll(dense[:, 1], -1)
                         - np.roll(dense[:, 0], -1) * dense[:, 1]))
    if area2 < 0:
        dense = dense[::-1].copy()
    pts = _resample_equal_arclength(dense, n)
    _check_simple(pts)
    if require_smooth:
        _check_corners(pts)

    t = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    normals = np.stack([t[:, 1], -t[:, 0]], axis=1)
    kappa = _analytic_curvature(kind, primitive, pts)
    if kappa is None:
        kappa = _fit_curvature(pts)
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    weights = 0.5 * (seg + np.roll(seg, 1))
    return BoundaryCurve(region_id=region_id, positions=pts, normals=normals,
                         curvature=kappa, weights=weights)


# ---------------------------------------------------------------------------
# bounding regions and configurations
# ---------------------------------------------------------------------------

BOUNDING_MODES = ("box", "disk", "convex_hull", "intrinsic",
                  "absolute_threshold", "truncated_threshold")


@dataclass
class BoundingRegion:
    """Clipping geometry for the external linking structure.

    For polygonal modes `polygon` is a closed CCW (m, 2) vertex array.  For
    threshold modes only tau is meaningful and clipping is deferred to the
    linking stage.
    """

    mode: str
    polygon: np.ndarray | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.mode not in BOUNDING_MODES:
            raise ParameterError(f"unknown bounding mode: {self.mode!r}")
        if self.mode in ("absolute_threshold", "truncated_threshold"):
            if self.tau is None or self.tau <= 0:
                raise ParameterError("threshold modes require tau > 0")

    @property
    def has_wall(self) -> bool:
        return self.polygon is not None

    def shapely(self) -> Polygon:
        if self.polygon is None:
            raise ParameterError(f"bounding mode {self.mode} has no wall geometry")
        return Polygon(self.polygon)

    def transformed(self, rotation, translation, scale) -> "BoundingRegion":
        c, s = math.cos(rotation), math.sin(rotation)
        R = np.array([[c, -s], [s, c]])
        poly = None
        if self.polygon is not None:
            poly = scale * self.polygon @ R.T + np.asarray(translation, dtype=float)
        tau = None if self.tau is None else self.tau * scale
        return BoundingRegion(mode=self.mode, polygon=poly, tau=tau)


@dataclass
class Configuration:
    """A multi-region scene: disjoint smooth regions inside a bounding region."""

    regions: list[BoundaryCurve]
    bounding: BoundingRegion

    def __post_init__(self):
        ids = [r.region_id for r in self.regions]
        if len(set(ids)) != len(ids):
            raise ParameterError("region ids must be distinct")
        self._validate_disjoint()
        self._validate_containment()

    def _validate_disjoint(self):
        polys = [r.polygon() for r in self.regions]
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if polys[i].intersects(polys[j]):
                    raise GeometryError(
                        f"regions {self.regions[i].region_id} and "
                        f"{self.regions[j].region_id} are not disjoint")

    def _validate_containment(self):
        if not self.bounding.has_wall:
            return
        wall = self.bounding.shapely()
        # the convex hull touches the outermost samples by construction
        check = wall.covers if self.bounding.mode == "convex_hull" else wall.contains
        for r in self.regions:
            if not check(r.polygon()):
                raise ContainmentError(
                    f"region {r.region_id} is not strictly inside the bounding region")

    @property
    def region_ids(self) -> list[int]:
        return [r.region_id for r in self.regions]

    def region(self, region_id: int) -> BoundaryCurve:
        for r in self.regions:
            if r.region_id == region_id:
                return r
        raise ParameterError(f"no region with id {region_id}")

    def all_samples(self):
        """Stacked samples of every boundary with bookkeeping arrays.

        Returns (points, region_of_sample, index_within_region).
        """
        pts = np.vstack([r.positions for r in self.regions])
        rid = np.concatenate([np.full(r.n, r.region_id) for r in self.regions])
        idx = np.concatenate([np.arange(r.n) for r in self.regions])
        return pts, rid, idx

    @property
    def diameter(self) -> float:
        pts = np.vstack([r.positions for r in self.regions])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    @property
    def mean_spacing(self) -> float:
        return float(np.mean([r.mean_spacing for r in self.regions]))

    def transformed(self, rotation, translation, scale) -> "Configuration":
        return Configuration(
            regions=[r.transformed(rotation, translation, scale) for r in self.regions],
            bounding=self.bounding.transformed(rotation, translation, scale),
        )


def convex_hull(config: Configuration):
    """Convex hull polygon over all boundary samples.

    Returns (vertices (m, 2) CCW, tags) with tags[k] = (region_id, sample index).
    """
    if not config.regions:
        raise ParameterError("configuration has no regions")
    pts, rid, idx = config.all_samples()
    hull = ConvexHull(pts)
    order = hull.vertices  # CCW per scipy
    verts = pts[order]
    tags = [(int(rid[k]), int(idx[k])) for k in order]
    return verts, tags


def build_bounding(config_regions: Sequence[BoundaryCurve], mode: str, *,
                   margin: float = 0.1, tau: float | None = None,
                   polygon=None, center=None) -> BoundingRegion:
    """Construct the bounding region for a list of sampled boundaries."""
    pts = np.vstack([r.positions for r in config_regions])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    if mode == "box":
        c = 0.5 * (lo + hi)
        half = (1.0 + margin) * 0.5 * (hi - lo)
        poly = np.array([
            [c[0] - half[0], c[1] - half[1]],
            [c[0] + half[0], c[1] - half[1]],
            [c[0] + half[0], c[1] + half[1]],
            [c[0] - half[0], c[1] + half[1]],
        ])
        return BoundingRegion(mode="box", polygon=poly)
    if mode == "disk":
        c = np.asarray(center, dtype=float) if center is not None else 0.5 * (lo + hi)
        rad = (1.0 + margin) * float(np.max(np.linalg.norm(pts - c, axis=1)))
        t = np.linspace(0, TWO_PI, 256, endpoint=False)
        poly = c + rad * np.stack([np.cos(t), np.sin(t)], axis=1)
        return BoundingRegion(mode="disk", polygon=poly)
    if mode == "convex_hull":
        hull = ConvexHull(pts)
        return BoundingRegion(mode="convex_hull", polygon=pts[hull.vertices])
    if mode == "intrinsic":
        if polygon is None:
            raise ParameterError("intrinsic mode requires a polygon")
        poly = np.asarray(polygon, dtype=float)
        region = BoundingRegion(mode="intrinsic", polygon=poly)
        wall = region.shapely()
        for r in config_regions:
            if not wall.contains(r.polygon()):
                raise ContainmentError(
                    f"region {r.region_id} is not inside the intrinsic polygon")
        return region
    if mode in ("absolute_threshold", "truncated_threshold"):
        return BoundingRegion(mode=mode, tau=tau)
    raise ParameterError(f"unknown bounding mode: {mode!r}")
