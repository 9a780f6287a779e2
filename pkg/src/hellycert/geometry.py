"""Exact-arithmetic-free convex geometry at desk scale.

Polytopes in half-space and vertex form, brute-force vertex enumeration,
recursive pyramid volume, polar bodies, and ellipsoid primitives. Everything
here is deterministic and dimension-capped; the combinatorial routines are
exponential on purpose (they are the trusted ground truth the rest of the
library is checked against).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .config import DEFAULT, DIM_CAP, FACET_CAP, Tolerances
from .errors import (
    CapExceeded,
    Degenerate,
    DegenerateSimplex,
    Empty,
    NotCentered,
    Unbounded,
    ZeroNormal,
    ZeroPoint,
)
from .lp import LPStatus, lp_solve

_COMBO_CHUNK = 200_000


def unit_ball_volume(d: int) -> float:
    """Volume of the d-dimensional Euclidean unit ball."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """{x : normal.x <= offset} with a unit normal."""

    normal: np.ndarray
    offset: float
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "normal", _freeze(self.normal))
        object.__setattr__(self, "offset", float(self.offset))
        if not np.isfinite(self.normal).all() or not math.isfinite(self.offset):
            raise ZeroNormal("half-space has non-finite entries")
        if self.validate and abs(np.linalg.norm(self.normal) - 1.0) > DEFAULT.unit_norm:
            raise ZeroNormal("half-space normal is not unit length")


def normalize_halfspace(a, b, tol: float = 1e-12) -> HalfSpace:
    """Scale (a, b) so the normal has unit length."""
    a = np.asarray(a, dtype=float)
    nrm = float(np.linalg.norm(a))
    if nrm <= tol:
        raise ZeroNormal(f"normal has length {nrm:.3e}")
    return HalfSpace(a / nrm, float(b) / nrm)


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Intersection of finitely many half-spaces."""

    dim: int
    halfspaces: tuple[HalfSpace, ...]

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        m = len(self.halfspaces)
        if not (1 <= self.dim <= DIM_CAP):
            raise CapExceeded(f"dimension {self.dim} outside [1, {DIM_CAP}]")
        if not (1 <= m <= FACET_CAP):
            raise CapExceeded(f"{m} half-spaces outside [1, {FACET_CAP}]")
        for h in self.halfspaces:
            if h.normal.shape != (self.dim,):
                raise ZeroNormal("half-space dimension mismatch")

    @cached_property
    def normals(self) -> np.ndarray:
        return _freeze(np.stack([h.normal for h in self.halfspaces]))

    @cached_property
    def offsets(self) -> np.ndarray:
        return _freeze(np.array([h.offset for h in self.halfspaces]))

    def contains(self, point: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(self.normals @ point <= self.offsets + tol))


def hpolytope_from_arrays(a, b, *, normalize: bool = True) -> HPolytope:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ZeroNormal("half-space arrays have mismatched shapes")
    if normalize:
        hs = tuple(normalize_halfspace(a[i], b[i]) for i in range(a.shape[0]))
    else:
        hs = tuple(HalfSpace(a[i], float(b[i])) for i in range(a.shape[0]))
    return HPolytope(a.shape[1], hs)


def point_in_hull_gap(point: np.ndarray, points: np.ndarray) -> float:
    """L1 distance from point to conv(points), via one feasibility LP.

    Zero (up to LP tolerance) means the point lies in the hull.
    """
    points = np.asarray(points, dtype=float)
    k, d = points.shape
    # variables: mu (k), s+ (d), s- (d), all nonnegative
    n = k + 2 * d
    cost = np.concatenate([np.zeros(k), np.ones(2 * d)])
    a_eq = np.zeros((d + 1, n))
    a_eq[:d, :k] = points.T
    a_eq[:d, k : k + d] = np.eye(d)
    a_eq[:d, k + d :] = -np.eye(d)
    a_eq[d, :k] = 1.0
    b_eq = np.concatenate([np.asarray(point, dtype=float), [1.0]])
    res = lp_solve(cost, a_eq=a_eq, b_eq=b_eq, nonneg=np.ones(n, dtype=bool))
    if res.status != LPStatus.OPTIMAL:
        raise Empty("hull membership LP failed")
    return max(res.value, 0.0)


@dataclass(frozen=True, eq=False)
class VPolytope:
    """Convex hull of finitely many points, all of them extreme."""

    vertices: np.ndarray
    check_extreme: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", _freeze(np.atleast_2d(self.vertices)))
        n, d = self.vertices.shape
        if not (1 <= d <= DIM_CAP):
            raise CapExceeded(f"dimension {d} outside [1, {DIM_CAP}]")
        if not np.isfinite(self.vertices).all():
            raise ValueError("non-finite vertex")
        if self.check_extreme and n > 1:
            for i in range(n):
                rest = np.delete(self.vertices, i, axis=0)
                if point_in_hull_gap(self.vertices[i], rest) <= DEFAULT.dedupe:
                    raise ValueError(f"vertex {i} lies in the hull of the others")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True, eq=False)
class Simplex:
    """d+1 affinely independent points in dimension d."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _freeze(np.atleast_2d(self.vertices)))
        n, d = self.vertices.shape
        if n != d + 1:
            raise DegenerateSimplex(f"{n} vertices in dimension {d}")
        edges = self.vertices[1:] - self.vertices[0]
        if abs(np.linalg.det(edges)) <= 1e-12:
            raise DegenerateSimplex("vertices are affinely dependent")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def volume(self) -> float:
        edges = self.vertices[1:] - self.vertices[0]
        return abs(float(np.linalg.det(edges))) / math.factorial(self.dim)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """{center + shape @ u : |u| <= 1} with a symmetric positive definite shape."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        s = np.asarray(self.shape, dtype=float)
        if s.shape != (c.shape[0], c.shape[0]):
            raise Degenerate("ellipsoid shape matrix has wrong dimensions")
        if not (np.isfinite(c).all() and np.isfinite(s).all()):
            raise Degenerate("ellipsoid has non-finite entries")
        s = 0.5 * (s + s.T)
        if np.linalg.eigvalsh(s).min() < DEFAULT.spd_floor:
            raise Degenerate("ellipsoid shape matrix is not positive definite")
        object.__setattr__(self, "center", _freeze(c))
        object.__setattr__(self, "shape", _freeze(s))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def support(self, direction: np.ndarray) -> float:
        """sup of direction.x over the ellipsoid."""
        return float(direction @ self.center + np.linalg.norm(self.shape @ direction))

    def contains(self, point: np.ndarray, tol: float = 1e-9) -> bool:
        y = np.linalg.solve(self.shape, np.asarray(point, dtype=float) - self.center)
        return bool(np.linalg.norm(y) <= 1.0 + tol)


def chebyshev_center(poly: HPolytope) -> tuple[np.ndarray, float]:
    """Center and radius of a largest inscribed ball.

    Raises Empty when the polytope is infeasible and Unbounded when the
    inscribed radius is unbounded.
    """
    d = poly.dim
    a, b = poly.normals, poly.offsets
    cost = np.zeros(d + 1)
    cost[d] = 1.0
    a_ub = np.hstack([a, np.ones((a.shape[0], 1))])
    nonneg = np.zeros(d + 1, dtype=bool)
    nonneg[d] = True
    res = lp_solve(cost, a_ub=a_ub, b_ub=b, nonneg=nonneg, maximize=True)
    if res.status == LPStatus.INFEASIBLE:
        raise Empty("intersection is empty")
    if res.status == LPStatus.UNBOUNDED:
        raise Unbounded("inscribed radius is unbounded")
    return res.x[:d], float(res.value)


def ensure_bounded(poly: HPolytope) -> None:
    """Raise Unbounded unless the polytope is bounded (2d support LPs)."""
    d = poly.dim
    for k in range(d):
        direction = np.zeros(d)
        for sgn in (1.0, -1.0):
            direction[k] = sgn
            res = lp_solve(direction, a_ub=poly.normals, b_ub=poly.offsets, maximize=True)
            if res.status == LPStatus.UNBOUNDED:
                raise Unbounded(f"unbounded along coordinate {k}")
            if res.status == LPStatus.INFEASIBLE:
                raise Empty("intersection is empty")
        direction[k] = 0.0


def _dedupe_points(points: np.ndarray, tol: float) -> np.ndarray:
    if points.shape[0] <= 1:
        return points
    diff = points[:, None, :] - points[None, :, :]
    close = (diff * diff).sum(axis=2) <= tol * tol
    keep = []
    seen = np.zeros(points.shape[0], dtype=bool)
    for i in range(points.shape[0]):
        if seen[i]:
            continue
        keep.append(i)
        seen |= close[i]
    return points[keep]


def _dedupe_halfspaces(a: np.ndarray, b: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    rows = np.hstack([a, b[:, None]])
    kept = _dedupe_points(rows, tol)
    return kept[:, :-1], kept[:, -1]


def vertex_enumeration(poly: HPolytope, tolerances: Tolerances = DEFAULT) -> VPolytope:
    """All vertices of a bounded full-dimensional polytope, by brute force.

    Every d-subset of facets is solved; feasible solutions are deduplicated.
    Raises Empty / Unbounded / Degenerate from the LP pre-checks.
    """
    verts = _vertex_array(poly, tolerances)
    return VPolytope(verts, check_extreme=False)


def _vertex_array(poly: HPolytope, tolerances: Tolerances = DEFAULT) -> np.ndarray:
    center, radius = chebyshev_center(poly)
    if radius < 1e-10:
        raise Degenerate(f"inscribed radius {radius:.3e} below 1e-10")
    ensure_bounded(poly)
    a, b = poly.normals, poly.offsets
    m, d = a.shape
    found = []
    combos = itertools.combinations(range(m), d)
    while True:
        chunk = np.array(list(itertools.islice(combos, _COMBO_CHUNK)), dtype=int)
        if chunk.size == 0:
            break
        sub_a = a[chunk]
        sub_b = b[chunk]
        dets = np.abs(np.linalg.det(sub_a))
        good = dets > 1e-12
        if not good.any():
            continue
        pts = np.linalg.solve(sub_a[good], sub_b[good][..., None])[..., 0]
        feas = np.all(pts @ a.T <= b[None, :] + tolerances.incidence, axis=1)
        if feas.any():
            found.append(pts[feas])
    if not found:
        raise Degenerate("no vertices found")
    verts = _dedupe_points(np.vstack(found), tolerances.dedupe)
    return verts


def facets_from_vertices(verts: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Outer description (unit normals, offsets) of conv(verts).

    Brute force over d-subsets; assumes the hull is full-dimensional.
    """
    verts = np.asarray(verts, dtype=float)
    n, d = verts.shape
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([verts.max(), -verts.min()])
    rows_a, rows_b = [], []
    for idx in itertools.combinations(range(n), d):
        pts = verts[list(idx)]
        edges = pts[1:] - pts[0]
        sv = np.linalg.svd(edges, compute_uv=False)
        if sv[-1] <= 1e-10:
            continue  # affinely dependent subset spans no hyperplane
        _, _, vh = np.linalg.svd(edges)
        normal = vh[-1]
        offset = float(normal @ pts[0])
        sides = verts @ normal - offset
        if sides.max() <= tol:
            rows_a.append(normal)
            rows_b.append(offset)
        elif sides.min() >= -tol:
            rows_a.append(-normal)
            rows_b.append(-offset)
    if not rows_a:
        raise Degenerate("vertex set spans no full-dimensional hull")
    return _dedupe_halfspaces(np.array(rows_a), np.array(rows_b), tol)


def _volume_recursive(
    verts: np.ndarray, a: np.ndarray, b: np.ndarray, tolerances: Tolerances
) -> float:
    d = verts.shape[1]
    if d == 1:
        return float(verts.max() - verts.min())
    apex = verts.mean(axis=0)
    total = 0.0
    slack = b - a @ apex
    incidence = verts @ a.T - b[None, :]  # (n, m), ~0 on the facet
    for i in range(a.shape[0]):
        height = float(slack[i])
        if height <= tolerances.incidence:
            continue
        on_facet = incidence[:, i] >= -tolerances.incidence
        if on_facet.sum() < d:
            continue
        face_verts = verts[on_facet]
        _, _, vh = np.linalg.svd(a[i][None, :])
        chart = vh[1:].T  # (d, d-1), orthonormal basis of the facet plane
        origin = face_verts[0]
        sub_verts = (face_verts - origin) @ chart
        sub_a_raw = np.delete(a, i, axis=0) @ chart
        sub_b_raw = np.delete(b, i, axis=0) - np.delete(a, i, axis=0) @ origin
        norms = np.linalg.norm(sub_a_raw, axis=1)
        keep = norms > 1e-12
        if not keep.any():
            continue
        sub_a = sub_a_raw[keep] / norms[keep, None]
        sub_b = sub_b_raw[keep] / norms[keep]
        sub_a, sub_b = _dedupe_halfspaces(sub_a, sub_b, tolerances.dedupe)
        area = _volume_recursive(sub_verts, sub_a, sub_b, tolerances)
        total += height * area / d
    return total


def volume(body, tolerances: Tolerances = DEFAULT) -> float:
    """Euclidean volume of a bounded polytope (either description).

    H-form: vertices are enumerated, then the volume is assembled from
    facet pyramids over the vertex centroid, recursing on facets down to
    intervals. V-form: the outer description is reconstructed first.
    """
    if isinstance(body, Ellipsoid):
        return ellipsoid_volume(body)
    if isinstance(body, Simplex):
        return body.volume()
    if isinstance(body, HPolytope):
        verts = _vertex_array(body, tolerances)
        a, b = _dedupe_halfspaces(body.normals, body.offsets, tolerances.dedupe)
        return _volume_recursive(verts, a, b, tolerances)
    if isinstance(body, VPolytope):
        verts = body.vertices
        if verts.shape[0] == verts.shape[1] + 1:
            return Simplex(verts).volume()
        a, b = facets_from_vertices(verts, tolerances.incidence)
        return _volume_recursive(verts, a, b, tolerances)
    raise TypeError(f"cannot take the volume of {type(body).__name__}")


def polar_of_points(points: np.ndarray) -> HPolytope:
    """Polar body {y : x.y <= 1 for every x in points}, as half-spaces."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    norms = np.linalg.norm(points, axis=1)
    if norms.min() <= 1e-14:
        raise ZeroPoint("polar of a set containing the origin is unbounded")
    return hpolytope_from_arrays(points, np.ones(points.shape[0]))


def ellipsoid_volume(ell: Ellipsoid) -> float:
    return unit_ball_volume(ell.dim) * float(np.linalg.det(ell.shape))


def ellipsoid_polar(ell: Ellipsoid) -> Ellipsoid:
    """Polar of a 0-centered ellipsoid: the shape matrix inverts."""
    if np.linalg.norm(ell.center) > 1e-10:
        raise NotCentered("polar requires an origin-centered ellipsoid")
    w, v = np.linalg.eigh(ell.shape)
    inv = (v / w) @ v.T
    return Ellipsoid(np.zeros(ell.dim), 0.5 * (inv + inv.T))


def _sqrtm_spd(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (mat + mat.T))
    w = np.clip(w, 0.0, None)
    out = (v * np.sqrt(w)) @ v.T
    return 0.5 * (out + out.T)


def ellipsoid_affine_image(ell: Ellipsoid, mat: np.ndarray, shift: np.ndarray) -> Ellipsoid:
    """Image of an ellipsoid under x -> mat @ x + shift."""
    gen = mat @ ell.shape
    return Ellipsoid(mat @ ell.center + shift, _sqrtm_spd(gen @ gen.T))


def reference_simplex(d: int) -> np.ndarray:
    """Regular simplex: d+1 unit vectors in R^d summing to zero, as rows."""
    ones = np.ones((d + 1, 1))
    q_full, _ = np.linalg.qr(ones, mode="complete")
    basis = q_full[:, 1:]  # orthonormal basis of the sum-zero hyperplane
    centered = np.eye(d + 1) - np.full((d + 1, d + 1), 1.0 / (d + 1))
    pts = math.sqrt((d + 1) / d) * centered @ basis
    return pts


def max_ellipsoid_in_simplex(simplex: Simplex) -> Ellipsoid:
    """Largest-volume ellipsoid inscribed in a simplex, in closed form.

    The regular simplex's extremal ellipsoid is its inscribed ball (radius
    1/d for unit circumradius); affine images of extremal ellipsoids are
    extremal, so the answer is that ball pushed through the affine map that
    carries the regular simplex onto this one.
    """
    d = simplex.dim
    ref = reference_simplex(d)
    q_edges = ref[1:] - ref[0]
    s_edges = simplex.vertices[1:] - simplex.vertices[0]
    mat = np.linalg.solve(q_edges, s_edges).T
    shift = simplex.vertices[0] - mat @ ref[0]
    shape = _sqrtm_spd(mat @ mat.T) / d
    center = shift  # image of the reference center (the origin)
    centroid = simplex.vertices.mean(axis=0)
    if np.linalg.norm(center - centroid) > 1e-9 * (1.0 + np.linalg.norm(centroid)):
        raise DegenerateSimplex("affine map did not carry centroid to centroid")
    return Ellipsoid(center, shape)
