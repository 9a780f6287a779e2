"""End-to-end subfamily selection with a replayable certificate.

The run moves the instance so its largest inscribed ellipsoid is the unit
ball, picks d well-spread contact points, builds the base simplex over the
origin and its largest inscribed ellipsoid, shoots a ray opposite that
ellipsoid's center to the boundary of the contact hull, rewrites the hit
point over at most d hull points, and contracts the ellipsoid to the origin.
The contact points touched along the way name at most 2d input half-spaces
whose intersection is provably small relative to the input's.

Every intermediate quantity lands in the Certificate so an independent
checker can replay each inequality from the serialized data alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import explicit_bound, simplex_volume_floor
from .config import DEFAULT, VERSION, Tolerances
from .dr import DRBasis, dr_select, sampled_basis
from .errors import (
    DegenerateSimplex,
    HellyError,
    MalformedCertificate,
    Misaligned,
    NumericalBreakdown,
    PipelineError,
    ReductionFailed,
    SubfamilyTooLarge,
)
from .geometry import (
    Ellipsoid,
    HPolytope,
    Simplex,
    VPolytope,
    facets_from_vertices,
    max_ellipsoid_in_simplex,
    polar_of_points,
    vertex_enumeration,
    volume,
)
from .john import NormalizedInstance, normalize_position
from .lp import LPStatus, lp_solve

_CENTER_FLOOR = 1e-10
_SAMPLE_CAP = 200

_ARRAY_FIELDS = {
    "normals": 2,
    "offsets": 1,
    "map_matrix": 2,
    "map_offset": 1,
    "norm_normals": 2,
    "norm_offsets": 1,
    "contact_points": 2,
    "contact_weights": 1,
    "contact_indices": 1,
    "basis": 2,
    "selected_rows": 1,
    "u": 1,
    "e1_shape": 2,
    "w": 1,
    "e2_shape": 2,
    "cara_rows": 1,
    "cara_coeffs": 1,
    "x_points": 2,
    "x_rows": 1,
    "g_indices": 1,
}
_INT_FIELDS = {"contact_indices", "selected_rows", "cara_rows", "x_rows", "g_indices"}


@dataclass(frozen=True, eq=False)
class Certificate:
    """Full transcript of one selection run.

    Index conventions: contact_indices maps contact rows to rows of the
    original family; selected_rows, cara_rows, and x_rows all index rows of
    contact_points; g_indices are rows of the original family. All geometry
    except (normals, offsets) lives in the normalized frame, and
    x_original = map_matrix @ x_normalized + map_offset converts back.
    """

    dim: int
    selector: str
    normals: np.ndarray
    offsets: np.ndarray
    map_matrix: np.ndarray
    map_offset: np.ndarray
    norm_normals: np.ndarray
    norm_offsets: np.ndarray
    contact_tol: float
    contact_points: np.ndarray
    contact_weights: np.ndarray
    contact_indices: np.ndarray
    basis: np.ndarray
    selected_rows: np.ndarray
    window_slack: float
    u: np.ndarray
    e1_shape: np.ndarray
    w: np.ndarray
    lam: float
    e2_shape: np.ndarray
    cara_rows: np.ndarray
    cara_coeffs: np.ndarray
    x_points: np.ndarray
    x_rows: np.ndarray
    g_indices: np.ndarray
    vol_f: float
    vol_g: float
    ratio: float
    bound: float
    tolerances: Tolerances = DEFAULT
    library: str = "hellycert " + VERSION

    def __post_init__(self):
        for name, ndim in _ARRAY_FIELDS.items():
            dtype = int if name in _INT_FIELDS else float
            arr = np.asarray(getattr(self, name), dtype=dtype)
            if arr.ndim != ndim:
                raise MalformedCertificate(f"{name} must have {ndim} axes")
            if not np.isfinite(arr).all():
                raise MalformedCertificate(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        d = int(self.dim)
        m = self.normals.shape[0]
        n = self.contact_points.shape[0]
        shapes = {
            "normals": (m, d),
            "offsets": (m,),
            "map_matrix": (d, d),
            "map_offset": (d,),
            "norm_normals": (m, d),
            "norm_offsets": (m,),
            "contact_points": (n, d),
            "contact_weights": (n,),
            "contact_indices": (n,),
            "basis": (d, d),
            "selected_rows": (d,),
            "u": (d,),
            "e1_shape": (d, d),
            "w": (d,),
            "e2_shape": (d, d),
            "x_points": (self.x_points.shape[0], d),
            "x_rows": (self.x_points.shape[0],),
            "g_indices": (self.x_points.shape[0],),
            "cara_rows": (self.cara_coeffs.shape[0],),
        }
        for name, want in shapes.items():
            if getattr(self, name).shape != want:
                raise MalformedCertificate(f"{name} has shape {getattr(self, name).shape}, want {want}")
        if self.selector not in ("dr", "pivovarov"):
            raise MalformedCertificate(f"unknown selector {self.selector!r}")
        for idx, limit in (
            (self.contact_indices, m),
            (self.selected_rows, n),
            (self.cara_rows, n),
            (self.x_rows, n),
            (self.g_indices, m),
        ):
            if idx.size and (idx.min() < 0 or idx.max() >= limit):
                raise MalformedCertificate("an index field points outside its table")
        for name in ("contact_tol", "window_slack", "lam", "vol_f", "vol_g", "ratio", "bound"):
            if not math.isfinite(float(getattr(self, name))):
                raise MalformedCertificate(f"{name} is not finite")

    @property
    def selected_points(self) -> np.ndarray:
        return self.contact_points[self.selected_rows]

    @property
    def s1_vertices(self) -> np.ndarray:
        return np.vstack([np.zeros(self.dim), self.selected_points])

    @property
    def s2_vertices(self) -> np.ndarray:
        return np.vstack([self.w, self.selected_points])

    @property
    def e1(self) -> Ellipsoid:
        return Ellipsoid(self.u, self.e1_shape)

    @property
    def e2(self) -> Ellipsoid:
        return Ellipsoid(np.zeros(self.dim), self.e2_shape)

    @property
    def subfamily_size(self) -> int:
        return self.x_points.shape[0]

    def subfamily(self) -> HPolytope:
        """The selected half-spaces, verbatim rows of the original family."""
        from .geometry import hpolytope_from_arrays

        return hpolytope_from_arrays(
            self.normals[self.g_indices], self.offsets[self.g_indices], normalize=False
        )


def build_S1(basis: DRBasis, enforce_floor: bool = True):
    """Simplex over the origin and the selected points, with its largest
    inscribed ellipsoid and that ellipsoid's center.

    The greedy windows force vol >= 1/(sqrt(d!) d^(d/2)); the volume also
    factors as the product of the window inner products over d! because the
    selected points are triangular in the basis coordinates. Both facts are
    certified here (the floor only when requested; sampled selections offer
    no floor).
    """
    d = basis.dim
    simplex = Simplex(np.vstack([np.zeros(d), basis.selected]))
    vol = simplex.volume()
    prod = float(np.prod(basis.inner_products()))
    if abs(vol * math.factorial(d) - prod) > 1e-9 * max(1.0, abs(prod)):
        raise NumericalBreakdown(
            f"volume {vol:.6e} disagrees with the triangular product {prod:.6e}"
        )
    if enforce_floor and vol < simplex_volume_floor(d) - 1e-9:
        raise DegenerateSimplex(
            f"selected simplex volume {vol:.6e} below the guaranteed floor"
        )
    ell = max_ellipsoid_in_simplex(simplex)
    return simplex, ell, ell.center


def ray_hit_boundary(hull: VPolytope, direction: np.ndarray):
    """Farthest point of the hull along a unit ray from the origin.

    Maximizes t with t*direction a convex combination of the hull points;
    the simplex method's basic solution spends one basic variable on t, so
    at most d combination weights are nonzero, which hands the follow-up
    hull rewrite its starting point for free.
    """
    pts = hull.vertices
    n, d = pts.shape
    direction = np.asarray(direction, dtype=float).ravel()
    if abs(np.linalg.norm(direction) - 1.0) > 1e-8:
        raise ValueError("ray direction must be a unit vector")
    a_eq = np.zeros((d + 1, n + 1))
    a_eq[:d, 0] = direction
    a_eq[:d, 1:] = -pts.T
    a_eq[d, 1:] = 1.0
    b_eq = np.zeros(d + 1)
    b_eq[d] = 1.0
    cost = np.zeros(n + 1)
    cost[0] = 1.0
    res = lp_solve(
        cost,
        a_eq=a_eq,
        b_eq=b_eq,
        nonneg=np.ones(n + 1, dtype=bool),
        maximize=True,
    )
    if res.status is not LPStatus.OPTIMAL:
        raise NumericalBreakdown(f"boundary ray LP ended {res.status.value}")
    t = float(res.x[0])
    if t < 1.0 / d - 1e-8:
        raise NumericalBreakdown(
            f"ray exits the contact hull at {t:.6e}, below the 1/d floor"
        )
    return t * direction, res.x[1:].copy()


def caratheodory_reduce(point, vertices, coeffs, drop_tol: float = 1e-12):
    """Rewrite a convex combination over at most d of its points.

    Repeatedly finds an affine dependence among the supported points (the
    point sits on a boundary face, so its supports are affinely dependent
    once more than d are active) and walks coefficients along it until one
    hits zero.
    """
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    point = np.asarray(point, dtype=float).ravel()
    coeffs = np.asarray(coeffs, dtype=float).copy()
    d = vertices.shape[1]
    if coeffs.min() < -1e-9 or abs(coeffs.sum() - 1.0) > 1e-9:
        raise ReductionFailed("input coefficients are not a convex combination")
    if np.linalg.norm(vertices.T @ coeffs - point) > 1e-8:
        raise ReductionFailed("input combination does not reproduce the point")
    coeffs[coeffs < drop_tol] = 0.0
    support = np.flatnonzero(coeffs)
    while support.size > d:
        pts = vertices[support]
        system = np.vstack([pts.T, np.ones(support.size)])
        _, svals, vh = np.linalg.svd(system)
        if svals[-1] > 1e-8:
            raise ReductionFailed(
                "supported points are affinely independent; the point is not "
                "on a boundary face"
            )
        gamma = vh[-1]
        if gamma.max() <= 0.0:
            gamma = -gamma
        movable = gamma > 1e-14
        theta = float((coeffs[support][movable] / gamma[movable]).min())
        shifted = coeffs[support] - theta * gamma
        shifted[shifted < drop_tol] = 0.0
        coeffs[support] = shifted
        support = np.flatnonzero(coeffs)
    out = coeffs[support]
    out = out / out.sum()
    if np.linalg.norm(vertices[support].T @ out - point) > 1e-8:
        raise ReductionFailed("reduced combination no longer reproduces the point")
    return support, out


def contract_E1(e1: Ellipsoid, u: np.ndarray, w: np.ndarray):
    """Contract the simplex ellipsoid toward the boundary point so its
    center lands on the origin.

    The ratio |w|/(|u|+|w|) does exactly that when w lies opposite u through
    the origin, and it never drops below 1/(d+1). A centered ellipsoid
    (|u| below 1e-10) needs no contraction; see the pipeline notes for why
    that branch cannot fire on selected simplices.
    """
    u = np.asarray(u, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    d = u.shape[0]
    if np.linalg.norm(u - e1.center) > 1e-10:
        raise Misaligned("u must be the center of the ellipsoid being contracted")
    nu = float(np.linalg.norm(u))
    nw = float(np.linalg.norm(w))
    if nu <= _CENTER_FLOOR:
        return Ellipsoid(np.zeros(d), e1.shape), 1.0
    if nw <= 1e-14:
        raise Misaligned("contraction center sits at the origin")
    cosine = float(u @ w) / (nu * nw)
    if cosine > -1.0 + 1e-8:
        raise Misaligned(f"w is not opposite u through the origin (cosine {cosine:.2e})")
    lam = nw / (nu + nw)
    center = w + lam * (u - w)
    if np.linalg.norm(center) > 1e-10:
        raise NumericalBreakdown(
            f"contraction center missed the origin by {np.linalg.norm(center):.2e}"
        )
    if lam < 1.0 / (d + 1) - 1e-9:
        raise NumericalBreakdown(f"contraction ratio {lam:.6e} below 1/(d+1)")
    return Ellipsoid(np.zeros(d), lam * e1.shape), lam


def assemble_subfamily(
    inst: NormalizedInstance,
    selector: str,
    basis: DRBasis,
    w: np.ndarray,
    lam: float,
    e1: Ellipsoid,
    e2: Ellipsoid,
    cara_rows: np.ndarray,
    cara_coeffs: np.ndarray,
    tolerances: Tolerances = DEFAULT,
) -> Certificate:
    """Merge the touched contact points into X, name the half-spaces they
    came from, compute both volumes, and fill the certificate.

    Re-checks the two containments the volume comparison rests on: the
    contracted ellipsoid inside the apex simplex, and every vertex of the
    selected intersection inside the contracted ellipsoid's polar.
    """
    dec = inst.decomposition
    d = inst.dim
    seen: dict[int, None] = {}
    for row in list(basis.indices) + list(cara_rows):
        seen.setdefault(int(row), None)
    x_rows = np.array(list(seen), dtype=int)
    if x_rows.size > 2 * d:
        raise SubfamilyTooLarge(f"{x_rows.size} selected points exceed 2d = {2 * d}")
    x_points = dec.points[x_rows]
    g_indices = dec.source_indices[x_rows]

    s2 = np.vstack([w, dec.points[basis.indices]])
    facet_a, facet_b = facets_from_vertices(s2)
    support = np.linalg.norm(facet_a @ e2.shape, axis=1)
    worst = float((support - facet_b).max())
    if worst > 1e-8:
        raise NumericalBreakdown(
            f"contracted ellipsoid leaves the apex simplex by {worst:.2e}"
        )

    x_star = polar_of_points(x_points)
    verts = vertex_enumeration(x_star, tolerances).vertices
    reach = float(np.linalg.norm(verts @ e2.shape, axis=1).max())
    if reach > 1.0 + 1e-8:
        raise NumericalBreakdown(
            f"a vertex of the selected intersection leaves the polar ellipsoid "
            f"(quadratic value {reach:.6f})"
        )

    vol_g = volume(VPolytope(verts, check_extreme=False), tolerances)
    vol_f = volume(inst.normalized, tolerances)
    ratio = vol_g / vol_f
    bound = explicit_bound(d)
    if selector == "dr" and ratio > bound * (1.0 + 1e-9):
        raise NumericalBreakdown(
            f"achieved ratio {ratio:.6e} exceeds the guaranteed bound {bound:.6e}"
        )

    return Certificate(
        dim=d,
        selector=selector,
        normals=inst.original.normals,
        offsets=inst.original.offsets,
        map_matrix=inst.map_matrix,
        map_offset=inst.map_offset,
        norm_normals=inst.normalized.normals,
        norm_offsets=inst.normalized.offsets,
        contact_tol=inst.contact_tol,
        contact_points=dec.points,
        contact_weights=dec.weights,
        contact_indices=dec.source_indices,
        basis=basis.basis,
        selected_rows=basis.indices,
        window_slack=basis.slack,
        u=e1.center,
        e1_shape=e1.shape,
        w=w,
        lam=lam,
        e2_shape=e2.shape,
        cara_rows=cara_rows,
        cara_coeffs=cara_coeffs,
        x_points=x_points,
        x_rows=x_rows,
        g_indices=g_indices,
        vol_f=vol_f,
        vol_g=vol_g,
        ratio=ratio,
        bound=bound,
        tolerances=tolerances,
    )


def _sample_selection(dec, seed) -> DRBasis:
    """Random alternative to the greedy pick: d contact points drawn
    i.i.d. with probabilities c_i/d. Draws whose simplex is numerically flat
    are rejected, since the downstream ellipsoid needs interior to live in;
    no window guarantee travels with the result."""
    rng = np.random.default_rng(seed)
    prob = dec.weights / dec.dim
    prob = prob / prob.sum()
    for _ in range(_SAMPLE_CAP):
        idx = rng.choice(dec.size, size=dec.dim, replace=True, p=prob)
        pts = dec.points[idx]
        if abs(np.linalg.det(pts)) > 1e-9:
            return DRBasis(
                basis=sampled_basis(pts),
                selected=pts,
                indices=idx,
                slack=0.0,
                validate=False,
            )
    raise DegenerateSimplex(f"no full-dimensional sample in {_SAMPLE_CAP} draws")


def select(
    poly: HPolytope,
    selector: str = "dr",
    seed: int | None = None,
    tolerances: Tolerances = DEFAULT,
) -> Certificate:
    """Run the whole construction on a bounded full-dimensional instance.

    Deterministic for the default greedy selector (input order decides
    ties); the sampling selector takes its randomness from seed. Errors are
    wrapped with the stage that raised them.
    """
    if selector not in ("dr", "pivovarov"):
        raise ValueError(f"unknown selector {selector!r}")

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PipelineError:
            raise
        except HellyError as exc:
            raise PipelineError(name, str(exc)) from exc

    inst = stage("normalize", normalize_position, poly, tolerances)
    dec = inst.decomposition
    d = poly.dim
    if selector == "dr":
        basis = stage("select", dr_select, dec)
        _, e1, u = stage("simplex", build_S1, basis)
    else:
        basis = stage("select", _sample_selection, dec, seed)
        _, e1, u = stage("simplex", build_S1, basis, enforce_floor=False)
    nu = np.linalg.norm(u)
    direction = -u / nu if nu > _CENTER_FLOOR else basis.basis[-1]
    hull = VPolytope(dec.points, check_extreme=False)
    w, coeffs = stage("ray", ray_hit_boundary, hull, direction)
    cara_rows, cara_coeffs = stage("reduce", caratheodory_reduce, w, dec.points, coeffs)
    e2, lam = stage("contract", contract_E1, e1, u, w)
    return stage(
        "assemble",
        assemble_subfamily,
        inst,
        selector,
        basis,
        w,
        lam,
        e1,
        e2,
        cara_rows,
        cara_coeffs,
        tolerances,
    )
