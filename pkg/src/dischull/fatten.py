"""Thickening kept subtrees of a generalized disc, approximating maps on it, and mapping it conformally.

A generalized disc is the closed unit disc with planar trees attached at
boundary points.  Fattening a selection of subtrees (each containing its
root) replaces them by thin fingers of half-width ``tau``: the result is a
simply connected region containing the disc and the kept subtrees, with the
leaves of the kept subtrees on its boundary and the removed parts of the
trees outside its closure.  Regions shrink as ``tau`` decreases and tend to
the disc plus the kept subtrees.

Maps analytic on the disc and continuous on the trees are approximated by
polynomials on dense samples (trees do not separate the plane, so
polynomials are dense).  Regions are mapped onto the unit disc by solving the
Kerzman-Stein integral equation for the Szego kernel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import shapely
from scipy.interpolate import CubicSpline
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import polylabel, unary_union

from .errors import ContractError
from .treecore import PlanarTree, SubtreeSelection

log = logging.getLogger(__name__)

QUAD_SEGS = 16          # 64 segments per full circle
ROUND_FRAC = 0.5        # closing radius as a fraction of tau
SLOT_MAX = 0.2          # largest half-angle of a slot around a removed edge
TOL_CR = 1e-6
N_BOUNDARY = 256
N_BOUNDARY_MAX = 2048


# geometry -------------------------------------------------------------------------

def _trees_of(gdisc) -> dict[int, PlanarTree]:
    """Planar trees with absolute positions, keyed by root sample."""
    if hasattr(gdisc, "layout"):
        lay = gdisc.layout()
        return {j: gdisc.attachments[j].tree.with_pos(pos) for j, pos in lay.items()}
    return {int(j): t for j, t in dict(gdisc).items() if t.n_edges > 0}


def _segments(tree: PlanarTree, edges) -> list[tuple[int, int, np.ndarray, np.ndarray]]:
    out = []
    for e in edges:
        u = tree.parent[e]
        out.append((u, e, np.asarray(tree.pos[u], float), np.asarray(tree.pos[e], float)))
    return out


def _seg_point_distance(p, a, b):
    d = b - a
    t = np.clip(np.dot(p - a, d) / max(np.dot(d, d), 1e-300), 0, 1)
    return float(np.linalg.norm(a + t * d - p))


def clearance(trees: Mapping[int, PlanarTree]) -> float:
    """Smallest gap between non-adjacent tree edges, edges and the circle, and edge lengths."""
    segs, keys = [], []
    gap = math.inf
    for j, T in trees.items():
        for u, e, a, b in _segments(T, T.edges):
            segs.append(LineString([a, b]))
            keys.append(((j, u), (j, e)))
            gap = min(gap, float(np.linalg.norm(b - a)))
            if u != T.root:
                gap = min(gap, _seg_point_distance(np.zeros(2), a, b) - 1.0)
    if not segs:
        return math.inf
    geoms = np.array(segs, dtype=object)
    i, k = np.triu_indices(len(segs), 1)
    adjacent = np.array([bool(set(keys[a]) & set(keys[b])) for a, b in zip(i, k)], bool)
    if np.any(~adjacent):
        d = shapely.distance(geoms[i[~adjacent]], geoms[k[~adjacent]])
        gap = min(gap, float(np.min(d)))
    return gap


def max_tau(gdisc) -> float:
    """Largest admissible thickness: a quarter of the clearance (1/4 when there are no trees)."""
    c = clearance(_trees_of(gdisc))
    return 0.25 if not math.isfinite(c) else 0.25 * c


def _disc_polygon(q: int = QUAD_SEGS) -> Polygon:
    # circumscribed polygon, so the closed unit disc lies inside
    return Point(0, 0).buffer((1 + 1e-9) / math.cos(math.pi / (4 * q)), quad_segs=q)


def _angle_gap(tree: PlanarTree, u: int, e: int, pos_u: np.ndarray, pos_e: np.ndarray) -> float:
    """Smallest angle at ``u`` between edge ``e`` and the other edges (or the circle tangent at a root)."""
    a = math.atan2(*(pos_e - pos_u)[::-1])
    others = []
    for c in tree.children[u]:
        if c != e:
            others.append(math.atan2(*(np.asarray(tree.pos[c]) - pos_u)[::-1]))
    if u != tree.root:
        others.append(math.atan2(*(np.asarray(tree.pos[tree.parent[u]]) - pos_u)[::-1]))
    else:
        t = math.atan2(pos_u[1], pos_u[0])
        others += [t + math.pi / 2, t - math.pi / 2]
    if not others:
        return math.pi
    return min(abs((o - a + math.pi) % (2 * math.pi) - math.pi) for o in others)


@dataclass
class FattenedRegion:
    """Thickened generalized disc.

    Attributes
    ----------
    tau : float
        Finger half-width.
    polygon : shapely Polygon
        The closed region; its exterior ring is the boundary.
    rounding : float
        Radius of the closing that rounds concave corners.
    components : dict
        ``j -> polygon`` of the finger part (outside the disc) of tree ``j``.
    kept, residual : list
        Segments ``(a, b)`` of kept and removed edges.
    leaves : ndarray
        Leaves of the kept subtrees (other than roots).
    """

    tau: float
    polygon: Polygon
    rounding: float
    components: dict
    kept: list
    residual: list
    leaves: np.ndarray
    max_tau: float
    report: dict = field(default_factory=dict)

    def contains(self, z) -> np.ndarray:
        """Membership of planar points (complex) in the closed region."""
        z = np.asarray(z, dtype=complex)
        return shapely.intersects_xy(self.polygon, z.real, z.imag)

    def boundary(self) -> np.ndarray:
        """Counterclockwise closed boundary polyline (last point repeats the first)."""
        ring = shapely.geometry.polygon.orient(self.polygon, 1.0).exterior
        xy = np.asarray(ring.coords)
        return xy[:, 0] + 1j * xy[:, 1]

    def boundary_distance(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return shapely.distance(self.polygon.exterior, shapely.points(z.real, z.imag))

    def skeleton(self):
        parts = [_disc_polygon(64)] + [LineString([a, b]) for a, b in self.kept]
        return unary_union(parts)

    def hausdorff_to_skeleton(self, n: int = 2000) -> float:
        """``sup`` distance from the region to disc plus kept subtrees (attained on the boundary)."""
        b = self.boundary()
        s = np.linspace(0, 1, n, endpoint=False)
        ring = self.polygon.exterior
        pts = [ring.interpolate(x, normalized=True) for x in s]
        sk = unary_union([Point(0, 0).buffer(1.0, quad_segs=256)] + [LineString([a, c]) for a, c in self.kept])
        d = shapely.distance(np.array(pts, dtype=object), sk)
        return float(max(np.max(d), np.max(shapely.distance(shapely.points(b.real, b.imag), sk))))

    def to_json(self) -> dict:
        b = self.boundary()
        return {"tau": self.tau, "rounding": self.rounding, "max_tau": self.max_tau,
                "boundary": [b.real.tolist(), b.imag.tolist()], "fingers": sorted(self.components),
                "leaves": self.leaves.tolist(), "report": self.report}


def fatten_region(gdisc, sel: Mapping[int, SubtreeSelection | set] | None = None, tau: float = 0.05,
                  quad_segs: int = QUAD_SEGS, round_frac: float = ROUND_FRAC,
                  check: bool = True) -> FattenedRegion:
    """Fatten the kept subtrees of a generalized disc.

    Parameters
    ----------
    gdisc : Neuron or mapping
        A neuron (its canonical layout is used) or ``j -> PlanarTree`` with
        absolute positions and roots on the unit circle.
    sel : mapping, optional
        ``j -> SubtreeSelection`` per tree; trees not listed keep only their
        root.  ``None`` keeps nothing.
    tau : float
        Finger half-width, in ``(0, max_tau]``.

    Returns
    -------
    FattenedRegion
        Union of the disc and round-capped fingers around the kept edges
        (leaf edges shortened by ``tau`` so that each leaf lands on the cap),
        closed with radius ``round_frac * tau``, minus thin wedges of fixed
        angle around every removed edge that starts at a kept vertex.

    Raises
    ------
    ContractError
        ``tau`` outside ``(0, max_tau]`` (the report names ``max_tau``), or a
        region that is not simply connected.
    """
    trees = _trees_of(gdisc)
    sel = dict(sel or {})
    tmax = max_tau(trees)
    if not 0 < tau <= tmax * (1 + 1e-12):
        raise ContractError("tau too large: fingers would collide", {"tau": tau, "max_tau": tmax},
                            stage="fatten_region")
    cl = clearance(trees)
    disc = _disc_polygon(quad_segs)
    fingers, kept, residual, leaves, slots = {}, [], [], [], []
    for j, T in trees.items():
        s = sel.get(j, {T.root})
        s = s if isinstance(s, SubtreeSelection) else SubtreeSelection(s)
        s.validate(T)
        k_edges = [e for e in T.edges if e in s.kept]
        r_edges = [e for e in T.edges if e not in s.kept]
        parts = []
        for u, e, a, b in _segments(T, k_edges):
            kept.append((a, b))
            is_leaf = not any(c in s.kept for c in T.children[e])
            if is_leaf:
                leaves.append(b)
                L = np.linalg.norm(b - a)
                b = a + (b - a) * (1 - tau / L)
            parts.append(LineString([a, b]).buffer(tau, quad_segs=quad_segs))
        if parts:
            fingers[j] = unary_union(parts)
        for u, e, a, b in _segments(T, r_edges):
            residual.append((a, b))
            if u in s.kept:
                L = float(np.linalg.norm(b - a))
                beta = min(SLOT_MAX, 0.4 * _angle_gap(T, u, e, a, b), math.atan(0.5 * cl / L))
                ang = math.atan2(*(b - a)[::-1])
                R = L / math.cos(beta)
                slots.append(Polygon([a, a + R * np.array([math.cos(ang + beta), math.sin(ang + beta)]),
                                      a + R * np.array([math.cos(ang - beta), math.sin(ang - beta)])]))
    r = round_frac * tau
    base = unary_union([disc, *fingers.values()])
    closed = unary_union([base.buffer(r, quad_segs=quad_segs).buffer(-r, quad_segs=quad_segs), base])
    region = closed.difference(unary_union(slots)) if slots else closed
    if region.geom_type == "MultiPolygon":
        # slots at a shared vertex can shave slivers off the circumscribed disc rim
        main = max(region.geoms, key=lambda g: g.area)
        rest = sum(g.area for g in region.geoms) - main.area
        if rest < 1e-5:
            region = main
    if region.geom_type != "Polygon" or len(region.interiors) > 0:
        raise ContractError("fattened region is not simply connected",
                            {"type": region.geom_type}, stage="fatten_region")
    comps = {j: f.difference(disc) for j, f in fingers.items()}
    out = FattenedRegion(float(tau), region, r, comps, kept, residual,
                         np.array(leaves, float).reshape(-1, 2), tmax)
    if check:
        out.report = check_region(out, quad_segs)
    return out


def check_region(reg: FattenedRegion, quad_segs: int = QUAD_SEGS, n_edge: int = 16) -> dict:
    """Sample-verify the region invariants; raise on failure."""
    th = 2 * np.pi * np.arange(512) / 512
    if not np.all(reg.contains(np.exp(1j * th))):
        raise ContractError("region does not contain the disc", {}, stage="fatten_region")
    x = np.linspace(0, 1, n_edge + 1)[1:-1]
    for a, b in reg.kept:
        pts = (a[0] + 1j * a[1]) + x * ((b[0] - a[0]) + 1j * (b[1] - a[1]))
        if not np.all(reg.contains(pts)):
            raise ContractError("region misses a kept edge", {"edge": [a.tolist(), b.tolist()]}, stage="fatten_region")
    tol = reg.tau * (1 - math.cos(math.pi / (2 * quad_segs))) + 1e-9
    leaf_gap = 0.0
    if len(reg.leaves):
        leaf_gap = float(np.max(reg.boundary_distance(reg.leaves[:, 0] + 1j * reg.leaves[:, 1])))
        if leaf_gap > tol:
            raise ContractError("a kept leaf is off the boundary", {"gap": leaf_gap, "tol": tol},
                                stage="fatten_region")
    xr = np.linspace(0, 1, n_edge + 1)[1:]
    for a, b in reg.residual:
        pts = (a[0] + 1j * a[1]) + xr * ((b[0] - a[0]) + 1j * (b[1] - a[1]))
        if np.any(reg.contains(pts)):
            raise ContractError("region meets a removed edge", {"edge": [a.tolist(), b.tolist()]},
                                stage="fatten_region")
    return {"leaf_gap": leaf_gap, "leaf_tol": tol, "area": float(reg.polygon.area),
            "vertices": len(reg.polygon.exterior.coords)}


# approximation ----------------------------------------------------------------------

def skeleton_samples(neuron, sel: Mapping | None = None, n_r: int = 12, n_th: int = 64,
                     n_edge: int = 16, tau: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Planar points of disc plus kept subtrees with the neuron's map at them.

    With ``tau`` the samples cover the fattening: the body is sampled out to
    radius ``1 + tau`` and every edge sample is repeated at distance ``tau``
    on both sides with the edge value, so the fit stays tame on the region
    boundary where it is later evaluated.
    """
    r = np.linspace(0, 1, n_r)
    if tau:
        r = np.append(r, 1 + tau)
    th = 2 * np.pi * np.arange(n_th) / n_th
    z = np.concatenate([[0j], (r[1:, None] * np.exp(1j * th)[None]).ravel()])
    pts, vals = [z], [neuron.body(z)]
    lay = neuron.layout()
    sel = dict(sel or {})
    x = np.linspace(0, 1, n_edge + 1)[1:]
    for j, pos in lay.items():
        D = neuron.attachments[j]
        s = sel.get(j, {D.tree.root})
        kept = s.kept if isinstance(s, SubtreeSelection) else set(s)
        for e in D.tree.edges:
            if e not in kept:
                continue
            a = complex(*pos[D.tree.parent[e]])
            b = complex(*pos[e])
            p = a + x * (b - a)
            v = np.array([D.phi(e, xi) for xi in x])
            pts.append(p)
            vals.append(v)
            if tau:
                nrm = 1j * (b - a) / abs(b - a)
                for side in (1, -1):
                    q = p + side * tau * nrm
                    far = np.abs(q) > 1 + tau
                    pts.append(q[far])
                    vals.append(v[far])
    return np.concatenate(pts), np.concatenate(vals)


@dataclass
class PolyMap:
    """``z -> sum_k c_k (z / scale)^k`` into C^2."""

    coeffs: np.ndarray
    scale: float = 1.0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex) / self.scale
        out = np.zeros(z.shape + (self.coeffs.shape[1],), dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * z[..., None] + c
        return out

    def to_json(self) -> dict:
        return {"degree": self.degree, "scale": self.scale,
                "re": self.coeffs.real.tolist(), "im": self.coeffs.imag.tolist()}


@dataclass
class Approximation:
    map: PolyMap
    error: float
    errors: dict
    best_errors: list
    reached: bool

    def to_json(self) -> dict:
        return {"degree": self.map.degree, "error": self.error, "errors": {str(k): v for k, v in self.errors.items()},
                "reached": self.reached}


def fit_polynomial(z: np.ndarray, values: np.ndarray, degree: int) -> tuple[PolyMap, float]:
    """Least-squares polynomial of the given degree and its sup error on the samples."""
    z = np.asarray(z, dtype=complex)
    values = np.asarray(values, dtype=complex).reshape(len(z), -1)
    scale = float(max(np.max(np.abs(z)), 1e-300))
    V = np.vander(z / scale, degree + 1, increasing=True)
    c, *_ = np.linalg.lstsq(V, values, rcond=None)
    pm = PolyMap(c, scale)
    return pm, float(np.max(np.abs(pm(z) - values)))


def approximate_on_fattening(z: np.ndarray, values: np.ndarray, eps: float = 1e-6,
                             degrees=(2, 4, 8, 16, 32, 48, 64)) -> Approximation:
    """Polynomial approximation of a map sampled on the skeleton (disc plus kept trees).

    Degrees are tried in order until the sup sample error is below ``eps``;
    otherwise the best fit is returned with ``reached = False``.
    """
    best, best_err = None, math.inf
    errors, running = {}, []
    for d in degrees:
        pm, err = fit_polynomial(z, values, d)
        errors[d] = err
        if err < best_err:
            best, best_err = pm, err
        running.append(best_err)
        if err < eps:
            break
    return Approximation(best, best_err, errors, running, best_err < eps)


def transport_halo(discs, old_centers, new_centers) -> list:
    """Translate each halo disc by the motion of its center point."""
    shift = np.asarray(new_centers, dtype=complex) - np.asarray(old_centers, dtype=complex)
    return [d.translated(s) for d, s in zip(discs, shift)]


# conformal maps ----------------------------------------------------------------------

@dataclass
class JordanCurve:
    """Smooth closed counterclockwise curve sampled for quadrature."""

    z: np.ndarray
    tangent: np.ndarray
    weights: np.ndarray

    @property
    def length(self) -> float:
        return float(np.sum(self.weights))

    @classmethod
    def from_polyline(cls, w: np.ndarray, n: int) -> "JordanCurve":
        """Periodic cubic spline in arclength through a closed polyline."""
        w = np.asarray(w, dtype=complex)
        if abs(w[0] - w[-1]) > 0:
            w = np.append(w, w[0])
        seg = np.abs(np.diff(w))
        keep = np.concatenate([[True], seg > 1e-14])
        w = w[keep]
        s = np.concatenate([[0], np.cumsum(np.abs(np.diff(w)))])
        w[-1] = w[0]
        sp = CubicSpline(s, np.stack([w.real, w.imag], -1), bc_type="periodic")
        L = s[-1]
        u = L * np.arange(n) / n
        p, dp = sp(u), sp(u, 1)
        z = p[:, 0] + 1j * p[:, 1]
        dz = dp[:, 0] + 1j * dp[:, 1]
        return cls(z, dz / np.abs(dz), np.abs(dz) * L / n)

    @classmethod
    def from_function(cls, f: Callable, df: Callable, n: int) -> "JordanCurve":
        t = 2 * np.pi * np.arange(n) / n
        z, dz = f(t), df(t)
        return cls(z, dz / np.abs(dz), np.abs(dz) * 2 * np.pi / n)


def _cauchy_kernel(w, z, T):
    """``H(w, z) = T(z) / (2 pi i (z - w))``."""
    return T / (2j * np.pi * (z - w))


def szego_kernel(curve: JordanCurve, a: complex) -> np.ndarray:
    """Szego kernel ``S(z_k, a)`` at the curve nodes (Kerzman-Stein equation, Nystrom)."""
    z, T, ds = curve.z, curve.tangent, curve.weights
    n = len(z)
    W = z[:, None]
    Z = z[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        H = T[None, :] / (2j * np.pi * (Z - W))                 # H(w_i, z_k)
        Hs = T[:, None] / (2j * np.pi * (W - Z))                # H(z_k, w_i) indexed [i, k]
        A = H - np.conj(Hs)
    A[np.arange(n), np.arange(n)] = 0.0
    rhs = np.conj(T / (2j * np.pi * (z - a)))                   # conj(H(a, w_i))
    return np.linalg.solve(np.eye(n) - A * ds[None, :], rhs)


@dataclass
class ConformalMap:
    """Normalized conformal map ``phi`` from the unit disc onto a region.

    Attributes
    ----------
    nodes : ndarray
        Boundary nodes ``w_k``.
    angles : ndarray
        Unwrapped angles of ``phi^{-1}(w_k)`` on the unit circle.
    coeffs : ndarray
        Taylor coefficients of ``phi``.
    center : complex
        ``phi(0)``.
    rotation : float
        Angle ``alpha`` with ``phi(z) = phi_0(e^{i alpha} z)``, where
        ``phi_0'(0) > 0``.
    """

    nodes: np.ndarray
    angles: np.ndarray
    coeffs: np.ndarray
    center: complex
    rotation: float
    dphi0: complex
    szego: np.ndarray
    szego_aa: float
    dtheta: np.ndarray
    report: dict

    def __call__(self, z) -> np.ndarray:
        """``phi`` by the barycentric Cauchy formula on the boundary nodes (boundary values on the circle)."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        out = np.empty(len(z), dtype=complex)
        on = np.abs(z) >= 1 - 1e-12
        out[on] = self.boundary_point(np.angle(z[on]))
        zi = z[~on] * np.exp(1j * self.rotation)
        t = np.exp(1j * self.angles)
        wt = t * self.dtheta
        with np.errstate(divide="ignore", invalid="ignore"):
            C = wt[None, :] / (t[None, :] - zi[:, None])
            out[~on] = (C @ self.nodes) / C.sum(axis=1)
        return out.reshape(shape)

    def series(self, z) -> np.ndarray:
        """Truncated Taylor series of ``phi``."""
        z = np.asarray(z, dtype=complex) * np.exp(1j * self.rotation)
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def derivative(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex) * np.exp(1j * self.rotation)
        k = np.arange(1, len(self.coeffs))
        return np.polynomial.polynomial.polyval(z, self.coeffs[1:] * k) * np.exp(1j * self.rotation)

    def _splines(self):
        if not hasattr(self, "_sp"):
            n = len(self.nodes)
            u = np.arange(n + 1)
            z = np.append(self.nodes, self.nodes[0])
            drift = 2 * np.pi / n
            th = np.append(self.angles, self.angles[0] + 2 * np.pi) - drift * u
            zs = CubicSpline(u, np.stack([z.real, z.imag], -1), bc_type="periodic")
            ts = CubicSpline(u, th, bc_type="periodic")
            self._sp = (zs, ts, drift)
        return self._sp

    def _angle_to_param(self, theta) -> np.ndarray:
        """Node parameter ``u`` with angle ``theta`` (angles increase with ``u``)."""
        zs, ts, drift = self._splines()
        n = len(self.nodes)
        a0 = self.angles[0]
        th = np.mod(np.asarray(theta, float) - a0, 2 * np.pi) + a0
        a = np.append(self.angles, a0 + 2 * np.pi)
        u = np.interp(th, a, np.arange(n + 1.0))
        for _ in range(4):
            g = ts(u) + drift * u - th
            u = np.clip(u - g / (ts(u, 1) + drift), 0, n)
        return u

    def boundary_point(self, theta) -> np.ndarray:
        """Boundary correspondence ``e^{i theta} -> phi(e^{i theta})``."""
        zs, _, _ = self._splines()
        th = np.asarray(theta, float) + self.rotation
        p = zs(self._angle_to_param(th))
        return p[..., 0] + 1j * p[..., 1]

    def boundary_angle(self, w) -> np.ndarray:
        """``arg phi^{-1}(w)`` for boundary points ``w`` (projection onto the boundary curve)."""
        zs, ts, drift = self._splines()
        n = len(self.nodes)
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        u = np.argmin(np.abs(w[:, None] - self.nodes[None]), axis=1).astype(float)
        for _ in range(8):
            p, dp, ddp = zs(u), zs(u, 1), zs(u, 2)
            r = p[:, 0] + 1j * p[:, 1] - w
            d1 = dp[:, 0] + 1j * dp[:, 1]
            d2 = ddp[:, 0] + 1j * ddp[:, 1]
            g = np.real(np.conj(r) * d1)
            h = np.abs(d1) ** 2 + np.real(np.conj(r) * d2)
            u = np.mod(u - g / h, n)
        return np.mod(ts(u) + drift * u - self.rotation, 2 * np.pi)

    def boundary_derivative_modulus(self) -> np.ndarray:
        """``|phi'|`` at ``phi^{-1}(w_k)`` from the Szego kernel: ``S(a,a) / (2 pi |S(w_k, a)|^2)``."""
        return self.szego_aa / (2 * np.pi * np.abs(self.szego) ** 2)

    def to_json(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "rotation": self.rotation,
                "dphi0": [self.dphi0.real, self.dphi0.imag], "n_coeffs": len(self.coeffs), "report": self.report}


def unit_circle(n: int) -> JordanCurve:
    return JordanCurve.from_function(lambda t: np.exp(1j * t), lambda t: 1j * np.exp(1j * t), n)


def _region_center(poly: Polygon) -> complex:
    c = poly.centroid
    if poly.buffer(-1e-9).contains(c):
        return complex(c.x, c.y)
    p = polylabel(poly, tolerance=1e-6)
    return complex(p.x, p.y)


def conformal_reparam(region, center: complex | None = None, tip: complex | None = None,
                      n: int = N_BOUNDARY, n_max: int = N_BOUNDARY_MAX, tol_cr: float = TOL_CR,
                      strict: bool = True) -> ConformalMap:
    """Conformal map from the unit disc onto a Jordan region.

    Parameters
    ----------
    region : FattenedRegion, shapely Polygon or JordanCurve
    center : complex, optional
        ``phi(0)``; defaults to the centroid (or the pole of inaccessibility
        when the centroid lies outside).
    tip : complex, optional
        Boundary point sent to 1.  Without it ``phi'(0) > 0``; with it the
        rotation is fixed by ``phi(1) = tip`` and ``arg phi'(0)`` is reported.

    Notes
    -----
    With ``f = phi^{-1}`` and ``S`` the Szego kernel of the boundary,
    ``f(w) = S(w, a)^2 T(w) / (i |S(w, a)|^2)`` on the boundary and
    ``|f'(w)| = 2 pi |S(w, a)|^2 / S(a, a)``.  Boundary angles integrate this
    positive density, so the correspondence is monotone even where the map
    crowds (long thin fingers).  Fourier coefficients of the boundary values
    are computed by quadrature over the nodes; the weight of negative modes
    measures the Cauchy-Riemann defect, and the node count doubles until it
    is below ``tol_cr``.  Interior values use the barycentric Cauchy formula.
    """
    poly = None
    if isinstance(region, FattenedRegion) and not region.kept:
        # no fingers: the region is the unit disc itself, not its polygon
        region = unit_circle
        center = 0j if center is None else center
    elif isinstance(region, FattenedRegion):
        poly = region.polygon
    elif isinstance(region, Polygon):
        poly = region
    if center is None:
        if poly is None:
            raise ValueError("center is required for a bare curve")
        center = _region_center(poly)
    a = complex(center)
    m = n
    while True:
        if poly is not None:
            ring = shapely.geometry.polygon.orient(poly, 1.0).exterior
            xy = np.asarray(ring.coords)
            curve = JordanCurve.from_polyline(xy[:, 0] + 1j * xy[:, 1], m)
        elif isinstance(region, JordanCurve):
            curve = region
        else:
            curve = region(m)
        cmap = _map_from_curve(curve, a)
        if cmap.report["cr_defect"] < tol_cr or m >= n_max or isinstance(region, JordanCurve):
            break
        m *= 2
    if tip is not None:
        rot = float(cmap.boundary_angle(np.array([tip]))[0])
        cmap.rotation = rot
        cmap.dphi0 = cmap.dphi0 * np.exp(1j * rot)
    cmap.report["nodes"] = len(curve.z)
    if strict and cmap.report["cr_defect"] >= tol_cr:
        raise ContractError("conformal map did not converge", cmap.report, stage="conformal_reparam")
    return cmap


def _periodic_antiderivative(g: np.ndarray) -> np.ndarray:
    """Cumulative sums of samples ``g`` of a smooth periodic density, spectrally (value 0 at node 0)."""
    n = len(g)
    G = np.fft.fft(g - g.mean())
    k = np.fft.fftfreq(n, 1.0 / n)
    H = np.zeros_like(G)
    nz = k != 0
    H[nz] = G[nz] / (2j * np.pi * k[nz] / n)
    if n % 2 == 0:
        H[n // 2] = 0
    out = np.real(np.fft.ifft(H)) + g.mean() * np.arange(n)
    return out - out[0]


def _map_from_curve(curve: JordanCurve, a: complex, n_coef: int | None = None) -> ConformalMap:
    S = szego_kernel(curve, a)
    dens = np.abs(S) ** 2 * curve.weights
    Saa = float(np.sum(dens))
    f = S ** 2 * curve.tangent / (1j * np.abs(S) ** 2)
    # angles by integrating the positive density |f'| = 2 pi |S|^2 / S(a, a): monotone by construction,
    # anchored to arg f where |S| is large (arg f is noisy where the map crowds)
    dth = 2 * np.pi * dens / Saa
    cum = _periodic_antiderivative(dth)
    if np.any(np.diff(cum) <= 0):
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dth[:-1] + dth[1:]))])
    anchor = float(np.angle(np.sum(dens * f * np.exp(-1j * cum))))
    ang = anchor + cum
    phase_err = float(np.max(np.abs(np.angle(f * np.exp(-1j * ang)))))
    mono = bool(np.all(dth > 0))
    if not mono:
        raise ContractError("boundary correspondence is not increasing", {}, stage="conformal_reparam")
    # d theta = 2 pi |S|^2 ds / S(a, a): Fourier coefficients of phi on the circle by quadrature in arclength
    # modes resolved by the node spacing in angle
    K = n_coef or max(4, min(len(curve.z) // 2, int(0.5 * np.pi / np.max(dth))))
    k = np.arange(-K, K + 1)
    E = np.exp(-1j * np.outer(k, ang))
    c = (E @ (curve.z * dth)) / (2 * np.pi)
    pos, neg = c[K:], c[:K]
    defect = float(np.sqrt(np.sum(np.abs(neg) ** 2) / np.sum(np.abs(pos[1:]) ** 2)))
    tail = float(np.sum(np.abs(pos[-max(1, K // 8):])) / np.sum(np.abs(pos[1:])))
    rep = {"cr_defect": defect, "tail": tail, "monotone": mono, "center_error": float(abs(pos[0] - a)),
           "szego_aa": Saa, "unit_modulus_error": float(np.max(np.abs(np.abs(f) - 1))),
           "phase_error": phase_err}
    return ConformalMap(curve.z, ang, pos, a, 0.0, complex(pos[1]), S, Saa, dth, rep)
