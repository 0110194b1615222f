"""End-to-end pipelines, fixtures and diagnostics.

The through-point pipeline turns a disc with boundary halo data into a disc
with boundary in ``G`` passing near a prescribed point of its image:

neuron -> fattening of its trees -> polynomial approximation -> conformal
map of the fattened region onto the unit disc -> Hartogs core data ->
squeezed Riemann-Hilbert solution -> extracted disc -> translation onto the
target.

Every stage logs its error into a provenance record whose entries bound the
final miss distance before the translation.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dendra import (
    ChainStep, HomotopyStep, Neuron, NeuronFamily, PairStep, build_pw_neuron_family, consecutive_distances,
    disc_grid_points, excrescence_with_halo, flag_discontinuities, is_small_embedded, kappa, preneuron_to_neuron,
)
from .discs import AnalyticDisc, DiscFamily, is_g_disc, linear_disc, small_embedded_disc
from .domains import ModelDomain, make_domain
from .errors import ContractError
from .fatten import (
    ConformalMap, FattenedRegion, approximate_on_fattening, conformal_reparam, fatten_region, max_tau,
    skeleton_samples,
)
from .peeler import SplicedFamily, splice_family
from .rhsolve import Arc, HartogsCoreData, extract_g_disc, solve_rh
from .treecore import PlanarTree, SubtreeSelection

log = logging.getLogger(__name__)

SCHEMA = "disc-hull/1"
N_FIBERS = 256
N_CENTRAL = 1024
MAX_ARC = 0.5

__all__ = [
    "SCHEMA", "make_domain", "ring_neuron", "run_through_point", "ThroughPointResult", "run_family_pipeline",
    "FamilyRun", "winding_diagnostic", "tree_trace", "tree_neuron", "torus_disc", "tilting_family", "tilting_lift",
]


# fixtures ------------------------------------------------------------------------------

def _orthogonal(p: np.ndarray) -> np.ndarray:
    """Unit vectors hermitian-orthogonal to the points ``p`` (shape ``(n, 2)``)."""
    v = np.stack([-np.conj(p[:, 1]), np.conj(p[:, 0])], -1)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


def ring_halo(body: AnalyticDisc, G: ModelDomain, r: float | None = None) -> Callable:
    """``theta -> small disc at body(e^{i theta})`` transverse to the image point."""
    r = 0.2 * G.diam_small if r is None else r

    def fn(theta):
        p = body(np.exp(1j * np.atleast_1d(theta)))
        v = _orthogonal(p)[0]
        return small_embedded_disc(p[0], v, r)

    return fn


def ring_neuron(body: AnalyticDisc, G: ModelDomain, M: int = 64, r: float | None = None) -> Neuron:
    """Tree-free neuron whose halo is a ring of small transverse discs along ``body``'s boundary."""
    p = excrescence_with_halo(body, [(0, M, ring_halo(body, G, r))], M=M, G=G)
    return preneuron_to_neuron(p, G)


def tilting_family(n_t: int = 13, a0: float = 0.002) -> DiscFamily:
    """Discs ``z -> (sin(a) z, cos(a))`` with the tilt ``a`` uniform from ``a0`` to ``pi / 2``.

    Every boundary lies on the unit sphere.  The first member is a tiny disc
    near ``(0, 1)``, the last the flat disc ``(z, 0)``.
    """
    ts = np.linspace(0, 1, n_t)
    a = a0 + (np.pi / 2 - a0) * ts
    discs = [AnalyticDisc(np.array([[0, math.cos(x)], [math.sin(x), 0]], dtype=complex), 1e6) for x in a]
    return DiscFamily(ts, discs)


def tilting_lift(Psi: DiscFamily, G: ModelDomain, M: int = 64, jumps: Sequence[tuple[float, int]] = ()):
    """Halo data over a family: a ring of transverse small discs, plus a turned disc at ``j`` once ``t > t_j``."""
    def lift(i, t):
        body = Psi.discs[i]
        base = ring_halo(body, G)
        active = sorted(j for tj, j in jumps if t > tj)
        if not active:
            return [(0, M, base)], {}
        turned = {}
        traces = {}
        for j in active:
            th = 2 * np.pi * j / M
            d = base(th)
            v = d.coeffs[1] / np.linalg.norm(d.coeffs[1])
            w = _orthogonal(v[None])[0]
            e = small_embedded_disc(d.center, 0.6 * w + v, np.linalg.norm(d.coeffs[1]))
            turned[j] = e
            c = d.center
            ts = np.linspace(0, 1, 9)
            push = 0.04 * c / np.linalg.norm(c)
            F1 = DiscFamily(ts, [d.translated(push * (1 - s)) for s in ts])
            F2 = DiscFamily(ts, [e.translated(push * (1 - s)) for s in ts])
            traces[j] = HomotopyStep(PairStep(d.translated(push), e.translated(push)), F1, F2)
        pieces = []
        for a, b in zip(active, active[1:] + [active[0] + M]):
            pieces.append((a, b, lambda th, a=a: turned[a] if abs(th - 2 * np.pi * a / M) < 1e-12 else base(th)))
        return pieces, traces

    return lift


def tree_trace(tree: PlanarTree, start: AnalyticDisc, end: AnalyticDisc | None = None, length: float = 0.005,
               rng=None, n: int = 9):
    """Equivalence trace whose dendrite has the shape of ``tree``.

    Every edge leaves its parent's center radially by ``length``; the halo
    turns through random small discs between consecutive children, from
    ``start`` to ``end`` (default ``start``).  All discs share the radius of
    ``start``.
    """
    if tree.n_edges == 0:
        raise ValueError("tree has no edges")
    rng = np.random.default_rng(rng)
    end = start if end is None else end
    r = float(np.linalg.norm(start.coeffs[1]))
    ts = np.linspace(0, 1, n)

    def turned(c):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        return small_embedded_disc(c, v, r)

    def sub(v, a, b, c):
        kids = tree.children[v]
        xs = [a] + [turned(c) for _ in kids[1:]] + [b]
        shift = length * c / np.linalg.norm(c)
        parts = []
        for i, ch in enumerate(kids):
            a2, b2 = xs[i].translated(shift), xs[i + 1].translated(shift)
            base = sub(ch, a2, b2, c + shift) if tree.children[ch] else PairStep(a2, b2)
            F1 = DiscFamily(ts, [xs[i].translated(shift * (1 - t)) for t in ts])
            F2 = DiscFamily(ts, [xs[i + 1].translated(shift * (1 - t)) for t in ts])
            parts.append(HomotopyStep(base, F1, F2))
        return parts[0] if len(parts) == 1 else ChainStep(tuple(parts))

    return sub(tree.root, start, end, start.center)


def tree_neuron(trees: dict, G: ModelDomain, body: AnalyticDisc | None = None, M: int = 64,
                rng=None, length: float | None = None) -> Neuron:
    """Neuron over ``body`` (default ``(z, 0)``) with a ring halo and a dendrite of the given shape at each root."""
    body = linear_disc([0, 0], [1, 0]) if body is None else body
    halo = ring_halo(body, G)
    rng = np.random.default_rng(rng)
    traces = {}
    for j, T in trees.items():
        if T.n_edges == 0:
            continue
        h = max(_height(T), 1)
        ell = min(0.02, 0.05 / h) if length is None else length
        traces[int(j) % M] = tree_trace(T, halo(2 * np.pi * j / M), length=ell, rng=rng)
    p = excrescence_with_halo(body, [(0, M, halo)], traces, M=M, G=G)
    return preneuron_to_neuron(p, G)


def _height(T: PlanarTree) -> int:
    def h(v):
        return 1 + max((h(c) for c in T.children[v]), default=-1)
    return h(T.root)


def torus_disc(sign: int = 1, degree: int = 40) -> AnalyticDisc:
    """``exp`` of ``z -> (z, -i z)`` (``sign = 1``) or ``(z, i z)`` (``sign = -1``), expanded in ``z``."""
    s = -1j if sign > 0 else 1j
    return AnalyticDisc.from_function(lambda z: np.stack([np.exp(z), np.exp(s * z)], -1), degree=degree,
                                      radius=3.0)


# winding -------------------------------------------------------------------------------

def _winding(x: np.ndarray, y: np.ndarray) -> float:
    ang = np.angle((x + 1j * y)[1:] / (x + 1j * y)[:-1])
    return float(np.sum(ang) / (2 * np.pi))


def winding_diagnostic(loop, mode: str = "log-modulus", tol: float = 1e-9) -> tuple[int, ...]:
    """Winding numbers of a closed sampled loop in ``C^2``.

    Parameters
    ----------
    loop : array (n, 2)
        Samples; a final sample equal to the first is optional.
    mode : ``"log-modulus"`` or ``"argument"``
        ``log-modulus`` winds the plane curve ``(log|w1|, log|w2|)`` around
        the origin and returns a 1-tuple; ``argument`` returns the winding of
        ``arg w1`` and ``arg w2`` around 0.

    Returns
    -------
    tuple of int
        A constant loop gives zeros.

    Raises
    ------
    ContractError
        The loop meets the singular locus (a zero coordinate, or the
        origin of the log-modulus plane), or is too coarse to resolve.
    """
    w = np.asarray(loop, dtype=complex)
    if w.ndim != 2 or w.shape[1] != 2 or len(w) < 3:
        raise ValueError("loop must have shape (n, 2) with n >= 3")
    if mode not in ("log-modulus", "argument"):
        raise ValueError(f"unknown mode {mode!r}")
    if np.max(np.abs(w - w[0])) <= tol:
        return (0,) if mode == "log-modulus" else (0, 0)
    if np.linalg.norm(w[-1] - w[0]) > tol:
        w = np.vstack([w, w[:1]])
    if np.any(np.abs(w) <= tol):
        raise ContractError("loop meets a coordinate axis", {}, stage="winding_diagnostic")
    if mode == "log-modulus":
        L = np.log(np.abs(w))
        if np.min(np.hypot(L[:, 0], L[:, 1])) <= tol:
            raise ContractError("loop meets the unit torus", {}, stage="winding_diagnostic")
        curves = [(L[:, 0], L[:, 1])]
    else:
        curves = [(w[:, 0].real, w[:, 0].imag), (w[:, 1].real, w[:, 1].imag)]
    out = []
    for x, y in curves:
        z = x + 1j * y
        if np.max(np.abs(np.angle(z[1:] / z[:-1]))) > np.pi / 2:
            raise ContractError("loop too coarse for a winding count", {}, stage="winding_diagnostic")
        v = _winding(x, y)
        out.append(int(round(v)))
    return tuple(out)


# through-point pipeline -------------------------------------------------------------------

def _pellicle_samples(n: Neuron) -> tuple[np.ndarray, list, np.ndarray]:
    """Planar point, halo disc and tree flag at every closed-halo sample (last repeats first)."""
    lay = n.layout()
    pts, discs, on_tree = [], [], []
    for kind, j, obj in n.items():
        if kind == "tree":
            D = obj.with_pos(lay[j]) if j in lay else obj
            p = D.sample_points()
            p = p[:, 0] + 1j * p[:, 1]
            seq = D.halo_samples
            flag = np.ones(len(seq), bool)
        else:
            th = 2 * np.pi * np.array([j, j + 1]) / n.M
            p = np.exp(1j * th)
            seq = list(obj)
            flag = np.zeros(2, bool)
        if pts:
            p, seq, flag = p[1:], seq[1:], flag[1:]
        pts.append(p)
        discs.extend(seq)
        on_tree.append(flag)
    return np.concatenate(pts), discs, np.concatenate(on_tree)


def _boundary_angles(P: np.ndarray, on_tree: np.ndarray, region: FattenedRegion | None,
                     cmap: ConformalMap) -> tuple[np.ndarray, np.ndarray]:
    """Angles on the unit circle for the pellicle samples, nondecreasing around the loop.

    Samples on the circle away from fingers snap to the nearby boundary; tree samples
    walking along an edge move by ``tau`` to the boundary on their side
    (the region lies to the left of the counterclockwise pellicle).  Samples
    at vertices are interpolated by index.
    """
    n = len(P)
    Q = P.copy()
    good = np.ones(n, bool)
    if region is not None and region.kept:
        tau = region.tau
        prev = np.roll(P, 1)
        nxt = np.roll(P, -1)
        prev[0], nxt[-1] = P[-2], P[1]
        d = nxt - prev
        moving = np.abs(d) > 1e-12
        # directions are only trusted when both neighbours are on the same segment
        straight = moving & (np.abs(np.angle((nxt - P) / np.where(P != prev, P - prev, 1))) < 1e-6)
        for i in range(n):
            if on_tree[i]:
                if straight[i] and abs(P[i]) > 1 + 2 * tau:
                    Q[i] = P[i] - 1j * tau * d[i] / abs(d[i])
                else:
                    good[i] = False
            elif region.boundary_distance(P[i])[0] > 0.5 * tau:
                good[i] = False
        idx = np.flatnonzero(good)
        Q[idx] = _snap(region, Q[idx])
    th = np.full(n, np.nan)
    idx = np.flatnonzero(good)
    th[idx] = cmap.boundary_angle(Q[idx])
    th = _monotone_loop(th)
    return th, Q


def _snap(region: FattenedRegion, q: np.ndarray) -> np.ndarray:
    import shapely
    ring = region.polygon.exterior
    pts = shapely.points(q.real, q.imag)
    s = shapely.line_locate_point(ring, pts)
    on = shapely.line_interpolate_point(ring, s)
    return shapely.get_x(on) + 1j * shapely.get_y(on)


def _monotone_loop(th: np.ndarray) -> np.ndarray:
    """Unwrap known angles into a nondecreasing loop of total 2 pi; fill the unknown ones by index."""
    n = len(th)
    known = np.flatnonzero(np.isfinite(th[:-1]))
    if len(known) == 0:
        raise ContractError("no pellicle sample could be placed on the boundary", {}, stage="boundary_angles")
    a = np.unwrap(th[known])
    a = a[0] + np.maximum.accumulate(np.maximum(a - a[0], 0))
    if a[-1] - a[0] >= 2 * np.pi:
        a = np.minimum(a, a[0] + 2 * np.pi * (1 - 1e-9))
    x = np.concatenate([known, [n - 1 + known[0]]])
    y = np.concatenate([a, [a[0] + 2 * np.pi]])
    full = np.interp(np.arange(known[0], known[0] + n), x, y)
    out = np.empty(n)
    out[known[0]:] = full[: n - known[0]]
    out[: known[0]] = full[n - known[0]:] - 2 * np.pi
    out[-1] = out[0] + 2 * np.pi
    return out


def _central_disc(F: Callable, cmap: ConformalMap | None, rot: float = 0.0,
                  n: int = N_CENTRAL) -> tuple[AnalyticDisc, float]:
    """``Phi_D = F o phi`` from boundary values, with its off-grid boundary error.

    Without a conformal map, ``phi`` is the rotation by ``rot``.
    """
    if cmap is None:
        k = np.arange(len(F.coeffs))[:, None]
        c = F.coeffs / F.scale ** k * np.exp(1j * rot * k)
        return AnalyticDisc(c, 1e6), 0.0
    th = 2 * np.pi * np.arange(n) / n
    vals = F(cmap.boundary_point(th))
    c = np.fft.fft(vals, axis=0) / n
    deg = n // 2 - 1
    disc = AnalyticDisc(c[: deg + 1], 1.0 + 1e-6)
    th2 = th + np.pi / n
    err = float(np.max(np.linalg.norm(disc(np.exp(1j * th2)) - F(cmap.boundary_point(th2)), axis=-1)))
    return disc, err


def _interp_fibers(theta: np.ndarray, discs: list, zeta_theta: np.ndarray) -> list[AnalyticDisc]:
    deg = max(d.degree for d in discs)
    C = np.stack([d.padded(deg) for d in discs])
    out = []
    for t in zeta_theta:
        t = theta[0] + np.mod(t - theta[0], 2 * np.pi)
        i = int(np.clip(np.searchsorted(theta, t, side="right") - 1, 0, len(theta) - 2))
        span = theta[i + 1] - theta[i]
        s = 0.0 if span <= 0 else (t - theta[i]) / span
        out.append(AnalyticDisc((1 - s) * C[i] + s * C[i + 1], 1e6))
    return out


def _gamma_from_fibers(fibers: list, G: ModelDomain, max_half: float = MAX_ARC) -> tuple[Arc, Arc]:
    n = len(fibers)
    ok = [is_small_embedded(d, G) for d in fibers]
    if not ok[0]:
        raise ContractError("the fiber at the axon tip is not small and embedded", {}, stage="gamma")
    k = 0
    while k + 1 < n // 2 and ok[k + 1] and ok[-(k + 1)] and 2 * np.pi * (k + 1) / n <= max_half:
        k += 1
    if k < 2:
        raise ContractError("no arc of small embedded fibers around the axon tip", {"k": k}, stage="gamma")
    h = 2 * np.pi * k / n
    gam = Arc(-h, h)
    return gam, gam.inner(0.5)


def _solve_preimage(F: Callable, target: np.ndarray, radius: float = 1.0, n_r: int = 16,
                    n_th: int = 64) -> tuple[complex, float]:
    """Point of the closed disc of ``radius`` whose image is closest to ``target`` (grid then Gauss-Newton)."""
    r = np.linspace(0, radius, n_r)
    th = 2 * np.pi * np.arange(n_th) / n_th
    grid = np.concatenate([[0j], (r[1:, None] * np.exp(1j * th)).ravel()])
    d = np.linalg.norm(F(grid) - target, axis=-1)
    z = complex(grid[np.argmin(d)])
    h = 1e-6
    for _ in range(30):
        v = F(np.array([z]))[0] - target
        J = (F(np.array([z + h]))[0] - F(np.array([z - h]))[0]) / (2 * h)
        nj = np.vdot(J, J).real
        if nj < 1e-300:
            break
        step = -np.vdot(J, v) / nj
        z_new = z + step
        if abs(z_new) > radius:
            z_new = z_new / abs(z_new) * radius
        if abs(z_new - z) < 1e-15:
            break
        z = z_new
    return z, float(np.linalg.norm(F(np.array([z]))[0] - target))


@dataclass
class ThroughPointResult:
    """Disc with boundary in ``G`` through the target, with the staged record."""

    disc: AnalyticDisc
    target: np.ndarray
    zeta: complex
    distance: float
    provenance: dict
    neuron: Neuron | None = None
    solution: object = None
    extraction: object = None

    @property
    def ok(self) -> bool:
        return bool(self.provenance.get("pass"))

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "kind": "through-point", "ok": self.ok,
                "target": [[c.real, c.imag] for c in self.target], "zeta": [self.zeta.real, self.zeta.imag],
                "distance": self.distance, "disc": self.disc.to_json(), "provenance": self.provenance}


@dataclass
class _Prepared:
    neuron: Neuron
    region: FattenedRegion | None
    approx: object
    cmap: ConformalMap | None
    central: AnalyticDisc
    data: HartogsCoreData
    gamma: Arc
    gamma_open: Arc
    rot: float = 0.0
    stages: dict = field(default_factory=dict)

    def to_unit_disc(self, z0: complex) -> tuple[complex, float]:
        """``phi^{-1}(z0)`` and the residual of ``Phi_D`` there against ``Phi^tau(z0)``."""
        if self.cmap is None:
            return complex(z0) * np.exp(-1j * self.rot), 0.0
        zeta, res = _solve_preimage(lambda z: np.stack([self.cmap(z), 0 * z], -1), np.array([z0, 0]),
                                    radius=1 - 1e-9)
        return zeta, res


def _prepare(neuron: Neuron, G: ModelDomain, tau: float | None = None, n_b: int = N_FIBERS,
             n_max: int = 1024, approx_eps: float = 1e-6) -> _Prepared:
    stages = {}
    trees = {j: D.tree for j, D in neuron.attachments.items() if D.tree.n_edges > 0}
    sel = {j: SubtreeSelection(frozenset(T.children)) for j, T in trees.items()}
    region = None
    cmap = None
    if trees:
        tau = 0.5 * max_tau(neuron) if tau is None else tau
        region = fatten_region(neuron, sel, tau)
        stages["fatten_region"] = {"tau": tau, "max_tau": region.max_tau,
                                   "hausdorff": region.hausdorff_to_skeleton(), **region.report}
    z, vals = skeleton_samples(neuron, sel, tau=tau if region is not None else None)
    approx = approximate_on_fattening(z, vals, eps=approx_eps)
    stages["approximate_on_fattening"] = {"degree": approx.map.degree, "error": approx.error,
                                          "reached": approx.reached}
    if region is not None:
        if neuron.axon[0] == "ring":
            tip = neuron.root_point(neuron.axon[1])
        else:
            _, j, v = neuron.axon
            tip = complex(*neuron.layout()[j][v])
        cmap = conformal_reparam(region, tip=tip, strict=False, n_max=n_max)
        stages["conformal_reparam"] = cmap.report
    else:
        stages["conformal_reparam"] = {"identity": True, "cr_defect": 0.0}
    rot = 2 * np.pi * neuron.axon[1] / neuron.M if cmap is None and neuron.axon[0] == "ring" else 0.0
    central, cerr = _central_disc(approx.map, cmap, rot)
    stages["central"] = {"degree": central.degree, "boundary_error": cerr}
    # halo on the pellicle, transported to the region boundary and read off on the circle
    P, discs, on_tree = _pellicle_samples(neuron)
    if cmap is None:
        theta = np.angle(P)
        theta = np.concatenate([[0.0], np.mod(theta[1:-1], 2 * np.pi), [2 * np.pi]]) if len(P) > 1 else theta
        theta = np.maximum.accumulate(theta) - rot
        Q = P
    else:
        theta, Q = _boundary_angles(P, on_tree, region, cmap)
    shift = approx.map(Q) - np.array([d.center for d in discs])
    moved = [d.translated(s) for d, s in zip(discs, shift)]
    stages["halo_transport"] = {"max_shift": float(np.max(np.linalg.norm(shift, axis=-1)))}
    zeta_th = 2 * np.pi * np.arange(n_b) / n_b
    fibers = _interp_fibers(theta, moved, zeta_th)
    cen = central(np.exp(1j * zeta_th))
    rec = np.array([np.linalg.norm(c - f.center) for c, f in zip(cen, fibers)])
    fibers = [f.translated(c - f.center) for f, c in zip(fibers, cen)]
    stages["fibers"] = {"count": n_b, "recenter": float(rec.max())}
    data = HartogsCoreData.from_discs(central, fibers)
    gam, gam_open = _gamma_from_fibers(fibers, G)
    stages["gamma"] = {"gamma": gam.to_json(), "gamma_open": gam_open.to_json()}
    return _Prepared(neuron, region, approx, cmap, central, data, gam, gam_open, rot, stages)


def run_through_point(G: ModelDomain, phi, target, eps: float = 0.05, z0: complex | None = None,
                      tau: float | None = None, extra: dict | None = None, n_b: int = N_FIBERS,
                      fiber_point: complex = 1.0, rho_min: float | None = None, rng=0) -> ThroughPointResult:
    """Disc with boundary in ``G`` through (a point within ``eps`` of) ``target``.

    Parameters
    ----------
    G : ModelDomain
    phi : Neuron
        A neuron or preneuron carrying the boundary halo; ``phi.body`` is the
        disc whose image contains ``target``.
    target : array (2,)
        Point of ``phi.body(D)`` (up to the approximation error).
    eps : float
        Riemann-Hilbert tolerance.
    z0 : complex, optional
        Preimage of the target under the body; found by least squares when
        omitted.
    extra : dict, optional
        Traces passed to :func:`preneuron_to_neuron` for the axon.
    rho_min : float, optional
        Starting squeeze level on the inner arc; lowered until clause 3 holds.

    Returns
    -------
    ThroughPointResult
        ``provenance`` lists every stage with its error; ``budget`` bounds
        the miss distance before the final translation.

    Raises
    ------
    ContractError
        From the first failing stage, tagged with its name.
    """
    target = np.asarray(target, dtype=complex).reshape(2)
    neuron = preneuron_to_neuron(phi, G, extra) if phi.axon is None else phi
    kap = kappa(neuron, G)
    prep = _prepare(neuron, G, tau, n_b)
    stages = dict(prep.stages)
    stages["kappa"] = kap.to_json()
    F = prep.approx.map
    if z0 is None:
        z0, miss = _solve_preimage(F, target)
    else:
        miss = float(np.linalg.norm(F(np.array([z0]))[0] - target))
    if miss > eps:
        raise ContractError("target is not in the image of the disc", {"miss": miss, "eps": eps},
                            stage="run_through_point")
    zeta, _ = prep.to_unit_disc(z0)
    inv = float(np.linalg.norm(prep.central(np.array([zeta]))[0] - F(np.array([z0]))[0]))
    stages["preimage"] = {"z0": [z0.real, z0.imag], "zeta": [zeta.real, zeta.imag], "miss": miss,
                          "conformal_inverse": inv}
    kw = {} if rho_min is None else {"rho_min": rho_min}
    sol = solve_rh(prep.data, prep.gamma, prep.gamma_open, np.array([zeta]), eps=eps, **kw)
    stages["solve_rh"] = sol.contract
    ex = extract_g_disc(sol, fiber_point, G, kappa_margin=kap.margin, rng=rng)
    stages["extract_g_disc"] = ex.report
    f = ex.disc
    hit = f(np.array([zeta]))[0]
    shift = target - hit
    shift_norm = float(np.linalg.norm(shift))
    exact = sol(np.array([zeta]), np.array([complex(fiber_point)]))[0]
    budget = {"approximation_miss": miss, "conformal_inverse": inv,
              "rh_clause3": sol.contract["clause3"]["error"],
              "disc_representation": float(np.linalg.norm(hit - exact))}
    total = float(sum(budget.values()))
    f = f.translated(shift)
    rep = is_g_disc(f, G)
    bmargin = float(np.min(G.margin(f.boundary())))
    dist = float(np.linalg.norm(f(np.array([zeta]))[0] - target))
    stages["translate"] = {"shift": shift_norm, "g_disc": rep.to_json(), "boundary_margin": bmargin,
                           "distance": dist}
    prov = {"stages": stages, "budget": budget, "budget_total": total,
            "budget_consistent": bool(shift_norm <= total * (1 + 1e-6) + 1e-12),
            "margin_floor": kap.margin - 5 * eps}
    prov["pass"] = bool(rep.ok and dist < eps and bmargin > 0 and bmargin >= kap.margin - 5 * eps
                        and prov["budget_consistent"])
    if not rep.ok:
        raise ContractError("translated disc is not a G-disc", prov, stage="translate")
    log.info("through-point: shift %.3g, margin %.3g", shift_norm, bmargin)
    return ThroughPointResult(f, target, zeta, dist, prov, neuron, sol, ex)


# family pipeline --------------------------------------------------------------------------

@dataclass
class FamilyRun:
    """Output of the family pipeline."""

    params: np.ndarray
    discs: list
    steps: np.ndarray
    delta_cont: float
    jumps: list
    first_in_G: bool
    first_margin: float
    reports: list
    spliced: SplicedFamily
    family: NeuronFamily
    center_drift: float = 0.0

    @property
    def ok(self) -> bool:
        return self.first_in_G and not self.jumps and bool(np.all(self.steps < self.delta_cont))

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "kind": "family-run", "ok": self.ok, "params": self.params.tolist(),
                "steps": self.steps.tolist(), "delta_cont": self.delta_cont, "jumps": self.jumps,
                "first_in_G": self.first_in_G, "first_margin": self.first_margin, "center_drift": self.center_drift,
                "splice": self.spliced.to_json(), "members": self.reports}


def run_family_pipeline(Psi: DiscFamily, lift: Callable, gamma: Arc, G: ModelDomain, eps: float = 0.05,
                        fiber_point: complex = 1.0, M: int = 64, n_b: int = N_FIBERS,
                        n_max: int = 512, workers: int = 1) -> FamilyRun:
    """Family of discs with boundary in ``G`` over a family of bodies with halo data.

    Builds the neuron family, splices its jumps away, fattens every member
    with a common ``tau``, solves the squeezed Riemann-Hilbert problem with
    the same ``eps`` and extracts ``f_t = H_t(., fiber_point)``.  The first
    member must lie entirely in ``G``; the output must be discretely
    continuous (every step below ten times the median nonzero step).
    Members are independent and run on ``workers`` threads.
    ``center_drift`` is the largest distance between ``f_t(0)`` and the
    body's image of the conformal center.
    """
    fam = build_pw_neuron_family(Psi, lift, gamma, G, M=M)
    sp = splice_family(fam, gamma, G)
    taus = [max_tau(n) for n in sp.neurons if any(D.tree.n_edges for D in n.attachments.values())]
    tau = 0.5 * min(taus) if taus else None

    def member(tn):
        t, n = tn
        prep = _prepare(n, G, tau, n_b, n_max=n_max)
        zeta, _ = prep.to_unit_disc(0.0)
        sol = solve_rh(prep.data, prep.gamma, prep.gamma_open, np.array([zeta]), eps=eps)
        ex = extract_g_disc(sol, fiber_point, G)
        c = prep.cmap(np.zeros(1))[0] if prep.cmap is not None else 0j
        drift = float(np.linalg.norm(ex.disc(np.zeros(1))[0] - n.body(np.array([c]))[0]))
        rep = {"t": float(t), "clause3": sol.contract["clause3"]["error"], "rho_min": sol.contract["rho_min"],
               "g_disc": ex.report["g_disc"], "cr_defect": prep.stages["conformal_reparam"].get("cr_defect", 0.0)}
        return ex.disc, rep, drift

    items = list(zip(sp.params, sp.neurons))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(member, items))
    else:
        results = [member(x) for x in items]
    discs = [r[0] for r in results]
    reports = [r[1] for r in results]
    drift = [r[2] for r in results]
    steps = consecutive_distances(discs)
    moving = steps[steps > 1e-15]
    delta = float(10 * np.median(moving)) if len(moving) else 1e-12
    jumps, _ = flag_discontinuities(steps, delta=delta / 10)
    first_pts = disc_grid_points(discs[0])
    m0 = float(np.min(G.margin(first_pts)))
    return FamilyRun(np.asarray(sp.params, float), discs, steps, delta, jumps, m0 > 0, m0, reports, sp, fam,
                     max(drift))
