"""Dendrites, haloes, equivalence traces and neurons.

A dendrite is stored as its pellicle *word*: a list of :class:`Step` objects,
each one side of an edge (``"L"`` going away from the root, ``"R"`` coming
back) or a dwell at a vertex (``"D"``), during which the planar point stays
put while the disc changes with fixed center.  Every step carries its halo
samples and, for edge steps, the images in C^2 of equispaced points of the
edge.  The tree, the map of the tree and the halo are all read off the word,
so mirroring a dendrite is reversing its word and gluing dendrites at a
root is concatenation.

A neuron is the closed unit disc with a ring of ``M`` boundary samples at
the angles ``2 pi j / M``, dendrites attached at some of the sample points,
and an axon.  Its closed pellicle walks the circle counterclockwise and
inserts each attached dendrite's word at its root.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .discs import AnalyticDisc, DiscFamily, is_g_disc, perturb_to_immersion
from .errors import ContractError
from .treecore import LEFT, RIGHT, PellicleWalk, PlanarTree, embed_planar, tree_to_json

log = logging.getLogger(__name__)

TOL_CENTER = 1e-9
TOL_MATCH = 1e-12
SEG_SAMPLES = 8
DISC_GRID = (8, 24)
RING_SIZE = 64


# helpers ----------------------------------------------------------------------

def coeff_distance(a: AnalyticDisc, b: AnalyticDisc) -> float:
    if a is b:
        return 0.0
    x, y = a.coeffs, b.coeffs
    if len(x) < len(y):
        x, y = y, x
    m = len(y)
    out = np.max(np.abs(x[:m] - y)) if m else 0.0
    if len(x) > m:
        out = max(out, np.max(np.abs(x[m:])))
    return float(out)


def consecutive_distances(discs: Sequence[AnalyticDisc]) -> np.ndarray:
    """``coeff_distance`` between neighbours of a disc sequence, vectorized."""
    if len(discs) < 2:
        return np.zeros(0)
    deg = max(d.degree for d in discs)
    X = _coeff_stack(discs, deg)
    out = np.max(np.abs(X[1:] - X[:-1]), axis=-1)
    same = np.array([a is b for a, b in zip(discs, discs[1:])])
    out[same] = 0.0
    return out


def disc_grid_points(d: AnalyticDisc, n_r: int = DISC_GRID[0], n_th: int = DISC_GRID[1]) -> np.ndarray:
    """Images of a polar grid of the closed unit disc, boundary included."""
    r = np.linspace(0.0, 1.0, n_r)
    th = 2 * np.pi * np.arange(n_th) / n_th
    z = np.concatenate([[0j], (r[1:, None] * np.exp(1j * th)[None]).ravel()])
    return d(z)


def is_small_embedded(d: AnalyticDisc, G, diam_small: float | None = None) -> bool:
    """Small diameter, immersed, and the whole closed disc inside ``G``."""
    diam_small = G.diam_small if diam_small is None else diam_small
    return bool(d.diameter() < diam_small and d.is_immersed() and np.all(G.contains(disc_grid_points(d))))


def interpolate_discs(d1: AnalyticDisc, d2: AnalyticDisc, n: int) -> list[AnalyticDisc]:
    """Coefficientwise segment from ``d1`` to ``d2`` with ``n + 1`` samples (endpoints kept)."""
    if n < 1:
        raise ValueError("need at least one interval")
    deg = max(d1.degree, d2.degree)
    a, b = d1.padded(deg), d2.padded(deg)
    rad = min(d1.radius, d2.radius)
    mid = [AnalyticDisc((1 - u) * a + u * b, rad) for u in np.linspace(0, 1, n + 1)[1:-1]]
    return [d1, *mid, d2]


def shrink_discs(d: AnalyticDisc, rho_end: float, n: int) -> list[AnalyticDisc]:
    """``d(rho z)`` for ``rho`` from 1 down to ``rho_end``; the center never moves."""
    return [d] + [d.scaled_argument(r) for r in np.linspace(1.0, rho_end, n + 1)[1:]]


# words ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Step:
    """One step of a pellicle word.

    Attributes
    ----------
    kind : {"L", "R", "D"}
    halo : tuple of AnalyticDisc
        ``n + 1`` samples in walking order.
    emap : ndarray or None
        ``(n + 1, 2)`` images of equispaced edge points, ordered from the
        upper vertex to the lower one whatever the walking direction.
    tag : object
        Free provenance label, used by layouts.
    """

    kind: str
    halo: tuple
    emap: np.ndarray | None = None
    tag: object = None

    @property
    def n(self) -> int:
        return len(self.halo) - 1

    def reversed(self, tag=None) -> "Step":
        kind = {"L": "R", "R": "L", "D": "D"}[self.kind]
        return Step(kind, tuple(reversed(self.halo)), self.emap, self.tag if tag is None else tag)

    def walk_centers(self) -> np.ndarray:
        """Images of the planar points visited, in walking order."""
        if self.kind == "L":
            return self.emap
        if self.kind == "R":
            return self.emap[::-1]
        return np.repeat(self.halo[0].center[None], len(self.halo), axis=0)


def edge_step(kind: str, halo: Sequence[AnalyticDisc], emap=None, tag=None) -> Step:
    """Edge step; the edge image defaults to the halo centers."""
    halo = tuple(halo)
    if emap is None:
        c = np.array([d.center for d in halo])
        emap = c if kind == "L" else c[::-1]
    return Step(kind, halo, np.asarray(emap, dtype=complex), tag)


def dwell_step(halo: Sequence[AnalyticDisc], tag=None) -> Step:
    return Step("D", tuple(halo), None, tag)


def reverse_word(word: Sequence[Step], mark: Callable | None = None) -> list[Step]:
    """Word of the mirror dendrite: steps reversed, ``L`` and ``R`` swapped."""
    return [s.reversed(None if mark is None else mark(s.tag)) for s in reversed(word)]


def word_halo(word: Sequence[Step], tol: float = TOL_MATCH, where: str = "") -> list[AnalyticDisc]:
    """Concatenated halo samples, shared junction samples counted once."""
    out: list[AnalyticDisc] = []
    for i, s in enumerate(word):
        if out:
            gap = coeff_distance(out[-1], s.halo[0])
            if gap > tol:
                raise ContractError("halo values do not match at a junction",
                                    {"step": i, "where": where, "gap": gap}, stage="halo")
            out.extend(s.halo[1:])
        else:
            out.extend(s.halo)
    return out


def word_intervals(word: Sequence[Step]) -> int:
    return sum(s.n for s in word)


def check_balanced(word: Sequence[Step]) -> None:
    """Every ``R`` step closes the latest open ``L`` step with the same edge image."""
    stack: list[Step] = []
    for i, s in enumerate(word):
        if s.kind == "L":
            stack.append(s)
        elif s.kind == "R":
            if not stack:
                raise ContractError("word returns above the root", {"step": i}, stage="word")
            top = stack.pop()
            if top.emap.shape != s.emap.shape or np.max(np.abs(top.emap - s.emap)) > TOL_CENTER:
                raise ContractError("the two sides of an edge disagree", {"step": i}, stage="word")
    if stack:
        raise ContractError("word does not return to the root", {"open_edges": len(stack)}, stage="word")


def word_prefix(word: Sequence[Step], m: int) -> list[Step]:
    """First ``m`` sample intervals of a word, closed off at the point reached.

    A prefix ending inside an ``L`` step cuts that edge.  A prefix ending
    inside an ``R`` step cuts the edge where the walk stands; the matching
    ``L`` step is split there so the stretch already walked back becomes a
    separate edge hanging at the cut point.
    """
    out: list[Step] = []
    stack: list[int] = []
    left = m
    for s in word:
        if left <= 0:
            break
        if s.n <= left:
            out.append(s)
            left -= s.n
            if s.kind == "L":
                stack.append(len(out) - 1)
            elif s.kind == "R":
                stack.pop()
            continue
        j, left = left, 0
        if s.kind == "L":
            out.append(Step("L", s.halo[:j + 1], s.emap[:j + 1], ("part", s.tag)))
        elif s.kind == "D":
            out.append(Step("D", s.halo[:j + 1], None, s.tag))
        else:
            i_l = stack.pop()
            ls = out[i_l]
            cut = ls.n - j
            upper = Step("L", ls.halo[:cut + 1], ls.emap[:cut + 1], ("e1", ls.tag))
            lower = Step("L", ls.halo[cut:], ls.emap[cut:], ("e2", ls.tag))
            out[i_l:i_l + 1] = [upper, lower]
            out.append(Step("R", s.halo[:j + 1], s.emap[cut:], ("e2", s.tag)))
    return out


def fold_word(word: Sequence[Step], m: int) -> list[Step]:
    """Prefix of ``m`` intervals followed by its mirror: the twin-growth word."""
    pre = word_prefix(word, m)
    return pre + reverse_word(pre, mark=lambda t: ("mirror", t))


# dendrites --------------------------------------------------------------------

def _walk_tree(word: Sequence[Step]):
    """Children lists, the vertex created by each ``L`` step, and each step's start vertex."""
    children: dict[int, list[int]] = {0: []}
    created: dict[int, int] = {}
    at: list[int] = []
    edge: list[int | None] = []
    stack = [0]
    nxt = 1
    for i, s in enumerate(word):
        at.append(stack[-1])
        if s.kind == "L":
            v = nxt
            nxt += 1
            children[stack[-1]].append(v)
            children[v] = []
            created[i] = v
            stack.append(v)
            edge.append(v)
        elif s.kind == "R":
            edge.append(stack.pop())
        else:
            edge.append(None)
    return {v: tuple(c) for v, c in children.items()}, created, at, edge


class Dendrite:
    """Embedded tree, its map into C^2 and a halo, all given by a pellicle word.

    Parameters
    ----------
    word : sequence of Step
        Balanced word; may be empty (a bare point without halo).
    pos : dict, optional
        Planar positions per vertex.  Defaults to :func:`embed_planar`.
    root_image : point in C^2, optional
        Image of the root; needed only for the empty word.
    """

    def __init__(self, word: Sequence[Step], pos: dict | None = None, root_image=None, check: bool = True,
                 point_disc: AnalyticDisc | None = None):
        self.word = list(word)
        self.point_disc = point_disc
        if check:
            check_balanced(self.word)
        ch, created, at, edge = _walk_tree(self.word)
        self._created, self._at, self._edge = created, at, edge
        tree = PlanarTree(0, ch)
        self.tree = tree.with_pos(pos) if pos is not None else embed_planar(tree)
        self.edge_maps: dict[int, np.ndarray] = {v: self.word[i].emap for i, v in created.items()}
        imgs: dict[int, np.ndarray] = {}
        for i, s in enumerate(self.word):
            wc = s.walk_centers()
            imgs.setdefault(at[i], wc[0])
            if s.kind == "L":
                imgs.setdefault(created[i], wc[-1])
        if not imgs:
            if root_image is None and point_disc is not None:
                root_image = point_disc.center
            imgs[0] = None if root_image is None else np.asarray(root_image, dtype=complex)
        self.vertex_images = imgs
        self._halo = word_halo(self.word) if self.word else ([point_disc] if point_disc is not None else [])
        self._cum = np.concatenate([[0], np.cumsum([s.n for s in self.word])]).astype(int)

    # structure ----------------------------------------------------------------
    @property
    def n_intervals(self) -> int:
        return int(self._cum[-1])

    @property
    def halo(self) -> DiscFamily | None:
        n = self.n_intervals
        if n == 0:
            return None
        return DiscFamily(np.arange(n + 1) / n, self._halo)

    @property
    def halo_samples(self) -> list[AnalyticDisc]:
        return self._halo

    @property
    def start(self) -> AnalyticDisc:
        return self._halo[0]

    @property
    def end(self) -> AnalyticDisc:
        return self._halo[-1]

    @property
    def root_image(self):
        return self.vertex_images[0]

    @property
    def pellicle(self) -> PellicleWalk:
        events = [(self._edge[i], LEFT if s.kind == "L" else RIGHT)
                  for i, s in enumerate(self.word) if s.kind != "D"]
        return PellicleWalk(tuple(events), True)

    def step_edges(self) -> list[int | None]:
        """Edge walked by each step (``None`` for dwells)."""
        return list(self._edge)

    def step_vertex(self, i: int) -> int:
        return self._at[i]

    # maps -----------------------------------------------------------------------
    def phi(self, e: int, x: float) -> np.ndarray:
        """Image of the point at fraction ``x`` of edge ``e`` (0 at the upper vertex)."""
        m = self.edge_maps[e]
        xs = np.linspace(0, 1, len(m))
        return np.array([np.interp(x, xs, m[:, c].real) + 1j * np.interp(x, xs, m[:, c].imag)
                         for c in range(2)])

    def sample_centers(self) -> np.ndarray:
        """``Phi_T(m_T(s))`` at the halo sample parameters."""
        if not self.word:
            return np.zeros((0, 2), complex)
        parts = [self.word[0].walk_centers()] + [s.walk_centers()[1:] for s in self.word[1:]]
        return np.concatenate(parts)

    def center_error(self) -> float:
        """``max |center(halo) - Phi_T(m_T)|`` over the halo samples."""
        if not self.word:
            return 0.0
        c = np.array([d.center for d in self._halo])
        return float(np.max(np.linalg.norm(c - self.sample_centers(), axis=-1)))

    def sample_points(self) -> np.ndarray:
        """Planar point of the pellicle at every halo sample, shape ``(n + 1, 2)``."""
        pos = self.tree.pos
        out = []
        for i, s in enumerate(self.word):
            v0 = self._at[i]
            if s.kind == "D":
                seg = np.repeat(np.array([pos[v0]]), s.n + 1, axis=0)
            else:
                e = self._edge[i]
                a, b = np.array(pos[self.tree.parent[e]]), np.array(pos[e])
                if s.kind == "R":
                    a, b = b, a
                u = np.linspace(0, 1, s.n + 1)[:, None]
                seg = a + u * (b - a)
            out.append(seg if not out else seg[1:])
        return np.concatenate(out) if out else np.array([self.tree.pos[0]])

    # leaves ---------------------------------------------------------------------
    def leaf_samples(self) -> dict[int, int]:
        """Halo sample index at which the walk turns around each leaf."""
        out = {}
        for i, v in self._created.items():
            if not self.tree.children[v]:
                out[v] = int(self._cum[i + 1])
        return out

    def leaf_disc(self, v: int) -> AnalyticDisc:
        return self._halo[self.leaf_samples()[v]]

    # transformations --------------------------------------------------------------
    def mirrored(self) -> "Dendrite":
        return Dendrite(reverse_word(self.word), root_image=self.root_image, point_disc=self.point_disc)

    def with_pos(self, pos: dict) -> "Dendrite":
        return Dendrite(self.word, pos=pos, root_image=self.root_image, check=False, point_disc=self.point_disc)

    def to_json(self) -> dict:
        return {"tree": tree_to_json(self.tree),
                "word": [{"kind": s.kind, "n": s.n} for s in self.word],
                "halo": [d.to_json() for d in self._halo]}


# equivalence traces -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PairStep:
    """Two small discs embedded in G with a common center."""

    d1: AnalyticDisc
    d2: AnalyticDisc


@dataclass(frozen=True, eq=False)
class HomotopyStep:
    """Homotopy of equally centered pairs ``(F1(t), F2(t))`` starting at ``base``'s pair."""

    base: "Trace"
    F1: DiscFamily
    F2: DiscFamily


@dataclass(frozen=True, eq=False)
class ChainStep:
    """``d_1 ~ d_2 ~ ... ~ d_N`` from consecutive traces."""

    parts: tuple


Trace = Union[PairStep, HomotopyStep, ChainStep]


def trace_endpoints(tr: Trace) -> tuple[AnalyticDisc, AnalyticDisc]:
    if isinstance(tr, PairStep):
        return tr.d1, tr.d2
    if isinstance(tr, HomotopyStep):
        return tr.F1.discs[-1], tr.F2.discs[-1]
    return trace_endpoints(tr.parts[0])[0], trace_endpoints(tr.parts[-1])[1]


def trace_log(tr: Trace, path: str = "root") -> list[tuple[str, str]]:
    """Ordered ``(path, procedure)`` applications, innermost first."""
    if isinstance(tr, PairStep):
        return [(path, "pair")]
    if isinstance(tr, HomotopyStep):
        return trace_log(tr.base, path + "/base") + [(path, "homotopy")]
    out = []
    for i, p in enumerate(tr.parts):
        out += trace_log(p, f"{path}/{i}")
    return out + [(path, "chain")]


def validate_trace(tr: Trace, G=None, tol_center: float = TOL_CENTER, path: str = "root") -> None:
    """Check the trace invariants, raising :class:`ContractError` that names the step."""
    if isinstance(tr, PairStep):
        if np.linalg.norm(tr.d1.center - tr.d2.center) > tol_center:
            raise ContractError("pair discs have different centers", {"step": path}, stage="trace")
        if G is not None:
            for d in (tr.d1, tr.d2):
                if not is_small_embedded(d, G):
                    raise ContractError("pair disc is not a small disc embedded in G",
                                        {"step": path, "diameter": d.diameter(),
                                         "diam_small": G.diam_small}, stage="trace")
        return
    if isinstance(tr, HomotopyStep):
        validate_trace(tr.base, G, tol_center, path + "/base")
        if len(tr.F1) != len(tr.F2) or not np.allclose(tr.F1.params, tr.F2.params):
            raise ContractError("homotopy families are sampled differently", {"step": path}, stage="trace")
        err = float(np.max(np.linalg.norm(tr.F1.centers() - tr.F2.centers(), axis=-1)))
        if err > tol_center:
            raise ContractError("homotopy families are not equally centered",
                                {"step": path, "error": err}, stage="trace")
        b1, b2 = trace_endpoints(tr.base)
        if coeff_distance(tr.F1.discs[0], b1) > TOL_MATCH or coeff_distance(tr.F2.discs[0], b2) > TOL_MATCH:
            raise ContractError("homotopy does not start at the base pair", {"step": path}, stage="trace")
        return
    if not tr.parts:
        raise ContractError("empty chain", {"step": path}, stage="trace")
    for i, p in enumerate(tr.parts):
        validate_trace(p, G, tol_center, f"{path}/{i}")
    for i in range(len(tr.parts) - 1):
        a = trace_endpoints(tr.parts[i])[1]
        b = trace_endpoints(tr.parts[i + 1])[0]
        if coeff_distance(a, b) > TOL_MATCH:
            raise ContractError("chain links do not match", {"step": f"{path}/{i}"}, stage="trace")


def _trace_word(tr: Trace, k: int, fix_immersion: bool, path: str = "root") -> list[Step]:
    if isinstance(tr, PairStep):
        if tr.d1 is tr.d2 or coeff_distance(tr.d1, tr.d2) == 0.0:
            return []
        halo = interpolate_discs(tr.d1, tr.d2, k)
        if fix_immersion and not all(d.is_immersed() for d in halo):
            fam = perturb_to_immersion(DiscFamily(np.linspace(0, 1, k + 1), halo), rng=0)
            halo = [tr.d1, *fam.discs[1:-1], tr.d2]
        return [dwell_step(halo, tag=path)]
    if isinstance(tr, HomotopyStep):
        base = _trace_word(tr.base, k, fix_immersion, path + "/base")
        left = edge_step("L", list(reversed(tr.F1.discs)), tag=path)
        right = Step("R", tuple(tr.F2.discs), left.emap, path)
        return [left, *base, right]
    out: list[Step] = []
    for i, p in enumerate(tr.parts):
        out += _trace_word(p, k, fix_immersion, f"{path}/{i}")
    return out


def build_dendrite(trace: Trace, G=None, k: int = SEG_SAMPLES, fix_immersion: bool = True) -> Dendrite:
    """Assemble the dendrite with halo witnessed by an equivalence trace.

    The halo starts at the first disc of the trace and ends at the second.
    A pair contributes a dwell (nothing at all when the discs coincide).  A
    homotopy contributes one edge, walked out along the first family
    backwards and back along the second, with the base dendrite hanging at
    its far end.  A chain glues its sub-dendrites at the root in order.

    Raises
    ------
    ContractError
        When the trace is invalid; the report names the offending step.
    """
    validate_trace(trace, G)
    den = Dendrite(_trace_word(trace, k, fix_immersion), point_disc=trace_endpoints(trace)[0])
    d1, d2 = trace_endpoints(trace)
    if coeff_distance(den.start, d1) > TOL_MATCH or coeff_distance(den.end, d2) > TOL_MATCH:
        raise ContractError("halo endpoints differ from the trace pair", {}, stage="build_dendrite")
    err = den.center_error()
    if err > TOL_CENTER:
        raise ContractError("halo centers do not follow the tree image", {"error": err},
                            stage="build_dendrite")
    return den


def point_dendrite(d: AnalyticDisc, k: int = SEG_SAMPLES) -> Dendrite:
    """One-point dendrite with constant halo ``d``."""
    return Dendrite([dwell_step([d] * (k + 1))])


# planar checks ----------------------------------------------------------------

def crossing_segments(segs: np.ndarray, keys: np.ndarray, eps: float = 1e-12) -> list[tuple[int, int]]:
    """Index pairs of segments that meet, ignoring pairs sharing an endpoint key.

    ``segs`` has shape ``(E, 2, 2)``; ``keys`` has shape ``(E, 2)`` and
    identifies endpoints, so edges adjacent in a tree may touch at their
    common vertex.  Vectorized over all pairs.
    """
    E = len(segs)
    if E < 2:
        return []
    i, j = np.triu_indices(E, 1)
    share = np.any(keys[i][:, :, None] == keys[j][:, None, :], axis=(1, 2))
    i, j = i[~share], j[~share]
    p1, p2, q1, q2 = segs[i, 0], segs[i, 1], segs[j, 0], segs[j, 1]

    def orient(a, b, c):
        return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    proper = (d1 * d2 < -eps ** 2) & (d3 * d4 < -eps ** 2)

    def on_seg(a, b, c, d):
        inside = ((np.minimum(a[:, 0], b[:, 0]) - eps <= c[:, 0]) & (c[:, 0] <= np.maximum(a[:, 0], b[:, 0]) + eps)
                  & (np.minimum(a[:, 1], b[:, 1]) - eps <= c[:, 1]) & (c[:, 1] <= np.maximum(a[:, 1], b[:, 1]) + eps))
        return (np.abs(d) <= eps) & inside

    touch = on_seg(q1, q2, p1, d1) | on_seg(q1, q2, p2, d2) | on_seg(p1, p2, q1, d3) | on_seg(p1, p2, q2, d4)
    hit = proper | touch
    return list(zip(i[hit].tolist(), j[hit].tolist()))


def _min_modulus_on_segment(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = np.sum(d * d, axis=-1)
    t = np.clip(-np.sum(a * d, axis=-1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    return np.linalg.norm(a + t[:, None] * d, axis=-1)


# set distances ------------------------------------------------------------------

def _coeff_stack(discs: Sequence[AnalyticDisc], deg: int) -> np.ndarray:
    return np.stack([d.padded(deg).ravel() for d in discs])


def disc_set_hausdorff(A: Sequence[AnalyticDisc], B: Sequence[AnalyticDisc]) -> float:
    """Hausdorff distance in the coefficient max-norm; shared objects cost nothing."""
    ida, idb = {id(d) for d in A}, {id(d) for d in B}
    ra = [d for d in A if id(d) not in idb]
    rb = [d for d in B if id(d) not in ida]
    if not ra and not rb:
        return 0.0
    deg = max(d.degree for d in list(A) + list(B))
    out = 0.0
    for rest, other in ((ra, B), (rb, A)):
        if not rest:
            continue
        X, Y = _coeff_stack(rest, deg), _coeff_stack(other, deg)
        best = np.full(len(X), np.inf)
        for lo in range(0, len(Y), 256):
            dist = np.max(np.abs(X[:, None, :] - Y[None, lo:lo + 256, :]), axis=-1)
            best = np.minimum(best, dist.min(axis=1))
        out = max(out, float(best.max()))
    return out


def point_set_hausdorff(P: np.ndarray, Q: np.ndarray) -> float:
    """Symmetric Hausdorff distance between point clouds (rows), Euclidean."""
    P, Q = np.asarray(P, float), np.asarray(Q, float)
    return float(max(directed_hausdorff(P, Q)[0], directed_hausdorff(Q, P)[0]))


# neurons -------------------------------------------------------------------------

def ring_angles(M: int) -> np.ndarray:
    return 2 * np.pi * np.arange(M) / M


LOCAL_SPREAD = 0.9 * math.pi


class Neuron:
    """Unit disc with boundary ring, attached dendrites and an axon.

    Parameters
    ----------
    body : AnalyticDisc
        The main disc ``Psi``.
    ring_in, ring_out : sequences of AnalyticDisc, length ``M``
        Halo arriving at and leaving the boundary sample ``j`` (angle
        ``2 pi j / M``).  They coincide except where a dendrite is attached;
        the dendrite's halo runs from ``ring_in[j]`` to ``ring_out[j]``.
        Between samples ``j`` and ``j + 1`` the halo is the segment
        ``ring_out[j] -> ring_in[j + 1]``.
    attachments : dict
        ``j -> Dendrite`` rooted at boundary sample ``j``.
    axon : tuple or None
        ``("ring", j)`` for a degenerate axon at a boundary sample, or
        ``("tree", j, v)`` for the leaf ``v`` of the dendrite at ``j``.
        ``None`` marks a preneuron.
    """

    def __init__(self, body: AnalyticDisc, ring_in: Sequence[AnalyticDisc], ring_out: Sequence[AnalyticDisc],
                 attachments: dict | None = None, axon: tuple | None = None, meta: dict | None = None):
        if len(ring_in) != len(ring_out) or len(ring_in) < 3:
            raise ValueError("ring must have the same number (at least 3) of in and out samples")
        self.body = body
        self.ring_in = list(ring_in)
        self.ring_out = list(ring_out)
        self.attachments = {int(j) % len(ring_in): D for j, D in (attachments or {}).items()}
        self.axon = axon
        self.meta = dict(meta or {})

    @classmethod
    def from_ring(cls, body: AnalyticDisc, ring: Sequence[AnalyticDisc], **kw) -> "Neuron":
        return cls(body, ring, ring, **kw)

    # structure --------------------------------------------------------------------
    @property
    def M(self) -> int:
        return len(self.ring_in)

    @property
    def angles(self) -> np.ndarray:
        return ring_angles(self.M)

    def root_point(self, j: int) -> complex:
        return complex(np.exp(2j * np.pi * j / self.M))

    def with_axon(self, axon: tuple) -> "Neuron":
        return Neuron(self.body, self.ring_in, self.ring_out, self.attachments, axon, self.meta)

    def with_attachment(self, j: int, D: Dendrite) -> "Neuron":
        att = dict(self.attachments)
        att[j % self.M] = D
        return Neuron(self.body, self.ring_in, self.ring_out, att, self.axon, self.meta)

    @property
    def is_tree_free(self) -> bool:
        return all(D.tree.n_edges == 0 for D in self.attachments.values())

    def items(self) -> list[tuple]:
        """Closed pellicle as ``("tree", j, D)`` and ``("arc", j, (d0, d1))`` items from angle 0."""
        out = []
        for j in range(self.M):
            D = self.attachments.get(j)
            if D is not None and D.word:
                out.append(("tree", j, D))
            out.append(("arc", j, (self.ring_out[j], self.ring_in[(j + 1) % self.M])))
        return out

    def closed_halo(self) -> list[AnalyticDisc]:
        """Halo samples along the closed pellicle; the last sample repeats the first."""
        out: list[AnalyticDisc] = []
        for kind, j, obj in self.items():
            seq = obj.halo_samples if kind == "tree" else list(obj)
            if out:
                gap = coeff_distance(out[-1], seq[0])
                if gap > TOL_MATCH:
                    raise ContractError("halo jumps at a boundary sample",
                                        {"sample": j, "gap": gap}, stage="neuron")
                out.extend(seq[1:])
            else:
                out.extend(seq)
        return out

    def halo_family(self) -> DiscFamily:
        h = self.closed_halo()
        return DiscFamily(np.arange(len(h)) / (len(h) - 1), h)

    def delta_cont(self, factor: float = 10.0) -> float:
        h = self.closed_halo()
        steps = consecutive_distances(h)
        return float(max(factor * np.median(steps), 1e-12))

    def axon_tip(self) -> AnalyticDisc:
        if self.axon is None:
            raise ContractError("preneuron has no axon", {}, stage="neuron")
        if self.axon[0] == "ring":
            return self.ring_out[self.axon[1]]
        _, j, v = self.axon
        return self.attachments[j].leaf_disc(v)

    # planar picture ----------------------------------------------------------------
    def layout(self) -> dict[int, dict[int, tuple[float, float]]]:
        """Planar positions of every attached tree.

        Each tree is embedded in a cone of opening ``0.9 pi`` around the
        outward normal at its root and scaled into a ball whose radius is
        below half the distance to the nearest other root, so trees are
        pairwise disjoint and meet the closed disc only at their roots.
        """
        roots = [j for j, D in self.attachments.items() if D.tree.n_edges > 0]
        out = {}
        for j in roots:
            D = self.attachments[j]
            loc = embed_planar(D.tree, heading=0.0, spread=LOCAL_SPREAD).pos
            R = max(math.hypot(*p) for p in loc.values())
            gaps = [abs(self.root_point(j) - self.root_point(i)) for i in roots if i != j]
            scale = min(0.5, 0.45 * min(gaps, default=2.0)) / R
            zeta = self.root_point(j)
            out[j] = {v: ((zeta * (1 + scale * complex(*p))).real, (zeta * (1 + scale * complex(*p))).imag)
                      for v, p in loc.items()}
        return out

    def tree_segments(self, layout: dict | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All tree edges as ``(segs, keys, is_root_edge)``."""
        layout = self.layout() if layout is None else layout
        segs, keys, at_root = [], [], []
        for j, pos in layout.items():
            tree = self.attachments[j].tree
            for e in tree.edges:
                u = tree.parent[e]
                segs.append([pos[u], pos[e]])
                keys.append([j * 1_000_003 + u, j * 1_000_003 + e])
                at_root.append(u == tree.root)
        return (np.array(segs, float).reshape(-1, 2, 2), np.array(keys, dtype=np.int64).reshape(-1, 2),
                np.array(at_root, bool))

    def pellicle_points(self, per_arc: int = 1) -> np.ndarray:
        """Planar points of the closed pellicle, roughly one per halo sample."""
        lay = self.layout()
        pts = []
        for kind, j, obj in self.items():
            if kind == "tree":
                D = obj.with_pos(lay[j]) if j in lay else obj
                pts.append(D.sample_points())
            else:
                th = 2 * np.pi * (j + np.arange(per_arc + 1) / per_arc) / self.M
                pts.append(np.stack([np.cos(th), np.sin(th)], -1))
        return np.concatenate(pts)

    def center_curve(self) -> np.ndarray:
        """``Phi(m(s))`` at the closed pellicle samples."""
        pts = []
        for kind, j, obj in self.items():
            if kind == "tree":
                pts.append(obj.sample_centers())
            else:
                th = 2 * np.pi * np.array([j, j + 1]) / self.M
                pts.append(self.body(np.exp(1j * th)))
        return np.concatenate(pts)

    # invariants ---------------------------------------------------------------------
    def validate(self, G=None, delta_cont: float | None = None, check_discs: bool = False,
                 disc_cache: dict | None = None, require_axon: bool = True) -> dict:
        """Run the invariant suite; raise :class:`ContractError` on the first failure.

        Checks roots, planar disjointness, halo centers against the body and
        the tree maps, halo continuity, the axon tip and, optionally, that
        every halo disc is a G-disc (cached by object identity).
        """
        M = self.M
        zeta = np.exp(1j * self.angles)
        body_ring = self.body(zeta)
        cin = np.array([d.center for d in self.ring_in])
        cout = np.array([d.center for d in self.ring_out])
        err = float(max(np.max(np.linalg.norm(cin - body_ring, axis=-1)),
                        np.max(np.linalg.norm(cout - body_ring, axis=-1))))
        if err > TOL_CENTER:
            raise ContractError("ring halo centers leave the body boundary", {"error": err}, stage="neuron")
        for j in range(M):
            D = self.attachments.get(j)
            if D is None or not D.word:
                if coeff_distance(self.ring_in[j], self.ring_out[j]) > TOL_MATCH:
                    raise ContractError("halo jumps at a regular boundary point", {"sample": j}, stage="neuron")
                continue
            if coeff_distance(D.start, self.ring_in[j]) > TOL_MATCH or coeff_distance(D.end, self.ring_out[j]) > TOL_MATCH:
                raise ContractError("dendrite halo does not join the ring", {"sample": j}, stage="neuron")
            if np.linalg.norm(D.root_image - body_ring[j]) > TOL_CENTER:
                raise ContractError("dendrite root image differs from the body", {"sample": j}, stage="neuron")
            ce = D.center_error()
            if ce > TOL_CENTER:
                raise ContractError("dendrite halo centers leave the tree image",
                                    {"sample": j, "error": ce}, stage="neuron")
            err = max(err, ce)
        lay = self.layout()
        segs, keys, at_root = self.tree_segments(lay)
        cross = crossing_segments(segs, keys)
        if cross:
            raise ContractError("attached trees intersect", {"pairs": cross[:5]}, stage="neuron")
        if len(segs):
            far = np.linalg.norm(segs[:, 1], axis=-1)
            inner = _min_modulus_on_segment(segs[:, 0], segs[:, 1])
            outward = np.sum(segs[:, 0] * (segs[:, 1] - segs[:, 0]), axis=-1)
            bad = (far <= 1 + 1e-12) | (~at_root & (inner <= 1 + 1e-12)) | (at_root & (outward <= 0))
            if np.any(bad):
                raise ContractError("a tree meets the closed disc away from its root",
                                    {"edges": np.flatnonzero(bad)[:5].tolist()}, stage="neuron")
        halo = self.closed_halo()
        steps = consecutive_distances(halo)
        max_step = float(steps.max()) if len(steps) else 0.0
        if delta_cont is not None and max_step >= delta_cont:
            raise ContractError("halo is not continuous at the sampling scale",
                                {"max_step": max_step, "delta_cont": delta_cont,
                                 "index": int(np.argmax(steps))}, stage="neuron")
        report = {"M": M, "trees": len(lay), "edges": int(len(segs)), "center_error": err,
                  "max_step": max_step, "halo_samples": len(halo) - 1}
        if self.axon is None:
            if require_axon:
                raise ContractError("preneuron has no axon", {}, stage="neuron")
        else:
            kind = self.axon[0]
            if kind == "ring" and self.axon[1] in self.attachments and self.attachments[self.axon[1]].word:
                raise ContractError("degenerate axon sits at a root", {"sample": self.axon[1]}, stage="neuron")
            if kind == "tree":
                _, j, v = self.axon
                if j not in self.attachments or v not in self.attachments[j].leaf_samples():
                    raise ContractError("axon is not a leaf", {"axon": list(self.axon)}, stage="neuron")
            if G is not None:
                tip = self.axon_tip()
                if not is_small_embedded(tip, G):
                    raise ContractError("axon tip is not a small disc embedded in G",
                                        {"diameter": tip.diameter(), "diam_small": G.diam_small},
                                        stage="neuron")
        if check_discs and G is not None:
            cache = {} if disc_cache is None else disc_cache
            worst = math.inf
            for d in halo:
                key = id(d)
                if key not in cache:
                    cache[key] = is_g_disc(d, G)
                rep = cache[key]
                if not rep.ok:
                    raise ContractError("halo disc is not a G-disc", {"margin": rep.margin}, stage="neuron")
                worst = min(worst, rep.margin)
            report["g_margin"] = worst
        return report

    def to_json(self) -> dict:
        return {"M": self.M, "body": self.body.to_json(),
                "ring_in": [d.to_json() for d in self.ring_in],
                "ring_out": [d.to_json() for d in self.ring_out],
                "attachments": {str(j): D.to_json() for j, D in self.attachments.items()},
                "axon": None if self.axon is None else list(self.axon)}


def neuron_distance(a: Neuron, b: Neuron) -> float:
    """Step size between neurons: aligned sup when the pellicles match, set distance otherwise."""
    ha, hb = a.closed_halo(), b.closed_halo()
    same = (a.M == b.M and set(a.attachments) == set(b.attachments)
            and all([s.kind for s in a.attachments[j].word] == [s.kind for s in b.attachments[j].word]
                    and len(a.attachments[j].halo_samples) == len(b.attachments[j].halo_samples)
                    for j in a.attachments))
    if same and len(ha) == len(hb):
        deg = max(max(d.degree for d in ha), max(d.degree for d in hb))
        return float(np.max(np.abs(_coeff_stack(ha, deg) - _coeff_stack(hb, deg))))
    return disc_set_hausdorff(ha, hb)


def neuron_image_distance(a: Neuron, b: Neuron) -> float:
    """Hausdorff distance in C^2 between the images of the pellicles."""
    ca, cb = a.center_curve(), b.center_curve()
    return point_set_hausdorff(np.concatenate([ca.real, ca.imag], -1), np.concatenate([cb.real, cb.imag], -1))


# kappa ---------------------------------------------------------------------------

@dataclass
class Kappa:
    """Compact set attached to a neuron: halo boundaries plus the full axon-tip disc."""

    points: np.ndarray
    n_pellicle: int
    n_boundary: int
    n_disc: int
    margin: float | None = None

    @property
    def ok(self) -> bool:
        return self.margin is None or self.margin > 0

    def to_json(self) -> dict:
        return {"count": int(len(self.points)), "n_pellicle": self.n_pellicle, "n_boundary": self.n_boundary,
                "n_disc": self.n_disc, "margin": self.margin}


def kappa(n: Neuron, G=None, n_b: int = 256, raise_outside: bool = True) -> Kappa:
    """Sample the compact set of a neuron and, given ``G``, its margin."""
    halo = n.closed_halo()[:-1]
    cache: dict[int, np.ndarray] = {}
    rings = []
    for d in halo:
        if id(d) not in cache:
            cache[id(d)] = d.boundary(n_b)
        rings.append(cache[id(d)])
    tip = disc_grid_points(n.axon_tip())
    pts = np.concatenate(rings + [tip])
    out = Kappa(pts, len(halo), n_b, len(tip))
    if G is not None:
        out.margin = float(np.min(G.margin(pts)))
        if raise_outside and out.margin <= 0:
            raise ContractError("compact set leaves G", {"margin": out.margin}, stage="kappa")
    return out


# excrescences and axons -------------------------------------------------------------

def excrescence_with_halo(body: AnalyticDisc, pieces: Sequence[tuple], traces: dict | None = None,
                          M: int = RING_SIZE, G=None, k: int = SEG_SAMPLES) -> Neuron:
    """Preneuron from piecewise boundary halo data and traces at the breakpoints.

    Parameters
    ----------
    body : AnalyticDisc
        The disc whose boundary the halo follows.
    pieces : sequence of ``(j_a, j_b, fn)``
        Consecutive ranges of ring samples ``j_a <= j <= j_b`` (indices may
        exceed ``M`` to wrap) covering the circle once; ``fn(theta)`` gives
        the halo disc at angle ``theta``.
    traces : dict, optional
        ``j -> Trace`` at breakpoints, from the left limit to the right limit.

    Returns
    -------
    Neuron
        With ``axon=None``.  A breakpoint whose one-sided limits agree gets
        no dendrite unless a trace is supplied for it.
    """
    traces = dict(traces or {})
    ring_in: list = [None] * M
    ring_out: list = [None] * M
    total = 0
    for i, (ja, jb, fn) in enumerate(pieces):
        if jb <= ja:
            raise ContractError("empty halo piece", {"piece": i}, stage="excrescence")
        if i and ja != pieces[i - 1][1]:
            raise ContractError("halo pieces are not consecutive", {"piece": i}, stage="excrescence")
        total += jb - ja
        for j in range(ja, jb + 1):
            d = fn(2 * np.pi * j / M)
            if j < jb:
                ring_out[j % M] = d
            if j > ja:
                ring_in[j % M] = d
    if total != M:
        raise ContractError("halo pieces do not cover the circle once", {"covered": total, "M": M},
                            stage="excrescence")
    atts = {}
    for j in range(M):
        jump = coeff_distance(ring_in[j], ring_out[j]) > TOL_MATCH
        tr = traces.pop(j, None)
        if tr is None:
            if jump:
                raise ContractError("breakpoint without a trace", {"sample": j}, stage="excrescence")
            ring_out[j] = ring_in[j]
            continue
        D = build_dendrite(tr, G, k)
        if coeff_distance(D.start, ring_in[j]) > TOL_MATCH or coeff_distance(D.end, ring_out[j]) > TOL_MATCH:
            raise ContractError("trace does not join the one-sided limits", {"sample": j}, stage="excrescence")
        atts[j] = Dendrite(D.word, root_image=body(np.exp(2j * np.pi * j / M)), point_disc=ring_in[j])
    if traces:
        raise ContractError("traces given away from the ring", {"samples": sorted(traces)}, stage="excrescence")
    n = Neuron(body, ring_in, ring_out, atts)
    n.validate(require_axon=False)
    return n


def _axon_order(M: int) -> list[int]:
    return sorted(range(M), key=lambda j: (min(j, M - j), j))


def preneuron_to_neuron(p: Neuron, G, extra: dict | None = None, k: int = SEG_SAMPLES) -> Neuron:
    """Designate an axon, attaching trees from ``extra`` traces if needed.

    The search prefers a regular boundary sample whose halo disc is small and
    embedded in ``G`` (closest to angle 0 first), then leaves of attached
    dendrites, then leaves of dendrites built from ``extra`` (``j -> Trace``
    starting and ending at the ring disc of a regular sample ``j``).
    """
    if p.axon is not None:
        return p
    for j in _axon_order(p.M):
        if j not in p.attachments and is_small_embedded(p.ring_out[j], G):
            return p.with_axon(("ring", j))
    for j in sorted(p.attachments):
        D = p.attachments[j]
        for v, i in sorted(D.leaf_samples().items()):
            if is_small_embedded(D.halo_samples[i], G):
                return p.with_axon(("tree", j, v))
    for j, tr in sorted((extra or {}).items()):
        if j in p.attachments:
            raise ContractError("extra trace at a root", {"sample": j}, stage="preneuron_to_neuron")
        D = build_dendrite(tr, G, k)
        d = p.ring_out[j]
        if coeff_distance(D.start, d) > TOL_MATCH or coeff_distance(D.end, d) > TOL_MATCH:
            raise ContractError("extra trace must start and end at the ring disc", {"sample": j},
                                stage="preneuron_to_neuron")
        for v, i in sorted(D.leaf_samples().items()):
            if is_small_embedded(D.halo_samples[i], G):
                q = p.with_attachment(j, Dendrite(D.word, root_image=p.body(np.exp(2j * np.pi * j / p.M))))
                return q.with_axon(("tree", j, v))
    raise ContractError("no halo disc is a small disc embedded in G", {"M": p.M},
                        stage="preneuron_to_neuron")


# families --------------------------------------------------------------------------

def prepend_embedded_start(F: DiscFamily, G, path=None, sigma: float | None = None,
                           n_radial: int = 16) -> DiscFamily:
    """Extend a family backwards so that it starts at a small disc embedded in ``G``.

    Three stages, each a third of the parameter range: discs
    ``F0(sigma z) - F0(0) + path(u)`` moving their center along ``path``
    (which ends at ``F0(0)``), the radial blow-up ``F0(rho z)`` for ``rho``
    from ``sigma`` to 1, and finally ``F`` itself.

    Parameters
    ----------
    path : array (n, 2), optional
        Points in ``G`` ending at the center of the first disc.  Defaults to
        the center alone.
    sigma : float, optional
        Shrink factor; by default the largest power of 1/2 for which every
        translate is small and embedded in ``G``.
    """
    F0 = F.discs[0]
    c0 = F0.center
    path = np.atleast_2d(np.asarray(c0 if path is None else path, dtype=complex))
    if np.linalg.norm(path[-1] - c0) > TOL_CENTER:
        raise ContractError("path must end at the center of the first disc", {}, stage="prepend")
    if not np.all(G.contains(path)):
        raise ContractError("path leaves G", {"index": int(np.flatnonzero(~G.contains(path))[0])},
                            stage="prepend")
    if len(path) == 1:
        path = np.repeat(path, 2, axis=0)

    def translates(s):
        small = F0.scaled_argument(s)
        return [small.translated(p - c0) for p in path]

    if sigma is None:
        for s in 0.5 ** np.arange(1, 30):
            tr = translates(s)
            if all(is_small_embedded(d, G) for d in tr):
                sigma = float(s)
                break
        else:
            raise ContractError("no shrink factor gives small embedded discs", {}, stage="prepend")
    stage1 = translates(sigma)
    if not all(is_small_embedded(d, G) for d in stage1):
        raise ContractError("shrunk discs along the path are not small and embedded", {"sigma": sigma},
                            stage="prepend")
    stage1[-1] = F0.scaled_argument(sigma)
    rhos = np.linspace(sigma, 1.0, n_radial + 1)
    stage2 = [F0.scaled_argument(r) for r in rhos[1:-1]] + [F0]
    p = F.params
    u3 = (p - p[0]) / (p[-1] - p[0]) if len(p) > 1 else np.zeros(1)
    t1 = np.linspace(0, 1 / 3, len(stage1))
    t2 = np.linspace(1 / 3, 2 / 3, n_radial + 1)[1:]
    t3 = 2 / 3 + u3[1:] / 3
    params = np.concatenate([t1, t2, t3])
    discs = stage1 + stage2 + list(F.discs[1:])
    return DiscFamily(params, discs, {**F.meta, "sigma": sigma, "junctions": [1 / 3, 2 / 3]})


@dataclass
class NeuronFamily:
    """Piecewise continuous family of neurons with its axon data."""

    params: np.ndarray
    neurons: list
    axon_lengths: np.ndarray
    discontinuities: list
    delta_cont: float
    steps: np.ndarray
    gamma: object = None
    meta: dict | None = None

    def __len__(self):
        return len(self.neurons)

    def axon_tips(self) -> DiscFamily:
        return DiscFamily(self.params, [n.axon_tip() for n in self.neurons])

    def to_json(self) -> dict:
        return {"params": self.params.tolist(), "axon_lengths": self.axon_lengths.tolist(),
                "discontinuities": list(self.discontinuities), "delta_cont": self.delta_cont,
                "steps": self.steps.tolist(), "size": len(self.neurons),
                "trees": [len(n.attachments) for n in self.neurons]}


def axon_length(t: float, window: tuple[float, float]) -> float:
    a, b = window
    return float(np.clip((t - a) / (b - a), 0.0, 1.0))


def family_steps(neurons: Sequence[Neuron]) -> np.ndarray:
    return np.array([neuron_distance(a, b) for a, b in zip(neurons, neurons[1:])])


def flag_discontinuities(steps: np.ndarray, factor: float = 5.0, delta: float | None = None):
    """Indices ``i`` where the step from member ``i`` to ``i + 1`` is a jump.

    The default scale is ten times the median of the nonzero steps, so runs
    of identical members do not make every change look like a jump.
    """
    if delta is None:
        moving = steps[steps > 1e-15] if len(steps) else steps
        delta = float(max(10 * np.median(moving), 1e-12)) if len(moving) else 1e-12
    return [int(i) for i in np.flatnonzero(steps > factor * delta)], delta


def build_pw_neuron_family(Psi: DiscFamily, lift: Callable, gamma, G, M: int = RING_SIZE,
                           k: int = SEG_SAMPLES, axon_window: tuple[float, float] = (0.1, 0.3),
                           sigma_tip: float | None = None) -> NeuronFamily:
    """Neurons over a family of bodies, with a continuously growing axon at angle 0.

    Parameters
    ----------
    Psi : DiscFamily
        Bodies; ``Psi.discs[i]`` is the body at ``Psi.params[i]``.
    lift : callable
        ``lift(i, t) -> (pieces, traces)`` boundary halo data in the format of
        :func:`excrescence_with_halo`.
    gamma : Arc
        Arc containing angle 0 on which the halo is continuous in ``t`` and
        free of breakpoints.
    axon_window : (a, b)
        The axon edge has length 0 up to ``t = a`` and full length from
        ``t = b`` on, growing linearly in between.  Its halo shrinks the ring
        disc at angle 0 radially, the same on both sides of the edge.

    Returns
    -------
    NeuronFamily
        Jumps between consecutive members are reported in ``discontinuities``.
    """
    ts = np.asarray(Psi.params, float)
    pres = []
    for i, t in enumerate(ts):
        pieces, traces = lift(i, float(t))
        pre = excrescence_with_halo(Psi.discs[i], pieces, traces, M, G, k)
        if 0 in pre.attachments:
            raise ContractError("angle 0 must be a regular boundary point", {"t": float(t)},
                                stage="build_pw_neuron_family")
        pres.append(pre)
    on_gamma = [j for j in range(M) if gamma.contains(2 * np.pi * j / M)]
    for j in on_gamma:
        if any(j in p.attachments for p in pres):
            raise ContractError("breakpoint inside the arc", {"sample": j}, stage="build_pw_neuron_family")
    g_steps = np.array([max(coeff_distance(a.ring_out[j], b.ring_out[j]) for j in on_gamma)
                        for a, b in zip(pres, pres[1:])])
    bad, delta_g = flag_discontinuities(g_steps)
    if bad:
        raise ContractError("halo on the arc is discontinuous in t",
                            {"t": [float(ts[i]) for i in bad], "delta": delta_g},
                            stage="build_pw_neuron_family")
    lengths = np.array([axon_length(t, axon_window) for t in ts])
    if sigma_tip is None:
        grown = [p.ring_out[0] for p, l in zip(pres, lengths) if l > 0]
        for s in 0.5 ** np.arange(1, 30):
            if all(is_small_embedded(d.scaled_argument(s), G) for d in grown):
                sigma_tip = float(s)
                break
        else:
            raise ContractError("no axon tip shrink factor works", {}, stage="build_pw_neuron_family")
    neurons = []
    for pre, l, t in zip(pres, lengths, ts):
        d = pre.ring_out[0]
        if l == 0:
            if not is_small_embedded(d, G):
                raise ContractError("degenerate axon needs a small embedded disc at angle 0",
                                    {"t": float(t)}, stage="build_pw_neuron_family")
            neurons.append(pre.with_axon(("ring", 0)))
            continue
        rho = 1 - l * (1 - sigma_tip)
        out = edge_step("L", shrink_discs(d, rho, k), tag="axon")
        back = Step("R", tuple(reversed(out.halo)), out.emap, "axon")
        ax = Dendrite([out, back], root_image=pre.body(np.ones(1))[0])
        neurons.append(pre.with_attachment(0, ax).with_axon(("tree", 0, 1)))
    steps = family_steps(neurons)
    jumps, delta = flag_discontinuities(steps)
    fam = NeuronFamily(ts, neurons, lengths, jumps, delta, steps, gamma,
                       {"sigma_tip": sigma_tip, "axon_window": list(axon_window)})
    log.info("neuron family: %d members, %d jumps", len(neurons), len(jumps))
    return fam
