"""Growing dendrite twins, peeling one neuron off another, splicing families.

Everything here is an operation on pellicle words.  Growing twins of a
dendrite ``T`` up to progress ``m`` is the word "first ``m`` halo intervals
of ``T``, then the same intervals backwards along the mirror image".  Peeling
``n-`` into ``n+`` sweeps a point ``zeta`` counterclockwise; the pellicle of
the intermediate neuron is the swept part of ``n+``, followed by the same
part backwards along one side of a main edge rooted at ``zeta``, followed by
the whole pellicle of ``n-`` (its swept part along the other side of the main
edge).  Each step of the sweep adds one halo sample, so every halo value of
every intermediate neuron is a stored halo sample of ``n-`` or ``n+``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dendra import (
    TOL_MATCH, Dendrite, Neuron, NeuronFamily, Step, coeff_distance, consecutive_distances, crossing_segments,
    disc_set_hausdorff, edge_step, family_steps, flag_discontinuities, neuron_distance, neuron_image_distance,
    reverse_word, word_intervals, word_prefix,
)
from .errors import ContractError
from .treecore import PlanarTree

log = logging.getLogger(__name__)

DEFAULT_HALF_ANGLE = math.pi / 8
SHARE = 0.45          # half-angle ratio between consecutive sibling cones
DEPTH_SHRINK = 0.5    # edge length ratio per tree level


# twins ------------------------------------------------------------------------------

def _retag(word: Sequence[Step]) -> list[Step]:
    """Tag every edge step with the edge it walks in the original tree."""
    D = Dendrite(word, check=False)
    edges = D.step_edges()
    return [Step(s.kind, s.halo, s.emap, ("orig", e)) for s, e in zip(word, edges)]


def _prefix_status(pre: Sequence[Step], total_n: dict[int, int]):
    """Per original edge: ``complete``, ``spine``, ``partL`` or ``partR`` with its fraction."""
    status: dict[int, tuple[str, float]] = {}
    for s in pre:
        tag = s.tag
        if tag is None or s.kind == "D":
            continue
        if tag[0] == "orig":
            e = tag[1]
            status[e] = ("complete", 1.0) if s.kind == "R" else ("spine", 1.0)
        elif tag[0] == "part":
            e = tag[1][1]
            status[e] = ("partL", s.n / total_n[e])
        elif tag[0] == "e2" and s.kind == "R":
            e = tag[1][1]
            status[e] = ("partR", s.n / total_n[e])
    return status


def _twin_positions(tree: PlanarTree, status: dict, apex: complex, axis: float, alpha: float,
                    length: float) -> dict:
    """Planar positions of the grown part (clockwise of the axis) keyed by role.

    ``("v", e)`` is the lower vertex of original edge ``e``; ``("cut", e)`` is
    the point where a partly walked edge is cut.  Completed children of a
    vertex sit in nested sub-cones, the ``i``-th child's copy rotated
    clockwise by half its cone angle ``alpha * SHARE**i``; the edge being
    walked lies along the axis; an edge being walked back splits into a
    trunk on the axis and a branch rotated in proportion to the walked part.
    """
    pos: dict = {}

    def final_copy(v, p, ax, al, L):
        for i, c in enumerate(tree.children[v]):
            a_i = al * SHARE ** i
            ang = ax - a_i / 2
            pc = p + L * np.exp(1j * ang)
            pos[("v", c)] = pc
            final_copy(c, pc, ang, a_i / 3, L * DEPTH_SHRINK)

    def grow(v, p, ax, al, L):
        for i, c in enumerate(tree.children[v]):
            st = status.get(c)
            if st is None:
                break
            kind, frac = st
            a_i = al * SHARE ** i
            if kind == "complete":
                ang = ax - a_i / 2
                pc = p + L * np.exp(1j * ang)
                pos[("v", c)] = pc
                final_copy(c, pc, ang, a_i / 3, L * DEPTH_SHRINK)
            elif kind == "spine":
                pc = p + L * np.exp(1j * ax)
                pos[("v", c)] = pc
                grow(c, pc, ax, a_i / 3, L * DEPTH_SHRINK)
            elif kind == "partL":
                pos[("cut", c)] = p + frac * L * np.exp(1j * ax)
            else:
                cut = p + (1 - frac) * L * np.exp(1j * ax)
                pos[("cut", c)] = cut
                ang = ax - frac * a_i / 2
                pc = cut + frac * L * np.exp(1j * ang)
                pos[("v", c)] = pc
                final_copy(c, pc, ang, a_i / 3, L * DEPTH_SHRINK)

    grow(tree.root, apex, axis, alpha, length)
    return pos


def _key(tag):
    kind, inner = tag
    if kind == "orig":
        return ("v", inner)
    if kind in ("part", "e1"):
        return ("cut", inner[1])
    if kind == "e2":
        return ("v", inner[1])
    raise KeyError(tag)


@dataclass
class TwinGrowth:
    """Twin growth of a dendrite inside a cone.

    Attributes
    ----------
    source : Dendrite
        The dendrite ``T`` being doubled.
    apex : complex
        Root point ``xi``.
    axis : float
        Direction of the bisector ``B`` of the cone.
    half_angle : float
        Half opening angle of the cone.
    schedule : ndarray
        Discretized ``s`` values in ``[0, 1]``.
    """

    source: Dendrite
    apex: complex
    axis: float
    half_angle: float
    length: float
    schedule: np.ndarray

    @property
    def total(self) -> int:
        return self.source.n_intervals

    def progress(self, s: float) -> int:
        """Number of halo intervals of ``T`` grown at parameter ``s``."""
        return int(math.floor(s * self.total + 0.5))

    def word(self, s: float) -> list[Step]:
        word = _retag(self.source.word)
        pre = word_prefix(word, self.progress(s))
        return pre + reverse_word(pre, mark=lambda t: ("mirror", t))

    def reflect(self, p: complex) -> complex:
        u = np.exp(1j * self.axis)
        return self.apex + u * np.conj((p - self.apex) / u)

    def dendrite(self, s: float) -> Dendrite:
        """The dendrite with halo at parameter ``s``, embedded in the cone."""
        if not self.source.word:
            return Dendrite([], pos={0: (self.apex.real, self.apex.imag)}, root_image=self.source.root_image,
                            point_disc=self.source.point_disc)
        word = self.word(s)
        src = Dendrite(self.source.word, check=False)
        total_n = {src.step_edges()[i]: st.n for i, st in enumerate(self.source.word) if st.kind == "L"}
        half = len(word) // 2
        status = _prefix_status(word[:half], total_n)
        places = _twin_positions(src.tree, status, self.apex, self.axis, self.half_angle, self.length)
        D = Dendrite(word, check=False, root_image=self.source.root_image,
                     point_disc=self.source.start)
        pos = {0: (self.apex.real, self.apex.imag)}
        for i, v in D._created.items():
            tag = word[i].tag
            if tag[0] == "mirror":
                p = self.reflect(places[_key(tag[1])])
            else:
                p = places[_key(tag)]
            pos[v] = (float(np.real(p)), float(np.imag(p)))
        return D.with_pos(pos)

    def members(self) -> list[Dendrite]:
        return [self.dendrite(s) for s in self.schedule]

    def check(self, D: Dendrite, s: float) -> dict:
        """Cone containment, mirror symmetry and planarity of one member."""
        pts = {v: complex(*p) for v, p in D.tree.pos.items()}
        u = np.exp(1j * self.axis)
        worst = 0.0
        for v, p in pts.items():
            if v == D.tree.root:
                continue
            if abs(p - self.apex) < 1e-14:
                raise ContractError("twin vertex at the apex", {"s": s}, stage="grow_twins")
            worst = max(worst, abs(np.angle((p - self.apex) / u)))
        if worst >= self.half_angle:
            raise ContractError("twin leaves the cone", {"s": s, "angle": worst}, stage="grow_twins")
        segs = D.tree.segments()
        keys = np.array([[D.tree.parent[e], e] for e in D.tree.edges]).reshape(-1, 2)
        if crossing_segments(segs, keys):
            raise ContractError("twin edges cross", {"s": s}, stage="grow_twins")
        sym = 0.0
        if D.word:
            h = D.halo_samples
            sp = D.sample_points()
            n = len(h) - 1
            for i in range(n + 1):
                if coeff_distance(h[i], h[n - i]) > TOL_MATCH:
                    raise ContractError("twin halo is not symmetric", {"s": s, "sample": i}, stage="grow_twins")
                q = self.reflect(complex(*sp[n - i]))
                sym = max(sym, abs(complex(*sp[i]) - q))
            if sym > 1e-12:
                raise ContractError("twin embedding is not mirror symmetric", {"s": s, "error": sym},
                                    stage="grow_twins")
        return {"s": float(s), "max_angle": worst, "symmetry_error": sym, "edges": D.tree.n_edges}

    def first_twin(self) -> PlanarTree:
        """Tree formed by the first half of the root children at ``s = 1``."""
        D = self.dendrite(1.0)
        kids = D.tree.children[D.tree.root]
        first = kids[: len(kids) // 2]
        keep, stack = [D.tree.root], list(first)
        while stack:
            v = stack.pop()
            keep.append(v)
            stack.extend(D.tree.children[v])
        ch = {v: (first if v == D.tree.root else D.tree.children[v]) for v in keep}
        return PlanarTree(D.tree.root, ch)

    def to_json(self) -> dict:
        return {"apex": [self.apex.real, self.apex.imag], "axis": self.axis, "half_angle": self.half_angle,
                "schedule": self.schedule.tolist(), "total": self.total}


def grow_twins(T: Dendrite, xi: complex = 1.0, cone: tuple[float, float] | None = None, m: int = 64,
               length: float = 0.25) -> TwinGrowth:
    """Twin growth of ``T`` at the point ``xi`` inside a cone.

    Parameters
    ----------
    T : Dendrite
        Dendrite with halo (its word is walked from the start).
    xi : complex
        Apex of the cone.
    cone : (axis, half_angle), optional
        Bisector direction and half opening angle; defaults to the outward
        normal at ``xi`` and ``pi / 8``.
    m : int
        Number of steps in the schedule ``s = 0, 1/m, ..., 1``.  The member at
        ``s`` has grown ``round(s * total)`` halo intervals of ``T``.

    Returns
    -------
    TwinGrowth
        ``dendrite(0)`` is the point, ``dendrite(1)`` is ``T`` and its mirror
        twin, and the halo at the point between the twins is the last halo
        value of ``T``.
    """
    xi = complex(xi)
    axis, half = cone if cone is not None else (float(np.angle(xi)) if xi != 0 else 0.0, DEFAULT_HALF_ANGLE)
    if not 1e-9 < half < math.pi / 2:
        raise ContractError("cone half-angle out of range", {"half_angle": half}, stage="grow_twins")
    tg = TwinGrowth(T, xi, float(axis), float(half), float(length), np.linspace(0.0, 1.0, m + 1))
    return tg


# peeling ----------------------------------------------------------------------------

@dataclass
class PeelState:
    """Bookkeeping for one intermediate neuron of a peel."""

    zeta: int
    item: int
    sigma: int
    main_edges: int
    fold: int
    b_angle: float | None = None

    def to_json(self) -> dict:
        return {"zeta": self.zeta, "item": self.item, "sigma": self.sigma, "main_edges": self.main_edges,
                "fold": self.fold, "b_angle": self.b_angle}


@dataclass
class PeelResult:
    """Outcome of :func:`peel`."""

    tree: Dendrite
    zeta_star: int
    homotopy: list
    states: list
    step_bound: float
    steps: np.ndarray
    image_steps: np.ndarray
    reports: list = field(default_factory=list)

    def __iter__(self):
        yield self.tree
        yield self.homotopy

    def to_json(self) -> dict:
        return {"zeta_star": self.zeta_star, "length": len(self.homotopy), "step_bound": self.step_bound,
                "max_step": float(self.steps.max()) if len(self.steps) else 0.0,
                "max_image_step": float(self.image_steps.max()) if len(self.image_steps) else 0.0,
                "tree": self.tree.to_json(), "states": [s.to_json() for s in self.states]}


def _same_tree(a: Dendrite | None, b: Dendrite | None) -> bool:
    wa = [] if a is None else a.word
    wb = [] if b is None else b.word
    if len(wa) != len(wb):
        return False
    for x, y in zip(wa, wb):
        if x.kind != y.kind or x.n != y.n:
            return False
        if any(coeff_distance(p, q) > TOL_MATCH for p, q in zip(x.halo, y.halo)):
            return False
    return True


def _grid_in_arc(gamma, M: int) -> list[int]:
    return [j for j in range(M) if bool(gamma.contains(2 * np.pi * j / M))]


def default_sweep_ends(gamma, M: int) -> tuple[int, int]:
    """``(zeta0, zeta_star)``: first sample counterclockwise of 1 and the most clockwise sample of the arc."""
    inside = set(_grid_in_arc(gamma, M))
    if 0 not in inside or 1 not in inside:
        raise ContractError("arc must contain angle 0 and the next sample", {"M": M}, stage="peel")
    j = 0
    while (j - 1) % M in inside and (j - 1) % M != 1:
        j = (j - 1) % M
    if j in (0, 1):
        raise ContractError("arc has no sample clockwise of 1", {"M": M}, stage="peel")
    return 1, j


def _check_peel_pre(nm: Neuron, np_: Neuron, gamma, z0: int, zs: int) -> None:
    if nm.M != np_.M:
        raise ContractError("neurons have different rings", {}, stage="peel")
    if coeff_distance(nm.body, np_.body) > TOL_MATCH:
        raise ContractError("main bodies differ", {}, stage="peel")
    M = nm.M
    inside = _grid_in_arc(gamma, M)
    for j in (z0, zs):
        if j not in inside:
            raise ContractError("sweep ends must lie on the arc", {"sample": j}, stage="peel")
    for j in inside:
        if coeff_distance(nm.ring_in[j], np_.ring_in[j]) > TOL_MATCH or \
                coeff_distance(nm.ring_out[j], np_.ring_out[j]) > TOL_MATCH:
            raise ContractError("haloes differ on the arc", {"sample": j}, stage="peel")
        if not _same_tree(nm.attachments.get(j), np_.attachments.get(j)):
            raise ContractError("trees differ on the arc", {"sample": j}, stage="peel")
        if j != 0 and (nm.attachments.get(j) is not None and nm.attachments[j].word):
            raise ContractError("arc must be free of roots away from 1", {"sample": j}, stage="peel")
    if nm.axon is None or tuple(nm.axon) != tuple(np_.axon or ()):
        raise ContractError("neurons must share the axon", {}, stage="peel")
    if nm.axon[1] not in inside or nm.axon[1] in (z0, zs):
        raise ContractError("axon must sit on the arc outside the sweep", {"axon": list(nm.axon)}, stage="peel")


class _Sweep:
    """Items of the two pellicles counted from ``zeta0`` and the neuron at any sweep state."""

    def __init__(self, nm: Neuron, np_: Neuron, z0: int, zs: int):
        self.nm, self.np = nm, np_
        self.M = nm.M
        self.z0, self.zs = z0, zs
        self.n_pos = (zs - z0) % self.M          # grid points strictly before zeta*
        self.end = 2 * self.n_pos                # item index of T at zeta*
        self.f0 = self._common_prefix()
        self._edge_cache: dict[int, Step] = {}

    def grid(self, item: int) -> int:
        return (self.z0 + item // 2) % self.M

    def tree(self, neuron: Neuron, g: int) -> list[Step]:
        D = neuron.attachments.get(g)
        return [] if D is None else D.word

    def arc(self, neuron: Neuron, g: int):
        return neuron.ring_out[g], neuron.ring_in[(g + 1) % self.M]

    def _common_prefix(self) -> int:
        for i in range(self.end + 1):
            g = self.grid(i)
            if i % 2 == 0:
                same = _same_tree(self.nm.attachments.get(g), self.np.attachments.get(g))
            else:
                a, b = self.arc(self.nm, g), self.arc(self.np, g)
                same = all(coeff_distance(x, y) <= TOL_MATCH for x, y in zip(a, b))
            if not same:
                return i
        return self.end + 1

    def _down(self, g: int) -> Step:
        if g not in self._edge_cache:
            d0, d1 = self.arc(self.np, g)
            self._edge_cache[g] = edge_step("L", (d1, d0), tag=("main", g))
        return self._edge_cache[g]

    def main_edge_word(self, upto: int) -> list[Step]:
        """Folded items ``f0 <= i < upto``: out along ``n+`` reversed, back along ``n-``."""
        items = range(self.f0, upto)
        out: list[Step] = []
        for i in reversed(items):
            g = self.grid(i)
            if i % 2:
                out.append(self._down(g))
            else:
                out += reverse_word(self.tree(self.np, g))
        for i in items:
            g = self.grid(i)
            if i % 2:
                down = self._down(g)
                out.append(Step("R", tuple(self.arc(self.nm, g)), down.emap, ("main", g)))
            else:
                out += self.tree(self.nm, g)
        return out

    def special_word(self, item: int, sigma: int) -> tuple[list[Step], int]:
        """Word of the tree at the sweep point and the fold length it contains."""
        J = self.grid(item)
        t_idx = item - item % 2
        plus = self.tree(self.np, J)
        if t_idx < self.f0:
            return list(plus), 0
        grown = sigma if item % 2 == 0 else word_intervals(plus)
        pre = word_prefix(plus, grown)
        word = pre + reverse_word(pre) + self.main_edge_word(t_idx) + list(self.tree(self.nm, J))
        return word, grown

    def neuron(self, item: int, sigma: int) -> tuple[Neuron, PeelState]:
        M = self.M
        J = self.grid(item)
        ring_in = list(self.nm.ring_in)
        ring_out = list(self.nm.ring_out)
        atts = dict(self.nm.attachments)
        for r in range(item // 2 + (item % 2)):
            g = (self.z0 + r) % M
            if r < item // 2:
                ring_out[g] = self.np.ring_out[g]
                ring_in[(g + 1) % M] = self.np.ring_in[(g + 1) % M]
            if 2 * r < item and g != J:
                atts.pop(g, None)
                if g in self.np.attachments:
                    atts[g] = self.np.attachments[g]
        word, grown = self.special_word(item, sigma)
        atts.pop(J, None)
        if word:
            atts[J] = Dendrite(word, root_image=self.nm.body(np.exp(2j * np.pi * J / M)[None])[0],
                               point_disc=ring_in[J])
        mains = sum(1 for s in word if s.kind == "L" and isinstance(s.tag, tuple) and s.tag[:1] == ("main",))
        n = Neuron(self.nm.body, ring_in, ring_out, atts, self.nm.axon, {"peel_item": item})
        return n, PeelState(J, item, sigma, mains, grown)

    def states(self):
        """Sweep states ``(item, sigma)``; each adds one halo sample to the previous pellicle.

        When the pellicles agree up to ``zeta_star`` the main edge stays a
        point and the sweep only moves it along the circle.
        """
        if self.f0 > self.end:
            for i in range(0, self.end + 1, 2):
                yield i, 0
            return
        yield self.f0, 0
        for i in range(self.f0, self.end):
            if i % 2 == 0:
                n = word_intervals(self.tree(self.np, self.grid(i)))
                if n == 0:
                    continue
                for s in range(1, n):
                    yield i, s
            yield i + 1, 0


def _pool_distance(d, pool_c: np.ndarray, pool_deg: int) -> float:
    """Smallest coefficient distance from ``d`` to a stack of padded discs."""
    deg = max(d.degree, pool_deg)
    c = d.padded(deg)
    if deg > pool_deg:
        pool_c = np.concatenate([pool_c, np.zeros((len(pool_c), deg - pool_deg, 2), complex)], axis=1)
    return float(np.min(np.max(np.abs(pool_c - c[None]), axis=(1, 2))))


def peel(n_minus: Neuron, n_plus: Neuron, gamma, zeta0: int | None = None, zeta_star: int | None = None,
         G=None, validate: bool = True, check_discs: bool = False) -> PeelResult:
    """Homotopy of neurons from ``n_minus`` to ``n_plus`` with one extra dendrite.

    Parameters
    ----------
    n_minus, n_plus : Neuron
        Same body, same ring size, equal halo and no roots on the arc except
        at angle 0, where both carry the same axon.
    gamma : Arc
        The arc around angle 0.
    zeta0, zeta_star : int, optional
        Ring samples where the sweep starts (counterclockwise of 1) and ends
        (clockwise of 1); see :func:`default_sweep_ends`.

    Returns
    -------
    PeelResult
        ``homotopy[0]`` is ``n_minus``; ``homotopy[-1]`` is ``n_plus`` with
        ``tree`` attached at ``zeta_star``.  Consecutive members differ by one
        halo sample, so halo and image steps stay below the largest halo step
        of the two inputs.
    """
    M = n_minus.M
    d0, ds = default_sweep_ends(gamma, M) if (zeta0 is None or zeta_star is None) else (None, None)
    z0 = d0 if zeta0 is None else int(zeta0) % M
    zs = ds if zeta_star is None else int(zeta_star) % M
    _check_peel_pre(n_minus, n_plus, gamma, z0, zs)
    sw = _Sweep(n_minus, n_plus, z0, zs)
    hm, hp = n_minus.closed_halo(), n_plus.closed_halo()
    allowed = {id(d) for d in hm} | {id(d) for d in hp}
    pool = hm + hp
    pool_deg = max(d.degree for d in pool)
    pool_c = np.stack([d.padded(pool_deg) for d in pool])
    bound = max(consecutive_distances(hm).max(), consecutive_distances(hp).max())
    cm, cp = n_minus.center_curve(), n_plus.center_curve()
    img_bound = max(float(np.max(np.linalg.norm(np.diff(cm, axis=0), axis=-1))),
                    float(np.max(np.linalg.norm(np.diff(cp, axis=0), axis=-1))))
    homotopy, states, reports = [], [], []
    cache: dict = {}
    for item, sigma in sw.states():
        n, st = sw.neuron(item, sigma)
        if not homotopy:
            if neuron_distance(n, n_minus) > TOL_MATCH:
                raise ContractError("sweep does not start at n-", {}, stage="peel")
            n = n_minus
        halo = n.closed_halo()
        foreign = [i for i, d in enumerate(halo) if id(d) not in allowed]
        for i in foreign:
            if _pool_distance(halo[i], pool_c, pool_deg) > TOL_MATCH:
                raise ContractError("halo value outside the n+- halo sets", {"state": st.to_json()}, stage="peel")
        if validate:
            reports.append(n.validate(G, delta_cont=bound * (1 + 1e-9) + 1e-15, check_discs=check_discs,
                                      disc_cache=cache))
        homotopy.append(n)
        states.append(st)
    steps = np.array([disc_set_hausdorff(a.closed_halo(), b.closed_halo()) for a, b in zip(homotopy, homotopy[1:])])
    img = np.array([neuron_image_distance(a, b) for a, b in zip(homotopy, homotopy[1:])])
    if len(steps) and (steps.max() > bound * (1 + 1e-9) or img.max() > img_bound * (1 + 1e-9) + 1e-12):
        raise ContractError("homotopy step bound exceeded",
                            {"max_step": float(steps.max()), "bound": bound,
                             "max_image_step": float(img.max()), "image_bound": img_bound}, stage="peel")
    final = homotopy[-1]
    D = final.attachments.get(zs)
    if D is None:
        D = Dendrite([], root_image=n_plus.body(np.exp(2j * np.pi * zs / M)[None])[0],
                     point_disc=n_plus.ring_in[zs])
    expect = n_plus.with_attachment(zs, D) if D.word else n_plus
    if neuron_distance(final, expect) > TOL_MATCH:
        raise ContractError("sweep does not end at n+ with the new tree", {}, stage="peel")
    log.info("peel: %d neurons, tree with %d edges at sample %d", len(homotopy), D.tree.n_edges, zs)
    return PeelResult(D, zs, homotopy, states, bound, steps, img, reports)


# splicing ----------------------------------------------------------------------------

def _stem_word(ring_discs: Sequence, tree_word: Sequence[Step]) -> list[Step]:
    """Edge walked out along earlier ring values, the tree at its tip, and back."""
    if len(ring_discs) < 2:
        return list(tree_word)
    out = edge_step("L", list(ring_discs), tag="stem")
    back = Step("R", tuple(reversed(ring_discs)), out.emap, "stem")
    return [out, *tree_word, back]


@dataclass
class SplicedFamily:
    """Continuous neuron family obtained by splicing peels into the jumps."""

    neurons: list
    params: np.ndarray
    gamma: object
    attached: list
    homotopy_lengths: list
    steps: np.ndarray
    delta_cont: float
    discontinuities: list

    def __len__(self):
        return len(self.neurons)

    def to_json(self) -> dict:
        return {"size": len(self.neurons), "gamma": self.gamma.to_json(), "attached": self.attached,
                "homotopy_lengths": self.homotopy_lengths, "delta_cont": self.delta_cont,
                "max_step": float(self.steps.max()) if len(self.steps) else 0.0,
                "discontinuities": self.discontinuities}


def _halo_scale(neurons: Sequence[Neuron]) -> float:
    out = 0.0
    for n in neurons:
        h = n.closed_halo()
        out = max(out, consecutive_distances(h).max())
    return out


def splice_family(fam: NeuronFamily, gamma=None, G=None, validate: bool = True) -> SplicedFamily:
    """Remove the jumps of a neuron family by peeling at each of them.

    At every jump ``t_j`` the left member is peeled into the right one; the
    resulting dendrite, hung from a stem whose halo retraces the ring values
    at its root back to ``t_j``, is attached to every later member.  The arc
    is shrunk past the root before the next jump.
    """
    from .rhsolve import Arc

    gamma = fam.gamma if gamma is None else gamma
    neurons = list(fam.neurons)
    params = list(np.asarray(fam.params, float))
    M = neurons[0].M
    attached, lengths = [], []
    offset = 0
    for jump in fam.discontinuities:
        i = jump + offset
        try:
            z0, zs = default_sweep_ends(gamma, M)
        except ContractError as exc:
            raise ContractError("arc exhausted", {"jumps_done": len(attached), "reason": str(exc)},
                                stage="splice_family") from exc
        res = peel(neurons[i], neurons[i + 1], gamma, z0, zs, G=G, validate=validate)
        inner = res.homotopy[1:-1]
        T = res.tree
        later = []
        base_ring = [neurons[r].ring_in[zs] for r in range(i + 1, len(neurons))]
        for r in range(i + 1, len(neurons)):
            k = r - (i + 1)
            ring = base_ring[: k + 1][::-1]
            word = _stem_word(ring, T.word)
            n = neurons[r]
            if word:
                D = Dendrite(word, root_image=n.body(np.exp(2j * np.pi * zs / M)[None])[0], point_disc=ring[0])
                n = n.with_attachment(zs, D)
            later.append(n)
        t_mid = np.linspace(params[i], params[i + 1], len(inner) + 2)[1:-1]
        neurons = neurons[: i + 1] + inner + later
        params = params[: i + 1] + list(t_mid) + params[i + 1:]
        offset += len(inner)
        lengths.append(len(inner))
        attached.append({"t": float(params[i]), "zeta_star": zs, "edges": T.tree.n_edges})
        start = 2 * np.pi * (zs + 0.5) / M
        gamma = Arc(start, gamma.end)
        if not bool(gamma.contains(0.0)):
            raise ContractError("arc exhausted", {"jumps_done": len(attached)}, stage="splice_family")
    steps = family_steps(neurons)
    delta = max(fam.delta_cont, _halo_scale(neurons))
    jumps, _ = flag_discontinuities(steps, delta=delta)
    if jumps:
        raise ContractError("spliced family is still discontinuous", {"at": jumps}, stage="splice_family")
    return SplicedFamily(neurons, np.array(params), gamma, attached, lengths, steps, delta, jumps)
