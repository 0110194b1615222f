"""Planar rooted trees and their pellicles.

A tree is stored as parent links plus an ordered child list per vertex.
The child order is counterclockwise: at the root it starts at the gap
direction (where the punctured pellicle is cut open), and at any other
vertex it starts at the incoming edge from the parent.

Edges are identified with their lower vertex, so edge ``v`` joins
``parent[v]`` and ``v``.  The pellicle is the boundary walk around a thin
neighbourhood of the tree.  Each edge is passed twice: first on its
``"L"`` side while moving away from the root, then on its ``"R"`` side
while moving back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

LEFT = "L"
RIGHT = "R"

#: angle of the root gap used by :func:`embed_planar`
DEFAULT_GAP_ANGLE = math.pi


class TreeError(ValueError):
    """Raised for malformed trees or invalid subtree selections."""


@dataclass(frozen=True)
class PlanarTree:
    """Rooted tree with counterclockwise child order and optional embedding.

    Parameters
    ----------
    root : int
        Root vertex id.
    children : mapping
        ``vertex -> tuple of children`` in counterclockwise order.  Every
        vertex must appear as a key, leaves with an empty tuple.
    pos : mapping, optional
        ``vertex -> (x, y)``.  Edges are straight segments.
    gap_angle : float
        Direction at the root that lies outside the tree; the child order at
        the root is read counterclockwise starting from it.
    """

    root: int
    children: Mapping[int, tuple[int, ...]]
    pos: Mapping[int, tuple[float, float]] | None = None
    gap_angle: float = DEFAULT_GAP_ANGLE
    parent: Mapping[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ch = {int(v): tuple(int(c) for c in cs) for v, cs in self.children.items()}
        object.__setattr__(self, "children", ch)
        if self.pos is not None:
            object.__setattr__(
                self, "pos", {int(v): (float(p[0]), float(p[1])) for v, p in self.pos.items()}
            )
        if self.root not in ch:
            raise TreeError("root missing from children map")
        par: dict[int, int] = {}
        for v, cs in ch.items():
            for c in cs:
                if c in par:
                    raise TreeError(f"vertex {c} has two parents")
                if c not in ch:
                    raise TreeError(f"child {c} missing from children map")
                par[c] = v
        if self.root in par:
            raise TreeError("root has a parent")
        if len(par) != len(ch) - 1:
            raise TreeError("children lists do not partition the non-root vertices")
        # connectivity / acyclicity: every vertex reaches the root
        seen = {self.root}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in ch[v]:
                seen.add(c)
                stack.append(c)
        if len(seen) != len(ch):
            raise TreeError("tree is not connected")
        if self.pos is not None and set(self.pos) != set(ch):
            raise TreeError("embedding must cover every vertex")
        object.__setattr__(self, "parent", par)

    # basic queries -----------------------------------------------------
    @property
    def vertices(self) -> list[int]:
        """Vertices in depth-first preorder respecting the child order."""
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    @property
    def edges(self) -> list[int]:
        """Edge ids (lower endpoints) in preorder."""
        return [v for v in self.vertices if v != self.root]

    @property
    def n_edges(self) -> int:
        return len(self.children) - 1

    @property
    def is_simple(self) -> bool:
        """True when the root has exactly one child."""
        return len(self.children[self.root]) == 1

    def leaves(self) -> list[int]:
        return [v for v in self.vertices if not self.children[v] and v != self.root]

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (0 if v == self.root else 1)

    def subtree(self, v: int) -> "PlanarTree":
        """Descendants of ``v`` as a tree rooted at ``v`` (embedding kept)."""
        keep = []
        stack = [v]
        while stack:
            u = stack.pop()
            keep.append(u)
            stack.extend(self.children[u])
        ch = {u: self.children[u] for u in keep}
        pos = None if self.pos is None else {u: self.pos[u] for u in keep}
        gap = self.gap_angle
        if pos is not None and v != self.root:
            p, q = self.pos[self.parent[v]], self.pos[v]
            gap = math.atan2(p[1] - q[1], p[0] - q[0])
        return PlanarTree(v, ch, pos, gap)

    def with_pos(self, pos, gap_angle: float | None = None) -> "PlanarTree":
        return PlanarTree(self.root, self.children, pos,
                          self.gap_angle if gap_angle is None else gap_angle)

    def segments(self) -> np.ndarray:
        """Embedded edges as an ``(E, 2, 2)`` array ordered like :attr:`edges`."""
        if self.pos is None:
            raise TreeError("tree has no embedding")
        return np.array([[self.pos[self.parent[e]], self.pos[e]] for e in self.edges],
                        dtype=float).reshape(-1, 2, 2)

    def isomorphic(self, other: "PlanarTree") -> bool:
        """Combinatorial isomorphism respecting root and child order."""
        return canonical_form(self) == canonical_form(other)


def point_tree(vertex: int = 0, pos: tuple[float, float] | None = (0.0, 0.0)) -> PlanarTree:
    """Degenerate tree with a single vertex and no edges."""
    return PlanarTree(vertex, {vertex: ()}, None if pos is None else {vertex: pos})


def from_parent_list(parents: Sequence[int | None]) -> PlanarTree:
    """Build a tree from ``parents[i]`` (``None`` at the root).

    Children are ordered by increasing vertex id.
    """
    ch: dict[int, list[int]] = {i: [] for i in range(len(parents))}
    root = None
    for i, p in enumerate(parents):
        if p is None:
            if root is not None:
                raise TreeError("more than one root")
            root = i
        elif p not in ch:
            raise TreeError(f"unknown parent {p} of vertex {i}")
        else:
            ch[p].append(i)
    if root is None:
        raise TreeError("no root")
    return PlanarTree(root, {v: tuple(c) for v, c in ch.items()})


def canonical_form(tree: PlanarTree, v: int | None = None) -> tuple:
    """Nested tuple encoding the ordered shape below ``v``."""
    v = tree.root if v is None else v
    return tuple(canonical_form(tree, c) for c in tree.children[v])


# pellicle ----------------------------------------------------------------

@dataclass(frozen=True)
class PellicleWalk:
    """Boundary walk of a planar tree.

    ``events[i] = (edge, side)``; the parameter interval ``[0, 1]`` is split
    into ``len(events)`` equal pieces, one per event.
    """

    events: tuple[tuple[int, str], ...]
    punctured: bool = True

    def __len__(self):
        return len(self.events)

    def locate(self, s: float) -> tuple[int, float]:
        """Event index and local parameter in ``[0, 1]`` for ``s``."""
        n = len(self.events)
        if n == 0:
            return 0, 0.0
        s = float(s)
        if not self.punctured:
            s = s % 1.0
        s = min(max(s, 0.0), 1.0)
        i = min(int(s * n), n - 1)
        return i, s * n - i


def pellicle(tree: PlanarTree, punctured: bool = True) -> PellicleWalk:
    """Pellicle of ``tree`` as an ordered list of ``(edge, side)`` events.

    The walk goes down each edge on its ``"L"`` side, walks the subtree,
    and comes back on the ``"R"`` side, visiting children in counterclockwise
    order.  The punctured walk begins on the left side of the first root edge
    and ends on the right side of the last one; the closed walk has the same
    events read cyclically.
    """
    events: list[tuple[int, str]] = []
    # iterative Euler tour
    stack: list[tuple[int, int]] = [(tree.root, 0)]
    while stack:
        v, i = stack.pop()
        cs = tree.children[v]
        if i < len(cs):
            stack.append((v, i + 1))
            c = cs[i]
            events.append((c, LEFT))
            stack.append((c, 0))
        elif v != tree.root:
            events.append((v, RIGHT))
    return PellicleWalk(tuple(events), punctured)


def pellicle_point(tree: PlanarTree, walk: PellicleWalk, s: float, offset: float = 0.0) -> np.ndarray:
    """Planar point ``m_T(s)`` of the pellicle.

    With ``offset == 0`` the point lies on the tree itself.  A positive
    offset pushes it sideways, which gives a picture of the thin
    neighbourhood boundary (used for plotting only).
    """
    if tree.pos is None:
        raise TreeError("tree has no embedding")
    if not walk.events:
        return np.array(tree.pos[tree.root], dtype=float)
    i, u = walk.locate(s)
    e, side = walk.events[i]
    a = np.array(tree.pos[tree.parent[e]])
    b = np.array(tree.pos[e])
    if side == LEFT:
        p, q = a, b
    else:
        p, q = b, a
    pt = p + u * (q - p)
    if offset:
        d = q - p
        nrm = np.array([d[1], -d[0]]) / (np.hypot(*d) or 1.0)
        pt = pt + offset * nrm
    return pt


def pellicle_points(tree: PlanarTree, walk: PellicleWalk, s: Iterable[float], offset: float = 0.0) -> np.ndarray:
    return np.array([pellicle_point(tree, walk, t, offset) for t in s]).reshape(-1, 2)


def pellicle_param_of_vertex(walk: PellicleWalk, tree: PlanarTree, v: int) -> list[float]:
    """Parameters at which the punctured walk passes vertex ``v``."""
    n = len(walk)
    if n == 0:
        return [0.0]
    out = []
    for i, (e, side) in enumerate(walk.events):
        start = tree.parent[e] if side == LEFT else e
        if start == v:
            out.append(i / n)
    last_e, last_side = walk.events[-1]
    end = last_e if last_side == LEFT else tree.parent[last_e]
    if end == v:
        out.append(1.0)
    return out


# gluing and cutting --------------------------------------------------------

def _relabel(tree: PlanarTree, start: int, root_id: int) -> tuple[dict[int, int], int]:
    m = {tree.root: root_id}
    nxt = start
    for v in tree.vertices:
        if v != tree.root:
            m[v] = nxt
            nxt += 1
    return m, nxt


def glue_maps(trees: Sequence[PlanarTree]) -> tuple[PlanarTree, list[dict[int, int]]]:
    """Glue trees at their roots and also return the vertex relabelings.

    The new root is vertex ``0``; the vertices of the ``i``-th tree follow in
    preorder.  The result is re-embedded with :func:`embed_planar`.
    """
    if not trees:
        return point_tree(0), []
    if len(trees) == 1 and trees[0].root == 0:
        return trees[0], [{v: v for v in trees[0].children}]
    ch: dict[int, tuple[int, ...]] = {0: ()}
    maps = []
    nxt = 1
    for t in trees:
        m, nxt = _relabel(t, nxt, 0)
        maps.append(m)
        for v, cs in t.children.items():
            mapped = tuple(m[c] for c in cs)
            if v == t.root:
                ch[0] = ch[0] + mapped
            else:
                ch[m[v]] = mapped
    out = embed_planar(PlanarTree(0, ch))
    return out, maps


def glue_at_root(trees: Sequence[PlanarTree]) -> PlanarTree:
    """Glue trees along their common root, ordered counterclockwise as given."""
    if len(trees) == 1:
        return trees[0]
    return glue_maps(trees)[0]


@dataclass(frozen=True)
class SubtreeSelection:
    """Set of kept vertices; must contain the root and be closed under parents."""

    kept: frozenset[int]

    def __init__(self, kept: Iterable[int]):
        object.__setattr__(self, "kept", frozenset(int(v) for v in kept))

    def validate(self, tree: PlanarTree) -> None:
        if tree.root not in self.kept:
            raise TreeError("selection must contain the root")
        for v in self.kept:
            if v not in tree.children:
                raise TreeError(f"unknown vertex {v}")
            if v != tree.root and tree.parent[v] not in self.kept:
                raise TreeError(f"selection is not closed under root paths at {v}")


def cut_subtrees(tree: PlanarTree, sel: SubtreeSelection | Iterable[int]):
    """Split ``tree`` into the kept subtree and residual rooted trees.

    Every removed edge whose upper vertex is kept starts one residual,
    rooted at that upper vertex.  Vertex ids and positions are preserved so
    that :func:`reattach` can undo the cut.

    Returns
    -------
    kept : PlanarTree
    residuals : list of PlanarTree
        In pellicle order of their attachment edges.
    """
    if not isinstance(sel, SubtreeSelection):
        sel = SubtreeSelection(sel)
    sel.validate(tree)
    kept_ch = {v: tuple(c for c in tree.children[v] if c in sel.kept) for v in sel.kept}
    kept_pos = None if tree.pos is None else {v: tree.pos[v] for v in sel.kept}
    kept = PlanarTree(tree.root, kept_ch, kept_pos, tree.gap_angle)
    residuals = []
    for v in tree.vertices:
        if v in sel.kept:
            continue
        p = tree.parent[v]
        if p not in sel.kept:
            continue
        sub = tree.subtree(v)
        ch = dict(sub.children)
        ch[p] = (v,)
        pos = None
        gap = tree.gap_angle
        if tree.pos is not None:
            pos = dict(sub.pos)
            pos[p] = tree.pos[p]
            a, b = tree.pos[p], tree.pos[v]
            gap = math.atan2(b[1] - a[1], b[0] - a[0]) + math.pi
        residuals.append(PlanarTree(p, ch, pos, gap))
    return kept, residuals


def _ccw_angle(ref: float, a: float) -> float:
    return (a - ref) % (2 * math.pi)


def _reference_angle(tree: PlanarTree, v: int) -> float:
    if v == tree.root:
        return tree.gap_angle
    p, q = tree.pos[tree.parent[v]], tree.pos[v]
    return math.atan2(p[1] - q[1], p[0] - q[0])


def reattach(kept: PlanarTree, residuals: Sequence[PlanarTree]) -> PlanarTree:
    """Attach residual trees to ``kept`` at their roots.

    Children at each attachment vertex are ordered by counterclockwise angle
    from the reference direction, so the embedding decides the order.
    """
    if kept.pos is None or any(r.pos is None for r in residuals):
        raise TreeError("reattach needs embedded trees")
    ch = {v: list(cs) for v, cs in kept.children.items()}
    pos = dict(kept.pos)
    for r in residuals:
        if r.root not in ch:
            raise TreeError(f"attachment vertex {r.root} not in kept tree")
        for v, cs in r.children.items():
            if v == r.root:
                ch[v].extend(cs)
            else:
                if v in ch:
                    raise TreeError(f"vertex {v} appears twice")
                ch[v] = list(cs)
            pos[v] = r.pos[v]
    tmp = PlanarTree(kept.root, {v: tuple(c) for v, c in ch.items()}, pos, kept.gap_angle)
    ordered = {}
    for v, cs in tmp.children.items():
        ref = _reference_angle(tmp, v)
        pv = pos[v]
        ordered[v] = tuple(sorted(cs, key=lambda c: _ccw_angle(ref, math.atan2(pos[c][1] - pv[1], pos[c][0] - pv[0]))))
    return PlanarTree(kept.root, ordered, pos, kept.gap_angle)


# embedding -----------------------------------------------------------------

def _leaf_counts(tree: PlanarTree) -> dict[int, int]:
    cnt: dict[int, int] = {}
    for v in reversed(tree.vertices):
        cs = tree.children[v]
        cnt[v] = sum(cnt[c] for c in cs) if cs else 1
    return cnt


def embed_planar(tree: PlanarTree, apex: tuple[float, float] = (0.0, 0.0), heading: float = 0.0,
                 spread: float | None = None, edge_length: float = 1.0) -> PlanarTree:
    """Straight-line planar embedding by recursive angular sectors.

    Each vertex owns a cone of directions (always narrower than a half
    plane); its children split the cone in counterclockwise order, in
    proportion to their leaf counts, and sit one ``edge_length`` away along
    the bisector of their share.  A child's cone is contained in the parent's,
    and sibling cones meet only at the apex, so no two edges cross.

    Parameters
    ----------
    apex : point
        Position of the root.
    heading : float
        Direction of the bisector of the root cone.
    spread : float, optional
        Opening angle of the root cone.  Defaults to ``7/4 pi``, leaving a gap
        around ``heading + pi``.
    edge_length : float
        Length of root edges; deeper edges have the same length.
    """
    if spread is None:
        spread = 1.75 * math.pi
    cnt = _leaf_counts(tree)
    pos = {tree.root: (float(apex[0]), float(apex[1]))}
    cap = 0.9 * math.pi
    stack = [(tree.root, heading - spread / 2, heading + spread / 2)]
    while stack:
        v, lo, hi = stack.pop()
        cs = tree.children[v]
        if not cs:
            continue
        total = sum(cnt[c] for c in cs)
        a = lo
        for c in cs:
            w = (hi - lo) * cnt[c] / total
            mid = a + w / 2
            half = min(w, cap) / 2
            px, py = pos[v]
            pos[c] = (px + edge_length * math.cos(mid), py + edge_length * math.sin(mid))
            stack.append((c, mid - half, mid + half))
            a += w
    return PlanarTree(tree.root, tree.children, pos, heading + math.pi)


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_cross(p1, p2, q1, q2, eps: float = 1e-12) -> bool:
    """True when two closed segments share a point."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps and
                min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps)

    if abs(d1) <= eps and on_seg(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_seg(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_seg(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_seg(p1, p2, q2):
        return True
    return False


def crossing_pairs(tree: PlanarTree) -> list[tuple[int, int]]:
    """Brute-force O(E^2) list of edge pairs meeting away from shared vertices.

    Adjacent edges are allowed to touch only at their common vertex; this is
    tested by shrinking them slightly away from it.
    """
    es = tree.edges
    segs = {e: (tree.pos[tree.parent[e]], tree.pos[e]) for e in es}
    bad = []
    for i, e in enumerate(es):
        for f in es[i + 1:]:
            a1, a2 = segs[e]
            b1, b2 = segs[f]
            ends_e = {tree.parent[e], e}
            ends_f = {tree.parent[f], f}
            shared = ends_e & ends_f
            if shared:
                # shorten both segments away from the shared vertex
                s = shared.pop()
                sp = np.array(tree.pos[s])
                oe = np.array(tree.pos[(ends_e - {s}).pop()])
                of = np.array(tree.pos[(ends_f - {s}).pop()])
                a1, a2 = sp + 1e-6 * (oe - sp), oe
                b1, b2 = sp + 1e-6 * (of - sp), of
                # collinear overlap along the same ray also counts
                if abs(_orient(sp, oe, of)) <= 1e-12 and np.dot(oe - sp, of - sp) > 0:
                    bad.append((e, f))
                    continue
            if segments_cross(a1, a2, b1, b2):
                bad.append((e, f))
    return bad


def child_order_matches_embedding(tree: PlanarTree) -> bool:
    """Check that counterclockwise angles reproduce the stored child order."""
    if tree.pos is None:
        return False
    for v, cs in tree.children.items():
        if len(cs) < 2:
            continue
        ref = _reference_angle(tree, v)
        pv = tree.pos[v]
        ang = [_ccw_angle(ref, math.atan2(tree.pos[c][1] - pv[1], tree.pos[c][0] - pv[0])) for c in cs]
        if any(b <= a for a, b in zip(ang, ang[1:])):
            return False
    return True


# serialization ---------------------------------------------------------------

SCHEMA = "disc-hull/1"


def tree_to_json(tree: PlanarTree) -> dict:
    verts = []
    for v in tree.vertices:
        verts.append({
            "id": v,
            "parent": tree.parent.get(v),
            "children": list(tree.children[v]),
            "pos": None if tree.pos is None else list(tree.pos[v]),
        })
    return {"schema": SCHEMA, "root": tree.root, "vertices": verts}


def tree_from_json(obj: dict) -> PlanarTree:
    ch = {int(d["id"]): tuple(int(c) for c in d.get("children", [])) for d in obj["vertices"]}
    for d in obj["vertices"]:
        p = d.get("parent")
        if p is not None and int(d["id"]) not in ch.get(int(p), ()):
            raise TreeError(f"parent link of {d['id']} disagrees with children lists")
    pos_list = [d.get("pos") for d in obj["vertices"]]
    pos = None
    if all(p is not None for p in pos_list):
        pos = {int(d["id"]): tuple(d["pos"]) for d in obj["vertices"]}
    return PlanarTree(int(obj["root"]), ch, pos)
