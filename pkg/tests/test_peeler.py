import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dischull.dendra import (
    DiscFamily, PairStep, build_dendrite, build_pw_neuron_family, coeff_distance, flag_discontinuities,
)
from dischull.errors import ContractError
from dischull.peeler import default_sweep_ends, grow_twins, peel, splice_family
from dischull.rhsolve import Arc

from neuron_fixtures import BODY, G, edge_trace, neuron, ring_disc, theta, tree_trace
from oracles import seg_intersect

M = 64
GAMMA = Arc(-0.5, 0.5)


def same(a, b, tol=1e-12):
    return coeff_distance(a, b) <= tol


def bare_edge(th=0.4, length=0.02, n=9):
    """Single edge whose word has no dwell: both families start at the same disc."""
    from dischull.dendra import HomotopyStep
    c = BODY(np.exp(1j * th)[None])[0]
    ts = np.linspace(0, 1, n)
    at = lambda u, v: ring_disc(th, v).translated(c * length * (1 - u))
    F1 = DiscFamily(ts, [at(u, (0.0, 1.0)) for u in ts])
    F2 = DiscFamily(ts, [at(u, (0.5 * u, 1.0)) for u in ts])
    return build_dendrite(HomotopyStep(PairStep(F1.discs[0], F1.discs[0]), F1, F2), G)


def path_tree(th=0.4):
    return build_dendrite(tree_trace(int(round(th * M / (2 * np.pi))), M, "path"), G)


# twins ------------------------------------------------------------------------------

def test_point_dendrite_stays_point():
    from dischull.dendra import Dendrite
    d = ring_disc(0.2)
    T = Dendrite([], point_disc=d)
    tg = grow_twins(T, 1.0, m=4)
    for s in tg.schedule:
        D = tg.dendrite(s)
        assert D.tree.n_edges == 0 and D.halo_samples == [d]


def test_single_edge_three_quarters_is_y():
    T = bare_edge()
    assert [s.kind for s in T.word] == ["L", "R"]
    n = T.word[0].n
    tg = grow_twins(T, 1.0)
    D = tg.dendrite(0.75)
    # hand construction: trunk, a branch and its mirror
    assert D.tree.n_edges == 3
    assert len(D.pellicle.events) == 6
    root_kids = D.tree.children[D.tree.root]
    assert len(root_kids) == 1
    trunk = root_kids[0]
    assert len(D.tree.children[trunk]) == 2
    # trunk carries the first quarter of the halo, the branch the rest up to s
    h = D.halo_samples
    quarter = n // 2
    assert all(a is b for a, b in zip(h[: quarter + 1], T.halo_samples[: quarter + 1]))
    assert len(h) - 1 == 2 * int(0.75 * 2 * n)
    # the trunk lies on the bisector, the branch tips are mirror images
    p_trunk = complex(*D.tree.pos[trunk])
    assert abs(np.angle(p_trunk - 1.0)) < 1e-12
    a, b = (complex(*D.tree.pos[v]) for v in D.tree.children[trunk])
    assert abs(a - np.conj(b)) < 1e-12
    tg.check(D, 0.75)


def test_path_twins_at_one():
    T = path_tree()
    tg = grow_twins(T, 1.0)
    D = tg.dendrite(1.0)
    kids = D.tree.children[D.tree.root]
    assert len(kids) == 2
    for k in kids:
        sub = D.tree.children[k]
        assert len(sub) == 1 and D.tree.children[sub[0]] == ()
    assert tg.first_twin().isomorphic(T.tree)
    # the halo between the twins is the last halo value of T
    mid = T.n_intervals
    assert same(D.halo_samples[mid], T.end)
    assert same(D.halo_samples[0], T.start) and same(D.halo_samples[-1], T.start)


def test_twin_pellicle_is_walk_then_reversed_mirror():
    T = build_dendrite(tree_trace(5, M, "star"), G)
    D = grow_twins(T, 1.0).dendrite(1.0)
    ev = D.pellicle.events
    half = len(ev) // 2
    first = [k for _, k in ev[:half]]
    second = [k for _, k in ev[half:]]
    assert first == [k for _, k in T.pellicle.events]
    assert second == [{"L": "R", "R": "L"}.get(k, k) for k in first[::-1]]


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["edge", "star", "path"]), st.floats(0, 1), st.floats(0.05, 0.7))
def test_twins_symmetric_and_in_cone(shape, s, half):
    T = build_dendrite(tree_trace(5, M, shape), G)
    tg = grow_twins(T, np.exp(0.3j), cone=(0.3, half))
    D = tg.dendrite(s)
    rep = tg.check(D, s)
    assert rep["max_angle"] < half
    h = D.halo_samples
    assert all(same(a, b) for a, b in zip(h, h[::-1]))


def test_twins_reject_bad_cone():
    with pytest.raises(ContractError):
        grow_twins(bare_edge(), 1.0, cone=(0.0, 2.0))


# peel --------------------------------------------------------------------------------

def test_default_sweep_ends():
    assert default_sweep_ends(GAMMA, M) == (1, 59)


def test_peel_equal_tree_free_is_degenerate():
    n = neuron(M)
    res = peel(n, n, GAMMA, G=G)
    assert res.tree.n_intervals == 0 and res.tree.tree.n_edges == 0
    assert len(res.homotopy) > 1
    assert all(h is n or np.max(res.steps) == 0 for h in res.homotopy)
    assert res.homotopy[0] is n


@pytest.fixture(scope="module")
def single_edge_peel():
    nm, np_ = neuron(M), neuron(M, {10: "edge"})
    return nm, np_, peel(nm, np_, GAMMA, G=G)


def test_peel_single_edge_endpoints(single_edge_peel):
    nm, np_, res = single_edge_peel
    assert res.homotopy[0] is nm
    final = res.homotopy[-1]
    assert set(final.attachments) == {10, res.zeta_star}
    assert final.attachments[10] is np_.attachments[10]
    assert res.zeta_star == 59
    # hand trace: the new tree is one main-edge segment per swept arc plus the copy of the edge
    assert res.tree.tree.n_edges == (res.zeta_star - 10) + 1
    assert same(res.tree.start, np_.ring_in[59]) and same(res.tree.end, np_.ring_out[59])


def test_peel_single_edge_interval_bookkeeping(single_edge_peel):
    nm, _, res = single_edge_peel
    n0 = len(nm.closed_halo())
    n1 = len(res.homotopy[-1].closed_halo())
    assert n1 - n0 == 2 * (len(res.homotopy) - 1)


def test_peel_single_edge_twin_phase(single_edge_peel):
    _, np_, res = single_edge_peel
    W = np_.attachments[10]
    tg = grow_twins(W, np_.root_point(10))
    at_10 = [(state, h) for state, h in zip(res.states, res.homotopy) if state.zeta == 10 and state.item % 2 == 0]
    assert len(at_10) == W.n_intervals
    for state, h in at_10:
        expect = tg.word(state.sigma / W.n_intervals)
        if state.sigma == 0:
            assert 10 not in h.attachments
            continue
        got = h.attachments[10].word[: len(expect)]
        assert [s.kind for s in got] == [s.kind for s in expect]
        assert all(a is b for s, t in zip(got, expect) for a, b in zip(s.halo, t.halo))


def test_peel_steps_within_bound(single_edge_peel):
    _, _, res = single_edge_peel
    assert res.steps.max() <= res.step_bound
    assert all(h.body is res.homotopy[0].body for h in res.homotopy)


@pytest.mark.parametrize("shape", ["star", "path"])
def test_peel_two_edge_tree_invariants(shape):
    nm, np_ = neuron(M, {30: "edge"}), neuron(M, {30: "edge", 12: shape})
    res = peel(nm, np_, GAMMA, G=G)
    assert len(res.reports) == len(res.homotopy)
    allowed = nm.closed_halo() + np_.closed_halo()
    for h in res.homotopy[:: max(1, len(res.homotopy) // 10)]:
        for d in h.closed_halo():
            assert any(a is d for a in allowed) or min(coeff_distance(d, a) for a in allowed) <= 1e-12
    final = res.homotopy[-1]
    assert set(final.attachments) == {12, 30, res.zeta_star}


def test_peel_rejects_different_bodies():
    nm = neuron(M)
    other = neuron(M)
    from dischull.dendra import Neuron
    from dischull.discs import linear_disc
    moved = Neuron(linear_disc([0, 0], [1, 1e-3]), other.ring_in, other.ring_out, other.attachments, other.axon)
    with pytest.raises(ContractError):
        peel(nm, moved, GAMMA)


def test_peel_rejects_halo_mismatch_on_arc():
    nm = neuron(M)
    ring = list(nm.ring_in)
    ring[2] = ring_disc(theta(2, M), (0.3, 1.0))
    from dischull.dendra import Neuron
    bad = Neuron(nm.body, ring, ring, {}, nm.axon)
    with pytest.raises(ContractError):
        peel(nm, bad, GAMMA)


def test_peel_rejects_tree_on_arc():
    with pytest.raises(ContractError):
        peel(neuron(M), neuron(M, {2: "edge"}), GAMMA)


# splicing ---------------------------------------------------------------------------------

def _jump_family(jumps, n_t=13):
    """Family over a constant body; a tree appears at sample ``j`` once ``t > t_j``."""
    ts = np.linspace(0, 1, n_t)
    Psi = DiscFamily(ts, [BODY] * n_t)

    def lift(i, t):
        active = sorted(j for tj, j in jumps if t > tj)
        if not active:
            return [(0, M, ring_disc)], {}
        turned = {j: ring_disc(theta(j, M), (0.6, 1.0)) for j in active}
        pieces = []
        for a, b in zip(active, active[1:] + [active[0] + M]):
            pieces.append((a, b, lambda th, a=a: turned[a] if abs(th - theta(a, M)) < 1e-12 else ring_disc(th)))
        traces = {}
        for j in active:
            c = BODY(np.exp(1j * theta(j, M))[None])[0]
            traces[j] = edge_trace(ring_disc(theta(j, M)), turned[j], c, 0.08)
        return pieces, traces

    return build_pw_neuron_family(Psi, lift, GAMMA, G, M=M)


def test_splice_without_jumps_is_identity():
    fam = _jump_family([])
    out = splice_family(fam, G=G)
    assert len(out) == len(fam) and all(a is b for a, b in zip(out.neurons, fam.neurons))


def test_splice_one_jump():
    fam = _jump_family([(0.5, 20)])
    assert len(fam.discontinuities) == 1
    out = splice_family(fam, G=G)
    assert len(out) == len(fam) + sum(out.homotopy_lengths)
    jumps, _ = flag_discontinuities(out.steps, delta=out.delta_cont)
    assert jumps == []
    assert np.max(out.steps) < 5 * out.delta_cont
    zs = out.attached[0]["zeta_star"]
    t_right = fam.params[fam.discontinuities[0] + 1]
    later = [n for n, t in zip(out.neurons, out.params) if t >= t_right - 1e-12]
    assert later and all(zs in n.attachments for n in later)
    assert not out.gamma.contains(theta(zs, M))


def test_splice_two_jumps_distinct_roots():
    fam = _jump_family([(0.45, 20), (0.7, 40)])
    assert len(fam.discontinuities) == 2
    out = splice_family(fam, G=G)
    roots = [a["zeta_star"] for a in out.attached]
    assert len(set(roots)) == 2
    last = out.neurons[-1]
    segs, keys, _ = last.tree_segments()
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if not set(keys[i]) & set(keys[j]):
                assert not seg_intersect(*segs[i], *segs[j])
    last.validate(G)


def test_splice_exhausted_arc():
    fam = _jump_family([(0.45, 20), (0.7, 40)])
    with pytest.raises(ContractError) as exc:
        splice_family(fam, Arc(-0.1, 0.2), G=G)
    assert exc.value.stage == "splice_family"
