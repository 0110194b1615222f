import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dischull.discs import small_embedded_disc
from dischull.errors import ContractError
from dischull.fatten import (
    JordanCurve, approximate_on_fattening, conformal_reparam, fatten_region, max_tau,
    skeleton_samples, transport_halo, unit_circle,
)
from dischull.treecore import PlanarTree, SubtreeSelection

from neuron_fixtures import neuron
from oracles import arnoldi_lsq_sup_error, ellipse_inverse_map_derivative


def spoke(angle=0.0, length=0.5):
    """One straight edge leaving the unit circle radially."""
    r = np.exp(1j * angle)
    tip = (1 + length) * r
    return PlanarTree(0, {0: (1,), 1: ()}, {0: (r.real, r.imag), 1: (tip.real, tip.imag)})


def fork(angle=2.0):
    """Edge with two short branches at its tip."""
    r = np.exp(1j * angle)
    p = lambda z: (z.real, z.imag)
    a = 1.4 * r
    return PlanarTree(0, {0: (1,), 1: (2, 3), 2: (), 3: ()},
                      {0: p(r), 1: p(a), 2: p(a + 0.3 * r * np.exp(0.5j)), 3: p(a + 0.3 * r * np.exp(-0.5j))})


ALL = lambda T: SubtreeSelection(frozenset(T.children))


# regions ------------------------------------------------------------------------------

def test_empty_selection_is_the_disc():
    reg = fatten_region({}, None, 0.1)
    assert not reg.kept and not reg.components
    assert reg.hausdorff_to_skeleton() < 2e-3
    phi = conformal_reparam(reg)
    z = 0.7 * np.exp(1j * np.linspace(0, 6, 7))
    assert np.max(np.abs(phi(z) - z)) < 1e-10


def test_single_edge_finger():
    T = spoke()
    tau = 0.05
    reg = fatten_region({0: T}, {0: ALL(T)}, tau)
    # leaf on the boundary, edge and disc inside, a point beyond the cap outside
    assert reg.boundary_distance(1.5)[0] < reg.report["leaf_tol"]
    assert np.all(reg.contains(1 + 0.5 * np.linspace(0, 1, 50)))
    assert np.all(reg.contains(1.2 + tau * 0.99j * np.array([1, -1])))
    assert not np.any(reg.contains([1.5 + 1e-3, 1.2 + 1.01j * tau, 1.2 - 1.01j * tau]))
    assert set(reg.components) == {0}
    # area: disc plus a rectangle of width 2 tau and half a round cap (leaf edge is shortened by tau)
    area = math.pi + 2 * tau * (0.5 - tau) + 0.5 * math.pi * tau ** 2
    assert reg.polygon.area == pytest.approx(area, rel=2e-3)


def test_partial_selection_excludes_residual():
    T = fork()
    tau = 0.4 * max_tau({0: T})
    reg = fatten_region({0: T}, {0: SubtreeSelection(frozenset({0, 1}))}, tau)
    assert len(reg.residual) == 2
    r = np.exp(2.0j)
    # kept leaf 1 on boundary, residual branches outside except their attaching point
    assert reg.boundary_distance(1.4 * r)[0] < reg.report["leaf_tol"]
    for v in (2, 3):
        p = complex(*T.pos[v])
        pts = 1.4 * r + np.linspace(0.05, 1, 20) * (p - 1.4 * r)
        assert not np.any(reg.contains(pts))


def test_too_thick_is_rejected_with_max():
    T = spoke()
    with pytest.raises(ContractError) as exc:
        fatten_region({0: T}, {0: ALL(T)}, 1.0)
    assert exc.value.report["max_tau"] == pytest.approx(0.125)


def test_regions_decrease_on_grid():
    trees = {0: spoke(0.3), 1: fork(2.5)}
    sel = {0: ALL(trees[0]), 1: SubtreeSelection(frozenset({0, 1, 2}))}
    tm = max_tau(trees)
    x = np.linspace(-1.8, 1.8, 200)
    grid = (x[:, None] + 1j * x[None, :]).ravel()
    taus = [tm, tm / 2, tm / 4, tm / 8]
    inside = [fatten_region(trees, sel, t).contains(grid) for t in taus]
    for big, small in zip(inside, inside[1:]):
        assert not np.any(small & ~big)


def test_hausdorff_shrinks_with_tau():
    T = fork()
    tm = max_tau({0: T})
    d = [fatten_region({0: T}, {0: ALL(T)}, tm / 2 ** k).hausdorff_to_skeleton() for k in range(4)]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] < 2 * tm / 8


def test_neuron_fattening():
    n = neuron(64, {10: "edge", 30: "star", 50: "path"})
    sel = {j: ALL(n.attachments[j].tree) for j in n.layout()}
    reg = fatten_region(n, sel, max_tau(n))
    assert set(reg.components) == {10, 30, 50}
    assert len(reg.polygon.interiors) == 0


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.2, 0.8), st.floats(0.05, 1.0))
def test_region_invariants_random_spoke(angle, length, frac):
    T = spoke(angle, length)
    tau = frac * max_tau({0: T})
    reg = fatten_region({0: T}, {0: ALL(T)}, tau)
    tip = (1 + length) * np.exp(1j * angle)
    assert reg.boundary_distance(tip)[0] <= reg.report["leaf_tol"]
    assert np.all(reg.contains(np.exp(1j * np.linspace(0, 2 * np.pi, 97))))
    assert reg.hausdorff_to_skeleton() <= 1.5 * tau


# approximation -------------------------------------------------------------------------

def _disc_samples(n_r=10, n_th=48):
    r = np.linspace(0, 1, n_r)
    th = 2 * np.pi * np.arange(n_th) / n_th
    return np.concatenate([[0j], (r[1:, None] * np.exp(1j * th)).ravel()])


def test_polynomial_is_reproduced():
    z = np.concatenate([_disc_samples(), 1 + 0.3 * np.linspace(0, 1, 20)])
    vals = np.stack([z ** 3 - 2j * z, 0.5 + z ** 2], -1)
    ap = approximate_on_fattening(z, vals, eps=1e-10)
    assert ap.reached and ap.map.degree <= 4
    assert ap.error < 1e-12


def test_off_continuation_edge_degree_sweep():
    x = np.linspace(0, 1, 40)
    zd = _disc_samples()
    ze = 1 + 0.5 * x
    z = np.concatenate([zd, ze])
    vals = np.concatenate([np.stack([zd, zd ** 2], -1), np.stack([ze, 1 - 0.8 * x], -1)])
    ap = approximate_on_fattening(z, vals, eps=1e-14, degrees=(8, 16, 32))
    for d in (8, 16, 32):
        assert ap.errors[d] == pytest.approx(arnoldi_lsq_sup_error(z, vals, d), rel=1e-3, abs=1e-9)
    assert ap.errors[8] > ap.errors[16] > ap.errors[32]
    assert all(b <= a for a, b in zip(ap.best_errors, ap.best_errors[1:]))
    assert not ap.reached


def test_neuron_skeleton_approximation():
    n = neuron(64, {10: "edge"})
    sel = {10: ALL(n.attachments[10].tree)}
    z, vals = skeleton_samples(n, sel)
    ap = approximate_on_fattening(z, vals, eps=1e-6)
    # the edge image leaves the analytic continuation, so convergence is slow but steady
    assert all(b <= a for a, b in zip(ap.best_errors, ap.best_errors[1:]))
    assert ap.error < 0.5 * ap.best_errors[0] and ap.error < 0.05
    # body restriction on the disc is kept closely
    zd = 0.5 * np.exp(1j * np.linspace(0, 6, 9))
    assert np.max(np.abs(ap.map(zd) - n.body(zd))) <= ap.error * 10


def test_halo_transport():
    c_old = np.array([[1, 0], [0, 1]], dtype=complex)
    c_new = c_old + np.array([[0.1, 0.2j], [0, -0.3]])
    discs = [small_embedded_disc(c, [0, 1], 0.01) for c in c_old]
    out = transport_halo(discs, c_old, c_new)
    for d, e, c in zip(discs, out, c_new):
        assert np.allclose(e.center, c)
        assert np.allclose(e.coeffs[1:], d.coeffs[1:])


# conformal maps -------------------------------------------------------------------------

def test_unit_disc_identity():
    phi = conformal_reparam(unit_circle(256), center=0)
    assert phi.report["cr_defect"] < 1e-10
    assert abs(phi.coeffs[1] - 1) < 1e-12
    assert np.max(np.abs(np.delete(phi.coeffs, 1))) < 1e-12


def test_radius_two_disc():
    c = JordanCurve.from_function(lambda t: 2 * np.exp(1j * t), lambda t: 2j * np.exp(1j * t), 256)
    phi = conformal_reparam(c, center=0)
    z = np.array([0.3, 0.5j, -0.2 - 0.2j])
    assert np.max(np.abs(phi(z) - 2 * z)) < 1e-10
    assert abs(phi.dphi0 - 2) < 1e-12


ELLIPSE = (1.5, 0.8, 0.1 + 0.1j)


def _ellipse(n):
    a, b, _ = ELLIPSE
    return JordanCurve.from_function(lambda t: a * np.cos(t) + 1j * b * np.sin(t),
                                     lambda t: -a * np.sin(t) + 1j * b * np.cos(t), n)


def test_ellipse_derivative_against_laplace_oracle():
    a, b, c = ELLIPSE
    n = 512
    phi = conformal_reparam(_ellipse(n), center=c)
    t = 2 * np.pi * np.arange(n) / n
    df, fit = ellipse_inverse_map_derivative(a, b, c, t)
    assert fit < 1e-10
    assert np.max(np.abs(phi.boundary_derivative_modulus() - 1 / df)) < 1e-4


def test_ellipse_inverse_composition():
    a, b, c = ELLIPSE
    phi = conformal_reparam(_ellipse(512), center=c)
    t = 2 * np.pi * (np.arange(128) + 0.37) / 128
    w = a * np.cos(t) + 1j * b * np.sin(t)
    assert np.max(np.abs(phi.boundary_point(phi.boundary_angle(w)) - w)) < 1e-6
    th = 2 * np.pi * np.arange(128) / 128
    back = phi.boundary_angle(phi.boundary_point(th))
    assert np.max(np.abs(np.angle(np.exp(1j * (back - th))))) < 1e-6


def test_tip_normalization():
    a, b, c = ELLIPSE
    phi = conformal_reparam(_ellipse(256), center=c, tip=-a)
    assert abs(phi.boundary_point(0.0) - (-a)) < 1e-9
    assert abs(phi(0) - c) < 1e-12
    plain = conformal_reparam(_ellipse(256), center=c)
    assert plain.dphi0.real > 0 and abs(plain.dphi0.imag) < 1e-12
    assert abs(abs(phi.dphi0) - abs(plain.dphi0)) < 1e-12


def test_finger_region_map_is_monotone():
    T = spoke(0.0, 0.4)
    reg = fatten_region({0: T}, {0: ALL(T)}, 0.1)
    phi = conformal_reparam(reg, tip=1.4, strict=False, n_max=1024)
    assert phi.report["monotone"]
    assert abs(phi.boundary_point(0.0) - 1.4) < 1e-4
    assert phi.report["center_error"] < 1e-3
    w = phi.boundary_point(np.linspace(0, 2 * np.pi, 64, endpoint=False))
    assert np.max(reg.boundary_distance(w)) < 1e-3
