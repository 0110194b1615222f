import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dischull.discs import (
    AnalyticDisc, DiscFamily, MobiusAut, constant_disc, foliate_tube, holomorphize_family,
    is_g_disc, linear_disc, perturb_to_immersion, recenter, small_embedded_disc,
)
from dischull.domains import shell, torus_tube
from dischull.errors import ContractError

from oracles import polyval_c2

CIRCLE64 = np.exp(2j * np.pi * np.arange(64) / 64)


def quad_disc():
    return AnalyticDisc([[0, 0], [1, 0], [0, 1]])  # z -> (z, z^2)


def test_evaluation_matches_direct_sum():
    rng = np.random.default_rng(0)
    c = rng.normal(size=(9, 2)) + 1j * rng.normal(size=(9, 2))
    d = AnalyticDisc(c)
    z = rng.normal(size=20) * 0.5 + 1j * rng.normal(size=20) * 0.5
    assert np.allclose(d(z), polyval_c2(c, z), atol=1e-13)


def test_tail_constant_bounds_coefficients():
    d = AnalyticDisc([[1, 0], [0.5, 0.2], [0.1, 0.1]], radius=1.5)
    k = np.arange(3)
    assert np.all(np.linalg.norm(d.coeffs, axis=1) <= d.tail_constant * 1.5 ** -k + 1e-15)


def test_mobius_basics():
    phi = MobiusAut(0.3 + 0.2j, rotation=1j)
    assert phi(0) == pytest.approx(0.3 + 0.2j)
    z = 0.4 * CIRCLE64
    assert np.allclose(phi.inverse(phi(z)), z)
    assert np.allclose(np.abs(phi(CIRCLE64)), 1.0)
    with pytest.raises(ValueError):
        MobiusAut(1.0)


def test_recenter_identity():
    d = quad_disc()
    assert recenter(d, 0) is d


def test_recenter_center_value():
    d = linear_disc([0, 0], [1, 0])
    r = recenter(d, 0.5)
    assert np.allclose(r.center, [0.5, 0], atol=1e-12)


def test_recenter_matches_direct_composition():
    d = quad_disc()
    r = recenter(d, 0.3)
    phi = MobiusAut(0.3)
    # oracle: evaluate z -> (phi(z), phi(z)^2) directly
    w = phi(CIRCLE64)
    direct = np.stack([w, w ** 2], axis=-1)
    assert np.max(np.abs(r(CIRCLE64) - direct)) < 1e-9


def test_recenter_rejects_outside_point():
    with pytest.raises(ValueError):
        recenter(quad_disc(), 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 0.6), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_recenter_round_trip_and_image(r0, arg, rot_arg):
    d = quad_disc()
    z0 = r0 * np.exp(1j * arg)
    u = np.exp(1j * rot_arg)
    phi = MobiusAut(z0, u)
    e = recenter(d, z0, rotation=u)
    # pulling back by the inverse automorphism restores d
    inv0 = complex(phi.inverse(0))
    back = recenter(e, inv0, rotation=1 / u)
    psi = MobiusAut(inv0, 1 / u)
    # back = d o phi o psi, and phi o psi is a rotation fixing 0
    rot = complex(phi(psi(1.0)))
    assert np.max(np.abs(back(CIRCLE64) - d(rot * CIRCLE64))) < 1e-7
    # boundary image set preserved: each sample sits on d at a unit-modulus point
    z = np.exp(2j * np.pi * np.arange(256) / 256)
    w = phi(z)
    assert np.allclose(np.abs(w), 1.0)
    assert np.max(np.abs(e(z) - d(w))) < 1e-8


def test_is_g_disc_shell():
    rep = is_g_disc(linear_disc([0, 0], [1, 0]), shell(0.9, 1.1))
    assert rep.immersed and rep.boundary_in_G
    assert rep.margin == pytest.approx(0.1)


def test_constant_disc_not_immersed():
    assert not is_g_disc(constant_disc([1, 0]), shell()).immersed


def test_torus_disc_on_boundary_of_closed_tube():
    # z -> (z, -iz) seen through exp: (e^z, e^{-iz})
    f = AnalyticDisc.from_function(lambda z: np.stack([np.exp(z), np.exp(-1j * z)], -1), degree=40)
    rep = is_g_disc(f, torus_tube(closed=True))
    assert rep.immersed and rep.boundary_in_G
    assert abs(rep.margin) < 1e-9


def test_small_embedded_disc():
    d = small_embedded_disc([0, 0], [1, 0], 0.1)
    assert np.allclose(d.coeffs, [[0, 0], [0.1, 0]])
    assert d.diameter() == pytest.approx(0.2)
    assert d.is_immersed()


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(1e-3, 0.049))
def test_small_disc_on_unit_sphere_lies_in_shell(a, b, r):
    c = np.array([np.cos(a), np.sin(a) * np.exp(1j * b)])
    v = np.array([-np.conj(c[1]), np.conj(c[0])])
    d = small_embedded_disc(c, v, r)
    # triangle inequality oracle: | |d(z)| - 1 | <= r < 0.1
    assert np.all(np.abs(np.linalg.norm(d.boundary(), axis=-1) - 1) <= r + 1e-12)
    assert is_g_disc(d, shell(0.9, 1.1)).boundary_in_G
    assert d.diameter() == pytest.approx(2 * r)


def test_foliation_flat():
    fol = foliate_tube(linear_disc([0, 0], [1, 0]), [0, 1], 0.2)
    z1, z2 = fol.coordinates([0.1, 0.05])
    assert z1 == pytest.approx(0.1) and z2 == pytest.approx(0.05)
    assert np.allclose(fol.leaf(0).coeffs, fol.disc.coeffs)


def test_foliation_newton_residual():
    fol = foliate_tube(quad_disc(), [0, 1], 0.5)
    q = np.array([0.2, 0.1])
    z1, z2 = fol.coordinates(q)
    assert np.linalg.norm(fol.point(z1, z2) - q) < 1e-10
    leaf = fol.leaf_through(q)
    assert np.linalg.norm(leaf.center - q) < 1e-10


def test_foliation_rejects_tangent_direction():
    with pytest.raises(ContractError):
        foliate_tube(linear_disc([0, 0], [1, 0]), [1, 0], 0.1)


def _sine_family(n=65):
    ts = np.linspace(0, 1, n)
    return DiscFamily.from_function(lambda t: [[0, 0], [1, np.sin(t)]], ts)


def test_holomorphize_constant_family():
    F = DiscFamily.from_function(lambda t: [[1, 2], [0.5, 0.1]], np.linspace(0, 1, 9))
    H = holomorphize_family(F, N=3)
    assert H.error < 1e-14
    assert np.allclose(H.coeffs(0.3), F[0].coeffs)


def test_holomorphize_linear_family_exact():
    F = DiscFamily.from_function(lambda t: [[0, 0], [1, t]], np.linspace(0, 1, 9))
    H = holomorphize_family(F, N=1, t_degree=1)
    assert H.error < 1e-13
    assert H.poly.shape == (1, 2, 2)


def test_holomorphize_sine_family_decays_and_pins():
    F = _sine_family()
    errs = []
    for deg in (1, 3, 5, 7):
        H = holomorphize_family(F, N=1, t_degree=deg)
        errs.append(H.error)
        assert np.max(np.abs(H.coeffs(1.0) - F[-1].padded(F.degree))) <= 1e-14
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # frozen oracle: grid error against sin evaluated directly
    ts = np.linspace(0, 1, 32)
    H = holomorphize_family(F, N=1, t_degree=7)
    direct = max(np.max(np.abs(H(t, CIRCLE64[::2])[..., 1] - np.sin(t) * CIRCLE64[::2])) for t in ts)
    assert direct < 1e-7


def test_perturb_noop_when_immersed():
    F = DiscFamily.from_function(lambda t: [[0, 0], [1, t]], np.linspace(0, 1, 5))
    G = perturb_to_immersion(F)
    assert G is F and G.meta["perturb_attempts"] == 0


def test_perturb_fixes_constant_member():
    ts = np.linspace(0, 1, 21)
    F = DiscFamily.from_function(lambda t: [[t, 0], [abs(t - 0.5), 0]], ts)
    assert not F.at(0.5).is_immersed()
    G = perturb_to_immersion(F, bound=1e-2, rng=1)
    assert all(d.min_speed() > 1e-6 for d in G.discs)
    assert np.max(np.abs(G.centers() - F.centers())) <= 1e-14
    assert G.meta["perturb_size"] < 1e-2
