import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dischull.contprin import HartogsCore, cauchy_extend, lift_disc_check
from dischull.discs import DiscFamily, linear_disc, small_embedded_disc
from dischull.domains import hartogs, shell
from dischull.errors import ContractError


def test_identity_reproduced():
    ext = cauchy_extend(lambda t, z: z, 0.4, 0.3 + 0.2j)
    assert abs(ext.value - (0.3 + 0.2j)) < 1e-14
    assert ext.valid


def test_simple_pole_outside_matches_closed_form():
    ext = cauchy_extend(lambda t, z: 1 / (z - 2), 0.7, 0.3)
    assert abs(ext.value - 1 / (0.3 - 2)) < 1e-10


def test_hidden_pole_flagged():
    c = 0.5 * np.exp(0.7j)
    ext = cauchy_extend(lambda t, z: 1 / (z - c), 0.5, 0.1)
    assert not ext.valid and ext.residual > 1e-3
    with pytest.raises(ContractError):
        cauchy_extend(lambda t, z: 1 / (z - c), 0.5, 0.1, strict=True)


def test_rejects_boundary_point():
    with pytest.raises(ValueError):
        cauchy_extend(lambda t, z: z, 0.5, 1.0)


@pytest.mark.parametrize("g", [
    lambda t, z: 1 / (z - 2) + 0 * t,
    lambda t, z: (1 + t) * z * (z + t),
    lambda t, z: np.exp(z + t),
])
def test_fixtures_on_interior_grid(g):
    ts, zs = HartogsCore.grid(20, 20)
    for t in ts:
        ext = cauchy_extend(g, t, zs)
        assert np.max(np.abs(ext.value - g(t, zs))) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1), st.floats(0, 0.9))
def test_linearity(a, b, t, r):
    f = lambda t, z: np.exp(z) * (1 + t)
    h = lambda t, z: 1 / (z - 3) + t * z ** 3
    z = r * np.exp(0.3j)
    lhs = cauchy_extend(lambda t, z: a * f(t, z) + b * h(t, z), t, z).value
    rhs = a * cauchy_extend(f, t, z).value + b * cauchy_extend(h, t, z).value
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1), min_size=1, max_size=40), st.floats(0, 0.95))
def test_polynomial_exactness(coeffs, r):
    g = lambda t, z: np.polyval(coeffs, z)
    z = r * np.exp(1.1j)
    assert abs(cauchy_extend(g, 0.5, z).value - g(0.5, z)) < 1e-13 * (1 + sum(abs(c) for c in coeffs))


def test_top_circle_agreement():
    g = lambda t, z: np.exp(t * z)
    z = 0.999 * np.exp(2j * np.pi * np.arange(16) / 16)
    ext = cauchy_extend(g, 1.0, z)
    assert np.max(np.abs(ext.value - g(1.0, z))) < 1e-10


def test_core_predicates_nested():
    rng = np.random.default_rng(3)
    t = rng.uniform(-0.1, 1.1, 2000)
    z = rng.uniform(0, 1.1, 2000) * np.exp(2j * np.pi * rng.uniform(size=2000))
    z[:300] = np.exp(1j * rng.uniform(size=300) * 6)
    t[300:400] = 0.0
    c0, c, full = HartogsCore.in_core0(t, z), HartogsCore.in_core(t, z), HartogsCore.in_full(t, z)
    assert np.all(c0 <= c) and np.all(c <= full)
    # the full cylinder is the convex hull of bottom disc and side: segments from
    # a bottom point to a side point stay in it
    assert HartogsCore.in_full(0.5, 0.5 * 0.3 + 0.5 * 1.0)


def test_lift_trivial_in_shell():
    G = shell(0.9, 1.1)
    d = small_embedded_disc([1, 0], [0, 1], 0.02)
    H = DiscFamily(np.linspace(0, 1, 5), [d] * 5)
    rep = lift_disc_check(d, H, [lambda w: w[..., 0], lambda w: w[..., 1]], G)
    assert max(rep.restriction_error) < 1e-10
    assert rep.overlap_residual == 0.0


def _hartogs_family(n=41):
    # grow a tiny flat disc to (0.9 z, 0), then lift it to (0.9 z, 0.5)
    ts = np.linspace(0, 1, n)

    def member(t):
        s = min(2 * t, 1.0)
        h = max(2 * t - 1, 0.0)
        return linear_disc([0, 0.5 * h], [0.01 + 0.89 * s, 0])

    return DiscFamily(ts, [member(t) for t in ts])


def test_lift_through_hartogs_figure():
    G = hartogs(0.25)
    H = _hartogs_family()
    d = H.discs[-1]
    # the final disc leaves G in its interior
    assert not np.all(G.contains(d(np.array([0.3]))))
    f = lambda w: 1 / (w[..., 1] - 2)
    rep = lift_disc_check(d, H, [f], G)
    assert rep.restriction_error[0] < 1e-8
    assert np.allclose(rep.values[0], 1 / (0.5 - 2), atol=1e-8)
    assert rep.overlap_pairs == 0


def test_lift_rejects_member_outside():
    G = shell(0.9, 1.1)
    bad = DiscFamily([0.0, 1.0], [small_embedded_disc([1, 0], [0, 1], 0.02), linear_disc([0, 0], [0.5, 0])])
    with pytest.raises(ContractError) as exc:
        lift_disc_check(bad.discs[-1], bad, [lambda w: w[..., 0]], G)
    assert exc.value.report["t"] == 1.0
