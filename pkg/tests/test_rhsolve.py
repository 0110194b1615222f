from math import factorial

import numpy as np
import pytest

from dischull.discs import AnalyticDisc, linear_disc
from dischull.domains import shell
from dischull.errors import ContractError
from dischull.rhsolve import (
    Arc, HartogsCoreData, bump_profile, extract_g_disc, holo_coeff_ext, outer_function,
    solution_disc, solve_rh, taylor_coeffs, truncate_damp,
)


def band_limited_rho(rng, n_grid=16384, max_modes=64):
    """Random positive trig polynomial with min 0.1, on a grid and as a function."""
    m = int(rng.integers(1, max_modes + 1))
    a, b = rng.normal(size=m), rng.normal(size=m)
    k = np.arange(1, m + 1)
    spec = np.zeros(n_grid // 2 + 1, dtype=complex)
    spec[1: m + 1] = (a - 1j * b) * n_grid / 2
    grid = np.fft.irfft(spec, n_grid)
    lo, hi = grid.min(), grid.max()

    def f(th):
        th = np.asarray(th)
        p = np.cos(np.outer(th, k)) @ a + np.sin(np.outer(th, k)) @ b
        return 0.1 + 0.9 * (p - lo) / (hi - lo)

    return 0.1 + 0.9 * (grid - lo) / (hi - lo), f


# outer functions -----------------------------------------------------------------

def test_outer_constant():
    g = outer_function(np.ones(64))
    assert np.allclose(g(np.array([0, 0.5, 0.9j])), 1.0)


def test_outer_exponential():
    g = outer_function(lambda th: np.exp(np.cos(th)))
    assert max(abs(g.coeffs[k] - 1 / factorial(k)) for k in range(21)) < 1e-10
    assert g.g0 == pytest.approx(1.0)


def test_outer_linear_factor():
    g = outer_function(lambda th: np.abs(2 - np.exp(1j * th)))
    z = 0.7 * np.exp(2j * np.pi * np.arange(16) / 16)
    assert np.max(np.abs(g(z) - (2 - z))) < 1e-9
    th = np.linspace(0, 2 * np.pi, 333)
    assert np.max(np.abs(np.abs(g(np.exp(1j * th))) - np.abs(2 - np.exp(1j * th)))) < 1e-9


def test_outer_random_band_limited():
    rng = np.random.default_rng(11)
    for _ in range(20):
        grid, f = band_limited_rho(rng)
        g = outer_function(grid)
        th = rng.uniform(0, 2 * np.pi, 200)
        assert np.max(np.abs(np.abs(g(np.exp(1j * th))) - f(th))) < 1e-8
        assert g.min_modulus() > 0
        assert g.g0 > 0


def test_outer_rejects_nonpositive():
    with pytest.raises(ContractError):
        outer_function(np.array([1.0, 0.0, 1.0, 1.0]))


# fiber analysis -------------------------------------------------------------------

def _core(fiber, n_b=128, central=None):
    central = central or linear_disc([0, 0], [1, 0])
    return HartogsCoreData.from_function(central, fiber, n_b=n_b)


def test_taylor_monomial():
    v = np.array([0.3, -0.2j])
    data = _core(lambda zeta, w: np.stack([zeta, 0 * zeta], -1) + v * (w ** 2)[..., None])
    td = taylor_coeffs(data, 8)
    assert np.allclose(td.coeffs[:, 2], v, atol=1e-13)
    others = np.delete(td.coeffs, [0, 2], axis=1)
    assert np.max(np.abs(others)) < 1e-13
    assert np.allclose(td.coeffs[:, 0, 0], data.zeta, atol=1e-13)


def test_taylor_geometric():
    data = _core(lambda zeta, w: np.stack([zeta / (1 - w / 2), 0 * w], -1))
    td = taylor_coeffs(data, 12)
    for k in range(13):
        assert np.max(np.abs(td.coeffs[:, k, 0] - data.zeta * 2.0 ** -k)) < 1e-10
    assert td.residual < 1e-10


def test_taylor_round_trip_32():
    data = _core(lambda zeta, w: np.stack([zeta + 0.1 * np.sin(w) * zeta, 0.2 * w * np.exp(w * zeta) / 3], -1))
    assert taylor_coeffs(data, 32).residual < 1e-10


def test_truncate_damp_bound_and_monotone():
    data = _core(lambda zeta, w: np.stack([zeta + 0.1 * w ** 3, 0.05 * w + 0.02 * w ** 2 * zeta], -1))
    td = taylor_coeffs(data, 6)
    r = 0.95
    dd = truncate_damp(td.coeffs, r, 6, data=data)
    norms = np.linalg.norm(td.coeffs, axis=-1)
    bound = np.max(np.sum(norms * (1 - r ** np.arange(7)), axis=1))
    assert dd.error <= bound + 1e-12
    errs = [truncate_damp(td.coeffs, r, n, data=data).error for n in (2, 4, 8, 16)]
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
    # N = 0 keeps only the centers
    d0 = truncate_damp(td.coeffs, r, 0, data=data)
    assert np.allclose(d0.coeffs[:, 0], td.coeffs[:, 0])


def test_holo_ext_exact_polynomial():
    zeta = np.exp(1j * np.linspace(0, np.pi, 200))
    vals = 1 + 2 * zeta - 0.5j * zeta ** 3
    assert holo_coeff_ext(vals, zeta, 3).error < 1e-12


def test_holo_ext_conjugate_on_half_circle():
    zeta = np.exp(1j * np.linspace(0, np.pi, 400))
    errs = [holo_coeff_ext(np.conj(zeta), zeta, d).error for d in (8, 16, 32)]
    assert errs[0] > errs[1] > errs[2]
    # holdout: fit on even samples, test on odd ones
    fit = holo_coeff_ext(np.conj(zeta[::2]), zeta[::2], 16)
    hold = np.max(np.abs(fit(zeta[1::2]) - np.conj(zeta[1::2])))
    assert hold < 3 * fit.error


def test_bump_profile_shape():
    gam = Arc(-0.5, 0.5)
    gopen = gam.inner(0.5)
    th = np.array([0.0, 0.2, 0.4, 1.0, np.pi])
    b = bump_profile(gam, gopen, th)
    assert b[0] == 1 and b[1] == 1 and 0 < b[2] < 1 and b[3] == 0 and b[4] == 0


# the solver --------------------------------------------------------------------------

def _constant_fiber_core(p, v, n_b=256):
    central = AnalyticDisc([p])
    return HartogsCoreData.from_function(central, lambda zeta, w: p + v * w[..., None], n_b=n_b)


def test_solver_constant_fibers_closed_form():
    p, v = np.array([0.2, 0.1]), np.array([0.0, 0.3])
    data = _constant_fiber_core(p, v)
    gam = Arc(-1.0, 1.0)
    gop = gam.inner(0.6)
    K = np.array([0.0, 0.3, 1.0])
    sol = solve_rh(data, gam, gop, K, eps=0.05)
    zeta = 0.6 * np.exp(1j * np.linspace(0, 6, 7))
    z = np.exp(1j * np.linspace(0, 6, 7))
    # H(zeta, z) = p + g(zeta) r v z exactly for linear fibers
    expect = p + (sol.outer(zeta) * 0.95 * z)[:, None] * v
    assert np.max(np.abs(sol(zeta, z) - expect)) < 1e-10
    margin3 = np.linalg.norm(v) * 0.95 * np.max(np.abs(sol.outer(K)))
    assert sol.contract["clause3"]["error"] == pytest.approx(margin3, rel=1e-6)
    assert sol.contract["pass"]


def test_solver_identity_squeeze_reduces_to_fit_error():
    data = _core(lambda zeta, w: np.stack([zeta, 0.05 * w], -1), n_b=128)
    gam = Arc(-0.3, 0.3)
    sol = solve_rh(data, gam, gam.inner(0.5), np.zeros(0), eps=0.05, rho_min=1.0)
    assert np.allclose(sol.outer(data.zeta), 1.0)
    assert sol.contract["clause1"]["error"] < 1e-12
    # only damping contributes: |0.05 (1 - 0.95)|
    assert sol.contract["clause2"]["error"] == pytest.approx(0.05 * 0.05, rel=1e-6)


def test_solver_rejects_bad_K():
    data = _constant_fiber_core(np.zeros(2), np.array([0, 0.1]))
    gam = Arc(-0.5, 0.5)
    with pytest.raises(ContractError):
        solve_rh(data, gam, gam.inner(0.5), np.array([-1.0 + 0j]))


def test_winding_independent_of_truncation():
    p, v = np.array([1.0, 0.0]), np.array([0.0, 0.05])
    data = _constant_fiber_core(p, v)
    gam = Arc(-0.8, 0.8)
    windings = set()
    for N, deg in ((4, 8), (12, 16), (24, 24)):
        sol = solve_rh(data, gam, gam.inner(0.5), np.array([0.0]), N=N, fit_degree=deg, eps=0.05)
        zeta = np.exp(2j * np.pi * np.arange(2048) / 2048)
        loop = sol(zeta, np.ones_like(zeta))[:, 1]
        windings.add(int(np.round(np.sum(np.diff(np.unwrap(np.angle(np.append(loop, loop[0]))))) / (2 * np.pi))))
        assert sol.outer(0) > 0
    assert windings == {0}


def test_extract_shell_fixture():
    G = shell(0.9, 1.1)
    central = linear_disc([0, 0], [1, 0])
    r = 0.08
    data = HartogsCoreData.from_function(central, lambda zeta, w: np.stack([zeta, r * w], -1))
    gam = Arc(-0.5, 0.5)
    sol = solve_rh(data, gam, gam.inner(0.5), np.array([0.0]), eps=0.05)
    ex = extract_g_disc(sol, 1.0, G)
    assert ex.report["g_disc"]["boundary_in_G"] and ex.disc.is_immersed()
    # r = 0 member is the central disc
    assert np.allclose(ex.homotopy.discs[0].padded(1), central.padded(1))
    # through-point: the disc passes within eps of Phi_D(0) = 0
    near = np.min(np.linalg.norm(ex.disc(np.array([0.0, 0.01, -0.01j])), axis=-1))
    assert near < 0.05
    # closed form: f(zeta) = (zeta, r 0.95 g(zeta))
    zeta = 0.5 * np.exp(1j * np.arange(5))
    assert np.max(np.abs(solution_disc(sol, 1.0)(zeta)[:, 1] - r * 0.95 * sol.outer(zeta))) < 1e-8
