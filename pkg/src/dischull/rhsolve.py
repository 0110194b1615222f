"""Approximate Riemann-Hilbert problems for disc families over the unit circle.

Input is a Hartogs core: a central disc ``Phi_D`` on the closed unit disc
and, over every boundary point ``zeta``, a fiber disc ``J_D(zeta, .)``
centred at ``Phi_D(zeta)``.  The solver builds a map ``H(zeta, z)``,
holomorphic in both variables, such that

1. ``H(zeta, 0) = Phi_D(zeta)``;
2. on the torus ``|zeta| = |z| = 1`` the values stay near the fibers'
   boundary circles off an arc ``Gamma`` and near the whole fibers on it;
3. for ``zeta`` in a compact ``K`` touching the circle only inside the
   open arc, the whole fiber ``H(zeta, .)`` is squeezed to ``Phi_D(zeta)``.

``H`` is the composition of a bivariate polynomial fit ``h`` of the damped
fiber data with the squeezing map ``(zeta, z) -> (zeta, g(zeta) z)``, where
``g`` is an outer function whose modulus is tiny on the open arc.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .discs import AnalyticDisc, DiscFamily, is_g_disc, perturb_to_immersion
from .errors import ContractError

log = logging.getLogger(__name__)

N_FFT = 1024
R_DAMP = 0.95
N_TRUNC = 24
FIT_DEGREE = 24
RHO_MIN = 1e-2
TOL_CENTER = 1e-9


# arcs ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    """Closed arc of the unit circle from angle ``start`` counterclockwise to ``end``."""

    start: float
    end: float

    def __post_init__(self):
        if not 0 < self.length <= 2 * np.pi:
            raise ValueError("arc must have positive length")

    @property
    def length(self) -> float:
        L = (self.end - self.start) % (2 * np.pi)
        return 2 * np.pi if L == 0 and self.end != self.start else L

    def position(self, theta) -> np.ndarray:
        """Fractional position along the arc, values outside ``[0, 1]`` are off the arc."""
        theta = np.asarray(theta, dtype=float)
        return ((theta - self.start) % (2 * np.pi)) / self.length

    def contains(self, theta, tol: float = 1e-12) -> np.ndarray:
        return self.position(theta) <= 1 + tol / self.length

    def contains_point(self, zeta, tol: float = 1e-12) -> np.ndarray:
        return self.contains(np.angle(np.asarray(zeta)), tol)

    def shrink(self, delta: float) -> "Arc":
        """Concentric arc with ``delta`` removed at both ends."""
        if 2 * delta >= self.length:
            raise ContractError("arc exhausted", {"length": self.length, "delta": delta}, stage="arc")
        return Arc(self.start + delta, self.end - delta)

    def inner(self, fraction: float = 0.5) -> "Arc":
        """Concentric sub-arc keeping ``fraction`` of the length."""
        return self.shrink(0.5 * (1 - fraction) * self.length)

    def midpoint(self) -> float:
        return self.start + 0.5 * self.length

    def to_json(self) -> list:
        return [self.start, self.end]


def _smoothstep(x):
    """C-infinity transition from 0 (x <= 0) to 1 (x >= 1)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1 - x, 1)), 0.0)
    return a / (a + b)


def bump_profile(gamma: Arc, gamma_open: Arc, theta) -> np.ndarray:
    """Smooth bump: 1 on the open arc, 0 off ``gamma``, C-infinity in between."""
    theta = np.asarray(theta, dtype=float)
    pos = gamma.position(theta) * gamma.length          # arclength from gamma.start
    lo = (gamma_open.start - gamma.start) % (2 * np.pi)
    hi = lo + gamma_open.length
    up = _smoothstep(pos / lo) if lo > 0 else np.ones_like(pos)
    tail = gamma.length - hi
    down = _smoothstep((gamma.length - pos) / tail) if tail > 0 else np.ones_like(pos)
    on = pos <= gamma.length
    return np.where(on, np.minimum(up, down), 0.0)


# outer functions ------------------------------------------------------------------

@dataclass
class OuterFunction:
    """Zero-free ``g = exp(h)`` on the disc with ``|g| = rho`` on the circle.

    ``log_coeffs`` are the Taylor coefficients of ``h``; ``coeffs`` those of
    ``g`` itself.
    """

    rho: np.ndarray
    log_coeffs: np.ndarray
    coeffs: np.ndarray
    tail: float = 0.0

    @property
    def g0(self) -> float:
        return float(np.exp(self.log_coeffs[0].real))

    def log(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        m = len(self.log_coeffs)
        out = np.empty(flat.shape, dtype=complex)
        step = max(1, (1 << 21) // max(m, 1))
        for i in range(0, len(flat), step):
            z = flat[i: i + step]
            pw = np.empty((len(z), m), dtype=complex)
            pw[:, 0] = 1.0
            if m > 1:
                pw[:, 1:] = z[:, None]
                np.cumprod(pw[:, 1:], axis=1, out=pw[:, 1:])
            out[i: i + step] = pw @ self.log_coeffs
        return out.reshape(zeta.shape)

    def __call__(self, zeta) -> np.ndarray:
        return np.exp(self.log(zeta))

    def boundary_residual(self, n: int | None = None) -> float:
        n = len(self.rho) if n is None else n
        th = 2 * np.pi * np.arange(n) / n
        rho = self.rho if n == len(self.rho) else np.interp(th, 2 * np.pi * np.arange(len(self.rho)) / len(self.rho), self.rho, period=2 * np.pi)
        return float(np.max(np.abs(np.abs(self(np.exp(1j * th))) - rho)))

    def min_modulus(self, n: int = 64) -> float:
        r = np.linspace(0, 1, n)
        th = 2 * np.pi * np.arange(n) / n
        return float(np.min(np.abs(self(r[:, None] * np.exp(1j * th)[None]))))

    def to_json(self) -> dict:
        c = self.coeffs
        return {"coeffs": [c.real.tolist(), c.imag.tolist()], "g0": self.g0}


def outer_function(rho, n_fft: int = N_FFT, tail_tol: float = 1e-13, max_fft: int = 1 << 15) -> OuterFunction:
    """Outer function with boundary modulus ``rho``.

    Parameters
    ----------
    rho : array_like or callable
        Samples on ``n`` equispaced angles ``2 pi j / n``, or a function of
        the angle.  A function is sampled at ``n_fft`` points, doubled until
        the Fourier tail of ``log rho`` drops below ``tail_tol``.

    Notes
    -----
    With ``log rho = sum_k c_k e^{ik theta}`` the harmonic extension plus
    ``i`` times its conjugate function (Fourier multiplier ``-i sgn k``) is
    ``h = c_0 + 2 sum_{k>0} c_k zeta^k``.  Then ``g(0) = exp(c_0) > 0``.
    """
    fn = rho if callable(rho) else None
    n = n_fft if fn is not None else len(rho)
    while True:
        vals = np.asarray(fn(2 * np.pi * np.arange(n) / n), dtype=float) if fn is not None \
            else np.asarray(rho, dtype=float)
        if np.min(vals) <= 0:
            raise ContractError("boundary modulus must be positive", {"min_rho": float(np.min(vals))},
                                stage="outer_function")
        c = np.fft.fft(np.log(vals)) / n
        tail = float(np.max(np.abs(c[n // 4: 3 * n // 4 + 1])))
        if fn is None or tail < tail_tol or n >= max_fft:
            break
        n *= 2
    h = np.zeros(n // 2, dtype=complex)
    h[0] = c[0].real
    h[1:] = 2 * c[1: n // 2]
    # values of h on the circle, then Taylor coefficients of exp(h), both by FFT
    hv = np.fft.ifft(np.concatenate([h, np.zeros(n - n // 2)])) * n
    gc = np.fft.fft(np.exp(hv)) / n
    keep = np.nonzero(np.abs(h) > 1e-15 * (1.0 + np.abs(h).max()))[0]
    m = int(keep[-1]) + 1 if len(keep) else 1
    gk = np.nonzero(np.abs(gc[: n // 2]) > 1e-18 * np.abs(gc).max())[0]
    out = OuterFunction(vals, h[:m], gc[: int(gk[-1]) + 1 if len(gk) else 1])
    out.tail = tail
    return out


# Hartogs core data ---------------------------------------------------------------

class HartogsCoreData:
    """Central disc plus fiber discs sampled over ``n_b`` boundary points.

    Parameters
    ----------
    central : AnalyticDisc
        ``Phi_D``; its boundary values are the fiber centers.
    fiber_fn : callable
        ``fiber_fn(zeta, w)`` with ``zeta`` of shape ``(n,)`` and ``w`` of shape
        ``(n, m)`` returns ``(n, m, 2)`` fiber values ``J_D(zeta_i, w_ij)``.
    n_b : int
        Number of boundary samples.
    """

    def __init__(self, central: AnalyticDisc, fiber_fn: Callable, n_b: int = 256,
                 tol_center: float = TOL_CENTER):
        self.central = central
        self.fiber_fn = fiber_fn
        self.n_b = n_b
        self.theta = 2 * np.pi * np.arange(n_b) / n_b
        self.zeta = np.exp(1j * self.theta)
        centers = self.J(np.zeros((n_b, 1)))[:, 0]
        err = float(np.max(np.abs(centers - central(self.zeta))))
        if err > tol_center:
            raise ContractError("fiber centers do not match the central disc",
                                {"error": err, "tol": tol_center}, stage="HartogsCoreData")

    def J(self, w, zeta=None) -> np.ndarray:
        zeta = self.zeta if zeta is None else np.asarray(zeta, dtype=complex)
        w = np.asarray(w, dtype=complex).reshape(len(zeta), -1)
        return np.asarray(self.fiber_fn(zeta, w), dtype=complex)

    @classmethod
    def from_discs(cls, central: AnalyticDisc, fibers: Sequence[AnalyticDisc], **kw) -> "HartogsCoreData":
        """Fibers given as one disc per equispaced boundary sample."""
        deg = max(f.degree for f in fibers)
        C = np.stack([f.padded(deg) for f in fibers])          # (n_b, deg+1, 2)

        def fiber_fn(zeta, w):
            out = np.zeros(w.shape + (2,), dtype=complex)
            for k in range(deg, -1, -1):
                out = out * w[..., None] + C[:, None, k, :]
            return out

        return cls(central, fiber_fn, n_b=len(fibers), **kw)

    @classmethod
    def from_function(cls, central: AnalyticDisc, fiber: Callable, n_b: int = 256, **kw) -> "HartogsCoreData":
        """``fiber(zeta, w)`` broadcasting over arrays of matching shape."""
        def fiber_fn(zeta, w):
            return np.asarray(fiber(zeta[:, None] * np.ones_like(w), w), dtype=complex)

        return cls(central, fiber_fn, n_b=n_b, **kw)

    def kernel_points(self, n_z: int = 32):
        """Samples of the torus and of the side ``circle x closed disc``."""
        return np.exp(2j * np.pi * np.arange(n_z) / n_z)


# Taylor analysis, damping, coefficient extension ------------------------------------

@dataclass
class TaylorData:
    coeffs: np.ndarray        # (n_b, k_max+1, 2)
    residual: float


def taylor_coeffs(data: HartogsCoreData, k_max: int, n_z: int | None = None, tol: float = 1e-8,
                  strict: bool = False) -> TaylorData:
    """Fiber Taylor coefficients ``a_k(zeta)`` by DFT on the unit circle.

    The residual compares the reconstructed series with the fibers at
    half-shifted nodes.
    """
    n = max(2 * k_max + 2, 64) if n_z is None else n_z
    if n < 2 * k_max:
        raise ValueError("need at least 2 k_max samples per fiber")
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = data.J(np.broadcast_to(w, (data.n_b, n)))
    c = np.fft.fft(vals, axis=1) / n
    a = c[:, : k_max + 1]
    ws = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    truth = data.J(np.broadcast_to(ws, (data.n_b, n)))
    # all n modes: a large residual means the sampling itself is too coarse
    rec = np.einsum("nkc,mk->nmc", c, ws[:, None] ** np.arange(n)[None])
    res = float(np.max(np.abs(rec - truth)))
    if strict and res > tol:
        raise ContractError("fiber under-resolved", {"residual": res, "tol": tol}, stage="taylor_coeffs")
    return TaylorData(a, res)


@dataclass
class DampedData:
    coeffs: np.ndarray        # (n_b, N+1, 2), already multiplied by r^k
    r: float
    N: int
    error: float              # sup over the unmasked boundary samples x closed disc

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        k = np.arange(self.N + 1)
        return np.einsum("nkc,nmk->nmc", self.coeffs, w[..., None] ** k)


def truncate_damp(coeffs: np.ndarray, r: float = R_DAMP, N: int = N_TRUNC, data: HartogsCoreData | None = None,
                  mask: np.ndarray | None = None, n_z: int = 64) -> DampedData:
    """``sum_{k<=N} a_k(zeta) r^k z^k`` with its sup error against the fibers.

    The error is measured on ``|z| = 1`` (which bounds the closed disc by the
    maximum principle) over the boundary samples selected by ``mask``.  The
    comparison uses ``data`` when given, otherwise the undamped full series.
    """
    if not 0 < r < 1:
        raise ValueError("damping factor must lie in (0, 1)")
    a = np.asarray(coeffs)
    N = min(N, a.shape[1] - 1)
    k = np.arange(N + 1)
    damped = a[:, : N + 1] * (r ** k)[None, :, None]
    w = np.exp(2j * np.pi * np.arange(n_z) / n_z)
    W = np.broadcast_to(w, (a.shape[0], n_z))
    approx = np.einsum("nkc,mk->nmc", damped, w[:, None] ** k[None])
    if data is not None:
        truth = data.J(W)
    else:
        kk = np.arange(a.shape[1])
        truth = np.einsum("nkc,mk->nmc", a, w[:, None] ** kk[None])
    diff = np.max(np.abs(approx - truth), axis=(1, 2))
    if mask is not None:
        diff = diff[np.asarray(mask, bool)]
    return DampedData(damped, r, N, float(diff.max()) if len(diff) else 0.0)


@dataclass
class PolyFit:
    """Polynomial in ``zeta`` per leading index; ``coeffs[j]`` multiplies ``zeta**j``."""

    coeffs: np.ndarray
    error: float

    def __call__(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(zeta.shape + self.coeffs.shape[1:], dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * zeta.reshape(zeta.shape + (1,) * (self.coeffs.ndim - 1)) + c
        return out


def holo_coeff_ext(values: np.ndarray, zeta: np.ndarray, degree: int = FIT_DEGREE) -> PolyFit:
    """Least-squares polynomial in ``zeta`` matching ``values`` at the samples.

    ``values`` has shape ``(n,) + tail``; every trailing component is fitted
    independently.  The arc must have connected complement, which holds for
    any proper arc, so uniform polynomial approximation is possible.
    """
    zeta = np.asarray(zeta, dtype=complex)
    v = np.asarray(values, dtype=complex)
    tail = v.shape[1:]
    V = zeta[:, None] ** np.arange(degree + 1)[None]
    # column scaling keeps the monomial system usable on short arcs
    sol, *_ = np.linalg.lstsq(V, v.reshape(len(zeta), -1), rcond=1e-13)
    c = sol.reshape((degree + 1,) + tail)
    fit = np.einsum("nj,j...->n...", V, c)
    return PolyFit(c, float(np.max(np.abs(fit - v))) if len(v) else 0.0)


# the solver --------------------------------------------------------------------------

@dataclass
class RHSolution:
    """``H(zeta, z) = Phi_D(zeta) + sum_{k>=1} P_k(zeta) (g(zeta) z)^k``."""

    central: AnalyticDisc
    fits: PolyFit             # coeffs shape (deg+1, N, 2) for k = 1..N (damping included)
    outer: OuterFunction
    gamma: Arc
    gamma_open: Arc
    rho_min: float
    r: float
    N: int
    contract: dict = field(default_factory=dict)

    def h(self, zeta, w) -> np.ndarray:
        """The polynomial part before squeezing."""
        zeta = np.asarray(zeta, dtype=complex)
        w = np.asarray(w, dtype=complex)
        zeta, w = np.broadcast_arrays(zeta, w)
        P = self.fits(zeta)                      # shape zeta.shape + (N, 2)
        k = np.arange(1, self.N + 1)
        return self.central(zeta) + np.einsum("...kc,...k->...c", P, w[..., None] ** k)

    def __call__(self, zeta, z) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        return self.h(zeta, self.outer(zeta) * np.asarray(z, dtype=complex))

    def fiber_disc(self, zeta: complex, degree: int = 32) -> AnalyticDisc:
        """``z -> H(zeta, z)`` as a disc (a polynomial of degree ``N``)."""
        g = complex(self.outer(zeta))
        P = self.fits(np.asarray(zeta))
        c = np.zeros((self.N + 1, 2), dtype=complex)
        c[0] = self.central(zeta)
        c[1:] = P * (g ** np.arange(1, self.N + 1))[:, None]
        return AnalyticDisc(c, 1e6)

    def to_json(self) -> dict:
        c = self.fits.coeffs
        return {"central": self.central.to_json(),
                "h_coeffs": {"re": c.real.tolist(), "im": c.imag.tolist()},
                "g": self.outer.to_json(), "gamma": self.gamma.to_json(),
                "gamma_open": self.gamma_open.to_json(), "rho_min": self.rho_min,
                "r": self.r, "N": self.N, "contract": self.contract}


def _profile(gamma: Arc, gamma_open: Arc, rho_min: float, n_fft: int) -> np.ndarray:
    th = 2 * np.pi * np.arange(n_fft) / n_fft
    return np.exp(np.log(rho_min) * bump_profile(gamma, gamma_open, th))


def check_contract(sol: RHSolution, data: HartogsCoreData, K: np.ndarray, eps: float, n_z: int = 32) -> dict:
    """Evaluate the three contract clauses on samples and return a report."""
    zeta = data.zeta
    z = np.exp(2j * np.pi * np.arange(n_z) / n_z)
    # (1) centers
    c1 = float(np.max(np.linalg.norm(sol(zeta, 0 * zeta) - sol.central(zeta), axis=-1)))
    # (2) torus values near J_D(circle x circle) off the arc, near J_D(arc x disc) on it
    g = sol.outer(zeta)
    Z = z[None, :]
    vals = sol(zeta[:, None], Z)
    w = g[:, None] * Z
    on_arc = sol.gamma.contains_point(zeta)
    w_star = np.where(on_arc[:, None], w, w / np.abs(w))
    ref = data.J(w_star)
    d2 = np.linalg.norm(vals - ref, axis=-1)
    worst2 = np.unravel_index(np.argmax(d2), d2.shape)
    c2 = float(d2.max())
    # (3) whole fibers over K collapse to the center
    K = np.asarray(K, dtype=complex).ravel()
    if len(K):
        vK = sol(K[:, None], Z)
        d3 = np.max(np.linalg.norm(vK - sol.central(K)[:, None, :], axis=-1), axis=1)
        worst3 = int(np.argmax(d3))
        c3 = float(d3.max())
    else:
        worst3, c3 = -1, 0.0
    return {
        "eps": eps,
        "clause1": {"error": c1, "pass": c1 <= 1e-9},
        "clause2": {"error": c2, "pass": c2 <= eps,
                    "worst": {"zeta_angle": float(np.angle(zeta[worst2[0]])), "z_angle": float(np.angle(z[worst2[1]]))}},
        "clause3": {"error": c3, "pass": c3 <= eps,
                    "worst": None if worst3 < 0 else [float(K[worst3].real), float(K[worst3].imag)]},
    }


def solve_rh(data: HartogsCoreData, gamma: Arc, gamma_open: Arc, K, eps: float = 0.05,
             r: float = R_DAMP, N: int = N_TRUNC, fit_degree: int = FIT_DEGREE, n_fft: int = N_FFT,
             rho_min: float = RHO_MIN, rho_floor: float = 1e-60, factor: float = 1e-2,
             strict: bool = True) -> RHSolution:
    """Approximate solution with the three contract clauses checked.

    The coefficients ``a_k``, ``k >= 1``, are damped by ``r^k``, truncated at
    ``N`` and fitted by polynomials of degree ``fit_degree`` on the samples
    off the open arc.  ``a_0`` is ``Phi_D`` itself and is never refitted.  The
    squeezing depth ``rho_min`` starts at its default and is multiplied by
    ``factor`` until clause 3 holds (or ``rho_floor`` is reached).

    Raises
    ------
    ContractError
        Naming the first failing clause and its worst sample (``strict``).
    """
    K = np.asarray(K, dtype=complex).ravel()
    if len(K):
        on_circle = np.abs(np.abs(K) - 1) < 1e-12
        if np.any(np.abs(K) > 1 + 1e-12) or not np.all(gamma_open.contains_point(K[on_circle])):
            raise ContractError("K must lie in the open disc union the open arc", {}, stage="solve_rh")
    td = taylor_coeffs(data, N)
    mask = ~gamma_open.contains_point(data.zeta)
    damped = truncate_damp(td.coeffs, r, N, data=data, mask=mask)
    vals = damped.coeffs[mask, 1:, :]                 # k = 1..N
    fits = holo_coeff_ext(vals, data.zeta[mask], fit_degree)
    rm = rho_min
    while True:
        outer = outer_function(_profile(gamma, gamma_open, rm, n_fft))
        sol = RHSolution(data.central, fits, outer, gamma, gamma_open, rm, r, damped.N)
        rep = check_contract(sol, data, K, eps)
        if rep["clause3"]["pass"] and rep["clause2"]["pass"] or rm * factor < rho_floor:
            break
        rm *= factor
    rep["damping_error"] = damped.error
    rep["fit_error"] = fits.error
    rep["taylor_residual"] = td.residual
    rep["rho_min"] = rm
    rep["g_boundary_residual"] = outer.boundary_residual()
    rep["pass"] = all(rep[f"clause{i}"]["pass"] for i in (1, 2, 3))
    sol.contract = rep
    if strict and not rep["pass"]:
        bad = next(f"clause{i}" for i in (1, 2, 3) if not rep[f"clause{i}"]["pass"])
        raise ContractError(f"Riemann-Hilbert contract {bad} failed", rep, stage="solve_rh")
    return sol


# extraction of G-discs --------------------------------------------------------------

@dataclass
class Extraction:
    disc: AnalyticDisc
    homotopy: DiscFamily
    report: dict


def solution_disc(sol: RHSolution, z: complex, n: int = 512, degree: int = 200) -> AnalyticDisc:
    """``zeta -> H(zeta, z)`` expanded on the unit circle."""
    zeta = np.exp(2j * np.pi * np.arange(n) / n)
    vals = sol(zeta, np.full(n, z))
    c = np.fft.fft(vals, axis=0) / n
    return AnalyticDisc(c[: degree + 1], 1.0 + 1e-6)


def extract_g_disc(sol: RHSolution, z: complex, G, n_homotopy: int = 11, kappa_margin: float | None = None,
                   rng=0, strict: bool = True) -> Extraction:
    """The disc ``f^z(zeta) = H(zeta, z)`` and the homotopy ``f^{sz}``, ``s`` in ``[0, 1]``.

    ``f^0`` is the central disc by clause 1.  The disc is perturbed to an
    immersion if needed and must have its boundary in ``G``.
    """
    if abs(abs(z) - 1) > 1e-12:
        raise ValueError("fiber point must lie on the unit circle")
    ss = np.linspace(0.0, 1.0, n_homotopy)
    fam = [sol.central] + [solution_disc(sol, s * z) for s in ss[1:]]
    deg = max(d.degree for d in fam)
    fam = [AnalyticDisc(d.padded(deg), 1.0 + 1e-6) for d in fam]
    H = DiscFamily(ss, fam)
    f = H.discs[-1]
    if not f.is_immersed():
        f = perturb_to_immersion(DiscFamily([0.0], [f]), bound=1e-4, rng=rng).discs[0]
    rep = is_g_disc(f, G)
    out = {"g_disc": rep.to_json(), "contract": sol.contract.get("pass")}
    if kappa_margin is not None:
        out["three_eps_inside"] = bool(kappa_margin > 3 * sol.contract.get("eps", 0.0))
    if strict and not rep.boundary_in_G:
        b = f.boundary()
        m = G.margin(b)
        j = int(np.argmin(m))
        raise ContractError("extracted disc leaves G", {**out, "worst_sample": j, "worst_margin": float(m[j])},
                            stage="extract_g_disc")
    if strict and not rep.immersed:
        raise ContractError("immersion unattainable", out, stage="extract_g_disc")
    return Extraction(f, H, out)
