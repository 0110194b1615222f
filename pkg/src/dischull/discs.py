"""Analytic discs in C^2 stored as truncated power series.

A disc is ``z -> sum_k a_k z^k`` with ``a_k`` in C^2, trusted on the closed
disc of radius ``radius > 1``.  Families of discs are sampled over a
parameter interval and interpolated coefficientwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError

log = logging.getLogger(__name__)

DEFAULT_DEGREE = 64
DEFAULT_RADIUS = 1.25
TOL_IMM = 1e-6
TOL_TRUNC = 1e-8
N_BOUNDARY = 256
N_FFT_RECENTER = 512
GRID_ANGLES = 64
GRID_RADII = 32
TOL_TRANS = 1e-8


def _as_coeffs(coeffs) -> np.ndarray:
    a = np.array(coeffs, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(1, 2)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError("coefficients must have shape (M+1, 2)")
    return a


@dataclass(frozen=True, eq=False)
class AnalyticDisc:
    """Polynomial map ``z -> sum a_k z^k`` from a disc into C^2.

    Parameters
    ----------
    coeffs : array_like, shape (M+1, 2)
        Complex coefficients, ``coeffs[k]`` multiplies ``z**k``.
    radius : float
        Validity radius of the truncation; must exceed 1.

    Attributes
    ----------
    tail_constant : float
        ``C = max_k |a_k| radius**k``, so that ``|a_k| <= C radius**-k``.
    """

    coeffs: np.ndarray
    radius: float = DEFAULT_RADIUS
    tail_constant: float = field(init=False)

    def __post_init__(self):
        a = _as_coeffs(self.coeffs)
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        if not self.radius > 1.0:
            raise ValueError("validity radius must exceed 1")
        k = np.arange(len(a))
        c = float(np.max(np.linalg.norm(a, axis=1) * self.radius ** k)) if len(a) else 0.0
        object.__setattr__(self, "tail_constant", c)

    # evaluation -----------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def center(self) -> np.ndarray:
        return np.array(self.coeffs[0])

    def __call__(self, z) -> np.ndarray:
        """Values at ``z``; output shape is ``z.shape + (2,)``."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (2,), dtype=complex)
        for a in self.coeffs[::-1]:
            out = out * z[..., None] + a
        return out

    def derivative_coeffs(self) -> np.ndarray:
        k = np.arange(1, len(self.coeffs))
        if len(k) == 0:
            return np.zeros((1, 2), dtype=complex)
        return self.coeffs[1:] * k[:, None]

    def derivative(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (2,), dtype=complex)
        for a in self.derivative_coeffs()[::-1]:
            out = out * z[..., None] + a
        return out

    def boundary(self, n: int = N_BOUNDARY) -> np.ndarray:
        return self(np.exp(2j * np.pi * np.arange(n) / n))

    def _memo(self, key, compute):
        # coefficients are read-only, so derived scalars can be cached per instance
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = compute()
        return cache[key]

    def diameter(self, n: int = 128) -> float:
        """Diameter of the image of the closed disc.

        For holomorphic maps the largest distance between two image points is
        attained on the boundary circle, so boundary samples suffice.
        """
        def compute():
            b = self.boundary(n)
            d = b[:, None, :] - b[None, :, :]
            return float(np.sqrt(np.max(np.sum(np.abs(d) ** 2, axis=-1))))
        return self._memo(("diameter", n), compute)

    def min_speed(self, n_ang: int = GRID_ANGLES, n_rad: int = GRID_RADII) -> float:
        """Minimum of ``|d'(z)|`` on a polar grid of the closed unit disc."""
        return self._memo(("min_speed", n_ang, n_rad), lambda: self._min_speed(n_ang, n_rad))

    def _min_speed(self, n_ang: int, n_rad: int) -> float:
        r = np.linspace(0.0, 1.0, n_rad)
        th = 2 * np.pi * np.arange(n_ang) / n_ang
        z = r[:, None] * np.exp(1j * th)[None, :]
        return float(np.min(np.linalg.norm(self.derivative(z), axis=-1)))

    def is_immersed(self, tol_imm: float = TOL_IMM) -> bool:
        return self.min_speed() > tol_imm

    # simple constructions -------------------------------------------------
    def translated(self, v) -> "AnalyticDisc":
        a = np.array(self.coeffs)
        a[0] = a[0] + np.asarray(v, dtype=complex)
        return AnalyticDisc(a, self.radius)

    def scaled_argument(self, s: complex) -> "AnalyticDisc":
        """The disc ``z -> d(s z)``; validity radius adjusts when ``|s| < 1``."""
        k = np.arange(len(self.coeffs))
        rad = min(self.radius / abs(s), 1e6) if abs(s) > 0 else 1e6
        return AnalyticDisc(self.coeffs * (s ** k)[:, None], rad)

    def padded(self, degree: int) -> np.ndarray:
        """Coefficient array padded with zeros (or truncated) to ``degree``."""
        out = np.zeros((degree + 1, 2), dtype=complex)
        m = min(degree, self.degree) + 1
        out[:m] = self.coeffs[:m]
        return out

    def to_json(self) -> dict:
        c = self.coeffs
        return {"radius": self.radius,
                "coeffs": [[a.real, a.imag, b.real, b.imag] for a, b in c]}

    @classmethod
    def from_json(cls, obj: dict) -> "AnalyticDisc":
        c = np.array(obj["coeffs"], dtype=float).reshape(-1, 4)
        return cls(np.stack([c[:, 0] + 1j * c[:, 1], c[:, 2] + 1j * c[:, 3]], axis=1),
                   float(obj.get("radius", DEFAULT_RADIUS)))

    @classmethod
    def from_function(cls, f: Callable, degree: int = DEFAULT_DEGREE, radius: float = DEFAULT_RADIUS,
                      n: int = N_FFT_RECENTER) -> "AnalyticDisc":
        """Expand a holomorphic ``f`` (C -> C^2) by FFT on the circle ``(1+radius)/2``."""
        R = (1.0 + radius) / 2
        return cls(_fft_expand(f, R, n, degree), R)


def _fft_expand(f: Callable, R: float, n: int, degree: int) -> np.ndarray:
    w = R * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.asarray(f(w), dtype=complex).reshape(n, 2)
    c = np.fft.fft(vals, axis=0) / n
    k = np.arange(degree + 1)
    return c[: degree + 1] / (R ** k)[:, None]


def constant_disc(p, radius: float = DEFAULT_RADIUS) -> AnalyticDisc:
    return AnalyticDisc(np.array([p], dtype=complex).reshape(1, 2), radius)


def linear_disc(p, v, radius: float = DEFAULT_RADIUS) -> AnalyticDisc:
    """``z -> p + v z``."""
    return AnalyticDisc(np.array([p, v], dtype=complex), radius)


def small_embedded_disc(center, direction, r: float) -> AnalyticDisc:
    """``z -> center + r z direction`` with ``direction`` normalized."""
    if not r > 0:
        raise ValueError("radius must be positive")
    v = np.asarray(direction, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("direction must be non-zero")
    return linear_disc(center, r * v / n, radius=1e6)


# Moebius recentering ---------------------------------------------------------

@dataclass(frozen=True)
class MobiusAut:
    """``phi(z) = (u z + z0) / (1 + conj(z0) u z)`` with ``u`` the rotation.

    The rotation acts before the translation, so ``phi(0) = z0`` for every
    rotation.
    """

    z0: complex
    rotation: complex = 1.0

    def __post_init__(self):
        if not abs(self.z0) < 1:
            raise ValueError("|z0| must be < 1")
        if abs(abs(self.rotation) - 1) > 1e-12:
            raise ValueError("rotation must be unimodular")

    def __call__(self, z):
        z = self.rotation * np.asarray(z, dtype=complex)
        return (z + self.z0) / (1 + np.conj(self.z0) * z)

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        return (w - self.z0) / (1 - np.conj(self.z0) * w) / self.rotation


def recenter(d: AnalyticDisc, z0: complex, rotation: complex = 1.0, tol: float = TOL_TRUNC,
             n_fft: int = N_FFT_RECENTER) -> AnalyticDisc:
    """Re-expand ``d o phi`` where ``phi`` is the disc automorphism sending 0 to ``z0``.

    The composition is sampled on a circle of radius ``R`` with
    ``1 < R <= (1 + radius)/2``, chosen so that ``phi`` maps it inside the
    validity disc of ``d``, and re-expanded by FFT.  The degree is doubled
    until the sup error on 256 boundary samples drops below ``tol``.

    Raises
    ------
    ValueError
        If ``|z0| >= 1``.
    ContractError
        If the truncation error stays above ``tol`` at the largest degree.
    """
    z0 = complex(z0)
    if not abs(z0) < 1:
        raise ValueError("recentering point must lie in the open unit disc")
    phi = MobiusAut(z0, rotation)
    if z0 == 0 and rotation == 1:
        return d
    target = (1.0 + d.radius) / 2
    probe = np.exp(2j * np.pi * np.arange(256) / 256)
    lo, hi = 1.0, target
    if abs(z0) > 0:
        hi = min(hi, 0.5 * (1 + 1 / abs(z0)))
    if np.max(np.abs(phi(hi * probe))) > target:
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if np.max(np.abs(phi(mid * probe))) > target:
                hi = mid
            else:
                lo = mid
        R = lo
    else:
        R = hi
    if R <= 1.0 + 1e-9:
        raise ContractError("recentering point too close to the validity boundary",
                            {"z0": [z0.real, z0.imag]}, stage="recenter")
    comp = lambda z: d(phi(z))
    truth = comp(probe)
    degree = max(d.degree, 8)
    err = np.inf
    while True:
        c = _fft_expand(comp, R, n_fft, min(degree, n_fft // 2 - 1))
        out = AnalyticDisc(c, R)
        err = float(np.max(np.abs(out(probe) - truth)))
        if err < tol or degree >= n_fft // 2 - 1:
            break
        degree *= 2
    if err >= tol:
        raise ContractError("recentering truncation error above tolerance",
                            {"achieved": err, "tol": tol}, stage="recenter")
    return out


# G-disc checks ---------------------------------------------------------------

@dataclass(frozen=True)
class GDiscReport:
    immersed: bool
    boundary_in_G: bool
    margin: float
    min_speed: float

    @property
    def ok(self) -> bool:
        return self.immersed and self.boundary_in_G

    def to_json(self) -> dict:
        return {"immersed": self.immersed, "boundary_in_G": self.boundary_in_G,
                "margin": self.margin, "min_speed": self.min_speed}


def is_g_disc(d: AnalyticDisc, G, n_b: int = N_BOUNDARY, tol_imm: float = TOL_IMM) -> GDiscReport:
    """Immersion and boundary-membership report for ``d`` against domain ``G``.

    ``G`` must provide ``margin(points) -> array`` (positive inside) and
    ``contains(points) -> bool array``.
    """
    speed = d.min_speed()
    b = d.boundary(n_b)
    margin = float(np.min(G.margin(b)))
    inside = bool(np.all(G.contains(b)))
    return GDiscReport(speed > tol_imm, inside, margin, speed)


# tubular foliation -------------------------------------------------------------

@dataclass(frozen=True)
class TubeFoliation:
    """Leaves ``z1 -> d(z1) + z2 v`` of a tubular neighbourhood of ``d``."""

    disc: AnalyticDisc
    v: np.ndarray
    delta: float

    def point(self, z1, z2) -> np.ndarray:
        return self.disc(z1) + np.multiply.outer(np.asarray(z2, dtype=complex), self.v)

    def leaf(self, z2: complex) -> AnalyticDisc:
        if abs(z2) >= self.delta:
            raise ValueError("leaf parameter outside the tube")
        return self.disc.translated(z2 * self.v)

    def coordinates(self, q, z1_guess: complex = 0.0, tol: float = 1e-13, maxiter: int = 50):
        """Solve ``d(z1) + z2 v = q`` by Newton's method on the 2x2 system."""
        q = np.asarray(q, dtype=complex)
        z1 = complex(z1_guess)
        z2 = 0j
        for _ in range(maxiter):
            r = self.disc(z1) + z2 * self.v - q
            if np.linalg.norm(r) < tol:
                break
            J = np.column_stack([self.disc.derivative(z1), self.v])
            dz = np.linalg.solve(J, -r)
            z1 += dz[0]
            z2 += dz[1]
        res = float(np.linalg.norm(self.disc(z1) + z2 * self.v - q))
        if res > 1e-10 or not np.isfinite(res):
            raise ContractError("Newton inversion did not converge",
                                {"residual": res}, stage="foliate_tube")
        return z1, z2

    def leaf_through(self, q) -> AnalyticDisc:
        """Leaf containing ``q``, recentered so that its center is ``q``."""
        z1, z2 = self.coordinates(q)
        if abs(z2) >= self.delta or abs(z1) >= 1:
            raise ContractError("query point outside the tube", {"z1": abs(z1), "z2": abs(z2)},
                                stage="foliate_tube")
        return recenter(self.leaf(z2), z1)


def transversality(d: AnalyticDisc, v) -> float:
    """Minimum of ``|det(d'(z), v)|`` on the polar grid of the closed disc."""
    r = np.linspace(0.0, 1.0, GRID_RADII)
    th = 2 * np.pi * np.arange(GRID_ANGLES) / GRID_ANGLES
    z = r[:, None] * np.exp(1j * th)[None, :]
    dp = d.derivative(z)
    v = np.asarray(v, dtype=complex)
    return float(np.min(np.abs(dp[..., 0] * v[1] - dp[..., 1] * v[0])))


def foliate_tube(d: AnalyticDisc, v, delta: float, tol_trans: float = TOL_TRANS) -> TubeFoliation:
    """Foliation of a tube around ``d`` by translates along ``v``."""
    v = np.asarray(v, dtype=complex)
    t = transversality(d, v)
    if t <= tol_trans:
        raise ContractError("direction is not transversal to the disc",
                            {"min_det": t}, stage="foliate_tube")
    return TubeFoliation(d, v, float(delta))


# families ----------------------------------------------------------------------

class DiscFamily:
    """Discs sampled over increasing parameters, linear in between.

    Parameters
    ----------
    params : sequence of float
        Strictly increasing sample parameters.
    discs : sequence of AnalyticDisc
    meta : dict, optional
        Free-form bookkeeping (e.g. number of perturbation attempts).
    """

    def __init__(self, params: Sequence[float], discs: Sequence[AnalyticDisc], meta: dict | None = None):
        p = np.asarray(params, dtype=float)
        if len(p) != len(discs) or len(p) == 0:
            raise ValueError("params and discs must have equal non-zero length")
        if np.any(np.diff(p) <= 0):
            raise ValueError("params must be strictly increasing")
        self.params = p
        self.discs = list(discs)
        self.meta = dict(meta or {})
        self.degree = max(d.degree for d in self.discs)
        self.radius = min(d.radius for d in self.discs)

    @classmethod
    def from_function(cls, F: Callable, params, degree: int | None = None, radius: float = DEFAULT_RADIUS):
        """Sample ``F(t)`` (returning an AnalyticDisc or a coefficient array)."""
        ds = []
        for t in params:
            d = F(t)
            if not isinstance(d, AnalyticDisc):
                d = AnalyticDisc(d, radius)
            ds.append(d)
        return cls(params, ds)

    def __len__(self):
        return len(self.discs)

    def __getitem__(self, i) -> AnalyticDisc:
        return self.discs[i]

    def coeff_array(self, degree: int | None = None) -> np.ndarray:
        degree = self.degree if degree is None else degree
        return np.stack([d.padded(degree) for d in self.discs])

    def at(self, t: float) -> AnalyticDisc:
        """Coefficientwise linear interpolation."""
        p = self.params
        t = float(np.clip(t, p[0], p[-1]))
        j = int(np.searchsorted(p, t, side="right")) - 1
        j = min(max(j, 0), len(p) - 1)
        if j == len(p) - 1 or t == p[j]:
            return self.discs[j]
        u = (t - p[j]) / (p[j + 1] - p[j])
        deg = max(self.discs[j].degree, self.discs[j + 1].degree)
        c = (1 - u) * self.discs[j].padded(deg) + u * self.discs[j + 1].padded(deg)
        return AnalyticDisc(c, min(self.discs[j].radius, self.discs[j + 1].radius))

    def centers(self) -> np.ndarray:
        return np.array([d.center for d in self.discs])

    def steps(self) -> np.ndarray:
        """Coefficient sup-norm differences between neighbouring samples."""
        c = self.coeff_array()
        if len(c) < 2:
            return np.zeros(0)
        return np.max(np.abs(np.diff(c, axis=0)), axis=(1, 2))

    def max_step(self) -> float:
        s = self.steps()
        return float(s.max()) if len(s) else 0.0

    def discontinuities(self, delta_cont: float, factor: float = 5.0) -> list[int]:
        """Indices ``j`` where the step from sample ``j`` to ``j+1`` exceeds ``factor*delta_cont``."""
        return [int(j) for j in np.nonzero(self.steps() > factor * delta_cont)[0]]

    def reparametrized(self, lo: float = 0.0, hi: float = 1.0) -> "DiscFamily":
        p = self.params
        q = lo + (p - p[0]) * (hi - lo) / (p[-1] - p[0]) if len(p) > 1 else np.array([lo])
        return DiscFamily(q, self.discs, self.meta)

    def to_json(self) -> dict:
        return {"params": self.params.tolist(), "discs": [d.to_json() for d in self.discs]}

    @classmethod
    def from_json(cls, obj: dict) -> "DiscFamily":
        return cls(obj["params"], [AnalyticDisc.from_json(d) for d in obj["discs"]])


def default_delta_cont(F: DiscFamily, factor: float = 10.0) -> float:
    """Continuity bound ``factor`` times the median step (a local Lipschitz proxy)."""
    s = F.steps()
    if len(s) == 0:
        return 0.0
    return factor * float(np.median(s)) + 1e-12


# holomorphization in the parameter ------------------------------------------------

class HolomorphicFamily:
    """``F_N(t, z) = sum_k a_k(1) z^k + sum_{k<=N} P_k(t) z^k`` with ``P_k(1) = 0``.

    ``P_k`` is a polynomial in ``t - 1`` without constant term, so the member
    at ``t = 1`` reproduces the input exactly.
    """

    def __init__(self, base: np.ndarray, poly: np.ndarray, radius: float, error: float, t_degree: int):
        self.base = base            # (M+1, 2), the coefficients a_k(1)
        self.poly = poly            # (t_degree, N+1, 2), powers (t-1)^1 .. (t-1)^deg
        self.radius = radius
        self.error = error
        self.t_degree = t_degree

    @property
    def N(self) -> int:
        return self.poly.shape[1] - 1

    def coeffs(self, t: complex) -> np.ndarray:
        c = np.array(self.base, dtype=complex)
        s = complex(t) - 1.0
        add = np.zeros(self.poly.shape[1:], dtype=complex)
        for j in range(self.t_degree, 0, -1):
            add = (add + self.poly[j - 1]) * s
        c[: self.N + 1] += add
        return c

    def disc(self, t: complex) -> AnalyticDisc:
        return AnalyticDisc(self.coeffs(t), self.radius)

    def __call__(self, t, z):
        return self.disc(t)(z)


def _fit_family(F: DiscFamily, N: int, deg: int):
    c = F.coeff_array(max(F.degree, N))
    s = F.params - 1.0
    V = np.stack([s ** j for j in range(1, deg + 1)], axis=1)
    rhs = (c[:, : N + 1] - _coeffs_at_one(F, N)[None]).reshape(len(s), -1)
    sol, *_ = np.linalg.lstsq(V, rhs, rcond=None)
    return sol.reshape(deg, N + 1, 2)


def _coeffs_at_one(F: DiscFamily, N: int) -> np.ndarray:
    return F.at(1.0).padded(max(F.degree, N))[: N + 1]


def family_error(H: HolomorphicFamily, F: DiscFamily, n_t: int = 32, n_z: int = 32) -> float:
    """Sup distance between ``H`` and the interpolated ``F`` on an ``n_t x n_z`` grid."""
    ts = np.linspace(F.params[0], F.params[-1], n_t)
    zs = np.exp(2j * np.pi * np.arange(n_z) / n_z)
    err = 0.0
    for t in ts:
        err = max(err, float(np.max(np.abs(H(t, zs) - F.at(t)(zs)))))
    return err


def holomorphize_family(F: DiscFamily, N: int, tol: float = 1e-6, t_degree: int | None = None,
                        max_t_degree: int = 15, raise_on_fail: bool = False) -> HolomorphicFamily:
    """Replace ``F`` by a family polynomial in ``t`` that agrees with it at ``t = 1``.

    Each coefficient difference ``a_k(t) - a_k(1)``, ``k <= N``, is fitted by
    least squares on the family samples with a polynomial in ``t - 1``
    without constant term.  Coefficients above ``N`` are frozen at ``t = 1``.
    With ``t_degree=None`` the degree is raised until the grid error is below
    ``tol``.  The achieved error is stored on the result.
    """
    if not (F.params[0] <= 1.0 <= F.params[-1]):
        raise ValueError("family must be sampled over an interval containing t = 1")
    base = F.at(1.0).padded(F.degree)
    degs = [t_degree] if t_degree is not None else range(1, max_t_degree + 1)
    best = None
    for deg in degs:
        poly = _fit_family(F, min(N, F.degree), deg)
        H = HolomorphicFamily(base, poly, F.radius, 0.0, deg)
        H.error = family_error(H, F)
        if best is None or H.error < best.error:
            best = H
        if H.error <= tol:
            break
    if best.error > tol and raise_on_fail:
        raise ContractError("holomorphization tolerance not reached",
                            {"achieved": best.error, "tol": tol}, stage="holomorphize_family")
    return best


# perturbation to immersions ---------------------------------------------------------

def perturb_to_immersion(F: DiscFamily, tol_imm: float = TOL_IMM, attempts: int = 20,
                         bound: float = 1e-2, rng=None, n_k: int = 4) -> DiscFamily:
    """Add a small random perturbation to coefficients ``1..n_k`` until all members immerse.

    The perturbation is ``sum_k b_k(t) z^k`` with ``b_k`` affine in ``t``, so
    continuity of the family is preserved.  Centers are never touched.  Its
    coefficient size stays below ``bound``.  An already-immersed family is
    returned unchanged; the attempt count ends up in ``meta["perturb_attempts"]``.
    """
    if all(d.is_immersed(tol_imm) for d in F.discs):
        F.meta.setdefault("perturb_attempts", 0)
        return F
    rng = np.random.default_rng(rng)
    p = F.params
    u = (p - p[0]) / (p[-1] - p[0]) if len(p) > 1 else np.zeros(1)
    deg = max(F.degree, n_k)
    base = F.coeff_array(deg)
    for attempt in range(1, attempts + 1):
        # uniform samples in a ball of radius bound/2 for both endpoints
        ends = []
        for _ in range(2):
            x = rng.normal(size=(n_k, 4))
            x /= np.linalg.norm(x)
            x *= 0.5 * bound * rng.uniform() ** (1 / (4 * n_k))
            ends.append(x[:, :2] + 1j * x[:, 2:])
        pert = (1 - u)[:, None, None] * ends[0][None] + u[:, None, None] * ends[1][None]
        c = base.copy()
        c[:, 1: n_k + 1] += pert
        discs = [AnalyticDisc(ci, d.radius) for ci, d in zip(c, F.discs)]
        if all(d.is_immersed(tol_imm) for d in discs):
            return DiscFamily(p, discs, {**F.meta, "perturb_attempts": attempt,
                                          "perturb_size": float(np.max(np.abs(pert)))})
    raise ContractError("could not reach an immersed family", {"attempts": attempts, "bound": bound},
                        stage="perturb_to_immersion")
