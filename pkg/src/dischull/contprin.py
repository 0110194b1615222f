"""Analytic continuation through a family of discs by Cauchy integrals.

The data is a function ``g(t, z)`` known near the Hartogs core
``({0} x closed disc) U ([0, 1] x circle)``.  For every ``t`` the value at
an interior point is recovered from the values on the slightly larger
circle ``|zeta| = 1 + eps``.  The bottom disc ``t = 0``, where ``g`` is known
everywhere, then tells whether ``g`` really was holomorphic in ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .discs import AnalyticDisc, DiscFamily, holomorphize_family, is_g_disc, perturb_to_immersion
from .errors import ContractError

N_QUAD = 512
EPS_MARGIN = 0.25
TOL_VALID = 1e-8


@dataclass(frozen=True)
class HartogsCore:
    """Membership predicates and sample grids for the three cylinders.

    ``core0`` is the bottom disc plus the side of the cylinder, ``core`` adds
    every slice with ``t < 1`` and ``full`` is the closed cylinder.
    """

    epsilon: float = EPS_MARGIN

    @staticmethod
    def in_core0(t, z, tol: float = 1e-12):
        t, z = np.asarray(t, float), np.asarray(z, complex)
        side = (t >= -tol) & (t <= 1 + tol) & (np.abs(np.abs(z) - 1) <= tol)
        bottom = (np.abs(t) <= tol) & (np.abs(z) <= 1 + tol)
        return side | bottom

    @staticmethod
    def in_core(t, z, tol: float = 1e-12):
        t, z = np.asarray(t, float), np.asarray(z, complex)
        lower = (t >= -tol) & (t < 1) & (np.abs(z) <= 1 + tol)
        return lower | HartogsCore.in_core0(t, z, tol)

    @staticmethod
    def in_full(t, z, tol: float = 1e-12):
        t, z = np.asarray(t, float), np.asarray(z, complex)
        return (t >= -tol) & (t <= 1 + tol) & (np.abs(z) <= 1 + tol)

    @staticmethod
    def grid(n_t: int = 20, n_z: int = 20):
        """``n_t x n_z`` interior grid of the full cylinder (radii below 1)."""
        ts = np.linspace(0, 1, n_t)
        r = np.linspace(0, 0.95, n_z // 4 + 1)[1:]
        th = 2 * np.pi * np.arange(4) / 4
        zs = np.concatenate([[0j], (r[:, None] * np.exp(1j * (th[None] + r[:, None]))).ravel()])[:n_z]
        return ts, zs


@dataclass
class Extension:
    """Value of a Cauchy extension plus the bottom-disc validity residual."""

    value: complex | np.ndarray
    residual: float
    valid: bool
    tol: float = TOL_VALID

    def to_json(self) -> dict:
        v = np.asarray(self.value)
        val = [v.real.tolist(), v.imag.tolist()]
        return {"value": val, "residual": self.residual, "valid": self.valid, "tol": self.tol}


def _nodes(n_q: int, eps: float) -> np.ndarray:
    return (1.0 + eps) * np.exp(2j * np.pi * np.arange(n_q) / n_q)


def cauchy_integral(g: Callable, t: float, z, n_q: int = N_QUAD, eps: float = EPS_MARGIN) -> np.ndarray:
    """Trapezoid rule for ``(1/2 pi i) int_{|zeta|=1+eps} g(t, zeta) / (zeta - z) d zeta``.

    With ``d zeta = i zeta d theta`` this is the mean of
    ``g(t, zeta_j) zeta_j / (zeta_j - z)`` over equispaced nodes.
    """
    zeta = _nodes(n_q, eps)
    gv = np.asarray(g(t, zeta), dtype=complex)
    z = np.asarray(z, dtype=complex)
    ker = zeta / (zeta - z[..., None])
    return np.tensordot(ker, gv, axes=([-1], [0])) / n_q if gv.ndim > 1 else (ker @ gv) / n_q


def bottom_residual(g: Callable, n_q: int = N_QUAD, eps: float = EPS_MARGIN, n_r: int = 4, n_th: int = 16) -> float:
    """Sup of ``|extension - g|`` on a polar grid of the bottom disc ``{0} x closed disc``."""
    r = np.linspace(0.0, 1.0, n_r)
    th = 2 * np.pi * (np.arange(n_th) + 0.5) / n_th
    z = (r[:, None] * np.exp(1j * th)[None]).ravel()
    ext = cauchy_integral(g, 0.0, z, n_q, eps)
    direct = np.asarray(g(0.0, z), dtype=complex)
    with np.errstate(invalid="ignore"):
        diff = np.abs(ext - direct)
    diff = np.where(np.isfinite(diff), diff, np.inf)
    return float(np.max(diff))


def cauchy_extend(g: Callable, t: float, z, n_q: int = N_QUAD, eps: float = EPS_MARGIN,
                  tol: float = TOL_VALID, strict: bool = False) -> Extension:
    """Extend ``g`` from the Hartogs core to ``(t, z)`` with ``|z| < 1``.

    Parameters
    ----------
    g : callable
        ``g(t, zeta)`` vectorized in ``zeta``; must be holomorphic in
        ``zeta`` on the enlarged circle and, at ``t = 0``, on the closed disc.
    strict : bool
        Raise :class:`ContractError` instead of flagging an invalid result.

    Returns
    -------
    Extension
        ``valid`` is false when the bottom-disc residual exceeds ``tol``,
        meaning ``g`` was not holomorphic there (a hidden pole, for instance).
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise ValueError("extension point must satisfy |z| < 1")
    val = cauchy_integral(g, t, z, n_q, eps)
    res = bottom_residual(g, n_q, eps)
    ok = res <= tol
    if strict and not ok:
        raise ContractError("not a valid continuation", {"residual": res, "tol": tol},
                            stage="cauchy_extend")
    return Extension(val if z.ndim else complex(val), res, ok, tol)


# lifting discs ------------------------------------------------------------------

@dataclass
class LiftReport:
    """Per-test-function extension data on the final disc."""

    eps: float
    z_grid: np.ndarray
    values: list = field(default_factory=list)       # extension at (1, z) per test function
    restriction_error: list = field(default_factory=list)
    bottom_residual: list = field(default_factory=list)
    overlap_residual: float = 0.0
    overlap_pairs: int = 0

    def to_json(self) -> dict:
        return {"eps": self.eps, "restriction_error": self.restriction_error,
                "bottom_residual": self.bottom_residual, "overlap_residual": self.overlap_residual,
                "overlap_pairs": self.overlap_pairs}


def _disc_grid(n_r: int = 8, n_th: int = 24) -> np.ndarray:
    r = np.linspace(0.0, 0.9, n_r)
    th = 2 * np.pi * np.arange(n_th) / n_th
    return np.concatenate([[0j], (r[1:, None] * np.exp(1j * th)[None]).ravel()])


def _enlargement(F: DiscFamily, G, candidates=(0.25, 0.1, 0.05, 0.02, 0.01)) -> float:
    """Largest margin ``eps`` with all enlarged boundary circles still in ``G``."""
    for eps in candidates:
        zeta = _nodes(128, eps)
        if all(np.all(G.contains(d(zeta))) for d in F.discs):
            bottom = F.discs[0](_disc_grid() * (1 + eps) / 0.9)
            if np.all(G.contains(bottom)):
                return eps
    raise ContractError("no enlargement of the boundary circles stays in G",
                        {"candidates": list(candidates)}, stage="lift_disc_check")


def lift_disc_check(d: AnalyticDisc, H: DiscFamily, tests: Sequence[Callable], G,
                    N: int | None = None, tol_end: float = 1e-9, rng=0) -> LiftReport:
    """Continue test functions from ``G`` along ``H`` onto the disc ``d``.

    ``H`` must start at a small disc embedded in ``G`` and end at ``d``, with
    every boundary in ``G``.  The family is made polynomial in ``t`` and
    immersed first; then each test ``f`` (a map from C^2 to C) is continued by
    Cauchy integrals of ``f o H_t`` over enlarged circles.

    Raises
    ------
    ContractError
        When a member has boundary outside ``G`` (reporting the offending
        parameter), when the endpoints do not match, or when no enlargement
        margin is available.
    """
    for t, disc in zip(H.params, H.discs):
        rep = is_g_disc(disc, G)
        if not rep.boundary_in_G:
            raise ContractError("family member leaves G", {"t": float(t), "margin": rep.margin},
                                stage="lift_disc_check")
    start = H.discs[0]
    if not np.all(G.contains(start(_disc_grid(16, 48) / 0.9))):
        raise ContractError("starting disc is not contained in G", {}, stage="lift_disc_check")
    end_err = float(np.max(np.abs(H.discs[-1].padded(max(d.degree, H.degree))
                                  - d.padded(max(d.degree, H.degree)))))
    if end_err > tol_end:
        raise ContractError("family does not end at the disc", {"error": end_err}, stage="lift_disc_check")

    hol = holomorphize_family(H.reparametrized(0.0, 1.0), N=H.degree if N is None else N, tol=1e-10)
    ts = np.linspace(0.0, 1.0, len(H))
    fam = DiscFamily(ts, [hol.disc(t) for t in ts])
    fam = perturb_to_immersion(fam, rng=rng)
    eps = _enlargement(fam, G)
    zg = _disc_grid()
    final = fam.discs[-1]
    report = LiftReport(eps, zg)
    for f in tests:
        def g(t, zeta, f=f):
            return f(fam.at(t)(zeta))

        ext = cauchy_extend(g, 1.0, zg, eps=eps)
        report.values.append(ext.value)
        report.bottom_residual.append(ext.residual)
        report.restriction_error.append(float(np.max(np.abs(ext.value - f(final(zg))))))
    # multi-valuedness probe where the image comes back close to itself
    pts = final(zg)
    dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    sep = np.abs(zg[:, None] - zg[None])
    pairs = np.argwhere((dist < 1e-3) & (sep > 0.1))
    report.overlap_pairs = int(len(pairs) // 2)
    if len(pairs):
        report.overlap_residual = max(float(np.max(np.abs(v[pairs[:, 0]] - v[pairs[:, 1]])))
                                      for v in report.values)
    return report
