"""Model domains in C^2 with membership, defining function and margin.

Every domain works on arrays of points with trailing axis of length 2.
``margin`` is positive inside and is a lower bound for the Euclidean
distance to the complement (negative outside, bounding the distance to the
domain from above in absolute value is not promised).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractError


def _pts(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if w.shape[-1] != 2:
        raise ValueError("points must have a trailing axis of length 2")
    return w


@dataclass(frozen=True)
class ModelDomain:
    """A concrete domain G in C^2.

    Attributes
    ----------
    name : str
    params : dict
    margin_fn : callable
        Signed margin, positive inside.
    defining_fn : callable
        Negative inside, positive outside.
    envelope_fn : callable or None
        Membership in the known envelope of holomorphy (fixture knowledge,
        only used by tests).
    closed : bool
        When true, boundary points (margin within ``tol_closed`` of 0) count
        as members.
    inradius : float
        Rough size of the thinnest part of G; sets the "small disc" scale.
    """

    name: str
    params: dict
    margin_fn: Callable
    defining_fn: Callable
    envelope_fn: Callable | None = None
    closed: bool = False
    inradius: float = 0.1
    tol_closed: float = field(default=1e-12)

    def margin(self, w) -> np.ndarray:
        return np.asarray(self.margin_fn(_pts(w)), dtype=float)

    def defining(self, w) -> np.ndarray:
        return np.asarray(self.defining_fn(_pts(w)), dtype=float)

    def contains(self, w) -> np.ndarray:
        m = self.margin(w)
        return m >= -self.tol_closed if self.closed else m > 0

    def in_envelope(self, w) -> np.ndarray:
        if self.envelope_fn is None:
            raise ContractError("no known envelope for this domain", {"domain": self.name})
        return np.asarray(self.envelope_fn(_pts(w)), dtype=bool)

    @property
    def diam_small(self) -> float:
        """Diameter below which embedded discs count as small."""
        return 0.05 * self.inradius

    def validate(self, probes: np.ndarray) -> float:
        """Fraction of probes where membership and the defining sign agree."""
        inside = self.contains(probes)
        d = self.defining(probes)
        agree = np.where(inside, d <= (self.tol_closed if self.closed else 0.0), d > 0)
        return float(np.mean(agree))

    def to_json(self) -> dict:
        return {"name": self.name, "params": self.params, "closed": self.closed}


def shell(r1: float = 0.9, r2: float = 1.1) -> ModelDomain:
    """Spherical shell ``r1 < |w| < r2``; its envelope is the ball ``|w| < r2``."""
    if not 0 < r1 < r2:
        raise ValueError("shell radii must satisfy 0 < r1 < r2")

    def margin(w):
        n = np.linalg.norm(w, axis=-1)
        return np.minimum(n - r1, r2 - n)

    def defining(w):
        return -margin(w)

    def env(w):
        return np.linalg.norm(w, axis=-1) < r2

    return ModelDomain("shell", {"r1": r1, "r2": r2}, margin, defining, env,
                       inradius=(r2 - r1) / 2)


def hartogs(eps: float = 0.25) -> ModelDomain:
    """Hartogs figure ``{|w1|<1, |w2|<eps} U {1-eps<|w1|<1, |w2|<1}``.

    Its envelope is the unit bidisc.
    """
    if not 0 < eps < 1:
        raise ValueError("hartogs eps must lie in (0, 1)")

    def margin(w):
        a1, a2 = np.abs(w[..., 0]), np.abs(w[..., 1])
        m_flat = np.minimum(1 - a1, eps - a2)
        m_ring = np.minimum(np.minimum(a1 - (1 - eps), 1 - a1), 1 - a2)
        return np.maximum(m_flat, m_ring)

    def defining(w):
        return -margin(w)

    def env(w):
        return (np.abs(w[..., 0]) < 1) & (np.abs(w[..., 1]) < 1)

    return ModelDomain("hartogs", {"eps": eps}, margin, defining, env, inradius=eps / 2)


def torus_tube(thickness: float = 1.0, closed: bool = False) -> ModelDomain:
    """Image under ``exp`` of the tube ``{x1^2 + x2^2 < thickness^2} + i R^2``.

    Membership is ``(log|w1|)^2 + (log|w2|)^2 < thickness^2``.  The margin
    converts the log-space gap ``m`` into a Euclidean lower bound
    ``min|w_i| (1 - exp(-m/sqrt 2))``; it vanishes exactly on the boundary.
    The base is convex, so the image is logarithmically convex and equals
    its own envelope; ``known_envelope`` is the closed image.
    """
    if not thickness > 0:
        raise ValueError("tube thickness must be positive")
    R = float(thickness)

    def logmod(w):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(w))

    def defining(w):
        L = logmod(w)
        return np.hypot(L[..., 0], L[..., 1]) - R

    def margin(w):
        L = logmod(w)
        m = R - np.hypot(L[..., 0], L[..., 1])
        scale = np.min(np.abs(w), axis=-1)
        out = scale * -np.expm1(-np.abs(m) / np.sqrt(2)) * np.sign(m)
        return np.where(np.isfinite(out), out, -np.inf)

    def env(w):
        return defining(w) <= 1e-12

    return ModelDomain("torus_tube", {"thickness": R, "closed": closed}, margin, defining, env,
                       closed=closed, inradius=R * np.exp(-R) / 2)


_FACTORIES = {"shell": shell, "hartogs": hartogs, "torus_tube": torus_tube}


def make_domain(name: str, **params) -> ModelDomain:
    """Build a model domain by name (``shell``, ``hartogs`` or ``torus_tube``)."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown domain {name!r}; choose from {sorted(_FACTORIES)}") from None
    return factory(**params)
