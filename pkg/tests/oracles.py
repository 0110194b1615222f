"""Independent reference computations used to freeze expected values.

Nothing here imports the package's algorithms; only plain numpy is used.
"""

import math

import numpy as np


def face_walk(pos, edges, root, gap_angle):
    """Boundary walk of an embedded tree from its rotation system.

    ``edges`` is a list of (upper, lower) vertex pairs.  Arriving at a vertex
    from ``u``, the walk leaves along the next neighbour counterclockwise
    from ``u``.  Returns the events as (lower vertex, "L"/"R").
    """
    nbrs = {}
    for a, b in edges:
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    if not edges:
        return []
    upper = {b: a for a, b in edges}

    def ang(v, w):
        return math.atan2(pos[w][1] - pos[v][1], pos[w][0] - pos[v][0])

    def next_ccw(v, ref):
        return min(nbrs[v], key=lambda w: ((ang(v, w) - ref) % (2 * math.pi)) or 2 * math.pi)

    first = min(nbrs[root], key=lambda w: (ang(root, w) - gap_angle) % (2 * math.pi))
    out = []
    u, v = root, first
    for _ in range(2 * len(edges)):
        out.append((v, "L") if upper.get(v) == u else (u, "R"))
        w = next_ccw(v, ang(v, u))
        u, v = v, w
    return out


def seg_intersect(p1, p2, q1, q2):
    """Proper or touching intersection of two closed segments (plain float math)."""
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1, d2 = cross(q1, q2, p1), cross(q1, q2, p2)
    d3, d4 = cross(p1, p2, q1), cross(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def within(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return any([
        d1 == 0 and within(q1, q2, p1), d2 == 0 and within(q1, q2, p2),
        d3 == 0 and within(p1, p2, q1), d4 == 0 and within(p1, p2, q2),
    ])


def polyval_c2(coeffs, z):
    """Evaluate a C^2-valued power series by direct summation."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape + (2,), dtype=complex)
    for k, a in enumerate(coeffs):
        out += np.multiply.outer(z ** k, np.asarray(a, dtype=complex))
    return out


def ellipse_inverse_map_derivative(a, b, center, t, degree=60, n=4000):
    """``|f'|`` at boundary points ``a cos t + i b sin t`` of the Riemann map ``f`` of an ellipse.

    ``f(center) = 0``.  Solves the Dirichlet problem ``u = -log|z - center|`` on
    the boundary by least squares over harmonic polynomials ``Re g``; then
    ``f = (z - center) e^g`` and ``|f'| = |e^g| |1 + (z - center) g'|``.
    """
    s = 2 * np.pi * np.arange(n) / n
    zb = a * np.cos(s) + 1j * b * np.sin(s)
    scale = max(a, b)
    V = np.vander(zb / scale, degree + 1, increasing=True)
    # Re(c V) with c = p + i q gives Re(V) p - Im(V) q; drop the redundant Im c_0 column
    M = np.hstack([V.real, -V.imag[:, 1:]])
    rhs = -np.log(np.abs(zb - center))
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    c = sol[: degree + 1] + 1j * np.concatenate([[0.0], sol[degree + 1:]])
    z = a * np.cos(np.asarray(t)) + 1j * b * np.sin(np.asarray(t))
    g = np.polyval(c[::-1], z / scale)
    dg = np.polyval((c[1:] * np.arange(1, degree + 1))[::-1], z / scale) / scale
    fit = float(np.max(np.abs(M @ sol - rhs)))
    return np.abs(np.exp(g)) * np.abs(1 + (z - center) * dg), fit


def arnoldi_lsq_sup_error(z, values, degree):
    """Sup error of the least-squares polynomial fit, by Vandermonde with Arnoldi.

    Builds an orthonormal Krylov basis of ``z`` on the samples instead of
    forming monomials, so it shares no conditioning shortcuts with a plain
    Vandermonde solve.
    """
    z = np.asarray(z, dtype=complex)
    values = np.asarray(values, dtype=complex).reshape(len(z), -1)
    m = len(z)
    Q = np.zeros((m, degree + 1), dtype=complex)
    Q[:, 0] = 1.0
    for k in range(degree):
        q = z * Q[:, k]
        for j in range(k + 1):
            h = np.vdot(Q[:, j], q) / m
            q = q - h * Q[:, j]
        Q[:, k + 1] = q / (np.linalg.norm(q) / math.sqrt(m))
    c = Q.conj().T @ values / m
    return float(np.max(np.abs(Q @ c - values)))
