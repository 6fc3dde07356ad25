"""Independent reference computations for the derived test values.

Every routine here reaches its result by a different route than the
library code: square roots through the Denman-Beavers iteration instead
of an eigendecomposition, distances through the non-symmetric eigenvalues
of a^-1 b, geodesics through scipy's Schur-based matrix functions,
circumcenters by direct minimax optimization in log coordinates, and the
scalar constants by bounded one-dimensional optimization. Tests assert
agreement between the two routes.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.optimize import minimize, minimize_scalar


def denman_beavers_sqrt(m, iters: int = 80, tol: float = 1e-15) -> np.ndarray:
    """Principal square root of a PD matrix, eigendecomposition-free."""
    y = np.asarray(m, dtype=np.complex128)
    z = np.eye(y.shape[0], dtype=np.complex128)
    for _ in range(iters):
        yn = 0.5 * (y + np.linalg.inv(z))
        zn = 0.5 * (z + np.linalg.inv(y))
        delta = np.max(np.abs(yn - y))
        y, z = yn, zn
        if delta <= tol * max(1.0, np.max(np.abs(y))):
            break
    return y


def singular_values_oracle(m) -> np.ndarray:
    # squares are the eigenvalues of m* m; descending
    a = np.asarray(m, dtype=np.complex128)
    w = np.linalg.eigvalsh(a.conj().T @ a)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def schatten_oracle(m, p: float) -> float:
    sv = singular_values_oracle(m)
    return float(np.sum(sv**p) ** (1.0 / p))


def distance_oracle(a, b, p: float) -> float:
    """d_p through the eigenvalues of a^-1 b (similar to a^-1/2 b a^-1/2)."""
    lam = np.linalg.eigvals(np.linalg.solve(a, b))
    return float(np.sum(np.abs(np.log(lam.real)) ** p) ** (1.0 / p))


def geodesic_oracle(a, b, t: float) -> np.ndarray:
    """gamma(t) through scipy's Schur-based sqrtm and fractional power."""
    sa = np.asarray(scipy.linalg.sqrtm(np.asarray(a, dtype=np.complex128)))
    isa = np.linalg.inv(sa)
    mid = scipy.linalg.fractional_matrix_power(isa @ b @ isa, t)
    g = sa @ mid @ sa
    return 0.5 * (g + g.conj().T)


def log_oracle(m) -> np.ndarray:
    out = np.asarray(scipy.linalg.logm(np.asarray(m, dtype=np.complex128)))
    return 0.5 * (out + out.conj().T)


def busemann_constants(p: float) -> tuple[float, float]:
    r = max(p, 2.0)
    c = p - 1.0 if r == 2.0 else 2.0 ** (-(p - 2.0))
    return r, c


def busemann_margin_diag(x, g0, g1, p: float) -> float:
    """Midpoint inequality margin for commuting positive diagonal triples.

    All distances reduce to lp norms of log-coordinate differences, so the
    margin can be computed without any matrix machinery.
    """
    lx, l0, l1 = (np.log(np.asarray(v, dtype=np.float64)) for v in (x, g0, g1))
    lm = 0.5 * (l0 + l1)
    r, c = busemann_constants(p)

    def dist(u, v):
        return float(np.sum(np.abs(u - v) ** p) ** (1.0 / p))

    lhs = 0.5 * (dist(lx, l0) ** r + dist(lx, l1) ** r)
    return lhs - 0.25 * c * dist(l0, l1) ** r - dist(lx, lm) ** r


def ratio_upper_oracle(C: float) -> float:
    """max of |log x| / |x - 1| on [1/(C+1), C+1] by bounded optimization."""
    lo, hi = 1.0 / (C + 1.0), C + 1.0

    def neg(x):
        return -abs(np.log(x)) / abs(x - 1.0) if x != 1.0 else -1.0

    xs = np.linspace(lo, hi, 20001)
    xs = xs[np.abs(xs - 1.0) > 1e-9]
    best = float(np.max(np.abs(np.log(xs)) / np.abs(xs - 1.0)))
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return max(best, -res.fun)


def ratio_lower_oracle(C: float) -> float:
    """min of |log x| / |x - 1| on [exp(-C), exp(C)]."""
    lo, hi = np.exp(-C), np.exp(C)

    def pos(x):
        return abs(np.log(x)) / abs(x - 1.0) if x != 1.0 else 1.0

    xs = np.linspace(lo, hi, 20001)
    xs = xs[np.abs(xs - 1.0) > 1e-9]
    best = float(np.min(np.abs(np.log(xs)) / np.abs(xs - 1.0)))
    res = minimize_scalar(pos, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return min(best, res.fun)


def _herm_from_params(x: np.ndarray, n: int) -> np.ndarray:
    """Real parameter vector (length n*n) to a Hermitian matrix."""
    h = np.zeros((n, n), dtype=np.complex128)
    k = 0
    for i in range(n):
        h[i, i] = x[k]
        k += 1
    for i in range(n):
        for j in range(i + 1, n):
            h[i, j] = x[k] + 1j * x[k + 1]
            h[j, i] = x[k] - 1j * x[k + 1]
            k += 2
    return h


def _herm_to_params(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    x = np.zeros(n * n)
    k = 0
    for i in range(n):
        x[k] = h[i, i].real
        k += 1
    for i in range(n):
        for j in range(i + 1, n):
            x[k] = h[i, j].real
            x[k + 1] = h[i, j].imag
            k += 2
    return x


def circumcenter_oracle(points, p: float, polish_starts: int = 5):
    """Brute-force minimax center: geodesic-combination grid, then
    restarted Nelder-Mead over Hermitian log coordinates.

    Intended for small n (the acceptance tests use n = 2). Returns
    (center, radius).
    """
    mats = [np.asarray(pt, dtype=np.complex128) for pt in points]
    n = mats[0].shape[0]

    def radius_of(c):
        return max(distance_oracle(c, m, p) for m in mats)

    candidates = [(radius_of(m), m) for m in mats]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            for t in (0.25, 0.5, 0.75):
                c = geodesic_oracle(mats[i], mats[j], t)
                candidates.append((radius_of(c), c))
                for kk in range(len(mats)):
                    if kk != i and kk != j and t == 0.5:
                        c2 = geodesic_oracle(c, mats[kk], 1.0 / 3.0)
                        candidates.append((radius_of(c2), c2))
    candidates.sort(key=lambda rc: rc[0])

    def objective(x):
        return radius_of(scipy.linalg.expm(_herm_from_params(x, n)))

    opts = {"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000, "maxfev": 8000}
    best_r, best_c = candidates[0]
    best_x = _herm_to_params(log_oracle(best_c))
    for _, c in candidates[:polish_starts]:
        x = _herm_to_params(log_oracle(c))
        # Nelder-Mead in dim > 2 benefits from a restart at its own answer
        for _ in range(3):
            res = minimize(objective, x, method="Nelder-Mead", options=opts)
            x = res.x
        if res.fun < best_r:
            best_r = float(res.fun)
            best_x = res.x
    # seeded local perturbation restarts around the winner
    g = np.random.default_rng(12345)
    for _ in range(4):
        x = best_x + g.normal(scale=2e-3, size=best_x.size)
        for _ in range(2):
            res = minimize(objective, x, method="Nelder-Mead", options=opts)
            x = res.x
        if res.fun < best_r:
            best_r = float(res.fun)
            best_x = res.x
    return scipy.linalg.expm(_herm_from_params(best_x, n)), best_r


def polar_dual_grid_oracle(forms, xi, k: int = 600) -> float:
    """Brute-force dual norm on C^2: sup |<xi, u>| / max_i |u|_{b_i}.

    Scans the projective sphere (theta, phi) on a k x k grid and refines
    the best cell with Nelder-Mead. Only valid for 2-dimensional specs.
    """
    bs = [np.asarray(b, dtype=np.complex128) for b in forms]
    v = np.asarray(xi, dtype=np.complex128).reshape(2)

    def value(theta, phi):
        u = np.array([np.cos(theta), np.sin(theta) * np.exp(1j * phi)])
        nu = max(np.sqrt(np.vdot(u, b @ u).real) for b in bs)
        return abs(np.vdot(u, v)) / nu

    thetas = np.linspace(0.0, np.pi / 2, k)
    phis = np.linspace(0.0, 2 * np.pi, k, endpoint=False)
    best = 0.0
    best_tp = (0.0, 0.0)
    for th in thetas:
        vals = [value(th, ph) for ph in phis]
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_tp = vals[i], (th, phis[i])
    res = minimize(lambda tp: -value(tp[0], tp[1]), np.asarray(best_tp),
                   method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12})
    return max(best, -float(res.fun))


def cyclic_shift(n: int) -> np.ndarray:
    s = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        s[(i + 1) % n, i] = 1.0
    return s


def circulant(first_col) -> np.ndarray:
    return np.asarray(scipy.linalg.circulant(np.asarray(first_col)),
                      dtype=np.complex128)


def permutation_matrix(perm) -> np.ndarray:
    n = len(perm)
    m = np.zeros((n, n), dtype=np.complex128)
    for i, j in enumerate(perm):
        m[j, i] = 1.0
    return m
