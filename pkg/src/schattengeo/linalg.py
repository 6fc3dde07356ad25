"""Dense complex linear algebra substrate.

Everything downstream (distances, geodesics, circumcenters, norm order sets)
reduces to Hermitian eigendecompositions, singular values and Schatten norms
of small dense complex matrices. This module owns those primitives together
with the validation and determinism conventions:

* Hermitian checks reject inputs whose defect exceeds ``1e-10 * max|M|``
  instead of silently symmetrizing.
* Eigenvalues are returned ascending with a deterministic tie-break and a
  deterministic eigenvector phase, so repeated runs are reproducible.
* Near-singular inputs are rejected at relative tolerance ``1e-12``.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .exceptions import (
    ConditioningError,
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    ExponentError,
    HermitianityError,
    NotPositiveDefiniteError,
    ValidationError,
)

# Relative tolerance of the Hermitian defect check, scaled by max|M|.
HERMITIAN_RTOL = 1e-10
# Relative eigen-residual tolerance, scaled by n.
EIG_TOL = 1e-11
# Relative singular value cutoff for invertibility, scaled by sigma_max.
SINGULARITY_RTOL = 1e-12
# Default slack of positive-semidefinite order checks.
ORDER_TOL = 1e-9


class SpectralDecomposition(NamedTuple):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class PolarDecomposition(NamedTuple):
    """Polar factors ``g = u @ positive`` with ``u`` unitary."""

    unitary: np.ndarray
    positive: np.ndarray


class OrderCheck(NamedTuple):
    """Result of a positive-semidefinite order comparison ``a <= b``."""

    holds: bool
    margin: float


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return a square complex matrix.

    Parameters
    ----------
    m : array_like
        Square matrix data, real or complex.
    name : str
        Label used in error messages.

    Returns
    -------
    ndarray
        Fresh complex128 array, square, all entries finite.
    """
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValidationError(f"{name} must be nonempty")
    a = np.array(a, dtype=np.complex128)
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def max_abs(m) -> float:
    """Largest entry magnitude, used as the cheap matrix scale."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m)))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Hermitian part ``(m + m*) / 2``."""
    return 0.5 * (m + m.conj().T)


def hermitian_defect(m) -> float:
    """Entrywise defect ``max|m - m*|``."""
    m = np.asarray(m)
    return max_abs(m - m.conj().T)


def to_hermitian(m, rtol: float = HERMITIAN_RTOL, name: str = "matrix") -> np.ndarray:
    """Validate Hermitianity and return the exactly Hermitian part.

    The input is rejected, not silently symmetrized, when the defect
    ``max|M - M*|`` exceeds ``rtol * max|M|``. Below the tolerance the
    numerical noise is removed by averaging with the adjoint.

    Raises
    ------
    HermitianityError
        If the defect exceeds the tolerance.
    """
    a = as_complex_matrix(m, name=name)
    scale = max(max_abs(a), 1.0)
    defect = hermitian_defect(a)
    if defect > rtol * scale:
        raise HermitianityError(
            f"{name} is not Hermitian: defect {defect:.3e} exceeds "
            f"{rtol:.1e} * {scale:.3e}"
        )
    return hermitian_part(a)


def check_square_same_dim(a: np.ndarray, b: np.ndarray) -> int:
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.shape} vs {b.shape}"
        )
    return a.shape[0]


def check_exponent(p: float) -> float:
    """Validate a Schatten exponent, restricted to 1 < p < inf."""
    p = float(p)
    if not np.isfinite(p) or p <= 1.0:
        raise ExponentError(f"Schatten exponent must lie in (1, inf), got {p}")
    return p


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    # Rotate each column so its largest-magnitude entry is real positive.
    v = np.array(v, copy=True)
    idx = np.argmax(np.abs(v), axis=0)
    piv = v[idx, np.arange(v.shape[1])]
    mag = np.abs(piv)
    mag[mag == 0.0] = 1.0
    v *= (piv / mag).conj()[np.newaxis, :]
    return v


def _canonical_order(w: np.ndarray, v: np.ndarray) -> SpectralDecomposition:
    # Ascending eigenvalues; exact float ties broken by the lexicographic
    # order of the phase-fixed eigenvector columns.
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = _canonical_phase(v[:, order])
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and w[stop] == w[start]:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            keys = [
                tuple(np.ravel([block[:, j].real, block[:, j].imag]))
                for j in range(stop - start)
            ]
            sub = sorted(range(stop - start), key=keys.__getitem__)
            v[:, start:stop] = block[:, sub]
        start = stop
    return SpectralDecomposition(w, v)


def _jacobi_hermitian_eig(
    a: np.ndarray, tol: float, max_sweeps: int = 60
) -> tuple[np.ndarray, np.ndarray]:
    # Cyclic Jacobi with complex rotations. One rotation zeroes A[p, q] for
    # Hermitian A; sweeps visit all pairs in row order until the off-diagonal
    # mass falls below tol.
    a = a.astype(np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.real.diagonal().copy(), v
    scale = max(max_abs(a), 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diagonal(a))) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Columns of the rotation acting on (p, q):
                #   col_p = ( c, -s * conj(phase)), col_q = (s * phase, c)
                up = np.array([c, -s * phase.conjugate()], dtype=np.complex128)
                uq = np.array([s * phase, c], dtype=np.complex128)
                rows = a[[p, q], :].copy()
                a[p, :] = up[0].conjugate() * rows[0] + up[1].conjugate() * rows[1]
                a[q, :] = uq[0].conjugate() * rows[0] + uq[1].conjugate() * rows[1]
                cols = a[:, [p, q]].copy()
                a[:, p] = cols[:, 0] * up[0] + cols[:, 1] * up[1]
                a[:, q] = cols[:, 0] * uq[0] + cols[:, 1] * uq[1]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcols = v[:, [p, q]].copy()
                v[:, p] = vcols[:, 0] * up[0] + vcols[:, 1] * up[1]
                v[:, q] = vcols[:, 0] * uq[0] + vcols[:, 1] * uq[1]
    else:
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diagonal(a))) ** 2))
        raise ConvergenceError(
            f"Jacobi sweep budget exhausted, off-diagonal residual {off:.3e}",
            best=(np.diagonal(a).real.copy(), v),
            residual=float(off),
        )
    return np.diagonal(a).real.copy(), v


def hermitian_eig(
    m,
    engine: str = "lapack",
    hermitian_rtol: float = HERMITIAN_RTOL,
) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Hermitian matrix (validated, defect beyond tolerance is rejected).
    engine : str
        "lapack" uses numpy.linalg.eigh; "jacobi" runs the cyclic Jacobi
        solver kept as an independent cross-check.

    Returns
    -------
    SpectralDecomposition
        Eigenvalues ascending, orthonormal eigenvectors, deterministic
        tie-break and column phases. Reconstruction residual stays below
        ``EIG_TOL * n`` relative to the matrix scale.
    """
    a = to_hermitian(m, rtol=hermitian_rtol)
    n = a.shape[0]
    if engine == "lapack":
        w, v = np.linalg.eigh(a)
    elif engine == "jacobi":
        w, v = _jacobi_hermitian_eig(a, tol=EIG_TOL * n)
    else:
        raise ValidationError(f"unknown eigensolver engine {engine!r}")
    return _canonical_order(np.asarray(w, dtype=np.float64), v)


def matrix_function(
    m,
    f: Callable[[np.ndarray], np.ndarray],
    domain: tuple[float, float] = (-np.inf, np.inf),
    open_lower: bool = False,
    open_upper: bool = False,
    name: str = "f",
) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    Parameters
    ----------
    m : array_like
        Hermitian matrix.
    f : callable
        Vectorized scalar function applied to the eigenvalues.
    domain : pair of floats
        Admissible eigenvalue interval; violations raise ``DomainError``
        reporting the offending eigenvalue.
    open_lower, open_upper : bool
        Make the respective endpoint exclusive.

    Returns
    -------
    ndarray
        ``V f(w) V*``, re-hermitized.
    """
    w, v = hermitian_eig(m)
    lo, hi = domain
    bad_lo = (w.min() <= lo) if open_lower else (w.min() < lo)
    bad_hi = (w.max() >= hi) if open_upper else (w.max() > hi)
    if bad_lo or bad_hi:
        offender = float(w.min() if bad_lo else w.max())
        raise DomainError(
            f"eigenvalue {offender:.6e} outside domain of {name} "
            f"({'(' if open_lower else '['}{lo}, {hi}{')' if open_upper else ']'})",
            eigenvalue=offender,
        )
    fw = np.asarray(f(w), dtype=np.float64)
    return hermitian_part((v * fw) @ v.conj().T)


def matrix_exp(m) -> np.ndarray:
    """Hermitian matrix exponential."""
    return matrix_function(m, np.exp, name="exp")


def matrix_log(m) -> np.ndarray:
    """Logarithm of a positive-definite Hermitian matrix."""
    return matrix_function(m, np.log, domain=(0.0, np.inf), open_lower=True, name="log")


def matrix_power_pd(m, t: float) -> np.ndarray:
    """Real power ``m ** t`` of a positive-definite Hermitian matrix."""
    t = float(t)
    return matrix_function(
        m, lambda w: np.power(w, t), domain=(0.0, np.inf), open_lower=True,
        name=f"x**{t}",
    )


def matrix_sqrt(m) -> np.ndarray:
    """Principal square root of a positive-definite Hermitian matrix."""
    return matrix_power_pd(m, 0.5)


def matrix_inv_sqrt(m) -> np.ndarray:
    """Inverse principal square root of a positive-definite matrix."""
    return matrix_power_pd(m, -0.5)


def singular_values(m) -> np.ndarray:
    """Singular values in descending order.

    The squares agree with the eigenvalues of ``m* m``; tests cross-check
    that identity against the Hermitian eigensolver.
    """
    a = as_complex_matrix(m)
    return np.linalg.svd(a, compute_uv=False)


def operator_norm(m) -> float:
    """Largest singular value."""
    return float(singular_values(m)[0])


def schatten_norm(m, p: float) -> float:
    """Schatten p-norm ``(sum sigma_i**p) ** (1/p)``.

    Parameters
    ----------
    m : array_like
        Any square complex matrix.
    p : float
        Exponent, restricted to the open interval (1, inf); p <= 1 and the
        sup norm are rejected.
    """
    p = check_exponent(p)
    sv = singular_values(m)
    top = float(sv[0])
    if top == 0.0:
        return 0.0
    # Factor out the largest singular value to keep powers in range.
    return float(top * np.sum((sv / top) ** p) ** (1.0 / p))


def schatten_from_values(values, p: float) -> float:
    """Schatten p-norm of a diagonal matrix given its (real) diagonal."""
    p = check_exponent(p)
    av = np.abs(np.asarray(values, dtype=np.float64))
    top = float(av.max(initial=0.0))
    if top == 0.0:
        return 0.0
    return float(top * np.sum((av / top) ** p) ** (1.0 / p))


def polar_decompose(g) -> PolarDecomposition:
    """Polar decomposition ``g = u @ p`` with ``u`` unitary, ``p`` PSD.

    ``p = (g* g) ** (1/2)`` and ``u = g p**-1``, computed through the SVD.
    Near-singular inputs (relative to ``SINGULARITY_RTOL``) are rejected
    because the unitary factor is then ill-defined.
    """
    a = as_complex_matrix(g, name="polar input")
    w, sv, vh = np.linalg.svd(a)
    if sv[0] == 0.0 or sv[-1] <= SINGULARITY_RTOL * sv[0]:
        raise ConditioningError(
            f"matrix is numerically singular, smallest singular value {sv[-1]:.3e}",
            smallest_singular_value=float(sv[-1]),
        )
    unitary = w @ vh
    positive = hermitian_part((vh.conj().T * sv) @ vh)
    return PolarDecomposition(unitary, positive)


def check_invertible(g, name: str = "matrix") -> np.ndarray:
    """Validate invertibility at the library-wide relative cutoff."""
    a = as_complex_matrix(g, name=name)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= SINGULARITY_RTOL * sv[0]:
        raise ConditioningError(
            f"{name} is numerically singular, smallest singular value {sv[-1]:.3e}",
            smallest_singular_value=float(sv[-1]),
        )
    return a


def unitary_defect(u) -> float:
    """Entrywise defect ``max|u* u - I|``."""
    a = as_complex_matrix(u, name="unitary candidate")
    n = a.shape[0]
    return max_abs(a.conj().T @ a - np.eye(n))


def psd_order_check(a, b, order_tol: float = ORDER_TOL) -> OrderCheck:
    """Check the Loewner order ``a <= b``.

    Returns
    -------
    OrderCheck
        ``margin`` is the smallest eigenvalue of ``b - a``; ``holds`` means
        ``margin >= -order_tol``.
    """
    ah = to_hermitian(a, name="order lhs")
    bh = to_hermitian(b, name="order rhs")
    check_square_same_dim(ah, bh)
    w = np.linalg.eigvalsh(bh - ah)
    margin = float(w[0])
    return OrderCheck(bool(margin >= -order_tol), margin)


def is_positive_definite(m, tol: float = 0.0) -> bool:
    """Cheap positive-definiteness test through Cholesky."""
    a = to_hermitian(m)
    if tol > 0.0:
        a = a - tol * np.eye(a.shape[0])
    try:
        np.linalg.cholesky(a)
        return True
    except np.linalg.LinAlgError:
        return False


def assert_positive_definite(m, name: str = "matrix") -> np.ndarray:
    """Validate positive definiteness, returning the Hermitian part."""
    a = to_hermitian(m, name=name)
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        wmin = float(np.linalg.eigvalsh(a)[0])
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (smallest eigenvalue {wmin:.6e})"
        ) from None
    return a
