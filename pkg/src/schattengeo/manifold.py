"""Geometry of positive-definite matrices under Schatten p-norms.

Points are Hermitian positive-definite matrices with a Schatten exponent
p in (1, inf) attached. The metric is

    d_p(a, b) = || log(a**-1/2 b a**-1/2) ||_p,

with geodesics t -> a**1/2 (a**-1/2 b a**-1/2)**t a**1/2. Invertible
matrices act isometrically by g . a = (g**-1)* a g**-1. The module also
provides the margin checkers for the p-Busemann inequality (the convexity
estimate with exponent r = max(p, 2)) and for the exponential metric
increasing inequality.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import linalg
from .exceptions import (
    DimensionMismatchError,
    ExponentError,
    NotPositiveDefiniteError,
    ValidationError,
)

logger = logging.getLogger(__name__)


class MarginRecord(NamedTuple):
    """Machine-readable inequality check: ``margin = rhs - lhs >= 0``."""

    lhs: float
    rhs: float
    margin: float


@dataclass(frozen=True)
class PDPoint:
    """Positive-definite Hermitian matrix with its Schatten exponent.

    Instances are immutable; the eigendecomposition and the derived
    square roots, logarithm and inverse are computed once and cached.
    """

    mat: np.ndarray
    p: float

    def __post_init__(self):
        p = linalg.check_exponent(self.p)
        a = linalg.assert_positive_definite(self.mat, name="point matrix")
        a.setflags(write=False)
        object.__setattr__(self, "mat", a)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @staticmethod
    def identity(n: int, p: float) -> "PDPoint":
        return PDPoint(np.eye(n, dtype=np.complex128), p)

    @cached_property
    def spectrum(self) -> linalg.SpectralDecomposition:
        return linalg.hermitian_eig(self.mat)

    def _apply(self, f) -> np.ndarray:
        w, v = self.spectrum
        return linalg.hermitian_part((v * f(w)) @ v.conj().T)

    @cached_property
    def sqrt(self) -> np.ndarray:
        return self._apply(np.sqrt)

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return self._apply(lambda w: 1.0 / np.sqrt(w))

    @cached_property
    def inv(self) -> np.ndarray:
        return self._apply(lambda w: 1.0 / w)

    @cached_property
    def log(self) -> np.ndarray:
        return self._apply(np.log)

    def identity_defect(self) -> float:
        """Schatten distance ||a - id||_p to the identity."""
        return linalg.schatten_norm(self.mat - np.eye(self.n), self.p)

    def power(self, t: float) -> "PDPoint":
        """Point with matrix ``a ** t`` (same exponent p)."""
        t = float(t)
        return PDPoint(self._apply(lambda w: np.power(w, t)), self.p)

    def with_matrix(self, mat) -> "PDPoint":
        return PDPoint(mat, self.p)


@dataclass(frozen=True)
class TangentVector:
    """Hermitian tangent vector attached to a base point."""

    base: PDPoint
    sym: np.ndarray

    def __post_init__(self):
        x = linalg.to_hermitian(self.sym, name="tangent matrix")
        if x.shape != self.base.mat.shape:
            raise DimensionMismatchError(
                f"tangent shape {x.shape} vs base {self.base.mat.shape}"
            )
        x.setflags(write=False)
        object.__setattr__(self, "sym", x)


def check_compatible(a: PDPoint, b: PDPoint) -> None:
    if a.n != b.n:
        raise DimensionMismatchError(f"points live on n={a.n} and n={b.n}")
    if a.p != b.p:
        raise ExponentError(f"points carry exponents p={a.p} and p={b.p}")


def _relative_log_eigs(a: PDPoint, b: PDPoint) -> np.ndarray:
    # Eigenvalues of a**-1/2 b a**-1/2 are positive; their logs drive d_p.
    m = linalg.hermitian_part(a.inv_sqrt @ b.mat @ a.inv_sqrt)
    w = np.linalg.eigvalsh(m)
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"relative spectrum lost positivity ({w[0]:.3e}); "
            "points too ill-conditioned"
        )
    return np.log(w)


def distance(a: PDPoint, b: PDPoint) -> float:
    """Schatten-p geodesic distance ``||log(a**-1/2 b a**-1/2)||_p``."""
    check_compatible(a, b)
    return linalg.schatten_from_values(_relative_log_eigs(a, b), a.p)


def geodesic(a: PDPoint, b: PDPoint, t: float) -> PDPoint:
    """Point ``gamma_{a,b}(t) = a**1/2 (a**-1/2 b a**-1/2)**t a**1/2``.

    Parameters t outside [0, 1] extrapolate along the same curve; this is
    permitted but flagged in the debug log.
    """
    check_compatible(a, b)
    t = float(t)
    if not np.isfinite(t):
        raise ValidationError(f"geodesic parameter must be finite, got {t}")
    if t < 0.0 or t > 1.0:
        logger.debug("geodesic parameter %s outside [0, 1]: extrapolating", t)
    m = linalg.hermitian_part(a.inv_sqrt @ b.mat @ a.inv_sqrt)
    w, v = np.linalg.eigh(m)
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"relative spectrum lost positivity ({w[0]:.3e})"
        )
    core = (v * np.power(w, t)) @ v.conj().T
    return a.with_matrix(a.sqrt @ core @ a.sqrt)


def log_map(a: PDPoint, b: PDPoint) -> TangentVector:
    """Tangent vector at ``a`` pointing to ``b`` along the geodesic."""
    check_compatible(a, b)
    m = linalg.hermitian_part(a.inv_sqrt @ b.mat @ a.inv_sqrt)
    return TangentVector(a, a.sqrt @ linalg.matrix_log(m) @ a.sqrt)


def exp_map(v: TangentVector) -> PDPoint:
    """Geodesic exponential; inverse of ``log_map`` at the same base."""
    a = v.base
    inner = linalg.hermitian_part(a.inv_sqrt @ v.sym @ a.inv_sqrt)
    return a.with_matrix(a.sqrt @ linalg.matrix_exp(inner) @ a.sqrt)


def finsler_norm(v: TangentVector) -> float:
    """Base-point norm ``|| a**-1/2 X a**-1/2 ||_p`` of a tangent vector."""
    a = v.base
    inner = linalg.hermitian_part(a.inv_sqrt @ v.sym @ a.inv_sqrt)
    w = np.linalg.eigvalsh(inner)
    return linalg.schatten_from_values(w, a.p)


def cartan_symmetry(a: PDPoint, b: PDPoint) -> PDPoint:
    """Point symmetry ``sigma_a(b) = a b**-1 a`` around ``a``."""
    check_compatible(a, b)
    return a.with_matrix(a.mat @ b.inv @ a.mat)


def group_act(g, a: PDPoint) -> PDPoint:
    """Congruence action ``g . a = (g**-1)* a g**-1`` of invertibles."""
    gm = linalg.check_invertible(g, name="group element")
    if gm.shape != a.mat.shape:
        raise DimensionMismatchError(
            f"group element shape {gm.shape} vs point {a.mat.shape}"
        )
    gi = np.linalg.inv(gm)
    return a.with_matrix(gi.conj().T @ a.mat @ gi)


def ext_group_defect(g, p: float) -> float:
    """Distance ``||g* g - id||_p`` of g from the isometry group core.

    Finite exactly when g belongs to the Schatten perturbation class of the
    unitary group; at finite dimension it quantifies how far g is from
    acting unitarily.
    """
    p = linalg.check_exponent(p)
    gm = linalg.as_complex_matrix(g, name="group element")
    return linalg.schatten_norm(gm.conj().T @ gm - np.eye(gm.shape[0]), p)


@dataclass(frozen=True)
class BusemannConstants:
    """Exponent and coefficient of the p-Busemann comparison inequality.

    power ``r = max(p, 2)``; coefficient ``c = p - 1`` when r == 2 and
    ``c = 2**-(p-2)`` otherwise. Both branches give c = 1 at p = 2 and the
    coefficient is positive for every admissible p.
    """

    p: float
    power: float = field(init=False)
    coeff: float = field(init=False)

    def __post_init__(self):
        p = linalg.check_exponent(self.p)
        object.__setattr__(self, "p", p)
        r = max(p, 2.0)
        c = (p - 1.0) if r == 2.0 else 2.0 ** (-(p - 2.0))
        object.__setattr__(self, "power", r)
        object.__setattr__(self, "coeff", c)


def busemann_margin(x: PDPoint, g0: PDPoint, g1: PDPoint) -> MarginRecord:
    """Margin of the p-Busemann inequality for the triple (x, g0, g1).

    With m the geodesic midpoint of (g0, g1), r and c the comparison
    constants for p:

        lhs = d(x, m)**r
        rhs = (d(x,g0)**r + d(x,g1)**r) / 2 - c/4 * d(g0,g1)**r

    The space satisfies margin = rhs - lhs >= 0; the checker returns the
    computed record and never decides.
    """
    check_compatible(x, g0)
    check_compatible(x, g1)
    consts = BusemannConstants(x.p)
    r = consts.power
    d0 = distance(x, g0)
    d1 = distance(x, g1)
    d01 = distance(g0, g1)
    mid = geodesic(g0, g1, 0.5)
    dm = distance(x, mid)
    lhs = dm**r
    rhs = 0.5 * (d0**r + d1**r) - 0.25 * consts.coeff * d01**r
    return MarginRecord(lhs, rhs, rhs - lhs)


def emi_margin(a: PDPoint, b: PDPoint) -> MarginRecord:
    """Margin of the exponential-metric-increasing inequality.

        || log a - log b ||_p <= d_p(a, b)

    lhs is the flat log-difference norm, rhs the geodesic distance.
    """
    check_compatible(a, b)
    lhs = linalg.schatten_norm(a.log - b.log, a.p)
    rhs = distance(a, b)
    return MarginRecord(lhs, rhs, rhs - lhs)


def normalize_pair(a: PDPoint, b: PDPoint) -> tuple[np.ndarray, np.ndarray]:
    """Group element moving (a, b) to (id, diagonal).

    Returns (g, d) with ``g . a = id`` and ``g . b = diag(d)``; g factors
    as u a**1/2 where u diagonalizes the relative matrix a**-1/2 b a**-1/2,
    and d holds its eigenvalues ascending.
    """
    check_compatible(a, b)
    m = linalg.hermitian_part(a.inv_sqrt @ b.mat @ a.inv_sqrt)
    w, v = linalg.hermitian_eig(m)
    g = v.conj().T @ a.sqrt
    return g, w
