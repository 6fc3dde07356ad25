"""Orbits, circumcenters and unitarizers for matrix groups acting on the cone.

A finitely generated group of invertible matrices acts by g . a =
(g**-1)* a g**-1. When the orbit of the identity is bounded, its
circumcenter e is a fixed point of the whole group and s = e**-1/2
conjugates the group into the unitaries. This module implements the orbit
expansion, the two-sided log/gap constants certifying orbit boundedness,
the minimax circumcenter solver, the unitarization pipeline built from it,
and the commutant machinery that certifies irreducibility or exhibits an
invariant subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import linalg
from .exceptions import (
    BudgetError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    PreconditionError,
    UnboundedOrbitError,
    ValidationError,
)
from .manifold import PDPoint, distance, geodesic, group_act

DEDUP_TOL = 1e-9
POINT_CAP = 20000
MAX_WORD_LEN = 8
COMMUTANT_NULL_TOL_PER_N = 1e-9


@dataclass(frozen=True)
class GroupPresentation:
    """Finitely generated matrix group given by its generators.

    generators: invertible complex matrices, one common dimension.
    p: Schatten exponent carried into every metric computation.
    includes_inverses: set when the generator list is already closed under
    inverses, in which case orbit expansion does not add them again.
    """

    generators: tuple
    p: float
    includes_inverses: bool = False

    def __post_init__(self):
        p = linalg.check_exponent(self.p)
        gens = tuple(
            linalg.check_invertible(g, name=f"generator {i}")
            for i, g in enumerate(self.generators)
        )
        if not gens:
            raise ValidationError("group needs at least one generator")
        n = gens[0].shape[0]
        for g in gens:
            if g.shape[0] != n:
                raise DimensionMismatchError("generators of mixed dimension")
        for g in gens:
            g.setflags(write=False)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.generators[0].shape[0]

    def symmetric_generators(self) -> tuple:
        if self.includes_inverses:
            return self.generators
        out = list(self.generators)
        out.extend(np.linalg.inv(g) for g in self.generators)
        return tuple(out)

    def conjugated(self, m) -> "GroupPresentation":
        """Presentation with generators m g m**-1."""
        mm = linalg.check_invertible(m, name="conjugator")
        mi = np.linalg.inv(mm)
        return GroupPresentation(
            tuple(mm @ g @ mi for g in self.generators),
            self.p,
            self.includes_inverses,
        )


@dataclass(frozen=True)
class Orbit:
    """Orbit ball of a base point: points, word lengths, truncation flag."""

    points: tuple
    word_lengths: tuple
    base: PDPoint
    truncated: bool

    def __len__(self) -> int:
        return len(self.points)


def _batched_log_eigs(mats: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(mats)
    if np.min(w) <= 0.0:
        raise NotPositiveDefiniteError("batched relative spectrum lost positivity")
    return np.log(w)


def _schatten_rows(values: np.ndarray, p: float) -> np.ndarray:
    av = np.abs(values)
    top = av.max(axis=-1)
    safe = np.where(top == 0.0, 1.0, top)
    s = safe * np.sum((av / safe[..., None]) ** p, axis=-1) ** (1.0 / p)
    return np.where(top == 0.0, 0.0, s)


class _Cloud:
    """Fixed point cloud with batched distance evaluation from a moving center."""

    def __init__(self, points: Sequence[PDPoint]):
        self.p = points[0].p
        self.inv_sqrts = np.stack([pt.inv_sqrt for pt in points])
        self.size = len(points)

    def distances(self, center_mat: np.ndarray) -> np.ndarray:
        m = self.inv_sqrts @ center_mat @ self.inv_sqrts
        m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
        return _schatten_rows(_batched_log_eigs(m), self.p)


def orbit_ball(
    group: GroupPresentation,
    base: PDPoint,
    max_word_len: int = MAX_WORD_LEN,
    dedup_tol: float = DEDUP_TOL,
    point_cap: int = POINT_CAP,
) -> Orbit:
    """Expand the orbit of ``base`` under words in the generators.

    Breadth-first over word length. New candidates are deduplicated at
    metric tolerance ``dedup_tol``; the sorted-log-spectrum l_p distance is
    a lower bound for d_p, so it screens out clear non-duplicates before
    any exact distance is computed. Expansion stops early when one level
    adds nothing (the orbit closed), sets ``truncated`` when the word cap
    is hit while still growing, and raises ``BudgetError`` past
    ``point_cap`` points.
    """
    if base.n != group.n:
        raise DimensionMismatchError("base point and group dimension differ")
    if base.p != group.p:
        raise ValidationError("base point and group exponent differ")
    if max_word_len < 0 or point_cap < 1:
        raise ValidationError("budgets must be positive")
    inv_actions = [np.linalg.inv(g) for g in group.symmetric_generators()]

    points = [base]
    lengths = [0]
    w0, _ = base.spectrum
    logspecs = [np.log(w0)]
    frontier = [0]
    truncated = False
    for level in range(1, max_word_len + 1):
        new_frontier: list[int] = []
        for idx in frontier:
            src = points[idx].mat
            for gi in inv_actions:
                cand_mat = linalg.hermitian_part(gi.conj().T @ src @ gi)
                w = np.linalg.eigvalsh(cand_mat)
                if w[0] <= 0.0:
                    raise NotPositiveDefiniteError(
                        "orbit point lost positive definiteness"
                    )
                logs = np.log(w)
                lower = _schatten_rows(
                    logs[np.newaxis, :] - np.stack(logspecs), group.p
                )
                dup = False
                close = np.nonzero(lower <= dedup_tol)[0]
                if close.size:
                    cand = PDPoint(cand_mat, group.p)
                    for j in close:
                        if distance(points[int(j)], cand) <= dedup_tol:
                            dup = True
                            break
                if dup:
                    continue
                points.append(PDPoint(cand_mat, group.p))
                lengths.append(level)
                logspecs.append(logs)
                new_frontier.append(len(points) - 1)
                if len(points) > point_cap:
                    raise BudgetError(
                        f"orbit exceeded {point_cap} points at word length {level}"
                    )
        frontier = new_frontier
        if not frontier:
            break
    else:
        truncated = bool(frontier)
    return Orbit(tuple(points), tuple(lengths), base, truncated)


def displacement(group: GroupPresentation, a: PDPoint) -> float:
    """Largest move ``max_g d_p(g . a, a)`` over the generators."""
    return max(distance(group_act(g, a), a) for g in group.generators)


@dataclass(frozen=True)
class OrbitBoundConstants:
    """Two-sided scalar comparison constants for a bounded orbit.

    For a group with ``sup ||h* h - id||_p <= bound`` the eigenvalues x of
    any h* h satisfy, on the proof intervals,

        |log x| <= ratio_upper * |x - 1|   on [1/(bound+1), bound+1]
        |log x| >= ratio_lower * |x - 1|   on [exp(-bound), exp(bound)]

    so log(h* h) inherits the p-norm bound (up to ratio_upper) and bounds
    it back (up to 1/ratio_lower). Both constants are certified here by a
    scalar grid check whose worst margins are recorded.
    """

    bound: float
    ratio_upper: float
    ratio_lower: float
    p: float
    grid_points: int
    upper_margin: float
    lower_margin: float


def orbit_bound_constants(
    C: float, p: float, grid_points: int = 100_000
) -> OrbitBoundConstants:
    """Constants for orbit bound C with a grid certificate.

    ratio_upper = (C+1) log(C+1) / C is the maximum of |log x| / |x - 1|
    on [1/(C+1), C+1]; ratio_lower = C / (exp(C) - 1) is its minimum on
    [exp(-C), exp(C)]. Both tend to 1 as C -> 0 and the invariants
    ratio_upper >= 1 >= ratio_lower > 0 always hold.
    """
    p = linalg.check_exponent(p)
    C = float(C)
    if not np.isfinite(C) or C < 0.0:
        raise ValidationError(f"orbit bound must be a finite nonnegative real, got {C}")
    if grid_points < 2:
        raise ValidationError("grid needs at least two points")
    if C == 0.0:
        d1 = 1.0
        d2 = 1.0
        up_margin = 0.0
        lo_margin = 0.0
    else:
        d1 = (C + 1.0) * np.log(C + 1.0) / C
        d2 = C / np.expm1(C)
        xs = np.linspace(1.0 / (C + 1.0), C + 1.0, grid_points)
        up = d1 * np.abs(xs - 1.0) - np.abs(np.log(xs))
        up_margin = float(up.min())
        xs = np.linspace(np.exp(-C), np.exp(C), grid_points)
        lo = np.abs(np.log(xs)) - d2 * np.abs(xs - 1.0)
        lo_margin = float(lo.min())
        slack = -1e-12 * max(1.0, d1)
        if up_margin < slack or lo_margin < slack:
            raise ValidationError(
                f"scalar grid certificate failed: margins {up_margin:.3e}, "
                f"{lo_margin:.3e}"
            )
    return OrbitBoundConstants(
        bound=C,
        ratio_upper=float(d1),
        ratio_lower=float(d2),
        p=p,
        grid_points=grid_points,
        upper_margin=up_margin,
        lower_margin=lo_margin,
    )


class DominationCheck(NamedTuple):
    """Check of ``||h*h - id||_p <= 2**(1/p + 1) ||c - id||_p``."""

    lhs: float
    rhs: float
    margin: float
    holds: bool


def defect_domination_check(
    h, c: PDPoint, order_tol: float = linalg.ORDER_TOL
) -> DominationCheck:
    """Bound the unitarity defect of h by a dominating form c.

    Preconditions (checked): ``h* h <= c`` and ``c >= id`` in the Loewner
    order. Then the Schatten defect of h* h from the identity is at most
    ``2**(1/p + 1)`` times the defect of c.
    """
    hm = linalg.as_complex_matrix(h, name="group element")
    if hm.shape != c.mat.shape:
        raise DimensionMismatchError("element and dominating form differ in size")
    hh = linalg.hermitian_part(hm.conj().T @ hm)
    eye = np.eye(c.n)
    chk = linalg.psd_order_check(hh, c.mat, order_tol)
    if not chk.holds:
        raise PreconditionError(
            f"h* h <= c fails with margin {chk.margin:.3e}"
        )
    chk = linalg.psd_order_check(eye, c.mat, order_tol)
    if not chk.holds:
        raise PreconditionError(f"c >= id fails with margin {chk.margin:.3e}")
    lhs = linalg.schatten_norm(hh - eye, c.p)
    rhs = 2.0 ** (1.0 / c.p + 1.0) * linalg.schatten_norm(c.mat - eye, c.p)
    margin = rhs - lhs
    return DominationCheck(lhs, rhs, margin, bool(margin >= -1e-9))


@dataclass(frozen=True)
class CircumcenterConfig:
    tol: float = 1e-8
    max_iter: int = 5000
    march_iters: int = 128
    march_patience: int = 16
    line_search_base: float = 0.5

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1 or self.march_iters < 0:
            raise ValidationError("circumcenter budgets must be positive")


@dataclass(frozen=True)
class CircumcenterResult:
    center: PDPoint
    radius: float
    iterations: int
    residual: float
    converged: bool
    radius_history: tuple


def _enclosing_radius(cloud: _Cloud, c: PDPoint) -> float:
    return float(cloud.distances(c.mat).max())


def _min_norm_hull_weights(gram: np.ndarray, iters: int = 200) -> np.ndarray:
    """Weights of the min-norm point of the convex hull with Gram matrix.

    Frank-Wolfe with exact line search on q(w) = w' G w over the simplex;
    enough accuracy for a descent direction, not a certified optimum.
    """
    k = gram.shape[0]
    w = np.full(k, 1.0 / k)
    for _ in range(iters):
        g = gram @ w
        s = int(np.argmin(g))
        diff = w.copy()
        diff[s] -= 1.0
        denom = float(diff @ gram @ diff)
        if denom <= 0.0:
            break
        gamma = float(np.clip((w @ gram @ diff) / denom, 0.0, 1.0))
        if gamma <= 0.0:
            break
        w = w - gamma * diff
    return w


def circumcenter(
    points: Sequence[PDPoint], cfg: Optional[CircumcenterConfig] = None
) -> CircumcenterResult:
    """Minimax center of a finite point cloud.

    Farthest-point marching (step 1/(k+2) toward the current farthest
    point, ties to the lowest index) followed by a monotone polishing pass:
    shrinking-step line searches along the geodesics toward the farthest
    point, toward the midpoint of the two farthest points, and toward a
    tangent-space average of all points pinning the current radius,
    accepting only strict radius decreases. Stops when one full polishing
    sweep improves the radius by less than ``tol`` or the evaluation
    budget runs out. Every step is intrinsic (distances, geodesics, index
    tie-breaks), so the algorithm commutes with the isometric group action
    up to floating point noise.
    """
    pts = list(points)
    if not pts:
        raise ValidationError("circumcenter of an empty cloud")
    p = pts[0].p
    for q in pts[1:]:
        if q.n != pts[0].n or q.p != p:
            raise DimensionMismatchError("cloud points are incompatible")
    if cfg is None:
        cfg = CircumcenterConfig()
    if len(pts) == 1:
        return CircumcenterResult(pts[0], 0.0, 0, 0.0, True, (0.0,))

    cloud = _Cloud(pts)
    c = pts[0]
    d = cloud.distances(c.mat)
    far = int(np.argmax(d))
    r = float(d[far])
    best_c, best_r = c, r
    history = [r]
    iters = 0

    since_improve = 0
    for k in range(cfg.march_iters):
        if iters >= cfg.max_iter:
            break
        c = geodesic(c, pts[far], 1.0 / (k + 2.0))
        iters += 1
        d = cloud.distances(c.mat)
        far = int(np.argmax(d))
        r = float(d[far])
        history.append(r)
        if r < best_r:
            best_c, best_r = c, r
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= cfg.march_patience:
                break

    c = best_c
    converged = False
    residual = float("inf")
    while iters < cfg.max_iter:
        d = cloud.distances(c.mat)
        order = np.argsort(-d, kind="stable")
        far = int(order[0])
        r_c = float(d[far])
        targets = []
        if len(pts) > 1:
            # steepest minimax descent: walk along the min-norm element of
            # the convex hull of the whitened log directions toward the
            # points pinning the radius; with one active point this is the
            # farthest-point march, with several it is the only direction
            # that decreases the max distance
            isq = c.inv_sqrt
            wlogs = {}
            for window in (0.1, 1e-3, 1e-6):
                idx = np.nonzero(d >= r_c * (1.0 - window))[0]
                if idx.size < 2 or idx.size > 64:
                    continue
                for i in idx:
                    if int(i) not in wlogs:
                        # first variation of d_p along the whitened move is
                        # paired against the p-norming functional of the
                        # log, not the log itself (they agree only at p=2)
                        wl = linalg.matrix_log(isq @ pts[int(i)].mat @ isq)
                        ev, vec = linalg.hermitian_eig(wl)
                        fn = np.abs(ev) ** (p - 1.0) * np.sign(ev)
                        wlogs[int(i)] = linalg.hermitian_part(
                            (vec * fn) @ vec.conj().T
                        )
                units = []
                for i in idx:
                    w = wlogs[int(i)]
                    nrm = float(np.linalg.norm(w))
                    if nrm > 0.0:
                        units.append(w / nrm)
                if len(units) < 2:
                    continue
                stack = np.stack(units)
                gram = np.einsum("aij,bji->ab", stack, stack).real
                lam = _min_norm_hull_weights(gram)
                direction = np.tensordot(lam, stack, axes=(0, 0))
                dn = float(np.linalg.norm(direction))
                if dn <= 1e-14:
                    continue
                step = (r_c / dn) * direction
                cand = c.sqrt @ linalg.matrix_exp(step) @ c.sqrt
                targets.append(PDPoint(linalg.hermitian_part(cand), p))
        targets.append(pts[far])
        if len(pts) > 1:
            targets.append(geodesic(pts[far], pts[int(order[1])], 0.5))
        # take the best improvement over the whole menu; accepting the
        # first positive gain can lock onto a nearly flat direction and
        # report convergence while a different target still descends
        gain = 0.0
        best_cand = None
        t_min = max(1e-13, cfg.tol / (16.0 * (1.0 + r_c)))
        for target in targets:
            t = cfg.line_search_base
            while t >= t_min and iters < cfg.max_iter:
                cand = geodesic(c, target, t)
                iters += 1
                r_new = float(cloud.distances(cand.mat).max())
                if r_new < r_c - gain:
                    gain = r_c - r_new
                    best_cand = cand
                if r_new < r_c:
                    break
                t *= 0.5
        if best_cand is not None:
            c = best_cand
            history.append(r_c - gain)
        residual = gain
        if gain < cfg.tol:
            converged = iters < cfg.max_iter
            break

    radius = _enclosing_radius(cloud, c)
    return CircumcenterResult(
        c, radius, iters, residual, converged, tuple(history)
    )


def _frechet_mean_sq(points: Sequence[PDPoint], iters: int = 80, tol: float = 1e-14) -> PDPoint:
    # Fixed-point iteration for the d_2 Frechet mean of a finite cloud; the
    # mean of a group-invariant cloud is exactly group-fixed (equivariance
    # plus uniqueness), which is what the unitarize refinement exploits.
    mats = np.stack([pt.mat for pt in points])
    x = points[0]
    for _ in range(iters):
        xs, xis = x.sqrt, x.inv_sqrt
        m = xis @ mats @ xis
        m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
        w, v = np.linalg.eigh(m)
        if np.min(w) <= 0.0:
            raise NotPositiveDefiniteError("mean iteration lost positivity")
        logs = (v * np.log(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
        step = linalg.hermitian_part(np.mean(logs, axis=0))
        x = x.with_matrix(xs @ linalg.matrix_exp(step) @ xs)
        if linalg.max_abs(step) < tol:
            break
    return x


@dataclass(frozen=True)
class UnitarizeConfig:
    max_word_len: int = MAX_WORD_LEN
    dedup_tol: float = DEDUP_TOL
    point_cap: int = POINT_CAP
    displacement_tol: float = 1e-6
    circum: CircumcenterConfig = field(
        default_factory=lambda: CircumcenterConfig(tol=1e-11, max_iter=20000)
    )
    refine: bool = True


@dataclass(frozen=True)
class UnitarizationResult:
    """Fixed point e, unitarizer s = e**-1/2 and their quality figures."""

    fixed_point: PDPoint
    unitarizer: PDPoint
    displacement: float
    unitarity_defect: float
    radius: float
    orbit_size: int
    orbit_truncated: bool
    iterations: int
    refined: bool


def _unitarity_defect(group: GroupPresentation, s: PDPoint) -> float:
    s_inv = s.inv
    s_mat = s.mat
    return max(
        linalg.unitary_defect(s_inv @ g @ s_mat) for g in group.generators
    )


def unitarize(
    group: GroupPresentation, cfg: Optional[UnitarizeConfig] = None
) -> UnitarizationResult:
    """Positive unitarizer from the circumcenter of the identity orbit.

    Expands the orbit of the identity, takes its circumcenter e (the
    fixed point provided by bounded orbits) and returns s = e**-1/2
    together with the residual displacement of e and the worst unitarity
    defect of the conjugated generators. When the orbit closes, the
    center is refined by the d_2 Frechet mean of its own orbit, which is
    exactly fixed by the group; the refinement is kept only if the
    enclosing radius does not grow beyond the polish tolerance.

    Raises
    ------
    UnboundedOrbitError
        If the expansion is truncated (word cap or point cap) and the
        candidate center still moves more than ``displacement_tol``.
    """
    if cfg is None:
        cfg = UnitarizeConfig()
    base = PDPoint.identity(group.n, group.p)
    try:
        orbit = orbit_ball(
            group,
            base,
            max_word_len=cfg.max_word_len,
            dedup_tol=cfg.dedup_tol,
            point_cap=cfg.point_cap,
        )
    except BudgetError as exc:
        raise UnboundedOrbitError(
            f"orbit blew past the point cap: {exc}; the orbit looks unbounded",
            orbit_size=cfg.point_cap,
        ) from exc

    res = circumcenter(orbit.points, cfg.circum)
    e = res.center
    disp = displacement(group, e)
    if orbit.truncated and disp > cfg.displacement_tol:
        raise UnboundedOrbitError(
            f"orbit truncated at word length {cfg.max_word_len} with center "
            f"displacement {disp:.3e}; the orbit looks unbounded",
            displacement=disp,
            orbit_size=len(orbit),
        )

    cloud = _Cloud(orbit.points)
    radius = _enclosing_radius(cloud, e)
    refined = False
    if cfg.refine and not orbit.truncated and len(orbit) > 1:
        center_orbit = orbit_ball(
            group,
            e,
            max_word_len=cfg.max_word_len + 4,
            dedup_tol=cfg.dedup_tol,
            point_cap=cfg.point_cap,
        )
        if not center_orbit.truncated and len(center_orbit) > 1:
            cand = _frechet_mean_sq(center_orbit.points)
            r_cand = _enclosing_radius(cloud, cand)
            if r_cand <= radius + 10.0 * cfg.circum.tol:
                cand_disp = displacement(group, cand)
                if cand_disp < disp:
                    e, disp, radius, refined = cand, cand_disp, r_cand, True

    s = e.power(-0.5)
    defect = _unitarity_defect(group, s)
    return UnitarizationResult(
        fixed_point=e,
        unitarizer=s,
        displacement=disp,
        unitarity_defect=defect,
        radius=radius,
        orbit_size=len(orbit),
        orbit_truncated=orbit.truncated,
        iterations=res.iterations,
        refined=refined,
    )


class FixedPointCheck(NamedTuple):
    """Agreement between the unitarizer and fixed-point characterizations."""

    is_unitarizer: bool
    is_fixed_point: bool
    agree: bool
    unitarity_defect: float
    displacement: float


def fixed_point_check(
    s: PDPoint, group: GroupPresentation, tol: float = 1e-8
) -> FixedPointCheck:
    """Check both sides of: s unitarizes H iff s**-2 is fixed by H."""
    if s.n != group.n:
        raise DimensionMismatchError("unitarizer and group dimension differ")
    defect = _unitarity_defect(group, s)
    fixed_candidate = s.power(-2.0)
    disp = displacement(group, fixed_candidate)
    is_unit = bool(defect <= tol)
    is_fixed = bool(disp <= tol)
    return FixedPointCheck(is_unit, is_fixed, is_unit == is_fixed, defect, disp)


def _hermitian_basis(n: int) -> np.ndarray:
    # Orthonormal real basis of Hermitian n x n matrices: diagonal units,
    # then for i < j the real and imaginary pair units.
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = 1j * inv_sqrt2
            e[j, i] = -1j * inv_sqrt2
            basis.append(e)
    return np.stack(basis)


@dataclass(frozen=True)
class CommutantAnalysis:
    """Commutant of the generators inside the Hermitian matrices.

    basis: orthonormal Hermitian basis of the commutant, identity direction
    always first. dim == 1 certifies irreducibility when ``conclusive``.
    """

    basis: tuple
    dim: int
    spectrum: np.ndarray
    null_threshold: float
    gap: float
    conclusive: bool


def commutant_analysis(
    group: GroupPresentation, null_tol: Optional[float] = None
) -> CommutantAnalysis:
    """Hermitian commutant through the commutation Gram operator.

    Builds the positive semidefinite Gram matrix of X -> (g X - X g) over
    an orthonormal Hermitian basis, summed over the generators; its null
    space is exactly the set of Hermitian matrices commuting with every
    generator. Eigenvalues below ``null_tol`` (default 1e-9 * n) count as
    null; the analysis is flagged inconclusive when the first retained
    eigenvalue sits within a factor 10 of the threshold.
    """
    n = group.n
    tau = COMMUTANT_NULL_TOL_PER_N * n if null_tol is None else float(null_tol)
    basis = _hermitian_basis(n)
    dim2 = n * n
    gram = np.zeros((dim2, dim2), dtype=np.float64)
    for g in group.generators:
        img = g @ basis - basis @ g
        gram += np.real(np.einsum("kij,lij->kl", img.conj(), img))
    gram = 0.5 * (gram + gram.T)
    w, u = np.linalg.eigh(gram)
    k = int(np.searchsorted(w, tau, side="right"))
    k = max(k, 1)  # identity always commutes
    gap = float(w[k]) if k < dim2 else float("inf")
    conclusive = (k == dim2) or (gap >= 10.0 * tau)

    # Canonical basis: identity direction first, complement orthonormalized.
    coords = u[:, :k]
    c0 = np.zeros(dim2)
    c0[:n] = 1.0 / np.sqrt(n)
    rest = coords - np.outer(c0, c0 @ coords)
    mats = [np.eye(n, dtype=np.complex128) / np.sqrt(n)]
    if k > 1:
        q, r = np.linalg.qr(rest)
        keep = np.abs(np.diagonal(r)) > 1e-10
        q = q[:, keep][:, : k - 1]
        for j in range(q.shape[1]):
            col = q[:, j]
            piv = col[int(np.argmax(np.abs(col)))]
            if piv < 0:
                col = -col
            mats.append(np.tensordot(col, basis, axes=(0, 0)))
    return CommutantAnalysis(
        basis=tuple(mats),
        dim=k,
        spectrum=w,
        null_threshold=tau,
        gap=gap,
        conclusive=conclusive,
    )


def commutant_basis(
    group: GroupPresentation, null_tol: Optional[float] = None
) -> list:
    """Orthonormal Hermitian basis of the commutant, identity first."""
    return list(commutant_analysis(group, null_tol).basis)


@dataclass(frozen=True)
class InvariantSubspaceResult:
    """Either a verified invariant subspace, an irreducibility certificate,
    or an inconclusive flag when the commutant spectrum is borderline."""

    status: str  # "invariant_subspace" | "irreducible" | "inconclusive"
    basis: Optional[np.ndarray]
    projector_residual: float
    commutant_dim: int


def invariant_subspace(
    group: GroupPresentation,
    tol: float = 1e-8,
    unitarity_tol: float = 1e-8,
) -> InvariantSubspaceResult:
    """Proper invariant subspace from a non-scalar commutant element.

    Requires unitary generators (checked). When the commutant is more than
    the scalars, the first non-scalar basis element is eigendecomposed and
    the smallest eigenvalue cluster (ties to the smallest eigenvalue)
    spans a proper invariant subspace, verified through the projector
    residual max_g ||(1 - Q) g Q||.
    """
    for i, g in enumerate(group.generators):
        d = linalg.unitary_defect(g)
        if d > unitarity_tol:
            raise PreconditionError(
                f"generator {i} is not unitary (defect {d:.3e})"
            )
    analysis = commutant_analysis(group)
    if not analysis.conclusive:
        return InvariantSubspaceResult("inconclusive", None, float("nan"), analysis.dim)
    if analysis.dim == 1:
        return InvariantSubspaceResult("irreducible", None, 0.0, 1)

    x = analysis.basis[1]
    w, v = linalg.hermitian_eig(x)
    spread = max(1.0, float(np.max(np.abs(w))))
    cluster_tol = 1e-7 * spread
    clusters = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or w[i] - w[i - 1] > cluster_tol:
            clusters.append((start, i))
            start = i
    proper = [cl for cl in clusters if cl[1] - cl[0] < w.size]
    if not proper:
        return InvariantSubspaceResult("inconclusive", None, float("nan"), analysis.dim)
    sizes = [cl[1] - cl[0] for cl in proper]
    pick = proper[int(np.argmin(sizes))]
    q = v[:, pick[0] : pick[1]]
    proj = q @ q.conj().T
    eye = np.eye(group.n)
    residual = max(
        linalg.operator_norm((eye - proj) @ g @ proj) for g in group.generators
    )
    if residual > tol:
        return InvariantSubspaceResult("inconclusive", None, float(residual), analysis.dim)
    return InvariantSubspaceResult(
        "invariant_subspace", q, float(residual), analysis.dim
    )
