"""Group actions: orbits, bound constants, circumcenters, unitarizers."""

from __future__ import annotations

import numpy as np
import pytest

from schattengeo import linalg, sampling
from schattengeo.action import (
    CircumcenterConfig,
    GroupPresentation,
    UnitarizeConfig,
    circumcenter,
    commutant_analysis,
    commutant_basis,
    defect_domination_check,
    displacement,
    fixed_point_check,
    invariant_subspace,
    orbit_ball,
    orbit_bound_constants,
    unitarize,
)
from schattengeo.exceptions import (
    DimensionMismatchError,
    PreconditionError,
    UnboundedOrbitError,
    ValidationError,
)
from schattengeo.manifold import PDPoint, distance, geodesic, group_act

import oracles

SWAPLIKE = np.array([[0.0, 2.0], [0.5, 0.0]])


def _pt(mat, p=2.0) -> PDPoint:
    return PDPoint(np.asarray(mat, dtype=np.complex128), p)


# ---------------------------------------------------------------------------
# group presentations and orbits


def test_group_presentation_validation():
    with pytest.raises(ValidationError):
        GroupPresentation((), 2.0)
    with pytest.raises(DimensionMismatchError):
        GroupPresentation((np.eye(2), np.eye(3)), 2.0)
    g = GroupPresentation((SWAPLIKE,), 2.0)
    assert g.n == 2
    assert len(g.symmetric_generators()) == 2


def test_group_conjugated():
    g = GroupPresentation((SWAPLIKE,), 2.0)
    m = np.diag([2.0, 1.0])
    conj = g.conjugated(m)
    expect = m @ SWAPLIKE @ np.linalg.inv(m)
    assert linalg.max_abs(conj.generators[0] - expect) < 1e-14


def test_orbit_of_identity_under_unitary_is_singleton():
    g = sampling.rng(103, "orbit-unitary")
    u = sampling.random_unitary(g, 3)
    grp = GroupPresentation((u,), 2.0)
    orb = orbit_ball(grp, PDPoint.identity(3, 2.0))
    assert len(orb) == 1
    assert not orb.truncated
    assert orb.word_lengths == (0,)


def test_orbit_worked_example_closes_at_two_points():
    grp = GroupPresentation((SWAPLIKE,), 2.0)
    orb = orbit_ball(grp, PDPoint.identity(2, 2.0))
    assert len(orb) == 2
    assert not orb.truncated
    mats = sorted((o.mat for o in orb.points), key=lambda m: m[0, 0].real)
    assert linalg.max_abs(mats[0] - np.diag([0.25, 4.0])) < 1e-12
    assert linalg.max_abs(mats[1] - np.eye(2)) < 1e-12


def test_orbit_truncates_on_growing_spectrum():
    grp = GroupPresentation((np.diag([2.0, 0.5]),), 2.0)
    orb = orbit_ball(grp, PDPoint.identity(2, 2.0), max_word_len=4)
    assert orb.truncated
    assert len(orb) == 9  # diag(4**-k, 4**k) for k = -4..4


def test_orbit_mismatch_checks():
    grp = GroupPresentation((SWAPLIKE,), 2.0)
    with pytest.raises(DimensionMismatchError):
        orbit_ball(grp, PDPoint.identity(3, 2.0))
    with pytest.raises(ValidationError):
        orbit_ball(grp, PDPoint.identity(2, 3.0))


def test_displacement_examples():
    grp = GroupPresentation((SWAPLIKE,), 2.0)
    fixed = _pt(np.diag([0.5, 2.0]))
    assert displacement(grp, fixed) < 1e-14
    moved = displacement(grp, PDPoint.identity(2, 2.0))
    assert moved == pytest.approx(
        oracles.distance_oracle(np.eye(2), np.diag([0.25, 4.0]), 2.0), rel=1e-12
    )


# ---------------------------------------------------------------------------
# scalar comparison constants


def test_orbit_bound_constants_closed_forms():
    c1 = orbit_bound_constants(1.0, 2.0)
    assert c1.ratio_upper == pytest.approx(2.0 * np.log(2.0), rel=1e-13)
    assert c1.ratio_lower == pytest.approx(1.0 / (np.e - 1.0), rel=1e-13)
    c0 = orbit_bound_constants(0.0, 2.0)
    assert (c0.ratio_upper, c0.ratio_lower) == (1.0, 1.0)


def test_orbit_bound_constants_match_extremal_oracle():
    for C in (0.3, 0.7, 2.3):
        consts = orbit_bound_constants(C, 2.0)
        assert consts.ratio_upper == pytest.approx(
            oracles.ratio_upper_oracle(C), rel=1e-9
        )
        assert consts.ratio_lower == pytest.approx(
            oracles.ratio_lower_oracle(C), rel=1e-9
        )
        assert consts.ratio_upper >= 1.0 >= consts.ratio_lower > 0.0
        assert consts.upper_margin >= -1e-12 * max(1.0, consts.ratio_upper)
        assert consts.lower_margin >= -1e-12


def test_orbit_bound_constants_small_bound_tends_to_one():
    consts = orbit_bound_constants(1e-6, 2.0)
    assert consts.ratio_upper == pytest.approx(1.0, abs=1e-5)
    assert consts.ratio_lower == pytest.approx(1.0, abs=1e-5)


def test_orbit_bound_constants_validation():
    with pytest.raises(ValidationError):
        orbit_bound_constants(-0.5, 2.0)
    with pytest.raises(ValidationError):
        orbit_bound_constants(np.inf, 2.0)
    with pytest.raises(ValidationError):
        orbit_bound_constants(1.0, 2.0, grid_points=1)


def test_orbit_bound_constants_cap_matrix_norms():
    # spectra drawn inside the proof intervals; the scalar constants must
    # transfer to the Schatten norms of log(h*h) vs h*h - id
    g = sampling.rng(107, "bound-battery")
    for C in (0.5, 1.0, 3.0):
        consts = orbit_bound_constants(C, 2.0)
        for p in (1.5, 2.0, 3.0):
            for _ in range(10):
                u = sampling.random_unitary(g, 4)
                # upper route: eigenvalues of h*h inside [1/(C+1), C+1]
                x = g.uniform(1.0 / (C + 1.0), C + 1.0, size=4)
                hsh = linalg.hermitian_part((u * x) @ u.conj().T)
                lognorm = linalg.schatten_norm(linalg.matrix_log(hsh), p)
                defect = linalg.schatten_norm(hsh - np.eye(4), p)
                assert lognorm <= consts.ratio_upper * defect + 1e-10
                # lower route: eigenvalues inside [exp(-C), exp(C)]
                x = np.exp(g.uniform(-C, C, size=4))
                hsh = linalg.hermitian_part((u * x) @ u.conj().T)
                lognorm = linalg.schatten_norm(linalg.matrix_log(hsh), p)
                defect = linalg.schatten_norm(hsh - np.eye(4), p)
                assert lognorm >= consts.ratio_lower * defect - 1e-10


# ---------------------------------------------------------------------------
# defect domination


def test_defect_domination_worked_example():
    # h*h = diag(1/4, 4) <= 4 id; both sides recomputed independently
    c = _pt(4.0 * np.eye(2))
    chk = defect_domination_check(SWAPLIKE, c)
    lhs_ref = oracles.schatten_oracle(SWAPLIKE.conj().T @ SWAPLIKE - np.eye(2), 2.0)
    rhs_ref = 2.0 ** (0.5 + 1.0) * oracles.schatten_oracle(c.mat - np.eye(2), 2.0)
    assert lhs_ref == pytest.approx(np.sqrt(9.5625), rel=1e-13)
    assert rhs_ref == pytest.approx(12.0, rel=1e-13)
    assert chk.lhs == pytest.approx(lhs_ref, rel=1e-12)
    assert chk.rhs == pytest.approx(rhs_ref, rel=1e-12)
    assert chk.holds and chk.margin == pytest.approx(rhs_ref - lhs_ref, rel=1e-12)


def test_defect_domination_preconditions():
    with pytest.raises(PreconditionError, match="h\\* h <= c"):
        defect_domination_check(SWAPLIKE, PDPoint.identity(2, 2.0))
    with pytest.raises(PreconditionError, match="c >= id"):
        defect_domination_check(0.5 * np.eye(2), _pt(0.5 * np.eye(2)))


def test_defect_domination_battery():
    g = sampling.rng(109, "domination")
    for p in (1.5, 2.0, 3.0):
        for _ in range(20):
            h = sampling.random_invertible(g, 3)
            hsh = linalg.hermitian_part(h.conj().T @ h)
            shift = max(0.0, 1.0 - float(np.linalg.eigvalsh(hsh)[0]))
            c = _pt(hsh + (1e-6 + shift) * np.eye(3), p)
            chk = defect_domination_check(h, c)
            assert chk.holds
            assert chk.margin >= -1e-9


# ---------------------------------------------------------------------------
# circumcenter


def test_circumcenter_single_point():
    a = _pt(np.diag([2.0, 5.0]))
    res = circumcenter([a])
    assert res.radius == 0.0
    assert res.converged
    assert linalg.max_abs(res.center.mat - a.mat) == 0.0


def test_circumcenter_symmetric_pair():
    pts = [_pt(np.diag([4.0, 1.0])), _pt(np.diag([0.25, 1.0]))]
    res = circumcenter(pts)
    assert linalg.max_abs(res.center.mat - np.eye(2)) < 1e-7
    assert res.radius == pytest.approx(np.log(4.0), rel=1e-7)
    assert res.converged


def test_circumcenter_two_points_is_midpoint():
    g = sampling.rng(113, "circ-mid")
    for p in (1.5, 2.0, 3.0):
        a = PDPoint(sampling.random_pd_matrix(g, 3), p)
        b = PDPoint(sampling.random_pd_matrix(g, 3), p)
        res = circumcenter([a, b])
        mid = geodesic(a, b, 0.5)
        assert distance(res.center, mid) < 1e-7
        assert res.radius == pytest.approx(0.5 * distance(a, b), abs=1e-7)


def test_circumcenter_matches_brute_force_oracle():
    g = sampling.rng(127, "circ-oracle")
    for p in (2.0, 3.0):
        pts = [PDPoint(sampling.random_pd_matrix(g, 2, sigma=0.4), p) for _ in range(4)]
        res = circumcenter(pts)
        _, r_ref = oracles.circumcenter_oracle([q.mat for q in pts], p)
        assert res.radius <= r_ref + 1e-4
        assert res.radius >= r_ref - 1e-4
        # the reported radius must actually enclose the cloud
        worst = max(distance(res.center, q) for q in pts)
        assert worst <= res.radius + 1e-10


def test_circumcenter_equivariance():
    g = sampling.rng(131, "circ-equiv")
    p = 2.0
    pts = [PDPoint(sampling.random_pd_matrix(g, 2, sigma=0.4), p) for _ in range(3)]
    m = sampling.random_invertible(g, 2)
    res = circumcenter(pts)
    res_m = circumcenter([group_act(m, q) for q in pts])
    assert distance(res_m.center, group_act(m, res.center)) < 1e-5
    assert res_m.radius == pytest.approx(res.radius, abs=1e-6)


def test_circumcenter_radius_history_ends_at_optimum():
    # the march segment may oscillate (it runs on patience), but the final
    # radius can never exceed any recorded radius: the polish starts from
    # the best marched center and only accepts strict decreases
    g = sampling.rng(137, "circ-hist")
    pts = [PDPoint(sampling.random_pd_matrix(g, 2), 2.0) for _ in range(3)]
    res = circumcenter(pts)
    hist = res.radius_history
    assert hist
    assert res.radius <= min(hist) + 1e-12
    assert res.converged and res.residual < 1e-8


def test_circumcenter_rejects_empty_and_mixed():
    with pytest.raises(ValidationError):
        circumcenter([])
    with pytest.raises(ExceptionGroup if False else Exception):
        circumcenter([_pt(np.eye(2)), PDPoint(np.eye(2), 3.0)])


# ---------------------------------------------------------------------------
# unitarization


def test_unitarize_worked_example():
    grp = GroupPresentation((SWAPLIKE,), 2.0)
    res = unitarize(grp)
    assert linalg.max_abs(res.fixed_point.mat - np.diag([0.5, 2.0])) < 1e-10
    s = res.unitarizer.mat
    assert linalg.max_abs(s - np.diag([np.sqrt(2.0), 1.0 / np.sqrt(2.0)])) < 1e-10
    assert res.unitarity_defect < 1e-10
    assert res.displacement < 1e-10
    assert res.orbit_size == 2
    conj = res.unitarizer.inv @ SWAPLIKE @ s
    assert linalg.max_abs(conj - np.array([[0.0, 1.0], [1.0, 0.0]])) < 1e-10


def test_unitarize_already_unitary_group():
    g = sampling.rng(139, "unit-noop")
    u = sampling.random_unitary(g, 3)
    res = unitarize(GroupPresentation((u,), 2.0))
    assert res.orbit_size == 1
    assert linalg.max_abs(res.unitarizer.mat - np.eye(3)) < 1e-12
    assert res.unitarity_defect < 1e-12


def test_unitarize_conjugated_cyclic_group():
    g = sampling.rng(149, "unit-cyclic")
    n, order = 3, 6
    v = sampling.random_unitary(g, n)
    phases = np.exp(2j * np.pi * np.array([1, 2, 5]) / order)
    u = (v * phases) @ v.conj().T
    s0 = sampling.random_pd_matrix(g, n, sigma=0.4)
    m = linalg.matrix_sqrt(s0)
    grp = GroupPresentation((m @ u @ np.linalg.inv(m),), 2.0)
    res = unitarize(grp, UnitarizeConfig(max_word_len=12))
    assert res.unitarity_defect <= 1e-6
    assert res.displacement <= 1e-6
    assert not res.orbit_truncated
    chk = fixed_point_check(res.unitarizer, grp)
    assert chk.is_unitarizer and chk.is_fixed_point and chk.agree


def test_unitarize_unbounded_orbit_raises():
    grp = GroupPresentation((np.diag([2.0, 0.5]),), 2.0)
    with pytest.raises(UnboundedOrbitError):
        unitarize(grp, UnitarizeConfig(max_word_len=6))


# ---------------------------------------------------------------------------
# fixed-point check


def test_fixed_point_check_worked_example():
    grp = GroupPresentation((SWAPLIKE,), 2.0)
    s = _pt(np.diag([np.sqrt(2.0), 1.0 / np.sqrt(2.0)]))
    chk = fixed_point_check(s, grp)
    assert chk.is_unitarizer and chk.is_fixed_point and chk.agree
    assert chk.unitarity_defect < 1e-12
    assert chk.displacement < 1e-12
    # the identity is neither a unitarizer nor a fixed point here
    chk2 = fixed_point_check(PDPoint.identity(2, 2.0), grp)
    assert not chk2.is_unitarizer and not chk2.is_fixed_point and chk2.agree


def test_fixed_point_check_dimension_guard():
    grp = GroupPresentation((SWAPLIKE,), 2.0)
    with pytest.raises(DimensionMismatchError):
        fixed_point_check(PDPoint.identity(3, 2.0), grp)


# ---------------------------------------------------------------------------
# commutant and invariant subspaces


def test_commutant_of_trivial_group_is_everything():
    grp = GroupPresentation((np.eye(3),), 2.0)
    an = commutant_analysis(grp)
    assert an.dim == 9
    assert an.conclusive
    assert np.isinf(an.gap)


def test_commutant_of_cyclic_shift_is_circulant():
    grp = GroupPresentation((oracles.cyclic_shift(4),), 2.0)
    an = commutant_analysis(grp)
    assert an.dim == 4
    assert an.conclusive
    assert an.gap >= 1e3 * an.null_threshold
    # every basis element commutes with the shift
    s = oracles.cyclic_shift(4)
    for b in an.basis:
        assert linalg.max_abs(s @ b - b @ s) < 1e-9
    assert linalg.max_abs(an.basis[0] - np.eye(4) / 2.0) < 1e-12


def test_commutant_of_irreducible_group_is_scalar():
    shift = oracles.cyclic_shift(4)
    diag = np.diag(np.exp(2j * np.pi * np.array([0.13, 0.42, 0.71, 0.97])))
    grp = GroupPresentation((shift, diag), 2.0)
    an = commutant_analysis(grp)
    assert an.dim == 1 and an.conclusive
    assert len(commutant_basis(grp)) == 1


def test_invariant_subspace_of_permutation_group_is_ones_line():
    gens = tuple(
        oracles.permutation_matrix(perm) for perm in ([1, 2, 0], [1, 0, 2])
    )
    grp = GroupPresentation(gens, 2.0)
    res = invariant_subspace(grp)
    assert res.status == "invariant_subspace"
    assert res.basis.shape == (3, 1)
    ones = np.ones(3) / np.sqrt(3.0)
    overlap = abs(np.vdot(ones, res.basis[:, 0]))
    assert overlap == pytest.approx(1.0, abs=1e-9)
    assert res.projector_residual < 1e-10


def test_invariant_subspace_trivial_group():
    grp = GroupPresentation((np.eye(2),), 2.0)
    res = invariant_subspace(grp)
    assert res.status == "invariant_subspace"
    assert 1 <= res.basis.shape[1] < 2
    assert res.projector_residual < 1e-12


def test_invariant_subspace_irreducible_group():
    shift = oracles.cyclic_shift(4)
    diag = np.diag(np.exp(2j * np.pi * np.array([0.13, 0.42, 0.71, 0.97])))
    grp = GroupPresentation((shift, diag), 2.0)
    res = invariant_subspace(grp)
    assert res.status == "irreducible"
    assert res.basis is None
    assert res.commutant_dim == 1


def test_invariant_subspace_requires_unitary_generators():
    grp = GroupPresentation((np.diag([2.0, 1.0]),), 2.0)
    with pytest.raises(PreconditionError):
        invariant_subspace(grp)
