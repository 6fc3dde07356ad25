"""Command line front end.

Subcommands: busemann, geodesic, unitarize, shift-demo, norms-check,
rigidity. Each one emits JSON-lines records (stdout, or <out>/<command>.jsonl
when --out is given), an optional aligned summary on stderr, and figures
next to the report when an output directory is set.

Exit codes: 0 all checks passed, 1 a numerical property check failed,
2 invalid input or configuration, 3 the orbit expansion suspects an
unbounded orbit.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__, figures, linalg, report, sampling, serialize
from .action import (
    CircumcenterConfig,
    GroupPresentation,
    UnitarizeConfig,
    commutant_analysis,
    displacement,
    invariant_subspace,
    unitarize,
)
from .exceptions import (
    BudgetError,
    PreconditionError,
    UnboundedOrbitError,
    ValidationError,
)
from .manifold import (
    PDPoint,
    busemann_margin,
    distance,
    emi_margin,
    geodesic,
    group_act,
)
from .norms import (
    cplus_membership,
    form_convexity_margin,
    form_geodesic,
    norm_eval,
    polar_dual_eval,
    polar_duality_check,
    rigidity_check,
)
from .report import CheckRecord, RunConfig, Stopwatch


def _data_path(name: str):
    return resources.files("schattengeo").joinpath("data").joinpath(name)


def _load_bundled(name: str):
    with resources.as_file(_data_path(name)) as p:
        return serialize.load_json(p)


def _config_record(cfg: RunConfig, **extra) -> dict:
    rec = {
        "record": "config",
        "version": __version__,
        "command": cfg.command,
        "p": cfg.p,
        "n": cfg.n,
        "seed": cfg.seed,
        "tol": cfg.tol,
        "samples": cfg.samples,
        "max_iter": cfg.max_iter,
        "max_word_len": cfg.max_word_len,
    }
    rec.update(extra)
    return rec


# ---------------------------------------------------------------------------
# Subcommand handlers. Each returns (records, checks, figure jobs); figure
# jobs run only when an output directory is configured.


def _cmd_busemann(cfg: RunConfig, args) -> tuple:
    def worker(i: int) -> dict:
        g = sampling.rng(cfg.seed, "busemann", str(i))
        x = PDPoint(sampling.random_pd_matrix(g, cfg.n), cfg.p)
        g0 = PDPoint(sampling.random_pd_matrix(g, cfg.n), cfg.p)
        g1 = PDPoint(sampling.random_pd_matrix(g, cfg.n), cfg.p)
        bus = busemann_margin(x, g0, g1)
        emi = emi_margin(g0, g1)
        d01 = distance(g0, g1)
        triangle = distance(x, g0) + d01 - distance(x, g1)
        mover = sampling.random_invertible(g, cfg.n)
        iso_err = abs(
            distance(group_act(mover, g0), group_act(mover, g1)) - d01
        ) / (1.0 + d01)
        s, t = sorted(g.uniform(0.0, 1.0, size=2))
        seg_err = abs(
            distance(geodesic(g0, g1, s), geodesic(g0, g1, t)) - (t - s) * d01
        ) / (1.0 + d01)
        return {
            "record": "sample",
            "index": i,
            "busemann_margin": bus.margin,
            "busemann_lhs": bus.lhs,
            "busemann_rhs": bus.rhs,
            "emi_margin": emi.margin,
            "triangle_slack": triangle,
            "isometry_error": iso_err,
            "segment_error": seg_err,
        }

    rows = report.run_battery(cfg.samples, worker, cfg.threads)
    worst_bus = min(r["busemann_margin"] for r in rows)
    worst_emi = min(r["emi_margin"] for r in rows)
    worst_tri = min(r["triangle_slack"] for r in rows)
    worst_iso = max(r["isometry_error"] for r in rows)
    worst_seg = max(r["segment_error"] for r in rows)
    batch = f"{cfg.samples} random triples at p={cfg.p}, n={cfg.n}"
    checks = [
        CheckRecord(
            "busemann_margin_nonnegative", worst_bus >= -cfg.tol, worst_bus,
            -cfg.tol, batch,
        ),
        CheckRecord(
            "log_map_contraction_nonnegative", worst_emi >= -cfg.tol, worst_emi,
            -cfg.tol, "metric dominates the log-image distance",
        ),
        CheckRecord(
            "triangle_inequality", worst_tri >= -cfg.tol, worst_tri,
            -cfg.tol, batch,
        ),
        CheckRecord(
            "isometric_action_invariance", worst_iso <= cfg.tol, worst_iso,
            cfg.tol, "relative distance drift under random invertibles",
        ),
        CheckRecord(
            "geodesic_segment_additivity", worst_seg <= cfg.tol, worst_seg,
            cfg.tol, "relative speed drift between interior geodesic points",
        ),
    ]

    def figs(out: Path) -> list:
        return [
            figures.histogram(
                [r["busemann_margin"] for r in rows],
                f"midpoint inequality margins (p={cfg.p}, n={cfg.n})",
                "margin", out / "busemann_margins.png", reference=0.0,
            )
        ]

    return [_config_record(cfg)] + rows, checks, figs


def _cmd_geodesic(cfg: RunConfig, args) -> tuple:
    a_mat = serialize.matrix_from_json(serialize.load_json(args.a), name="endpoint a")
    b_mat = serialize.matrix_from_json(serialize.load_json(args.b), name="endpoint b")
    a = PDPoint(linalg.to_hermitian(a_mat, name="endpoint a"), cfg.p)
    b = PDPoint(linalg.to_hermitian(b_mat, name="endpoint b"), cfg.p)
    d = distance(a, b)
    ts = np.linspace(0.0, 1.0, cfg.samples)
    rows = []
    curves = []
    speed_err = 0.0
    for t in ts:
        gt = geodesic(a, b, float(t))
        w = gt.spectrum.eigenvalues
        da = distance(a, gt)
        speed_err = max(speed_err, abs(da - t * d))
        curves.append(w)
        rows.append(
            {
                "record": "point",
                "t": float(t),
                "eigenvalues": [float(x) for x in w],
                "distance_from_a": da,
            }
        )
    mid = geodesic(a, b, 0.5)
    mid_rec = busemann_margin(mid, a, b)
    sym_err = abs(distance(a, mid) - distance(mid, b))
    checks = [
        CheckRecord(
            "constant_speed", speed_err <= cfg.tol * (1.0 + d), speed_err,
            cfg.tol * (1.0 + d), f"endpoint distance {d:.6g}",
        ),
        CheckRecord(
            "midpoint_margin_nonnegative", mid_rec.margin >= -cfg.tol,
            mid_rec.margin, -cfg.tol, "midpoint inequality at the midpoint",
        ),
        CheckRecord(
            "midpoint_equidistant", sym_err <= cfg.tol * (1.0 + d), sym_err,
            cfg.tol * (1.0 + d), "",
        ),
    ]
    rows.append(
        {
            "record": "midpoint",
            "matrix": serialize.matrix_to_json(mid.mat),
            "margin": mid_rec.margin,
        }
    )

    def figs(out: Path) -> list:
        return [
            figures.eigen_paths(
                ts, np.asarray(curves), "eigenvalues along the geodesic",
                out / "geodesic_eigenvalues.png",
            )
        ]

    return [_config_record(cfg, distance=d)] + rows, checks, figs


def _cmd_unitarize(cfg: RunConfig, args) -> tuple:
    if args.group is None:
        obj = _load_bundled("conj_swap.json")
    else:
        obj = serialize.load_json(args.group)
    group = serialize.group_from_json(obj)
    if args.p is not None:
        group = GroupPresentation(group.generators, args.p, group.includes_inverses)
    ucfg = UnitarizeConfig(
        max_word_len=cfg.max_word_len,
        circum=CircumcenterConfig(tol=1e-11, max_iter=cfg.max_iter),
    )
    res = unitarize(group, ucfg)
    rows = [
        _config_record(cfg, p=group.p, n=group.n, generators=len(group.generators)),
        {
            "record": "orbit",
            "size": res.orbit_size,
            "truncated": res.orbit_truncated,
            "radius": res.radius,
            "iterations": res.iterations,
            "refined": res.refined,
        },
        {
            "record": "result",
            "fixed_point": serialize.matrix_to_json(res.fixed_point.mat),
            "unitarizer": serialize.matrix_to_json(res.unitarizer.mat),
            "displacement": res.displacement,
            "unitarity_defect": res.unitarity_defect,
        },
    ]
    checks = [
        CheckRecord(
            "fixed_point_displacement", res.displacement <= cfg.tol,
            res.displacement, cfg.tol, "largest move of the center",
        ),
        CheckRecord(
            "unitarity_defect", res.unitarity_defect <= cfg.tol,
            res.unitarity_defect, cfg.tol, "worst conjugated generator",
        ),
    ]

    def figs(out: Path) -> list:
        return [
            figures.convergence(
                _radius_history(group, ucfg),
                "enclosing radius during center search",
                out / "unitarize_radius.png",
            )
        ]

    return rows, checks, figs


def _radius_history(group: GroupPresentation, ucfg: UnitarizeConfig) -> list:
    # rerun the center search to recover its radius trace for plotting
    from .action import circumcenter, orbit_ball

    orbit = orbit_ball(
        group, PDPoint.identity(group.n, group.p),
        max_word_len=ucfg.max_word_len, dedup_tol=ucfg.dedup_tol,
        point_cap=ucfg.point_cap,
    )
    return list(circumcenter(orbit.points, ucfg.circum).radius_history)


def _cmd_shift_demo(cfg: RunConfig, args) -> tuple:
    n = cfg.n
    shift = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        shift[(i + 1) % n, i] = 1.0
    group = GroupPresentation((shift,), cfg.p)
    res = unitarize(group)
    analysis = commutant_analysis(group)
    inv = invariant_subspace(group, tol=cfg.tol)

    g = sampling.rng(cfg.seed, "shift-demo")
    coeffs = g.uniform(0.2, 1.0, size=analysis.dim)
    circ = np.zeros((n, n), dtype=np.complex128)
    for c, b in zip(coeffs, analysis.basis):
        circ += c * b
    top = float(np.max(np.abs(np.linalg.eigvalsh(circ))))
    circ = linalg.hermitian_part(np.eye(n) + 0.4 * circ / max(top, 1e-12))
    disp = displacement(group, PDPoint(circ, cfg.p))

    rows = [
        _config_record(cfg),
        {
            "record": "commutant",
            "dim": analysis.dim,
            "conclusive": analysis.conclusive,
            "null_threshold": analysis.null_threshold,
            "gap": analysis.gap,
            "spectrum": [float(x) for x in analysis.spectrum],
        },
        {
            "record": "invariant_subspace",
            "status": inv.status,
            "residual": inv.projector_residual,
            "subspace_dim": 0 if inv.basis is None else int(inv.basis.shape[1]),
        },
        {
            "record": "fixed_family",
            "sample_form": serialize.matrix_to_json(circ),
            "displacement": disp,
        },
        {
            "record": "result",
            "unitarizer_defect": res.unitarity_defect,
            "orbit_size": res.orbit_size,
        },
    ]
    checks = [
        CheckRecord(
            "commutant_dim_matches_cycle", analysis.dim == n, float(analysis.dim),
            float(n), "cyclic coordinate shift",
        ),
        CheckRecord(
            "invariant_subspace_residual",
            inv.status == "invariant_subspace" and inv.projector_residual <= cfg.tol,
            inv.projector_residual, cfg.tol, inv.status,
        ),
        CheckRecord(
            "commuting_form_is_fixed", disp <= cfg.tol, disp, cfg.tol,
            "random positive element of the commutant",
        ),
        CheckRecord(
            "shift_already_unitary", res.unitarity_defect <= cfg.tol,
            res.unitarity_defect, cfg.tol, "orbit of the identity is a point",
        ),
    ]

    def figs(out: Path) -> list:
        return [
            figures.spectrum_stem(
                analysis.spectrum, analysis.null_threshold,
                "commutation energy spectrum", out / "shift_commutant.png",
            )
        ]

    return rows, checks, figs


def _cmd_norms_check(cfg: RunConfig, args) -> tuple:
    if args.spec is None:
        spec = serialize.normspec_from_json(_load_bundled("max_pair.json"))
    else:
        spec = serialize.normspec_from_json(serialize.load_json(args.spec))
    n = spec.n
    forms = getattr(spec, "forms", None)

    # polarity probes: members by construction, shrunken forms, random
    g = sampling.rng(cfg.seed, "norms-probes")
    n_probes = max(4, cfg.samples // 8)
    probe_forms = []
    for i in range(n_probes):
        kind = i % 3
        if kind == 0 and forms is not None:
            x = sum(forms) + 0.5 * sampling.random_pd_matrix(g, n, sigma=0.3)
            probe_forms.append(linalg.hermitian_part(x))
        elif kind == 1 and forms is not None:
            j = int(g.integers(len(forms)))
            probe_forms.append(float(g.uniform(0.5, 0.95)) * forms[j])
        else:
            probe_forms.append(sampling.random_pd_matrix(g, n, sigma=0.5))
    polarity = polar_duality_check(
        spec, probe_forms, directions=6, rng=sampling.rng(cfg.seed, "norms-dirs")
    )

    # convexity of the squared norm of a fixed direction along form geodesics
    def conv_worker(i: int) -> float:
        gi = sampling.rng(cfg.seed, "norms-convexity", str(i))
        x0 = sampling.random_pd_matrix(gi, n)
        x1 = sampling.random_pd_matrix(gi, n)
        xi = sampling.random_unit_vector(gi, n)
        t = float(gi.uniform())
        return form_convexity_margin(x0, x1, t, xi).margin

    conv_margins = report.run_battery(cfg.samples, conv_worker, cfg.threads)
    worst_conv = min(conv_margins)

    # geodesic closure of the upper order set
    closure_fail = 0
    n_pairs = max(2, cfg.samples // 16)
    closure_count = 0
    if forms is not None:
        for i in range(n_pairs):
            gi = sampling.rng(cfg.seed, "norms-closure", str(i))
            x0 = sum(forms) + 0.5 * sampling.random_pd_matrix(gi, n, sigma=0.3)
            x1 = sum(forms) + 0.5 * sampling.random_pd_matrix(gi, n, sigma=0.3)
            for t in (0.25, 0.5, 0.75):
                xt = form_geodesic(x0, x1, t)
                closure_count += 1
                if cplus_membership(spec, xt).status != "holds":
                    closure_fail += 1

    # dual enclosure quality on random directions
    gap_rel = []
    for i in range(max(4, cfg.samples // 16)):
        gi = sampling.rng(cfg.seed, "norms-dual", str(i))
        xi = sampling.random_unit_vector(gi, n)
        res = polar_dual_eval(spec, xi, rng=gi)
        gap_rel.append(res.gap / max(1.0, res.upper))
    worst_gap = max(gap_rel)

    rows = [
        _config_record(cfg, spec_kind=serialize.normspec_to_json(spec)["kind"]),
        {
            "record": "polarity",
            "probes": len(probe_forms),
            "contradictions": polarity.n_contradictions,
            "confirmed": polarity.n_confirmed,
            "unresolved": polarity.n_unresolved,
        },
        {
            "record": "convexity",
            "samples": cfg.samples,
            "min_margin": worst_conv,
        },
        {
            "record": "closure",
            "checked": closure_count,
            "failures": closure_fail,
        },
        {
            "record": "dual_enclosure",
            "directions": len(gap_rel),
            "max_relative_gap": worst_gap,
        },
    ]
    checks = [
        CheckRecord(
            "polarity_contradictions", polarity.n_contradictions == 0,
            float(polarity.n_contradictions), 0.0,
            f"{len(probe_forms)} probe forms",
        ),
        CheckRecord(
            "form_convexity", worst_conv >= -cfg.tol, worst_conv, -cfg.tol,
            "squared norm along form geodesics",
        ),
        CheckRecord(
            "upper_set_geodesic_closure", closure_fail == 0, float(closure_fail),
            0.0, f"{closure_count} geodesic points",
        ),
        CheckRecord(
            "dual_enclosure_gap", worst_gap <= 1e-6, worst_gap, 1e-6,
            "certified two-sided dual bounds",
        ),
    ]

    def figs(out: Path) -> list:
        return [
            figures.histogram(
                conv_margins, "convexity margins", "margin",
                out / "norms_convexity.png", reference=0.0,
            ),
            figures.histogram(
                gap_rel, "relative dual enclosure gaps", "gap",
                out / "norms_dual_gaps.png",
            ),
        ]

    return rows, checks, figs


def _cmd_rigidity(cfg: RunConfig, args) -> tuple:
    if args.scenario is None:
        obj = _load_bundled("perm_sign_rigidity.json")
    else:
        obj = serialize.load_json(args.scenario)
    sc = serialize.scenario_from_json(obj)
    rep = rigidity_check(
        sc["spec"], sc["isometries"], sc["lower"], sc["upper"], sc["p"],
        rng=sampling.rng(cfg.seed, "rigidity"),
    )
    sw = rep.sandwich
    rows = [
        _config_record(cfg, p=sc["p"], n=sc["spec"].n),
        {
            "record": "unitarization",
            "orbit_size": rep.unitarization.unitarization.orbit_size,
            "displacement": rep.unitarization.unitarization.displacement,
            "unitarity_defect": rep.unitarization.unitarization.unitarity_defect,
            "orbit_bound": rep.unitarization.orbit_bound,
        },
        {
            "record": "commutant",
            "dim": rep.commutant.dim,
            "conclusive": rep.commutant.conclusive,
        },
        {
            "record": "sandwich",
            "lam_minus_lower": sw.lam_minus_lower,
            "lam_minus_upper": sw.lam_minus_upper,
            "lam_plus": sw.lam_plus,
            "gap_ratio": sw.gap_ratio,
        },
        {
            "record": "verdict",
            "verdict": rep.verdict,
            "irreducible": rep.irreducible,
            "hilbert_consistent": rep.hilbert_consistent,
            "unique_up_to_scalars": rep.unique_up_to_scalars,
            "scalar_ray_note": "every positive scalar stays fixed at finite dimension",
            "max_scalar_displacement": rep.max_scalar_displacement,
        },
    ]
    checks = [
        CheckRecord(
            "scalars_are_fixed", rep.max_scalar_displacement <= cfg.tol,
            rep.max_scalar_displacement, cfg.tol, "scalar grid under the cleaned group",
        ),
        CheckRecord(
            "commutant_conclusive", rep.commutant.conclusive,
            rep.commutant.gap, 10.0 * rep.commutant.null_threshold,
            "spectral gap over the null threshold",
        ),
    ]
    expected = sc.get("expected_verdict")
    if expected:
        checks.append(
            CheckRecord(
                "verdict_matches_expected", rep.verdict == expected,
                1.0 if rep.verdict == expected else 0.0, 1.0,
                f"expected {expected}, got {rep.verdict}",
            )
        )

    def figs(out: Path) -> list:
        return [
            figures.sandwich_bars(
                ["scenario"], [sw.lam_minus_lower], [sw.lam_plus],
                "scalar sandwich around the invariant norm",
                out / "rigidity_sandwich.png",
            )
        ]

    return rows, checks, figs


# ---------------------------------------------------------------------------
# Parser and dispatch


def _add_common(sp, **defaults):
    sp.add_argument("--p", type=float, default=defaults.get("p", 2.0),
                    help="Schatten exponent, strictly between 1 and infinity")
    sp.add_argument("--n", type=int, default=defaults.get("n", 3),
                    help="matrix dimension for sampled batteries")
    sp.add_argument("--seed", type=int, default=0, help="PRNG seed")
    sp.add_argument("--tol", type=float, default=defaults.get("tol", 1e-8),
                    help="pass/fail tolerance")
    sp.add_argument("--max-iter", type=int,
                    default=defaults.get("max_iter", 5000),
                    help="iteration budget for the center search")
    sp.add_argument("--max-word-len", type=int, default=8,
                    help="orbit expansion word-length cap")
    sp.add_argument("--samples", type=int,
                    default=defaults.get("samples", 200),
                    help="battery size")
    sp.add_argument("--out", type=Path, default=None,
                    help="directory for the report and figures")
    sp.add_argument("--summary", action="store_true",
                    help="print an aligned check table to stderr")
    sp.add_argument("--no-figures", dest="render_figures",
                    action="store_false",
                    help="skip figure rendering even with --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schattengeo",
        description="Finsler geometry of positive definite matrices: "
        "distances, geodesics, midpoint inequalities, circumcenters, "
        "unitarizers and norm order-sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("busemann", help="sampled midpoint-inequality battery")
    _add_common(sp)
    sp.set_defaults(handler=_cmd_busemann)

    sp = sub.add_parser("geodesic", help="trace a geodesic between two matrices")
    _add_common(sp, samples=41)
    sp.add_argument("--a", type=Path, required=True, help="endpoint matrix JSON")
    sp.add_argument("--b", type=Path, required=True, help="endpoint matrix JSON")
    sp.set_defaults(handler=_cmd_geodesic)

    sp = sub.add_parser("unitarize", help="positive unitarizer of a matrix group")
    _add_common(sp, tol=1e-6, max_iter=20000)
    sp.add_argument("--group", type=Path, default=None,
                    help="group JSON (default: bundled conjugated swap)")
    # the group file carries its own exponent; an explicit --p overrides it
    sp.set_defaults(handler=_cmd_unitarize, p=None)

    sp = sub.add_parser("shift-demo",
                        help="cyclic shift: commutant, invariant subspace, fixed family")
    _add_common(sp, n=4)
    sp.set_defaults(handler=_cmd_shift_demo)

    sp = sub.add_parser("norms-check",
                        help="polarity, convexity and closure batteries for a norm")
    _add_common(sp)
    sp.add_argument("--spec", type=Path, default=None,
                    help="norm spec JSON (default: bundled two-form max norm)")
    sp.set_defaults(handler=_cmd_norms_check)

    sp = sub.add_parser("rigidity",
                        help="unitarize isometries and test scalar rigidity")
    _add_common(sp, tol=1e-6)
    sp.add_argument("--scenario", type=Path, default=None,
                    help="scenario JSON (default: bundled sign-and-shift family)")
    sp.set_defaults(handler=_cmd_rigidity)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    watch = Stopwatch()
    try:
        cfg = RunConfig(
            command=args.command,
            p=args.p if getattr(args, "p", None) is not None else 2.0,
            n=args.n,
            seed=args.seed,
            tol=args.tol,
            max_iter=args.max_iter,
            max_word_len=args.max_word_len,
            samples=args.samples,
            out=args.out,
            summary=args.summary,
            figures=args.render_figures,
        )
        rows, checks, fig_jobs = args.handler(cfg, args)
    except (ValidationError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnboundedOrbitError, BudgetError) as exc:
        print(f"unbounded orbit suspected: {exc}", file=sys.stderr)
        return 3

    records = rows + [c.to_record() for c in checks]
    records.append(report.timing_record(watch.seconds()))
    try:
        if cfg.out is not None:
            cfg.out.mkdir(parents=True, exist_ok=True)
            report.write_report(records, cfg.out / f"{cfg.command}.jsonl")
            if cfg.figures:
                for path in fig_jobs(cfg.out):
                    print(f"figure: {path}", file=sys.stderr)
            print(f"report: {cfg.out / (cfg.command + '.jsonl')}", file=sys.stderr)
        else:
            sys.stdout.write(report.write_report(records, None))
    except OSError as exc:
        print(f"error writing outputs: {exc}", file=sys.stderr)
        return 2
    if cfg.summary:
        sys.stderr.write(report.summary_table(checks))
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
