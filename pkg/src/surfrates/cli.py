"""Command line interface: verification suites, gradient flows, and
convergence studies.

Exit codes: 0 success / all checks pass, 1 failed checks or stability
problems, 2 configuration errors.  Reports are JSON with sorted keys and no
timestamps, so repeated runs with the same arguments are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from ._fd import c4_d1, c4_d1_nested, c4_d2
from .chart_kernel import (
    Event,
    fd_variant,
    get_scenario,
    list_scenarios,
    sample_events,
)
from .diffops import (
    conforming_laplace,
    grid_laplace,
    make_grid,
    scalar_laplace,
    surface_laplace,
)
from .errors import ConfigError, StabilityError, SurfratesError
from .fields import g_inner_rank2, pi_q_components, project, q_from_cart, q_to_cart
from .geometry import check_identities, geometry_at, motion_at
from .landau import FLOW_MODES, FlowConfig, LdGParams, run_flow
from .probes import (
    probe_conforming_q_field,
    probe_field,
    probe_field_b,
    probe_matrix_comps,
    probe_q_field,
    probe_scalar,
    probe_scalar_b,
)
from .thinfilm import LIMIT_QUANTITIES, fit_order, limit_study
from .timederiv import DerivKind, convected_dt, material_dt, q_dt, scalar_dot
from .util import rel_residual

__all__ = [
    "run_verify",
    "run_converge_fd",
    "run_converge_thinfilm",
    "run_converge_laplace",
    "main",
]

SUITES = ("geometry", "derivatives", "qtensor", "laplace", "all")


def _outdir(arg_out: str | None) -> str:
    if arg_out:
        out = arg_out
    else:
        out = os.environ.get("SURFRATES_OUTDIR", ".")
    os.makedirs(out, exist_ok=True)
    return out


class _Rows:
    """Aggregates the worst residual per identity name across events."""

    def __init__(self):
        self.data: dict[str, tuple[float, float]] = {}

    def add(self, name: str, residual: float, tol: float):
        residual = float(residual)
        if name in self.data:
            residual = max(residual, self.data[name][0])
        self.data[name] = (residual, tol)

    def to_list(self) -> list[dict]:
        out = []
        for name in sorted(self.data):
            residual, tol = self.data[name]
            out.append(
                {
                    "identity_name": name,
                    "pass": residual < tol,
                    "residual": residual,
                    "tol": tol,
                }
            )
        return out


def _maxabs(a) -> float:
    return float(np.max(np.abs(a)))


# ---------------------------------------------------------------------------
# verify suites


def _suite_geometry(surface, events, rows: _Rows):
    for ev in events:
        rep = check_identities(surface, ev)
        for item in rep.items:
            rows.add(item.identity_name, item.residual, item.tol)


def _suite_derivatives(surface, events, rows: _Rows):
    kinds = (
        (DerivKind.Upper, "upper"),
        (DerivKind.Lower, "lower"),
        (DerivKind.Jaumann, "jaumann"),
    )
    for rank in (1, 2):
        P = probe_field(surface, rank)
        R = probe_field_b(surface, rank)

        def fprod(s, a, b, P=P, R=R):
            return float(np.sum(P.eval(s, a, b) * R.eval(s, a, b)))

        for ev in events:
            geom = geometry_at(surface, ev)
            mot = motion_at(surface, ev, geom)
            da = material_dt(surface, P, ev, "CartesianProxy", geom, mot).cart
            db = material_dt(surface, P, ev, "Decomposed", geom, mot).cart
            rows.add(f"material-rank{rank}-dual-path", rel_residual(da, db), 1e-6)
            vals = {}
            for kind, label in kinds:
                va = convected_dt(surface, P, ev, kind, "ViaMaterial", geom, mot).cart
                vb = convected_dt(surface, P, ev, kind, "Decomposed", geom, mot).cart
                vals[label] = va
                rows.add(f"{label}-rank{rank}-dual-path", rel_residual(va, vb), 1e-6)
            javg = convected_dt(
                surface, P, ev, DerivKind.Jaumann, "Average", geom, mot
            ).cart
            rows.add(
                f"jaumann-average-rank{rank}",
                rel_residual(javg, vals["jaumann"]),
                1e-6,
            )
            rows.add(
                f"jaumann-halfsum-rank{rank}",
                rel_residual(vals["jaumann"], 0.5 * (vals["upper"] + vals["lower"])),
                1e-10,
            )

            # product rules against the scalar material rate
            t, y1, y2 = ev.t, ev.y1, ev.y2
            Pv = P.eval(t, y1, y2)
            Rv = R.eval(t, y1, y2)
            fdot = scalar_dot(surface, fprod, ev)
            scale = max(1.0, abs(fdot))
            DmP = material_dt(surface, P, ev, "CartesianProxy", geom, mot).cart
            DmR = material_dt(surface, R, ev, "CartesianProxy", geom, mot).cart
            rows.add(
                f"material-product-rule-rank{rank}",
                abs(fdot - float(np.sum(DmP * Rv) + np.sum(Pv * DmR))) / scale,
                1e-6,
            )
            Gc = mot.Gcal
            if rank == 1:
                defect = float(Rv @ (Gc @ Pv) + Pv @ (Gc @ Rv))
            else:
                defect = float(
                    np.sum((Gc @ Pv + Pv @ Gc.T) * Rv)
                    + np.sum((Gc @ Rv + Rv @ Gc.T) * Pv)
                )
            for kind, label, sgn in (
                (DerivKind.Upper, "upper", 1.0),
                (DerivKind.Lower, "lower", -1.0),
                (DerivKind.Jaumann, "jaumann", 0.0),
            ):
                DP = convected_dt(surface, P, ev, kind, "ViaMaterial", geom, mot).cart
                DR = convected_dt(surface, R, ev, kind, "ViaMaterial", geom, mot).cart
                total = float(np.sum(DP * Rv) + np.sum(Pv * DR)) + sgn * defect
                rows.add(
                    f"{label}-product-rule-rank{rank}", abs(fdot - total) / scale, 1e-6
                )


def _suite_qtensor(surface, events, rows: _Rows):
    qcl = probe_q_field(surface)
    fcl = qcl.as_field_closure(surface)
    ccl = probe_conforming_q_field(surface)
    cfl = ccl.as_field_closure(surface)
    for ev in events:
        t, y1, y2 = ev.t, ev.y1, ev.y2
        geom = geometry_at(surface, ev)
        mot = motion_at(surface, ev, geom)

        dmq = q_dt(surface, qcl, ev, DerivKind.Material, geom, mot)
        dm_full = material_dt(surface, fcl, ev, "CartesianProxy", geom, mot).cart
        rows.add(
            "qtensor-material-closure",
            rel_residual(q_to_cart(geom, dmq), dm_full),
            1e-8,
        )
        djq = q_dt(surface, qcl, ev, DerivKind.Jaumann, geom, mot)
        dj_full = convected_dt(
            surface, fcl, ev, DerivKind.Jaumann, "ViaMaterial", geom, mot
        ).cart
        rows.add(
            "qtensor-jaumann-closure",
            rel_residual(q_to_cart(geom, djq), dj_full),
            1e-8,
        )
        dcq = q_dt(surface, ccl, ev, DerivKind.ConformingMaterial, geom, mot)
        dmc_full = material_dt(surface, cfl, ev, "CartesianProxy", geom, mot).cart
        rows.add(
            "qtensor-conforming-projection",
            rel_residual(q_to_cart(geom, dcq), project(geom, dmc_full, "CQ")),
            1e-8,
        )

        dup = convected_dt(
            surface, fcl, ev, DerivKind.Upper, "ViaMaterial", geom, mot
        ).cart
        dlo = convected_dt(
            surface, fcl, ev, DerivKind.Lower, "ViaMaterial", geom, mot
        ).cart
        qs = qcl.q_eval(t, y1, y2)
        pred = float(qs.beta) * float(np.trace(mot.G)) - 2.0 * float(
            np.sum((geom.g @ mot.G) * qs.q2)
        )
        scale = max(1.0, abs(pred))
        rows.add("qtensor-upper-trace", abs(float(np.trace(dup)) - pred) / scale, 1e-6)
        rows.add("qtensor-lower-trace", abs(float(np.trace(dlo)) + pred) / scale, 1e-6)

        # pointwise algebra of tangential Q-parts
        m = probe_matrix_comps(t, y1, y2)
        s2 = 0.5 * (m + m.T)
        q2 = qs.q2
        s_op = s2 @ geom.g
        lhs = pi_q_components(geom, s_op @ s_op @ q2)
        rhs = 0.5 * float(np.trace(s_op @ s_op)) * q2
        rows.add("qtensor-pi-ssq", _maxabs(lhs - rhs) / max(1.0, _maxabs(rhs)), 1e-10)
        q_op = q2 @ geom.g
        rhs2 = 0.5 * float(g_inner_rank2(geom, q2, q2)) * np.eye(2)
        rows.add(
            "qtensor-q-squared",
            _maxabs(q_op @ q_op - rhs2) / max(1.0, _maxabs(rhs2)),
            1e-10,
        )
        Qc = q_to_cart(geom, qs)
        rt = q_from_cart(geom, Qc)
        res = max(
            _maxabs(rt.q2 - qs.q2),
            _maxabs(rt.eta2 - qs.eta2),
            abs(float(rt.beta) - float(qs.beta)),
        )
        rows.add("qtensor-split-roundtrip", res, 1e-10)
        tr2 = float(np.sum(Qc * Qc))
        pred2 = (
            float(g_inner_rank2(geom, q2, q2))
            + 2.0 * float(qs.eta2 @ geom.g @ qs.eta2)
            + 1.5 * float(qs.beta) ** 2
        )
        rows.add(
            "qtensor-trace-relation", abs(tr2 - pred2) / max(1.0, abs(pred2)), 1e-10
        )


def _suite_laplace(surface, events, rows: _Rows):
    fcl = probe_field(surface, 2)
    ccl = probe_conforming_q_field(surface)
    for ev in events:
        geom = geometry_at(surface, ev)
        la = surface_laplace(surface, fcl, ev, "Beltrami", geom).cart
        lb = surface_laplace(surface, fcl, ev, "Decomposed", geom).cart
        rows.add("laplace-rank2-dual-path", rel_residual(la, lb), 1e-5)
        cf = conforming_laplace(surface, ccl, ev, "ClosedForm", geom)
        cp = conforming_laplace(surface, ccl, ev, "Projected", geom)
        scale = max(1.0, _maxabs(cf.q2), abs(float(cf.beta)))
        res = max(_maxabs(cf.q2 - cp.q2), abs(float(cf.beta) - float(cp.beta))) / scale
        rows.add("laplace-conforming-dual-path", res, 1e-5)

        # scalar Leibniz rule with the metric pairing of the gradients
        t, y1, y2 = ev.t, ev.y1, ev.y2
        h = surface.space_step
        fv = probe_scalar(t, y1, y2)
        gv = probe_scalar_b(t, y1, y2)
        prod = lambda s, a, b: probe_scalar(s, a, b) * probe_scalar_b(s, a, b)
        lap_f = scalar_laplace(surface, probe_scalar, ev, geom)
        lap_g = scalar_laplace(surface, probe_scalar_b, ev, geom)
        lap_p = scalar_laplace(surface, prod, ev, geom)
        df = np.stack(
            [
                c4_d1(lambda a: probe_scalar(t, a, y2), y1, h),
                c4_d1(lambda b: probe_scalar(t, y1, b), y2, h),
            ]
        )
        dg = np.stack(
            [
                c4_d1(lambda a: probe_scalar_b(t, a, y2), y1, h),
                c4_d1(lambda b: probe_scalar_b(t, y1, b), y2, h),
            ]
        )
        rhs = fv * lap_g + gv * lap_f + 2.0 * float(df @ geom.ginv @ dg)
        rows.add(
            "laplace-scalar-leibniz",
            abs(float(lap_p) - float(rhs)) / max(1.0, abs(float(lap_p))),
            1e-6,
        )

    dom = surface.domain
    if dom.periodic1 and dom.periodic2:
        t0 = surface.t_range[0]
        gg = make_grid(surface, t0, 32)
        F = probe_scalar(0.3, gg.Y1, gg.Y2)
        G = probe_scalar_b(0.3, gg.Y1, gg.Y2)
        LF = grid_laplace(gg, F)
        LG = grid_laplace(gg, G)
        ip1 = float(np.sum(LF * G * gg.weights))
        ip2 = float(np.sum(F * LG * gg.weights))
        rows.add(
            "laplace-grid-self-adjoint", abs(ip1 - ip2) / max(1.0, abs(ip1)), 1e-12
        )
        rows.add(
            "laplace-grid-negativity",
            max(0.0, float(np.sum(LF * F * gg.weights))),
            1e-12,
        )


_SUITE_FUNCS = {
    "geometry": _suite_geometry,
    "derivatives": _suite_derivatives,
    "qtensor": _suite_qtensor,
    "laplace": _suite_laplace,
}


def run_verify(
    scenario: str, suite: str = "all", n_events: int = 20, seed: int = 20240
) -> dict:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; pick one of {SUITES}")
    surface = get_scenario(scenario)
    events = sample_events(surface, n_events, seed)
    rows = _Rows()
    names = [s for s in SUITES[:-1]] if suite == "all" else [suite]
    for name in names:
        _SUITE_FUNCS[name](surface, events, rows)
    identities = rows.to_list()
    return {
        "all_pass": all(r["pass"] for r in identities),
        "identities": identities,
        "max_residual": max(r["residual"] for r in identities),
        "n_events": n_events,
        "n_identities": len(identities),
        "scenario": scenario,
        "seed": seed,
        "suite": suite,
    }


# ---------------------------------------------------------------------------
# convergence studies


def run_converge_fd(scenario: str, seed: int = 7) -> dict:
    surface = get_scenario(scenario)
    if surface.diff_mode != "analytic":
        raise ConfigError("the fd study needs a scenario with analytic jets")
    ev = sample_events(surface, 1, seed)[0]
    ja = surface.jet(ev.t, ev.y1, ev.y2)
    rows = []
    for h in (0.02, 0.01, 0.005):
        fs = fd_variant(surface, h)
        jf = fs.jet(ev.t, ev.y1, ev.y2)
        err = max(
            _maxabs(jf.dX - ja.dX),
            _maxabs(jf.ddX - ja.ddX),
            _maxabs(jf.Vt - ja.Vt),
            _maxabs(jf.dVt - ja.dVt),
        )
        rows.append((h, err))
    order = fit_order(rows)
    return {
        "fitted_order": "inf" if math.isinf(order) else order,
        "kind": "fd",
        "rows": [{"error": e, "step": h} for (h, e) in rows],
        "scenario": scenario,
        "seed": seed,
    }


def run_converge_thinfilm(scenario: str, seed: int = 7) -> dict:
    surface = get_scenario(scenario)
    ev = sample_events(surface, 1, seed)[0]
    reports = [limit_study(surface, qty, ev) for qty in LIMIT_QUANTITIES]
    return {
        "kind": "thinfilm",
        "reports": [r.to_json_obj() for r in reports],
        "scenario": scenario,
        "seed": seed,
    }


def _batched_beltrami(surface, t, Y1, Y2, f, geom):
    h = surface.space_step
    f1 = c4_d1(lambda a: f(a, Y2), Y1, h)
    f2 = c4_d1(lambda b: f(Y1, b), Y2, h)
    f11 = c4_d2(lambda a: f(a, Y2), Y1, h)
    f22 = c4_d2(lambda b: f(Y1, b), Y2, h)
    f12 = c4_d1_nested(f, Y1, h, Y2, h)
    hess = ((f11, f12), (f12, f22))
    grad = (f1, f2)
    out = 0.0
    for i in range(2):
        for j in range(2):
            corr = sum(geom.Gamma[k, i, j] * grad[k] for k in range(2))
            out = out + geom.ginv[i, j] * (hess[i][j] - corr)
    return out


def run_converge_laplace(scenario: str) -> dict:
    surface = get_scenario(scenario)
    t0 = surface.t_range[0]

    def f(a, b):
        return np.sin(a) * np.cos(b) + 0.3 * np.cos(2.0 * b)

    rows = []
    for n in (16, 32, 64, 128):
        gg = make_grid(surface, t0, n)
        F = f(gg.Y1, gg.Y2)
        ref = _batched_beltrami(surface, t0, gg.Y1, gg.Y2, f, gg.geom)
        err = _maxabs(grid_laplace(gg, F) - ref)
        rows.append((gg.h1, err))
    order = fit_order(rows)
    return {
        "fitted_order": "inf" if math.isinf(order) else order,
        "kind": "laplace",
        "rows": [{"error": e, "step": h} for (h, e) in rows],
        "scenario": scenario,
    }


# ---------------------------------------------------------------------------
# commands


def _dump_json(obj: dict, path: str):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_verify(args) -> int:
    report = run_verify(args.scenario, args.suite, args.events, args.seed)
    out = _outdir(args.out)
    path = os.path.join(out, f"verify_{args.scenario}_{args.suite}.json")
    _dump_json(report, path)
    for row in report["identities"]:
        flag = "PASS" if row["pass"] else "FAIL"
        print(
            f"{flag} {row['identity_name']}: residual={row['residual']:.3e} "
            f"tol={row['tol']:.1e}"
        )
    n_fail = sum(1 for r in report["identities"] if not r["pass"])
    print(
        f"{report['n_identities']} identities checked on {report['n_events']} events; "
        f"{n_fail} failed; report: {path}"
    )
    return 0 if report["all_pass"] else 1


def cmd_flow(args) -> int:
    surface = get_scenario(args.scenario)
    params = LdGParams(L=args.L, a=args.a, b=args.b, c=args.c)
    config = FlowConfig(
        mode=args.mode,
        n=args.n,
        dt=args.dt,
        steps=args.steps,
        method=args.method,
        ic=args.ic,
        seed=args.seed,
        beta0=args.beta0,
        amplitude=args.amplitude,
        snapshot_every=args.snapshot_every,
        crosscheck_every=args.crosscheck_every,
    )
    out = _outdir(args.out)
    result = run_flow(surface, params, config, out_dir=out)
    first = result.energy_rows[0]
    last = result.energy_rows[-1]
    monotone = bool(
        np.all(np.diff(result.energies) <= 1e-10)
    )
    report = {
        "crosscheck_max_residual": max((r[2] for r in result.crosschecks), default=None),
        "config": {
            "crosscheck_every": config.crosscheck_every,
            "beta0": config.beta0,
            "dt": config.dt,
            "ic": config.ic,
            "method": config.method,
            "mode": config.mode,
            "n": config.n,
            "seed": config.seed,
            "snapshot_every": config.snapshot_every,
            "steps": config.steps,
        },
        "energy_final": last[4],
        "energy_initial": first[4],
        "monotone": monotone,
        "params": {"L": params.L, "a": params.a, "b": params.b, "c": params.c},
        "scenario": args.scenario,
        "stability_bound": result.bound,
    }
    path = os.path.join(out, "flow_report.json")
    _dump_json(report, path)
    print(
        f"flow {config.mode} on {args.scenario}: {config.steps} steps, "
        f"energy {first[4]:.6g} -> {last[4]:.6g}, monotone={monotone}"
    )
    print(f"energy trace: {os.path.join(out, 'energy.csv')}; report: {path}")
    return 0


_CONVERGE_DEFAULT_SCENARIO = {
    "fd": "torus-breathing",
    "thinfilm": "torus-breathing-drift",
    "laplace": "torus-static",
}


def cmd_converge(args) -> int:
    scenario = args.scenario or _CONVERGE_DEFAULT_SCENARIO[args.kind]
    out = _outdir(args.out)
    if args.kind == "fd":
        report = run_converge_fd(scenario, args.seed)
        csvs = [("converge_fd.csv", report["rows"], report["fitted_order"])]
    elif args.kind == "laplace":
        report = run_converge_laplace(scenario)
        csvs = [("converge_laplace.csv", report["rows"], report["fitted_order"])]
    else:
        report = run_converge_thinfilm(scenario, args.seed)
        csvs = [
            (
                f"converge_thinfilm_{rep['quantity']}.csv",
                rep["rows"],
                rep["fitted_order"],
            )
            for rep in report["reports"]
        ]
    for fname, rows, order in csvs:
        with open(os.path.join(out, fname), "w") as fh:
            fh.write("step,error,fitted_order\n")
            for row in rows:
                step = row.get("step", row.get("xi"))
                fh.write(f"{step:.6g},{row['error']:.6e},{order}\n")
        print(f"wrote {os.path.join(out, fname)} (fitted_order={order})")
    _dump_json(report, os.path.join(out, f"converge_{args.kind}.json"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="surfrates",
        description="Verification and simulation tools for time derivatives on moving surfaces",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run identity and dual-path checks")
    pv.add_argument("--scenario", required=True, help=f"one of {', '.join(list_scenarios())}")
    pv.add_argument("--suite", default="all", choices=SUITES)
    pv.add_argument("--events", type=int, default=20)
    pv.add_argument("--seed", type=int, default=20240)
    pv.add_argument("--out", default=None)

    pf = sub.add_parser("flow", help="integrate a surface Landau-de Gennes flow")
    pf.add_argument("--scenario", default="torus-static")
    pf.add_argument("--mode", default="Conforming_Material", choices=FLOW_MODES)
    pf.add_argument("--n", type=int, default=48)
    pf.add_argument("--dt", type=float, default=1e-4)
    pf.add_argument("--steps", type=int, default=200)
    pf.add_argument("--method", default="euler", choices=("euler", "rk4"))
    pf.add_argument("--ic", default="random-smooth")
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--beta0", type=float, default=0.3)
    pf.add_argument("--amplitude", type=float, default=0.1)
    pf.add_argument("--L", type=float, default=1.0)
    pf.add_argument("--a", type=float, default=-1.0)
    pf.add_argument("--b", type=float, default=0.0)
    pf.add_argument("--c", type=float, default=1.0)
    pf.add_argument("--snapshot-every", type=int, default=0)
    pf.add_argument("--crosscheck-every", type=int, default=0)
    pf.add_argument("--out", default=None)

    pc = sub.add_parser("converge", help="convergence studies")
    pc.add_argument("--kind", required=True, choices=("fd", "thinfilm", "laplace"))
    pc.add_argument("--scenario", default=None)
    pc.add_argument("--seed", type=int, default=7)
    pc.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "flow":
            return cmd_flow(args)
        return cmd_converge(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StabilityError as exc:
        print(f"stability error: {exc}", file=sys.stderr)
        return 1
    except SurfratesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
