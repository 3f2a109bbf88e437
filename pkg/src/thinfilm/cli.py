"""Batch driver: dispersion scans, expansion checks, continuation, spectra, evolution.

Subcommands
-----------
``dispersion``  growth-rate curves for a list of Marangoni numbers
``local``       numerical vs closed-form branch expansion coefficients
``continue``    trivial-branch scan, seeding, continuation, events, outputs
``stability``   spectrum reports for a stored branch point
``evolve``      time integration from a snapshot or from flat + perturbation

Configuration is a plain-text INI file (``key = value`` under
``[lattice]``, ``[params]``, ``[continuation]``, ``[output]`` sections)
with command-line overrides via repeated ``--set section.key=value``.
The output root defaults to the current directory and can be redirected
with the ``THINFILM_OUTDIR`` environment variable.

Exit codes: 0 success, 2 tolerance failure, 3 domain violation,
4 convergence failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

import numpy as np

from . import continuation as ct
from . import evolve as ev
from . import field as fld
from . import linstab as ls
from . import localbif as lb
from .lattice import make_lattice
from .render import ppm_heatmap, svg_line_plot
from .stationary import DomainViolation, NoConvergence, StationaryState, constraint_K

EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4


class ToleranceFailure(RuntimeError):
    pass


def _out_dir(path: str) -> str:
    root = os.environ.get("THINFILM_OUTDIR", ".")
    full = path if os.path.isabs(path) else os.path.join(root, path)
    os.makedirs(full, exist_ok=True)
    return full


def _load_config(path: str | None, overrides: list[str]) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path:
        with open(path) as fh:
            cfg.read_file(fh)
    for item in overrides:
        key, _, value = item.partition("=")
        section, _, option = key.strip().partition(".")
        if not cfg.has_section(section):
            cfg.add_section(section)
        cfg.set(section, option.strip(), value.strip())
    return cfg


def _cfg_get(cfg, section, option, fallback=None, cast=str):
    if cfg.has_option(section, option):
        return cast(cfg.get(section, option))
    return fallback


# -- dispersion ----------------------------------------------------------------

def cmd_dispersion(args) -> int:
    m_list = [float(x) for x in args.M.split(",") if x.strip()]
    if not m_list:
        raise ToleranceFailure("empty Marangoni list")
    out = _out_dir(args.out)
    ks = np.linspace(0.0, args.kmax, args.points)
    curves = []
    lines = ["k," + ",".join(f"M={m:g}" for m in m_list)]
    table = [[ls.dispersion(k, m, args.g) for m in m_list] for k in ks]
    for k, row in zip(ks, table):
        lines.append(f"{k:.12e}," + ",".join(f"{v:.12e}" for v in row))
    path = os.path.join(out, "dispersion.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if args.svg:
        for j, m in enumerate(m_list):
            curves.append((ks, np.array([r[j] for r in table]), f"M={m:g}"))
        svg_line_plot(
            os.path.join(out, "dispersion.svg"), curves,
            xlabel="|k|", ylabel="growth rate", title=f"dispersion, g={args.g:g}",
        )
    print(f"wrote {path}")
    return EXIT_OK


# -- local expansion -----------------------------------------------------------

def cmd_local(args) -> int:
    lat = make_lattice(args.kind, args.k0, args.N)
    num = lb.expansion_coefficients(lat, args.g, args.harmonic)
    closed = lb.closed_form_coefficients(args.kind, args.g, args.harmonic * args.k0)
    if args.harmonic != 1:
        closed = (closed[0] / args.harmonic,
                  None if closed[1] is None else closed[1] / args.harmonic ** 2)
    report = {
        "lattice": lat.header(),
        "g": args.g,
        "harmonic": args.harmonic,
        "numerical": {"Mdot0": num[0], "Mddot0": num[1]},
        "closed_form": {"Mdot0": closed[0], "Mddot0": closed[1]},
    }
    errs = []
    for a, b in ((num[0], closed[0]), (num[1], closed[1])):
        if b is None:
            continue
        scale = max(abs(b), 1e-30)
        errs.append(abs(a - b) / scale)
    report["max_relative_error"] = max(errs)
    out = _out_dir(args.out)
    path = os.path.join(out, "local_expansion.json")
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    def _fmt(pair):
        a, b = pair
        return f"({a:.9g}, {'none' if b is None else format(b, '.9g')})"

    print(
        f"{args.kind} g={args.g:g} k0={args.k0:g}: numerical {_fmt(num)} "
        f"closed {_fmt(closed)} rel_err {report['max_relative_error']:.3e}"
    )
    if report["max_relative_error"] > args.tol:
        raise ToleranceFailure(
            f"expansion mismatch {report['max_relative_error']:.3e} > {args.tol:g}"
        )
    print(f"wrote {path}")
    return EXIT_OK


# -- continuation ----------------------------------------------------------------

def _continuation_config(cfg) -> ct.ContinuationConfig:
    c = ct.ContinuationConfig()
    sec = "continuation"
    c.ds = _cfg_get(cfg, sec, "ds", c.ds, float)
    c.ds_trivial = _cfg_get(cfg, sec, "ds_trivial", c.ds_trivial, float)
    c.ds_max = _cfg_get(cfg, sec, "ds_max", c.ds, float)
    c.max_steps = _cfg_get(cfg, sec, "max_steps", c.max_steps, int)
    c.s0 = _cfg_get(cfg, sec, "s0", c.s0, float)
    c.guard = _cfg_get(cfg, sec, "guard", c.guard, float)
    c.rupture_stop = _cfg_get(cfg, sec, "rupture_stop", c.rupture_stop, float)
    c.newton_tol = _cfg_get(cfg, sec, "newton_tol", c.newton_tol, float)
    c.spectrum_stride = _cfg_get(cfg, sec, "spectrum_stride", c.spectrum_stride, int)
    return c


def _write_branch_outputs(branch, name, out, emit_svg, snapshot_stride, extra=None):
    csv_path = os.path.join(out, f"{name}.csv")
    ct.write_branch_csv(branch, csv_path)
    ct.write_branch_json(branch, os.path.join(out, f"{name}.json"), extra=extra)
    snap_dir = os.path.join(out, name)
    os.makedirs(snap_dir, exist_ok=True)
    ct.write_branch_snapshots(branch, snap_dir, snapshot_stride)
    if emit_svg:
        m = np.array([p.state.M for p in branch.points])
        l2 = np.array([p.diagnostics.l2_norm for p in branch.points])
        markers = []
        for e in branch.events:
            if e["type"] not in ("fold", "bifurcation_candidate"):
                continue
            label = "fold" if e["type"] == "fold" else "bif"
            y = float(l2[int(np.argmin(np.abs(m - e["M"])))])
            markers.append((e["M"], y, label))
        svg_line_plot(
            os.path.join(out, f"{name}.svg"),
            [(m, l2, name)],
            xlabel="M", ylabel="|v|_L2", title="bifurcation diagram",
            markers=markers,
        )
        final = branch.points[-1].state.v
        ppm_heatmap(os.path.join(out, f"{name}_final.ppm"), fld.synthesize(final))
    print(f"wrote {csv_path} ({len(branch.points)} points, {branch.termination})")


def cmd_continue(args) -> int:
    cfg = _load_config(args.config, args.set or [])
    kind = _cfg_get(cfg, "lattice", "kind", "square")
    k0 = _cfg_get(cfg, "lattice", "k0", 1.0, float)
    N = _cfg_get(cfg, "lattice", "n", 64, int)
    g = _cfg_get(cfg, "params", "g", 1.0, float)
    harmonic = _cfg_get(cfg, "continuation", "harmonic", 1, int)
    direction = _cfg_get(cfg, "continuation", "direction", "both")
    window_lo = _cfg_get(cfg, "continuation", "window_lo", None, float)
    window_hi = _cfg_get(cfg, "continuation", "window_hi", None, float)
    attempt_switch = _cfg_get(cfg, "continuation", "attempt_switch", "no") in ("yes", "true", "1")
    out = _out_dir(_cfg_get(cfg, "output", "dir", "out"))
    stride = _cfg_get(cfg, "output", "snapshot_stride", 25, int)
    emit_svg = _cfg_get(cfg, "output", "emit_svg", "yes") in ("yes", "true", "1")

    lat = make_lattice(kind, k0, N)
    ccfg = _continuation_config(cfg)
    info = lb.locate_bifurcation(lat, g, harmonic)

    m_detected = None
    if window_lo is not None and window_hi is not None:
        events = ct.scan_trivial_branch(lat, g, window_lo, window_hi, ccfg.ds_trivial)
        if events:
            m_detected = min(events, key=lambda e: abs(e["M"] - info.M_crit))["M"]
        print(f"trivial-branch candidates: {[round(e['M'], 6) for e in events]}")

    directions = {"both": (+1, -1), "+1": (+1,), "-1": (-1,)}[direction]
    if ccfg.max_steps == 0:
        for d in directions:
            name = f"branch_{'up' if d > 0 else 'down'}"
            empty = ct.Branch(origin=info, direction=d, g=g, points=[],
                              termination=ct.Termination.MAX_STEPS, config=ccfg)
            ct.write_branch_csv(empty, os.path.join(out, f"{name}.csv"))
            ct.write_branch_json(empty, os.path.join(out, f"{name}.json"),
                                 extra={"detected_M": m_detected})
        print("max_steps=0: wrote empty branches")
        return EXIT_OK

    for d in directions:
        name = f"branch_{'up' if d > 0 else 'down'}"
        seed = ct.seed_branch(info, d, ccfg)
        branch = ct.Branch(origin=info, direction=d, g=g, points=[seed], config=ccfg)
        branch = ct.extend_branch(branch, ccfg)
        _write_branch_outputs(branch, name, out, emit_svg, stride,
                              extra={"detected_M": m_detected})

        if attempt_switch:
            cands = [e for e in branch.events if e["type"] == "bifurcation_candidate"]
            for i, cand in enumerate(cands):
                try:
                    switched = ct.branch_switch(branch, cand, ccfg)
                except ct.InadmissibleKernel as err:
                    print(f"candidate at M={cand['M']:.6f}: {err}")
                    continue
                switched = ct.extend_branch(switched, ccfg)
                cls = ct.classify_switched_period(branch, switched)
                _write_branch_outputs(
                    switched, f"{name}_secondary{i}", out, emit_svg, stride,
                    extra={"period_classification": cls},
                )
                break
    return EXIT_OK


# -- stability -------------------------------------------------------------------

def _parse_class(token: str) -> ls.PerturbationClass:
    if token == "coperiodic":
        return ls.COPERIODIC
    for kind in ("superharmonic", "subharmonic"):
        if token.startswith(kind):
            return ls.PerturbationClass(kind, int(token[len(kind):]))
    raise ValueError(f"unknown perturbation class {token!r}")


def cmd_stability(args) -> int:
    snap = os.path.join(args.branch_dir, f"point_{args.point:04d}.snap")
    if not os.path.exists(snap):
        raise FileNotFoundError(f"no snapshot for point {args.point} at {snap}")
    v, header = fld.read_snapshot(snap)
    g, M = header["g"], header["M"]
    state = StationaryState(v, M, M * constraint_K(v))
    out = _out_dir(args.out)
    for token in args.classes.split(","):
        cls = _parse_class(token.strip())
        rep = ls.evolution_linearization_spectrum(
            state, g, cls, symmetric=not args.full_space
        )
        path = os.path.join(out, f"spectrum_{cls}.json")
        with open(path, "w") as fh:
            fh.write(rep.to_json() + "\n")
        print(f"{cls}: n_unstable={rep.n_unstable} top={rep.eigenvalues[0]:.6e} -> {path}")
    return EXIT_OK


# -- evolve ----------------------------------------------------------------------

def cmd_evolve(args) -> int:
    if args.snapshot:
        v, header = fld.read_snapshot(args.snapshot)
        g, M = header["g"], header["M"]
        lat = v.lat
        if 1.0 + fld.synthesize(v, 2).min() <= 0.0:
            raise DomainViolation("initial snapshot is inadmissible (min h <= 0)")
    else:
        lat = make_lattice(args.kind, args.k0, args.N)
        g, M = args.g, args.M
        v = fld.zeros(lat)
        if args.perturb_orbit:
            n1, n2 = (int(x) for x in args.perturb_orbit.split(","))
            v = v + fld.from_orbit(lat, (n1, n2), args.eps)
        elif args.noise > 0:
            rng = np.random.default_rng(args.seed)
            c = args.noise * rng.standard_normal(lat.n_orbits)
            c[lat.mean_orbit] = 0.0
            c *= np.exp(-0.5 * np.sqrt(lat.orbit_nsq))
            v = fld.from_coeffs(lat, c)

    from .stationary import ProblemParams

    state = ev.EvolutionState(v, 0.0, ProblemParams(g=g, M=M), args.dt)
    n_steps = int(round(args.T / args.dt))
    out = _out_dir(args.out)
    final, rows = ev.simulate(state, n_steps, record_stride=args.stride)
    ev.write_trajectory_csv(os.path.join(out, "trajectory.csv"), rows)
    fld.write_snapshot(os.path.join(out, "final.snap"), final.v, g, M, 0.0)

    summary = {
        "steps": n_steps,
        "dt": args.dt,
        "mass_drift": abs(rows[-1]["mass"] - rows[0]["mass"]),
        "final_min_v": rows[-1]["min_v"],
        "final_l2": rows[-1]["l2_norm"],
    }
    if args.report_growth:
        ts = np.array([r["t"] for r in rows])
        l2 = np.array([r["l2_norm"] for r in rows])
        ok = (l2 > 0) & (l2 < 1e-2)
        if ok.sum() >= 3:
            rate = np.polyfit(ts[ok], np.log(l2[ok]), 1)[0]
            ref = max(
                ls.dispersion(np.sqrt(q), M, g) for q in set(lat.orbit_ksq[1:])
            )
            summary["growth_rate"] = float(rate)
            summary["dispersion_reference"] = float(ref)
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"evolved {n_steps} steps; mass drift {summary['mass_drift']:.3e}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thinfilm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dispersion", help="dispersion curves")
    d.add_argument("--g", type=float, default=1.0)
    d.add_argument("--M", type=str, required=True, help="comma-separated list")
    d.add_argument("--kmax", type=float, default=2.0)
    d.add_argument("--points", type=int, default=201)
    d.add_argument("--out", type=str, default="out")
    d.add_argument("--svg", action="store_true")
    d.set_defaults(func=cmd_dispersion)

    l = sub.add_parser("local", help="expansion coefficients vs closed forms")
    l.add_argument("--kind", choices=["square", "hexagon"], required=True)
    l.add_argument("--g", type=float, default=1.0)
    l.add_argument("--k0", type=float, default=1.0)
    l.add_argument("--N", type=int, default=64)
    l.add_argument("--harmonic", type=int, default=1)
    l.add_argument("--tol", type=float, default=1e-6)
    l.add_argument("--out", type=str, default="out")
    l.set_defaults(func=cmd_local)

    c = sub.add_parser("continue", help="branch continuation pipeline")
    c.add_argument("--config", type=str, default=None)
    c.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    c.set_defaults(func=cmd_continue)

    s = sub.add_parser("stability", help="spectrum reports for a branch point")
    s.add_argument("--branch-dir", type=str, required=True)
    s.add_argument("--point", type=int, required=True)
    s.add_argument("--classes", type=str, default="coperiodic,superharmonic2,subharmonic2")
    s.add_argument("--full-space", action="store_true")
    s.add_argument("--out", type=str, default="out")
    s.set_defaults(func=cmd_stability)

    e = sub.add_parser("evolve", help="time integration")
    e.add_argument("--snapshot", type=str, default=None)
    e.add_argument("--kind", choices=["square", "hexagon"], default="square")
    e.add_argument("--k0", type=float, default=1.0)
    e.add_argument("--N", type=int, default=32)
    e.add_argument("--g", type=float, default=1.0)
    e.add_argument("--M", type=float, default=8.5)
    e.add_argument("--noise", type=float, default=0.0)
    e.add_argument("--perturb-orbit", type=str, default=None, metavar="N1,N2")
    e.add_argument("--eps", type=float, default=1e-4)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--T", type=float, default=1.0)
    e.add_argument("--dt", type=float, default=1e-4)
    e.add_argument("--stride", type=int, default=100)
    e.add_argument("--report-growth", action="store_true")
    e.add_argument("--out", type=str, default="out")
    e.set_defaults(func=cmd_evolve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToleranceFailure as err:
        print(f"tolerance failure: {err}", file=sys.stderr)
        return EXIT_TOLERANCE
    except DomainViolation as err:
        print(f"domain violation: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NoConvergence, ct.InadmissibleKernel) as err:
        print(f"convergence failure: {err}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
