"""Command-line interface: ``inhomfpu <subcommand> [options]``.

Results are written as JSON (default) or CSV.  Every output echoes the
resolved configuration.  Without ``--out`` the output goes to
``$INHOMFPU_OUTPUT_DIR/<subcommand>.<fmt>`` when that variable is set and to
standard output otherwise.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import FPUError

OUTPUT_ENV = "INHOMFPU_OUTPUT_DIR"


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _write(args, result=None, table=None, columns=None):
    """Serialize a JSON document or a CSV table with a commented config header."""
    fmt = args.format
    if fmt == "csv" and table is None:
        raise FPUError("this subcommand has no tabular output; use --format json")
    buf = io.StringIO()
    if fmt == "json":
        doc = {"version": __version__, "config": _config(args), "result": result}
        json.dump(_jsonable(doc), buf, indent=2, sort_keys=False)
        buf.write("\n")
    else:
        buf.write("# " + json.dumps(_jsonable(_config(args)), sort_keys=True) + "\n")
        buf.write(",".join(columns) + "\n")
        np.savetxt(buf, np.atleast_2d(table), fmt="%.17g", delimiter=",")
    text = buf.getvalue()
    path = args.out
    if path is None and os.environ.get(OUTPUT_ENV):
        path = os.path.join(os.environ[OUTPUT_ENV], f"{args.command}.{fmt}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------- subcommands

def cmd_spectrum(args):
    from .lattice import InverseMasses, char_poly_identities, spectrum

    am = InverseMasses.from_masses(args.masses) if args.masses else InverseMasses(args.inverse_masses)
    sp = spectrum(am)
    p1, p2 = char_poly_identities(am)
    res = sp.to_dict()
    res.update(inverse_masses=am.a, p_n_minus_1=p1, p_n_minus_2=p2)
    if args.format == "csv":
        table = np.column_stack([sp.eigenvalues, sp.eigenvectors.T])
        cols = ["eigenvalue"] + [f"v{i + 1}" for i in range(am.n)]
        return _write(args, table=table, columns=cols)
    _write(args, res)


def cmd_fiber(args):
    from .fiber import (ResonanceRatio, classify_resonance, fiber123, solve_fiber_at,
                        spherical_coords, target_spectrum, u_from_eta2, xi_eta)

    r = ResonanceRatio.parse(args.ratio)
    t = target_spectrum(r)
    xi, eta = xi_eta(t)

    def with_sph(p):
        d = p.to_dict()
        if args.spherical:
            s = spherical_coords(p)
            d.update(phi=s.phi, psi=s.psi, rho=s.rho)
        return d

    res = {"ratio": str(r), "eigenvalues": t.values, "xi": xi, "eta": eta}
    if args.u is not None:
        if str(r) != "1:2:3":
            raise FPUError("--u parametrizes the 1:2:3 branch only")
        pts = [fiber123(args.u)]
    elif args.eta2 is not None:
        pts = solve_fiber_at(xi, eta, args.eta2)
    else:
        c = classify_resonance(r, grid=args.grid)
        res["classification"] = c.to_dict()
        pts = c.points + [p for b in c.branches for p in b.sample(args.samples)]
    if args.format == "csv":
        rows = []
        for p in pts:
            s = spherical_coords(p)
            param = p.parameter
            rows.append([param, *p.a, s.phi, s.psi])
        return _write(args, table=np.array(rows) if rows else np.empty((0, 7)),
                      columns=["param", "a1", "a2", "a3", "a4", "phi", "psi"])
    res["points"] = [with_sph(p) for p in pts]
    if str(r) == "1:2:3" and args.eta2 is not None:
        res["u"] = u_from_eta2(args.eta2)
    _write(args, res)


def cmd_transform(args):
    from .transform import MONOMIALS, cubic_from_table, cubic_from_transform, transform_pair

    tp = transform_pair(args.u, numeric=args.numeric)
    if args.emit in ("K", "L"):
        M = tp.K if args.emit == "K" else tp.L
        if args.format == "csv":
            return _write(args, table=M, columns=[f"c{j + 1}" for j in range(4)])
        return _write(args, {"u": args.u, args.emit: M, "eigenvalues": tp.eigenvalues})
    d = cubic_from_transform(tp.L, args.alpha) if args.numeric else cubic_from_table(args.u, args.alpha)
    if args.format == "csv":
        return _write(args, table=d.as_array()[None, :], columns=[f"d{i + 1}" for i in range(10)])
    res = d.to_dict()
    res["monomials"] = list(MONOMIALS)
    _write(args, res)


def _parse_scan(text):
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise argparse.ArgumentTypeError("scan must look like u0:u1:steps")


def cmd_stability(args):
    from .normalform import find_periodic_general, hopf_scan, normal_mode_stability
    from .transform import cubic_from_table

    if args.scan is not None:
        rows = hopf_scan(args.scan, eps=args.eps, A=args.A, B=args.B)
        if args.format == "csv":
            table = np.array([[u, ["EE", "EH", "HH", "C"].index(c), *np.abs(ev.real).max(keepdims=True)]
                              for u, c, ev in rows])
            return _write(args, table=table, columns=["u", "class_index", "max_abs_real"])
        return _write(args, {"scan": [{"u": u, "class": c, "eigenvalues": [[z.real, z.imag] for z in ev]}
                                      for u, c, ev in rows]})
    d = cubic_from_table(args.u)
    if args.mode == "general":
        sols = find_periodic_general(args.E0, d.q, d.d6, args.eps)
        return _write(args, {"u": args.u, "q": d.q, "solutions": [s.to_dict() for s in sols]})
    rep = normal_mode_stability(args.mode, d.d6, d.d9, args.A, args.B, args.eps)
    res = rep.to_dict()
    res.update(u=args.u, d6=d.d6, d9=d.d9)
    _write(args, res)


def _spec_and_state(args):
    from .dynamics import preset

    p = preset(args.preset, eps=args.eps)
    state = p.state0.copy()
    if args.x0 is not None:
        x = np.asarray(args.x0)
        if x.size != state.size // 2:
            raise FPUError(f"--x0 needs {state.size // 2} values for preset {args.preset}")
        state[: x.size] = x
    if args.v0 is not None:
        v = np.asarray(args.v0)
        if v.size != state.size // 2:
            raise FPUError(f"--v0 needs {state.size // 2} values for preset {args.preset}")
        state[state.size // 2:] = v
    return p, state


def cmd_simulate(args):
    from .dynamics import integrate, integrate_verlet

    p, state = _spec_and_state(args)
    T = args.T if args.T is not None else p.T
    if args.verlet:
        if p.spec.kind != "FullChain":
            raise FPUError("--verlet is available for chain presets only")
        every = max(1, int(round(args.dt / args.verlet)))
        tr = integrate_verlet(p.spec, state, T, args.verlet, sample_every=every)
    else:
        tr = integrate(p.spec, state, T, args.dt, rtol=args.rtol, atol=args.rtol)
    cols = ["t"] + [f"s{i + 1}" for i in range(state.size)] + ["H", "H2", "momentum", "tau1", "tau2", "tau3"]
    table = np.column_stack([tr.t, tr.states, tr.H, tr.H2, tr.momentum, tr.actions])
    if args.format == "csv":
        return _write(args, table=table, columns=cols)
    _write(args, {"kind": p.spec.kind, "energy_drift": tr.energy_drift(), "columns": cols, "rows": table})


def cmd_ensemble(args):
    from .dynamics import EnsembleSpec, ensemble_simplex, preset

    p = preset(args.preset, eps=args.eps)
    e = EnsembleSpec(args.center, args.count, args.spread, args.seed, args.E0)
    snaps = ensemble_simplex(p.spec, e, args.times)
    rows = [[s.t, i, *pt] for s in snaps for i, pt in enumerate(s.points)]
    if args.format == "csv":
        return _write(args, table=np.array(rows), columns=["t", "index", "s1", "s2", "s3"])
    _write(args, {"snapshots": [{"t": s.t, "spread": s.spread(), "points": s.points} for s in snaps]})


def cmd_validate(args):
    from .validate import run_validation

    checks = run_validation()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}", file=sys.stderr)
    if args.out is not None or os.environ.get(OUTPUT_ENV):
        _write(args, {"checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]})
    return 0 if all(c.passed for c in checks) else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inhomfpu", description="Inhomogeneous periodic FPU chain toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", help="output file ('-' for stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
        return p

    p = add("spectrum", cmd_spectrum, "eigenvalues of A C for given masses")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--masses", type=_floats)
    g.add_argument("--inverse-masses", type=_floats)

    p = add("fiber", cmd_fiber, "inverse-mass vectors realizing a resonance")
    p.add_argument("--ratio", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--u", type=float)
    g.add_argument("--eta2", type=float)
    g.add_argument("--classify", action="store_true")
    p.add_argument("--spherical", action="store_true")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--grid", type=int, default=10_000)

    p = add("transform", cmd_transform, "eigenmode transform and cubic coefficients")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--emit", choices=("K", "L", "dcoeffs"), default="dcoeffs")
    p.add_argument("--numeric", action="store_true", help="use the numerical eigen-decomposition")
    p.add_argument("--alpha", type=float, default=1.0)

    p = add("stability", cmd_stability, "stability of periodic solutions of the normal form")
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--mode", choices=("1", "2", "3", "edge", "general"), default="2")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--E0", type=float, default=7.0)
    p.add_argument("--scan", type=_parse_scan)

    from .dynamics import preset_names

    p = add("simulate", cmd_simulate, "integrate a preset system")
    p.add_argument("--preset", required=True, choices=preset_names())
    p.add_argument("--eps", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float, default=1.0, help="sampling interval")
    p.add_argument("--x0", type=_floats)
    p.add_argument("--v0", type=_floats)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--verlet", type=float, metavar="STEP", help="fixed-step Verlet (chain presets)")

    p = add("ensemble", cmd_ensemble, "action-simplex snapshots of an ensemble")
    p.add_argument("--preset", required=True, choices=[n for n in preset_names() if not n.startswith("chain_")])
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--center", default="mode1", choices=("mode1", "mode2", "mode3"))
    p.add_argument("--count", type=int, default=98)
    p.add_argument("--spread", type=float)
    p.add_argument("--E0", type=float, default=4.5)
    p.add_argument("--times", type=_floats, default=[0.0, 225.0, 450.0])

    add("validate", cmd_validate, "run the cross-checks")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = args.func(args)
    except FPUError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
