"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or precondition
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import ancilla, fidelity, focksim, prep, report, spectral, verify
from .fidelity import QubitState

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULT_TOL = float(os.environ.get("KLMFID_TOL", "1e-10"))


class UsageError(Exception):
    pass


def _ancilla_for(state, n):
    if state == "uniform":
        return ancilla.uniform_klm(n)
    if state == "optimal":
        return ancilla.optimal_u(n)
    if state == "vstate":
        return ancilla.plus_optimal_v(n)
    if state.startswith("custom:"):
        path = state.split(":", 1)[1]
        c = ancilla.load_coefficients(path)
        if n is not None and c.n != n:
            raise UsageError(f"{path} holds {c.n + 1} coefficients, expected {n + 1}")
        return c
    raise UsageError(f"unknown state selector {state!r}")


def _parse_psi(text, rng):
    shorthand = {
        "+": (1 / math.sqrt(2), 1 / math.sqrt(2)),
        "-": (1 / math.sqrt(2), -1 / math.sqrt(2)),
        "0": (1.0, 0.0),
        "1": (0.0, 1.0),
    }
    if text in shorthand:
        return QubitState(*shorthand[text])
    if text == "random":
        return QubitState.random(rng)
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        parts = []
    if len(parts) != 4:
        raise UsageError(f"psi must be +, -, 0, 1, random or 're_a,im_a,re_b,im_b', got {text!r}")
    try:
        return QubitState.normalized(complex(parts[0], parts[1]), complex(parts[2], parts[3]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _psi_from_args(args, rng):
    if getattr(args, "bloch", None):
        try:
            theta, phi = (float(p) for p in args.bloch.split(","))
        except ValueError:
            raise UsageError(f"--bloch expects 'theta,phi', got {args.bloch!r}") from None
        return QubitState.from_bloch(theta, phi)
    return _parse_psi(args.psi, rng)


def _require_n(n):
    if n is None or n < 1:
        raise UsageError(f"n must be a positive integer, got {n}")
    return n


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _dump(obj, args):
    if args.format == "json":
        _emit(json.dumps(obj, indent=2) + "\n", args.output)
    elif args.format == "csv":
        keys = list(obj)
        vals = [report.fmt(obj[k]) if isinstance(obj[k], (int, float)) else str(obj[k]) for k in keys]
        _emit(",".join(keys) + "\n" + ",".join(vals) + "\n", args.output)
    else:
        width = max(len(k) for k in obj)
        lines = []
        for k, v in obj.items():
            v = report.fmt(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v
            lines.append(f"{k.ljust(width)}  {v}")
        _emit("\n".join(lines) + "\n", args.output)


def cmd_theta(args):
    n = _require_n(args.n)
    try:
        sol = spectral.solve_theta(n, tol=args.residual_tol)
    except spectral.ThetaSolverError as exc:
        raise UsageError(str(exc)) from None
    _dump(
        {
            "n": n,
            "theta": sol.theta,
            "mu": sol.mu,
            "residual": sol.residual,
            "bracket_lo": sol.bracket[0],
            "bracket_hi": sol.bracket[1],
        },
        args,
    )
    return EXIT_OK


def cmd_fidelity(args):
    n = _require_n(args.n)
    c = _ancilla_for(args.state, n)
    out = {
        "n": c.n,
        "state": c.label,
        "channel_fidelity": fidelity.channel_fidelity(c),
        "channel_fidelity_quadrature": fidelity.channel_fidelity_quadrature(c, args.nodes),
    }
    if args.psi is not None or args.bloch:
        psi = _psi_from_args(args, np.random.default_rng(args.seed))
        out["success_probability"] = fidelity.success_probability(c, psi)
    if args.show_coefficients:
        out["coefficients"] = [float(report.fmt(x)) for x in c.c]
        if args.format == "csv":
            _emit(c.to_csv(), args.output)
            return EXIT_OK
    _dump(out, args)
    return EXIT_OK


def cmd_table(args):
    lo, hi = args.n_min, args.n_max
    if lo < 1 or hi < lo:
        raise UsageError(f"need 1 <= n_min <= n_max, got {lo}..{hi}")
    rows = []
    for n in range(lo, hi + 1):
        r = fidelity.fidelity_report(n)
        r.check()
        rows.append(r)
    if args.format == "json":
        text = report.reports_to_json(rows)
    elif args.format == "csv":
        text = report.reports_to_csv(rows)
    else:
        text = report.reports_to_text(rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_asymptotics(args):
    n = _require_n(args.n)
    sol = spectral.solve_theta(n)
    asym = fidelity.asymptotics(n)
    u = ancilla.optimal_u(n, validate=n <= ancilla.VALIDATE_MAX_N)
    v = ancilla.plus_optimal_v(n, validate=n <= ancilla.VALIDATE_MAX_N)
    f_v = fidelity.channel_fidelity(v)
    p_u = fidelity.p_u_plus(n, u)
    _dump(
        {
            "n": n,
            "f_opt": sol.mu,
            "f_opt_asym": asym.f_opt_asym,
            "franson": fidelity.franson_fidelity(n),
            "delta": sol.theta - math.pi / (n + 1),
            "delta_asym": asym.delta_asym,
            "v0sq": ancilla.v0_squared(n),
            "v0sq_asym": asym.v0sq_asym,
            "u0sq": ancilla.u0_squared(n, sol.theta),
            "u0sq_asym": asym.u0sq_asym,
            "p_u_plus": p_u,
            "p_u_plus_asym": asym.p_u_plus_asym,
            "gap": sol.mu - f_v,
            "gap_asym": asym.gap_asym,
        },
        args,
    )
    return EXIT_OK


def cmd_simulate(args):
    n = _require_n(args.n)
    if n > args.cap:
        raise UsageError(f"n={n} exceeds the simulation cap {args.cap}; raise it with --cap or KLMFID_SIM_CAP")
    rng = np.random.default_rng(args.seed)
    c = _ancilla_for(args.state, n)
    psi = _psi_from_args(args, rng)
    res = focksim.verify_teleportation(c, psi, tol=args.tol, cap=args.cap)
    if args.format == "json":
        _emit(res.to_json(indent=2) + "\n", args.output)
    else:
        lines = [f"n={n} ancilla={c.label} alpha={psi.alpha:.6g} beta={psi.beta:.6g}"]
        lines.append("k  simulated               formula")
        for k, (a, b) in enumerate(zip(res.k_probability, res.k_probability_formula)):
            lines.append(f"{k:<2} {report.fmt(a):<23} {report.fmt(b)}")
        for p in res.patterns:
            if p.phase is not None:
                lines.append(f"pattern {p.measured} k={p.k} phase={p.phase:+.6f} deviation={p.deviation:.2e}")
        lines.append(f"max deviation {res.max_deviation:.3e} ({'ok' if res.ok else 'FAIL'})")
        if res.failure:
            lines.append(f"first failure: {res.failure}")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_prep(args):
    n = _require_n(args.n)
    c = _ancilla_for(args.state, n)
    try:
        circuit = prep.design_circuit(c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        p, _ = prep.simulate_heralded_prep(circuit, tol=args.tol)
    except prep.PrepConsistencyError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_FAIL
    out = json.loads(circuit.to_json())
    out["simulated_probability"] = float(report.fmt(p))
    status = EXIT_OK
    if n <= args.cap:
        check = prep.full_fock_prep_check(circuit, tol=args.tol, cap=args.cap)
        out["fock_max_deviation"] = float(check.max_deviation)
        out["fock_ok"] = bool(check.ok)
        status = EXIT_OK if check.ok else EXIT_FAIL
    if args.format == "json":
        _emit(json.dumps(out, indent=2) + "\n", args.output)
    else:
        out["transmissions"] = " ".join(report.fmt(t) for t in out["transmissions"])
        _dump(out, args)
    return status


def cmd_verify_all(args):
    if args.max_n < 1:
        raise UsageError("--max-n must be at least 1")
    results = verify.run_checks(max_n=args.max_n, seed=args.seed)
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.ok else 'FAIL'}  {r.name:<32} {r.seconds:7.2f}s  {r.detail}")
    failed = sum(not r.ok for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="klmfid",
        description="Channel fidelities and ancilla states for high-fidelity KLM teleportation.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "csv", "json"), default="human")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="verification tolerance (env KLMFID_TOL)")

    state_help = (
        "uniform | optimal | vstate | custom:<path> (one real per line, '#' comments; "
        "the vector is rescaled to unit norm)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", parents=[common], help="solve the angle condition")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--residual-tol", type=float, default=1e-12, help="accepted |g(theta)|")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("fidelity", parents=[common], help="channel fidelity of one ancilla")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--state", default="optimal", help=state_help)
    p.add_argument("--psi", default=None, help="+, -, 0, 1, random or re_a,im_a,re_b,im_b")
    p.add_argument("--bloch", default=None, help="input state as 'theta,phi'")
    p.add_argument("--nodes", type=int, default=64, help="Gauss-Legendre nodes")
    p.add_argument("--show-coefficients", action="store_true")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("table", parents=[common], help="fidelity report for a range of n")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("asymptotics", parents=[common], help="exact vs large-n expressions")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("simulate", parents=[common], help="Fock-space simulation of the protocol")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--state", default="optimal", help=state_help)
    p.add_argument("--psi", default="+", help="+, -, 0, 1, random or re_a,im_a,re_b,im_b")
    p.add_argument("--bloch", default=None, help="input state as 'theta,phi'")
    p.add_argument("--cap", type=int, default=focksim.DEFAULT_CAP, help="largest n simulated (env KLMFID_SIM_CAP)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("prep", parents=[common], help="heralded preparation circuit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--state", default="vstate", help=state_help)
    p.add_argument("--cap", type=int, default=focksim.DEFAULT_CAP)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("verify-all", parents=[common], help="run the full property suite")
    p.add_argument("--max-n", type=int, default=200)
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"klmfid: error: {exc}\n")
        return EXIT_USAGE
    except ancilla.OracleMismatchError as exc:
        sys.stderr.write(f"klmfid: verification failed: {exc}\n")
        return EXIT_FAIL
    except ValueError as exc:
        sys.stderr.write(f"klmfid: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"klmfid: error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
