"""Command-line front end.

Exit codes: 0 on success, 1 on argument or input errors, 2 when a numeric
result did not converge, failed verification or, for ``reproduce-paper``,
missed its tolerance. The report is written to standard output in every
case except argument errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import io as qio
from .ascent import AscentOptions
from .budget import example1_povm, example1_scenario, sequence_bound, tolerance_budget
from .distance import catalog_distance, d_unitary
from .gates import GateId, NotInCatalog, gate_matrix, match_catalog, parse_gate, permutation4_table
from .linalg import NumericError, QuditRegister, projector
from .noise import NoiseChannel, cost_lower_bounds, w1_error_rate
from .w1 import SolverOptions, verify_certificate, w1_distance_states, w1_norm
from .witness import witness_controlled_phase

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(ValueError):
    """Bad command-line input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="seed of every random draw (default 0)")
    p.add_argument("--tolerance", type=float, default=1e-6, help="solver tolerance (default 1e-6)")
    p.add_argument("--max-iterations", type=int, default=20000,
                   help="solver iteration cap (default 20000)")
    p.add_argument("--restarts", type=int, default=32, help="ascent restarts (default 32)")
    p.add_argument("--workers", type=int, default=1, help="worker processes for restarts (default 1)")
    p.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    p.add_argument("--verify", action="store_true", help="re-check certificates and witnesses")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwdist", description="Quantum W1 distances between states and unitaries.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("w1-state", help="W1 distance between two density matrices")
    p.add_argument("--rho", required=True, help="JSON file with a density matrix or state vector")
    p.add_argument("--sigma", required=True, help="JSON file with a density matrix or state vector")
    p.add_argument("--qudit-dim", type=int, default=2, help="local dimension d (default 2)")
    _common(p)

    p = sub.add_parser("w1-unitary", help="distance D(U, V) between two unitaries")
    p.add_argument("--u", default="I", help="gate expression or JSON matrix file (default I)")
    p.add_argument("--v", required=True, help="gate expression or JSON matrix file")
    p.add_argument("--method", choices=("auto", "numeric"), default="auto")
    _common(p)

    p = sub.add_parser("error-rate", help="W1 error rate of a gate under noise")
    p.add_argument("--u", required=True, help="ideal gate expression or JSON matrix file")
    p.add_argument("--channel", required=True,
                   help="channel JSON file, depolarizing:P or unitary:FILE|EXPR")
    p.add_argument("--mixed-bound", action="store_true",
                   help="also bound depolarizing noise through its unitary mixture")
    _common(p)

    p = sub.add_parser("budget", help="per-gate tolerance budget and sequence bound")
    p.add_argument("--alpha", type=float, required=True, help="probability tolerance in (0, 1]")
    p.add_argument("--t", type=int, required=True, help="number of gates")
    p.add_argument("--povm", default="example1", help="POVM JSON file or 'example1'")
    p.add_argument("--theta", type=float, help="noise angle of the diagonal-gate scenario")
    p.add_argument("--pairs", help="JSON file with a list of {\"u\": M, \"v\": M} gate pairs")
    _common(p)

    p = sub.add_parser("catalog", help="closed-form distances from the identity")
    p.add_argument("--v", help="gate expression or JSON matrix file; omit to list the catalog")
    _common(p)

    p = sub.add_parser("witness", help="explicit W1 decomposition for the controlled-phase gate")
    p.add_argument("--theta", type=float, required=True, help="phase in [0, 2 pi)")
    p.add_argument("--amplitudes", required=True,
                   help="four comma-separated amplitudes, or a JSON vector file")
    _common(p)

    p = sub.add_parser("reproduce-paper", help="recompute every reference value")
    p.add_argument("--out", help="directory for CSV tables and PNG figures")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    _common(p)
    p.set_defaults(format="pretty")
    return parser


def _options(args) -> AscentOptions:
    if args.restarts < 1:
        raise UsageError(f"--restarts must be at least 1, got {args.restarts}")
    if args.workers < 1:
        raise UsageError(f"--workers must be at least 1, got {args.workers}")
    if not args.tolerance > 0:
        raise UsageError(f"--tolerance must be positive, got {args.tolerance}")
    if args.max_iterations < 1:
        raise UsageError(f"--max-iterations must be at least 1, got {args.max_iterations}")
    refine = min(AscentOptions.refine, args.restarts)
    solver = SolverOptions(tolerance=args.tolerance, max_iterations=args.max_iterations)
    return AscentOptions(restarts=args.restarts, seed=args.seed, refine=refine, solver=solver,
                         workers=args.workers)


def _gate(text, flag, dim=None) -> GateId:
    """Gate from an expression or a matrix file; errors name the flag."""
    try:
        if Path(text).is_file():
            return GateId("custom", matrix=_check_dim(qio.load_matrix(text), dim))
        return parse_gate(text, dim, base_dir=Path.cwd())
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _check_dim(M, dim):
    if dim is not None and M.shape[0] != dim:
        raise ValueError(f"matrix has dimension {M.shape[0]}, expected {dim}")
    return M


def _gate_pair(u_text, v_text):
    """Parses ``--u`` and ``--v``, letting a bare ``I`` take the other side's dimension."""
    try:
        V = _gate(v_text, "--v")
    except UsageError:
        U = _gate(u_text, "--u")
        return U, _gate(v_text, "--v", gate_matrix(U).shape[0])
    dim = gate_matrix(V).shape[0]
    return _gate(u_text, "--u", dim), V


def _state(path, flag):
    try:
        M = qio.load_matrix(path)
        if M.shape[1] == 1:
            v = M[:, 0]
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ValueError("state vector is zero")
            return projector(v / norm)
        return M
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _register(dim, d, flag):
    try:
        return QuditRegister.from_dim(dim, d)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _channel(text, dim):
    if text.startswith("depolarizing:"):
        try:
            p = float(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"--channel: depolarizing probability {text.split(':', 1)[1]!r} is not a number") from None
        try:
            return NoiseChannel.depolarizing(p, QuditRegister.from_dim(dim))
        except ValueError as exc:
            raise UsageError(f"--channel: {exc}") from None
    if text.startswith("unitary:"):
        E = gate_matrix(_gate(text.split(":", 1)[1], "--channel", dim))
        return NoiseChannel.unitary(E)
    try:
        ch = qio.channel_from_json(qio.load_json(text), QuditRegister.from_dim(dim))
    except ValueError as exc:
        raise UsageError(f"--channel: {exc}") from None
    if ch.register is not None and ch.register.dim != dim:
        raise UsageError(f"--channel: channel acts on dimension {ch.register.dim}, gate on {dim}")
    return ch


def _povm(text):
    if text == "example1":
        return example1_povm()
    try:
        return qio.povm_from_json(qio.load_json(text))
    except ValueError as exc:
        raise UsageError(f"--povm: {exc}") from None


def _cmd_w1_state(args):
    rho, sigma = _state(args.rho, "--rho"), _state(args.sigma, "--sigma")
    if rho.shape != sigma.shape:
        raise UsageError(f"--sigma: dimension {sigma.shape[0]} differs from --rho dimension {rho.shape[0]}")
    reg = _register(rho.shape[0], args.qudit_dim, "--rho")
    opts = _options(args).solver
    try:
        cert = w1_distance_states(rho, sigma, reg, opts)
    except ValueError as exc:
        raise UsageError(f"--rho/--sigma: {exc}") from None
    out = cert.to_json()
    ok = cert.converged
    if args.verify:
        check = verify_certificate(cert, rho - sigma, reg, tol=max(10 * args.tolerance, 1e-6))
        out["verification"] = {"valid": check.valid, "messages": check.messages}
        ok &= check.valid
    return out, ok


def _cmd_w1_unitary(args):
    U, V = _gate_pair(args.u, args.v)
    est = d_unitary(gate_matrix(U), gate_matrix(V), _options(args), method=args.method)
    out = est.to_json()
    out["u"], out["v"] = args.u, args.v
    ok = est.converged
    if args.verify and est.witness_state is not None:
        psi = est.witness_state
        X = projector(gate_matrix(U) @ psi) - projector(gate_matrix(V) @ psi)
        cert = w1_norm(X, options=SolverOptions(tolerance=args.tolerance))
        consistent = cert.value >= est.lower_bound - 1e-4 and cert.value <= est.upper_bound + 1e-4
        out["verification"] = {"witness_w1": cert.value, "consistent": bool(consistent)}
        ok &= consistent
    return out, ok


def _cmd_error_rate(args):
    U = gate_matrix(_gate(args.u, "--u"))
    ch = _channel(args.channel, U.shape[0])
    rep = w1_error_rate(U, ch, _options(args), mixed_bound=args.mixed_bound)
    out = rep.to_json()
    out["channel"] = ch.kind
    rate = rep.exact if rep.exact is not None else rep.bracket[0]
    out["cost_lower_bounds"] = cost_lower_bounds(rate, rep.n).to_json()
    return out, True


def _cmd_budget(args):
    povm = _povm(args.povm)
    try:
        G = tolerance_budget(args.alpha, args.t, povm)
    except ValueError as exc:
        flag = "--alpha" if "alpha" in str(exc) else "--t"
        raise UsageError(f"{flag}: {exc}") from None
    out = {"alpha": args.alpha, "t": args.t, "lambda_max": povm.lambda_max, "threshold": G}
    if args.theta is not None:
        if args.povm != "example1":
            raise UsageError("--theta: the diagonal-gate scenario uses --povm example1")
        try:
            out["scenario"] = example1_scenario(args.theta, args.alpha, args.t, args.seed).to_json()
        except ValueError as exc:
            raise UsageError(f"--theta: {exc}") from None
    if args.pairs:
        obj = qio.load_json(args.pairs)
        if not isinstance(obj, list) or not obj:
            raise UsageError("--pairs: expected a nonempty list of {\"u\": M, \"v\": M} objects")
        pairs = []
        for i, item in enumerate(obj):
            if not isinstance(item, dict) or "u" not in item or "v" not in item:
                raise UsageError(f"--pairs: entry {i} needs fields 'u' and 'v'")
            try:
                pairs.append((qio.matrix_from_json(item["u"], f"[{i}].u"),
                              qio.matrix_from_json(item["v"], f"[{i}].v")))
            except ValueError as exc:
                raise UsageError(f"--pairs: {exc}") from None
        try:
            out["sequence"] = sequence_bound(pairs, _options(args), povm, args.alpha).to_json()
        except ValueError as exc:
            raise UsageError(f"--pairs: {exc}") from None
    return out, True


def _catalog_listing():
    rows = [{"gate": f"CP(theta,k={k})", "distance": "sqrt(2) sin(theta/2)"} for k in (1, 2, 3, 4)]
    for name, g in (("CZ", GateId("cz")), ("CNOT", GateId("cnot")), ("SWAP", GateId("swap"))):
        rows.append({"gate": name, "distance": catalog_distance(g).value})
    rows.append({"gate": "XK(k,n)", "distance": "k"})
    for i, value in enumerate(permutation4_table(), start=1):
        rows.append({"gate": f"PERM4({i})", "distance": value})
    return {"catalog": rows}


def _cmd_catalog(args):
    if args.v is None:
        return _catalog_listing(), True
    g = _gate(args.v, "--v")
    if g.kind == "custom":
        g = match_catalog(gate_matrix(g)) or g
    try:
        est = catalog_distance(g)
    except NotInCatalog:
        return {"v": args.v, "in_catalog": False}, True
    out = est.to_json()
    out["v"], out["in_catalog"] = args.v, True
    return out, True


def _amplitudes(text):
    if Path(text).is_file():
        try:
            return qio.load_matrix(text).reshape(-1)
        except ValueError as exc:
            raise UsageError(f"--amplitudes: {exc}") from None
    try:
        vals = [complex(x.strip().replace("i", "j")) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--amplitudes: cannot parse {text!r} as comma-separated numbers") from None
    return np.array(vals)


def _cmd_witness(args):
    a = _amplitudes(args.amplitudes)
    try:
        w = witness_controlled_phase(args.theta, a)
    except ValueError as exc:
        flag = "--theta" if "theta" in str(exc) else "--amplitudes"
        raise UsageError(f"{flag}: {exc}") from None
    out = {
        "theta": args.theta,
        "branch": w.branch,
        "c1": w.c1,
        "c2": w.c2,
        "total": w.total,
        "residual": w.residual,
        "closed_form_bound": math.sqrt(2) * math.sin(args.theta / 2),
    }
    ok = True
    if args.verify:
        cert = w1_norm(w.difference, options=SolverOptions(tolerance=args.tolerance))
        out["verification"] = {"solver_value": cert.value, "consistent": cert.value <= w.total + 1e-4}
        ok = out["verification"]["consistent"] and w.residual <= 1e-9
    return out, ok


def _cmd_reproduce(args):
    from .reproduce import reproduce_paper, rows_to_csv, rows_to_pretty, sweep_to_csv, sweeps

    opts = _options(args)
    rows = reproduce_paper(args.seed, opts)
    ok = not any(r.status == "fail" for r in rows)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "reproduce.csv").write_text(rows_to_csv(rows), encoding="utf-8")
        curves = sweeps(options=opts)
        for name, columns in curves.items():
            (out_dir / f"{name}.csv").write_text(sweep_to_csv(columns), encoding="utf-8")
        if not args.no_figures:
            from .plotting import matplotlib_available, render_figures

            if matplotlib_available():
                render_figures(curves, out_dir)
            else:
                print("matplotlib is not installed; skipping figures", file=sys.stderr)
    if args.format == "pretty":
        return rows_to_pretty(rows), ok
    if args.format == "csv":
        return rows_to_csv(rows), ok
    return {"rows": [r.to_json() for r in rows], "passed": ok}, ok


def _flatten(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.update(_flatten(obj[k], f"{prefix}{k}."))
    elif isinstance(obj, list) and all(not isinstance(x, (dict, list)) for x in obj):
        out[prefix[:-1]] = ";".join(str(x) for x in obj)
    elif isinstance(obj, list):
        for i, x in enumerate(obj):
            out.update(_flatten(x, f"{prefix}{i}."))
    else:
        out[prefix[:-1]] = obj
    return out


def render(payload, fmt: str) -> str:
    """Formats a report; string payloads are passed through."""
    if isinstance(payload, str):
        return payload.rstrip("\n")
    if fmt == "json":
        return qio.dumps(payload)
    flat = _flatten(payload)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(flat))
        w.writerow(list(flat.values()))
        return buf.getvalue().rstrip("\n")
    width = max((len(k) for k in flat), default=0)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in flat.items())


_COMMANDS = {
    "w1-state": _cmd_w1_state,
    "w1-unitary": _cmd_w1_unitary,
    "error-rate": _cmd_error_rate,
    "budget": _cmd_budget,
    "catalog": _cmd_catalog,
    "witness": _cmd_witness,
    "reproduce-paper": _cmd_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, ok = _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"qwdist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"qwdist {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(render(payload, args.format))
    return EXIT_OK if ok else EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
