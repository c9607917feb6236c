"""Command-line front door: zoo listing, certificate checks, ball-intersection
oracle queries, witness construction, equivalence batteries, and the
sequence-form battery.

Exit codes: 0 for pass/feasible, 1 for fail/infeasible, 2 for usage errors.
Defaults resolve in one layer: flags override a config file, the config file
overrides the package defaults; the random seed falls back to the HCLAB_SEED
environment variable.

Ball literals are ``<basis>:<radius>`` (``e3:0.1`` for a basis-vector center,
``0:0.5`` or ``zero:0.5`` for the origin) or ``@FILE:<radius>`` where FILE is
a JSON list of coordinates (numbers or ``[re, im]`` pairs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .battery import BatteryConfig, run_battery, sequence_battery
from .config import DEFAULTS
from .criterion import Certificate, CertificateError, check_certificate
from .hs import WitnessError, construct_witness, construct_witness_oracle
from .linalg import Ball, basis_vector
from .oracle import first_hit, forward_backward_condition, intersects, through_zero_condition
from .reporting import (
    battery_csv_rows,
    render_battery_figure,
    render_residual_figure,
    render_scan_figure,
    render_witness_figure,
    residual_csv_rows,
    scan_csv_rows,
    write_csv,
    write_json,
)
from .zoo import GuardBandError, UnknownOperatorError, ZooError, make_operator, zoo_entries

__all__ = ["main"]


class UsageError(ValueError):
    pass


def _resolve_seed(flag_value: int | None, file_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    if file_value is not None:
        return file_value
    env = os.environ.get("HCLAB_SEED")
    return int(env) if env else 0


def _load_vector(path: str) -> np.ndarray:
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    out = []
    for e in entries:
        if isinstance(e, (list, tuple)):
            out.append(complex(e[0], e[1]))
        else:
            out.append(complex(e))
    return np.asarray(out, dtype=complex)


def _parse_ball(text: str, d: int) -> Ball:
    token, sep, rad = text.rpartition(":")
    if not sep:
        raise UsageError(f"ball literal {text!r} needs the form <center>:<radius>")
    try:
        radius = float(rad)
    except ValueError as exc:
        raise UsageError(f"bad radius in ball literal {text!r}") from exc
    if token in ("0", "zero"):
        center = np.zeros(d, dtype=complex)
    elif token.startswith("@"):
        center = _load_vector(token[1:])
        if center.size > d:
            raise UsageError(f"center from {token[1:]} has {center.size} coordinates, d={d}")
        center = np.concatenate([center, np.zeros(d - center.size, dtype=complex)])
    elif token.startswith("e"):
        try:
            idx = int(token[1:])
        except ValueError as exc:
            raise UsageError(f"bad basis index in ball literal {text!r}") from exc
        if not 1 <= idx <= d:
            raise UsageError(f"basis index {idx} outside 1..{d}")
        center = basis_vector(idx, d)
    else:
        raise UsageError(f"unrecognized ball center {token!r}")
    try:
        return Ball(center, radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_seq(text: str, n_max: int) -> list[int]:
    if text in ("k", "full"):
        return list(range(1, n_max + 1))
    if text in ("pow2", "2^k"):
        out = []
        n = 2
        while n <= n_max:
            out.append(n)
            n *= 2
        return out
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad sequence literal {text!r}; use 'k', 'pow2', or ints") from exc


def _emit(args, doc: dict, csv_maker=None, figure_maker=None) -> None:
    if getattr(args, "json", None):
        write_json(args.json, doc)
    if getattr(args, "csv", None) and csv_maker is not None:
        header, rows = csv_maker(doc)
        write_csv(args.csv, header, rows)
    if getattr(args, "plot", None) and figure_maker is not None:
        figure_maker(doc, args.plot)


def cmd_zoo(args) -> int:
    rows = zoo_entries()
    width = max(len(pattern) for pattern, _ in rows)
    for pattern, description in rows:
        print(f"{pattern:<{width}}  {description}")
    if args.json:
        write_json(args.json, {"schema": 1, "kind": "zoo", "operators": [
            {"id": pattern, "description": description} for pattern, description in rows
        ]})
    return 0


def cmd_certify(args) -> int:
    T = make_operator(args.op)
    if args.cert:
        cert = Certificate.from_json(json.loads(Path(args.cert).read_text(encoding="utf-8")))
    else:
        seq = _parse_seq(args.seq, max(args.K, DEFAULTS.n_max))
        gens = [basis_vector(i, args.generators) for i in range(1, args.generators + 1)]
        cert = Certificate(seq=seq, y_gens=gens, z_gens=[g.copy() for g in gens])
    report = check_certificate(T, cert, args.K, tol=args.tol, d=args.d)
    doc = report.to_json()
    _emit(args, doc, residual_csv_rows, render_residual_figure)
    print(f"operator {T.label}: certificate {'PASS' if report.verdict else 'FAIL'} "
          f"(K={report.K}, d={report.d_used}, tol={report.tol:g})")
    return 0 if report.verdict else 1


def cmd_oracle(args) -> int:
    T = make_operator(args.op)
    d = args.d
    U = _parse_ball(args.U, d)
    mode = args.mode or ("through-zero" if args.W else "hit")
    if mode == "forward-backward":
        if not args.W:
            raise UsageError("forward-backward mode needs --W")
        W = _parse_ball(args.W, d)
        result = forward_backward_condition(T, U, W, args.nmax, d)
    elif mode == "through-zero":
        if not (args.V and args.W):
            raise UsageError("through-zero mode needs --V and --W")
        V = _parse_ball(args.V, d)
        W = _parse_ball(args.W, d)
        result = through_zero_condition(T, U, V, W, args.nmax, d)
    elif args.n is not None:
        if not args.V:
            raise UsageError("a single-exponent query needs --V")
        V = _parse_ball(args.V, d)
        feasible, x, dist = intersects(T, args.n, U, V, d)
        doc = {
            "schema": 1, "kind": "intersects", "operator": T.label, "n": args.n,
            "feasible": feasible, "dist": dist, "d": d,
            "query": {"U": U.describe(), "V": V.describe()},
            "scanned": [{"n": args.n, "dist": dist, "feasible": feasible}],
        }
        _emit(args, doc, scan_csv_rows, render_scan_figure)
        print(f"n={args.n}: {'feasible' if feasible else 'infeasible'} dist={dist:.6g}")
        return 0 if feasible else 1
    else:
        if not args.V:
            raise UsageError("first-hit mode needs --V")
        V = _parse_ball(args.V, d)
        result = first_hit(T, U, V, args.nmax, d)
    doc = result.to_json()
    _emit(args, doc, scan_csv_rows, render_scan_figure)
    if result.feasible:
        print(f"feasible: n={result.n} dist={result.dist:.6g}")
    else:
        scanned = len(result.scanned)
        print(f"infeasible through {scanned} scanned exponents")
    return 0 if result.feasible else 1


def _random_target(rng: np.random.Generator, cols: int, rows: int) -> np.ndarray:
    real = rng.uniform(-1, 1, size=(rows, cols))
    imag = rng.uniform(-1, 1, size=(rows, cols))
    return (real + 1j * imag) / np.sqrt(2.0)


def cmd_witness(args) -> int:
    T = make_operator(args.op)
    seed = _resolve_seed(args.seed, None)
    rng = np.random.default_rng(seed)
    if args.A:
        A = np.asarray(json.loads(Path(args.A).read_text(encoding="utf-8")), dtype=complex)
    else:
        A = _random_target(rng, args.cols, args.cols)
    if args.B:
        B = np.asarray(json.loads(Path(args.B).read_text(encoding="utf-8")), dtype=complex)
    else:
        B = _random_target(rng, args.cols, args.cols)
    if args.oracle_mode:
        report = construct_witness_oracle(T, A, B, args.eps, n_max=args.nmax, d=args.d)
    else:
        report = construct_witness(T, A, B, args.eps, n_max=args.nmax, d=args.d)
    doc = report.to_json()

    def witness_csv(doc_: dict) -> tuple[list[str], list[list]]:
        header = ["column", "bound_a", "bound_b", "s2_norm", "s2_cap", "ball_radius"]
        rows = [
            [i + 1, a, b, s, c, doc_["ball_radius"]]
            for i, (a, b, s, c) in enumerate(
                zip(doc_["column_bounds_a"], doc_["column_bounds_b"],
                    doc_["s2_column_norms"], doc_["s2_column_caps"])
            )
        ]
        return header, rows

    _emit(args, doc, witness_csv, render_witness_figure)
    if report.success:
        print(f"witness success: n={report.n_final} residual_a={report.residual_a:.6g} "
              f"residual_b={report.residual_b:.6g} (eps={report.eps:g})")
    else:
        print(f"witness failure: {report.reason}")
    return 0 if report.success else 1


def _battery_config(args) -> BatteryConfig:
    file_doc = {}
    if args.config:
        file_doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        file_doc = {k: v for k, v in file_doc.items() if k not in ("schema", "kind")}
    cfg = BatteryConfig(**file_doc)
    seed = _resolve_seed(args.seed, file_doc.get("rng_seed"))
    return cfg.override(
        d=args.d, n_max=args.nmax, ball_samples=args.samples, rng_seed=seed, tol=args.tol
    )


def cmd_battery(args) -> int:
    T = make_operator(args.op)
    cfg = _battery_config(args)
    report = run_battery(T, cfg)
    doc = report.to_json()
    _emit(args, doc, battery_csv_rows, render_battery_figure)
    print(f"operator {T.label} (d={cfg.d}, n_max={cfg.n_max}, seed={cfg.rng_seed})")
    for name, verdict in report.verdicts().items():
        print(f"  {name:<20} {verdict}")
    print(f"  consistent: {report.consistent}")
    print(f"  overall: {'PASS' if report.overall_pass else 'FAIL'}")
    return 0 if report.overall_pass else 1


def cmd_prop212(args) -> int:
    T = make_operator(args.op)
    cfg = _battery_config(args)
    seq = _parse_seq(args.seq, cfg.n_max)
    doc = sequence_battery(T, seq, cfg)

    def seq_csv(doc_: dict) -> tuple[list[str], list[list]]:
        header = ["pair", "feasible", "n", "dist", "eventual_N", "window"]
        eventual = {rec["pair"]: rec for rec in doc_["eventual"]}
        rows = []
        for rec in doc_["sequence_hits"]:
            ev = eventual.get(rec["pair"], {})
            rows.append([rec["pair"], rec["feasible"], rec["n"], rec["dist"],
                         ev.get("N"), ev.get("window")])
        return header, rows

    _emit(args, doc, seq_csv, None)
    verdicts = doc["verdicts"]
    print(f"operator {T.label} along {len(seq)}-term sequence (seed={cfg.rng_seed})")
    for name, verdict in verdicts.items():
        print(f"  {name:<20} {verdict}")
    print(f"  agree: {doc['agree']}")
    ok = verdicts["sequence_and_decay"] == "pass" and verdicts["eventual"] == "pass"
    return 0 if ok else 1


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", help="write a JSON report to this path")
    p.add_argument("--csv", help="write the delimited table to this path")
    p.add_argument("--plot", help="render the report figure (png) to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hclab",
        description="Numerical laboratory for hypercyclicity experiments on "
                    "truncated operators.",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on worker threads (evaluation is order-deterministic)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_zoo = sub.add_parser("zoo", help="list the operator registry")
    p_zoo.add_argument("--json", help="write the listing as JSON")
    p_zoo.set_defaults(func=cmd_zoo)

    p_cert = sub.add_parser("certify", help="check a criterion certificate")
    p_cert.add_argument("--op", required=True, help="operator id, e.g. rolewicz:2.0")
    p_cert.add_argument("--K", type=int, default=10, help="number of sequence steps")
    p_cert.add_argument("--d", type=int, default=None,
                        help="truncation dimension (default: guard-band sized)")
    p_cert.add_argument("--tol", type=float, default=DEFAULTS.tol)
    p_cert.add_argument("--seq", default="k", help="'k', 'pow2', or comma-separated ints")
    p_cert.add_argument("--generators", type=int, default=3,
                        help="number of basis-vector generators")
    p_cert.add_argument("--cert", help="certificate JSON file (overrides --seq/--generators)")
    _add_output_flags(p_cert)
    p_cert.set_defaults(func=cmd_certify)

    p_oracle = sub.add_parser("oracle", help="ball-intersection oracle queries")
    p_oracle.add_argument("--op", required=True)
    p_oracle.add_argument("--U", required=True, help="source ball literal")
    p_oracle.add_argument("--V", help="target ball literal")
    p_oracle.add_argument("--W", help="zero-neighborhood ball literal")
    p_oracle.add_argument("--n", type=int, default=None, help="single exponent to test")
    p_oracle.add_argument("--nmax", type=int, default=DEFAULTS.n_max)
    p_oracle.add_argument("--d", type=int, default=DEFAULTS.dim)
    p_oracle.add_argument("--mode", choices=["hit", "through-zero", "forward-backward"],
                          default=None)
    _add_output_flags(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    p_witness = sub.add_parser("witness", help="construct a Hilbert-Schmidt witness")
    p_witness.add_argument("--op", required=True)
    p_witness.add_argument("--A", help="JSON matrix file for the first target")
    p_witness.add_argument("--B", help="JSON matrix file for the second target")
    p_witness.add_argument("--cols", type=int, default=3,
                           help="random targets live on this many columns")
    p_witness.add_argument("--eps", type=float, default=0.5)
    p_witness.add_argument("--d", type=int, default=64)
    p_witness.add_argument("--nmax", type=int, default=DEFAULTS.n_max)
    p_witness.add_argument("--seed", type=int, default=None)
    p_witness.add_argument("--oracle-mode", action="store_true",
                           help="bounded generic search (no right inverse needed)")
    _add_output_flags(p_witness)
    p_witness.set_defaults(func=cmd_witness)

    for name, handler, extra in (
        ("battery", cmd_battery, False),
        ("prop212", cmd_prop212, True),
    ):
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--op", required=True)
        p.add_argument("--config", help="JSON battery-config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--nmax", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        if extra:
            p.add_argument("--seq", default="k", help="'k', 'pow2', or comma-separated ints")
        _add_output_flags(p)
        p.set_defaults(func=handler)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, UnknownOperatorError, CertificateError, WitnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GuardBandError, ZooError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
