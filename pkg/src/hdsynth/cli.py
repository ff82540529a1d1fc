"""Command line front end: ``hdsynth {synth,count,random,verify}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from hdsynth.circuit import L2, L3, Dims, simulate
from hdsynth.counting import cinc_upper_bound, count_report, predict_structure
from hdsynth.numerics import NotUnitaryError, haar_random_unitary, require_unitary
from hdsynth.serialize import (
    DimensionError,
    FormatError,
    file_digest,
    read_circuit,
    read_matrix,
    write_circuit,
    write_matrix,
)
from hdsynth.synthesis import SynthOptions, synth_unitary

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_UNITARY = 4
EXIT_DIMENSION = 5
EXIT_VERIFY = 6

#: Per-sqrt(nm) Frobenius error accepted by ``synth --verify`` and ``verify``.
VERIFY_TOL = 1e-7

SEED_ENV = "HDSYNTH_SEED"

# best published CINC counts for n = 3..8
PUBLISHED_CINC = {3: 19, 4: 48, 5: 74, 6: 116, 7: 166, 8: 224}

EPILOG = f"""\
exit codes:
  {EXIT_OK}  success
  {EXIT_USAGE}  bad command line arguments
  {EXIT_PARSE}  input file could not be parsed
  {EXIT_UNITARY}  input matrix is not unitary
  {EXIT_DIMENSION}  dimension mismatch between files or fields
  {EXIT_VERIFY}  reconstruction error above {VERIFY_TOL:g} * sqrt(nm)
"""


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunReport:
    input_digest: str
    dims: list
    options: dict
    cinc_count: int
    eliminated: int
    reconstruction_error: float
    wall_time: float
    circuit_path: str
    per_kind_counts: dict


def _threshold(dims: Dims) -> float:
    return VERIFY_TOL * np.sqrt(dims.total)


def _load_matrix(path):
    try:
        return read_matrix(path)
    except FormatError as exc:
        raise CliError(f"cannot parse {path}: {exc}", EXIT_PARSE) from exc
    except DimensionError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DIMENSION) from exc
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc


def _load_circuit(path):
    try:
        return read_circuit(path)
    except FormatError as exc:
        raise CliError(f"cannot parse {path}: {exc}", EXIT_PARSE) from exc
    except DimensionError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DIMENSION) from exc
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))


def cmd_synth(args) -> int:
    start = time.perf_counter()
    x, dims = _load_matrix(args.input)
    try:
        require_unitary(x)
    except NotUnitaryError as exc:
        raise CliError(f"{args.input}: {exc}", EXIT_UNITARY) from exc
    opts = SynthOptions(
        prune_identity=args.prune,
        run_elimination=not args.no_eliminate,
        target_level=L2 if args.level == "l2" else L3,
    )
    circuit, synth_report = synth_unitary(x, dims, opts)
    write_circuit(args.output, circuit)
    # independent check on the circuit as written to disk
    error = float(np.linalg.norm(simulate(read_circuit(args.output)) - x))
    report = RunReport(
        input_digest="sha256:" + file_digest(args.input),
        dims=[dims.n, dims.m],
        options=synth_report.options,
        cinc_count=synth_report.cinc_count,
        eliminated=synth_report.eliminated,
        reconstruction_error=error,
        wall_time=time.perf_counter() - start,
        circuit_path=str(args.output),
        per_kind_counts=synth_report.per_kind_counts,
    )
    _emit(
        args,
        asdict(report),
        [
            f"input        {args.input} ({report.input_digest[:19]}...)",
            f"dims         n={dims.n} m={dims.m}",
            f"level        {opts.target_level}  elimination={'on' if opts.run_elimination else 'off'}"
            f"  prune={'on' if opts.prune_identity else 'off'}",
            f"gates        {len(circuit)}",
            f"cinc         {report.cinc_count}",
            f"eliminated   {report.eliminated}",
            f"error        {error:.3e}",
            f"wall time    {report.wall_time:.3f} s",
            f"circuit      {args.output}",
        ],
    )
    if args.verify and error > _threshold(dims):
        print(f"verification failed: error {error:.3e} > {_threshold(dims):.3e}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _table_rows() -> list[dict]:
    rows = []
    for n in sorted(PUBLISHED_CINC):
        row = {"n": n, "bound": cinc_upper_bound(n), "published": PUBLISHED_CINC[n]}
        if n == 3:
            row["note"] = "19 needs a dedicated n = 3 rotation shortcut that is not implemented"
        rows.append(row)
    return rows


def cmd_count(args) -> int:
    if args.table:
        rows = _table_rows()
        lines = [f"{'n':>3} {'this package':>14} {'published':>10}  note"]
        for row in rows:
            lines.append(f"{row['n']:>3} {row['bound']:>14} {row['published']:>10}  {row.get('note', '')}")
        _emit(args, {"table": rows}, lines)
        return EXIT_OK
    if args.n is None:
        raise CliError("count needs --n N or --table", EXIT_USAGE)
    if args.n < 2:
        raise CliError(f"--n must be >= 2, got {args.n}", EXIT_USAGE)
    report = count_report(args.n)
    lines = [f"n={args.n}  cinc bound {report['bound']}"]
    if args.breakdown:
        b = predict_structure(args.n)
        lines += [
            f"  depth d               {report['d']}",
            f"  partition levels      {report['levels']}",
            f"  odd counts            {report['odd_counts']}",
            f"  multiplexors          {b.multiplexors} ({b.multiplexor_cinc} cinc)",
            f"  V-blocks              {b.v_blocks} ({b.ucr_cinc} cinc in UcrX gates)",
            f"  eliminated            {b.eliminated_controlled_units} (-{2 * b.eliminated_controlled_units} cinc)",
            f"  total                 {b.total_cinc}",
        ]
    _emit(args, report, lines)
    return EXIT_OK


def cmd_random(args) -> int:
    if args.n < 2 or args.m < 2:
        raise CliError(f"--n and --m must be >= 2, got n={args.n}, m={args.m}", EXIT_USAGE)
    seed = args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            seed = int(env)
        except ValueError as exc:
            raise CliError(f"{SEED_ENV}={env!r} is not an integer", EXIT_USAGE) from exc
    dims = Dims(args.n, args.m)
    write_matrix(args.output, haar_random_unitary(dims.total, seed), dims)
    _emit(
        args,
        {"path": str(args.output), "n": dims.n, "m": dims.m, "seed": seed},
        [f"wrote {dims.total}x{dims.total} Haar unitary (n={dims.n}, m={dims.m}, seed={seed}) to {args.output}"],
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    circuit = _load_circuit(args.circuit)
    x, dims = _load_matrix(args.matrix)
    if circuit.dims != dims:
        raise CliError(
            f"circuit dims (n={circuit.dims.n}, m={circuit.dims.m}) differ from matrix dims (n={dims.n}, m={dims.m})",
            EXIT_DIMENSION,
        )
    try:
        error = float(np.linalg.norm(simulate(circuit) - x))
    except ValueError as exc:
        raise CliError(f"{args.circuit}: {exc}", EXIT_DIMENSION) from exc
    ok = bool(error <= _threshold(dims))
    _emit(
        args,
        {"error": error, "threshold": float(_threshold(dims)), "ok": ok},
        [f"error {error:.3e}  threshold {_threshold(dims):.3e}  {'OK' if ok else 'FAIL'}"],
    )
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdsynth",
        description="Synthesize unitaries on a qudit pair H_n (x) H_m into CINC and local gates.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_, epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)
        return p

    p = add("synth", cmd_synth, "synthesize a circuit for a unitary matrix file")
    p.add_argument("input", help="matrix JSON file")
    p.add_argument("output", help="circuit JSON file to write")
    p.add_argument("--level", choices=["l2", "cinc"], default="cinc",
                   help="stop at the multiplexor/UcrX level (l2) or lower to CINC gates (default)")
    p.add_argument("--no-eliminate", action="store_true", help="skip the commuting-factor elimination pass")
    p.add_argument("--prune", action="store_true", help="drop gates within 1e-10 of the identity")
    p.add_argument("--verify", action="store_true",
                   help=f"fail with exit {EXIT_VERIFY} if the error exceeds {VERIFY_TOL:g}*sqrt(nm)")

    p = add("count", cmd_count, "print the closed-form CINC count")
    p.add_argument("--n", type=int, help="dimension of the control system")
    p.add_argument("--breakdown", action="store_true", help="show the per-component breakdown")
    p.add_argument("--table", action="store_true", help="compare n = 3..8 with the published counts")

    p = add("random", cmd_random, f"write a Haar-random unitary matrix file ({SEED_ENV} overrides --seed)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("output", help="matrix JSON file to write")

    p = add("verify", cmd_verify, "compare a circuit against a matrix")
    p.add_argument("circuit", help="circuit JSON file")
    p.add_argument("matrix", help="matrix JSON file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"hdsynth: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
