"""Command-line interface: qassert run / lower / check.

Exit codes: 0 success, 1 usage or parse error, 2 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .lang import ParseError, lower_assertions, parse, pretty_print
from .noise import NoiseModel
from .runner import compute_filter_report, render_report, run_shots
from .state import InvariantViolationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; remap to 1, keeping 2
    # reserved for internal invariant violations.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="qassert",
        description="Simulate quantum circuits with runtime assertions "
        "and post-selection filtering.",
    )
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=_ArgumentParser
    )

    run = sub.add_parser("run",
                         help="lower and execute a circuit, reporting statistics")
    run.add_argument("file", help="circuit file (.qac)")
    run.add_argument("--shots", type=int, required=True, help="number of shots")
    run.add_argument("--seed", type=int, required=True, help="master seed")
    run.add_argument("--noise-gate-p", type=float, default=None, metavar="P",
                     help="per-qubit flip probability after each gate")
    run.add_argument("--noise-readout-p", type=float, default=None, metavar="P",
                     help="probability a recorded bit is flipped")
    run.add_argument("--depolarizing", action="store_true",
                     help="draw gate errors uniformly from X/Y/Z instead of X only")
    run.add_argument("--expect", action="append", default=[], metavar="BITSTRING",
                     help="accepted data-creg bitstring (repeatable)")
    run.add_argument("--format", choices=("table", "json"), default="table")
    run.add_argument("--filtered", action="store_true",
                     help="add the post-selection filter report (needs --expect)")

    lower = sub.add_parser("lower",
                           help="print the circuit with assertions expanded")
    lower.add_argument("file", help="circuit file (.qac)")

    check = sub.add_parser("check",
                           help="parse and validate a circuit file")
    check.add_argument("file", help="circuit file (.qac)")
    return parser


def _load_circuit(path: str):
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"qassert: cannot read {path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse(source)
    except ParseError as exc:
        print(f"{path}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return None


def _cmd_check(args) -> int:
    circuit = _load_circuit(args.file)
    if circuit is None:
        return EXIT_USAGE
    print(
        f"ok: {args.file}: {circuit.num_qubits} qubits, "
        f"{len(circuit.instructions)} instructions, "
        f"{len(circuit.assertion_labels)} assertions"
    )
    return EXIT_OK


def _cmd_lower(args) -> int:
    circuit = _load_circuit(args.file)
    if circuit is None:
        return EXIT_USAGE
    print(pretty_print(lower_assertions(circuit)), end="")
    return EXIT_OK


def _noise_model(args) -> NoiseModel | None:
    if args.noise_gate_p is None and args.noise_readout_p is None and not args.depolarizing:
        return None
    return NoiseModel(
        gate_flip_p=args.noise_gate_p or 0.0,
        readout_flip_p=args.noise_readout_p or 0.0,
        depolarizing=args.depolarizing,
    )


def _cmd_run(args) -> int:
    circuit = _load_circuit(args.file)
    if circuit is None:
        return EXIT_USAGE
    lowered = lower_assertions(circuit)
    model = _noise_model(args)

    data_cregs = tuple(
        c for c in lowered.creg_names if not c.startswith("__assert_")
    )
    for bits in args.expect:
        if len(bits) != len(data_cregs) or any(ch not in "01" for ch in bits):
            print(
                f"qassert: --expect {bits!r} must be a bitstring over the "
                f"{len(data_cregs)} data creg(s) {' '.join(data_cregs) or '(none)'}",
                file=sys.stderr,
            )
            return EXIT_USAGE
    if args.filtered and not args.expect:
        print("qassert: --filtered requires at least one --expect", file=sys.stderr)
        return EXIT_USAGE

    stats = run_shots(lowered, args.shots, args.seed, model)
    report = None
    if args.filtered:
        accepted = set(args.expect)
        report = compute_filter_report(stats, lambda data: data in accepted)
    meta = {
        "circuit": args.file,
        "shots": args.shots,
        "seed": args.seed,
        "noise": (
            f"gate_flip_p={model.gate_flip_p} readout_flip_p={model.readout_flip_p} "
            f"depolarizing={model.depolarizing}"
            if model
            else "none"
        ),
    }
    out = render_report(
        stats,
        report,
        format=args.format,
        expected=args.expect if args.expect else None,
        meta=meta,
    )
    print(out, end="")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": _cmd_run, "lower": _cmd_lower, "check": _cmd_check}[args.command]
    try:
        return handler(args)
    except InvariantViolationError as exc:
        print(f"qassert: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"qassert: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
