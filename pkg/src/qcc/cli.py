"""Command-line entry points.

Subcommands: build (classify inputs, run the pipeline, drive external
toolchains), extract (gate list from a QIR file as JSON), simulate
(statevector of a unitary circuit as JSON), metrics (gate counts for a
circuit as JSON).

Exit codes: 0 success, 1 compilation/diagnostic errors, 2 external tool
failure.
"""

import argparse
import dataclasses
import json
import sys

from .driver import (
    QuantumOptions,
    classify_inputs,
    execute_plan,
    load_toolchain_config,
)
from .errors import QccError, ToolFailure
from .ir import gate_counts
from .optimizer import NativeGateSet, optimize
from .qasm import lower_ast_to_ir, parse_qasm
from .qir import extract_circuit, find_quantum_kernels
from .simulator import MAX_QUBITS, simulate


def _load_program(path: str, opt_level: int = 0, native: NativeGateSet | None = None):
    with open(path) as handle:
        source = handle.read()
    program = lower_ast_to_ir(parse_qasm(source, filename=path))
    if opt_level > 0:
        program = optimize(program, level=opt_level, native=native or NativeGateSet.default())
    return program


def _native_from_arg(names: str | None) -> NativeGateSet:
    if not names:
        return NativeGateSet.default()
    return NativeGateSet.from_names([n.strip() for n in names.split(",") if n.strip()])


def cmd_build(args) -> int:
    config = load_toolchain_config(args.toolchain_config)
    if args.cuda_arch:
        config = dataclasses.replace(config, cuda_arch=args.cuda_arch)
    mpi = True if args.mpi else False
    plan = classify_inputs(
        args.inputs,
        output=args.output,
        build_dir=args.build_dir,
        mpi=mpi,
        standalone=args.standalone,
    )
    emit = args.emit
    if plan.link_step is not None:
        emit = "all"  # linking needs the wrapper next to the QIR
    opts = QuantumOptions(
        opt_level=args.opt_level,
        native=_native_from_arg(args.native_gates),
        coupling_path=args.coupling,
        layout_mode=args.layout,
        seed=args.seed,
        sabre_iterations=args.sabre_iterations,
        emit=emit,
        standalone=args.standalone,
        write_wrapper=plan.link_step is not None,
    )
    report = execute_plan(plan, config, opts, dry_run=args.dry_run, log=print)
    if not args.dry_run and report.steps:
        print(report.summary())
    return 0


def cmd_extract(args) -> int:
    with open(args.file) as handle:
        text = handle.read()
    kernels = find_quantum_kernels(text)
    out = []
    for body in kernels:
        gates, _ = extract_circuit(body)
        out.append(
            [
                {
                    "kind": g.kind,
                    "name": g.name,
                    "params": list(g.params),
                    "operands": list(g.operands),
                    "line": g.origin_line,
                }
                for g in gates
            ]
        )
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def cmd_simulate(args) -> int:
    if args.file.endswith(".qasm"):
        program = _load_program(args.file)
        state = simulate(program, n_qubits=args.qubits)
    else:
        with open(args.file) as handle:
            text = handle.read()
        kernels = find_quantum_kernels(text)
        if len(kernels) != 1:
            raise QccError(f"{args.file}: expected exactly one quantum kernel, found {len(kernels)}")
        gates, _ = extract_circuit(kernels[0])
        gates = [g for g in gates if g.kind != "measure"]
        state = simulate(gates, n_qubits=args.qubits)
    json.dump([[amp.real, amp.imag] for amp in state], sys.stdout)
    print()
    return 0


def cmd_metrics(args) -> int:
    native = _native_from_arg(args.native_gates)
    program = _load_program(args.file, opt_level=args.opt_level, native=native)
    json.dump(gate_counts(program), sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcc", description="quantum-classical co-compiler")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="compile mixed classical/quantum sources")
    b.add_argument("inputs", nargs="+", help="source files (.c/.cc/.cpp, .cu, .qasm)")
    b.add_argument("-o", "--output", default="a.out")
    b.add_argument("--build-dir", default=".")
    b.add_argument("--cuda-arch", default=None, help="override the configured CUDA arch")
    b.add_argument("--mpi", action="store_true", help="compile C/C++ inputs with the MPI toolchain")
    b.add_argument("--coupling", default=None, help="coupling graph JSON; enables routing")
    b.add_argument("--layout", choices=["identity", "sabre"], default="sabre")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--sabre-iterations", type=int, default=3)
    b.add_argument("--opt-level", type=int, choices=[0, 1, 2, 3], default=1)
    b.add_argument("--native-gates", default=None, help="comma-separated native gate names")
    b.add_argument("--emit", choices=["qir", "metrics", "all"], default="all")
    b.add_argument("--dry-run", action="store_true")
    b.add_argument("--standalone", action="store_true", help="wrapper gets a main() and is linked")
    b.add_argument("--toolchain-config", default=None)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("extract", help="print the gate list of a QIR file as JSON")
    e.add_argument("file")
    e.set_defaults(func=cmd_extract)

    s = sub.add_parser("simulate", help="print the statevector of a unitary circuit as JSON")
    s.add_argument("file", help=".qasm or .qir.ll input")
    s.add_argument("--qubits", type=int, default=None, help=f"pad to this many qubits (max {MAX_QUBITS})")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("metrics", help="print gate counts and depth as JSON")
    m.add_argument("file", help=".qasm input")
    m.add_argument("--opt-level", type=int, choices=[0, 1, 2, 3], default=0)
    m.add_argument("--native-gates", default=None)
    m.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.stderr:
            print(exc.stderr, file=sys.stderr)
        return 2
    except QccError as exc:
        if getattr(exc, "span", None) is not None or getattr(exc, "filename", None):
            print(exc.diagnostic(), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
