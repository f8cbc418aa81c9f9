"""Command-line front end.

Exit codes: 0 when the gate survives (search budget exhausted, column check
passed), 10 when a counterexample is found or a column is separable, 2 for
usage and input errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .errors import UnientError
from .gates import builtin
from .io import (
    RunRecord,
    amplitudes_dict,
    append_record,
    dump_gate,
    read_records,
    resolve_gate,
    write_histogram_csv,
)
from .reporting import entanglement_distribution, kappa_report
from .search import DeConfig, counterexample_search, min_entanglement_search, replay
from .separability import column_separability_filter
from .states import apply_gate, entanglement_entropy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COUNTEREXAMPLE = 10


def _log_base(text: str) -> float:
    if text.lower() == "e":
        return math.e
    value = float(text)
    if value <= 0 or value == 1:
        raise argparse.ArgumentTypeError("log base must be positive and != 1")
    return value


def _gate_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gate", required=True, help="builtin gate name or path to a gate file")
    p.add_argument("--m", type=int, help="dimension of the first subsystem")
    p.add_argument("--n", type=int, help="dimension of the second subsystem")


def _de_args(p: argparse.ArgumentParser) -> None:
    d = DeConfig()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--budget", type=int, default=d.max_evals, help="total objective evaluations")
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--population", type=int, default=d.population)
    p.add_argument("--weight-f", type=float, default=d.weight_f)
    p.add_argument("--crossover-cr", type=float, default=d.crossover_cr)
    p.add_argument("--residual-tol", type=float, default=d.residual_tol)
    p.add_argument("--entropy-tol", type=float, default=d.entropy_tol)
    p.add_argument("--skip-filter", action="store_true", help="run DE even if a column is separable")
    p.add_argument("--out", help="append JSON-lines records (per restart and final) to this file")
    p.add_argument("--resume", action="store_true", help="replay finished restarts found in --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unient", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="search for a counterexample to universal entangling")
    _gate_args(p)
    _de_args(p)
    p.add_argument("--log-base", type=_log_base, default=math.e)

    p = sub.add_parser("min-ent", help="minimize output entanglement over product inputs")
    _gate_args(p)
    _de_args(p)
    p.add_argument("--log-base", type=_log_base, default=math.e)

    p = sub.add_parser("distribution", help="entanglement histogram over random product inputs")
    _gate_args(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--log-base", type=_log_base, default=math.e)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="histogram CSV path; the summary goes to <out>.summary.json")

    p = sub.add_parser("filter", help="check every column for separability")
    _gate_args(p)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("kappa", help="bipartition residuals of the three-qutrit |kappa> state")
    p.add_argument("--log-base", type=_log_base, default=math.e)

    p = sub.add_parser("gate", help="gate file utilities")
    gsub = p.add_subparsers(dest="gate_command", required=True)
    e = gsub.add_parser("emit", help="write a builtin gate to a gate file")
    e.add_argument("name")
    e.add_argument("--out", help="output path (stdout if omitted)")
    return parser


def _shape(args):
    if (args.m is None) != (args.n is None):
        raise UnientError("--m and --n must be given together")
    return None if args.m is None else (args.m, args.n)


def _config(args) -> DeConfig:
    return DeConfig(
        population=args.population,
        weight_f=args.weight_f,
        crossover_cr=args.crossover_cr,
        max_evals=args.budget,
        restarts=args.restarts,
        seed=args.seed,
        residual_tol=args.residual_tol,
        entropy_tol=args.entropy_tol,
    )


def _restart_hooks(args, gate, config: DeConfig):
    """Checkpoint callback and resume map for JSON-lines output."""
    if not args.out:
        return None, None
    tag = {
        "type": "restart",
        "command": args.command,
        "gate_label": gate.label,
        "shape": list(gate.shape),
        "config": config.__dict__,
        "skip_filter": args.skip_filter,
    }
    resume = None
    if args.resume and Path(args.out).exists():
        done = [r for r in read_records(args.out) if all(r.get(k) == v for k, v in tag.items())]
        resume = replay(done)

    def on_restart(outcome):
        append_record(args.out, tag | outcome.__dict__)

    return on_restart, resume


def _emit(args, record: RunRecord) -> None:
    if args.out:
        append_record(args.out, record)
    print(record.to_json())


def _restart_log(outcomes):
    return [{"index": o.index, "best_value": o.best_value, "evals_used": o.evals_used, "stalled": o.stalled} for o in outcomes]


def cmd_check(args) -> int:
    gate = resolve_gate(args.gate, _shape(args))
    config = _config(args)
    on_restart, resume = _restart_hooks(args, gate, config)
    verdict = counterexample_search(
        gate, gate.shape, config, skip_filter=args.skip_filter, on_restart=on_restart, resume=resume
    )
    base = dict(
        command="check",
        gate_label=gate.label,
        shape=tuple(gate.shape),
        seed=config.seed,
        restarts=config.restarts,
        verdict=verdict.kind,
        sqrt_branch=gate.provenance.get("sqrt_branch"),
        log_base=args.log_base,
        config=config.__dict__,
    )
    if verdict.kind == "SurvivedBudget":
        state, residual, found = verdict.best_state, verdict.best_residual, False
    else:
        state, residual, found = verdict.state, verdict.residual, True
    image = apply_gate(gate, state.flatten())
    rec = RunRecord(
        evals_used=getattr(verdict, "evals_used", 0),
        best_residual=residual,
        best_entanglement=entanglement_entropy(image, gate.shape, args.log_base),
        counterexample=amplitudes_dict(state.flatten().amplitudes) if found else None,
        column=getattr(verdict, "column", None),
        restart_log=_restart_log(getattr(verdict, "restarts", ())),
        **base,
    )
    _emit(args, rec)
    return EXIT_COUNTEREXAMPLE if found else EXIT_OK


def cmd_min_ent(args) -> int:
    gate = resolve_gate(args.gate, _shape(args))
    config = _config(args)
    if not args.skip_filter:
        filt = column_separability_filter(gate, gate.shape)
        if not filt.passed:
            print(f"fail: column {filt.column} is separable (residual {filt.residual:.3e}); "
                  "minimum entanglement is 0, use --skip-filter to search anyway", file=sys.stderr)
            return EXIT_COUNTEREXAMPLE
    on_restart, resume = _restart_hooks(args, gate, config)
    res = min_entanglement_search(
        gate, gate.shape, config, args.log_base, skip_filter=True, on_restart=on_restart, resume=resume
    )
    rec = RunRecord(
        command="min-ent",
        gate_label=gate.label,
        shape=tuple(gate.shape),
        seed=config.seed,
        restarts=config.restarts,
        evals_used=res.evals_used,
        verdict="MinimumEntanglement",
        best_entanglement=res.best_entanglement,
        counterexample=amplitudes_dict(res.best_state.flatten().amplitudes),
        sqrt_branch=gate.provenance.get("sqrt_branch"),
        log_base=args.log_base,
        config=config.__dict__,
        restart_log=_restart_log(res.restarts),
    )
    _emit(args, rec)
    return EXIT_OK


def cmd_distribution(args) -> int:
    gate = resolve_gate(args.gate, _shape(args))
    report = entanglement_distribution(gate, gate.shape, args.samples, args.seed, args.log_base, args.bins)
    if args.out:
        write_histogram_csv(report, args.out)
        Path(str(args.out) + ".summary.json").write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.to_json())
    return EXIT_OK


def cmd_filter(args) -> int:
    gate = resolve_gate(args.gate, _shape(args))
    res = column_separability_filter(gate, gate.shape, args.tol)
    if res.passed:
        print(f"pass: no separable column in {gate.label} on C^{gate.shape.m} x C^{gate.shape.n}")
        return EXIT_OK
    print(f"fail: column {res.column} of {gate.label} is separable (residual {res.residual:.3e})")
    return EXIT_COUNTEREXAMPLE


def cmd_kappa(args) -> int:
    for row in kappa_report(args.log_base):
        print(
            f"{row['split']:<5} total={row['total']:.12f} max_minor={row['max_minor']:.12f} "
            f"minors={row['minor_count']} entropy={row['entropy']:.12f}"
        )
    return EXIT_OK


def cmd_gate(args) -> int:
    text = dump_gate(builtin(args.name))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "min-ent": cmd_min_ent,
    "distribution": cmd_distribution,
    "filter": cmd_filter,
    "kappa": cmd_kappa,
    "gate": cmd_gate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UnientError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
