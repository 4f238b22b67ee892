"""Command line entry point: ``tagchain simulate|experiment|cost|golden``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import costmodel
from .crypto import GOLDEN_PATH, MSG, KeyedHash, regen_golden
from .errors import EmptyBatchError, UsageError
from .experiments import EXPERIMENTS, DesyncReport, run_experiment
from .simnet import HOOK_PROGRAMS, hook_program, make_world, run_session
from .tag import Mutant
from .wire import Scheme

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    scheme: Scheme = Scheme.S1
    n_tags: int = 1
    sessions: int = 1
    seed: int = 0
    hooks: str = "none"
    output: Optional[str] = "transcript.jsonl"

    def validate(self) -> None:
        if self.n_tags < 1:
            raise UsageError("--tags must be at least 1")
        if self.sessions < 1:
            raise UsageError("--sessions must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must fit in 64 bits")
        if self.hooks not in HOOK_PROGRAMS:
            raise UsageError(f"unknown hook program {self.hooks!r}; choose from {sorted(HOOK_PROGRAMS)}")


def _default_seed() -> int:
    raw = os.environ.get("TAGCHAIN_SEED")
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"TAGCHAIN_SEED is not an integer: {raw!r}") from None


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_simulate(cfg: RunConfig) -> int:
    cfg.validate()
    world = make_world(cfg.n_tags, seed=cfg.seed, scheme=cfg.scheme, hooks=hook_program(cfg.hooks))
    all_valid = True
    for s in range(cfg.sessions):
        try:
            res = run_session(world)
            verdict = None if res.msg is None else res.msg.value
            marked, excluded = len(res.marked), len(res.excluded)
        except EmptyBatchError:
            verdict, marked, excluded = None, 0, cfg.n_tags
        all_valid &= verdict == MSG.TAG_VALID.value
        _emit({"session": s, "msg": verdict, "marked": marked, "excluded": excluded})
    if cfg.output:
        world.transcript.write(cfg.output)
    synced = all(world.tags[i].key == world.db.records[i].key for i in world.tags)
    _emit({"summary": {"sessions": cfg.sessions, "all_valid": all_valid, "keys_synchronized": synced,
                       "transcript": cfg.output, "events": len(world.transcript.events),
                       "simulated_ms": round(world.transcript.clock_ms, 6)}})
    # hooks that tamper with traffic are expected to break sessions; only honest runs gate
    return EXIT_OK if all_valid else EXIT_FAIL


def cmd_experiment(args) -> int:
    if args.name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {list(EXPERIMENTS)}")
    mutant = Mutant(args.mutant) if args.mutant else None
    report = run_experiment(args.name, args.trials, seed=args.seed, scheme=Scheme(args.scheme),
                            mutant=mutant, adversary=args.adversary, hasher=KeyedHash(args.hash),
                            mode=args.mode)
    if isinstance(report, DesyncReport):
        print("(%d,%d,%d,%d)" % report.values, report.verdict)
        print(report.to_json())
        return EXIT_OK if report.synchronizable else EXIT_FAIL
    print(report.to_json())
    if mutant is not None:
        return EXIT_OK if report.mutant_detected else EXIT_FAIL
    return EXIT_OK if report.verdict == "PASS" else EXIT_FAIL


def cmd_cost(args) -> int:
    if args.tags < 1:
        raise UsageError("--tags must be at least 1")
    scheme = Scheme(args.scheme)
    st = costmodel.session_time(scheme)
    rs = costmodel.reader_server_bits(args.tags, aggregated=not args.no_aggregate)
    out = {
        "scheme": scheme.value,
        "session_time_ms": st.as_dict(),
        "reader_server": {"tags": args.tags, "aggregated": not args.no_aggregate,
                          "bits": rs.bits, "seconds": rs.seconds},
        "aggregation_savings": costmodel.aggregation_savings(args.tags),
        "table3": costmodel.table3_rows(),
    }
    if sys.stdout.isatty():
        print(f"scheme {scheme.value} session time")
        for k, v in st.as_dict().items():
            print(f"  {k:<12} {v:8.4f} ms")
        mode = "aggregated" if not args.no_aggregate else "raw"
        print(f"reader->server, {args.tags} tags ({mode}): {rs.bits} bits, {rs.seconds:.4f} s")
        print(f"aggregation savings: {out['aggregation_savings']:.1%}")
    else:
        _emit(out)
    return EXIT_OK


def cmd_golden(args) -> int:
    if not args.regen_golden:
        print(GOLDEN_PATH)
        return EXIT_OK
    path = Path(args.path) if args.path else GOLDEN_PATH
    regen_golden(path)
    print(f"wrote {path}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tagchain", description="Batch RFID authentication simulator")
    p.add_argument("--config", help="JSON file whose keys mirror the command's flags")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run honest or hooked batch sessions")
    sim.add_argument("--scheme", choices=[s.value for s in Scheme], default="s1")
    sim.add_argument("--tags", type=int, default=1)
    sim.add_argument("--sessions", type=int, default=1)
    sim.add_argument("--seed", type=lambda v: int(v, 0), default=None)
    sim.add_argument("--hooks", default="none")
    sim.add_argument("--output", default="transcript.jsonl")

    exp = sub.add_parser("experiment", help="run a security experiment")
    exp.add_argument("name")
    exp.add_argument("--trials", type=int, default=1000)
    exp.add_argument("--seed", type=lambda v: int(v, 0), default=None)
    exp.add_argument("--mutant", choices=[m.value for m in Mutant])
    exp.add_argument("--adversary")
    exp.add_argument("--scheme", choices=[s.value for s in Scheme], default="s1")
    exp.add_argument("--hash", choices=list(KeyedHash.ALGORITHMS), default="reference-prf")
    exp.add_argument("--mode", choices=["passive", "active"], default="passive")

    cost = sub.add_parser("cost", help="cost-model report")
    cost.add_argument("--scheme", choices=[s.value for s in Scheme], default="s2")
    cost.add_argument("--tags", type=int, default=200)
    cost.add_argument("--no-aggregate", action="store_true")

    gold = sub.add_parser("golden", help="show or regenerate golden hash vectors")
    gold.add_argument("--regen-golden", action="store_true")
    gold.add_argument("--path")
    return p


def _apply_config(parser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                conf = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        # flags on the command line win over the file
        defaults = {k.replace("-", "_"): v for k, v in conf.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None:
        args.seed = _default_seed()
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command == "simulate":
            cfg = RunConfig(Scheme(args.scheme), args.tags, args.sessions, args.seed,
                            args.hooks, args.output or None)
            return cmd_simulate(cfg)
        if args.command == "experiment":
            return cmd_experiment(args)
        if args.command == "cost":
            return cmd_cost(args)
        return cmd_golden(args)
    except UsageError as exc:
        print(f"tagchain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
