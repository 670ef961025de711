"""
Command-line interface.

Every subcommand writes its result to standard output (JSON, CSV or DOT) and
reports failures on standard error as a single JSON line. Exit codes: 0 ok,
1 other failure, 2 usage error, 3 budget abort.
"""

import argparse
import json
import logging
import sys
from pathlib import Path as FsPath
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError

from polarpo import beta as beta_mod
from polarpo import podb
from polarpo.engine import PartialOrderEngine
from polarpo.exceptions import (
    BudgetExceededError,
    InfoSetError,
    PolarPOError,
    UsageError,
    exit_code_for,
)
from polarpo.models.channels import BmsChannel, ChannelModel, GenieEstimate, InfoSet, SimResult
from polarpo.models.config import EngineSettings
from polarpo.models.database import DbDocument, DbStats, WindowReport
from polarpo.models.paths import BitOrder
from polarpo.models.relations import Kind, Rule
from polarpo.models.verdicts import Comparison
from polarpo.sim import construct, montecarlo

logger = logging.getLogger("polarpo")

# enumerate runs for hours at n = 10; an explicit flag lifts this
DEFAULT_ENUMERATE_SECONDS = 3600.0

SCHEMAS: Dict[str, type] = {
    "verdict": Comparison,
    "stats": DbStats,
    "database": DbDocument,
    "window": WindowReport,
    "simresult": SimResult,
    "infoset": InfoSet,
    "genie": GenieEstimate,
}


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _kind(text: str) -> Kind:
    try:
        return Kind(text.upper())
    except ValueError as e:
        raise UsageError(f"unknown kind '{text}'", details={"kind": text}) from e


def _channel(text: str) -> BmsChannel:
    try:
        return BmsChannel.parse(text)
    except (ValueError, ValidationError) as e:
        raise UsageError(f"bad channel '{text}': {e}", details={"channel": text}) from e


def _emit(payload: Any) -> None:
    if isinstance(payload, BaseModel):
        print(payload.model_dump_json(exclude_none=True))
    else:
        print(json.dumps(payload, ensure_ascii=False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polarpo", description="Partial orders of polar-code synthesized channels")
    parser.add_argument("--log-level", default="WARNING", help="Logging level (default: WARNING)")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes")
    parser.add_argument("--bit-order", choices=[o.value for o in BitOrder], default=None)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("compare", help="Compare two paths")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--relation", default="auto", choices=["deg", "bec", "z", "p", "auto"])

    p = sub.add_parser("enumerate", help="Build the order database for one length")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "binary"], default=None)
    p.add_argument("--rule3", choices=["auto", "on", "off"], default="auto")
    p.add_argument("--transitive", action="store_true")
    p.add_argument("--full-criterion", action="store_true")
    p.add_argument("--validate-bit-order", action="store_true")
    _budget_flags(p)

    p = sub.add_parser("stats", help="Summarize a database")
    p.add_argument("--db", required=True)
    p.add_argument("--check-pu", action="store_true", help="Also test the n = 10 criterion-only pairs")

    p = sub.add_parser("hasse", help="Export a Hasse diagram as DOT")
    p.add_argument("--db", required=True)
    p.add_argument("--kind", default="z")
    p.add_argument("--out", default=None)

    p = sub.add_parser("beta", help="Feasible β window")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--db")
    src.add_argument("--pairs", help="File with one 'worse better' pair per line")
    p.add_argument("--kind", default="z")
    p.add_argument("--violations", default=None, metavar="BETA", help="List pairs violated at β")

    p = sub.add_parser("construct", help="Build an information set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--channel", default=None)
    p.add_argument("--method", default=None, help="bec:ε, beta:β or file:PATH")
    _mods_flags(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="SC Monte Carlo over an SNR sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--info-set", default=None, help="InfoSet JSON or index list")
    p.add_argument("--method", default=None, help="Construction method when no --info-set")
    _mods_flags(p)
    p.add_argument("--channel", default="awgn")
    p.add_argument("--snr-db", default=None, metavar="A:STEP:B")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rule", choices=["exact", "minsum"], default="exact")
    p.add_argument("--out", default=None)

    p = sub.add_parser("saturate", help="Saturate the rule engine up to length n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rules", default=None, help="Comma-separated rule ids")
    p.add_argument("--tau-budget", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "binary"], default=None)
    _budget_flags(p)

    p = sub.add_parser("genie", help="Monte Carlo estimate of Z and 2 P_e of one synthesized channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fetch-reliability", help="Download a reliability sequence")
    p.add_argument("url")
    p.add_argument("--out", required=True)
    p.add_argument("--timeout", type=float, default=30.0)

    p = sub.add_parser("schema", help="Print the JSON schema of an output")
    p.add_argument("name", choices=sorted(SCHEMAS))
    return parser


def _budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--budget-pairs", type=int, default=None)
    p.add_argument("--no-budget", action="store_true", help="Run without budgets")


def _mods_flags(p: argparse.ArgumentParser) -> None:
    mods = p.add_mutually_exclusive_group()
    mods.add_argument("--mods", default=None, help="File of 'remove add' index swaps")
    mods.add_argument("--a1", action="store_true", help="Apply the five criterion-only swaps at N = 1024")


# Subcommands


def _cmd_compare(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    _emit(engine.compare(args.first, args.second, args.relation))
    return 0


def _db_format(out: str, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "binary" if FsPath(out).suffix in (".podb", ".bin") else "json"


def _cmd_enumerate(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    rule3 = {"auto": None, "on": True, "off": False}[args.rule3]
    db = engine.build_db(args.n, rule3=rule3, transitive=args.transitive, full_criterion=args.full_criterion)
    if args.validate_bit_order and db.complete and db.n == 10:
        podb.validate_bit_order(db)
    podb.export(db, _db_format(args.out, args.format), args.out)
    _emit(db.header())
    if not db.complete:
        spent = db.config.get("budget", {})
        raise BudgetExceededError(
            f"build for n={args.n} stopped early; partial database written to {args.out}",
            elapsed=spent.get("elapsed"),
            pairs_done=spent.get("pairs_done"),
        )
    return 0


def _cmd_stats(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    db = engine.load_db(args.db)
    summary = engine.stats(db)
    if args.check_pu:
        payload = json.loads(summary.model_dump_json())
        payload["contains_pu"] = podb.contains_pu(db)
        _emit(payload)
    else:
        _emit(summary)
    return 0


def _cmd_hasse(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    db = engine.load_db(args.db)
    text = podb.export(db, "dot", args.out, kind=_kind(args.kind))
    if args.out is None:
        print(text, end="")
    return 0


def _read_pairs(path: str) -> List[Tuple[str, str]]:
    try:
        lines = FsPath(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}", details={"path": path}) from e
    pairs = []
    for lineno, line in enumerate(lines, 1):
        fields = line.split("#", 1)[0].split()
        if not fields:
            continue
        if len(fields) != 2:
            raise UsageError(f"{path}:{lineno}: expected 'worse better'", details={"line": lineno})
        pairs.append((fields[0], fields[1]))
    return pairs


def _cmd_beta(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    if args.pairs:
        if args.violations is not None:
            raise UsageError("--violations needs --db")
        _emit(beta_mod.window_from_pairs(_read_pairs(args.pairs)))
        return 0
    db = engine.load_db(args.db)
    kind = _kind(args.kind)
    if args.violations is not None:
        value = construct.parse_number(args.violations)
        bad = beta_mod.violations(db, value, kind)
        _emit({"beta": args.violations, "kind": kind.value, "violations": [list(p) for p in bad]})
        return 0
    _emit(engine.beta_window(db, kind))
    return 0


def _resolve_mods(args: argparse.Namespace) -> Optional[List[Tuple[int, int]]]:
    if getattr(args, "a1", False):
        return list(construct.A1_MODS)
    if getattr(args, "mods", None):
        return construct.read_mods_file(args.mods)
    return None


def _method_for(args: argparse.Namespace) -> str:
    if args.method:
        return args.method
    channel = getattr(args, "channel", None)
    if channel and ":" in channel:
        parsed = _channel(channel)
        if parsed.model is ChannelModel.BEC:
            return f"bec:{parsed.parameter:g}"
    raise UsageError("--method is required unless --channel is a BEC")


def _cmd_construct(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    info = engine.info_set(args.n, args.k, _method_for(args), mods=_resolve_mods(args))
    if args.out:
        construct.write_info_set(info, args.out)
    _emit(info)
    return 0


def _load_info_set(args: argparse.Namespace, engine: PartialOrderEngine) -> InfoSet:
    if args.info_set is None:
        if not args.method:
            raise UsageError("simulate needs --info-set or --method")
        return engine.info_set(args.n, args.k, args.method, mods=_resolve_mods(args))
    info = construct.read_info_set(args.info_set, args.n, args.k)
    mods = _resolve_mods(args)
    if mods:
        info = InfoSet(
            n=info.n, K=info.K, indices=construct.apply_mods(info.indices, mods, info.N),
            method=(info.method or "file") + " +mods",
        )
    return info


def _cmd_simulate(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    info = _load_info_set(args, engine)
    if ":" in args.channel:
        points: List[Tuple[Optional[float], BmsChannel]] = [(None, _channel(args.channel))]
    else:
        if args.channel.lower() != "awgn":
            raise UsageError(f"channel '{args.channel}' needs a parameter", details={"channel": args.channel})
        if not args.snr_db:
            raise UsageError("an AWGN sweep needs --snr-db A:STEP:B")
        if info.K == 0:
            raise InfoSetError("an Eb/N0 sweep needs K >= 1")
        points = montecarlo.awgn_sweep(montecarlo.snr_points(args.snr_db), info.K / info.N)
    results = engine.simulate(points, info, args.frames, seed=args.seed, rule=args.rule)
    text = montecarlo.write_csv(results, args.out)
    if args.out is None:
        print(text, end="")
    return 0


def _parse_rules(text: Optional[str]) -> Optional[List[Rule]]:
    if text is None:
        return None
    rules = []
    for token in filter(None, (t.strip() for t in text.split(","))):
        try:
            rules.append(Rule(token))
        except ValueError as e:
            raise UsageError(f"unknown rule '{token}'", details={"rule": token}) from e
    return rules


def _cmd_saturate(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    store = engine.saturate(args.n, rules=_parse_rules(args.rules), tau_budget=args.tau_budget)
    if args.out:
        podb.export(store, _db_format(args.out, args.format), args.out)
    counts = {kind.value: store.count(kind.mask) for kind in Kind}
    _emit({"n": store.n, "complete": store.complete, "counts": counts, "total_pairs": store.total_pairs})
    if not store.complete:
        raise BudgetExceededError(f"saturation for n={args.n} stopped early")
    return 0


def _cmd_genie(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    _emit(engine.genie(_channel(args.channel), args.path, args.trials, seed=args.seed))
    return 0


def _cmd_fetch(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    sequence = engine.fetch_reliability(args.url, args.out, timeout=args.timeout)
    _emit({"url": args.url, "path": args.out, "count": len(sequence)})
    return 0


def _cmd_schema(engine: PartialOrderEngine, args: argparse.Namespace) -> int:
    print(json.dumps(SCHEMAS[args.name].model_json_schema(mode="serialization"), indent=2, ensure_ascii=False))
    return 0


COMMANDS = {
    "compare": _cmd_compare,
    "enumerate": _cmd_enumerate,
    "stats": _cmd_stats,
    "hasse": _cmd_hasse,
    "beta": _cmd_beta,
    "construct": _cmd_construct,
    "simulate": _cmd_simulate,
    "saturate": _cmd_saturate,
    "genie": _cmd_genie,
    "fetch-reliability": _cmd_fetch,
    "schema": _cmd_schema,
}


def _settings(args: argparse.Namespace) -> EngineSettings:
    budget_seconds = getattr(args, "budget_seconds", None)
    overrides: Dict[str, Any] = {
        "workers": args.workers,
        "bit_order": BitOrder(args.bit_order) if args.bit_order else None,
        "budget_seconds": budget_seconds,
        "budget_pairs": getattr(args, "budget_pairs", None),
    }
    try:
        settings = EngineSettings.from_env(**overrides)
    except ValidationError as e:
        raise UsageError("invalid settings", errors=[err["msg"] for err in e.errors()]) from e
    if getattr(args, "no_budget", False):
        settings = settings.model_copy(update={"budget_seconds": None, "budget_pairs": None})
    elif args.command == "enumerate" and settings.budget_seconds is None:
        settings = settings.model_copy(update={"budget_seconds": DEFAULT_ENUMERATE_SECONDS})
    return settings


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` when omitted

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
        level = getattr(logging, str(args.log_level).upper(), None)
        if not isinstance(level, int):
            raise UsageError(f"unknown log level '{args.log_level}'")
        logging.basicConfig(
            level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
        )
        logger.debug("running %s", args.command)
        with PartialOrderEngine(settings=_settings(args)) as engine:
            return COMMANDS[args.command](engine, args)
    except PolarPOError as e:
        print(json.dumps(e.to_dict(), ensure_ascii=False, default=str), file=sys.stderr)
        return exit_code_for(e)
    except ValidationError as e:
        err = UsageError("invalid input", errors=[err["msg"] for err in e.errors()])
        print(json.dumps(err.to_dict(), ensure_ascii=False), file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        payload = {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(payload, ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
