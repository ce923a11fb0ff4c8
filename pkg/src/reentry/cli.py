"""Command-line front end.

``reentry explore`` runs a bounded exploration and optionally writes a JSON
report; ``reentry replay`` re-executes the counterexample stored in a report.

Exit codes: 0 the property holds, 2 a violation was found (or reproduced),
1 usage, configuration or internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

from . import kernel
from .contracts import TokenVariant
from .explorer import (
    Call,
    ConfigError,
    Holds,
    ReplayError,
    Scenario,
    Verdict,
    Violated,
    _amount,
    explore,
    minimize,
    parse_call,
    replay,
    state_digest,
)
from .machine import CheckPoint, HarnessError, address_pool, parse_address

SCHEMA = 1
EXIT_HOLDS, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2

log = logging.getLogger("reentry")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags, which would read as "violated"
    def error(self, message: str):
        raise UsageError(message)


def _csv(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reentry", description="Bounded adversarial exploration of re-entrant contracts.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("explore", help="explore every schedule up to the bounds")
    e.add_argument("--scenario", type=Path, help="scenario JSON file; flags given explicitly override it")
    e.add_argument("--contract", choices=("token", "auction"))
    e.add_argument("--variant", choices=[v.value for v in TokenVariant])
    e.add_argument("--gas", type=int, dest="gas_bound", help="gas bound per top-level call")
    e.add_argument("--txs", type=int, dest="max_txs", help="transactions per schedule")
    e.add_argument("--addresses", help="address pool size (e.g. 3) or names (e.g. A,B)")
    e.add_argument("--amounts", help="comma-separated amount pool; 'max' is 2**256-1")
    e.add_argument("--values", help="comma-separated msg.value pool")
    e.add_argument("--prefix", action="append", default=None, metavar="CALL",
                   help="setup call such as mint:A:10 or transfer:A:B:5 (repeatable)")
    e.add_argument("--deployer", help="minter or beneficiary address (default A)")
    e.add_argument("--check-points", help="comma-separated subset of " +
                   ",".join(sorted(c.value for c in CheckPoint)))
    e.add_argument("--mode", choices=("exhaustive", "random"))
    e.add_argument("--trials", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--listing-faithful-gas", action="store_true", default=None,
                   help="reset gas from the call's budget on the no-further-call branch")
    e.add_argument("--allow-value", action="store_true", default=None,
                   help="drop the msg.value == 0 guard on transfer")
    e.add_argument("--no-dedup", action="store_true", default=None,
                   help="enumerate tape by tape without memoising sub-searches")
    e.add_argument("--revert-frame", action="store_true", default=None,
                   help="also check that reverting calls leave non-ghost state unchanged")
    e.add_argument("--broken-end", action="store_true", default=None,
                   help="mutation: auction end() toggles ended")
    e.add_argument("--no-minimize", action="store_true", help="report the first violation as found")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--json", type=Path, dest="json_out", help="write the report here")

    r = sub.add_parser("replay", help="re-execute the counterexample stored in a report")
    r.add_argument("report", type=Path)
    r.add_argument("--contract", choices=("token", "auction"))
    r.add_argument("--variant", choices=[v.value for v in TokenVariant])
    r.add_argument("--listing-faithful-gas", action="store_true", default=None)
    return p


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    base = Scenario()
    if args.scenario is not None:
        base = Scenario.from_json(json.loads(args.scenario.read_text()))
    kw: dict[str, Any] = {}
    for name in ("contract", "gas_bound", "max_txs", "mode", "trials", "seed"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    if args.variant is not None:
        kw["variant"] = TokenVariant(args.variant)
    if args.deployer is not None:
        kw["deployer"] = parse_address(args.deployer)
    flags = {"listing_faithful_gas": args.listing_faithful_gas, "check_revert_frame": args.revert_frame,
             "broken_auction_end": args.broken_end}
    kw.update({k: True for k, v in flags.items() if v})
    if args.allow_value:
        kw["require_zero_value"] = False
    if args.no_dedup:
        kw["dedup"] = False
    if args.check_points is not None:
        try:
            kw["check_points"] = frozenset(CheckPoint(c) for c in _csv(args.check_points))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    pools = base.pools
    try:
        if args.addresses is not None:
            spec = args.addresses.strip()
            addrs = address_pool(int(spec)) if spec.isdigit() else tuple(parse_address(a) for a in _csv(spec))
            pools = replace(pools, addresses=addrs)
        if args.amounts is not None:
            pools = replace(pools, amounts=tuple(_amount(a) for a in _csv(args.amounts)))
        if args.values is not None:
            pools = replace(pools, values=tuple(_amount(v) for v in _csv(args.values)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    kw["pools"] = pools
    scenario = replace(base, **kw)
    if args.prefix is not None:
        scenario = replace(scenario, tx_prefix=tuple(parse_call(c, scenario.deployer) for c in args.prefix))
    scenario.validate()
    return scenario


# -- reports ---------------------------------------------------------------


def report(verdict: Verdict, scenario: Scenario) -> dict[str, Any]:
    out: dict[str, Any] = {
        "schema": SCHEMA,
        "verdict": "holds" if verdict.holds else "violated",
        "schedules_explored": verdict.schedules_explored,
        "max_depth": verdict.max_depth,
        "counterexample": None,
        "scenario": scenario.to_json(),
    }
    if isinstance(verdict, Violated):
        out["counterexample"] = {
            "tape": list(verdict.tape),
            "tape_splits": list(verdict.tape_splits),
            "prefix": [{"method": c.method, "args": c.to_json()["args"]} for c in scenario.tx_prefix],
            "schedule": [c.to_json() for c in verdict.calls],
            "trace": [ev.to_json() for ev in verdict.trace],
            "violated_invariant": verdict.violated_invariant,
            "check_point": verdict.check_point,
            "detail": verdict.detail,
            "state_digest": verdict.state_digest,
            "final_state": verdict.final_state,
        }
    return out


def summary(verdict: Verdict, scenario: Scenario) -> str:
    name = scenario.contract if scenario.contract == "auction" else f"token/{scenario.variant.value}"
    head = f"{name} gas<={scenario.gas_bound} txs={scenario.max_txs} mode={scenario.mode}"
    if isinstance(verdict, Holds):
        return f"{head}: HOLDS ({verdict.schedules_explored} schedules, max depth {verdict.max_depth})"
    lines = [f"{head}: VIOLATED {verdict.violated_invariant} at {verdict.check_point}: {verdict.detail}",
             f"  schedule: " + "; ".join(str(c) for c in verdict.calls),
             f"  tape: {verdict.tape}"]
    for ev in verdict.trace:
        lines.append(f"  {'  ' * ev.depth}{ev.method}({', '.join(f'{k}={v}' for k, v in ev.args.items())})"
                     f" gas {ev.gas_in}->{ev.gas_out} {ev.outcome}")
    return "\n".join(lines)


def cmd_explore(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    log.info("kernel backend: %s", kernel.BACKEND)
    verdict = explore(scenario, workers=args.workers)
    if isinstance(verdict, Violated) and not args.no_minimize:
        verdict = minimize(verdict, scenario)
    print(summary(verdict, scenario))
    if args.json_out is not None:
        args.json_out.write_text(json.dumps(report(verdict, scenario), indent=2) + "\n")
    return EXIT_HOLDS if verdict.holds else EXIT_VIOLATED


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        data = json.loads(args.report.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report: {exc}") from None
    if not isinstance(data, dict) or data.get("schema") != SCHEMA or "scenario" not in data:
        raise ConfigError("not a schema-1 report")
    scenario = Scenario.from_json(data["scenario"])
    if args.contract is not None and args.contract != scenario.contract:
        raise ConfigError(f"report is for contract {scenario.contract!r}, not {args.contract!r}")
    if args.variant is not None and TokenVariant(args.variant) is not scenario.variant:
        raise ConfigError(f"report is for variant {scenario.variant.value!r}, not {args.variant!r}")
    if args.listing_faithful_gas:
        scenario = replace(scenario, listing_faithful_gas=True)
    cex = data.get("counterexample")
    if data.get("verdict") == "holds" or cex is None:
        print("report holds; nothing to replay")
        return EXIT_HOLDS
    calls = [Call.from_json(c) for c in cex["schedule"]]
    rep = replay(cex["tape"], scenario, calls)
    if rep.violation is None:
        print("DETERMINISM FAILURE: the stored counterexample no longer violates anything", file=sys.stderr)
        return EXIT_HOLDS
    trace = [ev.to_json() for ev in rep.trace]
    same = (trace == cex["trace"] and rep.violation.invariant == cex["violated_invariant"]
            and state_digest(rep.state) == cex["state_digest"])
    if not same and not args.listing_faithful_gas:
        print("DETERMINISM FAILURE: replay violates the invariant along a different trace", file=sys.stderr)
        return EXIT_ERROR
    print(f"reproduced {rep.violation.invariant} at {rep.violation.point.value}: {rep.violation.detail}")
    return EXIT_VIOLATED


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"reentry: {exc}", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(message)s")
    try:
        if args.command == "explore":
            return cmd_explore(args)
        return cmd_replay(args)
    except (ConfigError, ReplayError, ValueError, KeyError, TypeError) as exc:
        print(f"reentry: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except HarnessError as exc:
        print(f"reentry: internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
