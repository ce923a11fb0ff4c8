"""Bounded exploration of transaction schedules against an adversarial environment.

A *schedule* is a sequence of top-level calls (each with its own gas) plus
one choice tape shared by the whole sequence. Exhaustive exploration visits
every schedule up to the bounds in lexicographic order and reports the first
one that breaks an invariant at an enabled check point.

Two engines implement exhaustive mode:

* the reference engine replays every complete tape through the object-level
  semantics in :mod:`reentry.contracts` (optionally memoising on the world
  state between transactions);
* for the token contract, the summary kernel (:mod:`reentry.kernel`) computes
  the same counts and the same first violation without enumerating tapes one
  by one.

Whatever the engine, a counterexample is rebuilt by :func:`replay` so that
reported traces always come from the reference semantics.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional, Union

from . import contracts, kernel
from .adversary import AdversaryHandle, ChoiceTape, HavocPools, drive_tapes
from .contracts import Runtime, TokenVariant
from .machine import (
    ALL_CHECK_POINTS,
    MAX_UINT256,
    Address,
    CallEvent,
    CheckPoint,
    HarnessError,
    InvariantViolation,
    Monitor,
    Msg,
    WorldState,
    address_pool,
    parse_address,
    release,
    restore,
    snapshot,
)

TOKEN_METHODS = ("transfer", "mint")
AUCTION_METHODS = ("bid", "withdraw", "end")
ADDRESS_ARGS = frozenset({"from", "to", "sender"})
ARG_ORDER = {
    "transfer": ("from", "to", "amount", "sender", "value"),
    "mint": ("to", "amount", "sender", "value"),
    "bid": ("sender", "value"),
    "withdraw": ("sender",),
    "end": ("sender",),
}


class ConfigError(ValueError):
    """The scenario cannot be explored as configured."""


class ReplayError(HarnessError):
    """A tape or schedule does not fit the scenario it is replayed against."""


# -- calls and scenarios ---------------------------------------------------


@dataclass(frozen=True)
class Call:
    method: str
    args: tuple[tuple[str, Any], ...]
    gas: int = 1

    @classmethod
    def make(cls, method: str, gas: int = 1, **args) -> "Call":
        if method not in ARG_ORDER:
            raise ConfigError(f"unknown method {method!r}")
        missing = set(ARG_ORDER[method]) - set(args)
        if missing:
            raise ConfigError(f"{method} needs {sorted(missing)}")
        return cls(method, tuple((k, args[k]) for k in ARG_ORDER[method]), gas)

    @property
    def kw(self) -> dict[str, Any]:
        return dict(self.args)

    def to_json(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "args": {k: (v.name if isinstance(v, Address) else str(v)) for k, v in self.args},
            "gas": self.gas,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "Call":
        args = {}
        for k, v in d["args"].items():
            args[k] = parse_address(v) if k in ADDRESS_ARGS else int(v)
        return cls.make(d["method"], d.get("gas", 1), **args)

    def __str__(self) -> str:
        rendered = ", ".join(f"{k}={v.name if isinstance(v, Address) else v}" for k, v in self.args)
        return f"{self.method}({rendered}; gas={self.gas})"


def parse_call(text: str, deployer: Address, gas: int = 1) -> Call:
    """Parse the compact ``method:arg:arg`` form used on the command line.

    ``mint:B:10`` mints 10 to B (sent by the deployer), ``transfer:A:B:5`` sends
    5 from A to B (sent by A), ``bid:B:3``, ``withdraw:B``, ``end:A``.
    """
    parts = text.split(":")
    method, rest = parts[0], parts[1:]
    try:
        if method == "mint" and len(rest) == 2:
            return Call.make("mint", gas, to=parse_address(rest[0]), amount=_amount(rest[1]),
                             sender=deployer, value=0)
        if method == "transfer" and len(rest) == 3:
            src = parse_address(rest[0])
            return Call.make("transfer", gas, **{"from": src}, to=parse_address(rest[1]),
                             amount=_amount(rest[2]), sender=src, value=0)
        if method == "bid" and len(rest) == 2:
            return Call.make("bid", gas, sender=parse_address(rest[0]), value=_amount(rest[1]))
        if method in ("withdraw", "end") and len(rest) == 1:
            return Call.make(method, gas, sender=parse_address(rest[0]))
    except ValueError as exc:
        raise ConfigError(f"bad call {text!r}: {exc}") from None
    raise ConfigError(f"bad call {text!r}")


def _amount(text: str) -> int:
    text = text.strip().lower()
    v = MAX_UINT256 if text == "max" else int(text)
    if not 0 <= v <= MAX_UINT256:
        raise ValueError(f"{text} is not a uint256")
    return v


@dataclass(frozen=True)
class Scenario:
    contract: str = "token"
    variant: TokenVariant = TokenVariant.GUARDED
    pools: HavocPools = field(default_factory=HavocPools)
    gas_bound: int = 4
    tx_prefix: tuple[Call, ...] = ()
    max_txs: int = 1
    check_points: frozenset = ALL_CHECK_POINTS
    mode: str = "exhaustive"
    trials: int = 1000
    seed: int = 0
    deployer: Address = Address(0)
    listing_faithful_gas: bool = False
    require_zero_value: bool = True
    dedup: bool = True
    check_revert_frame: bool = False
    broken_auction_end: bool = False

    def validate(self) -> None:
        if self.contract not in ("token", "auction"):
            raise ConfigError(f"unknown contract {self.contract!r}")
        if self.gas_bound < 1:
            raise ConfigError("gas_bound must be >= 1")
        if self.max_txs < 1:
            raise ConfigError("max_txs must be >= 1")
        if not self.check_points:
            raise ConfigError("at least one check point is required")
        if self.mode not in ("exhaustive", "random"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "random" and self.trials < 1:
            raise ConfigError("random mode needs trials >= 1")
        methods = TOKEN_METHODS if self.contract == "token" else AUCTION_METHODS
        pool = set(self.pools.addresses)
        for call in self.tx_prefix:
            if call.method not in methods:
                raise ConfigError(f"{call.method} is not a {self.contract} method")
            for k, v in call.args:
                if k in ADDRESS_ARGS and v not in pool:
                    raise ConfigError(f"prefix address {v!r} is outside the address pool")

    def effective_pools(self) -> HavocPools:
        """The havoc pools with amounts used by the setup prefix tried first."""
        seen = []
        for call in self.tx_prefix:
            for k, v in call.args:
                if k == "amount" and v not in seen:
                    seen.append(v)
        if not seen:
            return self.pools
        rest = tuple(a for a in self.pools.amounts if a not in seen)
        return replace(self.pools, amounts=tuple(seen) + rest)

    @property
    def checks(self) -> frozenset:
        return frozenset(CheckPoint(p) for p in self.check_points)

    def to_json(self) -> dict[str, Any]:
        return {
            "contract": self.contract,
            "variant": self.variant.value,
            "pools": {
                "addresses": [a.name for a in self.pools.addresses],
                "amounts": [str(a) for a in self.pools.amounts],
                "values": [str(v) for v in self.pools.values],
            },
            "gas_bound": self.gas_bound,
            "tx_prefix": [c.to_json() for c in self.tx_prefix],
            "max_txs": self.max_txs,
            "check_points": sorted(p.value for p in self.checks),
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "deployer": self.deployer.name,
            "listing_faithful_gas": self.listing_faithful_gas,
            "require_zero_value": self.require_zero_value,
            "dedup": self.dedup,
            "check_revert_frame": self.check_revert_frame,
            "broken_auction_end": self.broken_auction_end,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "Scenario":
        d = dict(d)
        kw: dict[str, Any] = {}
        if "variant" in d:
            kw["variant"] = TokenVariant(d.pop("variant"))
        if "pools" in d:
            p = d.pop("pools")
            base = HavocPools()
            kw["pools"] = HavocPools(
                addresses=tuple(parse_address(a) for a in p["addresses"]) if "addresses" in p else base.addresses,
                amounts=tuple(_amount(str(a)) for a in p["amounts"]) if "amounts" in p else base.amounts,
                values=tuple(_amount(str(v)) for v in p["values"]) if "values" in p else base.values,
            )
        if "tx_prefix" in d:
            kw["tx_prefix"] = tuple(Call.from_json(c) for c in d.pop("tx_prefix"))
        if "check_points" in d:
            kw["check_points"] = frozenset(CheckPoint(p) for p in d.pop("check_points"))
        if "deployer" in d:
            kw["deployer"] = parse_address(d.pop("deployer"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields {sorted(unknown)}")
        kw.update(d)
        return cls(**kw)


def top_level_calls(scenario: Scenario) -> list[Call]:
    """Every top-level call the explorer may issue, in schedule order."""
    pools = scenario.effective_pools()
    addrs, amounts, values = pools.addresses, pools.amounts, pools.values
    gases = range(1, scenario.gas_bound + 1)
    out = []
    if scenario.contract == "token":
        for f in addrs:
            for t in addrs:
                for a in amounts:
                    for s in addrs:
                        for v in values:
                            for g in gases:
                                out.append(Call.make("transfer", g, **{"from": f}, to=t, amount=a, sender=s, value=v))
        for t in addrs:
            for a in amounts:
                for s in addrs:
                    for v in values:
                        for g in gases:
                            out.append(Call.make("mint", g, to=t, amount=a, sender=s, value=v))
    else:
        for s in addrs:
            for v in values:
                for g in gases:
                    out.append(Call.make("bid", g, sender=s, value=v))
        for method in ("withdraw", "end"):
            for s in addrs:
                for g in gases:
                    out.append(Call.make(method, g, sender=s))
    return out


# -- verdicts --------------------------------------------------------------


@dataclass
class Holds:
    schedules_explored: int
    max_depth: int

    @property
    def holds(self) -> bool:
        return True


@dataclass
class Violated:
    calls: list[Call]
    tape: list[int]
    trace: list[CallEvent]
    violated_invariant: str
    check_point: str
    detail: str
    state_digest: str
    final_state: dict[str, Any]
    tape_splits: list[int] = field(default_factory=list)
    schedules_explored: int = 0
    max_depth: int = 0

    @property
    def holds(self) -> bool:
        return False


Verdict = Union[Holds, Violated]


# -- world construction and execution ----------------------------------------


def state_check(scenario: Scenario):
    if scenario.contract == "token":
        return contracts.ginv
    return contracts.ended_monotone


def _runtime(scenario: Scenario, monitor: Monitor, tape: ChoiceTape, pools: HavocPools) -> Runtime:
    rt = Runtime(
        variant=scenario.variant,
        monitor=monitor,
        require_zero_value=scenario.require_zero_value,
        broken_auction_end=scenario.broken_auction_end,
        check_revert_frame=scenario.check_revert_frame,
    )
    AdversaryHandle(tape, pools, rt, listing_faithful_gas=scenario.listing_faithful_gas)
    return rt


def precondition_holds(state: WorldState, call: Call) -> bool:
    """Closed-variant preconditions, which the harness must establish itself."""
    a = call.kw
    tok = state.token
    if call.method == "transfer":
        return contracts._transfer_guard(tok, a["from"], a["to"], a["amount"],
                                         Msg(a["sender"], a["value"]), call.gas, True)
    return contracts._mint_guard(tok, a["to"], a["amount"], Msg(a["sender"], a["value"]), call.gas)


def execute_call(state: WorldState, call: Call, tape: ChoiceTape, scenario: Scenario,
                 monitor: Monitor, pools: Optional[HavocPools] = None):
    """Run one top-level call as a transaction; a revert rolls the state back."""
    rt = _runtime(scenario, monitor, tape, pools or scenario.effective_pools())
    a = call.kw
    tx = snapshot(state)
    if call.method == "transfer":
        g, r = contracts.transfer(state, a["from"], a["to"], a["amount"], Msg(a["sender"], a["value"]), call.gas, rt)
    elif call.method == "mint":
        g, r = contracts.mint(state, a["to"], a["amount"], Msg(a["sender"], a["value"]), call.gas, rt)
    elif call.method == "bid":
        g, r = contracts.auction_bid(state, Msg(a["sender"], a["value"]), call.gas, rt)
    elif call.method == "withdraw":
        g, r = contracts.auction_withdraw(state, Msg(a["sender"]), call.gas, rt)
    elif call.method == "end":
        g, r = contracts.auction_end(state, Msg(a["sender"]), call.gas, rt)
    else:
        raise ReplayError(f"unknown method {call.method!r}")
    if r.is_revert:
        restore(state, tx)
    release(state, tx)
    monitor.checkpoint(CheckPoint.TX_END, state)
    return g, r


def initial_world(scenario: Scenario) -> WorldState:
    pools = scenario.effective_pools()
    state = WorldState.with_users(pools.addresses)
    if scenario.contract == "token":
        state.token = contracts.token_new(Msg(scenario.deployer, 0))
    else:
        state.auction = contracts.auction_new(scenario.deployer)
    for call in scenario.tx_prefix:
        if scenario.contract == "token" and scenario.variant is TokenVariant.CLOSED \
                and not precondition_holds(state, call):
            raise ConfigError(f"prefix call {call} violates the closed preconditions")
        mon = Monitor(state_check(scenario), scenario.checks)
        try:
            _, r = execute_call(state, call, ChoiceTape(), scenario, mon, pools)
        except InvariantViolation as exc:
            raise ConfigError(f"prefix call {call} breaks an invariant: {exc}") from None
        if r.is_revert:
            raise ConfigError(f"prefix call {call} reverts")
    state.ghost_history.clear()
    if state.auction is not None:
        state.auction.ended_history.clear()
    return state


def state_key(state: WorldState) -> tuple:
    """Hashable form of everything future behaviour depends on."""
    accounts = tuple(sorted((a.id, acc.kind.value, acc.native_balance) for a, acc in state.accounts.items()))
    tok = state.token
    token = None if tok is None else (
        tok.minter.id, tuple(sorted((a.id, b) for a, b in tok.balances.items())),
        tok.native_balance, tok.total_minted)
    auc = state.auction
    auction = None if auc is None else (
        auc.beneficiary.id, auc.highest_bid, None if auc.highest_bidder is None else auc.highest_bidder.id,
        auc.ended, tuple(sorted((a.id, v) for a, v in auc.pending_returns.items())), auc.native_balance,
        # the monotonicity check only depends on whether ended was ever seen true
        any(auc.ended_history))
    return accounts, token, auction


def final_state(state: WorldState) -> dict[str, Any]:
    if state.token is not None:
        tok = state.token
        return {
            "balances": {a.name: str(b) for a, b in sorted(tok.balances.items())},
            "total_minted": str(tok.total_minted),
            "sum_balances": str(contracts.sum_balances(tok.balances)),
            "native_balance": str(tok.native_balance),
        }
    auc = state.auction
    return {
        "ended": auc.ended,
        "ended_history": list(auc.ended_history),
        "highest_bid": str(auc.highest_bid),
        "highest_bidder": None if auc.highest_bidder is None else auc.highest_bidder.name,
        "pending_returns": {a.name: str(v) for a, v in sorted(auc.pending_returns.items())},
    }


def state_digest(state: WorldState) -> str:
    blob = json.dumps(final_state(state), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# -- replay ----------------------------------------------------------------


@dataclass
class Replay:
    trace: list[CallEvent]
    state: WorldState
    violation: Optional[InvariantViolation]
    tape: list[int]
    tape_splits: list[int]
    max_depth: int


def replay(tape: Union[ChoiceTape, Iterable[int]], scenario: Scenario, calls: list[Call]) -> Replay:
    """Deterministically re-execute ``calls`` from the scenario's initial state.

    One tape drives all calls in order; reading past its end is quiescent.
    Execution stops at the first invariant violation.
    """
    steps = list(tape.steps if isinstance(tape, ChoiceTape) else tape)
    methods = TOKEN_METHODS if scenario.contract == "token" else AUCTION_METHODS
    pools = scenario.effective_pools()
    pool = set(pools.addresses)
    for call in calls:
        if call.method not in methods:
            raise ReplayError(f"{call.method} is not a {scenario.contract} method")
        for k, v in call.args:
            if k in ADDRESS_ARGS and v not in pool:
                raise ReplayError(f"address {v!r} is outside the scenario's pool")
    state = initial_world(scenario)
    shared = ChoiceTape(steps)
    mon = Monitor(state_check(scenario), scenario.checks)
    violation = None
    splits = []
    for call in calls:
        if scenario.contract == "token" and scenario.variant is TokenVariant.CLOSED \
                and not precondition_holds(state, call):
            raise ReplayError(f"{call} violates the closed preconditions")
        before = shared.reads
        try:
            execute_call(state, call, shared, scenario, mon, pools)
        except InvariantViolation as exc:
            violation = exc
        splits.append(shared.reads - before)
        if violation is not None:
            break
    used = [steps[i] % shared.arities[i] if i < len(steps) else 0 for i in range(min(shared.reads, len(steps)))]
    # positions read past the end were quiescent; keep the tape as given up to there
    return Replay(mon.events, state, violation, used, splits, mon.max_depth)


def _violated_from(rep: Replay, calls: list[Call], count: int = 0) -> Violated:
    v = rep.violation
    return Violated(
        calls=list(calls[: len(rep.tape_splits)]),
        tape=list(rep.tape),
        trace=rep.trace,
        violated_invariant=v.invariant,
        check_point=v.point.value,
        detail=v.detail,
        state_digest=state_digest(rep.state),
        final_state=final_state(rep.state),
        tape_splits=list(rep.tape_splits),
        schedules_explored=count,
        max_depth=rep.max_depth,
    )


# -- engines ---------------------------------------------------------------


class ReferenceSearch:
    """Tape-by-tape exhaustive search through the object-level semantics."""

    def __init__(self, scenario: Scenario, memo: bool):
        self.scenario = scenario
        self.memo = memo
        self.calls = top_level_calls(scenario)
        self.pools = scenario.effective_pools()
        self.check = state_check(scenario)
        self.checks = scenario.checks
        self._seen: dict[tuple, tuple[int, int]] = {}
        self.closed = scenario.contract == "token" and scenario.variant is TokenVariant.CLOSED

    def _runner(self, state: WorldState, call: Call):
        def run(tape: ChoiceTape):
            st = state.clone()
            mon = Monitor(self.check, self.checks)
            try:
                execute_call(st, call, tape, self.scenario, mon, self.pools)
            except InvariantViolation as exc:
                return exc, st, mon.max_depth
            return None, st, mon.max_depth
        return run

    def search(self, state: WorldState, depth: int, roots=None):
        if depth == 0:
            return 1, -1, None
        key = None
        if self.memo and roots is None:
            key = (state_key(state), depth)
            hit = self._seen.get(key)
            if hit is not None:
                return hit[0], hit[1], None
        total, height = 0, -1
        indices = range(len(self.calls)) if roots is None else roots
        for ci in indices:
            call = self.calls[ci]
            if self.closed and not precondition_holds(state, call):
                continue
            for tape, (exc, st, h) in drive_tapes(self._runner(state, call)):
                height = max(height, h)
                if exc is not None:
                    return total, height, ([ci], [list(tape.steps)], exc.point.value, exc.detail)
                cnt, h2, v = self.search(st, depth - 1)
                total += cnt
                height = max(height, h2)
                if v is not None:
                    return total, height, ([ci] + v[0], [list(tape.steps)] + v[1], v[2], v[3])
        if key is not None:
            self._seen[key] = (total, height)
        return total, height, None


_VARIANT_CODE = {
    TokenVariant.CLOSED: kernel.CLOSED,
    TokenVariant.GUARDED: kernel.GUARDED,
    TokenVariant.OPEN: kernel.OPEN,
    TokenVariant.OPEN_BUGGY: kernel.OPEN_BUGGY,
}
_CP_CODE = {CheckPoint.EXTERNAL_CALL_SITE: kernel.CP_EXT, CheckPoint.METHOD_EXIT: kernel.CP_EXIT,
            CheckPoint.TX_END: kernel.CP_TX}
_CP_NAME = {v: k.value for k, v in _CP_CODE.items()}


class KernelSearch:
    """Adapter from a token scenario to the summary kernel."""

    def __init__(self, scenario: Scenario, backend=None):
        """``backend`` is a module providing ``TokenSearch``; default is :mod:`reentry.kernel`."""
        self.scenario = scenario
        self.pools = pools = scenario.effective_pools()
        self.calls = top_level_calls(scenario)
        index = {a: i for i, a in enumerate(pools.addresses)}
        self.index = index
        encoded = []
        for call in self.calls:
            a = call.kw
            if call.method == "transfer":
                encoded.append((kernel.M_TRANSFER, index[a["from"]], index[a["to"]], a["amount"],
                                index[a["sender"]], a["value"], call.gas))
            else:
                encoded.append((kernel.M_MINT, index[a["to"]], 0, a["amount"], index[a["sender"]],
                                a["value"], call.gas))
        self.impl = (backend or kernel).TokenSearch(
            _VARIANT_CODE[scenario.variant], len(pools.addresses), pools.amounts, pools.values,
            index.get(scenario.deployer, -1), encoded, {_CP_CODE[p] for p in scenario.checks},
            scenario.require_zero_value, scenario.listing_faithful_gas, True)

    def encode_state(self, state: WorldState) -> tuple:
        tok = state.token
        bal = [None] * len(self.pools.addresses)
        for a, b in tok.balances.items():
            bal[self.index[a]] = b
        return tuple(bal) + (tok.total_minted, tok.native_balance)

    def search(self, state: WorldState, depth: int, roots=None):
        count, height, v = self.impl.search(self.encode_state(state), depth, roots)
        if v is not None:
            v = (v[0], [kernel.flatten(w) for w in v[1]], _CP_NAME[v[2]], v[3])
        return count, height, v


def _engine(scenario: Scenario):
    if scenario.contract == "token" and scenario.dedup and not scenario.check_revert_frame:
        return KernelSearch(scenario)
    return ReferenceSearch(scenario, memo=scenario.dedup)


def _search_part(scenario: Scenario, roots):
    engine = _engine(scenario)
    return engine.search(initial_world(scenario), scenario.max_txs, roots)


def explore(scenario: Scenario, workers: int = 1) -> Verdict:
    """Explore every schedule (or a random sample) and return the verdict."""
    scenario.validate()
    if scenario.mode == "random":
        return _explore_random(scenario)
    initial_world(scenario)  # surfaces prefix errors before any search
    calls = top_level_calls(scenario)
    if workers <= 1:
        count, height, raw = _search_part(scenario, None)
    else:
        parts = [list(range(w, len(calls), workers)) for w in range(workers)]
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_search_part, [scenario] * workers, parts))
        count = sum(r[0] for r in results)
        height = max(r[1] for r in results)
        found = [r[2] for r in results if r[2] is not None]
        raw = min(found, key=lambda v: v[0]) if found else None
    if raw is None:
        return Holds(count, max(height, 0))
    chosen = [calls[i] for i in raw[0]]
    tape = [x for seg in raw[1] for x in seg]
    rep = replay(tape, scenario, chosen)
    if rep.violation is None or rep.violation.point.value != raw[2]:
        raise HarnessError("search engine and reference semantics disagree on a counterexample")
    return _violated_from(rep, chosen, count)


def _explore_random(scenario: Scenario) -> Verdict:
    rng = random.Random(scenario.seed)
    calls = top_level_calls(scenario)
    pools = scenario.effective_pools()
    closed = scenario.contract == "token" and scenario.variant is TokenVariant.CLOSED
    max_depth = 0
    for _ in range(scenario.trials):
        state = initial_world(scenario)
        mon = Monitor(state_check(scenario), scenario.checks)
        chosen: list[Call] = []
        tape = ChoiceTape([rng.randrange(1 << 16) for _ in range(rng.randrange(8 * scenario.gas_bound))])
        violation = None
        for _ in range(scenario.max_txs):
            options = [c for c in calls if precondition_holds(state, c)] if closed else calls
            if not options:
                break
            call = rng.choice(options)
            chosen.append(call)
            try:
                execute_call(state, call, tape, scenario, mon, pools)
            except InvariantViolation as exc:
                violation = exc
                break
        max_depth = max(max_depth, mon.max_depth)
        if violation is not None:
            rep = replay(tape.steps, scenario, chosen)
            return _violated_from(rep, chosen)
    return Holds(scenario.trials, max_depth)


# -- minimisation ----------------------------------------------------------


def _measure(v: Violated, scenario: Scenario) -> tuple:
    pools = scenario.effective_pools()
    rank = {a: i for i, a in enumerate(pools.addresses)}
    args = []
    for c in v.calls:
        for _k, x in c.args:
            args.append(rank[x] if isinstance(x, Address) else x)
    return (len(v.calls), max((c.gas for c in v.calls), default=0), sum(c.gas for c in v.calls),
            len(v.tape), v.tape, args)


def _candidates(v: Violated, scenario: Scenario):
    calls, tape, splits = v.calls, v.tape, v.tape_splits
    bounds = [0]
    for n in splits:
        bounds.append(bounds[-1] + n)
    # drop whole top-level calls together with their part of the tape
    for i in range(len(calls)):
        yield calls[:i] + calls[i + 1:], tape[: bounds[i]] + tape[bounds[i + 1]:]
    # lower gas
    for i, c in enumerate(calls):
        for g in range(1, c.gas):
            yield calls[:i] + [replace(c, gas=g)] + calls[i + 1:], tape
    # drop tape suffixes
    for m in range(len(tape)):
        yield calls, tape[:m]
    # push tape entries toward 0
    for i, x in enumerate(tape):
        for y in range(x):
            yield calls, tape[:i] + [y] + tape[i + 1:]
    # shrink call arguments toward the start of their pools (0/1 first for numbers)
    pools = scenario.effective_pools()
    for i, c in enumerate(calls):
        for j, (k, x) in enumerate(c.args):
            if isinstance(x, Address):
                options = [a for a in pools.addresses if a < x]
            else:
                pool = pools.amounts if k == "amount" else pools.values
                options = sorted(y for y in set(pool) | {0, 1} if y < x)
            for y in options:
                args = c.args[:j] + ((k, y),) + c.args[j + 1:]
                yield calls[:i] + [Call(c.method, args, c.gas)] + calls[i + 1:], tape


def minimize(verdict: Violated, scenario: Scenario) -> Violated:
    """Greedily shrink a counterexample while it keeps violating the same invariant."""
    best = verdict
    best_m = _measure(best, scenario)
    closed = scenario.contract == "token" and scenario.variant is TokenVariant.CLOSED
    improved = True
    while improved:
        improved = False
        for calls, tape in _candidates(best, scenario):
            if not calls:
                continue
            try:
                rep = replay(tape, scenario, calls)
            except ReplayError:
                if closed:
                    continue
                raise
            if rep.violation is None or rep.violation.invariant != best.violated_invariant:
                continue
            cand = _violated_from(rep, calls, best.schedules_explored)
            m = _measure(cand, scenario)
            if m < best_m:
                best, best_m = cand, m
                improved = True
                break
    return best
