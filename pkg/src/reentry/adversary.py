"""A replayable adversarial environment for external calls.

An external call may re-enter the token (``transfer`` or ``mint``) with
arbitrary arguments, and may then make a further external call. Every
nondeterministic choice is read from a :class:`ChoiceTape`, so one tape is one
concrete environment behaviour, and the set of all tapes can be enumerated.

Tape layout for one external call::

    k                      0 = transfer, 1 = mint, 2 = no re-entry
    [from, to, amount, sender, value]   if k == 0 and gas remains
    [to, amount, sender, value]         if k == 1 and gas remains
    b                      1 = make another external call
    [r]                    if no further call: 0 = Success, 1 = Revert

Each entry is decoded modulo the size of its alphabet. Reading past the end
of a tape yields the quiescent choice (no re-entry, no further call, Success).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

from . import contracts
from .machine import (
    MAX_UINT256,
    REVERT,
    UNIT,
    Address,
    CheckPoint,
    Msg,
    Outcome,
    WorldState,
    address_pool,
    gas_after_revert,
)

K_TRANSFER, K_MINT, K_NONE = 0, 1, 2


class ChoiceTape:
    """A finite sequence of decisions with a read cursor.

    With ``extend=True`` a read past the end appends the first symbol of the
    alphabet instead of answering quiescently; the enumerator uses this to
    discover the shape of the decision tree one run at a time.
    """

    def __init__(self, steps: Sequence[int] = (), extend: bool = False):
        if any(s < 0 for s in steps):
            raise ValueError("tape entries are naturals")
        self.steps = list(steps)
        self.extend = extend
        self.cursor = 0
        self.arities: list[int] = []

    def read(self, arity: int, quiescent: int = 0) -> int:
        pos = len(self.arities)
        self.arities.append(arity)
        if pos < len(self.steps):
            self.cursor = pos + 1
            return self.steps[pos] % arity
        if self.extend:
            self.steps.append(0)
            self.cursor = pos + 1
            return 0
        return quiescent

    @property
    def reads(self) -> int:
        return len(self.arities)

    def rewind(self) -> "ChoiceTape":
        return ChoiceTape(self.steps, self.extend)

    def to_json(self) -> str:
        return json.dumps(self.steps)

    @classmethod
    def from_json(cls, text: str) -> "ChoiceTape":
        steps = json.loads(text)
        if not isinstance(steps, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in steps):
            raise ValueError("a tape is a JSON array of naturals")
        return cls(steps)

    def __repr__(self) -> str:
        return f"ChoiceTape({self.steps})"


@dataclass(frozen=True)
class HavocPools:
    addresses: tuple[Address, ...] = field(default_factory=lambda: address_pool(3))
    amounts: tuple[int, ...] = (0, 1, 2, MAX_UINT256)
    values: tuple[int, ...] = (0,)

    def __post_init__(self):
        for name in ("addresses", "amounts", "values"):
            pool = getattr(self, name)
            if not pool:
                raise ValueError(f"havoc pool {name!r} is empty")
            if len(set(pool)) != len(pool):
                raise ValueError(f"havoc pool {name!r} has duplicates")
        for v in self.amounts + self.values:
            if not 0 <= v <= MAX_UINT256:
                raise ValueError(f"{v} is not a uint256")


@dataclass
class AdversaryHandle:
    """The environment behind every external call of one execution."""

    tape: ChoiceTape
    pools: HavocPools
    runtime: "contracts.Runtime"
    # Reproduce the listing's gas reset on the no-further-call branch.
    listing_faithful_gas: bool = False
    callbacks: dict[str, Callable] = field(
        default_factory=lambda: {"transfer": contracts.transfer, "mint": contracts.mint}
    )

    def __post_init__(self):
        self.runtime.adversary = self

    def _havoc(self, pool):
        return pool[self.tape.read(len(pool))]

    def external_call(self, state: WorldState, gas: int) -> tuple[int, Outcome]:
        mon = self.runtime.monitor
        ev = mon.enter("external_call", {}, gas)
        mon.checkpoint(CheckPoint.EXTERNAL_CALL_SITE, state)
        pools, rt = self.pools, self.runtime
        g, r = gas, UNIT
        k = self.tape.read(3, K_NONE)
        if k == K_TRANSFER and g >= 1:
            from_, to = self._havoc(pools.addresses), self._havoc(pools.addresses)
            amount = self._havoc(pools.amounts)
            msg = Msg(self._havoc(pools.addresses), self._havoc(pools.values))
            g, r = self.callbacks["transfer"](state, from_, to, amount, msg, g - 1, rt)
        elif k == K_MINT and g >= 1:
            to, amount = self._havoc(pools.addresses), self._havoc(pools.amounts)
            msg = Msg(self._havoc(pools.addresses), self._havoc(pools.values))
            g, r = self.callbacks["mint"](state, to, amount, msg, g - 1, rt)
        if self.tape.read(2, 0) == 1 and g >= 1:
            g, r = self.external_call(state, g - 1)
        else:
            if self.listing_faithful_gas:
                g = gas_after_revert(gas)
            else:
                g = min(g, gas_after_revert(gas))
            r = REVERT if self.tape.read(2, 0) == 1 else UNIT
        return mon.leave(ev, g, r)


# -- enumeration -----------------------------------------------------------


def next_tape(steps: list[int], arities: list[int], floor: int = 0) -> Optional[list[int]]:
    """Lexicographic successor among complete tapes, or None when exhausted.

    ``steps``/``arities`` describe the last complete run: the successor bumps
    the deepest position that still has an unused symbol and drops the rest.
    Positions below ``floor`` are never bumped.
    """
    for i in range(len(arities) - 1, floor - 1, -1):
        if steps[i] + 1 < arities[i]:
            return steps[:i] + [steps[i] + 1]
    return None


def drive_tapes(run: Callable[[ChoiceTape], object],
                prefix: Sequence[int] = ()) -> Iterator[tuple[ChoiceTape, object]]:
    """Run ``run`` once per complete tape starting with ``prefix``, in lexicographic order."""
    steps: Optional[list[int]] = list(prefix)
    while steps is not None:
        tape = ChoiceTape(steps, extend=True)
        result = run(tape)
        if tape.reads < len(prefix):
            raise ValueError(f"prefix {list(prefix)} is longer than the runs it selects")
        del tape.steps[tape.reads :]
        yield tape, result
        steps = next_tape(tape.steps, tape.arities, len(prefix))


def bare_external_call_runner(pools: HavocPools, gas_bound: int,
                              variant: contracts.TokenVariant = contracts.TokenVariant.OPEN,
                              seed_balance: int = 0):
    """One external call given ``gas_bound`` gas against a fresh token.

    The first pool address is the minter; ``seed_balance`` tokens are minted
    to it beforehand. The run returns the recorded call events.
    """
    minter = pools.addresses[0]

    def run(tape: ChoiceTape):
        state = WorldState.with_users(pools.addresses)
        state.token = contracts.token_new(Msg(minter, 0))
        if seed_balance:
            state.token.balances[minter] = seed_balance
            state.token.total_minted = seed_balance
        rt = contracts.Runtime(variant=variant)
        adv = AdversaryHandle(tape, pools, rt)
        adv.external_call(state, gas_bound)
        return rt.monitor.events

    return run


def enumerate_tapes(pools: HavocPools, gas_bound: int,
                    run: Optional[Callable[[ChoiceTape], object]] = None,
                    prefix: Sequence[int] = ()) -> Iterator[ChoiceTape]:
    """Every reachable-distinct complete tape, in lexicographic order.

    By default the tapes drive one external call given ``gas_bound`` gas (see
    :func:`bare_external_call_runner`); pass ``run`` to enumerate for another
    executor, and ``prefix`` to restrict the stream to one subtree.
    """
    if gas_bound < 1:
        raise ValueError("gas_bound must be >= 1")
    if run is None:
        run = bare_external_call_runner(pools, gas_bound)
    for tape, _ in drive_tapes(run, prefix):
        yield ChoiceTape(tape.steps)
