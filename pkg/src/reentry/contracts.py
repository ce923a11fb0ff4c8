"""Example contracts: a Token in four variants and a minimal open auction.

Token variants:

* ``CLOSED``      preconditions are the caller's duty; a violation aborts the run.
* ``GUARDED``     preconditions become runtime guards; failing any guard reverts.
* ``OPEN``        guarded, and ``transfer`` notifies the receiver through an
                  adversarial external call *after* all balance updates.
* ``OPEN_BUGGY``  like ``OPEN`` but the external call happens *before* the
                  balance updates, with the debit value computed up front.

All public methods take the gas they may spend and return ``(gas_left, outcome)``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Any, ClassVar, Optional

from .machine import (
    MAX_UINT256,
    REVERT,
    UNIT,
    Address,
    CheckPoint,
    HarnessError,
    InvariantViolation,
    Monitor,
    Msg,
    Outcome,
    WorldState,
    checked_add,
    gas_after_revert,
    release,
    restore,
    snapshot,
)


class TokenVariant(str, enum.Enum):
    CLOSED = "closed"
    GUARDED = "guarded"
    OPEN = "open"
    OPEN_BUGGY = "open-buggy"

    @property
    def has_external_call(self) -> bool:
        return self in (TokenVariant.OPEN, TokenVariant.OPEN_BUGGY)


@dataclass
class TokenState:
    GHOST_FIELDS: ClassVar[tuple[str, ...]] = ()

    minter: Address
    balances: dict[Address, int] = field(default_factory=dict)
    native_balance: int = 0
    # ghost: number of tokens ever minted
    total_minted: int = 0

    def __setattr__(self, name: str, value: Any) -> None:
        if name == "minter" and "minter" in self.__dict__ and self.minter != value:
            raise HarnessError("minter is write-once")
        super().__setattr__(name, value)


@dataclass
class AuctionState:
    GHOST_FIELDS: ClassVar[tuple[str, ...]] = ("ended_history",)

    beneficiary: Address
    highest_bid: int = 0
    highest_bidder: Optional[Address] = None
    ended: bool = False
    pending_returns: dict[Address, int] = field(default_factory=dict)
    native_balance: int = 0
    ended_history: list[bool] = field(default_factory=list)


@dataclass
class Runtime:
    """Everything a contract call needs besides the world state and its arguments."""

    variant: TokenVariant = TokenVariant.GUARDED
    adversary: Any = None
    monitor: Monitor = field(default_factory=Monitor)
    # Keep transfer non-payable as a runtime guard; False reproduces the literal
    # guard set, which credits msg.value to the contract instead.
    require_zero_value: bool = True
    # Mutation hook for the auction suite: end() re-opens an ended auction.
    broken_auction_end: bool = False
    # Compare non-ghost state before and after every reverting public call.
    check_revert_frame: bool = False


def _framed(method):
    """Enforce that a reverting call leaves non-ghost state untouched."""

    @functools.wraps(method)
    def wrapper(state: WorldState, *args):
        rt: Runtime = args[-1]
        if not rt.check_revert_frame:
            return method(state, *args)
        before = state.non_ghost()
        gas, outcome = method(state, *args)
        if outcome.is_revert and state.non_ghost() != before:
            raise InvariantViolation("revert-frame", CheckPoint.METHOD_EXIT,
                                     f"{method.__name__} reverted but changed state")
        return gas, outcome

    return wrapper


# -- token -----------------------------------------------------------------


def token_new(msg: Msg) -> TokenState:
    return TokenState(minter=msg.sender, balances={}, native_balance=msg.value, total_minted=0)


def sum_balances(balances: dict[Address, int]) -> int:
    return sum(balances.values())


def ginv(state: WorldState) -> Optional[tuple[str, str]]:
    tok = state.token
    total = sum_balances(tok.balances)
    if tok.total_minted != total:
        return "GInv", f"sum_balances={total} total_minted={tok.total_minted}"
    return None


def _transfer_guard(tok: TokenState, from_, to, amount, msg, gas, require_zero_value) -> bool:
    return (
        from_ in tok.balances
        and tok.balances[from_] >= amount
        and msg.sender == from_
        and gas >= 1
        and (to not in tok.balances or tok.balances[to] + amount <= MAX_UINT256)
        and (msg.value == 0 or not require_zero_value)
    )


def _mint_guard(tok: TokenState, to, amount, msg, gas) -> bool:
    return (
        msg.sender == tok.minter
        and gas >= 1
        and (to not in tok.balances or tok.balances[to] + amount <= MAX_UINT256)
    )


def _call_args(**kw) -> dict[str, str]:
    return {k: (v.name if isinstance(v, Address) else str(v)) for k, v in kw.items()}


@_framed
def transfer(state: WorldState, from_: Address, to: Address, amount: int, msg: Msg, gas: int,
             rt: Runtime) -> tuple[int, Outcome]:
    mon = rt.monitor
    ev = mon.enter("transfer", _call_args(**{"from": from_}, to=to, amount=amount,
                                          sender=msg.sender, value=msg.value), gas)
    state.observe(("transfer", msg.sender))
    tok: TokenState = state.token
    variant = rt.variant

    if variant is TokenVariant.CLOSED:
        if not _transfer_guard(tok, from_, to, amount, msg, gas, True):
            raise HarnessError(f"closed transfer called outside its preconditions: {ev.args}")
        tok.balances[from_] -= amount
        tok.balances[to] = tok.balances.get(to, 0) + amount
        mon.checkpoint(CheckPoint.METHOD_EXIT, state)
        return mon.leave(ev, gas - 1, UNIT)

    if not _transfer_guard(tok, from_, to, amount, msg, gas, rt.require_zero_value):
        mon.checkpoint(CheckPoint.METHOD_EXIT, state)
        return mon.leave(ev, gas_after_revert(gas), REVERT)

    snap = snapshot(state)
    if not rt.require_zero_value and msg.value:
        paid = checked_add(tok.native_balance, msg.value)
        if paid.is_revert:
            restore(state, snap)
            release(state, snap)
            mon.checkpoint(CheckPoint.METHOD_EXIT, state)
            return mon.leave(ev, gas - 1, REVERT)
        tok.native_balance = paid.value

    new_amount = tok.balances[from_] - amount
    g = gas - 1
    if variant is TokenVariant.OPEN_BUGGY:
        # interaction before effects: the callee sees the old balances
        g1, _ = rt.adversary.external_call(state, gas - 1)
        g = gas_after_revert(g1)
    # debit before credit so that a self-transfer is a no-op
    tok.balances[from_] = new_amount
    credited = checked_add(tok.balances.get(to, 0), amount)
    if credited.is_revert:
        # reachable only when a re-entrant call raised balances[to] meanwhile
        restore(state, snap)
        release(state, snap)
        mon.checkpoint(CheckPoint.METHOD_EXIT, state)
        return mon.leave(ev, g, REVERT)
    tok.balances[to] = credited.value

    if variant is TokenVariant.OPEN:
        g1, _ = rt.adversary.external_call(state, gas - 1)
        # the callee's failure is deliberately not propagated
        g = gas_after_revert(g1)
    release(state, snap)
    mon.checkpoint(CheckPoint.METHOD_EXIT, state)
    return mon.leave(ev, g, UNIT)


@_framed
def mint(state: WorldState, to: Address, amount: int, msg: Msg, gas: int,
         rt: Runtime) -> tuple[int, Outcome]:
    mon = rt.monitor
    ev = mon.enter("mint", _call_args(to=to, amount=amount, sender=msg.sender, value=msg.value), gas)
    state.observe(("mint", msg.sender))
    tok: TokenState = state.token

    if not _mint_guard(tok, to, amount, msg, gas):
        if rt.variant is TokenVariant.CLOSED:
            raise HarnessError(f"closed mint called outside its preconditions: {ev.args}")
        mon.checkpoint(CheckPoint.METHOD_EXIT, state)
        return mon.leave(ev, gas_after_revert(gas), REVERT)

    tok.balances[to] = tok.balances.get(to, 0) + amount
    tok.total_minted += amount
    mon.checkpoint(CheckPoint.METHOD_EXIT, state)
    return mon.leave(ev, gas - 1, UNIT)


# -- auction ---------------------------------------------------------------
#
# Open-auction rules, no time model: bids must strictly raise the highest bid,
# outbid amounts are withdrawn by their owners, and only the beneficiary may
# end the auction. Every call records the value of ``ended`` seen on entry.


def auction_new(beneficiary: Address) -> AuctionState:
    return AuctionState(beneficiary=beneficiary)


def ended_monotone(state: WorldState) -> Optional[tuple[str, str]]:
    auc: AuctionState = state.auction
    seen = auc.ended_history + [auc.ended]
    for i in range(1, len(seen)):
        if seen[i - 1] and not seen[i]:
            return "ended-monotone", f"ended went true->false after {i} observations"
    return None


def _auction_enter(state: WorldState, rt: Runtime, method: str, msg: Msg, gas: int):
    ev = rt.monitor.enter(method, _call_args(sender=msg.sender, value=msg.value), gas)
    state.observe((method, msg.sender))
    state.auction.ended_history.append(state.auction.ended)
    return ev


def _auction_leave(state: WorldState, rt: Runtime, ev, gas_out: int, outcome: Outcome):
    rt.monitor.checkpoint(CheckPoint.METHOD_EXIT, state)
    return rt.monitor.leave(ev, gas_out, outcome)


@_framed
def auction_bid(state: WorldState, msg: Msg, gas: int, rt: Runtime) -> tuple[int, Outcome]:
    ev = _auction_enter(state, rt, "bid", msg, gas)
    auc: AuctionState = state.auction
    if not (gas >= 1 and not auc.ended and msg.value > auc.highest_bid):
        return _auction_leave(state, rt, ev, gas_after_revert(gas), REVERT)
    snap = snapshot(state)
    ok = True
    if auc.highest_bidder is not None:
        prev = checked_add(auc.pending_returns.get(auc.highest_bidder, 0), auc.highest_bid)
        ok = prev.is_success
        if ok:
            auc.pending_returns[auc.highest_bidder] = prev.value
    paid = checked_add(auc.native_balance, msg.value)
    if not (ok and paid.is_success):
        restore(state, snap)
        release(state, snap)
        return _auction_leave(state, rt, ev, gas - 1, REVERT)
    auc.native_balance = paid.value
    auc.highest_bid = msg.value
    auc.highest_bidder = msg.sender
    release(state, snap)
    return _auction_leave(state, rt, ev, gas - 1, UNIT)


@_framed
def auction_withdraw(state: WorldState, msg: Msg, gas: int, rt: Runtime) -> tuple[int, Outcome]:
    ev = _auction_enter(state, rt, "withdraw", msg, gas)
    auc: AuctionState = state.auction
    if gas < 1:
        return _auction_leave(state, rt, ev, 0, REVERT)
    amount = auc.pending_returns.get(msg.sender, 0)
    account = state.accounts[msg.sender]
    credited = checked_add(account.native_balance, amount)
    if credited.is_revert or auc.native_balance < amount:
        return _auction_leave(state, rt, ev, gas - 1, REVERT)
    auc.pending_returns[msg.sender] = 0
    auc.native_balance -= amount
    account.native_balance = credited.value
    return _auction_leave(state, rt, ev, gas - 1, UNIT)


@_framed
def auction_end(state: WorldState, msg: Msg, gas: int, rt: Runtime) -> tuple[int, Outcome]:
    ev = _auction_enter(state, rt, "end", msg, gas)
    auc: AuctionState = state.auction
    if rt.broken_auction_end:
        if not (gas >= 1 and msg.sender == auc.beneficiary):
            return _auction_leave(state, rt, ev, gas_after_revert(gas), REVERT)
        auc.ended = not auc.ended
        return _auction_leave(state, rt, ev, gas - 1, UNIT)
    if not (gas >= 1 and not auc.ended and msg.sender == auc.beneficiary):
        return _auction_leave(state, rt, ev, gas_after_revert(gas), REVERT)
    auc.ended = True
    return _auction_leave(state, rt, ev, gas - 1, UNIT)
