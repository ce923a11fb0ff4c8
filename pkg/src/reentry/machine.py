"""Abstract EVM substrate: addresses, messages, gas, outcomes and revertible state.

Everything a contract can observe or change lives in a :class:`WorldState`.
Reverts are implemented with :func:`snapshot` / :func:`restore`, which cover
the whole non-ghost part of the state. Observation records (ghost history
sequences) are never rolled back.
"""

from __future__ import annotations

import copy
import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Generic, Optional, TypeVar

MAX_UINT256 = 2**256 - 1

T = TypeVar("T")


class HarnessError(Exception):
    """A bug in the harness or its configuration, never a contract behaviour."""


# -- identities ------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Address:
    id: int

    @property
    def name(self) -> str:
        return address_name(self.id)

    def __repr__(self) -> str:
        return self.name


def address_name(i: int) -> str:
    # A..Z, then A1, B1, ...
    letter = chr(ord("A") + i % 26)
    return letter if i < 26 else f"{letter}{i // 26}"


def parse_address(text: str) -> Address:
    text = text.strip()
    if text.isdigit():
        return Address(int(text))
    if not text or not text[0].isalpha() or not text[0].isupper():
        raise ValueError(f"bad address {text!r}")
    suffix = text[1:]
    if suffix and not suffix.isdigit():
        raise ValueError(f"bad address {text!r}")
    return Address(ord(text[0]) - ord("A") + 26 * int(suffix or 0))


def address_pool(n: int) -> tuple[Address, ...]:
    return tuple(Address(i) for i in range(n))


class AccountKind(enum.Enum):
    USER = "user"
    CONTRACT = "contract"


@dataclass
class Account:
    kind: AccountKind
    native_balance: int = 0


@dataclass(frozen=True)
class Msg:
    sender: Address
    value: int = 0


# -- outcomes and arithmetic ----------------------------------------------


@dataclass(frozen=True)
class Outcome(Generic[T]):
    """``Revert`` or ``Success(value)``; a revert never carries a value."""

    ok: bool
    value: Optional[T] = None

    @property
    def is_revert(self) -> bool:
        return not self.ok

    @property
    def is_success(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        if not self.ok:
            return "Revert"
        return "Success()" if self.value is None else f"Success({self.value!r})"


REVERT: Outcome[Any] = Outcome(False)
UNIT = Outcome(True)


def Success(value: T = None) -> Outcome[T]:  # noqa: N802 - mirrors the Revert constant
    return Outcome(True, value)


def in_range(x: int) -> bool:
    return 0 <= x <= MAX_UINT256


def checked_add(a: int, b: int) -> Outcome[int]:
    s = a + b
    return Success(s) if s <= MAX_UINT256 else REVERT


def checked_sub(a: int, b: int) -> Outcome[int]:
    d = a - b
    return Success(d) if d >= 0 else REVERT


def charge_entry(gas: int) -> Outcome[int]:
    """Take the one unit of gas every method entry costs."""
    if gas < 0:
        raise HarnessError(f"negative gas {gas}")
    return Success(gas - 1) if gas >= 1 else REVERT


def gas_after_revert(gas: int) -> int:
    return gas - 1 if gas >= 1 else 0


def gas_ok(gas_in: int, gas_out: int) -> bool:
    """The gas contract every call must satisfy on return."""
    return gas_out == 0 or gas_out <= gas_in - 1


# -- world state -----------------------------------------------------------


@dataclass
class WorldState:
    """The mutable universe: accounts, contract storage and ghost history.

    ``token`` and ``auction`` hold contract storage objects (see
    :mod:`reentry.contracts`). Storage objects list the names of their ghost
    fields in a ``GHOST_FIELDS`` class attribute; those fields, together with
    ``ghost_history``, are excluded from snapshots.
    """

    accounts: dict[Address, Account] = field(default_factory=dict)
    token: Any = None
    auction: Any = None
    ghost_history: list[tuple] = field(default_factory=list)
    _live: list[int] = field(default_factory=list, repr=False, compare=False)

    @classmethod
    def with_users(cls, addresses, native_balance: int = 0) -> "WorldState":
        return cls(accounts={a: Account(AccountKind.USER, native_balance) for a in addresses})

    def observe(self, record: tuple) -> None:
        self.ghost_history.append(record)

    def non_ghost(self) -> dict[str, Any]:
        """Copy of everything a revert restores."""
        out: dict[str, Any] = {"accounts": _copy_accounts(self.accounts)}
        for name in ("token", "auction"):
            storage = getattr(self, name)
            out[name] = None if storage is None else _strip_ghosts(storage)
        return out

    def clone(self) -> "WorldState":
        """Independent copy with no live snapshots."""
        return WorldState(
            accounts=_copy_accounts(self.accounts),
            token=_copy_storage(self.token),
            auction=_copy_storage(self.auction),
            ghost_history=list(self.ghost_history),
        )


def _copy_accounts(accounts: dict[Address, Account]) -> dict[Address, Account]:
    return {a: Account(acc.kind, acc.native_balance) for a, acc in accounts.items()}


def _copy_field(v: Any) -> Any:
    # storage fields hold immutable scalars or flat containers of them
    if isinstance(v, (dict, list)):
        return v.copy()
    return v


def _copy_storage(storage: Any) -> Any:
    if storage is None:
        return None
    dup = copy.copy(storage)
    for k, v in vars(storage).items():
        if isinstance(v, (dict, list)):
            object.__setattr__(dup, k, v.copy())
    return dup


def _strip_ghosts(storage: Any) -> dict[str, Any]:
    ghosts = getattr(storage, "GHOST_FIELDS", ())
    return {k: _copy_field(v) for k, v in vars(storage).items() if k not in ghosts}


_snapshot_ids = itertools.count(1)


@dataclass(frozen=True)
class Snapshot:
    id: int
    owner: int
    data: dict[str, Any] = field(repr=False, compare=False)


def snapshot(state: WorldState) -> Snapshot:
    snap = Snapshot(next(_snapshot_ids), id(state), state.non_ghost())
    state._live.append(snap.id)
    return snap


def restore(state: WorldState, snap: Snapshot) -> WorldState:
    """Roll non-ghost state back to ``snap``; later snapshots become stale."""
    if snap.owner != id(state):
        raise HarnessError("snapshot belongs to a different world state")
    try:
        pos = state._live.index(snap.id)
    except ValueError:
        raise HarnessError(f"stale snapshot #{snap.id}") from None
    del state._live[pos + 1 :]
    data = snap.data
    state.accounts = _copy_accounts(data["accounts"])
    for name in ("token", "auction"):
        saved = data[name]
        if saved is None:
            setattr(state, name, None)
            continue
        storage = getattr(state, name)
        for k, v in saved.items():
            setattr(storage, k, _copy_field(v))
    return state


def release(state: WorldState, snap: Snapshot) -> None:
    """Drop a snapshot that will not be restored (the call committed)."""
    try:
        pos = state._live.index(snap.id)
    except ValueError:
        raise HarnessError(f"stale snapshot #{snap.id}") from None
    del state._live[pos:]


# -- tracing and check points ----------------------------------------------


class CheckPoint(str, enum.Enum):
    EXTERNAL_CALL_SITE = "external-call-site"
    METHOD_EXIT = "method-exit"
    TX_END = "tx-end"


ALL_CHECK_POINTS = frozenset(CheckPoint)


class InvariantViolation(Exception):
    def __init__(self, invariant: str, point: CheckPoint, detail: str = ""):
        super().__init__(f"{invariant} violated at {point.value}: {detail}")
        self.invariant = invariant
        self.point = point
        self.detail = detail


@dataclass
class CallEvent:
    depth: int
    method: str
    args: dict[str, str]
    gas_in: int
    gas_out: Optional[int] = None
    outcome: Optional[str] = None

    def to_json(self) -> dict[str, Any]:
        return {
            "depth": self.depth,
            "method": self.method,
            "args": dict(self.args),
            "gas_in": self.gas_in,
            "gas_out": self.gas_out,
            "outcome": self.outcome,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "CallEvent":
        return cls(d["depth"], d["method"], dict(d["args"]), d["gas_in"], d["gas_out"], d["outcome"])


class Monitor:
    """Records the call tree and evaluates invariants at enabled check points.

    ``check`` maps a world state to ``None`` (fine) or ``(invariant, detail)``.
    """

    def __init__(self, check=None, points=ALL_CHECK_POINTS, step_budget: Optional[int] = None):
        self.check = check
        self.points = frozenset(CheckPoint(p) for p in points)
        self.step_budget = step_budget
        self.events: list[CallEvent] = []
        self.depth = 0
        self.max_depth = 0
        self.steps = 0

    def enter(self, method: str, args: dict[str, str], gas: int) -> CallEvent:
        self.steps += 1
        if self.step_budget is not None and self.steps > self.step_budget:
            raise HarnessError(f"step budget {self.step_budget} exceeded")
        ev = CallEvent(self.depth, method, args, gas)
        self.events.append(ev)
        self.max_depth = max(self.max_depth, self.depth)
        self.depth += 1
        return ev

    def leave(self, ev: CallEvent, gas_out: int, outcome: Outcome) -> tuple[int, Outcome]:
        self.depth -= 1
        ev.gas_out = gas_out
        ev.outcome = "success" if outcome.ok else "revert"
        if not gas_ok(ev.gas_in, gas_out):
            raise HarnessError(f"{ev.method}: gas {ev.gas_in} -> {gas_out} breaks the gas contract")
        return gas_out, outcome

    def checkpoint(self, point: CheckPoint, state: WorldState) -> None:
        if self.check is None or point not in self.points:
            return
        failure = self.check(state)
        if failure is not None:
            invariant, detail = failure
            raise InvariantViolation(invariant, point, detail)
