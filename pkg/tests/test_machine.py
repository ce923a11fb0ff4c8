import pytest
from hypothesis import given, strategies as st

from conftest import A, B, C, token_world
from reentry.machine import (
    MAX_UINT256,
    REVERT,
    Account,
    AccountKind,
    Address,
    CallEvent,
    CheckPoint,
    HarnessError,
    InvariantViolation,
    Monitor,
    Success,
    WorldState,
    address_name,
    charge_entry,
    checked_add,
    checked_sub,
    gas_after_revert,
    gas_ok,
    parse_address,
    release,
    restore,
    snapshot,
)


@pytest.mark.parametrize("gas,expected", [(5, Success(4)), (1, Success(0)), (0, REVERT)])
def test_charge_entry(gas, expected):
    assert charge_entry(gas) == expected


def test_charge_entry_rejects_negative_gas():
    with pytest.raises(HarnessError):
        charge_entry(-1)


def test_gas_after_revert_matches_guard_arm():
    assert [gas_after_revert(g) for g in range(4)] == [0, 0, 1, 2]


def test_checked_arithmetic_boundaries():
    assert checked_add(MAX_UINT256, 1).is_revert
    assert checked_sub(3, 5).is_revert
    assert checked_add(2, 3) == Success(5)
    assert checked_add(MAX_UINT256, 0) == Success(MAX_UINT256)
    assert checked_sub(5, 5) == Success(0)


@given(st.integers(0, MAX_UINT256), st.integers(0, MAX_UINT256))
def test_checked_add_is_exact_or_fails(a, b):
    r = checked_add(a, b)
    assert r.is_success == (a + b <= MAX_UINT256)
    if r.is_success:
        assert r.value == a + b


def test_revert_carries_no_value():
    assert REVERT.value is None
    assert repr(REVERT) == "Revert"
    assert repr(Success(3)) == "Success(3)"


def test_gas_contract_predicate():
    assert gas_ok(5, 4) and gas_ok(5, 0) and gas_ok(0, 0)
    assert not gas_ok(5, 5) and not gas_ok(1, 1)


@pytest.mark.parametrize("i", [0, 1, 25, 26, 27, 80])
def test_address_names_round_trip(i):
    assert parse_address(address_name(i)) == Address(i)


def test_address_order_and_parse_errors():
    assert A < B < C
    assert parse_address("7") == Address(7)
    for bad in ["", "a", "AB", "A-1"]:
        with pytest.raises(ValueError):
            parse_address(bad)


def test_snapshot_then_restore_is_identity(world):
    before = world.non_ghost()
    snap = snapshot(world)
    restore(world, snap)
    assert world.non_ghost() == before


def test_restore_undoes_balance_mutation(world):
    snap = snapshot(world)
    world.token.balances[A] = 3
    world.token.balances[B] = 7
    world.accounts[A].native_balance = 99
    restore(world, snap)
    assert world.token.balances == {A: 10}
    assert world.accounts[A].native_balance == 0


def test_ghost_history_survives_restore(world):
    snap = snapshot(world)
    world.observe(("probe", A))
    restore(world, snap)
    assert world.ghost_history == [("probe", A)]


def test_nested_restore_outermost_wins(world):
    outer = snapshot(world)
    world.token.balances[A] = 5
    inner = snapshot(world)
    world.token.balances[A] = 1
    restore(world, inner)
    assert world.token.balances[A] == 5
    restore(world, outer)
    assert world.token.balances[A] == 10


def test_restoring_outer_makes_inner_stale(world):
    outer = snapshot(world)
    inner = snapshot(world)
    restore(world, outer)
    with pytest.raises(HarnessError):
        restore(world, inner)


def test_foreign_snapshot_is_a_harness_error(world):
    other = token_world({A: 1})
    with pytest.raises(HarnessError):
        restore(other, snapshot(world))


def test_released_snapshot_is_stale(world):
    snap = snapshot(world)
    release(world, snap)
    with pytest.raises(HarnessError):
        restore(world, snap)


def test_snapshot_data_is_not_aliased(world):
    snap = snapshot(world)
    world.token.balances[A] = 0
    restore(world, snap)
    world.token.balances[A] = 4
    snap2 = snapshot(world)
    assert snap.data["token"]["balances"] == {A: 10}
    assert snap2.data["token"]["balances"] == {A: 4}


mutation = st.one_of(
    st.tuples(st.just("bal"), st.sampled_from([A, B, C]), st.integers(0, MAX_UINT256)),
    st.tuples(st.just("del"), st.sampled_from([A, B, C]), st.just(0)),
    st.tuples(st.just("native"), st.sampled_from([A, B, C]), st.integers(0, 100)),
    st.tuples(st.just("total"), st.just(A), st.integers(0, 2**300)),
    st.tuples(st.just("ghost"), st.just(A), st.just(0)),
)


@given(st.lists(mutation, max_size=12))
def test_restore_round_trips_any_mutation_sequence(ops):
    state = token_world({A: 10, B: 2})
    before = state.non_ghost()
    ghosts = len(state.ghost_history)
    snap = snapshot(state)
    for kind, addr, v in ops:
        if kind == "bal":
            state.token.balances[addr] = v
        elif kind == "del":
            state.token.balances.pop(addr, None)
        elif kind == "native":
            state.accounts[addr].native_balance = v
        elif kind == "total":
            state.token.total_minted = v
        else:
            state.observe(("op", addr))
    restore(state, snap)
    assert state.non_ghost() == before
    assert len(state.ghost_history) == ghosts + sum(op[0] == "ghost" for op in ops)


def test_clone_is_independent(world):
    dup = world.clone()
    dup.token.balances[A] = 0
    dup.accounts[A].native_balance = 5
    dup.observe(("x",))
    assert world.token.balances[A] == 10
    assert world.accounts[A].native_balance == 0
    assert world.ghost_history == []


def test_with_users_creates_user_accounts():
    state = WorldState.with_users([A, B], native_balance=3)
    assert state.accounts == {A: Account(AccountKind.USER, 3), B: Account(AccountKind.USER, 3)}


def test_monitor_tracks_depth_and_enforces_gas_contract():
    mon = Monitor()
    outer = mon.enter("f", {}, 3)
    inner = mon.enter("g", {}, 2)
    mon.leave(inner, 1, Success())
    mon.leave(outer, 0, Success())
    assert mon.max_depth == 1 and mon.depth == 0 and mon.steps == 2
    bad = mon.enter("h", {}, 2)
    with pytest.raises(HarnessError):
        mon.leave(bad, 2, REVERT)


def test_monitor_step_budget():
    mon = Monitor(step_budget=2)
    mon.enter("a", {}, 5)
    mon.enter("b", {}, 4)
    with pytest.raises(HarnessError):
        mon.enter("c", {}, 3)


def test_monitor_checks_only_enabled_points(world):
    mon = Monitor(lambda s: ("Inv", "bad"), points={CheckPoint.TX_END})
    mon.checkpoint(CheckPoint.METHOD_EXIT, world)
    with pytest.raises(InvariantViolation) as exc:
        mon.checkpoint(CheckPoint.TX_END, world)
    assert exc.value.invariant == "Inv" and exc.value.point is CheckPoint.TX_END


def test_call_event_json_round_trip():
    ev = CallEvent(1, "transfer", {"amount": str(MAX_UINT256)}, 4, 3, "success")
    assert CallEvent.from_json(ev.to_json()) == ev
