import json

import pytest
from hypothesis import given, settings, strategies as st

import oracle
from conftest import A, B, runtime, token_world
from reentry import contracts
from reentry.adversary import (
    ChoiceTape,
    HavocPools,
    bare_external_call_runner,
    drive_tapes,
    enumerate_tapes,
    next_tape,
)
from reentry.contracts import TokenVariant
from reentry.machine import MAX_UINT256, address_pool


def call(state, tape, gas, variant=TokenVariant.OPEN, pools=None, **kw):
    rt = runtime(variant, tape, pools=pools, **kw)
    g, r = rt.adversary.external_call(state, gas)
    return g, r, rt


def test_tape_decodes_modulo_and_is_quiescent_past_the_end():
    tape = ChoiceTape([7, 5])
    assert tape.read(3) == 1
    assert tape.read(2) == 1
    assert tape.read(3, quiescent=2) == 2
    assert tape.arities == [3, 2, 3]


def test_tape_rejects_negative_entries_and_round_trips_json():
    with pytest.raises(ValueError):
        ChoiceTape([-1])
    assert ChoiceTape.from_json(ChoiceTape([3, 0, 9]).to_json()).steps == [3, 0, 9]
    for bad in ['{"a": 1}', "[1.5]", "[true]"]:
        with pytest.raises(ValueError):
            ChoiceTape.from_json(bad)


def test_no_reentry_consumes_one_unit(world):
    g, r, rt = call(world, [2, 0], 5)
    assert g == 4 and r.is_success
    assert [e.method for e in rt.monitor.events] == ["external_call"]


def test_empty_tape_is_quiescent(world):
    before = world.non_ghost()
    g, r, rt = call(world, [], 3)
    assert (g, r.is_success) == (2, True) and world.non_ghost() == before


def test_havoced_outcome_follows_tape(world):
    assert call(world, [2, 0, 1], 3)[1].is_revert


def test_two_sequential_reentrant_mints():
    state = token_world()
    # k=1 mint(A, amount idx 1, sender A), b=1, k=1 mint(...), b=0
    g, r, rt = call(state, [1, 0, 1, 0, 0, 1, 1, 0, 1, 0, 0, 0], 5)
    methods = [(e.depth, e.method, e.outcome) for e in rt.monitor.events]
    assert methods == [(0, "external_call", "success"), (1, "mint", "success"),
                       (1, "external_call", "success"), (2, "mint", "success")]
    assert state.token.balances == {A: 2} and state.token.total_minted == 2


def test_two_nested_transfers_keep_ginv_on_open_token():
    state = token_world({A: 10})
    pools = HavocPools(amounts=(1, 0, 2, MAX_UINT256))
    # transfer(A->B,1) whose own external call does transfer(A->B,1) again
    tape = [0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0]
    g, r, rt = call(state, tape, 5, pools=pools, check_revert_frame=True)
    shape = [(e.depth, e.method) for e in rt.monitor.events]
    assert shape[:4] == [(0, "external_call"), (1, "transfer"), (2, "external_call"), (3, "transfer")]
    assert state.token.balances == {A: 8, B: 2}
    assert contracts.ginv(state) is None


def test_gas_bound_one_allows_no_effect():
    pools = HavocPools(addresses=address_pool(2), amounts=(0, 1))
    for tape in enumerate_tapes(pools, 1):
        state = token_world({A: 1}, pools=pools)
        before = state.non_ghost()
        rt = runtime(TokenVariant.OPEN, tape.steps, pools=pools)
        rt.adversary.external_call(state, 1)
        assert state.non_ghost() == before
        assert all(e.outcome == "revert" for e in rt.monitor.events if e.method != "external_call")


def test_gas_bound_zero_is_rejected():
    with pytest.raises(ValueError):
        list(enumerate_tapes(HavocPools(), 0))


@pytest.mark.parametrize("gas", [1, 2, 3, 4])
def test_enumeration_count_matches_recursive_tree_size(gas):
    pools = HavocPools(addresses=address_pool(1), amounts=(0,))
    tapes = list(enumerate_tapes(pools, gas))
    cfg = oracle.Config("open", 1, [0])
    assert len(tapes) == oracle.count_external_call_tapes(cfg, oracle.empty_state(), gas)


@pytest.mark.parametrize("seed", [0, 1])
def test_enumeration_count_with_live_balances(seed):
    pools = HavocPools(addresses=address_pool(2), amounts=(0, 1))
    run = bare_external_call_runner(pools, 3, seed_balance=seed)
    tapes = list(enumerate_tapes(pools, 3, run))
    cfg = oracle.Config("open", 2, [0, 1])
    start = oracle.freeze({0: seed}, seed) if seed else oracle.empty_state()
    assert len(tapes) == oracle.count_external_call_tapes(cfg, start, 3)


def test_enumeration_is_lexicographic_and_canonical():
    pools = HavocPools(addresses=address_pool(1), amounts=(0,))
    tapes = [t.steps for t in enumerate_tapes(pools, 3)]
    assert tapes == sorted(tapes)
    assert len(set(map(tuple, tapes))) == len(tapes)
    # each tape is consumed exactly and every entry is below its arity
    run = bare_external_call_runner(pools, 3)
    for steps in tapes:
        tape = ChoiceTape(steps)
        run(tape)
        assert tape.reads == len(steps)
        assert all(s < a for s, a in zip(steps, tape.arities))


def test_prefix_restricts_to_a_subtree():
    pools = HavocPools(addresses=address_pool(1), amounts=(0,))
    everything = [t.steps for t in enumerate_tapes(pools, 3)]
    minted = [t.steps for t in enumerate_tapes(pools, 3, prefix=[1])]
    assert minted == [t for t in everything if t[0] == 1]


def test_next_tape_odometer():
    assert next_tape([0, 1], [3, 2]) == [1]
    assert next_tape([2, 1], [3, 2]) is None
    assert next_tape([1, 0], [3, 2], floor=1) == [1, 1]
    assert next_tape([1, 1], [3, 2], floor=1) is None


def test_replay_is_deterministic():
    pools = HavocPools()
    run = bare_external_call_runner(pools, 3, seed_balance=2)
    for tape, events in drive_tapes(run, prefix=[0]):
        again = run(ChoiceTape(tape.steps))
        assert [e.to_json() for e in again] == [e.to_json() for e in events]
        if tape.steps[:2] == [0, 1]:
            break


def test_listing_faithful_gas_resets_from_the_budget():
    state = token_world({A: 10})
    tape = [0, 0, 1, 0, 0, 0, 0, 0]
    strict = call(state.clone(), tape, 5)[0]
    faithful = call(state.clone(), tape, 5, listing_faithful_gas=True)
    assert faithful[0] == 4 and strict < 4


def test_pools_validation():
    with pytest.raises(ValueError):
        HavocPools(addresses=())
    with pytest.raises(ValueError):
        HavocPools(amounts=(1, 1))
    with pytest.raises(ValueError):
        HavocPools(values=(MAX_UINT256 + 1,))
    default = HavocPools()
    assert len(default.addresses) == 3 and default.amounts == (0, 1, 2, MAX_UINT256)
    assert default.values == (0,)


def test_adversary_only_reaches_registered_entry_points():
    state = token_world({A: 10})
    seen = []

    def spy_transfer(*args):
        seen.append("transfer")
        return contracts.transfer(*args)

    rt = runtime(TokenVariant.OPEN, [0, 0, 1, 0, 0, 0, 0, 0])
    rt.adversary.callbacks = {"transfer": spy_transfer, "mint": contracts.mint}
    rt.adversary.external_call(state, 3)
    assert seen and set(seen) == {"transfer"}


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 20), max_size=40), st.integers(0, 7),
       st.sampled_from([TokenVariant.OPEN, TokenVariant.OPEN_BUGGY]), st.booleans())
def test_gas_contract_and_termination_on_random_tapes(steps, gas, variant, faithful):
    state = token_world({A: 2, B: 1})
    rt = runtime(variant, steps, listing_faithful_gas=faithful)
    g, _ = rt.adversary.external_call(state, gas)
    assert g == 0 or g <= gas - 1
    assert rt.monitor.max_depth <= gas
    for ev in rt.monitor.events:
        assert ev.gas_out == 0 or ev.gas_out <= ev.gas_in - 1
    assert json.loads(json.dumps([e.to_json() for e in rt.monitor.events]))
