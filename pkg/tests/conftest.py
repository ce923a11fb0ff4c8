import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from reentry import contracts  # noqa: E402
from reentry.adversary import AdversaryHandle, ChoiceTape, HavocPools  # noqa: E402
from reentry.contracts import Runtime, TokenVariant  # noqa: E402
from reentry.machine import Address, Msg, WorldState, address_pool  # noqa: E402

A, B, C = address_pool(3)

ACCEPTANCE_LINES: list[str] = []


def token_world(balances=None, minter=A, pools=None):
    """World with users from the pool and a token whose ghost total matches ``balances``."""
    pools = pools or HavocPools()
    state = WorldState.with_users(pools.addresses)
    state.token = contracts.token_new(Msg(minter, 0))
    for addr, amount in (balances or {}).items():
        state.token.balances[addr] = amount
        state.token.total_minted += amount
    return state


def runtime(variant=TokenVariant.GUARDED, tape=(), pools=None, listing_faithful_gas=False, **kw):
    rt = Runtime(variant=variant, **kw)
    AdversaryHandle(ChoiceTape(list(tape)), pools or HavocPools(), rt, listing_faithful_gas)
    return rt


@pytest.fixture
def world():
    return token_world({A: 10})


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
