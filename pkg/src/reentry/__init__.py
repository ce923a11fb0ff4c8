"""Executable abstract EVM semantics with an adversarial environment for external calls.

The package models accounts, messages, gas and reverts (:mod:`reentry.machine`),
a token and an auction contract (:mod:`reentry.contracts`), an environment that
may re-enter contracts during external calls (:mod:`reentry.adversary`) and a
bounded explorer that checks invariants over every schedule
(:mod:`reentry.explorer`).
"""

from .adversary import AdversaryHandle, ChoiceTape, HavocPools, enumerate_tapes
from .contracts import TokenVariant
from .explorer import Call, Holds, Scenario, Violated, explore, minimize, replay
from .machine import MAX_UINT256, Address, CheckPoint, HarnessError, InvariantViolation

__all__ = [
    "MAX_UINT256",
    "Address",
    "AdversaryHandle",
    "Call",
    "CheckPoint",
    "ChoiceTape",
    "HarnessError",
    "HavocPools",
    "Holds",
    "InvariantViolation",
    "Scenario",
    "TokenVariant",
    "Violated",
    "enumerate_tapes",
    "explore",
    "minimize",
    "replay",
]

__version__ = "0.1.0"
