import os
import subprocess
import sys

import pytest

from reentry import _kernel_py, kernel
from reentry.contracts import TokenVariant
from reentry.explorer import KernelSearch, Scenario, initial_world, parse_call
from reentry.machine import Address

try:
    from reentry import _kernel_c
except ImportError:  # pragma: no cover - depends on the build
    _kernel_c = None

needs_c = pytest.mark.skipif(_kernel_c is None, reason="compiled kernel not built")

MINT_A_10 = (parse_call("mint:A:10", Address(0)),)

CASES = [
    Scenario(variant=TokenVariant.OPEN, gas_bound=5, tx_prefix=MINT_A_10),
    Scenario(variant=TokenVariant.OPEN, gas_bound=4, max_txs=2, listing_faithful_gas=True),
    Scenario(variant=TokenVariant.GUARDED, gas_bound=3, max_txs=2),
    Scenario(variant=TokenVariant.CLOSED, gas_bound=2, max_txs=3),
    Scenario(variant=TokenVariant.OPEN_BUGGY, gas_bound=6, tx_prefix=MINT_A_10),
    Scenario(variant=TokenVariant.OPEN, gas_bound=4, require_zero_value=False),
]


def search(module, sc):
    return KernelSearch(sc, backend=module).search(initial_world(sc), sc.max_txs)


def test_flatten_preserves_order():
    assert _kernel_py.flatten(((1, (2,)), (), 3, ((4, 5),))) == [1, 2, 3, 4, 5]


@needs_c
@pytest.mark.parametrize("sc", CASES, ids=lambda s: f"{s.variant.value}-g{s.gas_bound}-t{s.max_txs}")
def test_backends_agree(sc):
    assert search(_kernel_c, sc) == search(_kernel_py, sc)


@needs_c
def test_backends_agree_on_partial_search():
    sc = CASES[1]
    roots = list(range(0, 200, 7))
    a = KernelSearch(sc, backend=_kernel_c).search(initial_world(sc), 2, roots)
    b = KernelSearch(sc, backend=_kernel_py).search(initial_world(sc), 2, roots)
    assert a == b


def test_memo_off_gives_same_counts():
    sc = Scenario(variant=TokenVariant.OPEN, gas_bound=4, tx_prefix=MINT_A_10)
    ks = KernelSearch(sc, backend=_kernel_py)
    plain = _kernel_py.TokenSearch(ks.impl.variant, ks.impl.n, ks.impl.amounts, ks.impl.values,
                                   ks.impl.minter, ks.impl.calls, {0, 1, 2}, memo=False)
    assert plain.search(ks.encode_state(initial_world(sc)), 1) == ks.search(initial_world(sc), 1)


def test_pure_python_fallback_is_selectable():
    env = dict(os.environ, REENTRY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import reentry.kernel as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name():
    assert kernel.BACKEND in ("python", "cython")
