"""Compare the compiled and pure-Python search kernels on the same searches.

    python3 benchmarks/bench_kernel.py [--repeat N]

Both backends must agree on counts, heights and violations; the script
exits non-zero if they do not.
"""

import argparse
import statistics
import sys
import time

from reentry import _kernel_py
from reentry.explorer import KernelSearch, Scenario, initial_world, parse_call
from reentry.machine import Address
from reentry.contracts import TokenVariant

try:
    from reentry import _kernel_c
except ImportError:
    _kernel_c = None

CASES = {
    "open gas 6, 1 tx from mint(A,10)": Scenario(
        variant=TokenVariant.OPEN, gas_bound=6, max_txs=1,
        tx_prefix=(parse_call("mint:A:10", Address(0)),)),
    "open gas 6, 2 txs": Scenario(variant=TokenVariant.OPEN, gas_bound=6, max_txs=2),
    "guarded gas 4, 3 txs": Scenario(variant=TokenVariant.GUARDED, gas_bound=4, max_txs=3),
    "open-buggy gas 6, first violation": Scenario(
        variant=TokenVariant.OPEN_BUGGY, gas_bound=6, max_txs=1,
        tx_prefix=(parse_call("mint:A:10", Address(0)),)),
}


def run(module, scenario):
    search = KernelSearch(scenario, backend=module)
    t0 = time.perf_counter()
    result = search.search(initial_world(scenario), scenario.max_txs)
    return time.perf_counter() - t0, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = [("python", _kernel_py)] + ([("cython", _kernel_c)] if _kernel_c else [])
    if _kernel_c is None:
        print("compiled kernel not built; timing the pure-Python kernel only")
    ok = True
    print(f"{'case':40} " + " ".join(f"{name:>12}" for name, _ in backends) + "   speedup")
    for label, scenario in CASES.items():
        times, results = [], []
        for _, module in backends:
            samples = []
            for _ in range(args.repeat):
                dt, res = run(module, scenario)
                samples.append(dt)
            times.append(statistics.median(samples))
            results.append(res)
        if any(r != results[0] for r in results):
            ok = False
            print(f"MISMATCH in {label}: {results}")
        speed = f"{times[0] / times[1]:8.2f}x" if len(times) == 2 else ""
        print(f"{label:40} " + " ".join(f"{t:11.3f}s" for t in times) + f"  {speed}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
