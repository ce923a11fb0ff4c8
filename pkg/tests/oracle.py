"""Naive recursive reference interpreter for the token, written independently of the package.

Every function returns the full list of complete branches in tape order; no
memoisation, no shared state. A branch is either

    ("ok", tape, state, gas, reverted)    or    ("viol", tape, check_point, detail)

States are dicts frozen into sorted tuples of (address index, balance) plus
total_minted. Only intended for tiny configurations.
"""

MAX = 2**256 - 1

EXT, EXIT, TX = "external-call-site", "method-exit", "tx-end"


class Config:
    def __init__(self, variant, n, amounts, values=(0,), minter=0, checks=(EXT, EXIT, TX),
                 gas_bound=3, faithful=False):
        self.variant = variant
        self.n = n
        self.amounts = list(amounts)
        self.values = list(values)
        self.minter = minter
        self.checks = set(checks)
        self.gas_bound = gas_bound
        self.faithful = faithful


def freeze(bal, total):
    return (tuple(sorted(bal.items())), total)


def thaw(state):
    return dict(state[0]), state[1]


def broken(state):
    bal, total = thaw(state)
    s = sum(bal.values())
    if s != total:
        return "sum_balances=%d total_minted=%d" % (s, total)
    return None


def after(g):
    return g - 1 if g >= 1 else 0


def exit_check(cfg, state, tape, gas, reverted):
    if EXIT in cfg.checks and broken(state):
        return [("viol", tape, EXIT, broken(state))]
    return [("ok", tape, state, gas, reverted)]


def transfer(cfg, state, f, t, amount, sender, value, gas):
    bal, total = thaw(state)
    ok = (f in bal and bal[f] >= amount and sender == f and gas >= 1
          and (t not in bal or bal[t] + amount <= MAX) and value == 0)
    if not ok:
        return exit_check(cfg, state, [], after(gas), True)
    new_from = bal[f] - amount
    if cfg.variant in ("guarded", "closed"):
        bal[f] = new_from
        bal[t] = bal.get(t, 0) + amount
        return exit_check(cfg, freeze(bal, total), [], gas - 1, False)
    if cfg.variant == "open":
        bal[f] = new_from
        bal[t] = bal.get(t, 0) + amount
        out = []
        for br in external_call(cfg, freeze(bal, total), gas - 1):
            if br[0] == "viol":
                out.append(br)
                continue
            out += exit_check(cfg, br[2], br[1], after(br[3]), False)
        return out
    # open-buggy
    out = []
    for br in external_call(cfg, state, gas - 1):
        if br[0] == "viol":
            out.append(br)
            continue
        b2, t2 = thaw(br[2])
        b2[f] = new_from
        if b2.get(t, 0) + amount > MAX:
            out += exit_check(cfg, state, br[1], after(br[3]), True)
        else:
            b2[t] = b2.get(t, 0) + amount
            out += exit_check(cfg, freeze(b2, t2), br[1], after(br[3]), False)
    return out


def mint(cfg, state, t, amount, sender, value, gas):
    bal, total = thaw(state)
    if not (sender == cfg.minter and gas >= 1 and (t not in bal or bal[t] + amount <= MAX)):
        return exit_check(cfg, state, [], after(gas), True)
    bal[t] = bal.get(t, 0) + amount
    return exit_check(cfg, freeze(bal, total + amount), [], gas - 1, False)


def external_call(cfg, state, gas):
    if EXT in cfg.checks and broken(state):
        return [("viol", [], EXT, broken(state))]
    n, na, nv = cfg.n, len(cfg.amounts), len(cfg.values)
    out = []
    for k in range(3):
        if k == 0 and gas >= 1:
            options = []
            for f in range(n):
                for t in range(n):
                    for ai in range(na):
                        for s in range(n):
                            for vi in range(nv):
                                options.append(([0, f, t, ai, s, vi], transfer(
                                    cfg, state, f, t, cfg.amounts[ai], s, cfg.values[vi], gas - 1)))
        elif k == 1 and gas >= 1:
            options = []
            for t in range(n):
                for ai in range(na):
                    for s in range(n):
                        for vi in range(nv):
                            options.append(([1, t, ai, s, vi], mint(
                                cfg, state, t, cfg.amounts[ai], s, cfg.values[vi], gas - 1)))
        else:
            options = [([k], [("ok", [], state, gas, False)])]
        for head, branches in options:
            for br in branches:
                if br[0] == "viol":
                    out.append(("viol", head + br[1], br[2], br[3]))
                    continue
                _, tp, s1, g1, _r = br
                for b in (0, 1):
                    if b == 1 and g1 >= 1:
                        for rb in external_call(cfg, s1, g1 - 1):
                            if rb[0] == "viol":
                                out.append(("viol", head + tp + [1] + rb[1], rb[2], rb[3]))
                            else:
                                out.append(("ok", head + tp + [1] + rb[1], rb[2], rb[3], False))
                    else:
                        g = after(gas) if cfg.faithful else min(g1, after(gas))
                        for r in (0, 1):
                            out.append(("ok", head + tp + [b, r], s1, g, False))
    return out


def top_calls(cfg):
    calls = []
    for f in range(cfg.n):
        for t in range(cfg.n):
            for a in cfg.amounts:
                for s in range(cfg.n):
                    for v in cfg.values:
                        for g in range(1, cfg.gas_bound + 1):
                            calls.append(("transfer", f, t, a, s, v, g))
    for t in range(cfg.n):
        for a in cfg.amounts:
            for s in range(cfg.n):
                for v in cfg.values:
                    for g in range(1, cfg.gas_bound + 1):
                        calls.append(("mint", t, None, a, s, v, g))
    return calls


def closed_allowed(cfg, state, call):
    bal, _ = thaw(state)
    m, a, b, amount, s, v, g = call
    if m == "transfer":
        return (a in bal and bal[a] >= amount and s == a and g >= 1 and v == 0
                and (b not in bal or bal[b] + amount <= MAX))
    return s == cfg.minter and g >= 1 and (a not in bal or bal[a] + amount <= MAX)


def run_call(cfg, state, call):
    m, a, b, amount, s, v, g = call
    if m == "transfer":
        return transfer(cfg, state, a, b, amount, s, v, g)
    return mint(cfg, state, a, amount, s, v, g)


def explore(cfg, state, depth):
    """Return ``("holds", count)`` or ``("violated", calls, tapes, check_point, detail)``."""
    calls = top_calls(cfg)

    def go(state, depth):
        if depth == 0:
            return 1, None
        total = 0
        for call in calls:
            if cfg.variant == "closed" and not closed_allowed(cfg, state, call):
                continue
            for br in run_call(cfg, state, call):
                if br[0] == "viol":
                    return total, ([call], [br[1]], br[2], br[3])
                _, tape, s1, _g, reverted = br
                if reverted:
                    s1 = state
                if TX in cfg.checks and broken(s1):
                    return total, ([call], [tape], TX, broken(s1))
                cnt, v = go(s1, depth - 1)
                total += cnt
                if v is not None:
                    return total, ([call] + v[0], [tape] + v[1], v[2], v[3])
        return total, None

    count, v = go(state, depth)
    if v is None:
        return ("holds", count)
    return ("violated",) + v


def empty_state():
    return freeze({}, 0)


def count_external_call_tapes(cfg, state, gas):
    """Size of the tape tree of one external call."""
    return len(external_call(cfg, state, gas))
