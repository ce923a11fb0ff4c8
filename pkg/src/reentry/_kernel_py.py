"""Exhaustive token search over compact states, pure-Python implementation.

The search computes, for every reachable ``(state, gas)`` pair, a *summary* of
what an external call (or a token method) can do from there: the distinct
``(state', gas', outcome)`` results, how many complete tapes lead to each, the
lexicographically least tape prefix for each, and the first violation in tape
order. Summaries are memoised, so identical sub-searches run once while tape
counts stay exact.

A state is a tuple ``(bal_0, ..., bal_{n-1}, total_minted, native)`` where a
balance is ``None`` when the address is absent from the balances map.

Witness tapes are kept as nested tuples and flattened only when reported.
:mod:`reentry._kernel_c` implements the same interface in Cython.
"""

MAX_UINT256 = 2**256 - 1

# variant codes
CLOSED, GUARDED, OPEN, OPEN_BUGGY = 0, 1, 2, 3
# method codes for top-level calls
M_TRANSFER, M_MINT = 0, 1
# check point codes
CP_EXT, CP_EXIT, CP_TX = 0, 1, 2

OK, REV = 0, 1


def flatten(witness):
    out = []
    stack = [witness]
    while stack:
        w = stack.pop()
        if type(w) is tuple:
            stack.extend(reversed(w))
        else:
            out.append(w)
    return out


def _after(g):
    return g - 1 if g >= 1 else 0


class Summary:
    __slots__ = ("outs", "viol", "height")

    def __init__(self):
        # key (state, gas, outcome) -> [state, gas, outcome, count, witness]
        self.outs = {}
        self.viol = None
        self.height = 0

    def add(self, state, gas, r, count, witness):
        key = (state, gas, r)
        cur = self.outs.get(key)
        if cur is None:
            self.outs[key] = [state, gas, r, count, witness]
        else:
            cur[3] += count


class TokenSearch:
    """Memoised exhaustive search for one token configuration.

    ``calls`` is the ordered list of top-level calls, each a tuple
    ``(method, a, b, amount, sender, value, gas)`` where for transfers ``a``/``b``
    are from/to address indices and for mints ``a`` is the recipient (``b``
    unused). ``amounts``/``values`` are the havoc pools; ``n`` the number of
    addresses; ``minter`` an address index.
    """

    def __init__(self, variant, n, amounts, values, minter, calls, checks,
                 require_zero_value=True, faithful_gas=False, memo=True):
        self.variant = variant
        self.n = n
        self.amounts = tuple(amounts)
        self.values = tuple(values)
        self.minter = minter
        self.calls = list(calls)
        self.check_ext = CP_EXT in checks
        self.check_exit = CP_EXIT in checks
        self.check_tx = CP_TX in checks
        self.rzv = require_zero_value
        self.faithful = faithful_gas
        self.memo = memo
        self._ext = {}
        self._tr = {}
        self._seq = {}

    # -- invariant -----------------------------------------------------

    def ginv_detail(self, state):
        n = self.n
        total = 0
        for i in range(n):
            b = state[i]
            if b is not None:
                total += b
        if total != state[n]:
            return "sum_balances=%d total_minted=%d" % (total, state[n])
        return None

    def _exit(self, state, gas, r):
        s = Summary()
        if self.check_exit:
            d = self.ginv_detail(state)
            if d is not None:
                s.viol = ((), CP_EXIT, d)
                return s
        s.add(state, gas, r, 1, ())
        return s

    # -- token methods ---------------------------------------------------

    def transfer_guard(self, state, f, t, amount, sender, value, gas):
        bf = state[f]
        bt = state[t]
        return (bf is not None and bf >= amount and sender == f and gas >= 1
                and (bt is None or bt + amount <= MAX_UINT256)
                and (value == 0 or not self.rzv))

    def mint_guard(self, state, t, amount, sender, gas):
        bt = state[t]
        return sender == self.minter and gas >= 1 and (bt is None or bt + amount <= MAX_UINT256)

    def transfer(self, state, f, t, amount, sender, value, gas):
        key = (state, f, t, amount, sender, value, gas)
        if self.memo:
            hit = self._tr.get(key)
            if hit is not None:
                return hit
        res = self._transfer(state, f, t, amount, sender, value, gas)
        if self.memo:
            self._tr[key] = res
        return res

    def _transfer(self, state, f, t, amount, sender, value, gas):
        if not self.transfer_guard(state, f, t, amount, sender, value, gas):
            return self._exit(state, _after(gas), REV)
        n = self.n
        native = state[n + 1]
        if value and not self.rzv:
            native += value
            if native > MAX_UINT256:
                return self._exit(state, gas - 1, REV)
        new_from = state[f] - amount
        variant = self.variant
        if variant != OPEN_BUGGY:
            bal = list(state[:n])
            bal[f] = new_from
            bal[t] = (bal[t] or 0) + amount
            s1 = tuple(bal) + (state[n], native)
            if variant != OPEN:
                return self._exit(s1, gas - 1, OK)
            ext = self.ext(s1, gas - 1)
            res = Summary()
            res.height = 1 + ext.height
            for s2, g1, _r, c, w in ext.outs.values():
                if self.check_exit:
                    d = self.ginv_detail(s2)
                    if d is not None:
                        res.viol = (w, CP_EXIT, d)
                        return res
                res.add(s2, _after(g1), OK, c, w)
            res.viol = ext.viol
            return res

        # open-buggy: external call first, stale debit afterwards
        s1 = state[:n + 1] + (native,)
        ext = self.ext(s1, gas - 1)
        res = Summary()
        res.height = 1 + ext.height
        for s2, g1, _r, c, w in ext.outs.values():
            bal = list(s2[:n])
            bal[f] = new_from
            credited = (bal[t] or 0) + amount
            if credited > MAX_UINT256:
                s3, r = state, REV
            else:
                bal[t] = credited
                s3, r = tuple(bal) + s2[n:], OK
            if self.check_exit:
                d = self.ginv_detail(s3)
                if d is not None:
                    res.viol = (w, CP_EXIT, d)
                    return res
            res.add(s3, _after(g1), r, c, w)
        res.viol = ext.viol
        return res

    def mint(self, state, t, amount, sender, value, gas):
        if not self.mint_guard(state, t, amount, sender, gas):
            return self._exit(state, _after(gas), REV)
        n = self.n
        bal = list(state[:n])
        bal[t] = (bal[t] or 0) + amount
        return self._exit(tuple(bal) + (state[n] + amount, state[n + 1]), gas - 1, OK)

    # -- adversary -------------------------------------------------------

    def ext(self, state, gas):
        if self.check_ext:
            d = self.ginv_detail(state)
            if d is not None:
                s = Summary()
                s.viol = ((), CP_EXT, d)
                return s
        key = (state, gas)
        if self.memo:
            hit = self._ext.get(key)
            if hit is not None:
                return hit
        res = self._ext_call(state, gas)
        if self.memo:
            self._ext[key] = res
        return res

    def _ext_call(self, state, gas):
        acc = Summary()
        n = self.n
        amounts, values = self.amounts, self.values
        na, nv = len(amounts), len(values)
        if gas >= 1:
            for f in range(n):
                for t in range(n):
                    for ai in range(na):
                        for s in range(n):
                            for vi in range(nv):
                                sub = self.transfer(state, f, t, amounts[ai], s, values[vi], gas - 1)
                                if self._then(acc, (0, f, t, ai, s, vi), sub, gas, True):
                                    return acc
            for t in range(n):
                for ai in range(na):
                    for s in range(n):
                        for vi in range(nv):
                            sub = self.mint(state, t, amounts[ai], s, values[vi], gas - 1)
                            if self._then(acc, (1, t, ai, s, vi), sub, gas, True):
                                return acc
            quiet = (2,)
        else:
            quiet = None
        unit = Summary()
        unit.add(state, gas, OK, 1, ())
        if quiet is None:
            # no gas: k is read but selects nothing
            for k in (0, 1, 2):
                if self._then(acc, (k,), unit, gas, False):
                    return acc
        elif self._then(acc, quiet, unit, gas, False):
            return acc
        return acc

    def _then(self, acc, prefix, sub, gas, is_call):
        """Continue each result of a re-entrant choice with the ``b`` decision.

        Returns True once a violation has been recorded.
        """
        if is_call and sub.height + 1 > acc.height:
            acc.height = sub.height + 1
        fallback = _after(gas)
        faithful = self.faithful
        for s1, g1, _r, c1, w1 in sub.outs.values():
            gf = fallback if faithful else min(g1, fallback)
            acc.add(s1, gf, OK, 2 * c1, (prefix, w1, 0, 0))
            if g1 >= 1:
                rec = self.ext(s1, g1 - 1)
                if rec.height + 1 > acc.height:
                    acc.height = rec.height + 1
                for s2, g2, _r2, c2, w2 in rec.outs.values():
                    acc.add(s2, g2, OK, c1 * c2, (prefix, w1, 1, w2))
                if rec.viol is not None:
                    acc.viol = ((prefix, w1, 1, rec.viol[0]), rec.viol[1], rec.viol[2])
                    return True
            else:
                acc.add(s1, gf, OK, 2 * c1, (prefix, w1, 1, 0))
        if sub.viol is not None:
            acc.viol = ((prefix, sub.viol[0]), sub.viol[1], sub.viol[2])
            return True
        return False

    # -- transactions ------------------------------------------------------

    def closed_ok(self, state, call):
        method, a, b, amount, sender, value, gas = call
        if method == M_TRANSFER:
            return value == 0 and self.transfer_guard(state, a, b, amount, sender, value, gas)
        return self.mint_guard(state, a, amount, sender, gas)

    def top(self, state, call):
        method, a, b, amount, sender, value, gas = call
        if method == M_TRANSFER:
            return self.transfer(state, a, b, amount, sender, value, gas)
        return self.mint(state, a, amount, sender, value, gas)

    def search(self, state, depth, roots=None):
        """Explore every schedule of ``depth`` top-level calls from ``state``.

        Returns ``(count, height, violation)``; a violation is
        ``(call_indices, witnesses, check_point, detail)``. ``roots`` restricts
        the first call to the given indices (used to split work).
        """
        if depth == 0:
            return 1, -1, None
        key = (state, depth)
        if roots is None and self.memo:
            hit = self._seq.get(key)
            if hit is not None:
                return hit
        total = 0
        height = -1
        closed = self.variant == CLOSED
        indices = range(len(self.calls)) if roots is None else roots
        for ci in indices:
            call = self.calls[ci]
            if closed and not self.closed_ok(state, call):
                continue
            sub = self.top(state, call)
            if sub.height > height:
                height = sub.height
            for s1, _g, r, c, w in sub.outs.values():
                if r == REV:
                    s1 = state
                if self.check_tx:
                    d = self.ginv_detail(s1)
                    if d is not None:
                        return total, height, ([ci], [w], CP_TX, d)
                cnt, h, v = self.search(s1, depth - 1)
                total += c * cnt
                if h > height:
                    height = h
                if v is not None:
                    return total, height, ([ci] + v[0], [w] + v[1], v[2], v[3])
            if sub.viol is not None:
                w, cp, d = sub.viol
                return total, height, ([ci], [w], cp, d)
        res = (total, height, None)
        if roots is None and self.memo:
            self._seq[key] = res
        return res

    def stats(self):
        return {"ext": len(self._ext), "transfer": len(self._tr), "seq": len(self._seq)}
