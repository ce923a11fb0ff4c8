# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of :mod:`reentry._kernel_py`; same interface, same results.

Balances stay Python integers (they are 256-bit); loop indices, gas and
counters of choices are C integers.
"""

MAX_UINT256 = 2**256 - 1

CLOSED, GUARDED, OPEN, OPEN_BUGGY = 0, 1, 2, 3
M_TRANSFER, M_MINT = 0, 1
CP_EXT, CP_EXIT, CP_TX = 0, 1, 2

cdef enum:
    OK = 0
    REV = 1

cdef object _MAX = MAX_UINT256


cdef inline int _after(int g):
    return g - 1 if g >= 1 else 0


cdef class Summary:
    cdef public dict outs
    cdef public object viol
    cdef public int height

    def __init__(self):
        self.outs = {}
        self.viol = None
        self.height = 0

    cdef void add(self, tuple state, int gas, int r, object count, object witness):
        key = (state, gas, r)
        cur = self.outs.get(key)
        if cur is None:
            self.outs[key] = [state, gas, r, count, witness]
        else:
            (<list>cur)[3] += count


cdef class TokenSearch:
    cdef int variant, n, minter
    cdef tuple amounts, values
    cdef list calls
    cdef bint check_ext, check_exit, check_tx, rzv, faithful, memo
    cdef dict _ext, _tr, _seq

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

    cpdef object ginv_detail(self, tuple state):
        cdef int i
        total = 0
        for i in range(self.n):
            b = state[i]
            if b is not None:
                total += b
        if total != state[self.n]:
            return "sum_balances=%d total_minted=%d" % (total, state[self.n])
        return None

    cdef Summary _exit(self, tuple state, int gas, int r):
        cdef Summary s = Summary()
        if self.check_exit:
            d = self.ginv_detail(state)
            if d is not None:
                s.viol = ((), CP_EXIT, d)
                return s
        s.add(state, gas, r, 1, ())
        return s

    cpdef bint transfer_guard(self, tuple state, int f, int t, object amount, int sender,
                              object value, int gas):
        bf = state[f]
        bt = state[t]
        return (bf is not None and bf >= amount and sender == f and gas >= 1
                and (bt is None or bt + amount <= _MAX)
                and (value == 0 or not self.rzv))

    cpdef bint mint_guard(self, tuple state, int t, object amount, int sender, int gas):
        bt = state[t]
        return sender == self.minter and gas >= 1 and (bt is None or bt + amount <= _MAX)

    cpdef Summary transfer(self, tuple state, int f, int t, object amount, int sender,
                           object value, int gas):
        cdef Summary res
        key = (state, f, t, amount, sender, value, gas)
        if self.memo:
            hit = self._tr.get(key)
            if hit is not None:
                return <Summary>hit
        res = self._transfer(state, f, t, amount, sender, value, gas)
        if self.memo:
            self._tr[key] = res
        return res

    cdef Summary _transfer(self, tuple state, int f, int t, object amount, int sender,
                           object value, int gas):
        cdef int n = self.n
        cdef Summary ext, res
        cdef list bal, entry
        cdef tuple s1, s2, s3
        cdef int g1, r
        if not self.transfer_guard(state, f, t, amount, sender, value, gas):
            return self._exit(state, _after(gas), REV)
        native = state[n + 1]
        if value and not self.rzv:
            native += value
            if native > _MAX:
                return self._exit(state, gas - 1, REV)
        new_from = state[f] - amount
        if self.variant != OPEN_BUGGY:
            bal = list(state[:n])
            bal[f] = new_from
            bal[t] = (bal[t] or 0) + amount
            s1 = tuple(bal) + (state[n], native)
            if self.variant != OPEN:
                return self._exit(s1, gas - 1, OK)
            ext = self.ext(s1, gas - 1)
            res = Summary()
            res.height = 1 + ext.height
            for entry in ext.outs.values():
                s2 = entry[0]
                g1 = entry[1]
                if self.check_exit:
                    d = self.ginv_detail(s2)
                    if d is not None:
                        res.viol = (entry[4], CP_EXIT, d)
                        return res
                res.add(s2, _after(g1), OK, entry[3], entry[4])
            res.viol = ext.viol
            return res

        s1 = state[:n + 1] + (native,)
        ext = self.ext(s1, gas - 1)
        res = Summary()
        res.height = 1 + ext.height
        for entry in ext.outs.values():
            s2 = entry[0]
            g1 = entry[1]
            bal = list(s2[:n])
            bal[f] = new_from
            credited = (bal[t] or 0) + amount
            if credited > _MAX:
                s3 = state
                r = REV
            else:
                bal[t] = credited
                s3 = tuple(bal) + s2[n:]
                r = OK
            if self.check_exit:
                d = self.ginv_detail(s3)
                if d is not None:
                    res.viol = (entry[4], CP_EXIT, d)
                    return res
            res.add(s3, _after(g1), r, entry[3], entry[4])
        res.viol = ext.viol
        return res

    cpdef Summary mint(self, tuple state, int t, object amount, int sender, object value, int gas):
        cdef int n = self.n
        cdef list bal
        if not self.mint_guard(state, t, amount, sender, gas):
            return self._exit(state, _after(gas), REV)
        bal = list(state[:n])
        bal[t] = (bal[t] or 0) + amount
        return self._exit(tuple(bal) + (state[n] + amount, state[n + 1]), gas - 1, OK)

    cpdef Summary ext(self, tuple state, int gas):
        cdef Summary s, res
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
                return <Summary>hit
        res = self._ext_call(state, gas)
        if self.memo:
            self._ext[key] = res
        return res

    cdef Summary _ext_call(self, tuple state, int gas):
        cdef Summary acc = Summary()
        cdef Summary unit, sub
        cdef int n = self.n
        cdef tuple amounts = self.amounts, values = self.values
        cdef int na = len(amounts), nv = len(values)
        cdef int f, t, ai, s, vi, k
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
        unit = Summary()
        unit.add(state, gas, OK, 1, ())
        if gas < 1:
            for k in range(3):
                if self._then(acc, (k,), unit, gas, False):
                    return acc
        else:
            self._then(acc, (2,), unit, gas, False)
        return acc

    cdef bint _then(self, Summary acc, tuple prefix, Summary sub, int gas, bint is_call):
        cdef int fallback = _after(gas)
        cdef int g1, gf
        cdef Summary rec
        cdef list e1, e2
        if is_call and sub.height + 1 > acc.height:
            acc.height = sub.height + 1
        for e1 in sub.outs.values():
            s1 = e1[0]
            g1 = e1[1]
            c1 = e1[3]
            w1 = e1[4]
            gf = fallback if self.faithful else min(g1, fallback)
            acc.add(s1, gf, OK, 2 * c1, (prefix, w1, 0, 0))
            if g1 >= 1:
                rec = self.ext(s1, g1 - 1)
                if rec.height + 1 > acc.height:
                    acc.height = rec.height + 1
                for e2 in rec.outs.values():
                    acc.add(e2[0], e2[1], OK, c1 * e2[3], (prefix, w1, 1, e2[4]))
                if rec.viol is not None:
                    acc.viol = ((prefix, w1, 1, rec.viol[0]), rec.viol[1], rec.viol[2])
                    return True
            else:
                acc.add(s1, gf, OK, 2 * c1, (prefix, w1, 1, 0))
        if sub.viol is not None:
            acc.viol = ((prefix, sub.viol[0]), sub.viol[1], sub.viol[2])
            return True
        return False

    cpdef bint closed_ok(self, tuple state, tuple call):
        method, a, b, amount, sender, value, gas = call
        if method == M_TRANSFER:
            return value == 0 and self.transfer_guard(state, a, b, amount, sender, value, gas)
        return self.mint_guard(state, a, amount, sender, gas)

    cpdef Summary top(self, tuple state, tuple call):
        method, a, b, amount, sender, value, gas = call
        if method == M_TRANSFER:
            return self.transfer(state, a, b, amount, sender, value, gas)
        return self.mint(state, a, amount, sender, value, gas)

    def search(self, tuple state, int depth, roots=None):
        """See :meth:`reentry._kernel_py.TokenSearch.search`."""
        cdef Summary sub
        cdef list entry
        cdef int h, height
        cdef Py_ssize_t ci
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
            for entry in sub.outs.values():
                s1 = entry[0]
                if entry[2] == REV:
                    s1 = state
                if self.check_tx:
                    d = self.ginv_detail(s1)
                    if d is not None:
                        return total, height, ([ci], [entry[4]], CP_TX, d)
                cnt, h, v = self.search(s1, depth - 1)
                total += entry[3] * cnt
                if h > height:
                    height = h
                if v is not None:
                    return total, height, ([ci] + v[0], [entry[4]] + v[1], v[2], v[3])
            if sub.viol is not None:
                w, cp, d = sub.viol
                return total, height, ([ci], [w], cp, d)
        res = (total, height, None)
        if roots is None and self.memo:
            self._seq[key] = res
        return res

    def stats(self):
        return {"ext": len(self._ext), "transfer": len(self._tr), "seq": len(self._seq)}
