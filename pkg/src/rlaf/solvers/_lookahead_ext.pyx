# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled look-ahead DPLL kernel. Mirrors ``_lookahead_py.lookahead_solve``."""

from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport sort

cdef int CONFLICT = -1
cdef int DONE = -2


cdef class _State:
    cdef int n, m
    cdef vector[vector[int]] clauses
    cdef vector[vector[int]] occ
    cdef vector[char] relevant
    cdef vector[double] w
    cdef vector[int] phase, val, sat, free, stamp, trail
    cdef int qhead, nsat, cur_stamp
    cdef long props
    cdef double fraction
    cdef bint product_mix, record
    cdef list failed

    cdef void assign(self, int code):
        cdef int v = code >> 1
        cdef int k, ci
        self.val[v] = 1 - (code & 1)
        self.trail.push_back(code)
        for k in range(<int>self.occ[code].size()):
            ci = self.occ[code][k]
            if self.sat[ci] == 0:
                self.nsat += 1
            self.sat[ci] += 1
        for k in range(<int>self.occ[code ^ 1].size()):
            self.free[self.occ[code ^ 1][k]] -= 1

    cdef void undo_to(self, int mark):
        cdef int code, k, ci
        while <int>self.trail.size() > mark:
            code = self.trail.back()
            self.trail.pop_back()
            self.val[code >> 1] = -1
            for k in range(<int>self.occ[code].size()):
                ci = self.occ[code][k]
                self.sat[ci] -= 1
                if self.sat[ci] == 0:
                    self.nsat -= 1
            for k in range(<int>self.occ[code ^ 1].size()):
                self.free[self.occ[code ^ 1][k]] += 1
        if self.qhead > mark:
            self.qhead = mark

    cdef bint propagate(self):
        cdef int q = self.qhead
        cdef int code, k, ci, j, lit
        while q < <int>self.trail.size():
            code = self.trail[q]
            q += 1
            self.props += 1
            for k in range(<int>self.occ[code ^ 1].size()):
                ci = self.occ[code ^ 1][k]
                if self.sat[ci]:
                    continue
                if self.free[ci] == 0:
                    self.qhead = <int>self.trail.size()
                    return False
                if self.free[ci] == 1:
                    for j in range(<int>self.clauses[ci].size()):
                        lit = self.clauses[ci][j]
                        if self.val[lit >> 1] < 0:
                            self.assign(lit)
                            break
        self.qhead = q
        return True

    cdef int look(self, int code):
        cdef int mark = <int>self.trail.size()
        cdef int count = 0
        cdef int t, k, ci, s
        self.assign(code)
        cdef bint ok = self.propagate()
        if ok:
            self.cur_stamp += 1
            s = self.cur_stamp
            for t in range(mark, <int>self.trail.size()):
                for k in range(<int>self.occ[self.trail[t] ^ 1].size()):
                    ci = self.occ[self.trail[t] ^ 1][k]
                    if self.stamp[ci] != s:
                        self.stamp[ci] = s
                        if self.sat[ci] == 0 and self.free[ci] == 2:
                            count += 1
        self.undo_to(mark)
        return count if ok else CONFLICT

    cdef int simplify(self):
        cdef int v, k, ci, score, pos_i, neg_i, best_v, keep, idx, code
        cdef bint pos, neg, active, restart
        cdef double best, sc, mixv
        cdef vector[int] pure, order
        cdef vector[pair[double, int]] cands
        while True:
            if not self.propagate():
                return CONFLICT
            while True:
                pure.clear()
                for v in range(self.n):
                    if self.val[v] >= 0 or not self.relevant[v]:
                        continue
                    pos = False
                    neg = False
                    for k in range(<int>self.occ[2 * v].size()):
                        if not self.sat[self.occ[2 * v][k]]:
                            pos = True
                            break
                    for k in range(<int>self.occ[2 * v + 1].size()):
                        if not self.sat[self.occ[2 * v + 1][k]]:
                            neg = True
                            break
                    if pos != neg:
                        pure.push_back(2 * v if pos else 2 * v + 1)
                if pure.size() == 0:
                    break
                for k in range(<int>pure.size()):
                    if self.val[pure[k] >> 1] < 0:
                        self.assign(pure[k])
                self.propagate()
            if self.nsat == self.m:
                return DONE

            cands.clear()
            for v in range(self.n):
                if self.val[v] >= 0 or not self.relevant[v]:
                    continue
                active = False
                score = 0
                for k in range(<int>self.occ[2 * v].size()):
                    ci = self.occ[2 * v][k]
                    if not self.sat[ci]:
                        active = True
                        if self.free[ci] <= 3:
                            score += 1
                for k in range(<int>self.occ[2 * v + 1].size()):
                    ci = self.occ[2 * v + 1][k]
                    if not self.sat[ci]:
                        active = True
                        if self.free[ci] <= 3:
                            score += 1
                if active:
                    cands.push_back(pair[double, int](-(self.w[v] * score), v))
            sort(cands.begin(), cands.end())
            keep = ceil_frac(self.fraction, <int>cands.size())
            # pre-selection only filters; survivors are looked at in variable order
            order.clear()
            for idx in range(keep):
                order.push_back(cands[idx].second)
            sort(order.begin(), order.end())

            best_v = -1
            best = -1.0
            restart = False
            for idx in range(keep):
                v = order[idx]
                pos_i = self.look(2 * v)
                neg_i = self.look(2 * v + 1)
                if pos_i == CONFLICT or neg_i == CONFLICT:
                    if self.record:
                        prefix = tuple([self.trail[k] for k in range(<int>self.trail.size())])
                        if pos_i == CONFLICT:
                            self.failed.append((prefix, 2 * v))
                        if neg_i == CONFLICT:
                            self.failed.append((prefix, 2 * v + 1))
                    if pos_i == CONFLICT and neg_i == CONFLICT:
                        return CONFLICT
                    self.assign(2 * v + 1 if pos_i == CONFLICT else 2 * v)
                    restart = True
                    break
                if self.product_mix:
                    mixv = <double>(<long>pos_i * neg_i * 1024 + pos_i + neg_i)
                else:
                    mixv = <double>(pos_i + neg_i)
                sc = self.w[v] * mixv
                if sc > best or (sc == best and v < best_v):
                    best = sc
                    best_v = v
            if restart:
                continue
            return 2 * best_v + (1 - self.phase[best_v])


cdef int ceil_frac(double fraction, int count):
    if count == 0:
        return 0
    cdef int k = <int>(fraction * count)
    if k < fraction * count:
        k += 1
    return k if k > 1 else 1


def lookahead_solve(int num_vars, clauses_in, weights, phases, double fraction,
                    bint product_mix, long budget, bint record_trace):
    cdef _State s = _State()
    cdef int n = num_vars
    cdef int ci, k, v, code, status, mark, alt
    cdef long decisions = 0, conflicts = 0
    cdef vector[pair[int, int]] stack
    cdef bint resumed
    cdef list trace = [] if record_trace else None
    s.n = n
    s.occ.resize(2 * n)
    for cl in clauses_in:
        s.clauses.push_back(vector[int]())
        for code in cl:
            s.clauses.back().push_back(code)
    s.m = <int>s.clauses.size()
    for ci in range(s.m):
        for k in range(<int>s.clauses[ci].size()):
            s.occ[s.clauses[ci][k]].push_back(ci)
    s.relevant.resize(n)
    s.w.resize(n)
    s.phase.resize(n)
    for v in range(n):
        s.relevant[v] = s.occ[2 * v].size() > 0 or s.occ[2 * v + 1].size() > 0
        s.w[v] = <double>weights[v]
        s.phase[v] = <int>phases[v]
    s.val.assign(n, -1)
    s.sat.assign(s.m, 0)
    s.stamp.assign(s.m, 0)
    s.free.resize(s.m)
    for ci in range(s.m):
        s.free[ci] = <int>s.clauses[ci].size()
    s.qhead = 0
    s.nsat = 0
    s.cur_stamp = 0
    s.props = 0
    s.fraction = fraction
    s.product_mix = product_mix
    s.record = record_trace
    s.failed = [] if record_trace else None

    for ci in range(s.m):
        if s.clauses[ci].size() == 1 and s.sat[ci] == 0:
            if s.free[ci] == 0:
                return 0, 0, 1, s.props, None, trace, s.failed
            s.assign(s.clauses[ci][0])

    status = s.simplify()
    while True:
        if status == DONE:
            return (1, decisions, conflicts, s.props,
                    [s.val[v] if s.val[v] >= 0 else s.phase[v] for v in range(n)], trace, s.failed)
        if status == CONFLICT:
            conflicts += 1
            resumed = False
            while stack.size() > 0:
                mark = stack.back().first
                alt = stack.back().second
                stack.pop_back()
                s.undo_to(mark)
                if alt >= 0:
                    stack.push_back(pair[int, int](mark, -1))
                    s.assign(alt)
                    status = s.simplify()
                    resumed = True
                    break
            if not resumed:
                return 0, decisions, conflicts, s.props, None, trace, s.failed
            continue
        if budget > 0 and decisions >= budget:
            return -1, decisions, conflicts, s.props, None, trace, s.failed
        decisions += 1
        if record_trace:
            trace.append(status)
        stack.push_back(pair[int, int](<int>s.trail.size(), status ^ 1))
        s.assign(status)
        status = s.simplify()
