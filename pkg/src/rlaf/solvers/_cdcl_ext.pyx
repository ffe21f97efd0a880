# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled CDCL kernel. Mirrors ``_cdcl_py.cdcl_solve`` operation for operation."""

from libcpp.vector cimport vector

cdef double RESCALE = 2.0 ** -332


cdef long luby(long i):
    cdef long size = 1, seq = 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


cdef class _Heap:
    """Indexed binary max-heap on activity, ties -> lower variable index."""
    cdef vector[int] heap
    cdef vector[int] pos
    cdef double* act

    def __cinit__(self, int n):
        self.pos.assign(n, -1)

    cdef inline bint before(self, int a, int b):
        return self.act[a] > self.act[b] or (self.act[a] == self.act[b] and a < b)

    cdef void up(self, int i):
        cdef int x = self.heap[i]
        cdef int parent
        while i > 0:
            parent = (i - 1) >> 1
            if not self.before(x, self.heap[parent]):
                break
            self.heap[i] = self.heap[parent]
            self.pos[self.heap[i]] = i
            i = parent
        self.heap[i] = x
        self.pos[x] = i

    cdef void down(self, int i):
        cdef int x = self.heap[i]
        cdef int size = <int>self.heap.size()
        cdef int child
        while 2 * i + 1 < size:
            child = 2 * i + 1
            if child + 1 < size and self.before(self.heap[child + 1], self.heap[child]):
                child += 1
            if not self.before(self.heap[child], x):
                break
            self.heap[i] = self.heap[child]
            self.pos[self.heap[i]] = i
            i = child
        self.heap[i] = x
        self.pos[x] = i

    cdef inline bint contains(self, int v):
        return self.pos[v] >= 0

    cdef void insert(self, int v):
        if self.pos[v] >= 0:
            return
        self.pos[v] = <int>self.heap.size()
        self.heap.push_back(v)
        self.up(self.pos[v])

    cdef int pop(self):
        cdef int top = self.heap[0]
        cdef int last = self.heap.back()
        self.heap.pop_back()
        self.pos[top] = -1
        if self.heap.size() > 0:
            self.heap[0] = last
            self.pos[last] = 0
            self.down(0)
        return top

    cdef void rebuild(self):
        cdef int i
        for i in range(<int>self.heap.size() // 2 - 1, -1, -1):
            self.down(i)


def cdcl_solve(int num_vars, clauses_in, weights, phases, double decay, double bump0,
               double rescale_limit, long restart_unit, long budget,
               bint record_trace, bint record_learned):
    cdef int n = num_vars
    cdef vector[int] val, level, reason, phase, seen, trail, trail_lim, learnt
    cdef vector[double] act, w
    cdef vector[vector[int]] clauses
    cdef vector[vector[int]] watches
    cdef vector[char] relevant
    cdef vector[int]* ws
    cdef vector[int]* c
    cdef long decisions = 0, conflicts = 0, props = 0
    cdef double inc = bump0
    cdef int qhead = 0
    cdef int i, j, k, end, ci, p, q, v, u, code, false_lit, first, confl, cur, path, idx, mi, bt, lim, t, lv, tmp, nxt
    cdef bint found, rescaled
    cdef long luby_idx = 0, restart_limit, since_restart = 0
    cdef list trace = [] if record_trace else None
    cdef list learned = [] if record_learned else None

    val.assign(n, -1)
    level.assign(n, 0)
    reason.assign(n, -1)
    seen.assign(n, 0)
    act.assign(n, 0.0)
    relevant.assign(n, 0)
    phase.resize(n)
    w.resize(n)
    for v in range(n):
        phase[v] = <int>phases[v]
        w[v] = <double>weights[v]
    watches.resize(2 * n)

    for cl in clauses_in:
        clauses.push_back(vector[int]())
        for code in cl:
            clauses.back().push_back(code)

    for ci in range(<int>clauses.size()):
        c = &clauses[ci]
        for k in range(<int>c.size()):
            relevant[c[0][k] >> 1] = 1
        if c.size() == 1:
            code = c[0][0]
            lv = val[code >> 1]
            if lv >= 0:
                lv = lv ^ (code & 1)
            if lv == 0:
                return 0, 0, 0, 0, None, trace, learned
            if lv < 0:
                v = code >> 1
                val[v] = 1 - (code & 1)
                reason[v] = ci
                trail.push_back(code)
        else:
            watches[c[0][0]].push_back(ci)
            watches[c[0][1]].push_back(ci)

    cdef _Heap heap = _Heap(n)
    heap.act = act.data()
    for v in range(n):
        if relevant[v]:
            heap.insert(v)

    restart_limit = restart_unit * luby(0) if restart_unit > 0 else -1

    while True:
        confl = -1
        while qhead < <int>trail.size():
            p = trail[qhead]
            qhead += 1
            props += 1
            false_lit = p ^ 1
            ws = &watches[false_lit]
            i = 0
            j = 0
            end = <int>ws.size()
            while i < end:
                ci = ws[0][i]
                i += 1
                c = &clauses[ci]
                if c[0][0] == false_lit:
                    c[0][0] = c[0][1]
                    c[0][1] = false_lit
                first = c[0][0]
                lv = val[first >> 1]
                if lv >= 0 and (lv ^ (first & 1)) == 1:
                    ws[0][j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, <int>c.size()):
                    lv = val[c[0][k] >> 1]
                    if lv < 0 or (lv ^ (c[0][k] & 1)) != 0:
                        c[0][1] = c[0][k]
                        c[0][k] = false_lit
                        # push_back may reallocate watches[c[1]] but never *ws (c[1] != false_lit)
                        watches[c[0][1]].push_back(ci)
                        found = True
                        break
                if found:
                    continue
                ws[0][j] = ci
                j += 1
                lv = val[first >> 1]
                if lv >= 0 and (lv ^ (first & 1)) == 0:
                    confl = ci
                    while i < end:
                        ws[0][j] = ws[0][i]
                        j += 1
                        i += 1
                    qhead = <int>trail.size()
                else:
                    v = first >> 1
                    val[v] = 1 - (first & 1)
                    level[v] = <int>trail_lim.size()
                    reason[v] = ci
                    trail.push_back(first)
            ws.resize(j)
            if confl >= 0:
                break

        if confl >= 0:
            conflicts += 1
            since_restart += 1
            cur = <int>trail_lim.size()
            if cur == 0:
                return 0, decisions, conflicts, props, None, trace, learned

            learnt.clear()
            learnt.push_back(-1)
            path = 0
            p = -1
            idx = <int>trail.size() - 1
            while True:
                c = &clauses[confl]
                for k in range(0 if p < 0 else 1, <int>c.size()):
                    q = c[0][k]
                    v = q >> 1
                    if not seen[v] and level[v] > 0:
                        seen[v] = 1
                        if level[v] >= cur:
                            path += 1
                        else:
                            learnt.push_back(q)
                while not seen[trail[idx] >> 1]:
                    idx -= 1
                p = trail[idx]
                idx -= 1
                confl = reason[p >> 1]
                seen[p >> 1] = 0
                path -= 1
                if path == 0:
                    break
            learnt[0] = p ^ 1
            for k in range(<int>learnt.size()):
                seen[learnt[k] >> 1] = 0

            if learnt.size() == 1:
                bt = 0
            else:
                mi = 1
                for k in range(2, <int>learnt.size()):
                    if level[learnt[k] >> 1] > level[learnt[mi] >> 1]:
                        mi = k
                tmp = learnt[1]
                learnt[1] = learnt[mi]
                learnt[mi] = tmp
                bt = level[learnt[1] >> 1]

            if <int>trail_lim.size() > bt:
                lim = trail_lim[bt]
                for t in range(<int>trail.size() - 1, lim - 1, -1):
                    v = trail[t] >> 1
                    phase[v] = val[v]
                    val[v] = -1
                    reason[v] = -1
                    heap.insert(v)
                trail.resize(lim)
                trail_lim.resize(bt)
                qhead = <int>trail.size()

            ci = <int>clauses.size()
            clauses.push_back(learnt)
            if record_learned:
                learned.append([learnt[k] for k in range(<int>learnt.size())])
            if learnt.size() > 1:
                watches[learnt[0]].push_back(ci)
                watches[learnt[1]].push_back(ci)
            v = learnt[0] >> 1
            val[v] = 1 - (learnt[0] & 1)
            level[v] = bt
            reason[v] = ci
            trail.push_back(learnt[0])

            rescaled = False
            for k in range(<int>learnt.size()):
                v = learnt[k] >> 1
                act[v] += w[v] * inc
                if act[v] > rescale_limit:
                    for u in range(n):
                        act[u] *= RESCALE
                    inc *= RESCALE
                    rescaled = True
                if not rescaled and heap.contains(v):
                    heap.up(heap.pos[v])
            inc *= 1.0 / decay
            if rescaled:
                heap.rebuild()
            continue

        if restart_limit > 0 and since_restart >= restart_limit:
            since_restart = 0
            luby_idx += 1
            restart_limit = restart_unit * luby(luby_idx)
            if trail_lim.size() > 0:
                lim = trail_lim[0]
                for t in range(<int>trail.size() - 1, lim - 1, -1):
                    v = trail[t] >> 1
                    phase[v] = val[v]
                    val[v] = -1
                    reason[v] = -1
                    heap.insert(v)
                trail.resize(lim)
                trail_lim.clear()
                qhead = <int>trail.size()

        nxt = -1
        while heap.heap.size() > 0:
            v = heap.heap[0]
            if val[v] >= 0:
                heap.pop()
                continue
            nxt = v
            break
        if nxt < 0:
            return 1, decisions, conflicts, props, [val[v] if val[v] >= 0 else phase[v] for v in range(n)], trace, learned
        if budget > 0 and decisions >= budget:
            return -1, decisions, conflicts, props, None, trace, learned
        decisions += 1
        heap.pop()
        code = 2 * nxt + (1 - phase[nxt])
        if record_trace:
            trace.append(code)
        trail_lim.push_back(<int>trail.size())
        val[nxt] = phase[nxt]
        level[nxt] = <int>trail_lim.size()
        reason[nxt] = -1
        trail.push_back(code)
