"""Pure-Python CDCL kernel (fallback for the compiled ``_cdcl_ext``).

Literals are dense codes ``2*v + neg`` with 0-based ``v``.  Both kernels
must perform the same floating-point operations in the same order so that
their decision sequences agree exactly.
"""

from heapq import heapify, heappop, heappush

# 2**-332 ~ 1.1e-100; a power of two so rescaling is exact and cannot reorder activities
RESCALE = 2.0 ** -332


def luby(i):
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


def cdcl_solve(num_vars, clauses, weights, phases, decay, bump0, rescale_limit,
               restart_unit, budget, record_trace, record_learned):
    """Returns (status, decisions, conflicts, propagations, model, trace, learned).

    status: 1 SAT, 0 UNSAT, -1 budget exhausted.
    """
    n = num_vars
    val = [-1] * n
    level = [0] * n
    reason = [-1] * n
    phase = list(phases)
    act = [0.0] * n
    w = list(weights)
    seen = [0] * n
    watches = [[] for _ in range(2 * n)]
    clauses = [list(c) for c in clauses]
    trail = []
    trail_lim = []
    relevant = [False] * n

    decisions = conflicts = props = 0
    trace = [] if record_trace else None
    learned = [] if record_learned else None
    inc = bump0
    qhead = 0

    def lit_val(code):
        v = val[code >> 1]
        if v < 0:
            return -1
        return v ^ (code & 1)

    def model():
        return [val[v] if val[v] >= 0 else phase[v] for v in range(n)]

    # root-level units; watch the rest
    for ci, c in enumerate(clauses):
        for code in c:
            relevant[code >> 1] = True
        if len(c) == 1:
            code = c[0]
            lv = lit_val(code)
            if lv == 0:
                return 0, 0, 0, 0, None, trace, learned
            if lv < 0:
                v = code >> 1
                val[v] = 1 - (code & 1)
                reason[v] = ci
                trail.append(code)
        else:
            watches[c[0]].append(ci)
            watches[c[1]].append(ci)

    heap = [(0.0, v) for v in range(n) if relevant[v]]
    heapify(heap)

    luby_idx = 0
    restart_limit = restart_unit * luby(0) if restart_unit > 0 else -1
    since_restart = 0

    while True:
        # unit propagation
        confl = -1
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            props += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            end = len(ws)
            while i < end:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if lit_val(first) == 1:
                    ws[j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    if lit_val(c[k]) != 0:
                        c[1] = c[k]
                        c[k] = false_lit
                        watches[c[1]].append(ci)
                        found = True
                        break
                if found:
                    continue
                ws[j] = ci
                j += 1
                if lit_val(first) == 0:
                    confl = ci
                    while i < end:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    qhead = len(trail)
                else:
                    v = first >> 1
                    val[v] = 1 - (first & 1)
                    level[v] = len(trail_lim)
                    reason[v] = ci
                    trail.append(first)
            del ws[j:]
            if confl >= 0:
                break

        if confl >= 0:
            conflicts += 1
            since_restart += 1
            cur = len(trail_lim)
            if cur == 0:
                return 0, decisions, conflicts, props, None, trace, learned

            # first-UIP analysis
            learnt = [-1]
            path = 0
            p = -1
            idx = len(trail) - 1
            while True:
                c = clauses[confl]
                for k in range(0 if p < 0 else 1, len(c)):
                    q = c[k]
                    v = q >> 1
                    if not seen[v] and level[v] > 0:
                        seen[v] = 1
                        if level[v] >= cur:
                            path += 1
                        else:
                            learnt.append(q)
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
            for q in learnt:
                seen[q >> 1] = 0

            if len(learnt) == 1:
                bt = 0
            else:
                mi = 1
                for k in range(2, len(learnt)):
                    if level[learnt[k] >> 1] > level[learnt[mi] >> 1]:
                        mi = k
                learnt[1], learnt[mi] = learnt[mi], learnt[1]
                bt = level[learnt[1] >> 1]

            # backjump
            if len(trail_lim) > bt:
                lim = trail_lim[bt]
                for t in range(len(trail) - 1, lim - 1, -1):
                    v = trail[t] >> 1
                    phase[v] = val[v]
                    val[v] = -1
                    reason[v] = -1
                    heappush(heap, (-act[v], v))
                del trail[lim:]
                del trail_lim[bt:]
                qhead = len(trail)

            ci = len(clauses)
            clauses.append(learnt)
            if record_learned:
                learned.append(list(learnt))
            if len(learnt) > 1:
                watches[learnt[0]].append(ci)
                watches[learnt[1]].append(ci)
            v = learnt[0] >> 1
            val[v] = 1 - (learnt[0] & 1)
            level[v] = bt
            reason[v] = ci
            trail.append(learnt[0])

            # weighted EVSIDS bump
            rescaled = False
            for q in learnt:
                v = q >> 1
                act[v] += w[v] * inc
                if act[v] > rescale_limit:
                    for u in range(n):
                        act[u] *= RESCALE
                    inc *= RESCALE
                    rescaled = True
                if not rescaled and val[v] < 0:
                    heappush(heap, (-act[v], v))
            inc *= 1.0 / decay
            if rescaled or len(heap) > 8 * n + 64:
                heap = [(-act[v], v) for v in range(n) if relevant[v] and val[v] < 0]
                heapify(heap)
            continue

        if restart_limit > 0 and since_restart >= restart_limit:
            since_restart = 0
            luby_idx += 1
            restart_limit = restart_unit * luby(luby_idx)
            if trail_lim:
                lim = trail_lim[0]
                for t in range(len(trail) - 1, lim - 1, -1):
                    v = trail[t] >> 1
                    phase[v] = val[v]
                    val[v] = -1
                    reason[v] = -1
                    heappush(heap, (-act[v], v))
                del trail[lim:]
                del trail_lim[:]
                qhead = len(trail)

        # branching: max activity, ties -> lowest index
        nxt = -1
        while heap:
            a, v = heap[0]
            if val[v] >= 0 or -a != act[v]:
                heappop(heap)
                continue
            nxt = v
            break
        if nxt < 0:
            return 1, decisions, conflicts, props, model(), trace, learned
        if budget > 0 and decisions >= budget:
            return -1, decisions, conflicts, props, None, trace, learned
        decisions += 1
        heappop(heap)
        code = 2 * nxt + (1 - phase[nxt])
        if record_trace:
            trace.append(code)
        trail_lim.append(len(trail))
        val[nxt] = phase[nxt]
        level[nxt] = len(trail_lim)
        reason[nxt] = -1
        trail.append(code)
