"""Pure-Python look-ahead DPLL kernel (fallback for ``_lookahead_ext``).

Clause state is kept as counters (true literals, unassigned literals) that
are updated on assign and restored on undo.  Search is an explicit-stack
DPLL so depth is not bounded by the interpreter's recursion limit.
"""

CONFLICT = -1
DONE = -2


def lookahead_solve(num_vars, clauses, weights, phases, fraction, product_mix,
                    budget, record_trace):
    """Returns (status, decisions, conflicts, propagations, model, trace, failed).

    status: 1 SAT, 0 UNSAT, -1 budget exhausted.  ``failed`` lists
    (trail-at-the-time, failed literal code) pairs when tracing.
    """
    n = num_vars
    m = len(clauses)
    clauses = [list(c) for c in clauses]
    occ = [[] for _ in range(2 * n)]
    for ci, c in enumerate(clauses):
        for code in c:
            occ[code].append(ci)
    relevant = [bool(occ[2 * v] or occ[2 * v + 1]) for v in range(n)]
    w = list(weights)
    phase = list(phases)

    val = [-1] * n
    sat = [0] * m
    free = [len(c) for c in clauses]
    stamp = [0] * m
    trail = []
    st = {"qhead": 0, "nsat": 0, "props": 0, "stamp": 0}
    trace = [] if record_trace else None
    failed = [] if record_trace else None

    def assign(code):
        v = code >> 1
        val[v] = 1 - (code & 1)
        trail.append(code)
        for ci in occ[code]:
            if sat[ci] == 0:
                st["nsat"] += 1
            sat[ci] += 1
        for ci in occ[code ^ 1]:
            free[ci] -= 1

    def undo_to(mark):
        while len(trail) > mark:
            code = trail.pop()
            val[code >> 1] = -1
            for ci in occ[code]:
                sat[ci] -= 1
                if sat[ci] == 0:
                    st["nsat"] -= 1
            for ci in occ[code ^ 1]:
                free[ci] += 1
        if st["qhead"] > mark:
            st["qhead"] = mark

    def propagate():
        q = st["qhead"]
        while q < len(trail):
            code = trail[q]
            q += 1
            st["props"] += 1
            for ci in occ[code ^ 1]:
                if sat[ci]:
                    continue
                if free[ci] == 0:
                    st["qhead"] = len(trail)
                    return False
                if free[ci] == 1:
                    for lit in clauses[ci]:
                        if val[lit >> 1] < 0:
                            assign(lit)
                            break
        st["qhead"] = q
        return True

    def look(code):
        """Trial-assign ``code``; return #new binary clauses or CONFLICT."""
        mark = len(trail)
        assign(code)
        ok = propagate()
        count = 0
        if ok:
            st["stamp"] += 1
            s = st["stamp"]
            for t in range(mark, len(trail)):
                for ci in occ[trail[t] ^ 1]:
                    if stamp[ci] != s:
                        stamp[ci] = s
                        if sat[ci] == 0 and free[ci] == 2:
                            count += 1
        undo_to(mark)
        return count if ok else CONFLICT

    def simplify():
        """Reduce the current node; return a branch literal, DONE (SAT) or CONFLICT."""
        while True:
            if not propagate():
                return CONFLICT
            # pure literals, to fixpoint
            while True:
                pure = []
                for v in range(n):
                    if val[v] >= 0 or not relevant[v]:
                        continue
                    pos = neg = False
                    for ci in occ[2 * v]:
                        if not sat[ci]:
                            pos = True
                            break
                    for ci in occ[2 * v + 1]:
                        if not sat[ci]:
                            neg = True
                            break
                    if pos != neg:
                        pure.append(2 * v if pos else 2 * v + 1)
                if not pure:
                    break
                for code in pure:
                    if val[code >> 1] < 0:
                        assign(code)
                propagate()
            if st["nsat"] == m:
                return DONE

            # pre-selection on weighted short-clause occurrence counts
            cands = []
            for v in range(n):
                if val[v] >= 0 or not relevant[v]:
                    continue
                active = False
                score = 0
                for ci in occ[2 * v]:
                    if not sat[ci]:
                        active = True
                        if free[ci] <= 3:
                            score += 1
                for ci in occ[2 * v + 1]:
                    if not sat[ci]:
                        active = True
                        if free[ci] <= 3:
                            score += 1
                if active:
                    cands.append((-(w[v] * score), v))
            cands.sort()
            # pre-selection only filters; survivors are looked at in variable order
            cands = sorted(cands[:_ceil_frac(fraction, len(cands))], key=lambda c: c[1])

            best_v = -1
            best = -1.0
            restart = False
            for _, v in cands:
                pos = look(2 * v)
                neg = look(2 * v + 1)
                if pos == CONFLICT or neg == CONFLICT:
                    if record_trace:
                        prefix = tuple(trail)
                        if pos == CONFLICT:
                            failed.append((prefix, 2 * v))
                        if neg == CONFLICT:
                            failed.append((prefix, 2 * v + 1))
                    if pos == CONFLICT and neg == CONFLICT:
                        return CONFLICT
                    assign(2 * v + 1 if pos == CONFLICT else 2 * v)
                    restart = True
                    break
                if product_mix:
                    mix = pos * neg * 1024 + pos + neg
                else:
                    mix = pos + neg
                score = w[v] * mix
                if score > best or (score == best and v < best_v):
                    best = score
                    best_v = v
            if restart:
                continue
            return 2 * best_v + (1 - phase[best_v])

    def model():
        return [val[v] if val[v] >= 0 else phase[v] for v in range(n)]

    decisions = conflicts = 0
    # root units
    for ci, c in enumerate(clauses):
        if len(c) == 1 and sat[ci] == 0:
            if free[ci] == 0:
                return 0, 0, 1, st["props"], None, trace, failed
            assign(c[0])

    stack = []
    status = simplify()
    while True:
        if status == DONE:
            return 1, decisions, conflicts, st["props"], model(), trace, failed
        if status == CONFLICT:
            conflicts += 1
            resumed = False
            while stack:
                mark, alt = stack.pop()
                undo_to(mark)
                if alt >= 0:
                    stack.append((mark, -1))
                    assign(alt)
                    status = simplify()
                    resumed = True
                    break
            if not resumed:
                return 0, decisions, conflicts, st["props"], None, trace, failed
            continue
        if budget > 0 and decisions >= budget:
            return -1, decisions, conflicts, st["props"], None, trace, failed
        decisions += 1
        if record_trace:
            trace.append(status)
        stack.append((len(trail), status ^ 1))
        assign(status)
        status = simplify()


def _ceil_frac(fraction, count):
    """max(1, ceil(fraction * count)) without float round-up surprises at exact products."""
    if count == 0:
        return 0
    k = int(fraction * count)
    if k < fraction * count:
        k += 1
    return max(1, k)
