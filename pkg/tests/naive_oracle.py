"""Brute-force candidate enumeration used to cross-check the real one.

Independent on purpose: events are plain dicts, reads-from is chosen freely
for every read (exchange reads included), and bad combinations are filtered
after the fact instead of never being generated.  Values are resolved by
recursive descent with cycle detection rather than a fixpoint loop.
"""

import itertools

from litmusdiff.litmus import (
    Dialect,
    Mnemonic,
    SWP_ACQUIRE,
    SWP_FAMILY,
    SWP_RELEASE,
    StmtKind,
    ZERO_REGISTER,
)


def flatten_events(test):
    """Events as dicts, in the same order the package assigns ids: init
    writes over sorted locations, then each thread's statements in turn."""
    events = []
    rmw_pairs = []
    final_env = {}

    def add(tid, kind, loc=None, value=None):
        events.append({"id": len(events), "tid": tid, "kind": kind,
                       "loc": loc, "value": value})
        return len(events) - 1

    for loc in sorted(test.locations):
        add("init", "W", loc, ("lit", test.locations[loc]))

    for thread in test.threads:
        env = {}
        bindings = thread.binding_map()
        for stmt in thread.stmts:
            if test.dialect is Dialect.SOURCE:
                if stmt.kind is StmtKind.STORE:
                    add(thread.tid, "W", stmt.location, ("lit", stmt.value))
                elif stmt.kind is StmtKind.LOAD:
                    env[stmt.dest] = ("of", add(thread.tid, "R", stmt.location))
                elif stmt.kind is StmtKind.EXCHANGE:
                    r = add(thread.tid, "R", stmt.location)
                    w = add(thread.tid, "W", stmt.location, ("lit", stmt.value))
                    rmw_pairs.append((r, w))
                    if stmt.dest is not None:
                        env[stmt.dest] = ("of", r)
                else:
                    add(thread.tid, "F")
            else:
                m = stmt.mnemonic
                if m is Mnemonic.MOV:
                    env[stmt.dst] = ("lit", stmt.imm)
                elif m in (Mnemonic.LDR, Mnemonic.LDAR):
                    env[stmt.dst] = ("of", add(thread.tid, "R",
                                               bindings[stmt.addr]))
                elif m in (Mnemonic.STR, Mnemonic.STLR):
                    stored = (("lit", 0) if stmt.src == ZERO_REGISTER
                              else env[stmt.src])
                    add(thread.tid, "W", bindings[stmt.addr], stored)
                elif m in SWP_FAMILY:
                    stored = (("lit", 0) if stmt.src == ZERO_REGISTER
                              else env[stmt.src])
                    r = add(thread.tid, "R", bindings[stmt.addr])
                    w = add(thread.tid, "W", bindings[stmt.addr], stored)
                    rmw_pairs.append((r, w))
                    if stmt.dst != ZERO_REGISTER:
                        env[stmt.dst] = ("of", r)
                else:
                    add(thread.tid, "F")
        for reg, expr in env.items():
            final_env[(thread.tid, reg)] = expr
    return events, rmw_pairs, final_env


def _resolve(events, rf):
    """Value per read/write event id, or None when some value chases its
    own tail through rf."""
    memo = {}

    def value_of(eid, stack):
        if eid in memo:
            return memo[eid]
        if eid in stack:
            return None
        ev = events[eid]
        if ev["kind"] == "R":
            got = value_of(rf[eid], stack | {eid})
        else:
            tag, arg = ev["value"]
            got = arg if tag == "lit" else value_of(arg, stack | {eid})
        if got is not None:
            memo[eid] = got
        return got

    for ev in events:
        if ev["kind"] in ("R", "W"):
            if value_of(ev["id"], frozenset()) is None:
                return None
    return memo


def naive_candidates(test):
    """Every coherence/reads-from combination that resolves to values and
    keeps each exchange's read on the write just before its own.

    Yields (rf, co, values, registers) with plain dict/tuple payloads.
    """
    events, rmw_pairs, final_env = flatten_events(test)
    locs = sorted(test.locations)
    writes = {loc: [e["id"] for e in events
                    if e["kind"] == "W" and e["loc"] == loc]
              for loc in locs}
    reads = [e for e in events if e["kind"] == "R"]

    co_choices = []
    for loc in locs:
        init, *rest = writes[loc]
        co_choices.append([(init,) + p for p in itertools.permutations(rest)])
    rf_choices = [writes[r["loc"]] for r in reads]

    for co_combo in itertools.product(*co_choices):
        co = dict(zip(locs, co_combo))
        for rf_combo in itertools.product(*rf_choices):
            rf = {r["id"]: w for r, w in zip(reads, rf_combo)}
            ok = True
            for r, w in rmw_pairs:
                order = co[events[w]["loc"]]
                if order.index(rf[r]) != order.index(w) - 1:
                    ok = False
                    break
            if not ok:
                continue
            values = _resolve(events, rf)
            if values is None:
                continue
            registers = {}
            for key, (tag, arg) in final_env.items():
                registers[key] = arg if tag == "lit" else values[arg]
            yield rf, co, values, registers


def fingerprint(rf, co, values):
    return (
        tuple(sorted(rf.items())),
        tuple(sorted(co.items())),
        tuple(sorted(values.items())),
    )


def naive_final_states(test, consistent):
    """Outcome dicts (label -> value) of the naive candidates that the given
    consistency predicate accepts.  The predicate receives a package
    Execution assembled from the naive candidate."""
    from litmusdiff.execution import Execution, build_events, final_state

    graph = build_events(test)
    out = set()
    for rf, co, values, registers in naive_candidates(test):
        execution = Execution(graph, dict(rf), dict(co), dict(values),
                              dict(registers))
        if consistent(execution):
            out.add(final_state(execution))
    return out
