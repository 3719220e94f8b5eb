"""Candidate executions and outcome sets.

A test's threads are turned into memory events (reads, writes, fences), then
every combination of per-location coherence order and reads-from choice is
enumerated.  A memory model module decides which candidates are consistent;
the final states of the survivors form the test's outcome set.

Value flow is static: every write's value is either a program constant or a
copy of what some earlier read in the same thread returned, so a candidate's
values are solved by a fixpoint over rf.  Candidates whose values never
settle (a read feeding its own rf source through a cycle) are dropped.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from functools import cached_property
from typing import Iterator

from .litmus import (
    AsmInstr,
    Dialect,
    DmbDomain,
    LitmusError,
    LitmusTest,
    MemoryObservable,
    MemoryOrder,
    Mnemonic,
    SourceStmt,
    StmtKind,
    SWP_ACQUIRE,
    SWP_FAMILY,
    SWP_RELEASE,
    ZERO_REGISTER,
    condition_observables,
    observable_label,
)

MODEL_C11 = "c11"
MODEL_AARCH64 = "aarch64"
MODEL_SC = "sc"
KNOWN_MODELS = (MODEL_C11, MODEL_AARCH64)

DEFAULT_MAX_CANDIDATES = 1_000_000
DEFAULT_MAX_STATES = 1_000_000

INIT_TID = -1


class ResourceLimitError(LitmusError):
    pass


class DialectMismatchError(LitmusError):
    pass


class EventKind(enum.Enum):
    READ = "R"
    WRITE = "W"
    FENCE = "F"


# A value source is ("const", k) or ("read", eid of the read it copies).
ValueSource = tuple


@dataclasses.dataclass(frozen=True)
class Event:
    eid: int
    tid: int
    position: int
    kind: EventKind
    loc: str | None = None
    acquire: bool = False
    release: bool = False
    seq_cst: bool = False
    rmw: int | None = None
    zero_dest: bool = False
    domain: DmbDomain | None = None
    dest: str | None = None
    value_src: ValueSource | None = None

    @property
    def is_init(self) -> bool:
        return self.tid == INIT_TID


@dataclasses.dataclass
class EventGraph:
    test: LitmusTest
    events: tuple[Event, ...]
    # final register environment per thread: (tid, register) -> value source
    final_defs: dict[tuple[int, str], ValueSource]

    def event(self, eid: int) -> Event:
        return self.events[eid]

    @cached_property
    def reads(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.kind is EventKind.READ)

    @cached_property
    def writes(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.kind is EventKind.WRITE)

    @cached_property
    def fences(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.kind is EventKind.FENCE)

    @cached_property
    def writes_by_loc(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {loc: [] for loc in self.test.locations}
        for e in self.writes:
            out[e.loc].append(e.eid)
        return {loc: tuple(eids) for loc, eids in out.items()}

    @cached_property
    def rmw_pairs(self) -> tuple[tuple[int, int], ...]:
        by_id: dict[int, dict[EventKind, int]] = {}
        for e in self.events:
            if e.rmw is not None:
                by_id.setdefault(e.rmw, {})[e.kind] = e.eid
        return tuple(
            (pair[EventKind.READ], pair[EventKind.WRITE])
            for _, pair in sorted(by_id.items())
        )

    def program_order(self, a: Event, b: Event) -> bool:
        if a.is_init:
            return not b.is_init or a.position < b.position
        return a.tid == b.tid and a.position < b.position

    @cached_property
    def po_pairs(self) -> set[tuple[int, int]]:
        return {
            (a.eid, b.eid)
            for a in self.events
            for b in self.events
            if self.program_order(a, b)
        }


class _ThreadBuilder:
    """Appends a thread's events with per-thread positions.  An exchange
    produces a read then a write at consecutive positions, linked by the
    read's eid as the pair tag."""

    def __init__(self, tid: int, events: list[Event]):
        self.tid = tid
        self.events = events
        self.position = 0
        self.env: dict[str, ValueSource] = {}

    def add(self, kind: EventKind, **fields) -> int:
        eid = len(self.events)
        self.events.append(Event(eid, self.tid, self.position, kind, **fields))
        self.position += 1
        return eid


def _source_events(thread, builder: _ThreadBuilder) -> None:
    for stmt in thread.stmts:
        order = stmt.order
        acq = order in (MemoryOrder.ACQUIRE, MemoryOrder.ACQ_REL, MemoryOrder.SEQ_CST)
        rel = order in (MemoryOrder.RELEASE, MemoryOrder.ACQ_REL, MemoryOrder.SEQ_CST)
        sc = order is MemoryOrder.SEQ_CST
        if stmt.kind is StmtKind.STORE:
            builder.add(EventKind.WRITE, loc=stmt.location, release=rel,
                        seq_cst=sc, value_src=("const", stmt.value))
        elif stmt.kind is StmtKind.LOAD:
            eid = builder.add(EventKind.READ, loc=stmt.location, acquire=acq,
                              seq_cst=sc, dest=stmt.dest)
            builder.env[stmt.dest] = ("read", eid)
        elif stmt.kind is StmtKind.EXCHANGE:
            eid = builder.add(EventKind.READ, loc=stmt.location, acquire=acq,
                              seq_cst=sc, rmw=len(builder.events), dest=stmt.dest)
            builder.add(EventKind.WRITE, loc=stmt.location, release=rel,
                        seq_cst=sc, rmw=eid, value_src=("const", stmt.value))
            if stmt.dest is not None:
                builder.env[stmt.dest] = ("read", eid)
        else:
            builder.add(EventKind.FENCE, acquire=acq, release=rel, seq_cst=sc)


def _asm_events(thread, builder: _ThreadBuilder) -> None:
    bindings = thread.binding_map()

    def register_value(reg: str) -> ValueSource:
        if reg == ZERO_REGISTER:
            return ("const", 0)
        return builder.env[reg]

    for instr in thread.stmts:
        m = instr.mnemonic
        if m is Mnemonic.MOV:
            builder.env[instr.dst] = ("const", instr.imm)
        elif m in (Mnemonic.LDR, Mnemonic.LDAR):
            eid = builder.add(EventKind.READ, loc=bindings[instr.addr],
                              acquire=m is Mnemonic.LDAR, dest=instr.dst)
            builder.env[instr.dst] = ("read", eid)
        elif m in (Mnemonic.STR, Mnemonic.STLR):
            builder.add(EventKind.WRITE, loc=bindings[instr.addr],
                        release=m is Mnemonic.STLR,
                        value_src=register_value(instr.src))
        elif m in SWP_FAMILY:
            loc = bindings[instr.addr]
            zero = instr.dst == ZERO_REGISTER
            value = register_value(instr.src)
            eid = builder.add(EventKind.READ, loc=loc, acquire=m in SWP_ACQUIRE,
                              rmw=len(builder.events), zero_dest=zero,
                              dest=None if zero else instr.dst)
            builder.add(EventKind.WRITE, loc=loc, release=m in SWP_RELEASE,
                        rmw=eid, value_src=value)
            if not zero:
                builder.env[instr.dst] = ("read", eid)
        else:
            builder.add(EventKind.FENCE, domain=instr.domain)


def build_events(test: LitmusTest) -> EventGraph:
    """Turn the program into events.  Init writes come first, one per
    location in sorted order; MOV produces no event, only register state."""
    events: list[Event] = []
    for position, loc in enumerate(test.sorted_locations()):
        events.append(Event(
            len(events), INIT_TID, position, EventKind.WRITE, loc=loc,
            value_src=("const", test.locations[loc])))
    final_defs: dict[tuple[int, str], ValueSource] = {}
    for thread in test.threads:
        builder = _ThreadBuilder(thread.tid, events)
        if test.dialect is Dialect.SOURCE:
            _source_events(thread, builder)
        else:
            _asm_events(thread, builder)
        for reg, src in builder.env.items():
            final_defs[(thread.tid, reg)] = src
    return EventGraph(test, tuple(events), final_defs)


@dataclasses.dataclass
class Execution:
    """One candidate: a coherence order per location, a reads-from map, and
    the values they induce."""

    graph: EventGraph
    rf: dict[int, int]
    co: dict[str, tuple[int, ...]]
    values: dict[int, int]
    registers: dict[tuple[int, str], int]

    def rf_pairs(self) -> set[tuple[int, int]]:
        return {(w, r) for r, w in self.rf.items()}

    def co_pairs(self) -> set[tuple[int, int]]:
        pairs = set()
        for order in self.co.values():
            for i, a in enumerate(order):
                for b in order[i + 1:]:
                    pairs.add((a, b))
        return pairs

    def fr_pairs(self) -> set[tuple[int, int]]:
        pairs = set()
        for r_eid, w_eid in self.rf.items():
            order = self.co[self.graph.event(r_eid).loc]
            after = order[order.index(w_eid) + 1:]
            pairs.update((r_eid, w2) for w2 in after)
        return pairs

    def final_memory(self) -> dict[str, int]:
        return {loc: self.values[order[-1]] for loc, order in self.co.items()}


def _solve_values(graph: EventGraph, rf: dict[int, int]) -> dict[int, int] | None:
    values: dict[int, int] = {}
    dependent_writes = []
    for e in graph.writes:
        if e.value_src[0] == "const":
            values[e.eid] = e.value_src[1]
        else:
            dependent_writes.append(e)
    unresolved_reads = list(graph.reads)
    progress = True
    while progress:
        progress = False
        still = []
        for r in unresolved_reads:
            src = rf[r.eid]
            if src in values:
                values[r.eid] = values[src]
                progress = True
            else:
                still.append(r)
        unresolved_reads = still
        still = []
        for w in dependent_writes:
            dep = w.value_src[1]
            if dep in values:
                values[w.eid] = values[dep]
                progress = True
            else:
                still.append(w)
        dependent_writes = still
    if unresolved_reads or dependent_writes:
        return None
    return values


def enumerate_candidates(
    graph: EventGraph, max_candidates: int | None = None
) -> Iterator[Execution]:
    """Yield every value-consistent candidate execution.

    Coherence orders keep the init write first.  An exchange's read is forced
    to read from the write immediately before its own write in coherence
    order; that bakes in read-modify-write atomicity instead of generating
    and filtering the violations.  Raises ResourceLimitError once more than
    ``max_candidates`` combinations have been examined.
    """
    limit = DEFAULT_MAX_CANDIDATES if max_candidates is None else max_candidates
    locs = graph.test.sorted_locations()
    co_options = []
    for loc in locs:
        eids = graph.writes_by_loc[loc]
        init = eids[0]
        assert graph.event(init).is_init
        rest = eids[1:]
        co_options.append([
            (init,) + perm for perm in itertools.permutations(rest)
        ])
    rmw_reads = {r for r, _ in graph.rmw_pairs}
    plain_reads = [r for r in graph.reads if r.eid not in rmw_reads]
    rf_options = [graph.writes_by_loc[r.loc] for r in plain_reads]

    examined = 0
    for co_combo in itertools.product(*co_options):
        co = dict(zip(locs, co_combo))
        forced: dict[int, int] = {}
        for r_eid, w_eid in graph.rmw_pairs:
            order = co[graph.event(w_eid).loc]
            forced[r_eid] = order[order.index(w_eid) - 1]
        for rf_combo in itertools.product(*rf_options):
            examined += 1
            if examined > limit:
                raise ResourceLimitError(
                    f"candidate executions exceed the limit of {limit}")
            rf = dict(forced)
            for read, w_eid in zip(plain_reads, rf_combo):
                rf[read.eid] = w_eid
            values = _solve_values(graph, rf)
            if values is None:
                continue
            registers = {}
            for key, src in graph.final_defs.items():
                registers[key] = src[1] if src[0] == "const" else values[src[1]]
            execution = Execution(graph, rf, co, values, registers)
            _assert_sound(execution)
            yield execution


def _assert_sound(execution: Execution) -> None:
    """Internal sanity net on every emitted candidate."""
    graph = execution.graph
    for loc, order in execution.co.items():
        assert sorted(order) == sorted(graph.writes_by_loc[loc])
        assert graph.event(order[0]).is_init
    for r in graph.reads:
        w = execution.rf[r.eid]
        assert graph.event(w).loc == r.loc
        assert execution.values[r.eid] == execution.values[w]
    for r_eid, w_eid in graph.rmw_pairs:
        order = execution.co[graph.event(w_eid).loc]
        assert execution.rf[r_eid] == order[order.index(w_eid) - 1]


@dataclasses.dataclass(frozen=True, order=True)
class Outcome:
    """Final values of the observables named by the exists clause, keyed by
    their printed labels and sorted lexicographically."""

    items: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)

    @staticmethod
    def from_dict(values: dict[str, int]) -> "Outcome":
        return Outcome(tuple(sorted(values.items())))


@dataclasses.dataclass(frozen=True)
class OutcomeSet:
    test: str
    model: str
    outcomes: frozenset[Outcome]

    def sorted_outcomes(self) -> list[Outcome]:
        return sorted(self.outcomes)

    def to_json_dict(self) -> dict:
        return {
            "test": self.test,
            "model": self.model,
            "outcomes": [o.as_dict() for o in self.sorted_outcomes()],
        }


def final_state(execution: Execution, final=None) -> Outcome:
    """Project a candidate onto the observables of a final condition (the
    test's own exists clause unless another condition is supplied)."""
    test = execution.graph.test
    if final is None:
        final = test.final
    memory = execution.final_memory()
    items = []
    for obs in condition_observables(final):
        label = observable_label(obs, test.dialect)
        if isinstance(obs, MemoryObservable):
            items.append((label, memory[obs.location]))
        else:
            items.append((label, execution.registers[(obs.thread, obs.register)]))
    return Outcome(tuple(sorted(items)))


def allowed_outcomes(
    test: LitmusTest,
    model: str,
    *,
    max_candidates: int | None = None,
    legacy_zero_register: bool = False,
) -> OutcomeSet:
    """Outcome set of a test under one of the axiomatic models."""
    if model == MODEL_C11:
        if test.dialect is not Dialect.SOURCE:
            raise DialectMismatchError("the c11 model applies to source tests only")
        from .model_c11 import c11_consistent
        consistent = c11_consistent
    elif model == MODEL_AARCH64:
        if test.dialect is not Dialect.ASM:
            raise DialectMismatchError("the aarch64 model applies to asm tests only")
        from .model_aarch64 import aarch64_consistent

        def consistent(execution):
            return aarch64_consistent(
                execution, legacy_zero_register=legacy_zero_register)
    else:
        raise LitmusError(f"unknown model {model!r}")

    graph = build_events(test)
    outcomes = set()
    for execution in enumerate_candidates(graph, max_candidates):
        if consistent(execution):
            outcomes.add(final_state(execution))
    return OutcomeSet(test.name, model, frozenset(outcomes))


def _sc_step(thread, stmt, mem: dict, regs: dict) -> None:
    """Apply one statement in place.  Fences do nothing under interleaving."""
    if isinstance(stmt, SourceStmt):
        if stmt.kind is StmtKind.STORE:
            mem[stmt.location] = stmt.value
        elif stmt.kind is StmtKind.LOAD:
            regs[(thread.tid, stmt.dest)] = mem[stmt.location]
        elif stmt.kind is StmtKind.EXCHANGE:
            old = mem[stmt.location]
            mem[stmt.location] = stmt.value
            if stmt.dest is not None:
                regs[(thread.tid, stmt.dest)] = old
        return
    instr = stmt
    bindings = thread.binding_map()

    def reg_value(reg):
        if reg == ZERO_REGISTER:
            return 0
        return regs[(thread.tid, reg)]

    m = instr.mnemonic
    if m is Mnemonic.MOV:
        regs[(thread.tid, instr.dst)] = instr.imm
    elif m in (Mnemonic.LDR, Mnemonic.LDAR):
        regs[(thread.tid, instr.dst)] = mem[bindings[instr.addr]]
    elif m in (Mnemonic.STR, Mnemonic.STLR):
        mem[bindings[instr.addr]] = reg_value(instr.src)
    elif m in SWP_FAMILY:
        loc = bindings[instr.addr]
        old = mem[loc]
        mem[loc] = reg_value(instr.src)
        if instr.dst != ZERO_REGISTER:
            regs[(thread.tid, instr.dst)] = old


def sc_oracle_outcomes(
    test: LitmusTest, *, max_states: int | None = None
) -> OutcomeSet:
    """Reference outcome set under naive interleaving of whole statements.

    Memoized depth-first search over (program counters, memory, registers)
    states.  Used as the baseline any sound weak model must include.
    """
    limit = DEFAULT_MAX_STATES if max_states is None else max_states
    locs = test.sorted_locations()
    observables = condition_observables(test.final)
    outcomes: set[Outcome] = set()
    seen: set[tuple] = set()

    def freeze(pcs, mem, regs):
        return (pcs, tuple(mem[loc] for loc in locs), tuple(sorted(regs.items())))

    def explore(pcs: tuple[int, ...], mem: dict, regs: dict) -> None:
        state = freeze(pcs, mem, regs)
        if state in seen:
            return
        seen.add(state)
        if len(seen) > limit:
            raise ResourceLimitError(f"interleaving states exceed the limit of {limit}")
        terminal = True
        for i, thread in enumerate(test.threads):
            if pcs[i] >= len(thread.stmts):
                continue
            terminal = False
            next_mem = dict(mem)
            next_regs = dict(regs)
            _sc_step(thread, thread.stmts[pcs[i]], next_mem, next_regs)
            explore(pcs[:i] + (pcs[i] + 1,) + pcs[i + 1:], next_mem, next_regs)
        if terminal:
            items = []
            for obs in observables:
                label = observable_label(obs, test.dialect)
                if isinstance(obs, MemoryObservable):
                    items.append((label, mem[obs.location]))
                else:
                    items.append((label, regs[(obs.thread, obs.register)]))
            outcomes.add(Outcome(tuple(sorted(items))))

    explore(tuple(0 for _ in test.threads), dict(test.locations), {})
    return OutcomeSet(test.name, MODEL_SC, frozenset(outcomes))
