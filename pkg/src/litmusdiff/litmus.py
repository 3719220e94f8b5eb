"""Core litmus test representation shared by both input dialects.

A litmus test is an initial state, a handful of straight-line threads, and
an ``exists`` clause over final register and memory values.  The same
:class:`LitmusTest` container is used for the source dialect (C-like atomic
calls) and the asm dialect (AArch64 instructions); ``dialect`` says which
kind of statement the threads hold.
"""

from __future__ import annotations

import dataclasses
import enum
import re
from typing import Iterator, Mapping, Union

MAX_LOCATIONS = 4
MAX_THREADS = 4
MAX_STATEMENTS_PER_THREAD = 8
# Translation emits at most two instructions per source statement, so asm
# threads get twice the headroom.
MAX_INSTRUCTIONS_PER_THREAD = 16
MIN_VALUE = 0
MAX_VALUE = 7

ZERO_REGISTER = "WZR"


class LitmusError(Exception):
    """Base class for everything this package raises on purpose."""


class ParseError(LitmusError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class UnsupportedConstructError(ParseError):
    """Input is recognizable but outside the supported fragment."""


class ValidationError(LitmusError):
    pass


class Dialect(enum.Enum):
    SOURCE = "source"
    ASM = "asm"


class MemoryOrder(enum.Enum):
    RELAXED = "relaxed"
    ACQUIRE = "acquire"
    RELEASE = "release"
    ACQ_REL = "acq_rel"
    SEQ_CST = "seq_cst"


LOAD_ORDERS = frozenset({MemoryOrder.RELAXED, MemoryOrder.ACQUIRE, MemoryOrder.SEQ_CST})
STORE_ORDERS = frozenset({MemoryOrder.RELAXED, MemoryOrder.RELEASE, MemoryOrder.SEQ_CST})
FENCE_ORDERS = frozenset(
    {MemoryOrder.ACQUIRE, MemoryOrder.RELEASE, MemoryOrder.ACQ_REL, MemoryOrder.SEQ_CST}
)


class StmtKind(enum.Enum):
    LOAD = "load"
    STORE = "store"
    EXCHANGE = "exchange"
    FENCE = "fence"


@dataclasses.dataclass(frozen=True)
class SourceStmt:
    """One atomic operation in the source dialect.

    ``dest`` is the register receiving a loaded value; for an exchange it is
    optional (the returned old value may be discarded).  Stored values are
    always small integer constants.
    """

    kind: StmtKind
    order: MemoryOrder
    location: str | None = None
    value: int | None = None
    dest: str | None = None

    def defined_register(self) -> str | None:
        if self.kind in (StmtKind.LOAD, StmtKind.EXCHANGE):
            return self.dest
        return None


class Mnemonic(enum.Enum):
    MOV = "MOV"
    LDR = "LDR"
    LDAR = "LDAR"
    STR = "STR"
    STLR = "STLR"
    SWP = "SWP"
    SWPA = "SWPA"
    SWPL = "SWPL"
    SWPAL = "SWPAL"
    DMB = "DMB"


SWP_FAMILY = frozenset(
    {Mnemonic.SWP, Mnemonic.SWPA, Mnemonic.SWPL, Mnemonic.SWPAL}
)
SWP_ACQUIRE = frozenset({Mnemonic.SWPA, Mnemonic.SWPAL})
SWP_RELEASE = frozenset({Mnemonic.SWPL, Mnemonic.SWPAL})


class DmbDomain(enum.Enum):
    LD = "ISHLD"
    ST = "ISHST"
    SY = "ISH"


@dataclasses.dataclass(frozen=True)
class AsmInstr:
    """One AArch64 instruction.

    Field use depends on the mnemonic:

    * MOV: dst, imm
    * LDR/LDAR: dst, addr
    * STR/STLR: src, addr
    * SWP family: src, dst, addr
    * DMB: domain
    """

    mnemonic: Mnemonic
    dst: str | None = None
    src: str | None = None
    addr: str | None = None
    imm: int | None = None
    domain: DmbDomain | None = None

    def defined_register(self) -> str | None:
        # WZR is a value sink, not a definition.
        if self.mnemonic in (Mnemonic.MOV, Mnemonic.LDR, Mnemonic.LDAR):
            return self.dst
        if self.mnemonic in SWP_FAMILY and self.dst != ZERO_REGISTER:
            return self.dst
        return None

    def read_registers(self) -> tuple[str, ...]:
        if self.mnemonic in (Mnemonic.STR, Mnemonic.STLR) or self.mnemonic in SWP_FAMILY:
            assert self.src is not None
            return (self.src,)
        return ()


Stmt = Union[SourceStmt, AsmInstr]


@dataclasses.dataclass(frozen=True)
class Thread:
    tid: int
    stmts: tuple[Stmt, ...]
    # asm only: address register name -> location it points at
    bindings: tuple[tuple[str, str], ...] = ()

    def binding_map(self) -> dict[str, str]:
        return dict(self.bindings)

    def defined_registers(self) -> list[str]:
        regs = []
        for stmt in self.stmts:
            reg = stmt.defined_register()
            if reg is not None and reg not in regs:
                regs.append(reg)
        return regs

    def referenced_locations(self) -> set[str]:
        locs = set()
        for stmt in self.stmts:
            if isinstance(stmt, SourceStmt):
                if stmt.location is not None:
                    locs.add(stmt.location)
            elif stmt.addr is not None:
                locs.add(self.binding_map().get(stmt.addr, stmt.addr))
        return locs


@dataclasses.dataclass(frozen=True)
class RegisterObservable:
    thread: int
    register: str


@dataclasses.dataclass(frozen=True)
class MemoryObservable:
    location: str


Observable = Union[RegisterObservable, MemoryObservable]


def observable_label(obs: Observable, dialect: Dialect) -> str:
    """Render an observable the way the dialect's exists clause spells it."""
    if isinstance(obs, MemoryObservable):
        return obs.location
    if dialect is Dialect.SOURCE:
        return f"P{obs.thread}:{obs.register}"
    return f"{obs.thread}:{obs.register}"


@dataclasses.dataclass(frozen=True)
class Atom:
    observable: Observable
    value: int


@dataclasses.dataclass(frozen=True)
class Conj:
    left: "FinalCondition"
    right: "FinalCondition"


@dataclasses.dataclass(frozen=True)
class Disj:
    left: "FinalCondition"
    right: "FinalCondition"


@dataclasses.dataclass(frozen=True)
class Neg:
    operand: "FinalCondition"


FinalCondition = Union[Atom, Conj, Disj, Neg]


def condition_atoms(cond: FinalCondition) -> Iterator[Atom]:
    if isinstance(cond, Atom):
        yield cond
    elif isinstance(cond, Neg):
        yield from condition_atoms(cond.operand)
    else:
        yield from condition_atoms(cond.left)
        yield from condition_atoms(cond.right)


def condition_observables(cond: FinalCondition) -> list[Observable]:
    """Observables mentioned by the condition, first occurrence order."""
    seen: list[Observable] = []
    for atom in condition_atoms(cond):
        if atom.observable not in seen:
            seen.append(atom.observable)
    return seen


def evaluate_condition(
    cond: FinalCondition, dialect: Dialect, values: Mapping[str, int]
) -> bool:
    """Evaluate against a label -> value map (one final state)."""
    if isinstance(cond, Atom):
        return values[observable_label(cond.observable, dialect)] == cond.value
    if isinstance(cond, Neg):
        return not evaluate_condition(cond.operand, dialect, values)
    if isinstance(cond, Conj):
        return evaluate_condition(cond.left, dialect, values) and evaluate_condition(
            cond.right, dialect, values
        )
    return evaluate_condition(cond.left, dialect, values) or evaluate_condition(
        cond.right, dialect, values
    )


def map_condition_observables(cond: FinalCondition, fn) -> FinalCondition:
    if isinstance(cond, Atom):
        return Atom(fn(cond.observable), cond.value)
    if isinstance(cond, Neg):
        return Neg(map_condition_observables(cond.operand, fn))
    ctor = Conj if isinstance(cond, Conj) else Disj
    return ctor(
        map_condition_observables(cond.left, fn),
        map_condition_observables(cond.right, fn),
    )


@dataclasses.dataclass
class LitmusTest:
    name: str
    dialect: Dialect
    locations: dict[str, int]
    threads: tuple[Thread, ...]
    final: FinalCondition

    def thread(self, tid: int) -> Thread:
        for t in self.threads:
            if t.tid == tid:
                return t
        raise KeyError(tid)

    def sorted_locations(self) -> list[str]:
        return sorted(self.locations)


_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_.+-]*$")
_LOC_RE = re.compile(r"[a-z][A-Za-z0-9_]*$")
_SRC_REG_RE = re.compile(r"r\d+$")
_ASM_W_RE = re.compile(r"W\d+$")
_ASM_X_RE = re.compile(r"X\d+$")


def _check_value(value: int, what: str) -> None:
    if not (MIN_VALUE <= value <= MAX_VALUE):
        raise ValidationError(
            f"{what} {value} outside supported range {MIN_VALUE}..{MAX_VALUE}"
        )


def _validate_source_stmt(stmt: SourceStmt, declared: set[str], defined: set[str]) -> None:
    if stmt.kind is StmtKind.FENCE:
        if stmt.order not in FENCE_ORDERS:
            raise ValidationError(f"fence cannot use order {stmt.order.value}")
        if stmt.location is not None or stmt.dest is not None or stmt.value is not None:
            raise ValidationError("fence takes no location, value, or register")
        return
    if stmt.location is None:
        raise ValidationError(f"{stmt.kind.value} needs a location")
    if stmt.location not in declared:
        raise ValidationError(f"undeclared location {stmt.location!r}")
    if stmt.kind is StmtKind.LOAD:
        if stmt.order not in LOAD_ORDERS:
            raise ValidationError(f"load cannot use order {stmt.order.value}")
        if stmt.dest is None:
            raise ValidationError("load needs a destination register")
        if stmt.value is not None:
            raise ValidationError("load takes no stored value")
    elif stmt.kind is StmtKind.STORE:
        if stmt.order not in STORE_ORDERS:
            raise ValidationError(f"store cannot use order {stmt.order.value}")
        if stmt.value is None:
            raise ValidationError("store needs a value")
        if stmt.dest is not None:
            raise ValidationError("store defines no register")
        _check_value(stmt.value, "stored value")
    else:  # exchange accepts every order
        if stmt.value is None:
            raise ValidationError("exchange needs a value")
        _check_value(stmt.value, "stored value")
    dest = stmt.defined_register()
    if dest is not None:
        if not _SRC_REG_RE.match(dest):
            raise ValidationError(f"bad source register name {dest!r}")
        if dest in defined:
            raise ValidationError(f"register {dest} defined twice")
        defined.add(dest)


def _validate_asm_instr(
    instr: AsmInstr, bindings: dict[str, str], declared: set[str], defined: set[str]
) -> None:
    m = instr.mnemonic
    if m is Mnemonic.DMB:
        if instr.domain is None:
            raise ValidationError("DMB needs a domain")
        return
    if m is Mnemonic.MOV:
        if instr.dst == ZERO_REGISTER:
            raise ValidationError("MOV to the zero register is not supported")
        if instr.dst is None or instr.imm is None:
            raise ValidationError("MOV needs a register and an immediate")
        _check_value(instr.imm, "immediate")
    elif m in (Mnemonic.LDR, Mnemonic.LDAR):
        if instr.dst == ZERO_REGISTER:
            raise ValidationError(f"{m.value} to the zero register is not supported")
        if instr.dst is None or instr.addr is None:
            raise ValidationError(f"{m.value} needs a register and an address")
    elif m in (Mnemonic.STR, Mnemonic.STLR):
        if instr.src is None or instr.addr is None:
            raise ValidationError(f"{m.value} needs a register and an address")
    else:  # SWP family
        if instr.src is None or instr.dst is None or instr.addr is None:
            raise ValidationError(f"{m.value} needs two registers and an address")
    if instr.addr is not None:
        if not _ASM_X_RE.match(instr.addr):
            raise ValidationError(f"bad address register {instr.addr!r}")
        if instr.addr not in bindings:
            raise ValidationError(f"address register {instr.addr} bound to no location")
        if bindings[instr.addr] not in declared:
            raise ValidationError(f"undeclared location {bindings[instr.addr]!r}")
    for reg in instr.read_registers():
        if reg == ZERO_REGISTER:
            continue
        if not _ASM_W_RE.match(reg):
            raise ValidationError(f"bad register name {reg!r}")
        if reg not in defined:
            raise ValidationError(f"register {reg} read before any definition")
    dest = instr.defined_register()
    if dest is not None:
        if not _ASM_W_RE.match(dest):
            raise ValidationError(f"bad register name {dest!r}")
        defined.add(dest)


def _validate_observable(obs: Observable, test: LitmusTest) -> None:
    if isinstance(obs, MemoryObservable):
        if obs.location not in test.locations:
            raise ValidationError(f"final condition uses undeclared location {obs.location!r}")
        return
    try:
        thread = test.thread(obs.thread)
    except KeyError:
        raise ValidationError(f"final condition names unknown thread P{obs.thread}") from None
    if obs.register not in thread.defined_registers():
        raise ValidationError(
            f"final condition reads register {obs.register} never written by P{obs.thread}"
        )


def validate_test(test: LitmusTest) -> None:
    """Check the structural invariants; raise ValidationError on the first hole.

    Meant both as the last step of parsing and as a sanity net behind
    programmatic construction (generators, lowering).
    """
    if not _NAME_RE.match(test.name):
        raise ValidationError(f"bad test name {test.name!r}")
    if not test.locations:
        raise ValidationError("a test needs at least one location")
    if len(test.locations) > MAX_LOCATIONS:
        raise ValidationError(f"more than {MAX_LOCATIONS} locations")
    for loc, init in test.locations.items():
        if not _LOC_RE.match(loc):
            raise ValidationError(f"bad location name {loc!r}")
        _check_value(init, f"initial value of {loc}")
    if not test.threads:
        raise ValidationError("a test needs at least one thread")
    if len(test.threads) > MAX_THREADS:
        raise ValidationError(f"more than {MAX_THREADS} threads")
    if [t.tid for t in test.threads] != list(range(len(test.threads))):
        raise ValidationError("thread ids must be P0, P1, ... without gaps")
    declared = set(test.locations)
    stmt_limit = (MAX_STATEMENTS_PER_THREAD if test.dialect is Dialect.SOURCE
                  else MAX_INSTRUCTIONS_PER_THREAD)
    for thread in test.threads:
        if len(thread.stmts) > stmt_limit:
            raise ValidationError(
                f"P{thread.tid} has more than {stmt_limit} statements"
            )
        if test.dialect is Dialect.SOURCE and thread.bindings:
            raise ValidationError("source threads carry no address bindings")
        bindings = thread.binding_map()
        for reg, loc in bindings.items():
            if loc not in declared:
                raise ValidationError(f"address register {reg} bound to undeclared {loc!r}")
        defined: set[str] = set()
        for stmt in thread.stmts:
            if test.dialect is Dialect.SOURCE:
                if not isinstance(stmt, SourceStmt):
                    raise ValidationError("asm instruction in a source test")
                _validate_source_stmt(stmt, declared, defined)
            else:
                if not isinstance(stmt, AsmInstr):
                    raise ValidationError("source statement in an asm test")
                _validate_asm_instr(stmt, bindings, declared, defined)
    for atom in condition_atoms(test.final):
        _check_value(atom.value, "final condition value")
        _validate_observable(atom.observable, test)
