"""Parsing and printing for the two litmus dialects.

Both parsers are line oriented: header, init block in braces, one block per
thread, then a single ``exists`` line.  Errors carry 1-based line and column
numbers.  ``render_litmus`` prints a canonical layout; parsing its output
gives back a structurally equal test.
"""

from __future__ import annotations

import re

from .litmus import (
    AsmInstr,
    Atom,
    Conj,
    Dialect,
    Disj,
    DmbDomain,
    FinalCondition,
    LitmusTest,
    MemoryObservable,
    MemoryOrder,
    Mnemonic,
    Neg,
    Observable,
    observable_label,
    ParseError,
    RegisterObservable,
    SourceStmt,
    StmtKind,
    SWP_FAMILY,
    Thread,
    UnsupportedConstructError,
    ZERO_REGISTER,
    validate_test,
)

_ORDER_BY_TOKEN = {f"memory_order_{o.value}": o for o in MemoryOrder}

_BRANCH_KEYWORD_RE = re.compile(r"(for|while|if|do|switch|goto)\b")
_ATOMIC_CALL_RE = re.compile(r"(?:int\s+r\d+\s*=\s*)?(atomic_\w+)\s*\(")

_STORE_RE = re.compile(
    r"atomic_store_explicit\s*\(\s*(\w+)\s*,\s*(-?\d+)\s*,\s*(\w+)\s*\)\s*;$"
)
_LOAD_RE = re.compile(
    r"int\s+(\w+)\s*=\s*atomic_load_explicit\s*\(\s*(\w+)\s*,\s*(\w+)\s*\)\s*;$"
)
_XCHG_RE = re.compile(
    r"(?:int\s+(\w+)\s*=\s*)?atomic_exchange_explicit"
    r"\s*\(\s*(\w+)\s*,\s*(-?\d+)\s*,\s*(\w+)\s*\)\s*;$"
)
_FENCE_RE = re.compile(r"atomic_thread_fence\s*\(\s*(\w+)\s*\)\s*;$")

# The parameter list is optional; P0 { ... } is accepted too.
_SRC_THREAD_RE = re.compile(r"P(\d+)\s*(?:\(([^)]*)\))?\s*\{$")
_PARAM_RE = re.compile(r"atomic_int\s*\*\s*(\w+)$")

_ASM_THREAD_RE = re.compile(r"P(\d+):$")
_MOV_RE = re.compile(r"MOV\s+(\w+)\s*,\s*#(-?\d+)$")
_LDX_RE = re.compile(r"(LDAR|LDR)\s+(\w+)\s*,\s*\[\s*(\w+)\s*\]$")
_STX_RE = re.compile(r"(STLR|STR)\s+(\w+)\s*,\s*\[\s*(\w+)\s*\]$")
_SWP_RE = re.compile(r"(SWPAL|SWPA|SWPL|SWP)\s+(\w+)\s*,\s*(\w+)\s*,\s*\[\s*(\w+)\s*\]$")
_DMB_RE = re.compile(r"DMB\s+(\w+)$")

_INIT_LOC_RE = re.compile(r"(\w+)\s*=\s*(-?\d+)$")
_INIT_BIND_RE = re.compile(r"(\d+)\s*:\s*(\w+)\s*=\s*(\w+)$")

_KNOWN_MNEMONICS = {m.value for m in Mnemonic}

_DMB_DOMAINS = {
    "ISH": DmbDomain.SY,
    "SY": DmbDomain.SY,
    "ISHLD": DmbDomain.LD,
    "LD": DmbDomain.LD,
    "ISHST": DmbDomain.ST,
    "ST": DmbDomain.ST,
}

_W_REG_RE = re.compile(r"W(\d+)$")
_X_REG_RE = re.compile(r"X(\d+)$")


def _column(raw_line: str) -> int:
    stripped = raw_line.lstrip()
    return len(raw_line) - len(stripped) + 1


class _Cursor:
    """Walks the input line by line, remembering positions for errors."""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.index = 0

    def eof(self) -> bool:
        return self.index >= len(self.lines)

    def peek(self) -> str | None:
        """Next non-blank line, without consuming it."""
        while self.index < len(self.lines) and not self.lines[self.index].strip():
            self.index += 1
        if self.eof():
            return None
        return self.lines[self.index]

    def take(self, expectation: str) -> tuple[str, int]:
        line = self.peek()
        if line is None:
            raise ParseError(f"unexpected end of input, expected {expectation}",
                             len(self.lines) or 1)
        self.index += 1
        return line, self.index

    @property
    def line_no(self) -> int:
        return self.index


def parse_litmus(text: str) -> LitmusTest:
    """Parse either dialect, picking by the header keyword."""
    cursor = _Cursor(text)
    line = cursor.peek()
    if line is None:
        raise ParseError("empty input", 1)
    head = line.split(None, 1)[0]
    if head == "C":
        return parse_source(text)
    if head == "AArch64":
        return parse_asm(text)
    raise ParseError(
        f"expected a 'C' or 'AArch64' header, got {head!r}", cursor.index + 1, _column(line)
    )


def _parse_order(token: str, line_no: int, col: int) -> MemoryOrder:
    if token == "memory_order_consume":
        raise UnsupportedConstructError(
            "memory_order_consume is outside the supported fragment", line_no, col
        )
    try:
        return _ORDER_BY_TOKEN[token]
    except KeyError:
        raise ParseError(f"unknown memory order {token!r}", line_no, col) from None


def _parse_header(cursor: _Cursor, keyword: str) -> str:
    line, line_no = cursor.take(f"'{keyword} <name>' header")
    parts = line.split()
    if len(parts) != 2 or parts[0] != keyword:
        raise ParseError(f"expected '{keyword} <name>' header", line_no, _column(line))
    return parts[1]


def _parse_init_entries(cursor: _Cursor) -> list[tuple[str, int, int]]:
    """Collect ``entry ;`` items between braces; each comes with its line."""
    line, line_no = cursor.take("an initial state block in braces")
    stripped = line.strip()
    if not stripped.startswith("{"):
        raise ParseError("expected '{' opening the initial state", line_no, _column(line))
    body_parts = [(stripped[1:], line_no)]
    while "}" not in body_parts[-1][0]:
        line, line_no = cursor.take("'}' closing the initial state")
        body_parts.append((line.strip(), line_no))
    last, last_no = body_parts[-1]
    closing = last.index("}")
    if last[closing + 1:].strip():
        raise ParseError("unexpected text after '}'", last_no, _column(line))
    body_parts[-1] = (last[:closing], last_no)

    entries = []
    for chunk, chunk_line in body_parts:
        for piece in chunk.split(";"):
            piece = piece.strip()
            if piece:
                entries.append((piece, chunk_line, 1))
    return entries


def _parse_source_stmt(raw: str, line_no: int) -> SourceStmt:
    text = raw.strip()
    col = _column(raw)
    if _BRANCH_KEYWORD_RE.match(text):
        raise UnsupportedConstructError(
            "loops and branches are outside the supported fragment", line_no, col
        )

    m = _STORE_RE.match(text)
    if m:
        order = _parse_order(m.group(3), line_no, col + m.start(3))
        return SourceStmt(StmtKind.STORE, order, location=m.group(1), value=int(m.group(2)))
    m = _LOAD_RE.match(text)
    if m:
        order = _parse_order(m.group(3), line_no, col + m.start(3))
        return SourceStmt(StmtKind.LOAD, order, location=m.group(2), dest=m.group(1))
    m = _XCHG_RE.match(text)
    if m:
        order = _parse_order(m.group(4), line_no, col + m.start(4))
        return SourceStmt(
            StmtKind.EXCHANGE, order, location=m.group(2), value=int(m.group(3)),
            dest=m.group(1),
        )
    m = _FENCE_RE.match(text)
    if m:
        order = _parse_order(m.group(1), line_no, col + m.start(1))
        if order is MemoryOrder.RELAXED:
            raise ParseError("a relaxed fence has no effect", line_no,
                             col + m.start(1))
        return SourceStmt(StmtKind.FENCE, order)

    m = _ATOMIC_CALL_RE.match(text)
    if m:
        name = m.group(1)
        if name in ("atomic_store_explicit", "atomic_load_explicit",
                    "atomic_exchange_explicit", "atomic_thread_fence"):
            raise ParseError(f"malformed {name} call", line_no, col)
        raise UnsupportedConstructError(f"unsupported operation {name}", line_no, col)
    raise ParseError("cannot parse statement", line_no, col)


def parse_source(text: str) -> LitmusTest:
    cursor = _Cursor(text)
    name = _parse_header(cursor, "C")

    locations: dict[str, int] = {}
    for entry, line_no, col in _parse_init_entries(cursor):
        m = _INIT_LOC_RE.match(entry)
        if not m:
            raise ParseError(f"cannot parse initial state entry {entry!r}", line_no, col)
        loc = m.group(1)
        if loc in locations:
            raise ParseError(f"location {loc!r} initialized twice", line_no, col)
        locations[loc] = int(m.group(2))

    threads = []
    while True:
        line = cursor.peek()
        if line is None:
            raise ParseError("unexpected end of input, expected exists clause",
                             len(cursor.lines) or 1)
        if line.strip().startswith("exists"):
            break
        line, line_no = cursor.take("a thread block or exists clause")
        m = _SRC_THREAD_RE.match(line.strip())
        if not m:
            raise ParseError("expected 'Pn (...) {' or 'exists (...)'",
                             line_no, _column(line))
        tid = int(m.group(1))
        params = (m.group(2) or "").strip()
        if params:
            for param in params.split(","):
                pm = _PARAM_RE.match(param.strip())
                if not pm:
                    raise ParseError(f"cannot parse parameter {param.strip()!r}",
                                     line_no, _column(line))
                if pm.group(1) not in locations:
                    raise ParseError(f"undeclared location {pm.group(1)!r} in parameters",
                                     line_no, _column(line))
        stmts = []
        while True:
            body, body_no = cursor.take("'}' closing the thread body")
            if body.strip() == "}":
                break
            stmts.append(_parse_source_stmt(body, body_no))
        threads.append(Thread(tid, tuple(stmts)))

    threads.sort(key=lambda t: t.tid)
    final = _parse_exists(cursor, Dialect.SOURCE)
    test = LitmusTest(name, Dialect.SOURCE, locations, tuple(threads), final)
    validate_test(test)
    return test


def _parse_w_reg(token: str, line_no: int, col: int, allow_zero: bool) -> str:
    if token == ZERO_REGISTER:
        if allow_zero:
            return token
        raise ParseError(f"{ZERO_REGISTER} not allowed here", line_no, col)
    m = _W_REG_RE.match(token)
    if not m or int(m.group(1)) > 30:
        raise ParseError(f"bad register {token!r}", line_no, col)
    return token


def _parse_asm_instr(raw: str, line_no: int) -> AsmInstr:
    text = raw.strip()
    col = _column(raw)
    head = text.split(None, 1)[0].rstrip(",")
    if head not in _KNOWN_MNEMONICS:
        raise ParseError(f"unknown mnemonic {head!r}", line_no, col)

    m = _MOV_RE.match(text)
    if m:
        if m.group(1) == ZERO_REGISTER:
            raise ParseError("MOV to the zero register is not supported",
                             line_no, col + m.start(1))
        dst = _parse_w_reg(m.group(1), line_no, col + m.start(1), allow_zero=False)
        return AsmInstr(Mnemonic.MOV, dst=dst, imm=int(m.group(2)))
    m = _LDX_RE.match(text)
    if m:
        if m.group(2) == ZERO_REGISTER:
            raise ParseError(f"{m.group(1)} to the zero register is not supported",
                             line_no, col + m.start(2))
        dst = _parse_w_reg(m.group(2), line_no, col + m.start(2), allow_zero=False)
        return AsmInstr(Mnemonic[m.group(1)], dst=dst, addr=m.group(3))
    m = _STX_RE.match(text)
    if m:
        src = _parse_w_reg(m.group(2), line_no, col + m.start(2), allow_zero=True)
        return AsmInstr(Mnemonic[m.group(1)], src=src, addr=m.group(3))
    m = _SWP_RE.match(text)
    if m:
        src = _parse_w_reg(m.group(2), line_no, col + m.start(2), allow_zero=True)
        dst = _parse_w_reg(m.group(3), line_no, col + m.start(3), allow_zero=True)
        return AsmInstr(Mnemonic[m.group(1)], src=src, dst=dst, addr=m.group(4))
    m = _DMB_RE.match(text)
    if m:
        domain = _DMB_DOMAINS.get(m.group(1))
        if domain is None:
            raise ParseError(f"unknown barrier domain {m.group(1)!r}",
                             line_no, col + m.start(1))
        return AsmInstr(Mnemonic.DMB, domain=domain)
    raise ParseError(f"cannot parse {head} operands", line_no, col)


def parse_asm(text: str) -> LitmusTest:
    cursor = _Cursor(text)
    name = _parse_header(cursor, "AArch64")

    locations: dict[str, int] = {}
    bindings: dict[int, list[tuple[str, str]]] = {}
    for entry, line_no, col in _parse_init_entries(cursor):
        m = _INIT_BIND_RE.match(entry)
        if m:
            tid = int(m.group(1))
            reg = m.group(2)
            if not _X_REG_RE.match(reg):
                raise ParseError(f"bad address register {reg!r}", line_no, col)
            if any(r == reg for r, _ in bindings.get(tid, [])):
                raise ParseError(f"address register {tid}:{reg} bound twice", line_no, col)
            bindings.setdefault(tid, []).append((reg, m.group(3)))
            continue
        m = _INIT_LOC_RE.match(entry)
        if m:
            loc = m.group(1)
            if loc in locations:
                raise ParseError(f"location {loc!r} initialized twice", line_no, col)
            locations[loc] = int(m.group(2))
            continue
        raise ParseError(f"cannot parse initial state entry {entry!r}", line_no, col)

    threads = []
    while True:
        line = cursor.peek()
        if line is None:
            raise ParseError("unexpected end of input, expected exists clause",
                             len(cursor.lines) or 1)
        if line.strip().startswith("exists"):
            break
        line, line_no = cursor.take("a thread block or exists clause")
        m = _ASM_THREAD_RE.match(line.strip())
        if not m:
            raise ParseError("expected 'Pn:' or 'exists (...)'", line_no, _column(line))
        tid = int(m.group(1))
        stmts = []
        while True:
            nxt = cursor.peek()
            if nxt is None or nxt.strip().startswith("exists"):
                break
            if _ASM_THREAD_RE.match(nxt.strip()):
                break
            body, body_no = cursor.take("an instruction")
            stmts.append(_parse_asm_instr(body, body_no))
        thread_bindings = tuple(bindings.get(tid, ()))
        threads.append(Thread(tid, tuple(stmts), thread_bindings))

    threads.sort(key=lambda t: t.tid)
    for tid in bindings:
        if tid not in {t.tid for t in threads}:
            raise ParseError(f"bindings given for missing thread P{tid}", 1)
    final = _parse_exists(cursor, Dialect.ASM)
    test = LitmusTest(name, Dialect.ASM, locations, tuple(threads), final)
    validate_test(test)
    return test


# Final condition expressions.  Tokens: ( ) /\ \/ ~ and atoms 'obs = int'
# where obs is 'P1:r0', '1:W3', or a bare location.

_COND_TOKEN_RE = re.compile(
    r"\s*(/\\|\\/|~|\(|\)|=|[A-Za-z0-9_]+:[A-Za-z0-9_]+|[A-Za-z_]\w*|\d+)"
)


class _CondParser:
    def __init__(self, text: str, line_no: int, offset: int, dialect: Dialect):
        self.text = text
        self.line_no = line_no
        self.offset = offset
        self.dialect = dialect
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _COND_TOKEN_RE.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise ParseError("cannot tokenize condition", line_no,
                                     offset + pos + 1)
                break
            self.tokens.append((m.group(1), offset + m.start(1) + 1))
            pos = m.end()
        self.pos = 0

    def _error(self, message: str) -> ParseError:
        col = self.tokens[self.pos][1] if self.pos < len(self.tokens) else (
            self.offset + len(self.text) + 1)
        return ParseError(message, self.line_no, col)

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def eat(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise self._error(f"expected {expected!r}" if expected else
                              "unexpected end of condition")
        self.pos += 1
        return tok

    def parse(self) -> FinalCondition:
        cond = self.disjunction()
        if self.peek() is not None:
            raise self._error(f"unexpected token {self.peek()!r}")
        return cond

    def disjunction(self) -> FinalCondition:
        node = self.conjunction()
        while self.peek() == "\\/":
            self.eat()
            node = Disj(node, self.conjunction())
        return node

    def conjunction(self) -> FinalCondition:
        node = self.unary()
        while self.peek() == "/\\":
            self.eat()
            node = Conj(node, self.unary())
        return node

    def unary(self) -> FinalCondition:
        tok = self.peek()
        if tok == "~":
            self.eat()
            return Neg(self.unary())
        if tok == "(":
            self.eat()
            node = self.disjunction()
            self.eat(")")
            return node
        return self.atom()

    def atom(self) -> Atom:
        tok = self.peek()
        if tok is None:
            raise self._error("unexpected end of condition")
        obs = self._observable(self.eat())
        self.eat("=")
        value_tok = self.eat()
        if not value_tok.isdigit():
            raise ParseError("expected an integer value", self.line_no,
                             self.tokens[self.pos - 1][1])
        return Atom(obs, int(value_tok))

    def _observable(self, tok: str) -> Observable:
        if ":" in tok:
            left, reg = tok.split(":", 1)
            if self.dialect is Dialect.SOURCE:
                m = re.match(r"P(\d+)$", left)
                if not m:
                    raise self._error(f"bad observable {tok!r}")
            else:
                m = re.match(r"(\d+)$", left)
                if not m:
                    raise self._error(f"bad observable {tok!r}")
            return RegisterObservable(int(m.group(1)), reg)
        if not re.match(r"[A-Za-z_]\w*$", tok):
            raise self._error(f"bad observable {tok!r}")
        return MemoryObservable(tok)


def _parse_exists(cursor: _Cursor, dialect: Dialect) -> FinalCondition:
    line, line_no = cursor.take("an exists clause")
    stripped = line.strip()
    if not stripped.startswith("exists"):
        raise ParseError("expected 'exists (...)'", line_no, _column(line))
    rest = stripped[len("exists"):].strip()
    if not (rest.startswith("(") and rest.endswith(")")):
        raise ParseError("exists clause must be parenthesized", line_no, _column(line))
    inner_offset = line.index("(") + 1
    parser = _CondParser(rest[1:-1], line_no, inner_offset, dialect)
    cond = parser.parse()
    trailing = cursor.peek()
    if trailing is not None:
        raise ParseError("unexpected input after exists clause",
                         cursor.index + 1, _column(trailing))
    return cond


# Rendering.  The layout below is what every tool in this package emits.

_PREC_OR = 0
_PREC_AND = 1
_PREC_UNARY = 2


def render_condition(cond: FinalCondition, dialect: Dialect, _prec: int = _PREC_OR) -> str:
    if isinstance(cond, Atom):
        return f"{observable_label(cond.observable, dialect)} = {cond.value}"
    if isinstance(cond, Neg):
        return f"~({render_condition(cond.operand, dialect, _PREC_OR)})"
    if isinstance(cond, Conj):
        text = (f"{render_condition(cond.left, dialect, _PREC_AND)}"
                f" /\\ {render_condition(cond.right, dialect, _PREC_UNARY)}")
        needs_parens = _prec > _PREC_AND
    else:
        text = (f"{render_condition(cond.left, dialect, _PREC_OR)}"
                f" \\/ {render_condition(cond.right, dialect, _PREC_AND)}")
        needs_parens = _prec > _PREC_OR
    return f"({text})" if needs_parens else text


def _render_source_stmt(stmt: SourceStmt) -> str:
    order = f"memory_order_{stmt.order.value}"
    if stmt.kind is StmtKind.STORE:
        return f"atomic_store_explicit({stmt.location}, {stmt.value}, {order});"
    if stmt.kind is StmtKind.LOAD:
        return f"int {stmt.dest} = atomic_load_explicit({stmt.location}, {order});"
    if stmt.kind is StmtKind.EXCHANGE:
        call = f"atomic_exchange_explicit({stmt.location}, {stmt.value}, {order});"
        if stmt.dest is not None:
            return f"int {stmt.dest} = {call}"
        return call
    return f"atomic_thread_fence({order});"


def _render_asm_instr(instr: AsmInstr) -> str:
    m = instr.mnemonic
    if m is Mnemonic.MOV:
        return f"MOV {instr.dst}, #{instr.imm}"
    if m in (Mnemonic.LDR, Mnemonic.LDAR):
        return f"{m.value} {instr.dst}, [{instr.addr}]"
    if m in (Mnemonic.STR, Mnemonic.STLR):
        return f"{m.value} {instr.src}, [{instr.addr}]"
    if m in SWP_FAMILY:
        return f"{m.value} {instr.src}, {instr.dst}, [{instr.addr}]"
    return f"DMB {instr.domain.value}"


def _reg_index(reg: str) -> int:
    return int(re.sub(r"\D", "", reg) or 0)


def render_litmus(test: LitmusTest) -> str:
    if test.dialect is Dialect.SOURCE:
        lines = [f"C {test.name}", ""]
        init = " ".join(f"{loc} = {val};" for loc, val in sorted(test.locations.items()))
        lines.append("{ " + init + " }")
        params = ", ".join(f"atomic_int* {loc}" for loc in test.sorted_locations())
        for thread in test.threads:
            lines.append("")
            lines.append(f"P{thread.tid} ({params}) {{")
            for stmt in thread.stmts:
                lines.append(f"  {_render_source_stmt(stmt)}")
            lines.append("}")
    else:
        lines = [f"AArch64 {test.name}", "", "{"]
        lines.append("  " + " ".join(
            f"{loc} = {val};" for loc, val in sorted(test.locations.items())))
        for thread in test.threads:
            if thread.bindings:
                ordered = sorted(thread.bindings, key=lambda b: _reg_index(b[0]))
                lines.append("  " + " ".join(
                    f"{thread.tid}:{reg} = {loc};" for reg, loc in ordered))
        lines.append("}")
        for thread in test.threads:
            lines.append("")
            lines.append(f"P{thread.tid}:")
            for instr in thread.stmts:
                lines.append(f"  {_render_asm_instr(instr)}")
    lines.append("")
    lines.append(f"exists ({render_condition(test.final, test.dialect)})")
    return "\n".join(lines) + "\n"
