"""Corpus construction and outcome plumbing shared across test modules."""

import dataclasses

from litmusdiff.difftest import translate_outcome
from litmusdiff.execution import MODEL_AARCH64, MODEL_C11, allowed_outcomes
from litmusdiff.litmus import MemoryOrder, StmtKind
from litmusdiff.lowering import dead_register_pass, lower_test
from litmusdiff.testgen import GenParams, Variant, generate_mp_family

# Every variant crossed with a spread of orders per slot.  216 tests, each
# with at most 8 events, so exhaustive enumeration stays cheap.
CORPUS_PARAMS = GenParams(
    variants=(Variant.HISTORIC, Variant.DISCARD, Variant.OBSERVE),
    data_store_orders=(MemoryOrder.RELAXED, MemoryOrder.RELEASE),
    flag_store_orders=(MemoryOrder.RELEASE, MemoryOrder.SEQ_CST),
    flag_op_orders=(MemoryOrder.RELEASE, MemoryOrder.ACQ_REL,
                    MemoryOrder.SEQ_CST),
    fence_orders=(MemoryOrder.ACQUIRE, MemoryOrder.SEQ_CST, None),
    data_load_orders=(MemoryOrder.RELAXED, MemoryOrder.ACQUIRE),
)


def make_corpus():
    return [test for test, _ in generate_mp_family(CORPUS_PARAMS)]


def source_outcomes(test):
    return allowed_outcomes(test, MODEL_C11).outcomes


def lowered_outcomes(test, *, dead=False, legacy=False):
    """AArch64 outcomes of the lowering, translated back to source labels."""
    compiled, mapping = lower_test(test)
    if dead:
        compiled = dead_register_pass(compiled)
    raw = allowed_outcomes(compiled, MODEL_AARCH64,
                           legacy_zero_register=legacy).outcomes
    return frozenset(translate_outcome(o, mapping) for o in raw)


def strengthen(test):
    """The same test with every memory order raised to seq_cst, which is
    legal in every statement slot."""
    threads = []
    for thread in test.threads:
        stmts = tuple(
            dataclasses.replace(s, order=MemoryOrder.SEQ_CST)
            for s in thread.stmts)
        threads.append(dataclasses.replace(thread, stmts=stmts))
    return dataclasses.replace(test, threads=tuple(threads))


def has_fence(test):
    return any(s.kind is StmtKind.FENCE
               for t in test.threads for s in t.stmts)
