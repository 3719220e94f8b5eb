"""Model-level laws, checked over the generated corpus and random tests.

Four families: interleaving outcomes are always allowed, strengthening
memory orders never adds behaviour, the dead-register rewrite never removes
behaviour, and the candidate enumerator agrees with a brute-force oracle.
"""

import pytest
from hypothesis import given, settings, strategies as st

import naive_oracle
import support
from litmusdiff.execution import (
    allowed_outcomes,
    build_events,
    enumerate_candidates,
    sc_oracle_outcomes,
)
from litmusdiff.litmus import (
    Atom,
    Dialect,
    FENCE_ORDERS,
    LOAD_ORDERS,
    LitmusTest,
    MemoryObservable,
    MemoryOrder,
    SourceStmt,
    StmtKind,
    STORE_ORDERS,
    Thread,
    validate_test,
)
from litmusdiff.lowering import dead_register_pass, lower_test
from litmusdiff.syntax import parse_litmus, render_litmus

CORPUS = support.make_corpus()
IDS = [t.name for t in CORPUS]


@pytest.mark.parametrize("test", CORPUS, ids=IDS)
def test_interleavings_allowed_by_source_model(test):
    sc = sc_oracle_outcomes(test).outcomes
    assert sc <= support.source_outcomes(test)


@pytest.mark.parametrize("test", CORPUS, ids=IDS)
def test_interleavings_allowed_by_lowered_test(test):
    sc = sc_oracle_outcomes(test).outcomes
    assert sc <= support.lowered_outcomes(test)


@pytest.mark.parametrize("test", CORPUS, ids=IDS)
def test_strengthening_never_enlarges(test):
    weak = support.source_outcomes(test)
    strong = support.source_outcomes(support.strengthen(test))
    assert strong <= weak


@pytest.mark.parametrize("test", CORPUS, ids=IDS)
def test_dead_register_rewrite_never_shrinks(test):
    plain = support.lowered_outcomes(test)
    rewritten = support.lowered_outcomes(test, dead=True)
    assert plain <= rewritten


def candidate_fingerprints(test):
    graph = build_events(test)
    return {
        naive_oracle.fingerprint(ex.rf, ex.co, ex.values)
        for ex in enumerate_candidates(graph)
    }


def naive_fingerprints(test):
    return {
        naive_oracle.fingerprint(rf, co, values)
        for rf, co, values, _ in naive_oracle.naive_candidates(test)
    }


@pytest.mark.parametrize("test", CORPUS, ids=IDS)
def test_enumeration_matches_brute_force(test):
    assert candidate_fingerprints(test) == naive_fingerprints(test)
    compiled, _ = lower_test(test)
    assert candidate_fingerprints(compiled) == naive_fingerprints(compiled)


# random source tests, kept small enough to enumerate instantly

_VALUES = st.integers(0, 7)
_STORE_CHOICES = tuple(o for o in MemoryOrder if o in STORE_ORDERS)
_LOAD_CHOICES = tuple(o for o in MemoryOrder if o in LOAD_ORDERS)
_FENCE_CHOICES = tuple(o for o in MemoryOrder if o in FENCE_ORDERS)


@st.composite
def _threads(draw, tid, locations, max_stmts):
    n = draw(st.integers(1, max_stmts))
    stmts = []
    regs = 0
    for _ in range(n):
        kind = draw(st.sampled_from(list(StmtKind)))
        if kind is StmtKind.STORE:
            stmts.append(SourceStmt(
                kind, draw(st.sampled_from(_STORE_CHOICES)),
                location=draw(st.sampled_from(locations)),
                value=draw(_VALUES)))
        elif kind is StmtKind.LOAD:
            stmts.append(SourceStmt(
                kind, draw(st.sampled_from(_LOAD_CHOICES)),
                location=draw(st.sampled_from(locations)),
                dest=f"r{regs}"))
            regs += 1
        elif kind is StmtKind.EXCHANGE:
            dest = draw(st.sampled_from((None, f"r{regs}")))
            if dest is not None:
                regs += 1
            stmts.append(SourceStmt(
                kind, draw(st.sampled_from(tuple(MemoryOrder))),
                location=draw(st.sampled_from(locations)),
                value=draw(_VALUES), dest=dest))
        else:
            stmts.append(SourceStmt(
                kind, draw(st.sampled_from(_FENCE_CHOICES))))
    return Thread(tid, tuple(stmts))


@st.composite
def small_source_tests(draw, max_locations=2, max_stmts=3):
    names = ("x", "y")[:draw(st.integers(1, max_locations))]
    locations = {name: draw(_VALUES) for name in names}
    threads = tuple(
        draw(_threads(tid, names, max_stmts))
        for tid in range(draw(st.integers(1, 2)))
    )
    final = Atom(MemoryObservable(draw(st.sampled_from(names))),
                 draw(_VALUES))
    test = LitmusTest("gen", Dialect.SOURCE, locations, threads, final)
    validate_test(test)
    return test


@settings(max_examples=60, deadline=None)
@given(small_source_tests())
def test_render_parse_round_trip(test):
    text = render_litmus(test)
    assert parse_litmus(text) == test


@settings(max_examples=60, deadline=None)
@given(small_source_tests(max_locations=1))
def test_single_location_model_collapses_to_interleavings(test):
    # with one location, coherence plus atomicity admit exactly the
    # interleaving outcomes
    assert allowed_outcomes(test, "c11").outcomes \
        == sc_oracle_outcomes(test).outcomes


@settings(max_examples=40, deadline=None)
@given(small_source_tests(max_stmts=2))
def test_enumeration_matches_brute_force_on_random_tests(test):
    assert candidate_fingerprints(test) == naive_fingerprints(test)
