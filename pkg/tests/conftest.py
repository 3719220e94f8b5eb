import pytest

import support
from litmusdiff import golden_path, parse_litmus
from litmusdiff.lowering import Mapping


def read_golden(name):
    return golden_path(name).read_text()


@pytest.fixture(scope="session")
def discard_source():
    return parse_litmus(read_golden("mp-xchg-discard.litmus"))


@pytest.fixture(scope="session")
def compiled_w15():
    return parse_litmus(read_golden("mp-xchg-discard-compiled-w15.litmus"))


@pytest.fixture(scope="session")
def compiled_wzr():
    return parse_litmus(read_golden("mp-xchg-discard-compiled-wzr.litmus"))


@pytest.fixture(scope="session")
def golden_mapping():
    import json
    raw = json.loads(read_golden("mp-xchg-discard-compiled.mapping.json"))
    return Mapping.from_json_dict(raw)


@pytest.fixture(scope="session")
def corpus():
    return support.make_corpus()
