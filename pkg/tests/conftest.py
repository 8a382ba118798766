import random

import pytest

from rbcm.corpus import CATALOG, load_corpus
from rbcm.transducer import CounterTransducer

from randgen import machine_pool


@pytest.fixture(scope="session")
def corpus_entries():
    return [load_corpus(name) for name in CATALOG]


@pytest.fixture(scope="session")
def corpus_machines(corpus_entries):
    """All bundled counter machines (transducer unwrapped to its machine)."""
    out = []
    for e in corpus_entries:
        a = e.artifact
        out.append(a.machine if isinstance(a, CounterTransducer) else a)
    return out


@pytest.fixture(scope="session")
def det_pool():
    return machine_pool(1001, 20, deterministic=True)


@pytest.fixture(scope="session")
def nondet_pool():
    return machine_pool(1002, 12, deterministic=False)


@pytest.fixture(scope="session")
def rng():
    return random.Random(7)
