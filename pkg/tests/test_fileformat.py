import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbcm.corpus import CATALOG, corpus_text
from rbcm.errors import ParseError
from rbcm.fileformat import parse_machine, serialize_machine
from rbcm.transducer import CounterTransducer

from randgen import machine_pool

GOOD = """\
machine demo
kind dcm
acceptance marked
counters 1
reversals 1
alphabet a b
states s0 f
initial s0
final f
trans s0 a * -> s0 R +1
trans s0 $ z -> f S 0
"""


def test_parse_basic_fields():
    m = parse_machine(GOOD)
    assert m.name == "demo" and m.k == 1 and m.l == 1
    assert m.marked and m.deterministic
    assert m.alphabet == ("a", "b")
    # `*` expanded to both guards
    assert sorted(t.guard for t in m.transitions if t.symbol == "a") == ["p", "z"]


def test_round_trip_is_identity_on_corpus_files():
    for name in CATALOG:
        first = serialize_machine(parse_machine(corpus_text(name)))
        second = serialize_machine(parse_machine(first))
        assert first == second, name


def test_comments_and_blank_lines_ignored():
    text = "# heading\n\n" + GOOD.replace("final f", "final f\n# trailing note")
    assert serialize_machine(parse_machine(text)) == serialize_machine(parse_machine(GOOD))


def _expect_parse_error(text, fragment, line=None):
    with pytest.raises(ParseError) as exc:
        parse_machine(text)
    assert fragment in str(exc.value)
    if line is not None:
        assert exc.value.line == line


def test_unknown_state_is_positioned_parse_error():
    bad = GOOD.replace("trans s0 a * -> s0 R +1", "trans s0 a * -> nowhere R +1")
    _expect_parse_error(bad, "unknown state", line=10)


def test_nondeterministic_transitions_under_kind_dcm_rejected():
    bad = GOOD + "trans s0 a z -> f R 0\n"
    _expect_parse_error(bad, "nondeterministic")


def test_kind_ncm_forces_nondeterministic_flag():
    m = parse_machine(GOOD.replace("kind dcm", "kind ncm"))
    assert not m.deterministic


def test_assorted_parse_errors():
    _expect_parse_error(GOOD.replace("kind dcm", "kind dfa"), "kind must be")
    _expect_parse_error(GOOD.replace("acceptance marked", "acceptance maybe"), "acceptance")
    _expect_parse_error(GOOD.replace("counters 1", "counters -2"), "counters")
    _expect_parse_error(GOOD.replace("reversals 1", "reversals many"), "reversals")
    _expect_parse_error(GOOD + "counters 2\n", "duplicate")
    _expect_parse_error(GOOD + "outalphabet a\n", "only allowed for transducers")
    _expect_parse_error("\n".join(GOOD.splitlines()[1:]), "missing machine")
    _expect_parse_error(GOOD.replace("-> s0 R +1", "-> s0 R"), "counter deltas")
    _expect_parse_error(GOOD.replace("* -> s0 R +1", "q -> s0 R +1"), "guard")


def test_zero_counter_machines_use_dash_placeholders():
    text = corpus_text("pf_ab")
    m = parse_machine(text)
    assert m.k == 0
    assert all(t.guard == "" and t.deltas == () for t in m.transitions)
    assert 'trans q0 a - -> q1 R -' in serialize_machine(m)


def test_transducer_outputs_quoted_including_empty():
    text = corpus_text("T_shuffle")
    t = parse_machine(text)
    assert isinstance(t, CounterTransducer)
    s = serialize_machine(t)
    assert 'output ""' in s and 'output "a"' in s
    assert serialize_machine(parse_machine(s)) == s


def test_reversals_inf_round_trips():
    m = parse_machine(GOOD.replace("reversals 1", "reversals inf"))
    assert m.l is None
    assert "reversals inf" in serialize_machine(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_identity_on_generated_machines(seed):
    (m,) = machine_pool(seed, 1)
    first = serialize_machine(m)
    again = serialize_machine(parse_machine(first))
    assert first == again
