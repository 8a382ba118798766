"""Counter transducers: machines whose transitions emit output words.

Supports deterministic transduction, the inverse image of a machine
language under a transducer, and the forward image of the transducer's
domain as a nondeterministic machine over the output alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import AlphabetMismatch, NondeterministicInput, PreconditionViolated
from .machine import (
    EOT, RIGHT, STAY,
    CounterMachine, Transition, _index, all_guards,
    enforce_reversal_control, run_deterministic, validate_machine,
)
from .constructions import _build, _combine_l


@dataclass(frozen=True)
class CounterTransducer:
    machine: CounterMachine
    out_alphabet: tuple


def validate_transducer(t: CounterTransducer) -> list:
    """Structural checks; returns human-readable violations."""
    errs = list(validate_machine(t.machine))
    for sym in t.out_alphabet:
        if not isinstance(sym, str) or len(sym) != 1:
            errs.append(f"output symbol {sym!r} is not a single character")
    out = set(t.out_alphabet)
    for tr in t.machine.transitions:
        for ch in tr.output:
            if ch not in out:
                errs.append(
                    f"transition {tr.src!r} --{tr.symbol}--> emits foreign "
                    f"symbol {ch!r}")
    if t.machine.deterministic:
        for tr in t.machine.transitions:
            if tr.symbol == EOT and tr.src in t.machine.finals:
                errs.append(
                    f"end-of-tape transition out of final state {tr.src!r} "
                    "makes deterministic output ambiguous")
    return errs


def to_null_transducer(t) -> CounterTransducer:
    """Same domain, but every transition emits nothing.

    Accepts a transducer or a bare machine (treated as a transducer whose
    transitions all emit the empty word).  End-of-tape transitions out of
    final states are dropped; runs are already accepted when they first
    reach a final state at the end of input, so the language is unchanged.
    """
    if isinstance(t, CounterMachine):
        t = CounterTransducer(t, ())
    m = t.machine
    transitions = tuple(
        replace(tr, output="")
        for tr in m.transitions
        if not (tr.symbol == EOT and tr.src in m.finals))
    return CounterTransducer(replace(m, transitions=transitions), t.out_alphabet)


def transduce_det(t: CounterTransducer, word: str):
    """Output word for `word`, or None when the input is not accepted."""
    m = t.machine
    if not m.deterministic:
        raise NondeterministicInput("transduce_det needs a deterministic machine")
    problems = [e for e in validate_transducer(t) if "ambiguous" in e]
    if problems:
        raise PreconditionViolated("; ".join(problems))
    trace = run_deterministic(m, word)
    if trace.verdict != "accept":
        return None
    return "".join(tr.output for _cfg, tr in trace.steps if tr is not None)


def empty_word_acceptor(alphabet) -> CounterMachine:
    """Machine accepting exactly the empty word."""
    return CounterMachine(
        "empty_word", 0, 0, frozenset({"q0"}), tuple(alphabet), "q0",
        frozenset({"q0"}), (), False, True, True)


def inverse_apply(t: CounterTransducer, a: CounterMachine) -> CounterMachine:
    """Machine for { w : t(w) is defined and lies in L(a) }.

    The product runs the transducer on the real input.  Emitted letters
    sit in a bounded buffer (a suffix of one output word); the acceptor
    must drain the buffer before the transducer moves again.  A seal move
    at the end of input fixes the moment the acceptor sees its own end of
    input, after which only the acceptor's end-of-input moves run.
    """
    if tuple(a.alphabet) != tuple(t.out_alphabet):
        raise AlphabetMismatch(
            "acceptor alphabet must equal the transducer output alphabet")
    mt = enforce_reversal_control(t.machine)
    ma = enforce_reversal_control(a)
    it, ia = _index(mt), _index(ma)
    kt, ka = mt.k, ma.k
    zt, za = (0,) * kt, (0,) * ka
    in_syms = tuple(mt.alphabet) + (EOT,)
    init = (mt.initial, "", ma.initial, False)
    transitions = []
    seen = {init}
    work = [init]
    while work:
        st = work.pop()
        qt, buf, qa, sealed = st

        def push(sym, guard, dst, move, deltas):
            transitions.append(Transition(st, sym, guard, dst, move, deltas))
            if dst not in seen:
                seen.add(dst)
                work.append(dst)

        if sealed:
            for ga in all_guards(ka):
                for tr in ia.get((qa, EOT), {}).get(ga, ()):
                    for gt in all_guards(kt):
                        push(EOT, gt + ga, (qt, "", tr.dst, True), STAY,
                             zt + tr.deltas)
            continue
        if buf:
            for ga in all_guards(ka):
                for tr in ia.get((qa, buf[0]), {}).get(ga, ()):
                    nbuf = buf[1:] if tr.move == RIGHT else buf
                    for gt in all_guards(kt):
                        for x in in_syms:
                            push(x, gt + ga, (qt, nbuf, tr.dst, False), STAY,
                                 zt + tr.deltas)
            continue
        for sym in in_syms:
            for gt in all_guards(kt):
                for tr in it.get((qt, sym), {}).get(gt, ()):
                    for ga in all_guards(ka):
                        push(sym, gt + ga, (tr.dst, tr.output, qa, False),
                             tr.move, tr.deltas + za)
        if qt in mt.finals:
            for gt in all_guards(kt):
                for ga in all_guards(ka):
                    push(EOT, gt + ga, (qt, "", qa, True), STAY, zt + za)
    finals = {s for s in seen if s[3] and not s[1] and s[2] in ma.finals}
    return _build(
        t.machine.name + "_invapply", kt + ka,
        _combine_l(t.machine.l, a.l), mt.alphabet, init, finals, transitions,
        marked=True, deterministic=False)


def forward_image_ncm(t: CounterTransducer) -> CounterMachine:
    """Machine over the output alphabet for { t(w) : w accepted by t }.

    The input word of the transducer is guessed one symbol at a time;
    each guessed step's emission must match the real input letter by
    letter (buffered between steps).
    """
    mt = enforce_reversal_control(t.machine)
    it = _index(mt)
    kt = mt.k
    out_syms = tuple(t.out_alphabet)
    stay_syms = out_syms + (EOT,)
    init = (mt.initial, "", "r")
    transitions = []
    seen = {init}
    work = [init]
    while work:
        st = work.pop()
        qt, buf, phase = st

        def push(sym, guard, dst, move, deltas):
            transitions.append(Transition(st, sym, guard, dst, move, deltas))
            if dst not in seen:
                seen.add(dst)
                work.append(dst)

        if buf:
            for gt in all_guards(kt):
                push(buf[0], gt, (qt, buf[1:], phase), RIGHT, (0,) * kt)
            continue
        guessable = tuple(mt.alphabet) + (EOT,) if phase == "r" else (EOT,)
        for sym in guessable:
            nphase = "e" if sym == EOT else "r"
            for gt in all_guards(kt):
                for tr in it.get((qt, sym), {}).get(gt, ()):
                    if tr.output:
                        push(tr.output[0], gt, (tr.dst, tr.output[1:], nphase),
                             RIGHT, tr.deltas)
                    else:
                        for x in stay_syms:
                            push(x, gt, (tr.dst, "", nphase), STAY, tr.deltas)
    finals = {s for s in seen if not s[1] and s[0] in mt.finals}
    return _build(
        t.machine.name + "_image", kt, t.machine.l, out_syms, init, finals,
        transitions, deterministic=False)
