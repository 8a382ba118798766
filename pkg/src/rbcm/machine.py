"""One-way counter machines with reversal-bounded counters.

A machine has k nonnegative counters.  Each transition is keyed by the
current state, the symbol under the head (a letter or the end-of-tape
marker) and a guard giving the zero/positive status of every counter.
A transition moves the head right or keeps it in place and adds -1, 0
or +1 to each counter.  Acceptance: some reachable configuration has
consumed the whole input and sits in a final state.  Runs that would
take any counter through more than `l` direction reversals are cut off.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .errors import NondeterministicInput, PreconditionViolated

EOT = "$"  # end-of-tape marker as it appears in transition symbols
STAY = "S"
RIGHT = "R"
ZERO = "z"
POS = "p"

# counter direction tags used in reversal budgets
DIR_NONE = "n"
DIR_UP = "u"
DIR_DOWN = "d"


@dataclass(frozen=True)
class Transition:
    src: object
    symbol: str          # letter or EOT
    guard: str           # k chars, each 'z' or 'p'
    dst: object
    move: str            # STAY or RIGHT
    deltas: tuple        # k ints in {-1, 0, +1}
    output: str = ""     # transducer output word; empty for plain machines

    def key(self):
        return (self.src, self.symbol, self.guard)


@dataclass(frozen=True)
class CounterMachine:
    name: str
    k: int
    l: Optional[int]     # reversal budget per counter; None means unbounded
    states: frozenset
    alphabet: tuple      # sorted single-character symbols
    initial: object
    finals: frozenset
    transitions: tuple
    marked: bool         # True: machine may read the end-of-tape marker
    deterministic: bool
    budget_explicit: bool = False

    def status(self, counters) -> str:
        return "".join(POS if c > 0 else ZERO for c in counters)


@dataclass(frozen=True)
class Configuration:
    state: object
    consumed: int        # number of input letters read so far
    counters: tuple
    budgets: tuple       # per counter: (direction tag, reversals used)


@dataclass(frozen=True)
class DivergenceCertificate:
    """Lasso evidence for an infinite run.

    Step indices t1 < t2 in the trace share state, guard pattern and
    budget annotation, consume no input in between, and every counter
    grows by `growth[i] >= 0`; strictly growing counters stay positive
    throughout the window, so the segment repeats forever.
    """

    t1: int
    t2: int
    growth: tuple


@dataclass
class RunTrace:
    steps: list          # [(Configuration, Transition or None), ...]
    verdict: str         # "accept" | "reject" | "diverge"
    certificate: Optional[DivergenceCertificate] = None


def fresh_budgets(k: int) -> tuple:
    return tuple((DIR_NONE, 0) for _ in range(k))


def initial_configuration(m: CounterMachine) -> Configuration:
    return Configuration(m.initial, 0, (0,) * m.k, fresh_budgets(m.k))


def _bump_budget(entry, delta):
    """New (dir, used) after applying delta; None if it cannot happen."""
    d, used = entry
    if delta == 0:
        return entry
    if delta > 0:
        if d == DIR_UP:
            return entry
        if d == DIR_NONE:
            return (DIR_UP, used)
        return (DIR_UP, used + 1)
    if d == DIR_DOWN:
        return entry
    # decrement never fires from DIR_NONE (value would be zero), but be safe
    if d == DIR_NONE:
        return (DIR_DOWN, used)
    return (DIR_DOWN, used + 1)


def apply_deltas(counters, deltas):
    return tuple(c + d for c, d in zip(counters, deltas))


def validate_machine(m: CounterMachine) -> list:
    """Structural checks.  Returns a list of human-readable violations."""
    errs = []
    if m.k < 0:
        errs.append("negative counter count")
    if m.l is not None and m.l < 0:
        errs.append("negative reversal budget")
    if m.initial not in m.states:
        errs.append("initial state not in state set")
    for f in m.finals:
        if f not in m.states:
            errs.append(f"final state {f!r} not in state set")
    seen_syms = set()
    for a in m.alphabet:
        if not isinstance(a, str) or len(a) != 1:
            errs.append(f"alphabet symbol {a!r} is not a single character")
        if a == EOT:
            errs.append("alphabet must not contain the end-of-tape marker")
        if a in seen_syms:
            errs.append(f"duplicate alphabet symbol {a!r}")
        seen_syms.add(a)
    keys = {}
    for t in m.transitions:
        where = f"transition {t.src!r} --{t.symbol}/{t.guard}-->"
        if t.src not in m.states:
            errs.append(f"{where} source not in state set")
        if t.dst not in m.states:
            errs.append(f"{where} target not in state set")
        if t.symbol != EOT and t.symbol not in m.alphabet:
            errs.append(f"{where} symbol not in alphabet")
        if t.symbol == EOT and not m.marked:
            errs.append(f"{where} end-of-tape transition on an unmarked machine")
        if t.symbol == EOT and t.move != STAY:
            errs.append(f"{where} end-of-tape transitions must stay in place")
        if len(t.guard) != m.k or any(g not in (ZERO, POS) for g in t.guard):
            errs.append(f"{where} malformed guard")
        if len(t.deltas) != m.k or any(d not in (-1, 0, 1) for d in t.deltas):
            errs.append(f"{where} malformed counter deltas")
        if t.move not in (STAY, RIGHT):
            errs.append(f"{where} malformed move")
        for g, d in zip(t.guard, t.deltas):
            if g == ZERO and d < 0:
                errs.append(f"{where} decrements a counter guarded zero")
        keys.setdefault(t.key(), 0)
        keys[t.key()] += 1
    if m.deterministic:
        for key, n in keys.items():
            if n > 1:
                errs.append(f"{n} transitions share key {key!r} on a deterministic machine")
    return errs


def _index(m: CounterMachine):
    """(src, symbol) -> guard -> [transitions], cached on the machine."""
    cached = m.__dict__.get("_trans_index")
    if cached is None:
        cached = {}
        for t in m.transitions:
            cached.setdefault((t.src, t.symbol), {}).setdefault(t.guard, []).append(t)
        object.__setattr__(m, "_trans_index", cached)
    return cached


def current_symbol(m: CounterMachine, config: Configuration, word: str) -> str:
    return word[config.consumed] if config.consumed < len(word) else EOT


def applicable_steps(m, config, symbol):
    """All (transition, successor) pairs respecting guards and budgets."""
    guard = m.status(config.counters)
    out = []
    for t in _index(m).get((config.state, symbol), {}).get(guard, ()):
        budgets = []
        ok = True
        for entry, delta in zip(config.budgets, t.deltas):
            nb = _bump_budget(entry, delta)
            if m.l is not None and nb[1] > m.l:
                ok = False
                break
            budgets.append(nb)
        if not ok:
            continue
        succ = Configuration(
            t.dst,
            config.consumed + (1 if t.move == RIGHT else 0),
            apply_deltas(config.counters, t.deltas),
            tuple(budgets),
        )
        out.append((t, succ))
    return out


def step(m: CounterMachine, config: Configuration, word: str) -> list:
    """Successor configurations of `config` while reading `word`."""
    return [c for _, c in applicable_steps(m, config, current_symbol(m, config, word))]


def _lasso_key(m, config):
    # With an unbounded budget the reversal counts never settle, so key
    # on directions only; replay soundness is unaffected.
    if m.l is None:
        budgets = tuple(d for d, _ in config.budgets)
    else:
        budgets = config.budgets
    return (config.state, m.status(config.counters), budgets)


def _find_lasso(segment):
    """Look for a certified repeat at the last entry of the stay segment."""
    key, t2, c2 = segment[-1]
    for pos in range(len(segment) - 1):
        key1, t1, c1 = segment[pos]
        if key1 != key:
            continue
        growth = tuple(b - a for a, b in zip(c1, c2))
        if any(g < 0 for g in growth):
            continue
        ok = True
        for i, g in enumerate(growth):
            if g > 0:
                # counter i must never sit at zero anywhere in [t1, t2]
                if any(entry[2][i] == 0 for entry in segment[pos:]):
                    ok = False
                    break
        if ok:
            return DivergenceCertificate(t1, t2, growth)
    return None


def run_deterministic(m: CounterMachine, word: str) -> RunTrace:
    """Run a deterministic machine, with exact divergence detection."""
    if not m.deterministic:
        raise NondeterministicInput("run_deterministic needs a deterministic machine")
    config = initial_configuration(m)
    steps = []
    # stay segment bookkeeping since the last input-consuming move:
    segment = []        # [(lasso key, trace index, counters)]
    while True:
        idx = len(steps)
        if config.consumed == len(word) and config.state in m.finals:
            steps.append((config, None))
            return RunTrace(steps, "accept")
        segment.append((_lasso_key(m, config), idx, config.counters))
        if len(segment) > 1:
            cert = _find_lasso(segment)
            if cert is not None:
                steps.append((config, None))
                return RunTrace(steps, "diverge", cert)
        options = applicable_steps(m, config, current_symbol(m, config, word))
        if not options:
            steps.append((config, None))
            return RunTrace(steps, "reject")
        if len(options) > 1:
            raise NondeterministicInput(
                f"multiple transitions applicable from {config.state!r}")
        t, succ = options[0]
        steps.append((config, t))
        if t.move == RIGHT:
            segment = []
        config = succ


def accepts(m: CounterMachine, word: str) -> bool:
    return run_deterministic(m, word).verdict == "accept"


def enforce_reversal_control(m: CounterMachine) -> CounterMachine:
    """Push the reversal budget into the finite control.

    States become (state, budget annotation) pairs and transitions that
    would exceed the budget are dropped, so downstream constructions can
    treat the transition relation as the exact behaviour.
    """
    if m.budget_explicit:
        return m
    if m.l is None:
        return replace(m, budget_explicit=True)
    idx = _index(m)
    start = (m.initial, fresh_budgets(m.k))
    states = {start}
    transitions = []
    work = [start]
    symbols = list(m.alphabet) + ([EOT] if m.marked else [])
    while work:
        q, bud = work.pop()
        for sym in symbols:
            for guard, ts in idx.get((q, sym), {}).items():
                for t in ts:
                    nb = []
                    ok = True
                    for entry, delta in zip(bud, t.deltas):
                        e = _bump_budget(entry, delta)
                        if e[1] > m.l:
                            ok = False
                            break
                        nb.append(e)
                    if not ok:
                        continue
                    dst = (t.dst, tuple(nb))
                    if dst not in states:
                        states.add(dst)
                        work.append(dst)
                    transitions.append(Transition(
                        (q, bud), t.symbol, t.guard, dst, t.move, t.deltas,
                        t.output))
    finals = frozenset(s for s in states if s[0] in m.finals)
    return CounterMachine(
        name=m.name + "_rc",
        k=m.k,
        l=m.l,
        states=frozenset(states),
        alphabet=m.alphabet,
        initial=start,
        finals=finals,
        transitions=tuple(transitions),
        marked=m.marked,
        deterministic=m.deterministic,
        budget_explicit=True,
    )


def all_guards(k: int) -> tuple:
    return tuple("".join(g) for g in itertools.product(ZERO + POS, repeat=k))


def _fresh_state(states, base):
    cand = base
    n = 0
    while cand in states:
        n += 1
        cand = f"{base}{n}"
    return cand


def normalize(m: CounterMachine, modes) -> CounterMachine:
    """Apply normalisations in a fixed order.

    strip_eot          -- drop end-of-tape transitions, mark the machine unmarked
    no_stay_into_final -- retarget mid-input stay moves into finals at
                          non-final twins with identical behaviour
    totalize_dead_state-- route every missing (state, letter, guard) to a
                          non-final right-looping sink
    """
    modes = set(modes)
    bad = modes - {"strip_eot", "no_stay_into_final", "totalize_dead_state"}
    if bad:
        raise ValueError(f"unknown normalize modes {sorted(bad)}")
    states = set(m.states)
    finals = set(m.finals)
    transitions = list(m.transitions)
    marked = m.marked
    initial = m.initial

    if "strip_eot" in modes:
        transitions = [t for t in transitions if t.symbol != EOT]
        marked = False

    if "no_stay_into_final" in modes:
        if not m.deterministic:
            raise PreconditionViolated("no_stay_into_final needs a deterministic machine")
        need_twin = {t.dst for t in transitions
                     if t.move == STAY and t.symbol != EOT and t.dst in finals}
        twins = {f: ("nsif", f) for f in need_twin}
        extra = []
        for f, tw in twins.items():
            states.add(tw)
            for t in transitions:
                if t.src == f:
                    extra.append(replace(t, src=tw))
        transitions.extend(extra)
        transitions = [
            replace(t, dst=twins[t.dst])
            if t.move == STAY and t.symbol != EOT and t.dst in twins else t
            for t in transitions
        ]

    if "totalize_dead_state" in modes:
        dead = _fresh_state(states, "_dead")
        states.add(dead)
        have = {(t.src, t.symbol, t.guard) for t in transitions}
        for q in sorted(states, key=repr):
            for sym in m.alphabet:
                for g in all_guards(m.k):
                    if (q, sym, g) not in have:
                        transitions.append(Transition(q, sym, g, dead, RIGHT, (0,) * m.k))

    return replace(
        m,
        states=frozenset(states),
        finals=frozenset(finals),
        transitions=tuple(transitions),
        marked=marked,
        initial=initial,
    )


def _guard_after(guard_char, delta):
    """Possible statuses of one counter after applying delta under guard_char."""
    if guard_char == ZERO:
        return [POS] if delta > 0 else [ZERO]
    if delta < 0:
        return [ZERO, POS]
    return [POS]


def stay_acyclic_check(m: CounterMachine) -> bool:
    """True if the stay graph over (state, guard) nodes has no cycle.

    Conservative: True implies every stay run terminates.  End-of-tape
    stays are included.
    """
    adj = {}
    for t in m.transitions:
        if t.move != STAY:
            continue
        src = (t.src, t.guard)
        for g in itertools.product(*(_guard_after(gc, d)
                                     for gc, d in zip(t.guard, t.deltas))):
            adj.setdefault(src, set()).add((t.dst, "".join(g)))
    WHITE, GREY, BLACK = 0, 1, 2
    color = {}
    for root in list(adj):
        if color.get(root, WHITE) != WHITE:
            continue
        stack = [(root, iter(adj.get(root, ())))]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                c = color.get(nxt, WHITE)
                if c == GREY:
                    return False
                if c == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(adj.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return True
