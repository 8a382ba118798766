"""Seeded random machine generator for the test suites.

Machines have at most 4 states, at most 2 counters, reversal budget 1
and an alphabet of at most 2 letters.  Stay transitions never increase a
counter, which keeps the naive oracle exact and rules out unbounded
stay pumping.
"""

from __future__ import annotations

import random

from rbcm.machine import (
    EOT,
    POS,
    RIGHT,
    STAY,
    CounterMachine,
    Transition,
    all_guards,
    validate_machine,
)


def rand_machine(rng: random.Random, *, max_states=4, max_k=2, alphabet="ab",
                 deterministic=True, marked=None, name=None) -> CounterMachine:
    n = rng.randint(1, max_states)
    k = rng.randint(0, max_k)
    if marked is None:
        marked = rng.random() < 0.5
    states = tuple(f"q{i}" for i in range(n))
    finals = frozenset(q for q in states if rng.random() < 0.4)
    if not finals:
        finals = frozenset({rng.choice(states)})
    symbols = list(alphabet) + ([EOT] if marked else [])
    transitions = []
    for src in states:
        for sym in symbols:
            for guard in all_guards(k):
                fanout = 0
                if deterministic:
                    if rng.random() < 0.8:
                        fanout = 1
                else:
                    fanout = rng.choice((0, 1, 1, 2))
                seen = set()
                for _ in range(fanout):
                    dst = rng.choice(states)
                    if sym == EOT:
                        move = STAY
                    else:
                        move = RIGHT if rng.random() < 0.85 else STAY
                    deltas = []
                    for i in range(k):
                        if move == STAY:
                            pool = (0, 0, -1) if guard[i] == POS else (0,)
                        else:
                            pool = (0, 1, -1, 0) if guard[i] == POS else (0, 1, 0)
                        deltas.append(rng.choice(pool))
                    t = Transition(src, sym, guard, dst, move, tuple(deltas))
                    if (t.dst, t.move, t.deltas) in seen:
                        continue
                    seen.add((t.dst, t.move, t.deltas))
                    transitions.append(t)
    m = CounterMachine(
        name=name or f"rand{rng.randint(0, 10**6)}",
        k=k, l=1, states=frozenset(states), alphabet=tuple(alphabet),
        initial=states[0], finals=finals, transitions=tuple(transitions),
        marked=marked, deterministic=deterministic)
    assert validate_machine(m) == [], validate_machine(m)
    return m


def machine_pool(seed, count, **kwargs):
    rng = random.Random(seed)
    return [rand_machine(rng, name=f"rand_{seed}_{i}", **kwargs)
            for i in range(count)]
