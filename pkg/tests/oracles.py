"""Independent reference implementations used as test oracles.

`naive_member` is a breadth-first configuration search written from the
acceptance definition alone; it shares no code with the engine under
test.  It is exact for machines whose stay transitions never increase a
counter (all bundled and generated machines satisfy this), because then
counter values are bounded by the word length and the configuration
space is finite.
"""

from __future__ import annotations

import itertools
from collections import deque

from rbcm.machine import DIR_DOWN, DIR_NONE, DIR_UP, EOT, RIGHT, STAY


def words_upto(alphabet, max_len):
    for n in range(max_len + 1):
        for tup in itertools.product(sorted(alphabet), repeat=n):
            yield "".join(tup)


def _bump(entry, delta):
    d, used = entry
    if delta == 0:
        return entry
    want = DIR_UP if delta > 0 else DIR_DOWN
    if d == want:
        return entry
    if d == DIR_NONE:
        return (want, used)
    return (want, used + 1)


def naive_member(m, word, node_cap=2_000_000):
    """Breadth-first search for an accepting configuration."""
    for t in m.transitions:
        if t.move == STAY and any(d > 0 for d in t.deltas):
            raise ValueError("oracle needs stay transitions with deltas <= 0")
    start = (m.initial, 0, (0,) * m.k, ((DIR_NONE, 0),) * m.k)
    seen = {start}
    queue = deque([start])
    nodes = 0
    while queue:
        state, pos, counters, budgets = queue.popleft()
        if pos == len(word) and state in m.finals:
            return True
        nodes += 1
        if nodes > node_cap:
            raise RuntimeError("oracle node budget exceeded")
        symbol = word[pos] if pos < len(word) else EOT
        for t in m.transitions:
            if t.src != state or t.symbol != symbol:
                continue
            if any((g == "z") != (c == 0) for g, c in zip(t.guard, counters)):
                continue
            nb = tuple(_bump(e, d) for e, d in zip(budgets, t.deltas))
            if m.l is not None and any(u > m.l for _, u in nb):
                continue
            nxt = (
                t.dst,
                pos + (1 if t.move == RIGHT else 0),
                tuple(c + d for c, d in zip(counters, t.deltas)),
                nb,
            )
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def naive_language(m, max_len):
    return {w for w in words_upto(m.alphabet, max_len) if naive_member(m, w)}


def concat_language(l1, l2, max_len):
    return {u + v for u in l1 for v in l2 if len(u) + len(v) <= max_len}


def is_prefix_free(language):
    words = sorted(language)
    for i, u in enumerate(words):
        for v in words[i + 1:]:
            if u != v and v.startswith(u):
                return False
    return True


def dfa_member(d, word):
    q = d.initial
    for ch in word:
        q = d.delta.get((q, ch))
        if q is None:
            return False
    return q in d.finals


def dfa_language(d, max_len):
    return {w for w in words_upto(d.alphabet, max_len) if dfa_member(d, w)}
