"""Plain-text format for machines and transducers.

Layout (one directive per line; `#` starts a comment only at the start
of a line; blank lines are ignored):

    machine <name>
    kind dcm | ncm | transducer
    acceptance marked | unmarked
    counters <k>
    reversals <l> | inf
    alphabet <sym> <sym> ...
    outalphabet <sym> ...          (transducers only)
    states <name> <name> ...
    initial <name>
    final [<name> ...]
    trans <src> <sym> <guard> -> <dst> S|R <delta> ... [output "<word>"]

The end-of-tape marker is written `$`.  A guard is one character per
counter: `z` (zero), `p` (positive) or `*` (either; the line expands to
all combinations).  With zero counters both the guard and the delta list
are written as a single `-`.
"""

from __future__ import annotations

import itertools

from .errors import ParseError
from .machine import EOT, POS, RIGHT, STAY, ZERO, CounterMachine, Transition
from .transducer import CounterTransducer

_HEADERS = ("machine", "kind", "acceptance", "counters", "reversals",
            "alphabet", "outalphabet", "states", "initial", "final")


def _expand_guard(guard, k, line):
    if k == 0:
        if guard != "-":
            raise ParseError(line, f"guard must be '-' with zero counters, got {guard!r}")
        return [""]
    if len(guard) != k:
        raise ParseError(line, f"guard {guard!r} needs {k} characters")
    choices = []
    for ch in guard:
        if ch == ZERO or ch == POS:
            choices.append((ch,))
        elif ch == "*":
            choices.append((ZERO, POS))
        else:
            raise ParseError(line, f"bad guard character {ch!r}")
    return ["".join(c) for c in itertools.product(*choices)]


def _parse_trans(tokens, k, line):
    if len(tokens) < 6 or tokens[3] != "->":
        raise ParseError(line, "expected: trans <src> <sym> <guard> -> <dst> S|R <deltas>")
    src, sym, guard, _arrow, dst, move = tokens[:6]
    rest = tokens[6:]
    if len(sym) != 1:
        raise ParseError(line, f"symbol {sym!r} must be a single character")
    if move not in (STAY, RIGHT):
        raise ParseError(line, f"move must be S or R, got {move!r}")
    if k == 0:
        if not rest or rest[0] != "-":
            raise ParseError(line, "expected '-' as the delta list with zero counters")
        deltas = ()
        rest = rest[1:]
    else:
        if len(rest) < k:
            raise ParseError(line, f"expected {k} counter deltas")
        try:
            deltas = tuple(int(x) for x in rest[:k])
        except ValueError:
            raise ParseError(line, f"bad counter delta in {rest[:k]!r}") from None
        rest = rest[k:]
    output = ""
    if rest:
        if len(rest) != 2 or rest[0] != "output":
            raise ParseError(line, f"unexpected trailing tokens {rest!r}")
        word = rest[1]
        if len(word) < 2 or word[0] != '"' or word[-1] != '"':
            raise ParseError(line, "output word must be double-quoted")
        output = word[1:-1]
    guards = _expand_guard(guard, k, line)
    return [Transition(src, sym, g, dst, move, deltas, output) for g in guards]


def parse_machine(text: str):
    """Parse the text format; returns a CounterMachine or CounterTransducer."""
    fields = {}
    trans_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("#"):
            continue
        tokens = raw.split()
        if not tokens:
            continue
        head = tokens[0]
        if head == "trans":
            trans_lines.append((lineno, tokens[1:]))
        elif head in _HEADERS:
            if head in fields:
                raise ParseError(lineno, f"duplicate {head} line")
            fields[head] = (lineno, tokens[1:])
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")

    def need(name):
        if name not in fields:
            raise ParseError(0, f"missing {name} line")
        return fields[name]

    ln, vals = need("machine")
    if len(vals) != 1:
        raise ParseError(ln, "machine line needs exactly one name")
    name = vals[0]
    ln, vals = fields.get("kind", (0, ["ncm"]))
    if vals not in (["dcm"], ["ncm"], ["transducer"]):
        raise ParseError(ln, f"kind must be dcm, ncm or transducer, got {vals!r}")
    kind = vals[0]
    ln, vals = need("acceptance")
    if vals not in (["marked"], ["unmarked"]):
        raise ParseError(ln, "acceptance must be marked or unmarked")
    marked = vals == ["marked"]
    ln, vals = need("counters")
    try:
        k = int(vals[0]) if len(vals) == 1 else None
    except ValueError:
        k = None
    if k is None or k < 0:
        raise ParseError(ln, "counters needs one non-negative integer")
    ln, vals = need("reversals")
    if vals == ["inf"]:
        l = None
    else:
        try:
            l = int(vals[0]) if len(vals) == 1 else None
        except ValueError:
            l = None
        if l is None or l < 0:
            raise ParseError(ln, "reversals needs one non-negative integer or inf")
    ln, vals = need("alphabet")
    for sym in vals:
        if len(sym) != 1:
            raise ParseError(ln, f"alphabet symbol {sym!r} must be a single character")
        if sym == EOT:
            raise ParseError(ln, "the end-of-tape marker cannot be an input symbol")
    alphabet = tuple(vals)
    ln, vals = need("states")
    if not vals:
        raise ParseError(ln, "states line needs at least one name")
    states = frozenset(vals)
    ln, vals = need("initial")
    if len(vals) != 1:
        raise ParseError(ln, "initial line needs exactly one name")
    initial = vals[0]
    _ln, vals = need("final")
    finals = frozenset(vals)

    transitions = []
    for lineno, tokens in trans_lines:
        for t in _parse_trans(tokens, k, lineno):
            if t.src not in states:
                raise ParseError(lineno, f"unknown state {t.src!r}")
            if t.dst not in states:
                raise ParseError(lineno, f"unknown state {t.dst!r}")
            transitions.append(t)
    keys = [t.key() for t in transitions]
    keys_unique = len(keys) == len(set(keys))
    if kind == "dcm" and not keys_unique:
        raise ParseError(0, "kind dcm but transitions are nondeterministic")
    deterministic = keys_unique if kind == "transducer" else kind == "dcm"
    m = CounterMachine(
        name=name, k=k, l=l, states=states, alphabet=alphabet,
        initial=initial, finals=finals, transitions=tuple(transitions),
        marked=marked, deterministic=deterministic)
    if kind == "transducer":
        if "outalphabet" not in fields:
            raise ParseError(0, "transducers need an outalphabet line")
        ln, vals = fields["outalphabet"]
        for sym in vals:
            if len(sym) != 1:
                raise ParseError(ln, f"output symbol {sym!r} must be a single character")
        return CounterTransducer(m, tuple(vals))
    if "outalphabet" in fields:
        raise ParseError(fields["outalphabet"][0],
                         "outalphabet is only allowed for transducers")
    return m


def _state_names(m: CounterMachine):
    """Stable printable names; composite states get sequential names."""
    plain = all(isinstance(q, str) and q and not any(c.isspace() for c in q)
                for q in m.states)
    order = sorted(m.states, key=repr)
    if plain:
        return {q: q for q in order}
    return {q: f"s{i}" for i, q in enumerate(order)}


def serialize_machine(obj) -> str:
    """Canonical text form of a machine or transducer."""
    if isinstance(obj, CounterTransducer):
        m, out_alphabet = obj.machine, obj.out_alphabet
    else:
        m, out_alphabet = obj, None
    names = _state_names(m)
    lines = [
        f"machine {m.name if m.name and not any(c.isspace() for c in m.name) else 'machine'}",
        f"kind {'transducer' if out_alphabet is not None else ('dcm' if m.deterministic else 'ncm')}",
        f"acceptance {'marked' if m.marked else 'unmarked'}",
        f"counters {m.k}",
        f"reversals {'inf' if m.l is None else m.l}",
        "alphabet " + " ".join(m.alphabet),
    ]
    if out_alphabet is not None:
        lines.append("outalphabet " + " ".join(out_alphabet))
    lines.append("states " + " ".join(sorted(names.values())))
    lines.append(f"initial {names[m.initial]}")
    lines.append(("final " + " ".join(sorted(names[f] for f in m.finals))).rstrip())
    body = []
    for t in m.transitions:
        guard = t.guard if m.k else "-"
        deltas = " ".join(str(d) for d in t.deltas) if m.k else "-"
        line = (f"trans {names[t.src]} {t.symbol} {guard} -> "
                f"{names[t.dst]} {t.move} {deltas}")
        if t.output:
            line += f' output "{t.output}"'
        elif out_alphabet is not None:
            line += ' output ""'
        body.append(line)
    lines.extend(sorted(set(body)))
    return "\n".join(lines) + "\n"
