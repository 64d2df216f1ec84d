"""Circuit generators for property tests, the acceptance suite and benchmarks.

Split circuits here always have one encoder per secret and one decoded
output, which is the shape tables are defined for.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterator

from .circuit import Circuit, Decoder, Encoder, Gate

BINARY = ("XOR", "AND", "OR")


def _split_frame(n: int, secrets: int, extra: int, publics: int):
    ps = tuple(f"p{i + 1}" for i in range(publics))
    ks = tuple(f"k{i + 1}" for i in range(secrets))
    encs, rs = [], []
    for k in ks:
        r = tuple(f"r_{k}_{i + 1}" for i in range(n))
        encs.append(Encoder(k, r, tuple(f"{k}_{i + 1}" for i in range(n + 1))))
        rs.extend(r)
    xs = tuple(f"q{i + 1}" for i in range(extra))
    wires = list(ps) + [s for e in encs for s in e.shares] + list(xs)
    return ps, ks, tuple(rs) + xs, tuple(encs), wires


def random_split_circuit(rng: random.Random, n: int, secrets: int = 1, extra: int = 0, gates: int = 4,
                         publics: int = 0, name: str = "rand") -> Circuit:
    """A random single-output split circuit of order n."""
    ps, ks, rs, encs, wires = _split_frame(n, secrets, extra, publics)
    gs = []
    for i in range(gates):
        label = f"g{i + 1}"
        if rng.random() < 0.15:
            gs.append(Gate(label, "NOT", (rng.choice(wires),)))
        else:
            gs.append(Gate(label, rng.choice(BINARY), (rng.choice(wires), rng.choice(wires))))
        wires.append(label)
    pool = [g.label for g in gs]
    if len(pool) < n + 1:
        pool = wires
    splits = tuple(rng.sample(pool, n + 1))
    return Circuit(name, ps, ks, rs, encs, tuple(gs), (Decoder("o", splits),), ("o",))


def enumerate_split_circuits(n: int, secrets: int, extra: int, gates: int, publics: int = 0) -> Iterator[Circuit]:
    """Every circuit with exactly ``gates`` gates, up to operand order of commutative gates.

    Gates read any earlier wire; the decoder reads any n+1 distinct wires
    (unordered, since decoding XORs them).
    """
    ps, ks, rs, encs, base = _split_frame(n, secrets, extra, publics)
    count = itertools.count()

    def rec(wires: list[str], gs: list[Gate]):
        if len(gs) == gates:
            for splits in itertools.combinations(wires, n + 1):
                yield Circuit(f"enum{next(count)}", ps, ks, rs, encs, tuple(gs), (Decoder("o", splits),), ("o",))
            return
        label = f"g{len(gs) + 1}"
        for a in wires:
            yield from rec(wires + [label], gs + [Gate(label, "NOT", (a,))])
        for op in BINARY:
            for a, b in itertools.combinations_with_replacement(wires, 2):
                yield from rec(wires + [label], gs + [Gate(label, op, (a, b))])

    yield from rec(list(base), [])


def random_free_circuit(rng: random.Random, publics: int = 1, secrets: int = 2, gates: int = 4, outputs: int = 1,
                        name: str = "rf", not_rate: float = 0.1) -> Circuit:
    """A random random-free circuit whose outputs read the last gates.

    Every secret is read by some gate, so the signature is never vacuous.
    """
    ps = tuple(f"p{i + 1}" for i in range(publics))
    ks = tuple(f"k{i + 1}" for i in range(secrets))
    wires = list(ps) + list(ks)
    unread = list(ks)
    gs = []
    for i in range(gates):
        label = f"t{i + 1}"
        if unread and rng.random() < 0.6:
            a = unread.pop(rng.randrange(len(unread)))
        else:
            a = rng.choice(wires)
        if rng.random() < not_rate:
            gs.append(Gate(label, "NOT", (a,)))
        else:
            b = rng.choice(wires)
            gs.append(Gate(label, rng.choice(BINARY), (a, b) if rng.random() < 0.5 else (b, a)))
        if a in unread:
            unread.remove(a)
        wires.append(label)
    labels = [g.label for g in gs]
    outs = tuple(labels[-outputs:]) if labels else tuple(wires[-outputs:])
    c = Circuit(name, ps, ks, (), (), tuple(gs), (), outs)
    return c
