"""Composition of split circuits.

Three ways of putting leakage-resilient pieces together without adding
randomness at the joints:

* parallel: place two circuits side by side, outputs concatenated;
* sequential: feed the split outputs of some circuits straight into the
  split inputs of another (its encoders and their decoders disappear);
* output-sharing: one split output feeds several consumers.

All of them are built from :func:`par_compose` and :func:`connect`.
"""

from __future__ import annotations

import heapq
import itertools
from typing import Mapping, Sequence

from .circuit import Circuit, CircuitError, Decoder, Encoder, Gate


class CompositionError(CircuitError):
    pass


# -- renaming --------------------------------------------------------------


def identifiers(c: Circuit) -> set[str]:
    names = set(c.inputs) | set(c.share_wires)
    names.update(g.label for g in c.gates)
    names.update(d.output for d in c.decoders)
    return names


def internal_names(c: Circuit) -> list[str]:
    """Identifiers private to ``c``: randoms, shares, gates and decoder outputs."""
    return list(c.randoms) + list(c.share_wires) + [g.label for g in c.gates] + [d.output for d in c.decoders]


def rename(c: Circuit, mapping: Mapping[str, str], name: str | None = None) -> Circuit:
    """Consistently rename wires (α-renaming)."""
    f = lambda w: mapping.get(w, w)  # noqa: E731
    fs = lambda ws: tuple(f(w) for w in ws)  # noqa: E731
    return Circuit(
        name or c.name,
        fs(c.publics), fs(c.secrets), fs(c.randoms),
        tuple(Encoder(f(e.secret), fs(e.randoms), fs(e.shares)) for e in c.encoders),
        tuple(Gate(f(g.label), g.op, fs(g.inputs)) for g in c.gates),
        tuple(Decoder(f(d.output), fs(d.splits)) for d in c.decoders),
        fs(c.outputs),
    )


def _fresh(base: str, taken: set[str]) -> str:
    for i in itertools.count(2):
        cand = f"{base}_{i}"
        if cand not in taken:
            return cand
    raise AssertionError  # pragma: no cover


def _avoid(c: Circuit, taken: set[str], names: Sequence[str]) -> Circuit:
    mapping = {}
    own = identifiers(c)
    for w in names:
        if w in taken:
            new = _fresh(w, taken | own | set(mapping.values()))
            mapping[w] = new
    return rename(c, mapping) if mapping else c


def freshen_randoms(circuits: Sequence[Circuit]) -> list[Circuit]:
    """Rename random wires so that no circuit reuses another's identifiers."""
    out = []
    taken: set[str] = set()
    for c in circuits:
        c = _avoid(c, taken, c.randoms)
        taken |= identifiers(c)
        out.append(c)
    return out


def disjoint(circuits: Sequence[Circuit]) -> list[Circuit]:
    """Rename every internal identifier that clashes with an earlier circuit.

    Publics and secrets are shared by name; everything else is made private.
    """
    out = []
    taken: set[str] = set()
    interface: set[str] = set()
    for c in circuits:
        clash = (set(c.publics) | set(c.secrets)) & (taken - interface)
        if clash:
            raise CompositionError(f"{c.name}: inputs {sorted(clash)} clash with internal wires of earlier operands")
        c = _avoid(c, taken, internal_names(c))
        taken |= identifiers(c)
        interface |= set(c.publics) | set(c.secrets)
        out.append(c)
    return out


# -- gate ordering ---------------------------------------------------------


def _toposort(gates: Sequence[Gate]) -> tuple[Gate, ...]:
    """Stable topological order (original position breaks ties)."""
    labels = {g.label: i for i, g in enumerate(gates)}
    indeg = [0] * len(gates)
    users: dict[int, list[int]] = {}
    for i, g in enumerate(gates):
        for a in g.inputs:
            if a in labels:
                indeg[i] += 1
                users.setdefault(labels[a], []).append(i)
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        i = heapq.heappop(ready)
        out.append(gates[i])
        for u in users.get(i, ()):
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(out) != len(gates):
        raise CompositionError("composition creates a cycle")
    return tuple(out)


# -- operators -------------------------------------------------------------


def _order(c: Circuit) -> int | None:
    w = c.share_width
    return None if w is None else w - 1


def par_compose(p1: Circuit, p2: Circuit, share_encoders: bool = False, name: str | None = None) -> Circuit:
    """Side-by-side composition; outputs of ``p1`` come first.

    Secrets used by both sides get one encoder each, unless ``share_encoders``
    is set, in which case ``p2`` reuses ``p1``'s encoder for them.
    """
    o1, o2 = _order(p1), _order(p2)
    if o1 is not None and o2 is not None and o1 != o2:
        raise CompositionError(f"order mismatch: {p1.name} is order {o1}, {p2.name} is order {o2}")
    p1, p2 = disjoint([p1, p2])
    encoders2 = list(p2.encoders)
    randoms2 = list(p2.randoms)
    mapping: dict[str, str] = {}
    if share_encoders:
        for e2 in p2.encoders:
            e1s = p1.encoders_of(e2.secret)
            if not e1s:
                continue
            if e1s[0].width != e2.width:
                raise CompositionError(f"encoders of {e2.secret} differ in width")
            mapping.update(zip(e2.shares, e1s[0].shares))
            encoders2.remove(e2)
            for r in e2.randoms:
                randoms2.remove(r)
    f = lambda w: mapping.get(w, w)  # noqa: E731
    gates2 = tuple(Gate(g.label, g.op, tuple(map(f, g.inputs))) for g in p2.gates)
    decoders2 = tuple(Decoder(d.output, tuple(map(f, d.splits))) for d in p2.decoders)
    publics = p1.publics + tuple(p for p in p2.publics if p not in p1.publics)
    secrets = p1.secrets + tuple(k for k in p2.secrets if k not in p1.secrets)
    return Circuit(
        name or f"{p1.name}_par_{p2.name}",
        publics, secrets, p1.randoms + tuple(randoms2),
        p1.encoders + tuple(encoders2), p1.gates + gates2, p1.decoders + decoders2,
        p1.outputs + tuple(map(f, p2.outputs)),
    )


def par_compose_all(circuits: Sequence[Circuit], name: str | None = None, share_encoders: bool = False) -> Circuit:
    if not circuits:
        return Circuit(name=name or "empty")
    acc = circuits[0]
    for c in circuits[1:]:
        acc = par_compose(acc, c, share_encoders=share_encoders)
    return rename(acc, {}, name) if name else acc


def connect(c: Circuit, output: str, secret: str, permutation: Sequence[int] | None = None,
            keep_output: bool = False) -> Circuit:
    """Feed the split wires of decoded ``output`` into the encoder(s) of ``secret``.

    Share i of each encoder is replaced by split ``permutation[i]`` (identity
    by default).  The encoders and their randoms disappear; so does the
    decoder unless ``keep_output`` is set.
    """
    if output not in c.decoder_map:
        raise CompositionError(f"{output!r} is not a decoded output of {c.name}")
    dec = c.decoder_map[output]
    encs = c.encoders_of(secret)
    if not encs:
        raise CompositionError(f"{secret!r} has no encoder in {c.name}")
    perm = list(range(dec.width)) if permutation is None else list(permutation)
    if sorted(perm) != list(range(dec.width)):
        raise CompositionError(f"bad permutation {perm} for width {dec.width}")
    sub: dict[str, str] = {}
    dropped_randoms: set[str] = set()
    for e in encs:
        if e.width != dec.width:
            raise CompositionError(f"width mismatch: {output} has {dec.width} splits, {secret} has {e.width} shares")
        for i, s in enumerate(e.shares):
            sub[s] = dec.splits[perm[i]]
        dropped_randoms.update(e.randoms)
    # the secret's own wire must not feed its producer
    if secret in {i for g in c.gates for i in g.inputs} or secret in c.outputs:
        raise CompositionError(f"{secret!r} is also used unencoded; cannot connect")
    g2 = tuple(Gate(g.label, g.op, tuple(sub.get(i, i) for i in g.inputs)) for g in c.gates)
    decs = []
    for d in c.decoders:
        if d.output == output and not keep_output:
            continue
        decs.append(Decoder(d.output, tuple(sub.get(s, s) for s in d.splits)))
    outputs = tuple(sub.get(o, o) for o in c.outputs if keep_output or o != output)
    return Circuit(
        c.name,
        c.publics,
        tuple(k for k in c.secrets if k != secret),
        tuple(r for r in c.randoms if r not in dropped_randoms),
        tuple(e for e in c.encoders if e.secret != secret),
        _toposort(g2),
        tuple(decs),
        outputs,
    )


def _placeholders(second: Circuit, inputs: Sequence[str], taken: set[str]) -> tuple[Circuit, list[str]]:
    mapping = {}
    every = taken | identifiers(second)
    for k in inputs:
        if k not in second.secrets:
            raise CompositionError(f"{k!r} is not a secret input of {second.name}")
        new = _fresh(f"{k}.in", every)
        every.add(new)
        mapping[k] = new
    return rename(second, mapping), [mapping[k] for k in inputs]


def _single_output(p: Circuit) -> str:
    if len(p.outputs) != 1 or p.outputs[0] not in p.decoder_map:
        raise CompositionError(f"{p.name} must have exactly one decoded output")
    return p.outputs[0]


def seq_compose(firsts: Sequence[Circuit], second: Circuit, inputs: Sequence[str] | None = None,
                permutations: Sequence[Sequence[int] | None] | None = None, name: str | None = None) -> Circuit:
    """Wire the split output of ``firsts[i]`` into encoded input ``inputs[i]`` of ``second``.

    ``inputs`` defaults to the first ``len(firsts)`` secrets of ``second``.
    Secrets of ``second`` that are not connected stay ordinary secrets.
    """
    firsts = list(firsts)
    if inputs is None:
        if len(firsts) > len(second.secrets):
            raise CompositionError(f"{second.name} has only {len(second.secrets)} secret inputs")
        inputs = second.secrets[:len(firsts)]
    if len(inputs) != len(firsts):
        raise CompositionError("need one target input per first circuit")
    permutations = list(permutations or [None] * len(firsts))
    outs = [_single_output(p) for p in firsts]
    taken = set().union(*(identifiers(p) for p in firsts)) if firsts else set()
    second, holes = _placeholders(second, inputs, taken)
    ops = disjoint(firsts + [second])
    outs = [_single_output(p) for p in ops[:-1]]
    acc = par_compose_all(ops)
    for out, hole, perm in zip(outs, holes, permutations):
        acc = connect(acc, out, hole, perm)
    return rename(acc, {}, name or f"{'_'.join(p.name for p in firsts)}_seq_{second.name}")


def share_compose(p1: Circuit, consumers: Sequence[Circuit], inputs: Sequence[str] | None = None,
                  name: str | None = None) -> Circuit:
    """Fan the split output of ``p1`` out to an encoded input of every consumer."""
    consumers = list(consumers)
    if inputs is None:
        inputs = [c.secrets[0] if c.secrets else None for c in consumers]
    if len(inputs) != len(consumers) or any(k is None for k in inputs):
        raise CompositionError("every consumer needs a target secret input")
    _single_output(p1)
    taken = identifiers(p1)
    renamed, holes = [], []
    for c, k in zip(consumers, inputs):
        c, (hole,) = _placeholders(c, [k], taken)
        taken |= identifiers(c)
        renamed.append(c)
        holes.append(hole)
    ops = disjoint([p1] + renamed)
    out = _single_output(ops[0])
    acc = par_compose_all(ops)
    for i, hole in enumerate(holes):
        acc = connect(acc, out, hole, keep_output=i < len(holes) - 1)
    return rename(acc, {}, name or f"{p1.name}_share_{'_'.join(c.name for c in consumers)}")


def passthrough(secret: str, n: int, name: str = "pass") -> Circuit:
    """Encoder immediately decoded: the neutral element of sequential composition."""
    rs = tuple(f"{secret}_r{i + 1}" for i in range(n))
    shares = tuple(f"{secret}_s{i + 1}" for i in range(n + 1))
    return Circuit(name, (), (secret,), rs, (Encoder(secret, rs, shares),), (), (Decoder("o", shares),), ("o",))
