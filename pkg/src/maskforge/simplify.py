"""Local clean-up of synthesized circuits.

Constant folding, identity elimination (x^0, x&1, x|0, x&x, x|x, PASS) and
dead-gate removal.  Every surviving node computes the same function as some
node of the original circuit (or a constant), so an adversary's choices only
shrink and leakage resilience is preserved.
"""

from __future__ import annotations

from .circuit import Circuit, Decoder, Gate


def simplify(c: Circuit, name: str | None = None) -> Circuit:
    alias: dict[str, str] = {}
    const: dict[str, int] = {}
    const_gate: dict[int, str] = {}
    gates: list[Gate] = []

    def val(w):
        return const.get(w)

    def as_const(label: str, v: int):
        if v in const_gate:
            alias[label] = const_gate[v]
        else:
            const_gate[v] = label
            gates.append(Gate(label, "CONST1" if v else "CONST0"))
        const[label] = v

    def to(label: str, target: str):
        alias[label] = target
        if target in const:
            const[label] = const[target]

    for g in c.gates:
        ins = tuple(alias.get(i, i) for i in g.inputs)
        L, op = g.label, g.op
        if op in ("CONST0", "CONST1"):
            as_const(L, int(op == "CONST1"))
            continue
        cs = [val(i) for i in ins]
        if op == "PASS":
            to(L, ins[0])
            continue
        if op == "NOT":
            if cs[0] is not None:
                as_const(L, 1 - cs[0])
            else:
                gates.append(Gate(L, op, ins))
            continue
        a, b = ins
        ca, cb = cs
        if ca is not None and cb is not None:
            as_const(L, {"XOR": ca ^ cb, "AND": ca & cb, "OR": ca | cb}[op])
            continue
        if a == b:
            if op == "XOR":
                as_const(L, 0)
            else:
                to(L, a)
            continue
        if ca is not None or cb is not None:
            k, other = (ca, b) if ca is not None else (cb, a)
            if op == "XOR":
                if k == 0:
                    to(L, other)
                else:
                    gates.append(Gate(L, "NOT", (other,)))
            elif op == "AND":
                if k == 1:
                    to(L, other)
                else:
                    as_const(L, 0)
            else:
                if k == 0:
                    to(L, other)
                else:
                    as_const(L, 1)
            continue
        gates.append(Gate(L, op, ins))

    decoders = tuple(Decoder(d.output, tuple(alias.get(s, s) for s in d.splits)) for d in c.decoders)
    outputs = tuple(alias.get(o, o) if o not in c.decoder_map else o for o in c.outputs)
    # dead-gate removal
    live = {s for d in decoders for s in d.splits} | set(outputs)
    kept = []
    for g in reversed(gates):
        if g.label in live:
            kept.append(g)
            live.update(g.inputs)
    kept.reverse()
    used = live | {i for g in kept for i in g.inputs}
    encoders = tuple(e for e in c.encoders if used & set(e.shares))
    enc_r = {r for e in encoders for r in e.randoms}
    randoms = tuple(r for r in c.randoms if r in enc_r or (r in used and r not in c.encoder_randoms))
    return Circuit(name or c.name, c.publics, c.secrets, randoms, encoders, tuple(kept), decoders, outputs)
