"""Reference circuits used by the tests, the benchmark suite and the docs."""

from __future__ import annotations

from .circuit import Circuit, Decoder, Encoder, Gate
from .netlist import parse

FIG2_TEXT = """\
circuit fig2
  public p1 p2
  secret k1 k2
  node t1 = XOR p1 k1
  node o1 = XOR t1 k2
  node o2 = AND k2 p2
  output o1 o2
end
"""

# Reconstructed 2-leakage-resilient version of fig2: (p1^k1^k2, k2&p2) with
# randoms r1..r4 all owned by the two encoders and 15 observable nodes.
FIG1_TEXT = """\
circuit fig1
  public p1 p2
  secret k1 k2
  random r1 r2 r3 r4
  encode k1 -> k1_1 k1_2 k1_3 using r1 r2
  encode k2 -> k2_1 k2_2 k2_3 using r3 r4
  node u1 = XOR k1_1 k2_1
  node u2 = XOR k1_2 k2_2
  node u3 = XOR k1_3 k2_3
  node u4 = XOR u3 p1
  node v1 = AND k2_1 p2
  node v2 = AND k2_2 p2
  node v3 = AND k2_3 p2
  decode o1 = u1 u2 u4
  decode o2 = v1 v2 v3
  output o1 o2
end
"""

# Figure-style labels alpha1..alpha15 for the observable nodes of FIG1.
FIG1_LABELS = {
    "alpha1": "k2_1", "alpha2": "k2_2", "alpha3": "k2_3",
    "alpha4": "k1_1", "alpha5": "k1_2", "alpha6": "k1_3",
    "alpha7": "p1", "alpha8": "p2",
    "alpha9": "u1", "alpha10": "u2", "alpha11": "u3", "alpha12": "u4",
    "alpha13": "v1", "alpha14": "v2", "alpha15": "v3",
}

# 1-input, 2-share negation gadget: a4 = ~a1, a5 = a4 ^ a3, a6 = a2 ^ a3.
NEGATION_TEXT = """\
circuit negation
  secret k
  random r a3
  encode k -> a1 a2 using r
  node a4 = NOT a1
  node a5 = XOR a4 a3
  node a6 = XOR a2 a3
  decode o = a5 a6
  output o
end
"""

# Rows of the negation gadget's table, columns a1..a6, in printed order.
NEGATION_ROWS = [
    (0, 0, 0, 1, 1, 0),
    (0, 0, 1, 1, 0, 1),
    (1, 1, 0, 0, 0, 1),
    (1, 1, 1, 0, 1, 0),
    (1, 0, 0, 0, 0, 0),
    (1, 0, 1, 0, 1, 1),
    (0, 1, 0, 1, 1, 1),
    (0, 1, 1, 1, 0, 0),
]


def fig1() -> Circuit:
    return parse(FIG1_TEXT)


def fig2() -> Circuit:
    return parse(FIG2_TEXT)


def negation_gadget() -> Circuit:
    return parse(NEGATION_TEXT)


def identity_gadget(n: int, secret: str = "k", name: str = "identity") -> Circuit:
    """n-leakage-resilient identity: each share passes through its own gate."""
    rs = tuple(f"r{i + 1}" for i in range(n))
    shares = tuple(f"s{i + 1}" for i in range(n + 1))
    gates = tuple(Gate(f"u{i + 1}", "PASS", (s,)) for i, s in enumerate(shares))
    return Circuit(name, (), (secret,), rs, (Encoder(secret, rs, shares),), gates,
                   (Decoder("o", tuple(g.label for g in gates)),), ("o",))


def single_gate(op: str, name: str | None = None) -> Circuit:
    """Random-free circuit ``o = op(k1, k2)`` (or ``o = op(k1)`` for unary ops)."""
    ins = ("k1", "k2") if op in ("XOR", "AND", "OR") else ("k1",)
    return Circuit(name or op.lower(), (), ins, (), (), (Gate("o", op, ins),), (), ("o",))


def identity_reference(secret: str = "k") -> Circuit:
    return Circuit("id", (), (secret,), (), (), (Gate("o", "PASS", (secret,)),), (), ("o",))
