"""Gate-by-gate masking in the style of Ishai, Sahai and Wagner.

Used as the pre-made fallback when constraint-based synthesis gives up.
Every value is either public (kept as a single wire) or carried as n+1
shares.  XOR and NOT act share-wise; AND uses the ISW multiplication with
n(n+1)/2 fresh randoms; OR is rewritten as NOT(AND(NOT a, NOT b)).

Each occurrence of a secret gets its own encoder and every extra use of a
shared value passes through a refresh, so the masked circuit is a tree of
non-interfering gadgets.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .circuit import Circuit, CircuitError, Decoder, Encoder, Gate


@dataclass
class _Builder:
    n: int
    taken: set[str]
    randoms: list[str] = field(default_factory=list)
    encoders: list[Encoder] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)

    def fresh(self, base: str) -> str:
        name, i = base, 1
        while name in self.taken:
            i += 1
            name = f"{base}_{i}"
        self.taken.add(name)
        return name

    def gate(self, base: str, op: str, *args: str) -> str:
        label = self.fresh(base)
        self.gates.append(Gate(label, op, tuple(args)))
        return label

    def random(self, base: str) -> str:
        r = self.fresh(base)
        self.randoms.append(r)
        return r

    def encode(self, secret: str) -> list[str]:
        tag = self.fresh(f"{secret}.e")
        rs = [self.random(f"{tag}.r{i + 1}") for i in range(self.n)]
        shares = [self.fresh(f"{tag}.s{i + 1}") for i in range(self.n + 1)]
        self.encoders.append(Encoder(secret, tuple(rs), tuple(shares)))
        return shares

    def refresh(self, base: str, a: list[str]) -> list[str]:
        m = len(a)
        z = {}
        for i in range(m):
            for j in range(i + 1, m):
                z[i, j] = z[j, i] = self.random(f"{base}.f{i + 1}{j + 1}")
        out = []
        for i in range(m):
            acc = a[i]
            for j in range(m):
                if j != i:
                    acc = self.gate(f"{base}.g{i + 1}", "XOR", acc, z[i, j])
            out.append(acc)
        return out

    def isw_and(self, base: str, a: list[str], b: list[str]) -> list[str]:
        m = len(a)
        prod = {}

        def ab(i, j):
            if (i, j) not in prod:
                prod[i, j] = self.gate(f"{base}.p{i + 1}{j + 1}", "AND", a[i], b[j])
            return prod[i, j]

        z = {}
        for i in range(m):
            for j in range(i + 1, m):
                z[i, j] = self.random(f"{base}.z{i + 1}{j + 1}")
                t = self.gate(f"{base}.t{j + 1}{i + 1}", "XOR", z[i, j], ab(i, j))
                z[j, i] = self.gate(f"{base}.z{j + 1}{i + 1}", "XOR", t, ab(j, i))
        out = []
        for i in range(m):
            acc = ab(i, i)
            for j in range(m):
                if j != i:
                    acc = self.gate(f"{base}.c{i + 1}", "XOR", acc, z[i, j])
            out.append(acc)
        return out


def isw_transform(p: Circuit, n: int, name: str | None = None) -> Circuit:
    """Masked order-n version of the random-free circuit ``p``."""
    if not p.is_random_free:
        raise CircuitError(f"{p.name} is not random-free")
    if n < 0:
        raise ValueError("order must be non-negative")
    b = _Builder(n, set(p.publics) | set(p.secrets) | set(p.outputs))
    uses = Counter(i for g in p.gates for i in g.inputs)
    uses.update(p.outputs)
    seen: Counter = Counter()
    shared: dict[str, list[str]] = {}
    public: dict[str, str] = {w: w for w in p.publics}

    def operand(w: str):
        """("pub", wire) or ("sh", shares) for one use of w."""
        if w in public:
            return "pub", public[w]
        if w in p.secrets:
            return "sh", b.encode(w)
        seen[w] += 1
        if seen[w] > 1:
            return "sh", b.refresh(f"{w}.u{seen[w]}", shared[w])
        return "sh", shared[w]

    def negate(label, kind, v):
        if kind == "pub":
            return "pub", b.gate(label, "NOT", v)
        return "sh", [b.gate(f"{label}.0", "NOT", v[0])] + v[1:]

    def conj(label, x, y):
        (kx, vx), (ky, vy) = x, y
        if kx == "pub" and ky == "pub":
            return "pub", b.gate(label, "AND", vx, vy)
        if kx == "pub" or ky == "pub":
            pub, sh = (vx, vy) if kx == "pub" else (vy, vx)
            return "sh", [b.gate(f"{label}.{i}", "AND", s, pub) for i, s in enumerate(sh)]
        return "sh", b.isw_and(label, vx, vy)

    for g in p.gates:
        L = g.label
        if g.op in ("CONST0", "CONST1"):
            public[L] = b.gate(L, g.op)
            continue
        ins = [operand(w) for w in g.inputs]
        if g.op == "PASS":
            kind, v = ins[0]
        elif g.op == "NOT":
            kind, v = negate(L, *ins[0])
        elif g.op == "XOR":
            (kx, vx), (ky, vy) = ins
            if kx == "pub" and ky == "pub":
                kind, v = "pub", b.gate(L, "XOR", vx, vy)
            elif kx == "pub" or ky == "pub":
                pub, sh = (vx, vy) if kx == "pub" else (vy, vx)
                kind, v = "sh", [b.gate(f"{L}.0", "XOR", sh[0], pub)] + sh[1:]
            else:
                kind, v = "sh", [b.gate(f"{L}.{i}", "XOR", x, y) for i, (x, y) in enumerate(zip(vx, vy))]
        elif g.op == "AND":
            kind, v = conj(L, *ins)
        else:  # OR
            nx = negate(f"{L}.na", *ins[0])
            ny = negate(f"{L}.nb", *ins[1])
            kind, v = negate(f"{L}.n", *conj(f"{L}.m", nx, ny))
        if kind == "pub":
            public[L] = v
        else:
            shared[L] = v

    decoders = []
    names = set()
    for o in p.outputs:
        kind, v = operand(o)
        if kind == "pub":
            splits = [v] + [b.gate(f"{o}.zero{i + 1}", "CONST0") for i in range(n)]
        else:
            splits = v
        out = o if o not in names and o not in p.publics and o not in p.secrets else b.fresh(f"{o}.out")
        names.add(out)
        decoders.append(Decoder(out, tuple(splits)))
    return Circuit(name or f"{p.name}.isw{n}", p.publics, p.secrets, tuple(b.randoms), tuple(b.encoders),
                   tuple(b.gates), tuple(decoders), tuple(d.output for d in decoders))
