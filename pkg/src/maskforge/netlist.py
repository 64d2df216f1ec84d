"""Line-oriented netlist format (``.mfc``).

::

    circuit fig2
      public p1 p2
      secret k1 k2
      node t1 = XOR p1 k1
      node o1 = XOR t1 k2
      node o2 = AND k2 p2
      output o1 o2
    end

Masked circuits add ``random``, ``encode k -> s1 s2 s3 using r1 r2`` and
``decode o = a b c`` lines.  Gates wider than two inputs are desugared into
left-leaning binary chains named ``<label>.1``, ``<label>.2``, ...
"""

from __future__ import annotations

import re
from pathlib import Path

from .circuit import ARITY, Circuit, CircuitError, Decoder, Encoder, Gate

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\[\]$]*$")


class NetlistError(CircuitError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def _ident(tok, lineno):
    if not _IDENT.match(tok):
        raise NetlistError(f"bad identifier {tok!r}", lineno)
    return tok


def _desugar(label, op, args, lineno):
    if op in ("XOR", "AND", "OR") and len(args) > 2:
        gates = []
        acc = args[0]
        for i, a in enumerate(args[1:-1], start=1):
            tmp = f"{label}.{i}"
            gates.append(Gate(tmp, op, (acc, a)))
            acc = tmp
        gates.append(Gate(label, op, (acc, args[-1])))
        return gates
    if op not in ARITY:
        raise NetlistError(f"unknown op {op!r}", lineno)
    if len(args) != ARITY[op]:
        raise NetlistError(f"{op} takes {ARITY[op]} inputs, got {len(args)}", lineno)
    return [Gate(label, op, tuple(args))]


def parse(text: str) -> Circuit:
    name = None
    publics, secrets, randoms, outputs = [], [], [], []
    encoders, gates, decoders = [], [], []
    ended = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise NetlistError("content after 'end'", lineno)
        toks = line.split()
        kw = toks[0]
        if name is None:
            if kw != "circuit" or len(toks) != 2:
                raise NetlistError("expected 'circuit <name>'", lineno)
            name = _ident(toks[1], lineno)
            continue
        if kw in ("public", "secret", "random", "output"):
            target = {"public": publics, "secret": secrets, "random": randoms, "output": outputs}[kw]
            target.extend(_ident(t, lineno) for t in toks[1:])
        elif kw == "encode":
            # encode k -> s1 s2 [using r1 ...]
            if len(toks) < 4 or toks[2] != "->":
                raise NetlistError("expected 'encode <secret> -> <shares> [using <randoms>]'", lineno)
            rest = toks[3:]
            if "using" in rest:
                cut = rest.index("using")
                shares, rs = rest[:cut], rest[cut + 1:]
            else:
                shares, rs = rest, []
            try:
                encoders.append(Encoder(_ident(toks[1], lineno), tuple(_ident(r, lineno) for r in rs),
                                        tuple(_ident(s, lineno) for s in shares)))
            except CircuitError as e:
                raise NetlistError(str(e), lineno) from None
        elif kw == "node":
            if len(toks) < 4 or toks[2] != "=":
                raise NetlistError("expected 'node <label> = <OP> <inputs>'", lineno)
            label = _ident(toks[1], lineno)
            op = toks[3].upper()
            args = [_ident(t, lineno) for t in toks[4:]]
            gates.extend(_desugar(label, op, args, lineno))
        elif kw == "decode":
            if len(toks) < 4 or toks[2] != "=":
                raise NetlistError("expected 'decode <output> = <splits>'", lineno)
            decoders.append(Decoder(_ident(toks[1], lineno), tuple(_ident(t, lineno) for t in toks[3:])))
        elif kw == "end":
            ended = True
        else:
            raise NetlistError(f"unknown keyword {kw!r}", lineno)
    if name is None:
        raise NetlistError("empty netlist")
    if not ended:
        raise NetlistError("missing 'end'")
    return Circuit(name, tuple(publics), tuple(secrets), tuple(randoms), tuple(encoders),
                   tuple(gates), tuple(decoders), tuple(outputs))


def serialize(c: Circuit) -> str:
    out = [f"circuit {c.name}"]
    if c.publics:
        out.append("  public " + " ".join(c.publics))
    if c.secrets:
        out.append("  secret " + " ".join(c.secrets))
    if c.randoms:
        out.append("  random " + " ".join(c.randoms))
    for e in c.encoders:
        line = f"  encode {e.secret} -> " + " ".join(e.shares)
        if e.randoms:
            line += " using " + " ".join(e.randoms)
        out.append(line)
    for g in c.gates:
        out.append(f"  node {g.label} = {' '.join((g.op,) + g.inputs)}")
    for d in c.decoders:
        out.append(f"  decode {d.output} = " + " ".join(d.splits))
    if c.outputs:
        out.append("  output " + " ".join(c.outputs))
    out.append("end")
    return "\n".join(out) + "\n"


def load(path) -> Circuit:
    return parse(Path(path).read_text(encoding="utf-8"))


def dump(c: Circuit, path) -> None:
    Path(path).write_text(serialize(c), encoding="utf-8")
