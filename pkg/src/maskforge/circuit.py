"""Circuit intermediate representation and evaluation semantics.

A circuit is an acyclic network of Boolean gates over three kinds of inputs
(public, secret, random).  Masked circuits additionally carry input encoders,
which split a secret into shares, and output decoders, which XOR-fold split
outputs back into a single bit.  Encoder and decoder internals are never
observable; everything else is.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

ARITY = {
    "XOR": 2,
    "AND": 2,
    "OR": 2,
    "NOT": 1,
    "PASS": 1,
    "CONST0": 0,
    "CONST1": 0,
}

# Maximum number of free input bits io_equivalent will enumerate.
IO_MAX_BITS = 34
_CHUNK_BITS = 16


class CircuitError(ValueError):
    """Malformed circuit or invalid request against a circuit."""


class SelectionError(CircuitError):
    pass


class AssignmentError(CircuitError):
    pass


class StructureError(CircuitError):
    """The circuit does not have the shape an operation requires."""


class Role(enum.Enum):
    PUBLIC = "public-input"
    SECRET = "secret-input"
    RANDOM = "random-input"
    INTERNAL = "internal"
    OUTPUT = "output"


@dataclass(frozen=True)
class Gate:
    label: str
    op: str
    inputs: tuple[str, ...] = ()

    def __post_init__(self):
        if self.op not in ARITY:
            raise CircuitError(f"unknown gate op {self.op!r}")
        if len(self.inputs) != ARITY[self.op]:
            raise CircuitError(
                f"gate {self.label}: {self.op} takes {ARITY[self.op]} inputs, got {len(self.inputs)}"
            )


@dataclass(frozen=True)
class Encoder:
    """Splits ``secret`` into ``randoms + (secret ^ randoms...)`` share wires."""

    secret: str
    randoms: tuple[str, ...]
    shares: tuple[str, ...]

    def __post_init__(self):
        if len(self.shares) != len(self.randoms) + 1:
            raise CircuitError(
                f"encoder for {self.secret}: {len(self.randoms)} randoms need "
                f"{len(self.randoms) + 1} shares, got {len(self.shares)}"
            )

    @property
    def width(self) -> int:
        return len(self.shares)


@dataclass(frozen=True)
class Decoder:
    output: str
    splits: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.splits)


@dataclass(frozen=True)
class Circuit:
    name: str = "circuit"
    publics: tuple[str, ...] = ()
    secrets: tuple[str, ...] = ()
    randoms: tuple[str, ...] = ()
    encoders: tuple[Encoder, ...] = ()
    gates: tuple[Gate, ...] = ()
    decoders: tuple[Decoder, ...] = ()
    outputs: tuple[str, ...] = ()

    def __post_init__(self):
        for attr in ("publics", "secrets", "randoms", "encoders", "gates", "decoders", "outputs"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        self._validate()

    def _validate(self):
        defined: set[str] = set()

        def define(name, what):
            if name in defined:
                raise CircuitError(f"duplicate identifier {name!r} ({what})")
            defined.add(name)

        for w in self.publics:
            define(w, "public")
        for w in self.secrets:
            define(w, "secret")
        for w in self.randoms:
            define(w, "random")
        used_randoms: set[str] = set()
        secrets = set(self.secrets)
        randoms = set(self.randoms)
        for enc in self.encoders:
            if enc.secret not in secrets:
                raise CircuitError(f"encoder for undeclared secret {enc.secret!r}")
            for r in enc.randoms:
                if r not in randoms:
                    raise CircuitError(f"encoder for {enc.secret} uses undeclared random {r!r}")
                if r in used_randoms:
                    raise CircuitError(f"random {r!r} used by two encoders")
                used_randoms.add(r)
            for s in enc.shares:
                define(s, f"share of {enc.secret}")
        referable = defined - used_randoms
        for g in self.gates:
            for i in g.inputs:
                if i not in referable:
                    if i in used_randoms:
                        raise CircuitError(f"gate {g.label} reads encoder random {i!r}; use its share")
                    raise CircuitError(f"gate {g.label} reads undefined wire {i!r}")
            define(g.label, "gate")
            referable.add(g.label)
        for d in self.decoders:
            if not d.splits:
                raise CircuitError(f"decoder {d.output} has no splits")
            for s in d.splits:
                if s not in referable:
                    raise CircuitError(f"decoder {d.output} reads undefined wire {s!r}")
            define(d.output, "decoder output")
        for o in self.outputs:
            if o not in defined or o in used_randoms:
                raise CircuitError(f"output {o!r} is not a wire")

    # -- structure ---------------------------------------------------------

    @cached_property
    def encoder_randoms(self) -> frozenset[str]:
        return frozenset(r for e in self.encoders for r in e.randoms)

    @property
    def extra_randoms(self) -> tuple[str, ...]:
        return tuple(r for r in self.randoms if r not in self.encoder_randoms)

    @property
    def share_wires(self) -> tuple[str, ...]:
        return tuple(s for e in self.encoders for s in e.shares)

    @cached_property
    def raw_secrets(self) -> tuple[str, ...]:
        """Secrets read directly by a gate, decoder or output (not via an encoder)."""
        used = {i for g in self.gates for i in g.inputs}
        used.update(s for d in self.decoders for s in d.splits)
        used.update(self.outputs)
        return tuple(k for k in self.secrets if k in used)

    @cached_property
    def observable(self) -> tuple[str, ...]:
        """Nodes(P): everything except encoder/decoder internals."""
        return (
            self.publics
            + self.raw_secrets
            + self.share_wires
            + self.extra_randoms
            + tuple(g.label for g in self.gates)
        )

    @cached_property
    def _observable_set(self) -> frozenset[str]:
        return frozenset(self.observable)

    @cached_property
    def gate_map(self) -> dict[str, Gate]:
        return {g.label: g for g in self.gates}

    @cached_property
    def decoder_map(self) -> dict[str, Decoder]:
        return {d.output: d for d in self.decoders}

    def role(self, wire: str) -> Role:
        if wire in self.publics:
            return Role.PUBLIC
        if wire in self.secrets:
            return Role.SECRET
        if wire in self.randoms:
            return Role.RANDOM
        if wire in self.outputs:
            return Role.OUTPUT
        if wire in self._index:
            return Role.INTERNAL
        raise CircuitError(f"unknown wire {wire!r}")

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.publics + self.secrets + self.randoms

    @property
    def is_random_free(self) -> bool:
        return not self.randoms and not self.encoders and not self.decoders

    @property
    def share_width(self) -> int | None:
        """Common width of all encoders and decoders, None if there are none."""
        widths = {e.width for e in self.encoders} | {d.width for d in self.decoders}
        if not widths:
            return None
        if len(widths) > 1:
            raise StructureError(f"{self.name}: mixed share widths {sorted(widths)}")
        return widths.pop()

    def is_split(self) -> bool:
        try:
            w = self.share_width
        except StructureError:
            return False
        return (
            w is not None
            and not self.raw_secrets
            and all(o in self.decoder_map for o in self.outputs)
        )

    def encoders_of(self, secret: str) -> tuple[Encoder, ...]:
        return tuple(e for e in self.encoders if e.secret == secret)

    def size(self) -> int:
        return len(self.gates)

    # -- compiled form -----------------------------------------------------

    @cached_property
    def _index(self) -> dict[str, int]:
        names = list(self.inputs) + list(self.share_wires) + [g.label for g in self.gates]
        names += [d.output for d in self.decoders]
        return {w: i for i, w in enumerate(names)}

    @cached_property
    def _program(self):
        idx = self._index
        prog = []
        for e in self.encoders:
            rs = [idx[r] for r in e.randoms]
            for s, r in zip(e.shares, rs):
                prog.append((idx[s], "PASS", (r,)))
            prog.append((idx[e.shares[-1]], "XORN", tuple([idx[e.secret]] + rs)))
        for g in self.gates:
            prog.append((idx[g.label], g.op, tuple(idx[i] for i in g.inputs)))
        for d in self.decoders:
            prog.append((idx[d.output], "XORN", tuple(idx[s] for s in d.splits)))
        return prog

    def simulate(self, input_values: Sequence[int], full: int = 1) -> list[int]:
        """Bit-parallel evaluation.

        ``input_values`` holds one integer per input wire (publics, secrets,
        randoms in declaration order); bit i of each integer is the wire value
        in lane i.  ``full`` is the all-lanes mask.  Returns one integer per
        wire in internal index order.
        """
        vals = list(input_values) + [0] * (len(self._index) - len(input_values))
        for dst, op, args in self._program:
            if op == "XOR":
                vals[dst] = vals[args[0]] ^ vals[args[1]]
            elif op == "AND":
                vals[dst] = vals[args[0]] & vals[args[1]]
            elif op == "OR":
                vals[dst] = vals[args[0]] | vals[args[1]]
            elif op == "NOT":
                vals[dst] = full ^ vals[args[0]]
            elif op == "PASS":
                vals[dst] = vals[args[0]]
            elif op == "CONST0":
                vals[dst] = 0
            elif op == "CONST1":
                vals[dst] = full
            else:  # XORN
                acc = 0
                for a in args:
                    acc ^= vals[a]
                vals[dst] = acc
        return vals

    def index_of(self, wire: str) -> int:
        try:
            return self._index[wire]
        except KeyError:
            raise SelectionError(f"unknown node {wire!r}") from None


EMPTY = Circuit(name="empty")


# -- evaluation ------------------------------------------------------------


def _input_vector(c: Circuit, nu: Mapping[str, int]) -> list[int]:
    missing = [w for w in c.inputs if w not in nu]
    if missing:
        raise AssignmentError(f"assignment misses inputs {missing}")
    return [int(nu[w]) & 1 for w in c.inputs]


def evaluate_all(c: Circuit, nu: Mapping[str, int]) -> dict[str, int]:
    vals = c.simulate(_input_vector(c, nu))
    return {w: vals[i] for w, i in c._index.items()}


def evaluate(c: Circuit, nu: Mapping[str, int], sel: Sequence[str]) -> tuple[int, ...]:
    """Values of the selected observable nodes under the total assignment ``nu``."""
    for a in sel:
        if a not in c._observable_set:
            raise SelectionError(f"{a!r} is not an observable node of {c.name}")
    vals = c.simulate(_input_vector(c, nu))
    return tuple(vals[c._index[a]] for a in sel)


def output_values(c: Circuit, nu: Mapping[str, int]) -> tuple[int, ...]:
    vals = c.simulate(_input_vector(c, nu))
    return tuple(vals[c._index[o]] for o in c.outputs)


def lane_pattern(j: int, nbits: int) -> int:
    """Mask over 2**nbits lanes whose lane i is bit j of i."""
    half = 1 << j
    period = half << 1
    block = ((1 << half) - 1) << half
    lanes = 1 << nbits
    return block * (((1 << lanes) - 1) // ((1 << period) - 1))


# -- encoders and decoders -----------------------------------------------


def build_encoder(secret: str, n: int, fresh_randoms: Sequence[str], shares: Sequence[str] | None = None,
                  taken: Iterable[str] = ()) -> Encoder:
    """Encoder splitting ``secret`` into n+1 shares using ``fresh_randoms``."""
    fresh_randoms = tuple(fresh_randoms)
    if len(fresh_randoms) != n:
        raise CircuitError(f"an order-{n} encoder needs {n} randoms, got {len(fresh_randoms)}")
    if len(set(fresh_randoms)) != n or set(fresh_randoms) & set(taken):
        raise CircuitError("encoder randoms must be fresh and pairwise distinct")
    if shares is None:
        shares = tuple(f"{secret}_s{i + 1}" for i in range(n + 1))
    return Encoder(secret, fresh_randoms, tuple(shares))


def build_decoder(output: str, splits: Sequence[str], n: int | None = None) -> Decoder:
    if n is not None and len(splits) != n + 1:
        raise CircuitError(f"an order-{n} decoder needs {n + 1} splits, got {len(splits)}")
    return Decoder(output, tuple(splits))


# -- dependency analysis ---------------------------------------------------


def _leaf_wires(c: Circuit) -> set[str]:
    return set(c.publics) | set(c.secrets) | set(c.share_wires) | set(c.extra_randoms)


def dependency_map(c: Circuit) -> dict[str, frozenset[str]]:
    """Reachable-leaf sets for every node (leaves: publics, secrets, shares, extra randoms)."""
    deps: dict[str, frozenset[str]] = {w: frozenset([w]) for w in _leaf_wires(c)}
    for g in c.gates:
        acc: frozenset[str] = frozenset()
        for i in g.inputs:
            acc = acc | deps[i]
        deps[g.label] = acc
    for d in c.decoders:
        acc = frozenset()
        for s in d.splits:
            acc = acc | deps[s]
        deps[d.output] = acc
    return deps


def dependent_inputs(c: Circuit, node: str) -> frozenset[str]:
    if node not in c._observable_set and node not in c.decoder_map:
        raise SelectionError(f"unknown node {node!r}")
    return dependency_map(c)[node]


# -- IO equivalence --------------------------------------------------------


def io_equivalent(reference: Circuit, candidate: Circuit) -> tuple[bool, dict[str, int] | None]:
    """Exhaustively compare decoded outputs of ``candidate`` with ``reference``.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is the
    first total assignment (publics, secrets, candidate randoms) on which an
    output differs.  Randoms of the reference, if any, are held at 0.
    """
    if set(reference.publics) != set(candidate.publics) or set(reference.secrets) != set(candidate.secrets):
        raise CircuitError(
            f"signature mismatch: {reference.name} has ({reference.publics}, {reference.secrets}), "
            f"{candidate.name} has ({candidate.publics}, {candidate.secrets})"
        )
    if len(reference.outputs) != len(candidate.outputs):
        raise CircuitError("circuits have different numbers of outputs")
    variables = candidate.publics + candidate.secrets + candidate.randoms
    nvars = len(variables)
    if nvars > IO_MAX_BITS:
        raise CircuitError(f"io_equivalent over {nvars} input bits is infeasible")
    inner = min(nvars, _CHUNK_BITS)
    lanes = 1 << inner
    full = (1 << lanes) - 1
    patterns = [lane_pattern(j, inner) for j in range(inner)]
    ref_pos = {w: i for i, w in enumerate(variables)}
    ref_out = [reference._index[o] for o in reference.outputs]
    cand_out = [candidate._index[o] for o in candidate.outputs]
    for hi in range(1 << (nvars - inner)):
        masks = []
        for j in range(nvars):
            if j < inner:
                masks.append(patterns[j])
            else:
                masks.append(full if (hi >> (j - inner)) & 1 else 0)
        cvals = candidate.simulate(masks, full)
        rvals = reference.simulate([masks[ref_pos[w]] if w in ref_pos else 0 for w in reference.inputs], full)
        diff = 0
        for a, b in zip(ref_out, cand_out):
            diff |= rvals[a] ^ cvals[b]
        if diff:
            lane = (diff & -diff).bit_length() - 1
            point = (hi << inner) | lane
            return False, {w: (point >> j) & 1 for j, w in enumerate(variables)}
    return True, None


def assignments(wires: Sequence[str]) -> Iterable[dict[str, int]]:
    """All assignments of ``wires`` in lexicographic order (first wire most significant)."""
    for bits in itertools.product((0, 1), repeat=len(wires)):
        yield dict(zip(wires, bits))
