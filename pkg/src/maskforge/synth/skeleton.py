"""Skeleton circuits: one complete binary tree of undetermined gates per split output.

A tree of height h has ``2**(h-1) - 1`` internal slots and ``2**(h-1)`` leaf
slots, numbered heap-style (root 1, children 2i and 2i+1), so height 1 is a
single leaf.  Internal slots choose among XOR/AND/OR; leaf slots choose a
constant, a public, an extra random or a share of some encoder.  The split
outputs are XOR-folded by a fixed decoder and each secret gets a fixed
encoder with n randoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from ..circuit import Circuit, Decoder, Encoder, Gate, lane_pattern

OPS = ("XOR", "AND", "OR")


@dataclass(frozen=True)
class Slot:
    index: int  # position in Skeleton.slots (the control variable index)
    tree: int
    heap: int
    depth: int  # root is depth 1
    is_leaf: bool

    @property
    def name(self) -> str:
        return f"g{self.tree + 1}_{self.heap}"


@dataclass(frozen=True)
class Skeleton:
    height: int
    order: int
    publics: tuple[str, ...]
    secrets: tuple[str, ...]
    encoders: tuple[Encoder, ...]
    extra_randoms: tuple[str, ...]
    output: str = "o"

    @property
    def trees(self) -> int:
        return self.order + 1

    @property
    def tree_size(self) -> int:
        return (1 << self.height) - 1

    @cached_property
    def slots(self) -> tuple[Slot, ...]:
        first_leaf = 1 << (self.height - 1)
        out = []
        for t in range(self.trees):
            for h in range(1, self.tree_size + 1):
                out.append(Slot(len(out), t, h, h.bit_length(), h >= first_leaf))
        return tuple(out)

    @cached_property
    def randoms(self) -> tuple[str, ...]:
        return tuple(r for e in self.encoders for r in e.randoms) + self.extra_randoms

    @cached_property
    def leaf_menu(self) -> tuple[str, ...]:
        """Leaf choices in backend order: F, T, publics, extra randoms, shares."""
        return ("F", "T") + self.publics + self.extra_randoms + tuple(s for e in self.encoders for s in e.shares)

    def choices(self, slot: Slot) -> tuple[str, ...]:
        return self.leaf_menu if slot.is_leaf else OPS

    def slot_of(self, tree: int, heap: int) -> Slot:
        return self.slots[tree * self.tree_size + heap - 1]

    @cached_property
    def input_nodes(self) -> tuple[str, ...]:
        """Observable input wires (ranked after every slot)."""
        return self.publics + self.extra_randoms + tuple(s for e in self.encoders for s in e.shares)

    @cached_property
    def ranking(self) -> tuple[object, ...]:
        """Skeleton nodes root-most first: slots by (depth, tree, heap), then input wires."""
        slots = sorted(self.slots, key=lambda s: (s.depth, s.tree, s.heap))
        return tuple(slots) + self.input_nodes

    def level_of_rank(self, gamma: int) -> int:
        """Smallest depth level covering the root-most ``gamma`` nodes.

        Levels 1..height are slot depths; level height+1 adds the input wires.
        """
        covered = 0
        for d in range(1, self.height + 1):
            covered += self.trees << (d - 1)
            if covered >= gamma:
                return d
        return self.height + 1

    def control_space(self) -> int:
        size = 1
        for s in self.slots:
            size *= len(self.choices(s))
        return size


def build_skeleton(height: int, n: int, publics: Sequence[str], secrets: Sequence[str], q: int | None = None,
                   output: str = "o") -> Skeleton:
    if height < 1:
        raise ValueError("skeleton height must be at least 1")
    q = n if q is None else q
    encs = []
    for k in secrets:
        rs = tuple(f"r_{k}_{i + 1}" for i in range(n))
        shares = tuple(f"{k}_{i + 1}" for i in range(n + 1))
        encs.append(Encoder(k, rs, shares))
    extras = tuple(f"q{i + 1}" for i in range(q))
    return Skeleton(height, n, tuple(publics), tuple(secrets), tuple(encs), extras, output)


@dataclass(frozen=True)
class ControlAssignment:
    """One choice index per slot (the control variables C)."""

    choices: tuple[int, ...]

    def describe(self, sk: Skeleton) -> dict[str, str]:
        return {s.name: sk.choices(s)[c] for s, c in zip(sk.slots, self.choices)}


def instantiate(sk: Skeleton, C: ControlAssignment, name: str = "synth") -> Circuit:
    """The circuit selected by ``C``.  Unused extra randoms and encoders are dropped."""
    if len(C.choices) != len(sk.slots):
        raise ValueError("control assignment does not match the skeleton")
    gates: list[Gate] = []
    wire: dict[int, str] = {}
    for s in sorted(sk.slots, key=lambda s: (s.tree, -s.heap)):
        choice = sk.choices(s)[C.choices[s.index]]
        if s.is_leaf:
            if choice in ("F", "T"):
                gates.append(Gate(s.name, "CONST0" if choice == "F" else "CONST1"))
                wire[s.index] = s.name
            else:
                wire[s.index] = choice
        else:
            left = wire[sk.slot_of(s.tree, 2 * s.heap).index]
            right = wire[sk.slot_of(s.tree, 2 * s.heap + 1).index]
            gates.append(Gate(s.name, choice, (left, right)))
            wire[s.index] = s.name
    used = {i for g in gates for i in g.inputs}
    roots = [wire[sk.slot_of(t, 1).index] for t in range(sk.trees)]
    used.update(roots)
    encoders = tuple(e for e in sk.encoders if used & set(e.shares))
    extras = tuple(r for r in sk.extra_randoms if r in used)
    randoms = tuple(r for e in encoders for r in e.randoms) + extras
    return Circuit(name, sk.publics, sk.secrets, randoms, encoders, tuple(gates),
                   (Decoder(sk.output, tuple(roots)),), (sk.output,))


def node_rank(sk: Skeleton, C: ControlAssignment, node: str) -> int:
    """1-based rank of the root-most skeleton node carrying circuit node ``node``."""
    for i, item in enumerate(sk.ranking, start=1):
        if isinstance(item, Slot):
            if item.name == node:
                return i
            if item.is_leaf and sk.leaf_menu[C.choices[item.index]] == node:
                return i
        elif item == node:
            return i
    raise KeyError(node)


# -- evaluation over test rows ---------------------------------------------


class RowSpace:
    """Lane layout for a list of (public, secret) rows times all random assignments.

    Row i owns lanes ``[i * W, (i + 1) * W)`` where ``W = 2**|randoms|``.
    """

    def __init__(self, sk: Skeleton, rows: Sequence[tuple[tuple[int, ...], tuple[int, ...]]]):
        self.sk = sk
        self.rows = list(rows)
        self.nr = len(sk.randoms)
        self.W = 1 << self.nr
        self.block = (1 << self.W) - 1
        self.lanes = self.W * len(self.rows)
        self.full = (1 << self.lanes) - 1
        rep = self.full // self.block if self.rows else 0
        self.row_masks = [self.block << (i * self.W) for i in range(len(self.rows))]
        values: dict[str, int] = {}
        for j, p in enumerate(sk.publics):
            values[p] = sum(m for m, (bp, _) in zip(self.row_masks, self.rows) if bp[j])
        secret_vec = {}
        for j, k in enumerate(sk.secrets):
            secret_vec[k] = sum(m for m, (_, bk) in zip(self.row_masks, self.rows) if bk[j])
        rvec = {r: lane_pattern(j, self.nr) * rep for j, r in enumerate(sk.randoms)}
        values.update((r, rvec[r]) for r in sk.extra_randoms)
        for e in sk.encoders:
            acc = secret_vec[e.secret]
            for s, r in zip(e.shares, e.randoms):
                values[s] = rvec[r]
                acc ^= rvec[r]
            values[e.shares[-1]] = acc
        values["F"] = 0
        values["T"] = self.full
        self.values = values

    def leaf(self, item: str) -> int:
        return self.values[item]

    def slot_values(self, C: ControlAssignment) -> list[int]:
        sk = self.sk
        out = [0] * len(sk.slots)
        for s in sorted(sk.slots, key=lambda s: (s.tree, -s.heap)):
            c = C.choices[s.index]
            if s.is_leaf:
                out[s.index] = self.values[sk.leaf_menu[c]]
            else:
                a = out[sk.slot_of(s.tree, 2 * s.heap).index]
                b = out[sk.slot_of(s.tree, 2 * s.heap + 1).index]
                out[s.index] = apply_op(OPS[c], a, b)
        return out

    def row_count(self, vec: int, i: int) -> int:
        return ((vec >> (i * self.W)) & self.block).bit_count()


def apply_op(op: str, a: int, b: int) -> int:
    if op == "XOR":
        return a ^ b
    if op == "AND":
        return a & b
    return a | b
