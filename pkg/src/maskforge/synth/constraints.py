"""IO-equivalence and leakage-resilience constraints over control assignments.

A :class:`ConstraintSystem` states *what* a control assignment must satisfy;
backends decide *how* to search for one.  Without a test set the constraints
are the full conditions (the instantiated circuit is IO-equivalent to the
reference and passes the exact verifier).  With a test set they are
restricted to the listed public/secret valuations, to the listed node
valuations, and to selections among the root-most nodes.  Restricted
constraints are implied by the full ones, so restricting never loses a
solution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

from ..circuit import Circuit, io_equivalent
from ..verify import verify_nlr
from .skeleton import ControlAssignment, RowSpace, Skeleton, Slot, instantiate


@dataclass
class TestSet:
    """Concrete valuations that candidate finding must respect.

    Public and secret valuations are tuples in declaration order; node
    valuations are bit tuples matched against selections of equal size.
    ``gamma`` is the number of root-most nodes the adversary may pick from.
    """

    publics: list[tuple[int, ...]] = field(default_factory=list)
    secrets: list[tuple[int, ...]] = field(default_factory=list)
    alphas: list[tuple[int, ...]] = field(default_factory=list)
    gamma: int = 0

    __test__ = False  # not a pytest class

    @staticmethod
    def _add(items, value) -> bool:
        if value in items:
            return False
        items.append(value)
        return True

    def add_public(self, v) -> bool:
        return self._add(self.publics, tuple(v))

    def add_secret(self, v) -> bool:
        return self._add(self.secrets, tuple(v))

    def add_alpha(self, v) -> bool:
        # closed under permutation, so the order of nodes in a selection is irrelevant
        grew = False
        for perm in sorted(set(itertools.permutations(tuple(v)))):
            grew |= self._add(self.alphas, perm)
        return grew

    def union(self, other: "TestSet") -> bool:
        """Component-wise union; gamma becomes the max.  Returns True if anything grew."""
        grew = False
        for v in other.publics:
            grew |= self.add_public(v)
        for v in other.secrets:
            grew |= self.add_secret(v)
        for v in other.alphas:
            grew |= self.add_alpha(v)
        if other.gamma > self.gamma:
            self.gamma = other.gamma
            grew = True
        return grew

    def copy(self) -> "TestSet":
        return TestSet(list(self.publics), list(self.secrets), list(self.alphas), self.gamma)

    def rows(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return [(bp, bk) for bp in self.publics for bk in self.secrets]


def full_testset(publics: Sequence[str], secrets: Sequence[str], gamma: int = 0) -> TestSet:
    ps = list(itertools.product((0, 1), repeat=len(publics)))
    ks = list(itertools.product((0, 1), repeat=len(secrets)))
    return TestSet(ps, ks, [], gamma)


@dataclass(frozen=True)
class ConstraintSystem:
    skeleton: Skeleton
    reference: Circuit | None = None  # required for the IO part
    order: int | None = None  # required for the LR part
    tset: TestSet | None = None

    @property
    def has_io(self) -> bool:
        return self.reference is not None

    @property
    def has_lr(self) -> bool:
        return self.order is not None

    def __and__(self, other: "ConstraintSystem") -> "ConstraintSystem":
        if other.skeleton != self.skeleton:
            raise ValueError("constraints over different skeletons")
        return ConstraintSystem(self.skeleton, self.reference or other.reference,
                                self.order if self.order is not None else other.order, self.tset or other.tset)

    def restrict(self, tset: TestSet) -> "ConstraintSystem":
        return replace(self, tset=tset)

    # -- restricted pieces shared by the backends ------------------------

    def level(self) -> int:
        """Depth level of the selectable nodes (height+1 means inputs too)."""
        assert self.tset is not None
        return self.skeleton.level_of_rank(max(self.tset.gamma, self.order or 0))

    def selectable(self) -> list[object]:
        sk = self.skeleton
        d = self.level()
        nodes: list[object] = [s for s in sk.ranking if isinstance(s, Slot) and s.depth <= d]
        if d > sk.height:
            nodes.extend(sk.input_nodes)
        return nodes

    def target(self, space: RowSpace) -> int:
        """Reference output on every row, broadcast over the random lanes."""
        p = self.reference
        vec = 0
        for i, (bp, bk) in enumerate(space.rows):
            nu = dict(zip(p.publics, bp))
            nu.update(zip(p.secrets, bk))
            if _reference_output(p, nu):
                vec |= space.row_masks[i]
        return vec

    # -- semantics ---------------------------------------------------------

    def holds(self, C: ControlAssignment) -> bool:
        """Reference semantics of the constraint for one control assignment."""
        if self.tset is None:
            cand = instantiate(self.skeleton, C)
            if self.has_io and not io_equivalent(self.reference, cand)[0]:
                return False
            if self.has_lr and not verify_nlr(cand, self.order, strict=False, cap=1 << 40).ok:
                return False
            return True
        space = RowSpace(self.skeleton, self.tset.rows())
        vals = space.slot_values(C)
        if self.has_io:
            roots = 0
            for t in range(self.skeleton.trees):
                roots ^= vals[self.skeleton.slot_of(t, 1).index]
            if roots != self.target(space):
                return False
        if self.has_lr:
            vecs = [vals[x.index] if isinstance(x, Slot) else space.values[x] for x in self.selectable()]
            if not lr_restricted_ok(space, vecs, self.order, self.tset):
                return False
        return True


def _reference_output(p: Circuit, nu: dict[str, int]) -> int:
    vals = p.simulate([nu[w] for w in p.inputs])
    return vals[p.index_of(p.outputs[0])]


def lr_restricted_ok(space: RowSpace, vecs: Sequence[int], n: int, tset: TestSet,
                     combos=None) -> bool:
    """Count equality for every selection of <= n of ``vecs`` and every tested valuation.

    ``combos`` optionally limits the selections (index tuples into ``vecs``).
    """
    if len(tset.secrets) < 2 or not tset.alphas:
        return True
    by_arity: dict[int, list[tuple[int, ...]]] = {}
    for a in tset.alphas:
        by_arity.setdefault(len(a), []).append(a)
    nk = len(tset.secrets)
    full = space.full
    if combos is None:
        combos = (c for size in range(1, n + 1) if size in by_arity
                  for c in itertools.combinations(range(len(vecs)), size))
    for combo in combos:
        alphas = by_arity.get(len(combo))
        if not alphas:
            continue
        xs = [vecs[i] for i in combo]
        for a in alphas:
            acc = full
            for x, bit in zip(xs, a):
                acc &= x if bit else full ^ x
            for pi in range(len(tset.publics)):
                base = pi * nk
                ref = space.row_count(acc, base)
                for ki in range(1, nk):
                    if space.row_count(acc, base + ki) != ref:
                        return False
    return True


def encode_phi_io(p: Circuit, sk: Skeleton) -> ConstraintSystem:
    if not p.is_random_free or len(p.outputs) != 1:
        raise ValueError("the reference must be a random-free single-output circuit")
    if set(p.publics) != set(sk.publics) or set(p.secrets) != set(sk.secrets):
        raise ValueError("reference and skeleton signatures differ")
    if p.publics != sk.publics or p.secrets != sk.secrets:
        raise ValueError("reference and skeleton must declare inputs in the same order")
    return ConstraintSystem(sk, reference=p)


def encode_phi_lr(sk: Skeleton, n: int) -> ConstraintSystem:
    return ConstraintSystem(sk, order=n)
