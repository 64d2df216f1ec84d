"""Exact leakage-resilience checking under the n-threshold-probing model.

For every public valuation, every pair of secret valuations and every set of
at most n observable nodes, the joint distribution of the selected nodes over
all random assignments must not depend on the secrets.  Distributions are
kept as integer counts (never normalized) and computed bit-parallel: lane i of
a simulation holds the evaluation under the random assignment encoded by i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .circuit import (
    AssignmentError,
    Circuit,
    SelectionError,
    StructureError,
    dependency_map,
    lane_pattern,
)

DEFAULT_CAP = 1 << 24


class VerificationInfeasible(RuntimeError):
    """Exact verification would exceed the configured work cap."""


@dataclass(frozen=True)
class DistTable:
    """Counts of each joint valuation of a selection over all random assignments.

    ``counts[v]`` is the count for the bit-vector packed into ``v`` with the
    first selected node as the most significant bit.
    """

    selection: tuple[str, ...]
    counts: tuple[int, ...]
    random_count: int

    def __getitem__(self, bits: Sequence[int]) -> int:
        v = 0
        for b in bits:
            v = (v << 1) | (b & 1)
        return self.counts[v]

    def as_dict(self) -> dict[tuple[int, ...], int]:
        k = len(self.selection)
        return {tuple((v >> (k - 1 - i)) & 1 for i in range(k)): c for v, c in enumerate(self.counts)}

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class LeakWitness:
    selection: tuple[str, ...]
    publics: dict[str, int]
    secrets: dict[str, int]
    secrets_alt: dict[str, int]
    dist: DistTable
    dist_alt: DistTable

    def to_json(self) -> dict:
        return {
            "selection": list(self.selection),
            "publics": self.publics,
            "secrets": self.secrets,
            "secrets_alt": self.secrets_alt,
            "dist": {"".join(map(str, k)): v for k, v in self.dist.as_dict().items()},
            "dist_alt": {"".join(map(str, k)): v for k, v in self.dist_alt.as_dict().items()},
        }


@dataclass
class Verdict:
    ok: bool
    order: int
    witness: LeakWitness | None = None
    checked_selections: int = 0
    pruned_selections: int = 0
    notes: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out = {
            "verdict": "ok" if self.ok else "leak",
            "order": self.order,
            "checked_selections": self.checked_selections,
            "pruned_selections": self.pruned_selections,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


# -- helpers ---------------------------------------------------------------


def _valuation(wires: Sequence[str], bits, what: str) -> dict[str, int]:
    if isinstance(bits, Mapping):
        missing = [w for w in wires if w not in bits]
        if missing:
            raise AssignmentError(f"{what} valuation misses {missing}")
        return {w: int(bits[w]) & 1 for w in wires}
    bits = tuple(bits)
    if len(bits) != len(wires):
        raise AssignmentError(f"{what} valuation needs {len(wires)} bits, got {len(bits)}")
    return {w: int(b) & 1 for w, b in zip(wires, bits)}


def _from_int(wires: Sequence[str], v: int) -> dict[str, int]:
    # first wire is the most significant bit
    k = len(wires)
    return {w: (v >> (k - 1 - i)) & 1 for i, w in enumerate(wires)}


class _Lanes:
    """Bit-parallel simulation of a circuit over all random assignments."""

    def __init__(self, c: Circuit):
        self.c = c
        self.nr = len(c.randoms)
        self.full = (1 << (1 << self.nr)) - 1
        self.rmasks = [lane_pattern(j, self.nr) for j in range(self.nr)]

    def run(self, publics: Mapping[str, int], secrets: Mapping[str, int]) -> list[int]:
        c, full = self.c, self.full
        vec = [full if publics[p] else 0 for p in c.publics]
        vec += [full if secrets[k] else 0 for k in c.secrets]
        vec += self.rmasks
        return c.simulate(vec, full)


def _counts(vectors: Sequence[int], full: int) -> tuple[int, ...]:
    out = []
    s = len(vectors)
    for v in range(1 << s):
        acc = full
        for i, x in enumerate(vectors):
            acc &= x if (v >> (s - 1 - i)) & 1 else full ^ x
        out.append(acc.bit_count())
    return tuple(out)


def _signature(vectors: Sequence[int], full: int) -> tuple[int, ...]:
    # popcounts of the AND of every subset; determines the distribution exactly
    prods = [full]
    for x in vectors:
        prods += [p & x for p in prods]
    return tuple(p.bit_count() for p in prods)


def dist(c: Circuit, b_p, b_k, sel: Sequence[str]) -> DistTable:
    """Joint distribution (as counts) of ``sel`` for fixed publics and secrets."""
    sel = tuple(sel)
    obs = set(c.observable)
    for a in sel:
        if a not in obs:
            raise SelectionError(f"{a!r} is not an observable node of {c.name}")
    lanes = _Lanes(c)
    vals = lanes.run(_valuation(c.publics, b_p, "public"), _valuation(c.secrets, b_k, "secret"))
    vectors = [vals[c.index_of(a)] for a in sel]
    return DistTable(sel, _counts(vectors, lanes.full), lanes.nr)


# -- selections ------------------------------------------------------------


def _share_groups(c: Circuit) -> list[frozenset[str]]:
    groups = [frozenset(e.shares) for e in c.encoders]
    groups += [frozenset([k]) for k in c.raw_secrets]
    return groups


def relevant_selections(c: Circuit, n: int) -> Iterable[tuple[str, ...]]:
    """Selections of at most n nodes whose dependencies cover a full share group.

    Any other selection misses at least one share of every encoder and so sees
    a secret-independent distribution.
    """
    deps = dependency_map(c)
    groups = _share_groups(c)
    obs = c.observable
    for size in range(1, min(n, len(obs)) + 1):
        for combo in itertools.combinations(obs, size):
            cover: frozenset[str] = frozenset()
            for a in combo:
                cover = cover | deps[a]
            if any(g <= cover for g in groups):
                yield combo


def all_selections(c: Circuit, n: int) -> Iterable[tuple[str, ...]]:
    obs = c.observable
    for size in range(1, min(n, len(obs)) + 1):
        yield from itertools.combinations(obs, size)


def selection_work(c: Circuit, selections: Iterable[tuple[str, ...]]) -> int:
    """Sum over selections of 2**(randoms in the selection's cone).

    Randoms outside a selection's cone only scale its distribution by a
    constant, so this is the number of random assignments that matter.
    """
    deps = dependency_map(c)
    owner = {s: e.randoms for e in c.encoders for s in e.shares}
    extra = set(c.extra_randoms)
    leaf_rs: dict[str, frozenset[str]] = {}
    for a in c.observable:
        rs: set[str] = set()
        for leaf in deps[a]:
            if leaf in owner:
                rs.update(owner[leaf])
            elif leaf in extra:
                rs.add(leaf)
        leaf_rs[a] = frozenset(rs)
    total = 0
    for sel in selections:
        total += 1 << len(frozenset().union(*(leaf_rs[a] for a in sel)))
    return total


def _check_structure(c: Circuit) -> None:
    if c.raw_secrets:
        raise StructureError(f"{c.name}: secrets {list(c.raw_secrets)} are used without an encoder")
    c.share_width  # raises on mixed widths


# -- the checker -----------------------------------------------------------


def first_leak(c: Circuit, selections: Sequence[tuple[str, ...]]) -> LeakWitness | None:
    """Earliest leaking (selection, publics, secret pair) in enumeration order.

    Order: selections as given, then public valuations, then the secret pair
    (lowest secret valuation, first valuation whose distribution differs).
    """
    if not selections or not c.secrets:
        return None
    lanes = _Lanes(c)
    full = lanes.full
    pos = [[c.index_of(a) for a in s] for s in selections]
    best: tuple[int, int, int] | None = None
    np_, nk = len(c.publics), len(c.secrets)
    for bp in range(1 << np_):
        pub = _from_int(c.publics, bp)
        runs = [lanes.run(pub, _from_int(c.secrets, bk)) for bk in range(1 << nk)]
        limit = len(selections) if best is None else best[0]
        for si in range(limit):
            ref = _signature([runs[0][i] for i in pos[si]], full)
            hit = None
            for bk in range(1, 1 << nk):
                if _signature([runs[bk][i] for i in pos[si]], full) != ref:
                    hit = bk
                    break
            if hit is not None:
                best = (si, bp, hit)
                break
    if best is None:
        return None
    si, bp, bk = best
    pub = _from_int(c.publics, bp)
    s0, s1 = _from_int(c.secrets, 0), _from_int(c.secrets, bk)
    sel = selections[si]
    return LeakWitness(sel, pub, s0, s1, dist(c, pub, s0, sel), dist(c, pub, s1, sel))


def verify_nlr(c: Circuit, n: int, prune: bool = True, cap: int = DEFAULT_CAP, strict: bool = True) -> Verdict:
    """Check n-leakage-resilience of ``c`` exactly.

    ``strict`` rejects circuits that use a secret without encoding it.  With
    ``strict=False`` such secrets are treated as single-share groups, which is
    how random-free circuits are shown to leak.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    if strict:
        _check_structure(c)
    total = sum(1 for _ in all_selections(c, n))
    sels = list(relevant_selections(c, n)) if prune else list(all_selections(c, n))
    work = selection_work(c, sels)
    if work > cap:
        raise VerificationInfeasible(f"{c.name}: {len(sels)} selections need {work} evaluations, cap is {cap}")
    witness = first_leak(c, sels)
    return Verdict(witness is None, n, witness, len(sels), total - len(sels))


def verify_budgeted(c: Circuit, budgets: Sequence[tuple[Iterable[str], int]], prune: bool = True,
                    cap: int = DEFAULT_CAP) -> Verdict:
    """Verify against an adversary with a separate probe budget per node group.

    ``budgets`` is a list of ``(nodes, b)``: at most b probes among ``nodes``.
    Groups must be disjoint; nodes outside every group are never probed.
    """
    obs_index = {a: i for i, a in enumerate(c.observable)}
    groups = []
    seen: set[str] = set()
    for nodes, b in budgets:
        nodes = sorted(set(nodes), key=lambda a: obs_index.get(a, -1))
        for a in nodes:
            if a not in obs_index:
                raise SelectionError(f"{a!r} is not an observable node of {c.name}")
            if a in seen:
                raise ValueError(f"node {a!r} appears in two budget groups")
            seen.add(a)
        groups.append((nodes, b))
    per_group = []
    for nodes, b in groups:
        opts = []
        for size in range(0, min(b, len(nodes)) + 1):
            opts.extend(itertools.combinations(nodes, size))
        per_group.append(opts)
    sels = set()
    for parts in itertools.product(*per_group):
        sel = tuple(sorted((a for p in parts for a in p), key=obs_index.__getitem__))
        if sel:
            sels.add(sel)
    ordered = sorted(sels, key=lambda s: (len(s), [obs_index[a] for a in s]))
    total = len(ordered)
    if prune:
        deps = dependency_map(c)
        share_groups = _share_groups(c)

        def relevant(s):
            cover = frozenset().union(*(deps[a] for a in s))
            return any(g <= cover for g in share_groups)

        ordered = [s for s in ordered if relevant(s)]
    if selection_work(c, ordered) > cap:
        raise VerificationInfeasible(f"{c.name}: budgeted verification exceeds cap {cap}")
    order = sum(b for _, b in groups)
    witness = first_leak(c, ordered)
    return Verdict(witness is None, order, witness, len(ordered), total - len(ordered))


def leaks(c: Circuit, sel: Sequence[str]) -> bool:
    """True if this one selection distinguishes some pair of secret valuations."""
    return first_leak(c, [tuple(sel)]) is not None
