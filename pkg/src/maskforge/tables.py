"""Truth-table view of split circuits, used as an independent safety oracle.

A table is a multiset of bit rows.  The first ``x * width`` columns are the
split inputs (one block of ``width`` shares per secret), the last ``width``
columns are the split output, and everything observable in between sits in
the middle.  An adversary observation is a *reduction*: keep only the rows
with a given bit in a given column.  A table is safe for budget m when no
sequence of m reductions makes the row counts of the different non-split
inputs differ.  Columns are 0-based.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .circuit import Circuit, StructureError, lane_pattern

MAX_COLUMNS = 24

Row = tuple[int, ...]


class TableOverflow(ValueError):
    pass


def _canon(rows: Iterable[tuple[Row, int]]) -> tuple[tuple[Row, int], ...]:
    acc: Counter = Counter()
    for r, k in rows:
        if k:
            acc[r] += k
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple[Row, int], ...]
    x: int
    width: int

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", _canon(self.rows))
        if len(self.columns) > MAX_COLUMNS:
            raise TableOverflow(f"{len(self.columns)} columns exceed the cap of {MAX_COLUMNS}")
        for r, _ in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("row length does not match the column count")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], x: int, width: int, columns=None) -> "Table":
        rows = [tuple(int(b) for b in r) for r in rows]
        ncol = len(rows[0]) if rows else len(columns or ())
        columns = tuple(columns) if columns is not None else tuple(f"c{i}" for i in range(ncol))
        return cls(columns, tuple((r, 1) for r in rows), x, width)

    def __len__(self) -> int:
        return sum(k for _, k in self.rows)

    def expanded(self) -> list[Row]:
        return [r for r, k in self.rows for _ in range(k)]

    def with_rows(self, rows) -> "Table":
        return Table(self.columns, rows, self.x, self.width)

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns + ("count",))]
        for r, k in self.rows:
            lines.append("\t".join(map(str, r)) + f"\t{k}")
        return "\n".join(lines) + "\n"


def make_table(c: Circuit, publics: Mapping[str, int] | None = None) -> Table:
    """Table of a single-output split circuit with one encoder per secret.

    Publics are fixed by ``publics`` and left out of the columns (a constant
    column never changes a safety verdict).
    """
    if len(c.outputs) != 1 or c.outputs[0] not in c.decoder_map:
        raise StructureError(f"{c.name}: tables need exactly one decoded output")
    if c.raw_secrets:
        raise StructureError(f"{c.name}: secret used without an encoder")
    encs = []
    for k in c.secrets:
        es = c.encoders_of(k)
        if len(es) != 1:
            raise StructureError(f"{c.name}: secret {k} needs exactly one encoder, has {len(es)}")
        encs.append(es[0])
    width = c.share_width
    publics = dict(publics or {})
    if set(publics) != set(c.publics):
        raise StructureError(f"{c.name}: public valuation must cover {list(c.publics)}")
    dec = c.decoder_map[c.outputs[0]]
    in_cols = [s for e in encs for s in e.shares]
    out_cols = list(dec.splits)
    skip = set(in_cols) | set(out_cols) | set(c.publics)
    mid_cols = [a for a in c.observable if a not in skip]
    columns = in_cols + mid_cols + out_cols
    if len(columns) > MAX_COLUMNS:
        raise TableOverflow(f"{c.name}: {len(columns)} columns exceed the cap of {MAX_COLUMNS}")
    # free variables: every share and every extra random, enumerated directly
    free = in_cols + list(c.extra_randoms)
    nf = len(free)
    lanes = 1 << nf
    full = (1 << lanes) - 1
    pat = {w: lane_pattern(j, nf) for j, w in enumerate(free)}
    # drive the circuit through its own inputs: each encoder random equals its
    # share, and the secret equals the XOR of the shares
    vec = []
    for w in c.inputs:
        if w in publics:
            vec.append(full if publics[w] else 0)
        elif w in c.secrets:
            e = encs[c.secrets.index(w)]
            acc = 0
            for s in e.shares:
                acc ^= pat[s]
            vec.append(acc)
        elif w in c.extra_randoms:
            vec.append(pat[w])
        else:
            e = next(e for e in encs if w in e.randoms)
            vec.append(pat[e.shares[e.randoms.index(w)]])
    vals = c.simulate(vec, full)
    colvals = [vals[c.index_of(a)] for a in columns]
    counts: Counter = Counter()
    for lane in range(lanes):
        counts[tuple((v >> lane) & 1 for v in colvals)] += 1
    return Table(tuple(columns), tuple(counts.items()), len(encs), width)


def _block_xor(r: Row, i: int, m: int) -> int:
    acc = 0
    for b in r[i * m:(i + 1) * m]:
        acc ^= b
    return acc


def restrict(t: Table, b: Sequence[int], m: int | None = None) -> Table:
    """Rows whose i-th m-wide block XORs to b[i]."""
    m = t.width if m is None else m
    b = tuple(b)
    if len(b) * m > len(t.columns):
        raise ValueError(f"restriction of width {len(b)}x{m} exceeds {len(t.columns)} columns")
    return t.with_rows((r, k) for r, k in t.rows if all(_block_xor(r, i, m) == bi for i, bi in enumerate(b)))


def reduce(t: Table, j: int, b: int) -> Table:
    """Rows having bit ``b`` in column ``j``."""
    if not 0 <= j < len(t.columns):
        raise IndexError(f"column {j} out of range")
    return t.with_rows((r, k) for r, k in t.rows if r[j] == b)


def _restriction_counts(rows, x: int, width: int) -> tuple[int, ...]:
    counts = [0] * (1 << x)
    for r, k in rows:
        v = 0
        for i in range(x):
            v = (v << 1) | _block_xor(r, i, width)
        counts[v] += k
    return tuple(counts)


@lru_cache(maxsize=1 << 18)
def _safe(rows, ncols: int, x: int, m: int, width: int) -> bool:
    if not rows:
        return True
    if m == 0:
        return len(set(_restriction_counts(rows, x, width))) == 1
    children = {rows}  # fewer than m observations is also an attack
    for j in range(ncols):
        for b in (0, 1):
            children.add(tuple(rk for rk in rows if rk[0][j] == b))
    return all(_safe(ch, ncols, x, m - 1, width) for ch in children)


def is_safe(t: Table, x: int | None = None, m: int = 1, ell: int | None = None) -> bool:
    """Safe(x, m, ell): no m reductions unbalance the x-bit restrictions."""
    x = t.x if x is None else x
    ell = t.width if ell is None else ell
    if m < 0 or ell <= 0:
        raise ValueError("need m >= 0 and ell > 0")
    if x * ell > len(t.columns):
        raise ValueError(f"{x} inputs of width {ell} exceed {len(t.columns)} columns")
    return _safe(t.rows, len(t.columns), x, m, ell)


def is_deterministic(t: Table, x: int | None = None, m: int | None = None) -> bool:
    """Every non-split input decodes to a single output bit."""
    x = t.x if x is None else x
    m = t.width if m is None else m
    seen: dict[tuple[int, ...], int] = {}
    for r, _ in t.rows:
        key = tuple(_block_xor(r, i, m) for i in range(x))
        out = 0
        for bit in r[-m:]:
            out ^= bit
        if seen.setdefault(key, out) != out:
            return False
    return True


def join(t1: Table, t2: Table, m: int | None = None) -> Table:
    """Multiset join of t1's last m columns with t2's first m columns."""
    m = t1.width if m is None else m
    if m > len(t1.columns) or m > len(t2.columns):
        raise ValueError("join width exceeds a table's column count")
    index: dict[Row, list[tuple[Row, int]]] = {}
    for r2, k2 in t2.rows:
        index.setdefault(r2[:m], []).append((r2[m:], k2))
    rows = []
    for r1, k1 in t1.rows:
        for tail, k2 in index.get(r1[len(r1) - m:], ()):
            rows.append((r1 + tail, k1 * k2))
    return Table(t1.columns + t2.columns[m:], tuple(rows), t1.x, t1.width)


def reductions(t: Table, steps: int) -> set[tuple[tuple[Row, int], ...]]:
    """Row sets reachable with at most ``steps`` reductions (as canonical rows)."""
    frontier = {t.rows}
    seen = set(frontier)
    for _ in range(steps):
        nxt = set()
        for rows in frontier:
            for j, b in itertools.product(range(len(t.columns)), (0, 1)):
                ch = tuple(rk for rk in rows if rk[0][j] == b)
                if ch not in seen:
                    seen.add(ch)
                    nxt.add(ch)
        frontier = nxt
    return seen


def table_safe_for_all_publics(c: Circuit, n: int) -> bool:
    """Safe(x, n, n+1) of the table of every public valuation of ``c``."""
    for bits in itertools.product((0, 1), repeat=len(c.publics)):
        t = make_table(c, dict(zip(c.publics, bits)))
        if not is_safe(t, t.x, n, t.width):
            return False
    return True
