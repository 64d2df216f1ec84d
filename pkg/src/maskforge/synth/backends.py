"""Search backends for restricted constraint systems.

``ExhaustiveBackend`` enumerates control assignments directly.  It is exact:
it returns None only when no assignment satisfies the restricted
constraints.  Two reductions keep it tractable without losing exactness:

* subtrees whose nodes are all below the selectable level are merged when
  they compute the same values on the test rows, and every gate is
  commutative, so mirrored subtrees are merged too;
* the restricted constraints are symmetric in the n+1 output trees (the
  selectable nodes are whole depth levels), so only nondecreasing tuples of
  tree classes are visited, and the last tree is looked up from the
  IO-equation instead of enumerated.

``SmtLibBackend`` writes the same restricted constraints as SMT-LIB2 and
runs an external solver over a pipe.
"""

from __future__ import annotations

import itertools
import re
import shlex
import subprocess
import time
from dataclasses import dataclass
from typing import Sequence

from .constraints import ConstraintSystem, lr_restricted_ok
from .skeleton import OPS, ControlAssignment, RowSpace, Slot, apply_op


class BackendError(RuntimeError):
    """The backend failed (as opposed to proving there is no solution)."""


class SearchTimeout(RuntimeError):
    pass


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass
class _Opt:
    choices: tuple  # (("op", i), left, right) or (("leaf", i),)
    value: int
    sig: object
    vis: tuple[int, ...]


class ExhaustiveBackend:
    name = "exhaustive"

    def __init__(self, max_options: int = 2_000_000):
        self.max_options = max_options
        self.stats = {"tree_classes": 0, "combos": 0}

    def _tree_options(self, cs: ConstraintSystem, space: RowSpace, depth_limit: int, deadline) -> list[_Opt]:
        sk = cs.skeleton
        # every leaf slot has the same menu, so all leaves share one option list
        leaf_opts: list[_Opt] = []
        seen: set = set()
        for ci, item in enumerate(sk.leaf_menu):
            v = space.leaf(item)
            if v in seen:
                continue
            seen.add(v)
            leaf_opts.append(_Opt((("leaf", ci),), v, v, (v,)))
        by_depth: dict[int, list[_Opt]] = {sk.height: leaf_opts}
        work = 0
        for d in range(sk.height - 1, 0, -1):
            below = by_depth[d + 1]
            visible = d <= depth_limit
            out: list[_Opt] = []
            index: dict = {}
            for oi, op in enumerate(OPS):
                for li, left in enumerate(below):
                    for right in below[li:]:
                        work += 1
                        if work % 4096 == 0 and deadline is not None and time.monotonic() > deadline:
                            raise SearchTimeout("tree enumeration timed out")
                        v = apply_op(op, left.value, right.value)
                        if visible:
                            a, b = sorted((left.sig, right.sig), key=hash)
                            sig = (v, a, b)
                        else:
                            sig = v
                        if sig in index:
                            continue
                        index[sig] = len(out)
                        vis = ((v,) + left.vis + right.vis) if visible else ()
                        out.append(_Opt((("op", oi), left.choices, right.choices), v, sig, vis))
                        if len(out) > self.max_options:
                            raise SearchBudgetExceeded(f"more than {self.max_options} subtree classes at depth {d}")
            by_depth[d] = out
        return by_depth[1]

    def find(self, cs: ConstraintSystem, deadline: float | None = None) -> ControlAssignment | None:
        sk = cs.skeleton
        tset = cs.tset
        if tset is None:
            raise ValueError("the exhaustive backend needs a test set")
        rows = tset.rows()
        if not rows:
            return ControlAssignment((0,) * len(sk.slots))
        space = RowSpace(sk, rows)
        level = cs.level() if cs.has_lr else 0
        tree_opts = self._tree_options(cs, space, level, deadline)
        lr = cs.has_lr and len(tset.secrets) > 1 and bool(tset.alphas)
        if lr:
            tree_opts = [o for o in tree_opts if lr_restricted_ok(space, o.vis, cs.order, tset)]
        self.stats["tree_classes"] = len(tree_opts)
        inputs = [space.values[w] for w in sk.input_nodes] if level > sk.height else []
        target = cs.target(space) if cs.has_io else None
        m = sk.trees
        by_value: dict[int, list[int]] = {}
        for i, o in enumerate(tree_opts):
            by_value.setdefault(o.value, []).append(i)
        counter = 0

        def check(idx: Sequence[int], final: bool) -> bool:
            # earlier prefixes already passed, so only selections touching the newest tree matter
            if not lr:
                return True
            vecs = [v for i in idx[:-1] for v in tree_opts[i].vis]
            start = len(vecs)
            vecs += tree_opts[idx[-1]].vis
            if final:
                vecs += inputs
            return lr_restricted_ok(space, vecs, cs.order, tset, _touching(len(vecs), start, cs.order))

        def search(prefix: list[int], acc: int):
            nonlocal counter
            counter += 1
            if counter % 2048 == 0 and deadline is not None and time.monotonic() > deadline:
                raise SearchTimeout("candidate search timed out")
            start = prefix[-1] if prefix else 0
            if len(prefix) == m - 1 and target is not None:
                need = target ^ acc
                for j in by_value.get(need, ()):
                    if j >= start and check(prefix + [j], True):
                        return prefix + [j]
                return None
            for j in range(start, len(tree_opts)):
                nxt = prefix + [j]
                if len(nxt) == m:
                    if check(nxt, True):
                        return nxt
                    continue
                if len(nxt) > 1 and not check(nxt, False):
                    continue
                found = search(nxt, acc ^ tree_opts[j].value)
                if found is not None:
                    return found
            return None

        found = search([], 0)
        self.stats["combos"] = counter
        if found is None:
            return None
        choices = [0] * len(sk.slots)
        for t, j in enumerate(found):
            _assign(sk, t, 1, tree_opts[j].choices, choices)
        return ControlAssignment(tuple(choices))


def _touching(total: int, start: int, n: int):
    """Index combinations of size <= n over range(total) with at least one index >= start."""
    for size in range(1, n + 1):
        for last in range(start, total):
            for rest in itertools.combinations(range(last), size - 1):
                yield rest + (last,)


def _assign(sk, tree: int, heap: int, choices, out: list[int]) -> None:
    if choices[0][0] == "op":
        out[sk.slot_of(tree, heap).index] = choices[0][1]
        _assign(sk, tree, 2 * heap, choices[1], out)
        _assign(sk, tree, 2 * heap + 1, choices[2], out)
    else:
        out[sk.slot_of(tree, heap).index] = choices[0][1]


# -- SMT-LIB ---------------------------------------------------------------


class SmtLibBackend:
    """Restricted constraints as SMT-LIB2, solved by an external process."""

    def __init__(self, command: str = "z3 -in"):
        self.command = command
        self.name = f"smtlib:{command}"
        self.last_script = ""

    def script(self, cs: ConstraintSystem) -> str:
        sk = cs.skeleton
        tset = cs.tset
        rows = tset.rows()
        space = RowSpace(sk, rows)
        out = ["(set-option :produce-models true)", "(set-logic QF_LIA)"]
        for s in sk.slots:
            k = len(sk.choices(s))
            out.append(f"(declare-const c{s.index} Int)")
            out.append(f"(assert (and (<= 0 c{s.index}) (< c{s.index} {k})))")
        lanes = space.lanes
        order = sorted(sk.slots, key=lambda s: (s.tree, -s.heap))
        leaf_vals = [space.leaf(item) for item in sk.leaf_menu]
        for lane in range(lanes):
            for s in order:
                name = f"v{s.index}_{lane}"
                if s.is_leaf:
                    hits = [f"(= c{s.index} {ci})" for ci, v in enumerate(leaf_vals) if (v >> lane) & 1]
                    body = "false" if not hits else hits[0] if len(hits) == 1 else f"(or {' '.join(hits)})"
                else:
                    a = f"v{sk.slot_of(s.tree, 2 * s.heap).index}_{lane}"
                    b = f"v{sk.slot_of(s.tree, 2 * s.heap + 1).index}_{lane}"
                    body = (f"(ite (= c{s.index} 0) (xor {a} {b}) "
                            f"(ite (= c{s.index} 1) (and {a} {b}) (or {a} {b})))")
                out.append(f"(define-fun {name} () Bool {body})")
        if cs.has_io:
            target = cs.target(space)
            for lane in range(lanes):
                acc = f"v{sk.slot_of(0, 1).index}_{lane}"
                for t in range(1, sk.trees):
                    acc = f"(xor {acc} v{sk.slot_of(t, 1).index}_{lane})"
                out.append(f"(assert (= {acc} {'true' if (target >> lane) & 1 else 'false'}))")
        if cs.has_lr and len(tset.secrets) > 1 and tset.alphas:
            nodes = cs.selectable()
            nk = len(tset.secrets)

            def lit(node, bit, lane):
                if isinstance(node, Slot):
                    v = f"v{node.index}_{lane}"
                    return v if bit else f"(not {v})"
                val = (space.values[node] >> lane) & 1
                return "true" if val == bit else "false"

            for size in range(1, cs.order + 1):
                alphas = [a for a in tset.alphas if len(a) == size]
                if not alphas:
                    continue
                for combo in itertools.combinations(nodes, size):
                    for a in alphas:
                        for pi in range(len(tset.publics)):
                            sums = []
                            for ki in range(nk):
                                row = pi * nk + ki
                                terms = []
                                for lane in range(row * space.W, (row + 1) * space.W):
                                    lits = [lit(x, b, lane) for x, b in zip(combo, a)]
                                    if "false" in lits:
                                        continue
                                    lits = [x for x in lits if x != "true"]
                                    cond = "true" if not lits else lits[0] if len(lits) == 1 else f"(and {' '.join(lits)})"
                                    terms.append(f"(ite {cond} 1 0)")
                                sums.append("0" if not terms else terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})")
                            for s in sums[1:]:
                                out.append(f"(assert (= {sums[0]} {s}))")
        out.append("(check-sat)")
        out.append("(get-value (" + " ".join(f"c{s.index}" for s in sk.slots) + "))")
        return "\n".join(out) + "\n"

    def find(self, cs: ConstraintSystem, deadline: float | None = None) -> ControlAssignment | None:
        sk = cs.skeleton
        if cs.tset is None:
            raise ValueError("the SMT-LIB backend needs a test set")
        if not cs.tset.rows():
            return ControlAssignment((0,) * len(sk.slots))
        text = self.script(cs)
        self.last_script = text
        timeout = None if deadline is None else max(0.1, deadline - time.monotonic())
        try:
            proc = subprocess.run(shlex.split(self.command), input=text, capture_output=True, text=True,
                                  timeout=timeout)
        except subprocess.TimeoutExpired:
            raise SearchTimeout("solver timed out") from None
        except OSError as e:
            raise BackendError(f"cannot run {self.command!r}: {e}") from None
        lines = proc.stdout.strip().splitlines()
        if not lines:
            raise BackendError(f"solver produced no output: {proc.stderr.strip()}")
        verdict = lines[0].strip()
        if verdict == "unsat":
            return None
        if verdict != "sat":
            raise BackendError(f"solver said {verdict!r}: {proc.stderr.strip() or proc.stdout.strip()}")
        values = dict((int(i), int(v)) for i, v in re.findall(r"\(c(\d+)\s+(-?\d+)\)", " ".join(lines[1:])))
        if len(values) != len(sk.slots):
            raise BackendError("incomplete model from solver")
        return ControlAssignment(tuple(values[s.index] for s in sk.slots))


def make_backend(spec: str | None):
    """``exhaustive`` or ``smtlib[:<command>]``."""
    if spec is None or spec == "exhaustive":
        return ExhaustiveBackend()
    if spec == "smtlib":
        return SmtLibBackend()
    if spec.startswith("smtlib:"):
        return SmtLibBackend(spec.split(":", 1)[1])
    raise ValueError(f"unknown backend {spec!r}")
