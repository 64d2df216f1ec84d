"""Compositional synthesis: decompose, mask each piece, recompose, verify.

A random-free circuit is cut into tasks.  Every task computes one wire of
the input circuit from publics, secrets and wires computed by other tasks
(the latter become place-holder secrets).  Public-only logic is never
masked: it is spliced back into the result as plain gates.  Each remaining
task is synthesized with :func:`~maskforge.synth.mono.mono_synth`; when that
times out the task is cut again with a smaller height bound, and at the end
of the schedule (or when a task reads too many secrets) it is masked with
the ISW transform instead.  Masked tasks are glued by sequential and
output-sharing composition, so the joints need no extra randomness.  A
wire is output-shared only among consumers that never meet again; other
uses read a private copy of the sub-tree that computes it.
"""

from __future__ import annotations

import random
import re
import time
import warnings
from dataclasses import dataclass, field

from .circuit import Circuit, CircuitError, Decoder, Encoder, Gate, IO_MAX_BITS, io_equivalent, output_values
from .compose import _avoid, _toposort, connect, disjoint, identifiers, internal_names, par_compose_all, rename
from .isw import isw_transform
from .synth.mono import MonoConfig, SynthesisBudgetExceeded, SynthesisTimeout, mono_synth
from .verify import DEFAULT_CAP, VerificationInfeasible, verify_nlr

KINDS = ("public-only", "shared-subcircuit", "per-output", "bounded-tree", "premade-fallback")


class SynthesisError(RuntimeError):
    """The emitted circuit failed its final check (a bug, never expected)."""


@dataclass
class SynthConfig:
    order: int = 1
    height_bound: int = 3
    mono_timeout: float | None = 60.0
    max_secrets: int = 3
    backend: str = "exhaustive"
    max_height: int = 4  # skeleton height limit for one mono_synth call
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.order < 1 or self.height_bound < 1 or self.max_secrets < 1 or self.max_height < 1:
            raise ValueError("order, height bound, max secrets and max height must be positive")
        if self.mono_timeout is not None and self.mono_timeout < 0:
            raise ValueError("mono timeout must be non-negative")


@dataclass
class Task:
    kind: str
    wire: str  # the wire of the source circuit this task computes
    circuit: Circuit  # random-free, single output ``wire``
    cuts: tuple[str, ...] = ()  # place-holder secrets produced by other tasks
    public_cuts: tuple[str, ...] = ()  # public-only wires read as publics

    @property
    def depth(self) -> int:
        return gate_depth(self.circuit)


@dataclass
class DecompPlan:
    source: Circuit
    bound: int
    tasks: list[Task]  # producers before consumers

    def task_of(self, wire: str) -> Task:
        return next(t for t in self.tasks if t.wire == wire)

    @property
    def public_gates(self) -> tuple[Gate, ...]:
        """Source gates computed in the clear (whole public-only region read by some task)."""
        need = {w for t in self.tasks for w in t.public_cuts}
        return tuple(g for g in self.source.gates if g.label in _cone(self.source, need))

    def describe(self) -> list[dict]:
        return [{"wire": t.wire, "kind": t.kind, "depth": t.depth, "secrets": list(t.circuit.secrets),
                 "cuts": list(t.cuts), "public_cuts": list(t.public_cuts)} for t in self.tasks]


def gate_depth(c: Circuit) -> int:
    depth: dict[str, int] = {}
    for g in c.gates:
        depth[g.label] = 1 + max((depth.get(i, 0) for i in g.inputs), default=0)
    return max((depth.get(o, 0) for o in c.outputs), default=0)


def _cone(c: Circuit, wires) -> set[str]:
    gm = c.gate_map
    out: set[str] = set()
    stack = [w for w in wires if w in gm]
    while stack:
        w = stack.pop()
        if w in out:
            continue
        out.add(w)
        stack.extend(i for i in gm[w].inputs if i in gm)
    return out


# -- decomposition ---------------------------------------------------------


def decomp(p: Circuit, cfg: SynthConfig | None = None, bound: int | None = None) -> DecompPlan:
    """Cut ``p`` into synthesis tasks.

    Priority: public-only logic is factored out, secret-dependent wires with
    fan-out above one become shared tasks, every output gets its own task,
    and trees deeper than the bound are cut at that depth.
    """
    cfg = cfg or SynthConfig()
    bound = cfg.height_bound if bound is None else bound
    if not p.is_random_free:
        raise CircuitError(f"{p.name} is not random-free")
    secrets = set(p.secrets)
    secretful: dict[str, bool] = {w: w in secrets for w in p.inputs}
    for g in p.gates:
        secretful[g.label] = any(secretful[i] for i in g.inputs)
    uses: dict[str, int] = {}
    for g in p.gates:
        for i in g.inputs:
            uses[i] = uses.get(i, 0) + 1
    for o in p.outputs:
        uses[o] = uses.get(o, 0) + 1
    gm = p.gate_map

    roots: dict[str, str] = {}
    for o in p.outputs:
        if o in roots:
            continue
        if not secretful[o]:
            roots[o] = "public-only"
        elif uses[o] > 1 and o in gm:
            roots[o] = "shared-subcircuit"
        else:
            roots[o] = "per-output"
    for g in p.gates:
        if secretful[g.label] and uses.get(g.label, 0) > 1 and g.label not in roots:
            roots[g.label] = "shared-subcircuit"

    tasks: dict[str, Task] = {}
    pending = list(roots)
    while pending:
        w = pending.pop(0)
        if w in tasks:
            continue
        kind = roots[w]
        if kind == "public-only":
            region = _cone(p, [w])
            cuts: list[str] = []
            pub_cuts: list[str] = []
        else:
            region, cuts, pub_cuts = set(), [], []

            def walk(x: str, d: int):
                g = gm[x]
                region.add(x)
                for a in g.inputs:
                    if a not in gm or a in region:
                        continue
                    if not secretful[a]:
                        if a not in pub_cuts:
                            pub_cuts.append(a)
                    elif a in roots or d >= bound:
                        roots.setdefault(a, "bounded-tree")
                        if a not in cuts:
                            cuts.append(a)
                        pending.append(a)
                    else:
                        walk(a, d + 1)

            if w in gm:
                walk(w, 1)
        tasks[w] = _make_task(p, w, kind, region, cuts, pub_cuts)
    for t in tasks.values():
        if t.kind != "public-only" and len(t.circuit.secrets) > cfg.max_secrets:
            t.kind = "premade-fallback"
    return DecompPlan(p, bound, _producers_first(p, tasks))


def _make_task(p: Circuit, w: str, kind: str, region: set[str], cuts, pub_cuts) -> Task:
    gates = tuple(g for g in p.gates if g.label in region)
    read = {i for g in gates for i in g.inputs} | ({w} if w not in region else set())
    publics = tuple(x for x in p.publics if x in read) + tuple(pub_cuts)
    secrets = tuple(x for x in p.secrets if x in read) + tuple(cuts)
    c = Circuit(f"{p.name}.{w}", publics, secrets, (), (), gates, (), (w,))
    return Task(kind, w, c, tuple(cuts), tuple(pub_cuts))


def _producers_first(p: Circuit, tasks: dict[str, Task]) -> list[Task]:
    order = list(p.inputs) + [g.label for g in p.gates]
    pos = {w: i for i, w in enumerate(order)}
    return sorted(tasks.values(), key=lambda t: pos[t.wire])


def recompose_plain(plan: DecompPlan) -> Circuit:
    """Glue the unmasked tasks back together (the plan's wiring, without synthesis)."""
    p = plan.source
    gates = {g.label: g for t in plan.tasks for g in t.circuit.gates}
    gates.update((g.label, g) for g in plan.public_gates)
    ordered = _toposort([g for g in p.gates if g.label in gates])
    return Circuit(f"{p.name}.plan", p.publics, p.secrets, (), (), ordered, (), p.outputs)


# -- masking one task ------------------------------------------------------


@dataclass
class LeafRecord:
    wire: str
    kind: str
    method: str  # mono, isw, clear, timeout
    bound: int
    seconds: float
    size: int = 0
    randoms: int = 0


@dataclass
class SynthResult:
    circuit: Circuit
    plan: DecompPlan
    leaves: list[LeafRecord] = field(default_factory=list)
    seconds: float = 0.0
    verified: bool = False  # io_equivalent and verify_nlr both ran and passed
    infeasible: bool = False  # the final circuit is beyond the exact-verification cap

    @property
    def mtc(self) -> float:
        return max((r.seconds for r in self.leaves), default=0.0)


def _canonical(c: Circuit) -> tuple[Circuit, dict[str, str]]:
    """Rename inputs and gates to x*, k*, t* (so skeleton names cannot clash); returns the inverse map."""
    fwd: dict[str, str] = {}
    fwd.update((w, f"x{i + 1}") for i, w in enumerate(c.publics))
    fwd.update((w, f"k{i + 1}") for i, w in enumerate(c.secrets))
    fwd.update((g.label, f"t{i + 1}") for i, g in enumerate(c.gates))
    return rename(c, fwd), {v: k for k, v in fwd.items()}


_CANON = re.compile(r"(?<![A-Za-z0-9])[xkt]\d+(?![0-9])")


def _restore_names(m: Circuit, back: dict[str, str], reserved: set[str]) -> Circuit:
    """Map canonical inputs back to real names; internals derived from them follow along."""
    inner = internal_names(m)
    pretty = {w: _CANON.sub(lambda mt: back.get(mt.group(0), mt.group(0)), w) for w in inner}
    ins = set(m.publics) | set(m.secrets)
    if len(set(pretty.values())) == len(pretty) and not set(pretty.values()) & (ins | {back[w] for w in ins}):
        m = rename(m, {w: v for w, v in pretty.items() if v != w})
    m = _avoid(m, reserved | set(back), internal_names(m))
    return rename(m, {k: v for k, v in back.items() if k in set(m.publics) | set(m.secrets)})


def _clear_split(c: Circuit, n: int) -> Circuit:
    """A public-only circuit as a split circuit: the value plus n constant-zero splits."""
    taken = identifiers(c)
    zeros = []
    for i in range(n):
        z = f"zero{i + 1}"
        while z in taken:
            z += "_"
        zeros.append(z)
    out = f"{c.outputs[0]}.out"
    return Circuit(c.name, c.publics, c.secrets, (), (), c.gates + tuple(Gate(z, "CONST0") for z in zeros),
                   (Decoder(out, (c.outputs[0],) + tuple(zeros)),), (out,))


def _mask(task_circuit: Circuit, kind: str, cfg: SynthConfig, bounds: list[int], records: list[LeafRecord],
          wire: str) -> Circuit:
    """Masked version of one task (canonical names in and out)."""
    n = cfg.order
    if kind == "public-only":
        records.append(LeafRecord(wire, kind, "clear", 0, 0.0))
        return _clear_split(task_circuit, n)
    bound = bounds[0] if bounds else 0
    if kind != "premade-fallback" and bounds:
        t0 = time.monotonic()
        try:
            mcfg = MonoConfig(timeout=cfg.mono_timeout, backend=cfg.backend, max_height=cfg.max_height, cap=cfg.cap)
            out = mono_synth(task_circuit, n, mcfg)
            records.append(LeafRecord(wire, kind, "mono", bound, time.monotonic() - t0, out.size(), len(out.randoms)))
            return out
        except (SynthesisTimeout, SynthesisBudgetExceeded):
            records.append(LeafRecord(wire, kind, "timeout", bound, time.monotonic() - t0))
        smaller = [b for b in bounds[1:] if b < gate_depth(task_circuit)]
        if smaller:
            plan = decomp(task_circuit, cfg, smaller[0])
            if len(plan.tasks) > 1:
                return _mask_plan(plan, cfg, smaller, records, prefix=f"{wire}/")
    t0 = time.monotonic()
    out = isw_transform(task_circuit, n)
    records.append(LeafRecord(wire, kind, "isw", bound, time.monotonic() - t0, out.size(), len(out.randoms)))
    return out


def _mask_plan(plan: DecompPlan, cfg: SynthConfig, bounds: list[int], records: list[LeafRecord],
               prefix: str = "") -> Circuit:
    """Mask every task of ``plan`` and compose them; outputs follow ``plan.source.outputs``."""
    p = plan.source
    reserved = identifiers(p)
    gadget: dict[str, Circuit] = {}
    for t in plan.tasks:
        canon, back = _canonical(t.circuit)
        m = _mask(canon, t.kind, cfg, bounds, records, prefix + t.wire)
        gadget[t.wire] = _restore_names(m, back, reserved)
    parts, links, roots = _instantiate(plan, gadget)
    parts = disjoint(parts)
    _check_random_namespaces(parts)
    acc = par_compose_all(parts, name=f"{p.name}.lr{cfg.order}")
    out_of = list(acc.outputs)  # one output per part, in order
    kept = set(roots.values())
    for i, placeholders in links.items():
        for j, ph in enumerate(placeholders):
            last = j == len(placeholders) - 1
            acc = connect(acc, out_of[i], ph, keep_output=not last or i in kept)
    outputs = tuple(out_of[roots[o]] for o in p.outputs)
    clear = plan.public_gates
    gates = _toposort(tuple(clear) + acc.gates)
    acc = Circuit(acc.name, p.publics, p.secrets, acc.randoms, acc.encoders, gates, acc.decoders, outputs)
    # give outputs their source names where that is free
    free = {}
    ids = identifiers(acc)
    for o, new in zip(p.outputs, outputs):
        if o != new and o not in ids and o not in free.values():
            free[new] = o
    return rename(acc, free) if free else acc


def _use_groups(plan: DecompPlan, gadget: dict[str, Circuit]) -> dict[tuple[str, str, int], int]:
    """Partition the uses of each cut wire into groups that may share one instance.

    A use is (wire, consumer task, encoder index).  Output sharing is sound
    only while the consumers never meet again, so a group holds uses whose
    downstream cones are pairwise disjoint; otherwise the consumers would
    combine correlated sharings of one value.  Group 0 is the instance that
    reads shared upstream instances; later groups get private sub-trees.
    """
    users: dict[str, list[tuple[str, int]]] = {t.wire: [] for t in plan.tasks}
    for t in plan.tasks:
        for u in t.cuts:
            users[u] += [(t.wire, j) for j in range(len(gadget[t.wire].encoders_of(u)))]
    below: dict[str, set[str]] = {}
    for t in reversed(plan.tasks):  # consumers before producers
        below[t.wire] = {t.wire}.union(*(below[c] for c, _ in users[t.wire]))
    out = {}
    for w, uses in users.items():
        cover: list[set[str]] = []
        for c, j in sorted(uses, key=lambda use: -len(below[use[0]])):
            k = next((k for k, seen in enumerate(cover) if not below[c] & seen), len(cover))
            if k == len(cover):
                cover.append(set())
            cover[k] |= below[c]
            out[w, c, j] = k
    return out


def _instantiate(plan: DecompPlan, gadget: dict[str, Circuit]):
    """Copies of the masked tasks and how they connect.

    Returns ``(parts, links, roots)``: ``links[i]`` lists the placeholder
    secrets fed by part ``i``, and ``roots`` maps each source output to its
    part.
    """
    groups = _use_groups(plan, gadget)
    cuts = {t.wire: t.cuts for t in plan.tasks}
    taken = set(identifiers(plan.source)).union(*(identifiers(g) for g in gadget.values()))
    parts: list[Circuit] = []
    links: dict[int, list[str]] = {}
    single: dict[tuple[str, int], int] = {}

    def shared(w: str, k: int) -> int:
        if (w, k) not in single:
            single[w, k] = build(w, private=k > 0)
        return single[w, k]

    def build(w: str, private: bool) -> int:
        c = gadget[w]
        feeds = []
        for u in cuts[w]:
            encs = c.encoders_of(u)
            if not encs:
                continue  # the masked task cancelled this input out
            names = [_fresh_name(f"{u}.use", taken) for _ in encs]
            feeds += [(u, j, ph) for j, ph in enumerate(names)]
            c = _split_secret(c, u, names)
        i = len(parts)
        parts.append(c)
        for u, j, ph in feeds:
            src = build(u, True) if private else shared(u, groups[u, w, j])
            links.setdefault(src, []).append(ph)
        return i

    roots = {o: shared(o, 0) for o in plan.source.outputs}
    return parts, links, roots


def _fresh_name(base: str, taken: set[str]) -> str:
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    taken.add(f"{base}{i}")
    return f"{base}{i}"


def _split_secret(c: Circuit, secret: str, names: list[str]) -> Circuit:
    """Give each encoder of ``secret`` its own input wire."""
    it = iter(names)
    encs = tuple(Encoder(next(it), e.randoms, e.shares) if e.secret == secret else e for e in c.encoders)
    secrets = tuple(x for k in c.secrets for x in (names if k == secret else [k]))
    return Circuit(c.name, c.publics, secrets, c.randoms, encs, c.gates, c.decoders, c.outputs)


def _check_random_namespaces(circuits) -> None:
    seen: set[str] = set()
    for c in circuits:
        rs = set(c.randoms)
        if rs & seen:
            raise SynthesisError(f"random wires {sorted(rs & seen)} are shared between leaf tasks")
        seen |= rs


# -- top level -------------------------------------------------------------


def _schedule(cfg: SynthConfig) -> list[int]:
    return list(range(cfg.height_bound, 0, -1))


def synth_report(p: Circuit, cfg: SynthConfig | None = None) -> SynthResult:
    """Synthesize an order-n leakage-resilient version of ``p`` and check it."""
    cfg = cfg or SynthConfig()
    t0 = time.monotonic()
    plan = decomp(p, cfg)
    records: list[LeafRecord] = []
    c = _mask_plan(plan, cfg, _schedule(cfg), records)
    res = SynthResult(c, plan, records)
    _final_check(p, res, cfg)
    res.seconds = time.monotonic() - t0
    return res


def synth(p: Circuit, cfg: SynthConfig | None = None) -> Circuit:
    return synth_report(p, cfg).circuit


def _final_check(p: Circuit, res: SynthResult, cfg: SynthConfig) -> None:
    c = res.circuit
    nvars = len(c.inputs)
    if nvars <= IO_MAX_BITS:
        ok, witness = io_equivalent(p, c)
        if not ok:
            raise SynthesisError(f"{c.name} is not IO-equivalent to {p.name}: {witness}")
        io_exact = True
    else:
        _sampled_io(p, c)
        io_exact = False
    try:
        verdict = verify_nlr(c, cfg.order, cap=cfg.cap)
    except VerificationInfeasible as e:
        res.infeasible = True
        warnings.warn(f"{c.name}: {e}; emitted unverified", stacklevel=3)
        return
    if not verdict.ok:
        raise SynthesisError(f"{c.name} leaks: {verdict.witness}")
    res.verified = io_exact
    res.infeasible = not io_exact
    if not io_exact:
        warnings.warn(f"{c.name}: {nvars} input bits, IO-equivalence only sampled", stacklevel=3)


def _sampled_io(p: Circuit, c: Circuit, samples: int = 4096, seed: int = 0) -> None:
    rng = random.Random(seed)
    for _ in range(samples):
        nu = {w: rng.getrandbits(1) for w in c.inputs}
        want = output_values(p, nu)
        got = output_values(c, nu)
        if want != got:
            raise SynthesisError(f"{c.name} differs from {p.name} on {nu}")
