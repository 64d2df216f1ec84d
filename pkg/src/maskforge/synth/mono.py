"""Monolithic synthesis: skeletons of growing height searched by CEGAR.

For each height the loop alternates between candidate finding (search for
control values satisfying the test-set-restricted constraints) and candidate
checking (exact IO-equivalence and leakage verification of the instantiated
circuit).  A failed check contributes the distinguishing public/secret
valuations and node valuation to the test set, and raises the root-most node
budget gamma to cover the leaking selection.  Only circuits that pass the
check are ever returned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..circuit import Circuit, io_equivalent
from ..simplify import simplify
from ..verify import DEFAULT_CAP, verify_nlr
from .backends import SearchBudgetExceeded, SearchTimeout, make_backend
from .constraints import ConstraintSystem, TestSet, encode_phi_io, encode_phi_lr, full_testset
from .skeleton import ControlAssignment, Skeleton, build_skeleton, instantiate, node_rank


class SynthesisTimeout(RuntimeError):
    def __init__(self, msg, height):
        super().__init__(msg)
        self.height = height


class SynthesisBudgetExceeded(RuntimeError):
    def __init__(self, msg, height):
        super().__init__(msg)
        self.height = height


@dataclass
class MonoConfig:
    init_height: int = 1
    max_height: int = 4
    timeout: float | None = 60.0
    backend: str = "exhaustive"
    q: int | None = None  # extra randoms per skeleton, defaults to the order
    seed_io: bool = True  # start with every public/secret valuation in the test set
    seed_limit: int = 6  # ... when there are at most this many public+secret inputs
    max_iterations: int = 10_000
    cap: int = DEFAULT_CAP


@dataclass
class MonoStats:
    height: int = 0
    q: int = 0
    iterations: int = 0
    gamma: int = 0
    tested: list[tuple[int, int, str]] = field(default_factory=list)  # (height, q, outcome)


@dataclass
class CheckResult:
    success: bool
    tset: TestSet | None = None
    gamma: int = 0
    reason: str = ""


def find_cand(cs: ConstraintSystem, tset: TestSet, backend=None, deadline: float | None = None) -> ControlAssignment | None:
    """A control assignment satisfying ``cs`` restricted to ``tset``, or None (nosol)."""
    backend = backend or make_backend("exhaustive")
    return backend.find(cs.restrict(tset), deadline)


def check_cand(p: Circuit, sk: Skeleton, C: ControlAssignment, n: int, cap: int = DEFAULT_CAP) -> CheckResult:
    """Exact check of a candidate; on failure, the test-set elements that refute it."""
    cand = instantiate(sk, C)
    same, witness = io_equivalent(p, cand)
    if not same:
        t = TestSet()
        t.add_public(tuple(witness[w] for w in p.publics))
        t.add_secret(tuple(witness[w] for w in p.secrets))
        return CheckResult(False, t, 0, "io")
    verdict = verify_nlr(cand, n, prune=True, cap=cap)
    if verdict.ok:
        return CheckResult(True)
    w = verdict.witness
    ranks = [node_rank(sk, C, a) for a in w.selection]
    diff = next(v for v, (x, y) in enumerate(zip(w.dist.counts, w.dist_alt.counts)) if x != y)
    k = len(w.selection)
    bits = [(diff >> (k - 1 - i)) & 1 for i in range(k)]
    t = TestSet()
    t.add_public(tuple(w.publics[x] for x in p.publics))
    t.add_secret(tuple(w.secrets[x] for x in p.secrets))
    t.add_secret(tuple(w.secrets_alt[x] for x in p.secrets))
    t.add_alpha(tuple(b for _, b in sorted(zip(ranks, bits))))
    t.gamma = max(ranks)
    return CheckResult(False, t, t.gamma, "lr")


def _tidy(p: Circuit, c: Circuit, n: int, cap: int) -> Circuit:
    """Drop skeleton padding; the simplified circuit must pass the same exact check."""
    t = simplify(c)
    if io_equivalent(p, t)[0] and verify_nlr(t, n, cap=cap).ok:
        return t
    return c  # pragma: no cover - simplification preserves both properties


def _output_name(p: Circuit) -> str:
    o = p.outputs[0]
    return o if o not in p.publics and o not in p.secrets else f"{o}.out"


def mono_synth(p: Circuit, n: int, cfg: MonoConfig | None = None, name: str | None = None,
               stats: MonoStats | None = None) -> Circuit:
    """Smallest-height skeleton instance that is IO-equivalent to ``p`` and n-leakage-resilient."""
    cfg = cfg or MonoConfig()
    stats = stats if stats is not None else MonoStats()
    if not p.is_random_free or len(p.outputs) != 1:
        raise ValueError("mono_synth needs a random-free single-output circuit")
    backend = make_backend(cfg.backend)
    deadline = None if cfg.timeout is None else time.monotonic() + cfg.timeout
    q0 = n if cfg.q is None else cfg.q
    budgets = [q0] if q0 == 0 else [q0, 2 * q0]
    height = cfg.init_height
    while height <= cfg.max_height:
        for q in budgets:
            sk = build_skeleton(height, n, p.publics, p.secrets, q, output=_output_name(p))
            cs = encode_phi_io(p, sk) & encode_phi_lr(sk, n)
            if cfg.seed_io and len(p.publics) + len(p.secrets) <= cfg.seed_limit:
                tset = full_testset(p.publics, p.secrets, gamma=n)
            else:
                tset = TestSet(gamma=n)
            stats.height, stats.q = height, q
            while True:
                stats.iterations += 1
                if stats.iterations > cfg.max_iterations:
                    raise SynthesisBudgetExceeded(f"{p.name}: more than {cfg.max_iterations} CEGAR rounds", height)
                try:
                    C = find_cand(cs, tset, backend, deadline)
                except SearchTimeout:
                    raise SynthesisTimeout(f"{p.name}: timed out at height {height}", height) from None
                except SearchBudgetExceeded as e:
                    raise SynthesisBudgetExceeded(f"{p.name}: {e}", height) from None
                if C is None:
                    stats.tested.append((height, q, "nosol"))
                    break
                res = check_cand(p, sk, C, n, cfg.cap)
                if res.success:
                    stats.tested.append((height, q, "sol"))
                    stats.gamma = tset.gamma
                    return _tidy(p, instantiate(sk, C, name or f"{p.name}.mono{n}"), n, cfg.cap)
                if not tset.union(res.tset):
                    raise AssertionError("counterexample did not refine the test set")
                if deadline is not None and time.monotonic() > deadline:
                    raise SynthesisTimeout(f"{p.name}: timed out at height {height}", height)
        height += 1
    raise SynthesisBudgetExceeded(f"{p.name}: no solution up to height {cfg.max_height}", cfg.max_height)
