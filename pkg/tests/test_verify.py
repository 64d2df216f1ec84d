import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from maskforge.circuit import Circuit, Gate, SelectionError, StructureError, dependent_inputs
from maskforge.fixtures import FIG1_LABELS, fig1, identity_gadget, negation_gadget, single_gate
from maskforge.gen import random_split_circuit
from maskforge.verify import (
    VerificationInfeasible, all_selections, dist, leaks, relevant_selections, verify_budgeted, verify_nlr,
)
from oracles import naive_dist, naive_nlr


def _small(seed, n=None):
    rng = random.Random(seed)
    n = n or rng.randint(1, 2)
    c = random_split_circuit(rng, n, rng.randint(1, 2), rng.randint(0, 1), rng.randint(1, 6), rng.randint(0, 1))
    return c, n


# -- dist -------------------------------------------------------------------


def test_pure_random_share_is_uniform():
    c = fig1()
    d = dist(c, {"p1": 0, "p2": 1}, {"k1": 1, "k2": 0}, ["k1_1"])
    half = 1 << (d.random_count - 1)
    assert d.as_dict() == {(0,): half, (1,): half}


def test_negation_column_five_is_balanced_for_k0():
    d = dist(negation_gadget(), {}, {"k": 0}, ["a5"])
    assert d.as_dict() == {(0,): 2, (1,): 2}


@pytest.mark.parametrize("share", ["u1", "u2", "u4"])
def test_fig1_decoder_inputs_are_balanced(share):
    c = fig1()
    split_shares = {s for d in c.decoders for s in d.splits}
    assert share in split_shares
    for bp in itertools.product((0, 1), repeat=2):
        d = dist(c, dict(zip(c.publics, bp)), {"k1": 0, "k2": 0}, [share])
        assert d.as_dict() == {(0,): 8, (1,): 8}


def test_empty_selection_has_one_entry():
    d = dist(fig1(), {"p1": 0, "p2": 0}, {"k1": 0, "k2": 0}, [])
    assert d.counts == (16,)


def test_dist_rejects_unobservable_nodes():
    with pytest.raises(SelectionError):
        dist(fig1(), {"p1": 0, "p2": 0}, {"k1": 0, "k2": 0}, ["o1"])


@given(st.integers(0, 10 ** 6), st.data())
def test_dist_matches_enumeration(seed, data):
    c, _ = _small(seed)
    size = data.draw(st.integers(1, min(3, len(c.observable))))
    sel = data.draw(st.permutations(c.observable))[:size]
    pub = {p: data.draw(st.integers(0, 1)) for p in c.publics}
    sec = {k: data.draw(st.integers(0, 1)) for k in c.secrets}
    d = dist(c, pub, sec, sel)
    assert d.total == 1 << len(c.randoms)
    fast = {k: v for k, v in d.as_dict().items() if v}
    assert fast == dict(naive_dist(c, pub, sec, sel))


# -- verify_nlr ----------------------------------------------------------------


def test_fig1_is_two_leakage_resilient():
    v = verify_nlr(fig1(), 2)
    assert v.ok and v.witness is None


def test_fig1_leaks_at_order_three():
    assert not verify_nlr(fig1(), 3).ok


def test_circuit_without_secrets_is_ok():
    c = Circuit("pub", ("p1", "p2"), (), (), (), (Gate("o", "AND", ("p1", "p2")),), (), ("o",))
    for n in range(4):
        assert verify_nlr(c, n).ok


def test_random_free_node_carrying_the_secret_leaks():
    c = single_gate("NOT")
    v = verify_nlr(c, 1, strict=False)
    assert not v.ok
    w = v.witness
    assert w.selection in {("k1",), ("o",)}
    assert w.dist != w.dist_alt
    assert w.secrets != w.secrets_alt


def test_unencoded_secret_is_a_structural_error():
    with pytest.raises(StructureError):
        verify_nlr(single_gate("AND"), 1)


def test_witness_is_first_in_enumeration_order():
    c = negation_gadget()
    v = verify_nlr(c, 2)
    assert not v.ok
    sels = list(relevant_selections(c, 2))
    first = next(s for s in sels if leaks(c, s))
    assert v.witness.selection == first


def test_order_zero_is_always_ok():
    assert verify_nlr(negation_gadget(), 0).ok


def test_cap_raises_infeasible():
    with pytest.raises(VerificationInfeasible):
        verify_nlr(fig1(), 2, prune=False, cap=10)


def test_report_shape():
    out = verify_nlr(negation_gadget(), 2).to_json()
    assert out["verdict"] == "leak" and out["order"] == 2
    assert set(out["witness"]) >= {"selection", "publics", "secrets", "secrets_alt", "dist", "dist_alt"}


@settings(max_examples=60)
@given(st.integers(0, 10 ** 6))
def test_verdict_matches_naive_definition(seed):
    c, n = _small(seed)
    assert verify_nlr(c, n).ok == naive_nlr(c, n)


@settings(max_examples=60)
@given(st.integers(0, 10 ** 6))
def test_verdict_is_monotone_in_order(seed):
    c, n = _small(seed, 2)
    if verify_nlr(c, n).ok:
        assert all(verify_nlr(c, m).ok for m in range(n))


# -- pruning -------------------------------------------------------------------


def test_relevant_selections_cover_a_share_group():
    c = fig1()
    groups = [set(e.shares) for e in c.encoders]
    rel = set(relevant_selections(c, 2))
    for sel in all_selections(c, 2):
        cover = set().union(*(dependent_inputs(c, a) for a in sel))
        assert (sel in rel) == any(g <= cover for g in groups)


def test_fig1_relevant_selections():
    c = fig1()
    # every node reads one share per encoder, so no pair covers a group
    assert list(relevant_selections(c, 2)) == []
    splits = tuple(FIG1_LABELS[a] for a in ("alpha9", "alpha10", "alpha12"))
    assert splits in set(relevant_selections(c, 3))


def test_nothing_is_relevant_when_each_node_sees_few_shares():
    c = identity_gadget(2)
    assert list(relevant_selections(c, 1)) == []
    assert verify_nlr(c, 1).checked_selections == 0


def test_pruning_agrees_with_full_enumeration_on_100_circuits():
    rng = random.Random(2024)
    disagreements = 0
    for _ in range(100):
        n = rng.randint(1, 2)
        c = random_split_circuit(rng, n, rng.randint(1, 2), rng.randint(0, 1), rng.randint(2, 6), rng.randint(0, 1))
        a, b = verify_nlr(c, n), verify_nlr(c, n, prune=False)
        disagreements += a.ok != b.ok
        if not a.ok:
            assert a.witness.selection == b.witness.selection or leaks(c, b.witness.selection)
    assert disagreements == 0


# -- budgeted ------------------------------------------------------------------


def test_budgeted_with_full_budget_matches_verify_nlr():
    c = fig1()
    v = verify_budgeted(c, [(c.observable, 2)])
    assert v.ok and v.order == 2
    assert not verify_budgeted(c, [(c.observable, 3)]).ok


def test_budgeted_rejects_overlapping_groups():
    c = fig1()
    with pytest.raises(ValueError):
        verify_budgeted(c, [(["u1", "u2"], 1), (["u2"], 1)])
    with pytest.raises(SelectionError):
        verify_budgeted(c, [(["o1"], 1)])
