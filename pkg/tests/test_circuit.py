import random

import pytest
from hypothesis import given, strategies as st

from maskforge.circuit import (
    Circuit, CircuitError, Decoder, Encoder, Gate, Role, assignments, build_decoder, build_encoder,
    dependent_inputs, evaluate, evaluate_all, io_equivalent, lane_pattern, output_values,
)
from maskforge.fixtures import FIG1_LABELS, fig1, fig2
from maskforge.gen import random_split_circuit
from oracles import naive_eval


def _fig1_nu():
    c = fig1()
    nu = {w: 1 for w in c.inputs}
    nu.update(p1=0, r1=0, k2=0)
    return nu


def test_fig1_evaluates_labelled_nodes():
    c = fig1()
    sel = (FIG1_LABELS["alpha11"], FIG1_LABELS["alpha1"])
    assert evaluate(c, _fig1_nu(), sel) == (0, 1)


def test_const1_gate_is_one_under_any_valuation():
    c = Circuit("one", ("p",), (), (), (), (Gate("o", "CONST1"),), (), ("o",))
    for nu in assignments(c.inputs):
        assert evaluate(c, nu, ("o",)) == (1,)


def test_fig2_outputs_by_hand():
    nu = {"p1": 1, "k1": 0, "k2": 1, "p2": 1}
    assert output_values(fig2(), nu) == (0, 1)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_encoder_shares_xor_to_secret(n):
    rs = [f"r{i + 1}" for i in range(n)]
    e = build_encoder("k", n, rs)
    assert e.width == n + 1 and e.randoms == tuple(rs)
    c = Circuit("enc", (), ("k",), tuple(rs), (e,), (), (Decoder("o", e.shares),), ("o",))
    for nu in assignments(c.inputs):
        vals = evaluate_all(c, nu)
        shares = [vals[s] for s in e.shares]
        assert shares[:n] == [nu[r] for r in rs]
        assert vals["o"] == nu["k"]


def test_encoder_degenerate_and_small_cases():
    e0 = build_encoder("k", 0, [])
    assert len(e0.shares) == 1 and e0.randoms == ()
    e1 = build_encoder("k", 1, ["r1"])
    c = Circuit("e1", (), ("k",), ("r1",), (e1,), (), (Decoder("o", e1.shares),), ("o",))
    vals = evaluate_all(c, {"k": 1, "r1": 0})
    assert tuple(vals[s] for s in e1.shares) == (0, 1)


def test_encoder_rejects_reused_randoms():
    with pytest.raises(CircuitError):
        build_encoder("k", 2, ["r1", "r1"])
    with pytest.raises(CircuitError):
        build_encoder("k", 1, ["r1"], taken=["r1"])
    with pytest.raises(CircuitError):
        build_encoder("k", 2, ["r1"])


def test_decoder_folds_with_xor():
    gates = (Gate("a", "CONST1"), Gate("b", "CONST0"), Gate("c", "CONST1"))
    c = Circuit("dec", (), (), (), (), gates, (build_decoder("o", ["a", "b", "c"], 2),), ("o",))
    assert output_values(c, {}) == (0,)
    with pytest.raises(CircuitError):
        build_decoder("o", ["a", "b"], 2)


def test_fig1_left_decoder_reproduces_xor_for_all_randoms():
    c = fig1()
    for nu in assignments(c.inputs):
        assert output_values(c, nu)[0] == nu["p1"] ^ nu["k1"] ^ nu["k2"]


def test_dependencies():
    c = Circuit("cst", ("p",), ("k",), (), (), (Gate("z", "CONST0"), Gate("o", "XOR", ("p", "k"))), (), ("o",))
    assert dependent_inputs(c, "z") == frozenset()
    assert dependent_inputs(fig2(), "o2") == {"k2", "p2"}
    f1 = fig1()
    k1_shares = {s for e in f1.encoders_of("k1") for s in e.shares}
    assert k1_shares <= dependent_inputs(f1, "o1")
    assert {"k1_3", "k2_3", "p1"} == dependent_inputs(f1, "u4")


def test_dependencies_are_monotone_along_gates():
    c = fig1()
    for g in c.gates:
        for i in g.inputs:
            assert dependent_inputs(c, i) <= dependent_inputs(c, g.label)


def test_fig1_is_io_equivalent_to_fig2():
    assert io_equivalent(fig2(), fig1()) == (True, None)
    assert io_equivalent(fig2(), fig2())[0]


def test_dropped_decoder_input_breaks_io_equivalence():
    c = fig1()
    d = c.decoder_map["o1"]
    broken = Circuit(c.name, c.publics, c.secrets, c.randoms, c.encoders, c.gates,
                     (Decoder("o1", d.splits[:-1]), c.decoder_map["o2"]), c.outputs)
    ok, witness = io_equivalent(fig2(), broken)
    assert not ok
    assert output_values(fig2(), witness) != output_values(broken, witness)


def test_roles_and_observables():
    c = fig1()
    assert c.role("p1") is Role.PUBLIC
    assert c.role("k1") is Role.SECRET
    assert c.role("r1") is Role.RANDOM
    assert c.role("k1_1") is Role.INTERNAL
    assert c.role("u1") is Role.INTERNAL
    assert c.role("o1") is Role.OUTPUT
    assert len(c.observable) == 15
    assert set(FIG1_LABELS.values()) == set(c.observable)
    assert c.is_split and not c.is_random_free and c.share_width == 3


@pytest.mark.parametrize("bad", [
    lambda: dict(gates=(Gate("o", "XOR", ("k", "x")),)),  # undefined wire
    lambda: dict(gates=(Gate("o", "XOR", ("k", "k")), Gate("o", "NOT", ("k",)))),  # duplicate label
    lambda: dict(gates=(Gate("o", "AND", ("k",)),)),  # arity
    lambda: dict(gates=(Gate("o", "NAND", ("k", "k")),)),  # unknown op
    lambda: dict(gates=(Gate("o", "XOR", ("k", "k")),), outputs=("nowhere",)),
])
def test_malformed_circuits_are_rejected(bad):
    kw = dict(name="bad", publics=(), secrets=("k",), randoms=(), encoders=(), gates=(), decoders=(), outputs=("o",))
    with pytest.raises(CircuitError):
        kw.update(bad())
        Circuit(**kw)


def test_gates_may_not_read_encoder_randoms():
    e = Encoder("k", ("r",), ("s1", "s2"))
    with pytest.raises(CircuitError, match="share"):
        Circuit("bad", (), ("k",), ("r",), (e,), (Gate("o", "PASS", ("r",)),), (), ("o",))


@given(st.integers(0, 6), st.integers(0, 5))
def test_lane_pattern_marks_bit_j(nbits, j):
    if j >= nbits:
        return
    m = lane_pattern(j, nbits)
    for lane in range(1 << nbits):
        assert (m >> lane) & 1 == (lane >> j) & 1


@given(st.integers(0, 10 ** 6))
def test_bit_sliced_simulation_matches_naive_evaluation(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    c = random_split_circuit(rng, n, rng.randint(1, 2), rng.randint(0, 1), rng.randint(1, 6), rng.randint(0, 1))
    for nu in assignments(c.inputs):
        fast = evaluate_all(c, nu)
        slow = naive_eval(c, nu)
        assert all(fast[w] == slow[w] for w in c.observable)
        assert output_values(c, nu) == tuple(slow[o] for o in c.outputs)
