import random

import pytest
from hypothesis import given, settings, strategies as st

from maskforge.circuit import Circuit, CircuitError, Gate, io_equivalent
from maskforge.fixtures import fig2, identity_gadget, single_gate
from maskforge.gen import random_free_circuit
from maskforge.isw import isw_transform
from maskforge.verify import verify_nlr


@pytest.mark.parametrize("op", ["AND", "XOR", "OR", "NOT"])
@pytest.mark.parametrize("n", [1, 2])
def test_single_gates_are_masked(op, n):
    p = single_gate(op)
    m = isw_transform(p, n)
    assert m.share_width == n + 1
    assert io_equivalent(p, m)[0]
    assert verify_nlr(m, n).ok


def test_and_at_order_three():
    p = single_gate("AND")
    m = isw_transform(p, 3)
    assert io_equivalent(p, m)[0]
    assert verify_nlr(m, 3).ok


@pytest.mark.parametrize("n", [1, 2, 3])
def test_and_uses_triangular_number_of_extra_randoms(n):
    m = isw_transform(single_gate("AND"), n)
    assert len(m.extra_randoms) == n * (n + 1) // 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_xor_is_sharewise(n):
    m = isw_transform(single_gate("XOR"), n)
    assert m.extra_randoms == ()
    assert len(m.gates) == n + 1


def test_public_operands_stay_in_the_clear():
    m = isw_transform(fig2(), 2)
    assert m.publics == ("p1", "p2")
    assert io_equivalent(fig2(), m)[0] and verify_nlr(m, 2).ok


def test_rejects_randomized_input():
    with pytest.raises(CircuitError):
        isw_transform(identity_gadget(1), 1)
    with pytest.raises(ValueError):
        isw_transform(single_gate("AND"), -1)


def test_fanout_is_refreshed():
    p = Circuit("sq", (), ("a", "b"), (), (),
                (Gate("t", "AND", ("a", "b")), Gate("o", "AND", ("t", "t"))), (), ("o",))
    m = isw_transform(p, 2)
    assert io_equivalent(p, m)[0]
    assert verify_nlr(m, 2).ok


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_random_circuits_mask_soundly(seed):
    rng = random.Random(seed)
    p = random_free_circuit(rng, rng.randint(0, 1), rng.randint(1, 2), rng.randint(1, 4), 1)
    m = isw_transform(p, 1)
    assert io_equivalent(p, m)[0]
    assert verify_nlr(m, 1).ok
