import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from maskforge.circuit import Circuit, Decoder, Encoder, Gate, StructureError
from maskforge.compose import seq_compose
from maskforge.fixtures import NEGATION_ROWS, fig1, identity_gadget, negation_gadget
from maskforge.gen import random_split_circuit
from maskforge.tables import (
    Table, TableOverflow, is_deterministic, is_safe, join, make_table, reduce, reductions, restrict,
)
from maskforge.verify import verify_nlr
from oracles import naive_table_rows


def _neg():
    return make_table(negation_gadget())


def _rows(t):
    return sorted(t.expanded())


# -- construction --------------------------------------------------------------


def test_negation_table_matches_printed_rows():
    t = _neg()
    assert t.columns == ("a1", "a2", "a3", "a4", "a5", "a6")
    assert _rows(t) == sorted(NEGATION_ROWS)
    assert (t.x, t.width, len(t)) == (1, 2, 8)


def test_identity_table_has_four_rows():
    t = make_table(identity_gadget(1))
    assert len(t) == 4 and len(t.columns) == 4
    assert all(r[:2] == r[2:] for r in t.expanded())


def test_row_count_is_two_to_the_free_wires():
    c = Circuit("w2", (), ("k",), ("r",), (Encoder("k", ("r",), ("s1", "s2")),),
                (Gate("g", "AND", ("s1", "s2")),), (Decoder("o", ("s1", "s2")),), ("o",))
    assert len(make_table(c)) == 4


def test_make_table_rejects_multi_output_circuits():
    with pytest.raises(StructureError):
        make_table(fig1(), {"p1": 0, "p2": 0})


def test_column_cap():
    with pytest.raises(TableOverflow):
        Table.from_rows([(0,) * 25], 1, 2)


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_make_table_matches_enumeration(seed):
    rng = random.Random(seed)
    c = random_split_circuit(rng, rng.randint(1, 2), rng.randint(1, 2), rng.randint(0, 1), rng.randint(1, 5),
                             rng.randint(0, 1))
    pub = {p: rng.randint(0, 1) for p in c.publics}
    assert sorted(make_table(c, pub).expanded()) == sorted(naive_table_rows(c, pub).elements())


# -- restrict / reduce -----------------------------------------------------------


def test_restrict_negation_to_each_input():
    t = _neg()
    assert _rows(restrict(t, (0,), 2)) == sorted(NEGATION_ROWS[:4])
    assert _rows(restrict(t, (1,), 2)) == sorted(NEGATION_ROWS[4:])
    assert restrict(t, (), 2) == t
    with pytest.raises(ValueError):
        restrict(t, (0, 0, 0, 0), 2)


def test_reduce_on_third_column():
    t = _neg()
    assert _rows(reduce(t, 2, 0)) == sorted(NEGATION_ROWS[0::2])


def test_reduce_identity_and_idempotence():
    t = Table.from_rows([(1, 0), (1, 1)], 1, 1)
    assert reduce(t, 0, 1) == t
    once = reduce(_neg(), 4, 1)
    assert reduce(once, 4, 1) == once
    assert len(reduce(t, 0, 0)) == 0


# -- safety ---------------------------------------------------------------------


def test_empty_table_is_safe():
    t = Table.from_rows([], 1, 2, columns=("a", "b"))
    for m in range(4):
        assert is_safe(t, 1, m, 2)


def test_complete_two_column_table_is_safe():
    t = Table.from_rows(itertools.product((0, 1), repeat=2), 1, 2)
    assert is_safe(t, 1, 1, 2)
    assert not is_safe(t, 1, 2, 2)


def test_negation_table_is_one_safe_not_two_safe():
    t = _neg()
    assert is_safe(t, 1, 1, 2)
    assert not is_safe(t, 1, 2, 2)


def test_safe_parameters_are_checked():
    with pytest.raises(ValueError):
        is_safe(_neg(), 1, -1, 2)
    with pytest.raises(ValueError):
        is_safe(_neg(), 4, 1, 2)


def test_determinism():
    assert is_deterministic(_neg())
    coin = Circuit("coin", (), ("k",), ("r", "q"), (Encoder("k", ("r",), ("s1", "s2")),),
                   (Gate("g1", "PASS", ("q",)), Gate("g2", "CONST0")), (Decoder("o", ("g1", "g2")),), ("o",))
    assert not is_deterministic(make_table(coin))


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_io_correct_circuits_have_deterministic_tables(seed):
    rng = random.Random(seed)
    c = random_split_circuit(rng, 1, 1, 0, rng.randint(1, 5), 0)
    t = make_table(c)
    # a random split circuit is deterministic exactly when its output ignores the extra randoms
    assert is_deterministic(t) == _decodes_functionally(c)


def _decodes_functionally(c):
    rows = naive_table_rows(c, {})
    seen = {}
    for r in rows:
        k = r[0] ^ r[1]
        out = r[-1] ^ r[-2]
        if seen.setdefault(k, out) != out:
            return False
    return True


def _random_table(rng, ncols, x, width, max_rows=6):
    rows = [tuple(rng.randint(0, 1) for _ in range(ncols)) for _ in range(rng.randint(0, max_rows))]
    return Table.from_rows(rows, x, width, columns=[f"c{i}" for i in range(ncols)])


@given(st.integers(0, 10 ** 6))
def test_safety_is_monotone(seed):
    rng = random.Random(seed)
    t = _random_table(rng, 4, 1, 2)
    for m in range(1, 3):
        if is_safe(t, 1, m, 2):
            assert is_safe(t, 1, m - 1, 2)


@given(st.integers(0, 10 ** 6))
def test_safety_splits_into_reduction_steps(seed):
    rng = random.Random(seed)
    t = _random_table(rng, 4, 1, 2)
    m2 = 2
    for m1 in range(m2 + 1):
        by_steps = all(is_safe(t.with_rows(r), 1, m2 - m1, 2) for r in reductions(t, m1))
        assert by_steps == is_safe(t, 1, m2, 2)


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_table_safety_matches_verifier(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    c = random_split_circuit(rng, n, rng.randint(1, 2), rng.randint(0, 1), rng.randint(1, 5), 0)
    t = make_table(c)
    assert is_safe(t, t.x, n, n + 1) == verify_nlr(c, n).ok


# -- join ------------------------------------------------------------------------


def test_join_golden():
    t1 = Table.from_rows([(0, 1), (1, 0)], 1, 1)
    t2 = Table.from_rows([(1, 0), (1, 1)], 1, 1)
    assert _rows(join(t1, t2, 1)) == [(0, 1, 0), (0, 1, 1)]


def test_join_with_single_matching_row_appends_constants():
    t1 = Table.from_rows([(0, 1), (1, 1)], 1, 1)
    t2 = Table.from_rows([(1, 0, 1)], 1, 1)
    assert _rows(join(t1, t2, 1)) == [(0, 1, 0, 1), (1, 1, 0, 1)]


def test_join_multiplies_counts():
    t1 = Table(("a", "b"), (((0, 1), 2),), 1, 1)
    t2 = Table(("b", "c"), (((1, 0), 3),), 1, 1)
    assert join(t1, t2, 1).rows == (((0, 1, 0), 6),)


@given(st.integers(0, 10 ** 6))
def test_join_is_commutative_on_output_blocks(seed):
    rng = random.Random(seed)
    t1, t2 = _random_table(rng, 2, 1, 2), _random_table(rng, 2, 1, 2)
    assert join(t1, t2, 2).rows == join(t2, t1, 2).rows


@pytest.mark.parametrize("n", [1, 2])
def test_sequential_identity_table_is_the_join(n):
    p1, p2 = identity_gadget(n, name="left"), identity_gadget(n, name="right")
    composed = make_table(seq_compose([p1], p2))
    joined = join(make_table(p1), make_table(p2), n + 1)
    assert composed.rows == joined.rows


def _join_reductions(t1, t2, m, steps):
    out = set()
    for s1 in range(steps + 1):
        for r1 in reductions(t1, s1):
            for r2 in reductions(t2, steps - s1):
                out.add(join(t1.with_rows(r1), t2.with_rows(r2), m).rows)
    return out


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_attacks_on_a_join_decompose(seed):
    rng = random.Random(seed)
    t1, t2 = _random_table(rng, 3, 1, 1), _random_table(rng, 3, 1, 1)
    t = join(t1, t2, 1)
    for steps in range(3):
        assert set(reductions(t, steps)) <= _join_reductions(t1, t2, 1, steps)
