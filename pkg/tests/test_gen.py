import random

import pytest

from maskforge.gen import enumerate_split_circuits, random_free_circuit, random_split_circuit
from maskforge.tables import make_table


def test_enumeration_counts():
    # one share pair (s1, s2) at order 1, no gates: only the pair itself can be decoded
    assert sum(1 for _ in enumerate_split_circuits(1, 1, 0, 0)) == 1
    # one gate over two wires: 2 NOTs + 3 ops x 3 operand multisets; then choose 2 of 3 wires
    assert sum(1 for _ in enumerate_split_circuits(1, 1, 0, 1)) == (2 + 9) * 3


def test_enumerated_circuits_make_tables():
    for c in enumerate_split_circuits(1, 1, 1, 1):
        t = make_table(c)
        assert len(t) == 2 ** 3


@pytest.mark.parametrize("seed", range(20))
def test_random_split_shape(seed):
    rng = random.Random(seed)
    c = random_split_circuit(rng, 2, secrets=2, extra=1, gates=5, publics=1)
    assert c.share_width == 3 and len(c.encoders) == 2
    assert len(c.randoms) == 2 * 2 + 1 and len(c.gates) == 5


@pytest.mark.parametrize("seed", range(20))
def test_random_free_reads_every_secret(seed):
    rng = random.Random(seed)
    c = random_free_circuit(rng, publics=1, secrets=3, gates=6, outputs=2)
    assert c.is_random_free and len(c.outputs) == 2
    read = {i for g in c.gates for i in g.inputs}
    assert set(c.secrets) <= read
