import pytest
from hypothesis import given, strategies as st

from spinscape.spins import SpinConfig, flip


def test_flip_single_bit():
    assert flip(SpinConfig(0b000, 3), 1).bits == 0b010


def test_flip_involution_example():
    assert flip(SpinConfig(0b010, 3), 1).bits == 0b000


def test_flip_minimal_case():
    assert flip(SpinConfig(0b0, 1), 0).bits == 0b1


def test_flip_out_of_range():
    with pytest.raises(ValueError):
        SpinConfig(0, 3).flip(3)
    with pytest.raises(ValueError):
        SpinConfig(0, 3).flip(-1)


def test_neighbors_count_and_distance():
    sigma = SpinConfig(0b1010, 4)
    nbrs = sigma.neighbors()
    assert len(nbrs) == 4
    assert len(set(nbrs)) == 4
    for nb in nbrs:
        assert sigma.hamming(nb) == 1


def test_bits_validation():
    with pytest.raises(ValueError):
        SpinConfig(4, 2)  # bit above position n-1
    with pytest.raises(ValueError):
        SpinConfig(0, 0)
    with pytest.raises(ValueError):
        SpinConfig(0, 31)


def test_spin_values_and_roundtrip():
    sigma = SpinConfig(0b101, 3)
    assert sigma.spins() == [1, -1, 1]
    assert SpinConfig.from_spins([1, -1, 1]) == sigma
    with pytest.raises(ValueError):
        SpinConfig.from_spins([1, 0, -1])


def test_str_is_binary_most_significant_left():
    assert str(SpinConfig(1, 2)) == "01"
    assert str(SpinConfig(2, 2)) == "10"


def test_all_plus_minus():
    assert SpinConfig.all_plus(4).bits == 0b1111
    assert SpinConfig.all_minus(4).bits == 0


@given(st.integers(1, 12), st.data())
def test_flip_involution_property(n, data):
    bits = data.draw(st.integers(0, (1 << n) - 1))
    i = data.draw(st.integers(0, n - 1))
    sigma = SpinConfig(bits, n)
    assert sigma.flip(i).flip(i) == sigma
    assert sigma.flip(i) != sigma
    assert sigma.hamming(sigma.flip(i)) == 1
