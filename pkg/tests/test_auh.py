# tests/test_auh.py
import pytest
from hypothesis import given, strategies as st

from coding.auh import HashParams, digest, joint_key, kappa, keyed_hash, pad
from coding.bits import Bits
from core.errors import ContractViolation


def test_kappa_values():
    assert kappa(32, 64, 4) == 32 + 1 + 10
    assert kappa(32, 1, 1) == 33
    # ceil(log2(3 * 9)) = 5
    assert kappa(1, 3, 3) == 7


def test_kappa_rejects_bad_input():
    with pytest.raises(ContractViolation):
        kappa(0, 8, 4)


def test_pad_to_multiple():
    assert pad(Bits(0b101, 3), 4) == Bits(0b1010, 4)
    assert pad(Bits(0xFF, 8), 4).length == 8
    assert pad(Bits(1, 9), 4).length == 12


def test_hash_requires_padding():
    with pytest.raises(ContractViolation):
        keyed_hash(3, Bits(1, 5), 4)


def test_joint_key_symmetric_mod():
    assert joint_key(15, 3, 4) == 2
    assert joint_key(3, 15, 4) == joint_key(15, 3, 4)
    with pytest.raises(ContractViolation):
        joint_key(16, 0, 4)


def test_digest_below_kappa_is_raw():
    params = HashParams(lam=32, msg_len=8, parties=4)
    assert not params.hashes
    assert params.digest_bits == 8
    assert digest(12345, Bits(0xAB, 8), params) == 0xAB


def test_digest_above_kappa_is_hash():
    params = HashParams(lam=8, msg_len=64, parties=4)
    assert params.hashes
    v = Bits(0x0123456789ABCDEF, 64)
    k = params.kappa
    assert digest(5, v, params) == keyed_hash(5, pad(v, k), k)


@given(st.integers(0, 15), st.integers(0, (1 << 12) - 1), st.integers(0, (1 << 12) - 1))
def test_hash_is_xor_linear(key, a, b):
    ha = keyed_hash(key, Bits(a, 12), 4)
    hb = keyed_hash(key, Bits(b, 12), 4)
    assert ha ^ hb == keyed_hash(key, Bits(a ^ b, 12), 4)


@pytest.mark.parametrize("length", [4, 8, 12])
def test_collision_bound_exhaustive(length):
    # h(k, m) ^ h(k, m') = h(k, m ^ m'): kollisjonsnøklene for et par er røttene til differansen
    kappa_ = 4
    blocks = length // kappa_
    worst = 0
    for diff in range(1, 1 << length):
        roots = sum(1 for key in range(1 << kappa_) if keyed_hash(key, Bits(diff, length), kappa_) == 0)
        worst = max(worst, roots)
    # andel <= (ell/kappa) * 2^-kappa, dvs. høyst `blocks` nøkler av 16
    assert worst <= blocks
    assert worst <= blocks - 1
