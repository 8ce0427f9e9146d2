# tests/test_rs.py
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coding.bits import Bits
from coding.rs import CodeParams, Codeword, decode, encode, field_width_for, symbol_bits_for
from core.errors import ContractViolation, UnsupportedWidth

SHAPES = [(4, 2), (6, 2), (9, 3), (12, 4)]


def _corrupt(cw: Codeword, errors, erasures, rng: np.random.Generator, p: CodeParams) -> Codeword:
    top = 1 << p.field_width
    symbols = list(cw.symbols)
    for i in errors:
        lane = int(rng.integers(p.lanes))
        flip = int(rng.integers(1, top))
        sym = list(symbols[i])
        sym[lane] ^= flip
        symbols[i] = tuple(sym)
    for i in erasures:
        symbols[i] = None
    return Codeword(tuple(symbols))


def _placements(n: int, k: int):
    for c in range(0, (n - k) // 2 + 1):
        for d in range(0, n - k - 2 * c + 1):
            yield c, d


class TestParams:
    def test_symbol_width(self):
        # w=4 for n=7, ceil(100/3)=34 rundes opp til 36
        assert field_width_for(7) == 4
        assert symbol_bits_for(100, 7, 3) == 36
        assert field_width_for(16) == 8
        assert field_width_for(300) == 16

    def test_too_many_parties(self):
        with pytest.raises(UnsupportedWidth):
            field_width_for(1 << 16)

    def test_invalid_params(self):
        with pytest.raises(ContractViolation):
            CodeParams(n=4, k=5, msg_len=8, symbol_bits=8)
        with pytest.raises(ContractViolation):
            CodeParams(n=4, k=2, msg_len=64, symbol_bits=8)
        with pytest.raises(ContractViolation):
            CodeParams(n=4, k=2, msg_len=8, symbol_bits=6)

    def test_wrong_message_length(self):
        p = CodeParams.for_message(16, 4, 2)
        with pytest.raises(ContractViolation):
            encode(Bits(1, 8), p)


class TestDecode:
    @given(st.integers(min_value=1, max_value=200), st.sampled_from(SHAPES), st.data())
    @settings(max_examples=60, deadline=None)
    def test_clean_roundtrip(self, ell, shape, data):
        n, k = shape
        p = CodeParams.for_message(ell, n, k)
        m = Bits(data.draw(st.integers(min_value=0, max_value=(1 << ell) - 1)), ell)
        assert decode(encode(m, p), p) == m

    @pytest.mark.parametrize("n,k", SHAPES)
    def test_errors_and_erasures_within_budget(self, n, k):
        rng = np.random.default_rng(n * 100 + k)
        p = CodeParams.for_message(37, n, k)
        for c, d in _placements(n, k):
            for _ in range(40):
                m = Bits(int(rng.integers(0, 1 << 37)), 37)
                idx = rng.permutation(n)
                received = _corrupt(encode(m, p), idx[:c], idx[c:c + d], rng, p)
                assert decode(received, p) == m, (c, d)

    def test_too_few_symbols_fails(self):
        p = CodeParams.for_message(16, 6, 3)
        cw = encode(Bits(0xBEEF, 16), p)
        received = Codeword(cw.symbols[:2] + (None,) * 4)
        assert decode(received, p) is None

    def test_malformed_symbol_counts_as_erasure(self):
        p = CodeParams.for_message(16, 6, 2)
        m = Bits(0xCAFE, 16)
        cw = encode(m, p)
        received = Codeword(((999,),) + cw.symbols[1:])
        assert decode(received, p) == m

    def test_wrong_codeword_length(self):
        p = CodeParams.for_message(16, 4, 2)
        with pytest.raises(ContractViolation):
            decode(Codeword((None,) * 3), p)

    def test_distinct_messages_share_fewer_than_k_symbols(self):
        p = CodeParams.for_message(8, 6, 2)
        a, b = encode(Bits(0x12, 8), p), encode(Bits(0x13, 8), p)
        assert sum(1 for x, y in zip(a, b) if x == y) <= p.k - 1


@pytest.mark.slow
@pytest.mark.parametrize("n,k", SHAPES)
def test_exhaustive_placements(n, k):
    rng = np.random.default_rng(7 + n)
    p = CodeParams.for_message(24, n, k)
    for c, d in _placements(n, k):
        for errors in itertools.combinations(range(n), c):
            rest = [i for i in range(n) if i not in errors]
            for erasures in itertools.islice(itertools.combinations(rest, d), 20):
                for _ in range(50):
                    m = Bits(int(rng.integers(0, 1 << 24)), 24)
                    assert decode(_corrupt(encode(m, p), errors, erasures, rng, p), p) == m
