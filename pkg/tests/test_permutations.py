from itertools import permutations as iperms

import pytest

from opjets.complexes import Complex, is_chain_map, tensor_complex
from opjets.graded import GradedMap, GradedSpace
from opjets.permutations import Perm, act_on_factors, block_perm, perm_sum
from opjets.tensors import TensorBasis


def all_perms(n):
    return [Perm(p) for p in iperms(range(1, n + 1))]


def test_compose_and_inverse():
    p = Perm((2, 3, 1))
    q = Perm((2, 1, 3))
    assert (p * q).images == tuple(p(q(i)) for i in (1, 2, 3))
    assert (p * p.inverse()).is_identity()
    assert (p.inverse() * p).is_identity()


def test_adjacent_word_reconstructs():
    for p in all_perms(4):
        acc = Perm.identity(4)
        for i in p.adjacent_word():
            acc = acc * Perm.transposition(4, i)
        assert acc == p


def test_sum_trivial_and_derived():
    assert perm_sum([Perm.identity(2), Perm.identity(3)]) == Perm.identity(5)
    assert perm_sum([Perm((2, 1))]) == Perm((2, 1))
    assert perm_sum([Perm((2, 1)), Perm((2, 3, 1))]) == Perm((2, 1, 4, 5, 3))


def test_block_perm_trivial_and_derived():
    assert block_perm(Perm.identity(3), [2, 0, 1]) == Perm.identity(3)
    assert block_perm(Perm((2, 1)), [1, 1]) == Perm((2, 1))
    assert block_perm(Perm((2, 1)), [2, 1]) == Perm((2, 3, 1))


def test_block_perm_of_singletons_is_sigma_pattern():
    for p in all_perms(3):
        assert block_perm(p, [1, 1, 1]).inverse() == \
            Perm(tuple(p(i) for i in (1, 2, 3))).inverse()


def mixed_factors():
    return GradedSpace({0: 1, 1: 1})


def test_action_identity_and_transposition_sign():
    v = mixed_factors()
    tb = TensorBasis([v, v])
    ident = act_on_factors(Perm.identity(2), tb)
    assert ident == GradedMap.identity(tb.space)
    swap = act_on_factors(Perm((2, 1)), tb)
    # both degree-1 factors: sign -1
    sn, sp = tb.index((1, 1), (0, 0))
    assert swap.entry(sn, sp, sp) == -1
    # degree 0 (x) degree 0: plain swap, +1
    sn, sp = tb.index((0, 0), (0, 0))
    assert swap.entry(sn, sp, sp) == 1


def test_action_is_right_action():
    v = mixed_factors()
    tb = TensorBasis([v, v, v])
    for s in all_perms(3):
        for t in all_perms(3):
            lhs = act_on_factors(s * t, tb)
            rhs = act_on_factors(t, tb) @ act_on_factors(s, tb)
            assert lhs == rhs


def test_action_is_chain_map():
    sp = GradedSpace({0: 1, 1: 1})
    d = GradedMap.from_entries(sp, sp, 1, [(0, 0, 0, 1)])
    X = Complex(sp, d)
    T, tb = tensor_complex([X, X, X])
    for s in all_perms(3):
        assert is_chain_map(act_on_factors(s, tb), T, T)


def test_three_cycle_two_factorizations():
    v = mixed_factors()
    tb = TensorBasis([v, v, v])
    c = Perm((2, 3, 1))
    s1, s2 = Perm.transposition(3, 1), Perm.transposition(3, 2)
    # (2,3,1) = s1 * s2 and also s2 * (1 3)-transposition
    assert c == s1 * s2
    assert c == s1 * s2 * s1 * s1  # a longer, redundant word
    lhs = act_on_factors(c, tb)
    rhs = act_on_factors(s2, tb) @ act_on_factors(s1, tb)
    assert lhs == rhs
    word = [s1, s2, s1, s1]
    acc = GradedMap.identity(tb.space)
    for g in word:
        acc = act_on_factors(g, tb) @ acc
    assert acc == lhs


def test_sum_block_interchange():
    # the interchange used by operad equivariance, exhaustively for
    # n <= 3 and block sizes <= 2:
    #   (tau_1+..+tau_n) o sigma_{m_s(1)..m_s(n)}
    #     = sigma_{m_s(1)..m_s(n)} o (tau_s(1)+..+tau_s(n))
    from itertools import product
    for n in (2, 3):
        for blocks in product((1, 2), repeat=n):
            for sigma in all_perms(n):
                taus = [Perm.identity(b) if b == 1 else Perm((2, 1))
                        for b in blocks]
                permuted_blocks = tuple(blocks[sigma(j) - 1]
                                        for j in range(1, n + 1))
                permuted_taus = [taus[sigma(j) - 1] for j in range(1, n + 1)]
                lhs = perm_sum(taus) * block_perm(sigma, permuted_blocks)
                rhs = block_perm(sigma, permuted_blocks) * perm_sum(permuted_taus)
                assert lhs == rhs
