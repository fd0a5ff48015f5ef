from fractions import Fraction

import pytest

from opjets.algebras import (Derivation, check_algebra, check_derivation,
                             check_monoid, derivation_from_map,
                             free_algebra, kahler, restrict_to_generators,
                             universal_envelope)
from opjets.complexes import Complex, is_chain_map
from opjets.errors import AxiomError
from opjets.graded import GradedMap, GradedSpace
from opjets.operads import AssOperad, ComOperad


def rank(n):
    return Complex(GradedSpace({0: n}))


def two_term_complex():
    sp = GradedSpace({0: 1, 1: 1})
    d = GradedMap.from_entries(sp, sp, 1, [(0, 0, 0, 1)])
    return Complex(sp, d)


def weight_dims(sp):
    out = {}
    for n in sp.degrees():
        for j in range(sp.dim(n)):
            w = sp.weight(n, j)
            out[w] = out.get(w, 0) + 1
    return out


def test_free_com_weight_dims():
    # symmetric algebra on two degree-0 generators: C(n+1, n)
    A = free_algebra(ComOperad(4), rank(2), 4)
    assert weight_dims(A.carrier.space) == {0: 1, 1: 2, 2: 3, 3: 4, 4: 5}
    A1 = free_algebra(ComOperad(4), rank(1), 4)
    assert weight_dims(A1.carrier.space) == {0: 1, 1: 1, 2: 1, 3: 1, 4: 1}


def test_free_ass_weight_dims():
    # tensor algebra on two degree-0 generators: 2^n
    A = free_algebra(AssOperad(4), rank(2), 4)
    assert weight_dims(A.carrier.space) == {0: 1, 1: 2, 2: 4, 3: 8, 4: 16}
    A1 = free_algebra(AssOperad(4), rank(1), 4)
    assert weight_dims(A1.carrier.space) == {0: 1, 1: 1, 2: 1, 3: 1, 4: 1}


def test_free_dg_com_dims():
    # two generators in degrees 0 and 1 with d = id; odd squares vanish
    A = free_algebra(ComOperad(4), two_term_complex(), 3)
    assert dict(A.carrier.space.dims) == {0: 4, 1: 3}


def test_check_algebra_free_instances():
    assert check_algebra(free_algebra(ComOperad(4), rank(2), 2)).ok()
    assert check_algebra(free_algebra(AssOperad(3), rank(2), 2)).ok()
    assert check_algebra(
        free_algebra(ComOperad(4), two_term_complex(), 3)).ok()


def test_check_algebra_catches_mutation():
    from opjets.algebras import OperadAlgebra
    A = free_algebra(ComOperad(4), rank(2), 2)
    mults = dict(A.mults)
    g = mults[2]
    sn = min(g.blocks)
    blk = g.blocks[sn]
    r = min(blk.rows)
    c = min(blk.rows[r])
    ents = []
    for n, b in g.blocks.items():
        for i, row in b.rows.items():
            for j, x in row.items():
                if (n, i, j) == (sn, r, c):
                    x = x + 1
                ents.append((n, i, j, x))
    mults[2] = GradedMap.from_entries(g.source, g.target, g.degree, ents)
    B = OperadAlgebra(A.operad, A.carrier, mults, A.weight_cap)
    assert not check_algebra(B).ok()


def test_envelope_com_is_carrier():
    # enveloping monoid of a free commutative algebra has the carrier's
    # graded dimensions, weight by weight
    A = free_algebra(ComOperad(4), rank(2), 4)
    U = universal_envelope(A)
    assert dict(U.carrier.space.dims) == dict(A.carrier.space.dims)
    assert weight_dims(U.carrier.space) == weight_dims(A.carrier.space)
    assert check_monoid(U).ok()


def test_envelope_ass_two_sided_dims():
    # associative envelope matches A (x) A-opposite weightwise
    A = free_algebra(AssOperad(4), rank(1), 3)
    U = universal_envelope(A)
    assert weight_dims(U.carrier.space) == {0: 1, 1: 2, 2: 3, 3: 4}
    A2 = free_algebra(AssOperad(3), rank(2), 2)
    U2 = universal_envelope(A2)
    # weights of A: 1, 2, 4 -> convolution 1, 4, 12
    assert weight_dims(U2.carrier.space) == {0: 1, 1: 4, 2: 12}
    assert check_monoid(U2).ok()


def test_envelope_unit_and_mul_are_chain_maps():
    A = free_algebra(ComOperad(4), two_term_complex(), 2)
    U = universal_envelope(A)
    assert check_monoid(U).ok()


def test_euler_derivation():
    # the weight-scaling map on a free algebra is a derivation
    A = free_algebra(ComOperad(4), rank(2), 3)
    from opjets.modules import module_over_self
    M = module_over_self(A)
    sp = A.carrier.space
    ents = []
    for n in sp.degrees():
        for j in range(sp.dim(n)):
            w = sp.weight(n, j)
            if w:
                ents.append((n, j, j, w))
    e = GradedMap.from_entries(sp, sp, 0, ents)
    assert check_derivation(Derivation(A, M, e))
    # a non-derivation: scaling only the top weight
    ents2 = [(n, j, j, 1) for n in sp.degrees()
             for j in range(sp.dim(n)) if sp.weight(n, j) == 3]
    f = GradedMap.from_entries(sp, sp, 0, ents2)
    assert not check_derivation(Derivation(A, M, f))


def test_derivation_from_map_round_trip():
    A = free_algebra(ComOperad(4), rank(2), 3)
    from opjets.modules import module_over_self
    M = module_over_self(A)
    sp = A.carrier.space
    # generator values: swap the two generators
    phi = GradedMap.from_entries(A.gens.space, sp, 0,
                                 [(0, 1, 0, 1), (0, 0, 1, 1)])
    d = derivation_from_map(A, M, phi)
    assert check_derivation(d)
    assert restrict_to_generators(d) == phi


def test_derivation_from_map_odd_degree():
    A = free_algebra(ComOperad(4), two_term_complex(), 3)
    from opjets.modules import module_over_self
    M = module_over_self(A)
    # d itself restricted to generators induces the differential
    phi = A.carrier.d @ A.gen_map
    d = derivation_from_map(A, M, phi)
    assert check_derivation(d)
    assert d.map == A.carrier.d


def test_kahler_dims_and_derivative():
    A = free_algebra(ComOperad(4), rank(2), 4)
    Om, d = kahler(A)
    # differentials of a free algebra: free module on the generators
    assert dict(Om.carrier.space.dims) == {0: 20}
    assert check_derivation(d)
    A1 = free_algebra(ComOperad(4), rank(1), 3)
    Om1, d1 = kahler(A1)
    assert dict(Om1.carrier.space.dims) == {0: 3}
    assert check_derivation(d1)


def test_kahler_dg_is_chain():
    A = free_algebra(ComOperad(4), two_term_complex(), 3)
    Om, d = kahler(A)
    assert is_chain_map(d.map, A.carrier, Om.carrier)
    assert check_derivation(d)
