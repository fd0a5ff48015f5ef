from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opjets.algebras import (apply_cols, free_algebra, kahler,
                             universal_envelope)
from opjets.complexes import Complex
from opjets.graded import GradedMap, GradedSpace
from opjets.modules import (FreeModule, LaxProduct, check_module,
                            lax_hom, module_hom_dim, module_over_self,
                            reorder_sign, symmetric_power,
                            transpose_from_hom, transpose_to_hom,
                            is_module_morphism, ModuleFreeAlgebra,
                            ModuleFreeModule)
from opjets.operads import AssOperad, ComOperad
from opjets.permutations import Perm


def rank(n):
    return Complex(GradedSpace({0: n}))


def two_term_complex():
    sp = GradedSpace({0: 1, 1: 1})
    d = GradedMap.from_entries(sp, sp, 1, [(0, 0, 0, 1)])
    return Complex(sp, d)


def dims(sp):
    return dict(sorted(sp.dims.items()))


@pytest.fixture(scope="module")
def com2():
    A = free_algebra(ComOperad(4), rank(2), 2)
    U = universal_envelope(A)
    return A, U


@pytest.fixture(scope="module")
def dg3():
    A = free_algebra(ComOperad(4), two_term_complex(), 3)
    U = universal_envelope(A)
    return A, U


# -- permutation signs --------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.data())
def test_reorder_sign_composition(data):
    k = data.draw(st.integers(min_value=1, max_value=5))
    degs = tuple(data.draw(
        st.lists(st.integers(min_value=-1, max_value=2),
                 min_size=k, max_size=k)))
    p = tuple(data.draw(st.permutations(list(range(k)))))
    q = tuple(data.draw(st.permutations(list(range(k)))))
    # first apply p, then q on the already-permuted tuple
    pd = tuple(degs[p[i]] for i in range(k))
    pq = tuple(p[q[i]] for i in range(k))
    assert reorder_sign(degs, pq) == \
        reorder_sign(degs, p) * reorder_sign(pd, q)


def test_reorder_sign_swap():
    assert reorder_sign((1, 1), (1, 0)) == -1
    assert reorder_sign((1, 0), (1, 0)) == 1
    assert reorder_sign((0, 0), (1, 0)) == 1


# -- module axioms ------------------------------------------------------

def test_check_module_instances(com2, dg3):
    A, U = com2
    assert check_module(module_over_self(A)).ok()
    assert check_module(FreeModule(A, rank(2), U)).ok()
    Ad, Ud = dg3
    E = FreeModule(Ad, Complex(GradedSpace({0: 1})), Ud)
    assert check_module(E).ok()
    Om, d = kahler(Ad)
    assert check_module(Om).ok()
    # heterogeneous lax product with odd elements in both factors
    P = LaxProduct(Ad, [Om, E])
    assert check_module(P).ok()


def test_check_module_catches_mutation(com2):
    from opjets.modules import AModule
    A, U = com2
    M = FreeModule(A, rank(1), U)
    acts = dict(M.actions)
    g = acts[1]
    sn = min(g.blocks)
    blk = g.blocks[sn]
    r = min(blk.rows)
    c = min(blk.rows[r])
    ents = []
    for n, b in g.blocks.items():
        for i, row in b.rows.items():
            for j, x in row.items():
                if (n, i, j) == (sn, r, c):
                    x = -x
                ents.append((n, i, j, x))
    acts[1] = GradedMap.from_entries(g.source, g.target, g.degree, ents)
    B = AModule(A, M.carrier, acts)
    assert not check_module(B).ok()


# -- lax product laws ---------------------------------------------------

def eval_empty(P, A):
    """Evaluation P_A() -> A by multiplying out minimal lifts."""
    ents = []
    for n in P.carrier.space.degrees():
        for idx in range(P.carrier.space.dim(n)):
            for k, ((degs, idxs), val) in P.lift(n, idx):
                loc = A.mult_tb(k).index(degs, idxs)
                if loc is None:
                    continue
                _, col = apply_cols(A.mult(k), loc[0], {loc[1]: val})
                for gi, v in col.items():
                    ents.append((n, gi, idx, v))
    return GradedMap.from_entries(P.carrier.space, A.carrier.space, 0,
                                  ents)


def include_empty(P, A):
    """A -> P_A() as classes of one-letter words."""
    ents = []
    for n in A.carrier.space.degrees():
        for j in range(A.carrier.space.dim(n)):
            col = P.ambient_class(1, (0, n), (0, j))
            for r, v in col.items():
                ents.append((n, r, j, v))
    return GradedMap.from_entries(A.carrier.space, P.carrier.space, 0,
                                  ents)


def test_empty_product_is_algebra(com2, dg3):
    for A, _ in (com2, dg3):
        P = LaxProduct(A, [])
        assert dims(P.carrier.space) == dims(A.carrier.space)
        ev = eval_empty(P, A)
        inc = include_empty(P, A)
        assert ev @ inc == GradedMap.identity(A.carrier.space)
        assert inc @ ev == GradedMap.identity(P.carrier.space)


def eval_single(P, E):
    ents = []
    for n in P.carrier.space.degrees():
        for idx in range(P.carrier.space.dim(n)):
            for k, ((degs, idxs), val) in P.lift(n, idx):
                loc = E.action_tb(k).index(degs, idxs)
                if loc is None:
                    continue
                _, col = apply_cols(E.action(k), loc[0], {loc[1]: val})
                for gi, v in col.items():
                    ents.append((n, gi, idx, v))
    return GradedMap.from_entries(P.carrier.space, E.carrier.space, 0,
                                  ents)


def include_single(P, E):
    ents = []
    for n in E.carrier.space.degrees():
        for j in range(E.carrier.space.dim(n)):
            col = P.ambient_class(0, (0, n), (0, j))
            for r, v in col.items():
                ents.append((n, r, j, v))
    return GradedMap.from_entries(E.carrier.space, P.carrier.space, 0,
                                  ents)


def test_single_product_is_module(com2, dg3):
    A, U = com2
    Ad, Ud = dg3
    for alg, E in ((A, FreeModule(A, rank(2), U)),
                   (A, module_over_self(A)),
                   (Ad, FreeModule(Ad, Complex(GradedSpace({0: 1})),
                                   Ud))):
        P = LaxProduct(alg, [E])
        assert dims(P.carrier.space) == dims(E.carrier.space)
        ev = eval_single(P, E)
        inc = include_single(P, E)
        assert ev @ inc == GradedMap.identity(E.carrier.space)
        assert inc @ ev == GradedMap.identity(P.carrier.space)
        assert is_module_morphism(inc, E, P)


def test_product_of_free_modules_is_free(com2):
    # P_A(U (x) W1, U (x) W2) has the dimensions of U (x) (W1 (x) W2);
    # for a commutative algebra this is the tensor product over A
    A, U = com2
    F1 = FreeModule(A, rank(2), U)
    F2 = FreeModule(A, rank(1), U)
    P = LaxProduct(A, [F1, F2])
    F12 = FreeModule(A, rank(2), U)
    assert dims(P.carrier.space) == {0: 12}
    assert dims(P.carrier.space) == dims(F12.carrier.space)
    assert check_module(P).ok()


def test_ass_product_dims():
    A = free_algebra(AssOperad(3), rank(2), 2)
    M = module_over_self(A)
    P = LaxProduct(A, [M, M])
    assert dims(P.carrier.space) == {0: 14}


def test_com_self_product_is_identity(dg3):
    # A (x)_A A = A for a commutative algebra, even with odd elements
    Ad, _ = dg3
    Md = module_over_self(Ad)
    P = LaxProduct(Ad, [Md, Md])
    assert dims(P.carrier.space) == dims(Ad.carrier.space)


# -- lax hom and the adjunction -----------------------------------------

def test_empty_hom_is_target(com2):
    A, U = com2
    F2 = FreeModule(A, rank(1), U)
    H = lax_hom(A, [], F2)
    assert dims(H.carrier.space) == dims(F2.carrier.space)


def test_adjunction_com_with_transpose(com2):
    A, U = com2
    F1 = FreeModule(A, rank(2), U)
    F2 = FreeModule(A, rank(1), U)
    N = module_over_self(A)
    P = LaxProduct(A, [F1, F2])
    H = lax_hom(A, [F2], N)
    assert check_module(H).ok()
    basis = module_hom_dim(P, N, return_basis=True)
    assert len(basis) == 12
    assert module_hom_dim(F1, H) == 12
    for f in basis[:4]:
        g = transpose_to_hom(f, P, H)
        assert is_module_morphism(g, F1, H)
        assert transpose_from_hom(g, P, H) == f


def test_adjunction_dg_with_transpose(dg3):
    Ad, Ud = dg3
    E = FreeModule(Ad, Complex(GradedSpace({0: 1})), Ud)
    N = module_over_self(Ad)
    P = LaxProduct(Ad, [E, N])
    H = lax_hom(Ad, [N], N)
    basis = module_hom_dim(P, N, return_basis=True)
    assert len(basis) == 1
    assert module_hom_dim(E, H) == 1
    g = transpose_to_hom(basis[0], P, H)
    assert is_module_morphism(g, E, H)
    assert transpose_from_hom(g, P, H) == basis[0]


def test_adjunction_ass_dims():
    A = free_algebra(AssOperad(3), rank(1), 2)
    M = module_over_self(A)
    P = LaxProduct(A, [M, M])
    H = lax_hom(A, [M], M)
    assert module_hom_dim(P, M) == 6
    assert module_hom_dim(M, H) == 6
    U = universal_envelope(A)
    F = FreeModule(A, rank(1), U)
    P2 = LaxProduct(A, [F, F])
    H2 = lax_hom(A, [F], M)
    assert module_hom_dim(P2, M) == 18
    assert module_hom_dim(F, H2) == 18


# -- symmetric constructions --------------------------------------------

def test_symmetric_power_dg(dg3):
    Ad, Ud = dg3
    M = FreeModule(Ad, Ad.gens, Ud)
    S2 = symmetric_power(Ad, M, 2)
    assert dims(S2.carrier.space) == {0: 2, 1: 3, 2: 1}
    assert check_module(S2).ok()


def test_symmetric_algebra_dims(com2, dg3):
    A, U = com2
    F2 = FreeModule(A, rank(1), U)
    S = ModuleFreeAlgebra(A, F2, 3)
    assert dims(S.lsum.space) == {0: 24}
    Ad, Ud = dg3
    M = FreeModule(Ad, Ad.gens, Ud)
    Sd = ModuleFreeAlgebra(Ad, M, 3)
    assert dims(Sd.lsum.space) == {0: 10, 1: 12, 2: 3}
    E = FreeModule(Ad, Complex(GradedSpace({0: 1})), Ud)
    SME = ModuleFreeModule(Sd, E)
    assert dims(SME.lsum.space) == {0: 10, 1: 12, 2: 3}


def test_symmetric_algebra_axioms(dg3):
    from opjets.algebras import check_algebra
    Ad, Ud = dg3
    M = FreeModule(Ad, Ad.gens, Ud)
    Sd = ModuleFreeAlgebra(Ad, M, 2)
    assert check_algebra(Sd, cap=2).ok()
