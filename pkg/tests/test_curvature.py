from fractions import Fraction

import pytest

from opjets.algebras import check_algebra, free_algebra
from opjets.complexes import Complex, is_chain_map
from opjets.connections import canonical_connection
from opjets.curvature import (MCElement, bianchi_witness,
                              bianchi_witness_module,
                              check_free_derivation,
                              check_weight_raising, curvature_mc,
                              d_nabla, deform, deform_module,
                              gauge_flow, gauge_transport_check,
                              graded_commutator, mc_check, q_nabla,
                              tautological_derivation, total_curvature,
                              total_curvature_module)
from opjets.graded import GradedMap, GradedSpace
from opjets.modules import (FreeModule, ModuleFreeAlgebra,
                            ModuleFreeModule, check_module, lax_insert,
                            lax_transfer)
from opjets.operads import ComOperad
from opjets.algebras import universal_envelope


def two_term_complex():
    sp = GradedSpace({0: 1, 1: 1})
    d = GradedMap.from_entries(sp, sp, 1, [(0, 0, 0, 1)])
    return Complex(sp, d)


# -- total curvature of the canonical connection ------------------------

@pytest.fixture(scope="module")
def dg_setup():
    A = free_algebra(ComOperad(4), two_term_complex(), 3)
    U = universal_envelope(A)
    M = FreeModule(A, A.gens, U)
    d = tautological_derivation(A, M)
    conn = canonical_connection(M, d)
    S = ModuleFreeAlgebra(A, M, 3)
    return A, U, M, d, conn, S


def test_q_nabla_is_free_derivation(dg_setup):
    A, U, M, d, conn, S = dg_setup
    assert dict(S.lsum.space.dims) == {0: 10, 1: 12, 2: 3}
    Q = q_nabla(S, d, conn)
    assert check_weight_raising(Q)
    assert check_free_derivation(Q, d, conn)


def test_curvature_components(dg_setup):
    A, U, M, d, conn, S = dg_setup
    Q = q_nabla(S, d, conn)
    R = total_curvature(Q)
    # R^(0) = 0
    assert R.component(0).is_zero()
    # R^(1) is the induced differential of the symmetric construction
    assert R.component(1) == \
        S.lsum.projs[1] @ S.lsum.complex.d @ S.from_module
    # R^(2) = -[d, nabla], pushed into the symmetric quotient
    Pmm = conn.product
    t2 = lax_transfer(Pmm, S.levels[2])
    assert R.component(2) == \
        t2 @ (conn.map @ M.carrier.d - Pmm.carrier.d @ conn.map)
    # the total form squares to zero, so the bracket vanishes
    assert graded_commutator(R.form, R.form).is_zero()


def test_curvature_module_components(dg_setup):
    A, U, M, d, conn, S = dg_setup
    E = FreeModule(A, Complex(GradedSpace({0: 1})), U)
    conn_e = canonical_connection(E, d)
    SME = ModuleFreeModule(S, E)
    D = d_nabla(SME, d, conn, conn_e)
    assert check_weight_raising(D)
    T = total_curvature_module(D)
    assert T.component(0) == \
        SME.lsum.projs[0] @ SME.lsum.complex.d @ SME.from_emodule
    Pme = conn_e.product
    t1 = lax_transfer(Pme, SME.levels[1])
    assert T.component(1) == \
        t1 @ (conn_e.map @ E.carrier.d - Pme.carrier.d @ conn_e.map)
    assert graded_commutator(T.form, T.form).is_zero()
    # curvature-free instance: witness exists with trivial composite
    w = bianchi_witness_module(T, conn, conn_e)
    assert w.composite.is_zero()


# -- Maurer-Cartan elements and deformations ----------------------------

@pytest.fixture(scope="module")
def aff1():
    A = free_algebra(ComOperad(4), Complex(GradedSpace({1: 2})), 4)
    gmap = GradedMap.from_entries(
        A.gens.space, A.carrier.space, 1,
        [(1, r, 1, -1) for r in range(A.carrier.space.dim(2))])
    return A, MCElement(A, gmap)


def test_mc_check(aff1):
    A, g = aff1
    assert dict(A.carrier.space.dims) == {0: 1, 1: 2, 2: 1}
    assert mc_check(g)


def test_mc_check_catches_jacobi_mutation():
    # one odd and one even generator; the square of the twisted
    # differential picks up the product of the two structure constants
    A = free_algebra(ComOperad(4),
                     Complex(GradedSpace({1: 1, 2: 1})), 2)

    def cand(a, c):
        ents = []
        if a:
            ents.append((1, 0, 0, a))
        if c:
            ents.append((2, 0, 0, c))
        return MCElement(A, GradedMap.from_entries(
            A.gens.space, A.carrier.space, 1, ents))

    assert mc_check(cand(0, -1))
    assert not mc_check(cand(1, 1))


def test_deformed_algebra_and_module(aff1):
    A, g = aff1
    Ag = deform(A, g)
    assert check_algebra(Ag).ok()
    Mg = deform_module(g, Ag)
    assert dict(Mg.carrier.space.dims) == {1: 2, 2: 4, 3: 2}
    dg = tautological_derivation(Ag, Mg)
    assert is_chain_map(dg.map, Ag.carrier, Mg.carrier)
    assert check_module(Mg).ok()


def test_curvature_mc_pipeline(aff1):
    A, g = aff1
    C = curvature_mc(g, strunc=3)
    assert C.ok()
    assert not C.hat.is_zero()
    assert not C.restriction.is_zero()
    assert not C.curvature.component(2).is_zero()


# -- Bianchi witnesses on a curved instance -----------------------------

@pytest.fixture(scope="module")
def curved():
    V = GradedSpace({1: 2, 2: 1})
    A = free_algebra(ComOperad(4), Complex(V), 3)
    g = MCElement(A, GradedMap.from_entries(
        A.gens.space, A.carrier.space, 1,
        [(1, 0, 1, -1), (1, 1, 1, -1), (2, 0, 0, 1)]))
    assert mc_check(g)
    return curvature_mc(g, strunc=3)


def test_bianchi_witness_algebra(curved):
    C = curved
    S, R = C.star, C.curvature
    w = bianchi_witness(R)
    assert not w.alpha.is_zero()
    assert not w.alpha_hat.is_zero()
    # the hat is exactly the level-two-to-three block of the total form
    assert w.alpha_hat == S.lsum.projs[3] @ R.form @ S.lsum.incs[2]
    # and inserting alpha in slot 0 gives the one-to-two block
    S1, S2 = S.levels[1], S.levels[2]
    a12 = lax_insert(S1, 0, w.alpha, S2, S2)
    assert not a12.is_zero()
    assert a12 == S.lsum.projs[2] @ R.form @ S.lsum.incs[1]
    # witness identity
    M = S.module
    S3 = S.levels[3]
    assert S3.carrier.d @ w.homotopy + w.homotopy @ M.carrier.d \
        == w.composite


def test_bianchi_witness_module(curved):
    C = curved
    SME = ModuleFreeModule(C.star, C.module)
    d = tautological_derivation(C.algebra, C.module)
    D = d_nabla(SME, d, C.connection, C.connection)
    T = total_curvature_module(D)
    assert graded_commutator(T.form, T.form).is_zero()
    assert not T.component(1).is_zero()
    w = bianchi_witness_module(T, C.connection, C.connection)
    assert not w.composite.is_zero()
    assert not w.homotopy.is_zero()
    E = SME.emodule
    S2 = SME.levels[2]
    assert S2.carrier.d @ w.homotopy + w.homotopy @ E.carrier.d \
        == w.composite


# -- gauge flows and transport ------------------------------------------

@pytest.fixture(scope="module")
def flow_setup():
    V = GradedSpace({1: 2, 2: 1})
    A = free_algebra(ComOperad(4), Complex(V), 2)
    sp = A.carrier.space
    gsp = A.gens.space
    # degree-2 basis of A: the weight-one generator w at index 0 and
    # the product y1 y2 at index 1
    g = MCElement(A, GradedMap.from_entries(gsp, sp, 1,
                                            [(1, 0, 1, 1)]))
    xi = GradedMap.from_entries(gsp, sp, 0, [(2, 1, 0, 1)])
    return A, g, xi


def test_gauge_flow_coefficients(flow_setup):
    A, g, xi = flow_setup
    assert mc_check(g)
    flow = gauge_flow(g, [xi], 3)
    got = [{n: dict(b.rows) for n, b in gm.blocks.items() if b.rows}
           for gm in flow.gmaps]
    assert got[0] == {1: {0: {1: 1}}}
    assert got[1] == {1: {1: {1: 1}}, 2: {0: {0: -1}}}
    assert got[2] == {}
    assert got[3] == {}
    assert all(d.is_zero() for d in flow.defect_coefficients(3))


def test_gauge_transport(flow_setup):
    A, g, xi = flow_setup
    flow = gauge_flow(g, [xi], 3)
    assert gauge_transport_check(flow, strunc=3)
    # forgetting to conjugate the gauge generator must be detected
    assert not gauge_transport_check(flow, strunc=3, drop_exp=True)
