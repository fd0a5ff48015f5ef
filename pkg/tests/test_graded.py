from fractions import Fraction

import pytest

from opjets.errors import DimensionError
from opjets.graded import (GradedMap, GradedSpace, MapSolver, Subspace,
                           direct_sum, image, kernel, map_solve, quotient)
from opjets.linalg import Mat


def two_dim_each():
    return GradedSpace({0: 2, 1: 2})


def test_space_basics():
    v = GradedSpace({0: 2, 3: 1})
    assert v.dim(0) == 2 and v.dim(3) == 1 and v.dim(1) == 0
    assert v.total_dim() == 3
    assert list(v.basis()) == [(0, 0), (0, 1), (3, 0)]


def test_shift_moves_degree_down():
    v = GradedSpace({0: 1})
    assert v.shifted(1).dims == {-1: 1}
    assert v.shifted(-2).dims == {2: 1}
    assert v.shifted(0) is v


def test_direct_sum_and_projections():
    a = GradedSpace({0: 1, 1: 2})
    b = GradedSpace({1: 1})
    s, (ia, ib), (pa, pb) = (lambda t: (t[0], t[1], t[2]))(direct_sum([a, b]))
    assert s.dims == {0: 1, 1: 3}
    assert pa @ ia == GradedMap.identity(a)
    assert pb @ ib == GradedMap.identity(b)
    assert (pa @ ib).is_zero() and (pb @ ia).is_zero()
    assert ia @ pa + ib @ pb == GradedMap.identity(s)


def test_map_compose_degrees():
    v = GradedSpace({0: 1, 1: 1, 2: 1})
    f = GradedMap.from_entries(v, v, 1, [(0, 0, 0, 1), (1, 0, 0, 1)])
    g = f @ f
    assert g.degree == 2
    assert g.entry(0, 0, 0) == 1


def test_map_shape_check():
    v = GradedSpace({0: 2})
    with pytest.raises(DimensionError):
        GradedMap(v, v, 0, {0: Mat.zero(3, 2)})


def test_kernel_image_subspace():
    v = GradedSpace({0: 2})
    w = GradedSpace({0: 1})
    f = GradedMap(v, w, 0, {0: Mat.from_rows([[1, 1]])})
    k = kernel(f)
    assert k.dim(0) == 1
    assert k.contains_vector(0, Mat.column(2, [1, -1]))
    assert not k.contains_vector(0, Mat.column(2, [1, 1]))
    im = image(f)
    assert im.dim(0) == 1


def test_quotient_trivial_cases():
    v = GradedSpace({0: 3})
    q, proj, sec = quotient(v, Subspace(v))
    assert q.dims == {0: 3}
    assert proj @ sec == GradedMap.identity(q)
    full = Subspace(v, {0: Mat.identity(3)})
    q2, _, _ = quotient(v, full)
    assert q2.dims == {}


def test_quotient_kills_exactly_rel():
    v = GradedSpace({0: 3})
    rel = Subspace(v, {0: Mat.from_rows([[1, 1, 0]])})
    q, proj, sec = quotient(v, rel)
    assert q.dims == {0: 2}
    assert proj @ sec == GradedMap.identity(q)
    assert (proj.block(0) @ Mat.column(3, [1, 1, 0])).is_zero()
    assert proj.block(0).rank() == 2


def test_map_solve_identity_and_zero():
    v = GradedSpace({0: 2})
    idm = GradedMap.identity(v)
    y = GradedMap(v, v, 0, {0: Mat.from_rows([[1, 2], [3, 4]])})
    assert map_solve(idm, y) == y
    zero = GradedMap.zero(v, v, 0)
    assert map_solve(zero, y) is None
    assert map_solve(zero, zero) == zero


def test_map_solver_simple():
    # solve U with  U = target map  (single identity term)
    v = GradedSpace({0: 1, 1: 2})
    rhs = GradedMap.from_entries(v, v, 0, [(1, 0, 1, "7/2")])
    s = MapSolver()
    k = s.add_unknown(v, v, 0)
    s.add_constraint([(1, None, k, None)], rhs)
    (u,) = s.solve()
    assert u == rhs


def test_map_solver_composition_constraint():
    # unknown U: V->V degree 0 with  A @ U = A  where A kills one coordinate;
    # solution space should have nullity 2 (the killed row of U is free)
    v = GradedSpace({0: 2})
    a = GradedMap(v, v, 0, {0: Mat.from_rows([[1, 0], [0, 0]])})
    s = MapSolver()
    k = s.add_unknown(v, v, 0)
    s.add_constraint([(1, a, k, None)], a)
    sol, nullity = s.solve_with_nullity()
    assert sol is not None
    assert a @ sol[0] == a
    assert nullity == 2


def test_map_solver_inconsistent():
    v = GradedSpace({0: 1})
    zero = GradedMap.zero(v, v, 0)
    one = GradedMap(v, v, 0, {0: Mat.identity(1)})
    s = MapSolver()
    k = s.add_unknown(v, v, 0)
    s.add_constraint([(1, zero, k, None)], one)
    assert s.solve() is None
