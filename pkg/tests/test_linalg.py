from fractions import Fraction

from hypothesis import given, settings, strategies as st

from opjets.linalg import Mat


def test_identity_compose():
    a = Mat.from_rows([[1, 2], [3, "4/5"]])
    assert Mat.identity(2) @ a == a
    assert a @ Mat.identity(2) == a


def test_product_against_scalar_expansion():
    a = Mat.from_rows([["1/2", 2], [-3, "7/3"]])
    b = Mat.from_rows([[5, "-1/4"], [0, 2]])
    c = a @ b
    for i in range(2):
        for j in range(2):
            expect = sum(a.entry(i, k) * b.entry(k, j) for k in range(2))
            assert c.entry(i, j) == expect


def test_kernel_image_trivial():
    z = Mat.zero(3, 3)
    assert z.kernel_basis().ncols == 3
    assert z.column_space_basis().ncols == 0
    e = Mat.identity(3)
    assert e.kernel_basis().ncols == 0
    assert e.column_space_basis().ncols == 3


def test_kernel_of_row_sum():
    # kernel of (1 1) is spanned by (1, -1)
    m = Mat.from_rows([[1, 1]])
    k = m.kernel_basis()
    assert (k.nrows, k.ncols) == (2, 1)
    assert k.entry(0, 0) == -k.entry(1, 0) != 0
    v = k.entry(0, 0)
    assert (k.entry(0, 0), k.entry(1, 0)) == (v, -v)


def test_solve_lexicographic():
    m = Mat.from_rows([[1, 1]])
    x = m.solve(Mat.from_rows([[1]]))
    assert x.to_dense() == [[1], [0]]


def test_solve_inconsistent():
    z = Mat.zero(2, 2)
    assert z.solve(Mat.from_rows([[1], [0]])) is None
    assert z.solve(Mat.zero(2, 1)) == Mat.zero(2, 1)


def test_rref_canonical():
    m = Mat.from_rows([[2, 4, 6], [1, 2, 3], [0, 0, 5]])
    r, piv = m.rref()
    assert piv == [0, 2]
    assert r.to_dense()[0] == [1, 2, 0]
    assert r.to_dense()[1] == [0, 0, 1]
    assert r.to_dense()[2] == [0, 0, 0]


small_frac = st.fractions(
    min_value=-4, max_value=4, max_denominator=3)


@st.composite
def matrices(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_n))
    rows = draw(st.lists(
        st.lists(small_frac, min_size=m, max_size=m),
        min_size=n, max_size=n))
    return Mat.from_rows(rows)


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_nullity(m):
    assert m.kernel_basis().ncols + m.rank() == m.ncols


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_kernel_annihilated(m):
    assert (m @ m.kernel_basis()).is_zero()


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_solve_exact_on_image(m):
    # every column of m is in the image, so solving must succeed exactly
    x = m.solve(m)
    assert x is not None
    assert m @ x == m


@given(matrices())
@settings(max_examples=40, deadline=None)
def test_row_space_idempotent(m):
    r = m.row_space()
    assert r.row_space() == r
    assert r.nrows == m.rank()
