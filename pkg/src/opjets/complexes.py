"""Cochain complexes over the graded substrate.

Sign conventions, fixed once and asserted by tests:
  - tensor differential: d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy
  - braiding: x (x) y -> (-1)^(|x||y|) y (x) x
  - inner hom differential: d(f) = d_Z o f - (-1)^|f| f o d_Y
  - shift: X[k]^n = X^(n+k), d_{X[k]} = (-1)^k d_X
  - graded commutator with the differential: [d,h] = d h - (-1)^|h| h d
  - cone(f: E' -> E)^n = E'^(n+1) + E^n, d(e',e) = (-de', f e' + de)
"""

from .errors import DimensionError, NotExact
from .graded import (GradedMap, GradedSpace, MapSolver, direct_sum, image,
                     kernel, map_solve)
from .linalg import Mat
from .tensors import TensorBasis, shuffle_map, tensor_map


class Complex:

    __slots__ = ("space", "d")

    def __init__(self, space, d=None):
        if d is None:
            d = GradedMap.zero(space, space, 1)
        if d.degree != 1:
            raise DimensionError("differential must have degree 1")
        if not (d.source.same_dims(space) and d.target.same_dims(space)):
            raise DimensionError("differential space mismatch")
        if not (d @ d).is_zero():
            raise DimensionError("differential does not square to zero")
        self.space = space
        self.d = d

    @staticmethod
    def unit(label="1"):
        return Complex(GradedSpace.line(0, label))

    def dims(self):
        return dict(self.space.dims)

    def shift(self, k):
        sp = self.space.shifted(k)
        d = GradedMap(sp, sp, 1,
                      {n - k: b for n, b in self.d.blocks.items()})
        if k % 2:
            d = -d
        return Complex(sp, d)

    def __repr__(self):
        return "Complex(%r)" % (self.space,)


def is_chain_map(f, X, Y):
    """d_Y o f - (-1)^|f| f o d_X = 0, exactly."""
    sign = -1 if f.degree % 2 else 1
    return (Y.d @ f - (f @ X.d).scale(sign)).is_zero()


def commutator_with_d(f, X, Y):
    """[d, f] = d_Y o f - (-1)^|f| f o d_X."""
    sign = -1 if f.degree % 2 else 1
    return Y.d @ f - (f @ X.d).scale(sign)


class ChainMap:
    """A degree-homogeneous map commuting with the differentials."""

    __slots__ = ("map", "source", "target")

    def __init__(self, m, source, target):
        if not is_chain_map(m, source, target):
            raise DimensionError("not a chain map")
        self.map = m
        self.source = source
        self.target = target


class FreeMap:
    """A degree-homogeneous map with no differential compatibility."""

    __slots__ = ("map", "source", "target")

    def __init__(self, m, source, target):
        self.map = m
        self.source = source
        self.target = target


def reinterpret_shift(f, k):
    """View f: X -> Y of degree d as X -> Y[k] of degree d - k.

    The blocks are unchanged; only the bookkeeping target moves."""
    tgt = f.target.shifted(k)
    return GradedMap(f.source, tgt, f.degree - k, f.blocks)


def tensor_complex(complexes, weight_cap=None, window=None):
    """Tensor product with the Koszul-signed differential.

    Returns (Complex, TensorBasis)."""
    tb = TensorBasis([c.space for c in complexes],
                     weight_cap=weight_cap, window=window)
    d = GradedMap.zero(tb.space, tb.space, 1)
    for i, c in enumerate(complexes):
        maps = [None] * len(complexes)
        maps[i] = c.d
        d = d + tensor_map(tb, maps, tb)
    return Complex(tb.space, d), tb


def braiding(X, Y):
    """The symmetry X (x) Y -> Y (x) X with sign (-1)^(pq)."""
    XY, tb = tensor_complex([X, Y])
    YX, tb2 = tensor_complex([Y, X])
    return shuffle_map(tb, (1, 0), tb2), XY, YX


class HomBasis:
    """Ordered basis of the inner hom complex hom(Y, Z).

    Degree-n basis vectors are elementary maps E(p, i, j): the map
    sending basis vector j of Y^p to basis vector i of Z^(p+n).
    Ordering within a degree: p ascending, then j, then i."""

    __slots__ = ("Y", "Z", "elems", "pos", "space")

    def __init__(self, Y, Z, window=None):
        self.Y = Y
        self.Z = Z
        elems = {}
        for p in Y.degrees():
            for q in Z.degrees():
                n = q - p
                if window is not None and not (window[0] <= n <= window[1]):
                    from .errors import TruncationExceeded
                    raise TruncationExceeded(
                        "inner hom content in degree %d outside window" % n)
                for j in range(Y.dims[p]):
                    for i in range(Z.dims[q]):
                        elems.setdefault(n, []).append((p, i, j))
        order = {}
        for n in elems:
            elems[n].sort(key=lambda t: (t[0], t[2], t[1]))
        self.elems = elems
        self.pos = {}
        dims, labels = {}, {}
        for n in sorted(elems):
            dims[n] = len(elems[n])
            lab = []
            for k, (p, i, j) in enumerate(elems[n]):
                self.pos[(n, p, i, j)] = k
                lab.append("[%s>%s]" % (Y.label(p, j), Z.label(p + n, i)))
            labels[n] = tuple(lab)
        self.space = GradedSpace(dims, labels)

    def index(self, n, p, i, j):
        return self.pos.get((n, p, i, j))

    def elements(self, n):
        return self.elems.get(n, [])

    def coords_of(self, f):
        """Column coordinates of a GradedMap Y -> Z in hom degree f.degree."""
        n = f.degree
        d = self.space.dim(n)
        ents = []
        for p, blk in f.blocks.items():
            for i, row in blk.rows.items():
                for j, x in row.items():
                    ents.append((self.pos[(n, p, i, j)], 0, x))
        return Mat.from_entries(d, 1, ents)

    def map_of(self, n, col):
        """Inverse of coords_of: hom-degree n column vector -> GradedMap."""
        ents = []
        for k, (p, i, j) in enumerate(self.elems.get(n, [])):
            x = col.entry(k, 0)
            if x != 0:
                ents.append((p, i, j, x))
        return GradedMap.from_entries(self.Y, self.Z, n,
                                      ((p, i, j, x) for p, i, j, x in ents))


def inner_hom(Y, Z, window=None):
    """Inner hom complex with d(f) = d_Z f - (-1)^|f| f d_Y.

    Returns (Complex, HomBasis)."""
    hb = HomBasis(Y.space, Z.space, window=window)
    entries = []
    for n in sorted(hb.elems):
        for k, (p, i, j) in enumerate(hb.elems[n]):
            # d_Z o E(p,i,j)
            blk = Z.d.blocks.get(p + n)
            if blk is not None:
                for r, row in blk.rows.items():
                    x = row.get(i)
                    if x:
                        t = hb.index(n + 1, p, r, j)
                        if t is not None:
                            entries.append((n, t, k, x))
            # -(-1)^n E(p,i,j) o d_Y : supported on Y^(p-1)
            blk = Y.d.blocks.get(p - 1)
            if blk is not None:
                row = blk.rows.get(j, {})
                sgn = 1 if n % 2 else -1
                for jj, x in row.items():
                    t = hb.index(n + 1, p - 1, i, jj)
                    if t is not None:
                        entries.append((n, t, k, sgn * x))
    d = GradedMap.from_entries(hb.space, hb.space, 1, entries)
    return Complex(hb.space, d), hb


def evaluation_map(hb, tb):
    """ev: hom(Y,Z) (x) Y -> Z on a TensorBasis([hom space, Y])."""
    entries = []
    for n, es in tb.elems.items():
        for spos, ((hn, p), (k, j2)) in ((s, (dg, ix)) for s, (dg, ix) in
                                         enumerate(es)):
            pe, i, j = hb.elems[hn][k]
            if pe == p and j == j2:
                entries.append((n, i, spos, 1))
    return GradedMap.from_entries(tb.space, hb.Z, 0, entries)


def cohomology(X):
    """Cohomology as a GradedSpace (dimensions only)."""
    dims = {}
    for n in X.space.degrees():
        z = X.d.block(n).kernel_basis().ncols
        b = X.d.block(n - 1).rank()
        if z - b > 0:
            dims[n] = z - b
    return GradedSpace(dims)


def is_quasi_iso(f, X, Y):
    """True iff the degree-0 chain map f induces isomorphisms on H^n."""
    if f.degree != 0:
        raise DimensionError("quasi-iso test needs degree 0")
    for n in set(X.space.degrees()) | set(Y.space.degrees()):
        BX = X.d.block(n).kernel_basis()
        BY = Y.d.block(n).kernel_basis()
        IX = X.d.block(n - 1).column_space_basis()
        IY = Y.d.block(n - 1).column_space_basis()
        hx = BX.ncols - IX.ncols
        hy = BY.ncols - IY.ncols
        if hx != hy:
            return False
        if hx == 0:
            continue
        fB = f.block(n) @ BX
        # coordinates of cycles in the cycle basis of Y
        c = BY.solve(fB)
        if c is None:
            return False
        cI = BY.solve(IY)
        # induced map on H^n: quotient coordinates
        amb = GradedSpace({0: BY.ncols})
        from .graded import Subspace, quotient as gquot
        sub = Subspace(amb, {0: cI.transpose()})
        q, proj, _ = gquot(amb, sub)
        induced = proj.block(0) @ c
        # kill the image part of the source coordinates too
        ambx = GradedSpace({0: BX.ncols})
        cIX = BX.solve(IX)
        subx = Subspace(ambx, {0: cIX.transpose()})
        qx, projx, secx = gquot(ambx, subx)
        hmat = induced @ secx.block(0)
        if hmat.rank() != hx:
            return False
    return True


def cone(f, X, Y):
    """Mapping cone of a degree-0 chain map f: X -> Y.

    cone^n = X^(n+1) + Y^n with d(x, y) = (-dx, f x + dy).
    Returns (Complex, inclusion: Y -> cone, projection: cone -> X[1],
    and the two bookkeeping maps as GradedMaps)."""
    if f.degree != 0:
        raise DimensionError("cone needs a degree-0 map")
    sh = X.space.shifted(1)
    total, (i1, i2), (p1, p2) = direct_sum([sh, Y.space])
    dX1 = GradedMap(sh, sh, 1,
                    {n - 1: b for n, b in X.d.blocks.items()}).scale(-1)
    f1 = GradedMap(sh, Y.space, 1, {n - 1: b for n, b in f.blocks.items()})
    d = i1 @ dX1 @ p1 + i2 @ f1 @ p1 + i2 @ Y.d @ p2
    C = Complex(total, d)
    return C, i2, p1


def null_homotopy(f, X, Y):
    """Find h with [d, h] = f, i.e. d h - (-1)^|h| h d = f; None if none.

    h has degree |f| - 1."""
    hdeg = f.degree - 1
    s = MapSolver()
    k = s.add_unknown(X.space, Y.space, hdeg)
    sign = -1 if hdeg % 2 else 1
    s.add_constraint([(1, Y.d, k, None), (-sign, None, k, X.d)], f)
    sol = s.solve()
    if sol is None:
        return None
    return sol[0]


def check_degreewise_exact(i, p, Xp, X, Xpp):
    """X' -> X -> X'' degreewise short exact; raises NotExact."""
    for n in set(Xp.space.degrees()) | set(X.space.degrees()) \
            | set(Xpp.space.degrees()):
        if Xp.space.dim(n) + Xpp.space.dim(n) != X.space.dim(n):
            raise NotExact("dimension count fails in degree %d" % n)
        if i.block(n).kernel_basis().ncols != 0:
            raise NotExact("first map not injective in degree %d" % n)
        if p.block(n).rank() != Xpp.space.dim(n):
            raise NotExact("second map not surjective in degree %d" % n)
        if not (p.block(n) @ i.block(n)).is_zero():
            raise NotExact("composite nonzero in degree %d" % n)


def extension_class(i, p, Xp, X, Xpp, section=None):
    """Extension class of a degreewise-split SES, as a degree-0 chain
    map X'' -> X'[1] (returned as a GradedMap with shifted target).

    Built from a degreewise section s of p: the defect d_X s - s d_X''
    lands in X' and is corestricted there."""
    check_degreewise_exact(i, p, Xp, X, Xpp)
    s = section if section is not None else map_solve(p, GradedMap.identity(Xpp.space))
    if s is None or not (p @ s - GradedMap.identity(Xpp.space)).is_zero():
        raise NotExact("no degreewise section")
    defect = X.d @ s - s @ Xpp.d
    beta = map_solve(i, defect)
    if beta is None:
        raise NotExact("section defect does not land in the sub")
    return reinterpret_shift(beta, 1)
