"""Finite-support graded vector spaces and degree-homogeneous maps.

A GradedSpace is a finite family of finite-dimensional rational spaces
indexed by integer degrees, with ordered basis labels and an optional
integer weight attached to every basis vector (used downstream for the
weight grading of free algebras; weight 0 when irrelevant).

A GradedMap of degree d sends degree n to degree n+d and stores one
sparse matrix per degree.  No signs live at this level; sign conventions
are owned by the complexes layer.
"""

from fractions import Fraction

from .errors import DimensionError
from .linalg import Mat, frac


class GradedSpace:

    __slots__ = ("dims", "_labels", "weights")

    def __init__(self, dims, labels=None, weights=None):
        self.dims = {n: d for n, d in dims.items() if d > 0}
        if labels is None:
            self._labels = None  # generated lazily, cosmetic only
        else:
            self._labels = {n: tuple(labels[n]) for n in self.dims}
            for n, d in self.dims.items():
                if len(self._labels[n]) != d:
                    raise DimensionError(
                        "label length mismatch in degree %d" % n)
        if weights is None:
            weights = {n: (0,) * d for n, d in self.dims.items()}
        self.weights = {n: tuple(weights[n]) for n in self.dims}
        for n, d in self.dims.items():
            if len(self.weights[n]) != d:
                raise DimensionError(
                    "weight length mismatch in degree %d" % n)

    @property
    def labels(self):
        if self._labels is None:
            self._labels = {n: tuple("e%d.%d" % (n, i) for i in range(d))
                            for n, d in self.dims.items()}
        return self._labels

    @staticmethod
    def zero():
        return GradedSpace({})

    @staticmethod
    def line(degree=0, label="1", weight=0):
        return GradedSpace({degree: 1}, {degree: (label,)}, {degree: (weight,)})

    def dim(self, n):
        return self.dims.get(n, 0)

    def total_dim(self):
        return sum(self.dims.values())

    def degrees(self):
        return sorted(self.dims)

    def basis(self):
        for n in self.degrees():
            for i in range(self.dims[n]):
                yield (n, i)

    def label(self, n, i):
        return self.labels[n][i]

    def weight(self, n, i):
        return self.weights[n][i]

    def max_weight(self):
        return max((w for ws in self.weights.values() for w in ws), default=0)

    def same_dims(self, other):
        return self.dims == other.dims

    def __eq__(self, other):
        if not isinstance(other, GradedSpace):
            return NotImplemented
        return (self.dims == other.dims and self.labels == other.labels
                and self.weights == other.weights)

    def __repr__(self):
        return "GradedSpace(%s)" % {n: self.dims[n] for n in self.degrees()}

    def shifted(self, k, sep="s"):
        """Degree n content moves to degree n-k (so X[1]^n = X^{n+1})."""
        if k == 0:
            return self
        tag = "%s%+d:" % (sep, k)
        return GradedSpace(
            {n - k: d for n, d in self.dims.items()},
            {n - k: tuple(tag + l for l in self.labels[n]) for n in self.dims},
            {n - k: self.weights[n] for n in self.dims})

    def dual(self):
        return GradedSpace(
            {-n: d for n, d in self.dims.items()},
            {-n: tuple(l + "*" for l in self.labels[n]) for n in self.dims},
            {-n: self.weights[n] for n in self.dims})


def direct_sum(spaces):
    """Returns (sum_space, inclusions, projections)."""
    dims, labels, weights = {}, {}, {}
    offsets = []
    for k, sp in enumerate(spaces):
        offs = {}
        for n, d in sp.dims.items():
            offs[n] = dims.get(n, 0)
            dims[n] = dims.get(n, 0) + d
            labels.setdefault(n, [])
            labels[n].extend("#%d:%s" % (k, l) for l in sp.labels[n])
            weights.setdefault(n, [])
            weights[n].extend(sp.weights[n])
        offsets.append(offs)
    total = GradedSpace(dims, {n: tuple(v) for n, v in labels.items()},
                        {n: tuple(v) for n, v in weights.items()})
    incs, projs = [], []
    for k, sp in enumerate(spaces):
        iblocks, pblocks = {}, {}
        for n, d in sp.dims.items():
            off = offsets[k][n]
            iblocks[n] = Mat.from_entries(
                total.dim(n), d, ((off + i, i, 1) for i in range(d)))
            pblocks[n] = Mat.from_entries(
                d, total.dim(n), ((i, off + i, 1) for i in range(d)))
        incs.append(GradedMap(sp, total, 0, iblocks))
        projs.append(GradedMap(total, sp, 0, pblocks))
    return total, incs, projs


class GradedMap:

    __slots__ = ("source", "target", "degree", "blocks")

    def __init__(self, source, target, degree, blocks=None):
        self.source = source
        self.target = target
        self.degree = degree
        clean = {}
        if blocks:
            for n, m in blocks.items():
                sd = source.dim(n)
                td = target.dim(n + degree)
                if (m.nrows, m.ncols) != (td, sd):
                    raise DimensionError(
                        "block %d is %dx%d, expected %dx%d"
                        % (n, m.nrows, m.ncols, td, sd))
                if not m.is_zero():
                    clean[n] = m
        self.blocks = clean

    @staticmethod
    def zero(source, target, degree=0):
        return GradedMap(source, target, degree)

    @staticmethod
    def identity(space):
        return GradedMap(space, space, 0,
                         {n: Mat.identity(d) for n, d in space.dims.items()})

    @staticmethod
    def from_entries(source, target, degree, entries):
        """entries: iterable of (src_degree, tgt_index, src_index, value)."""
        per = {}
        for n, i, j, x in entries:
            per.setdefault(n, []).append((i, j, x))
        blocks = {n: Mat.from_entries(target.dim(n + degree), source.dim(n), es)
                  for n, es in per.items()}
        return GradedMap(source, target, degree, blocks)

    def block(self, n):
        b = self.blocks.get(n)
        if b is None:
            return Mat.zero(self.target.dim(n + self.degree), self.source.dim(n))
        return b

    def is_zero(self):
        return not self.blocks

    def __eq__(self, other):
        if not isinstance(other, GradedMap):
            return NotImplemented
        if self.degree != other.degree:
            return False
        if not (self.source.same_dims(other.source)
                and self.target.same_dims(other.target)):
            return False
        for n in set(self.blocks) | set(other.blocks):
            if self.block(n) != other.block(n):
                return False
        return True

    def __matmul__(self, other):
        """self after other."""
        if not self.source.same_dims(other.target):
            raise DimensionError("compose: middle spaces differ")
        blocks = {}
        for n in other.blocks:
            b = self.block(n + other.degree) @ other.block(n)
            if not b.is_zero():
                blocks[n] = b
        return GradedMap(other.source, self.target,
                         self.degree + other.degree, blocks)

    def __add__(self, other):
        if self.degree != other.degree:
            raise DimensionError("add: degrees differ")
        if not (self.source.same_dims(other.source)
                and self.target.same_dims(other.target)):
            raise DimensionError("add: spaces differ")
        blocks = {}
        for n in set(self.blocks) | set(other.blocks):
            b = self.block(n) + other.block(n)
            if not b.is_zero():
                blocks[n] = b
        return GradedMap(self.source, self.target, self.degree, blocks)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = frac(c)
        if c == 0:
            return GradedMap(self.source, self.target, self.degree)
        return GradedMap(self.source, self.target, self.degree,
                         {n: b.scale(c) for n, b in self.blocks.items()})

    def with_spaces(self, source=None, target=None):
        """Reinterpret the same blocks between dimension-equal spaces."""
        src = source if source is not None else self.source
        tgt = target if target is not None else self.target
        return GradedMap(src, tgt, self.degree, self.blocks)

    def entry(self, n, i, j):
        return self.block(n).entry(i, j)

    def __repr__(self):
        return "GradedMap(deg=%d, blocks=%s)" % (
            self.degree, sorted(self.blocks))


class Subspace:
    """Subspace of a GradedSpace, one canonical RREF row basis per degree."""

    __slots__ = ("ambient", "rows")

    def __init__(self, ambient, rows=None):
        self.ambient = ambient
        self.rows = {}
        if rows:
            for n, m in rows.items():
                if m.ncols != ambient.dim(n):
                    raise DimensionError("subspace generators in degree %d" % n)
                r = m.row_space()
                if r.nrows:
                    self.rows[n] = r

    def dim(self, n):
        return self.rows[n].nrows if n in self.rows else 0

    def dims(self):
        return {n: m.nrows for n, m in self.rows.items()}

    def total_dim(self):
        return sum(m.nrows for m in self.rows.values())

    def contains_vector(self, n, col):
        """col: Mat dim(n) x 1."""
        m = self.rows.get(n)
        if m is None:
            return col.is_zero()
        stacked = Mat(m.nrows + 1, m.ncols)
        for i, r in m.rows.items():
            stacked.rows[i] = dict(r)
        last = {j: x for j, x in
                ((i, col.entry(i, 0)) for i in range(col.nrows)) if x != 0}
        if last:
            stacked.rows[m.nrows] = last
        return stacked.rank() == m.nrows

    def add(self, other):
        assert self.ambient.same_dims(other.ambient)
        rows = {}
        for n in set(self.rows) | set(other.rows):
            a = self.rows.get(n)
            b = other.rows.get(n)
            if a is None:
                rows[n] = b
            elif b is None:
                rows[n] = a
            else:
                m = Mat(a.nrows + b.nrows, a.ncols)
                for i, r in a.rows.items():
                    m.rows[i] = dict(r)
                for i, r in b.rows.items():
                    m.rows[a.nrows + i] = dict(r)
                rows[n] = m
        return Subspace(self.ambient, rows)


def kernel(f):
    """Kernel of a GradedMap, as a Subspace of its source."""
    rows = {}
    for n in f.source.degrees():
        kb = f.block(n).kernel_basis()
        if kb.ncols:
            rows[n] = kb.transpose()
    return Subspace(f.source, rows)


def image(f):
    """Image of a GradedMap, as a Subspace of its target."""
    rows = {}
    for n in f.source.degrees():
        b = f.blocks.get(n)
        if b is not None:
            rows.setdefault(n + f.degree, []).append(b)
    out = {}
    for m, bs in rows.items():
        total = sum(b.ncols for b in bs)
        stk = Mat(total, f.target.dim(m))
        off = 0
        for b in bs:
            t = b.transpose()
            for i, r in t.rows.items():
                stk.rows[off + i] = dict(r)
            off += b.ncols
        out[m] = stk
    return Subspace(f.target, out)


def quotient(ambient, sub, tag="q"):
    """Quotient of a GradedSpace by a Subspace.

    Returns (space, projection, section) with projection @ section = id.
    The quotient basis is the set of non-pivot ambient coordinates, so
    labels and weights are inherited from the ambient."""
    dims, labels, weights = {}, {}, {}
    pblocks, sblocks = {}, {}
    for n in ambient.degrees():
        d = ambient.dim(n)
        R = sub.rows.get(n, Mat(0, d))
        Rc, pv = R.rref()
        pivot_set = set(pv)
        free = [j for j in range(d) if j not in pivot_set]
        if not free:
            continue
        dims[n] = len(free)
        labels[n] = tuple(tag + ":" + ambient.labels[n][j] for j in free)
        weights[n] = tuple(ambient.weights[n][j] for j in free)
        # projection: v - sum_r v_{p_r} R_r, restricted to free coords
        pent = []
        for k, f in enumerate(free):
            pent.append((k, f, 1))
        for r, p in enumerate(pv):
            row = Rc.rows.get(r, {})
            for k, f in enumerate(free):
                x = row.get(f)
                if x:
                    pent.append((k, p, -x))
        pblocks[n] = Mat.from_entries(len(free), d, pent)
        sblocks[n] = Mat.from_entries(
            d, len(free), ((f, k, 1) for k, f in enumerate(free)))
    q = GradedSpace(dims, labels, weights)
    proj = GradedMap(ambient, q, 0, pblocks)
    sec = GradedMap(q, ambient, 0, sblocks)
    return q, proj, sec


def map_solve(f, y):
    """Solve f @ x = y for a GradedMap x; None if unsolvable.

    Deterministic: per-degree echelon solve with free variables zero."""
    if not f.target.same_dims(y.target):
        raise DimensionError("map_solve: targets differ")
    xdeg = y.degree - f.degree
    blocks = {}
    for n in y.source.degrees():
        rhs = y.block(n)
        lhs = f.block(n + xdeg)
        sol = lhs.solve(rhs)
        if sol is None:
            return None
        if not sol.is_zero():
            blocks[n] = sol
    return GradedMap(y.source, f.source, xdeg, blocks)


class MapSolver:
    """Affine-linear systems in unknown graded maps.

    Unknowns are GradedMaps U_k with fixed (source, target, degree).
    Each constraint states  sum_t coef_t * A_t @ U_{k_t} @ B_t = rhs
    where A_t, B_t are known GradedMaps (None meaning identity).  The
    assembled sparse system is solved exactly; free variables are set
    to zero, so solutions are deterministic."""

    def __init__(self):
        self.unknowns = []
        self.constraints = []

    def add_unknown(self, source, target, degree):
        self.unknowns.append((source, target, degree))
        return len(self.unknowns) - 1

    def add_constraint(self, terms, rhs):
        """terms: list of (coef, A, k, B); rhs: GradedMap."""
        self.constraints.append((terms, rhs))

    def _var_layout(self):
        index = {}
        count = 0
        for k, (src, tgt, deg) in enumerate(self.unknowns):
            for n in src.degrees():
                td = tgt.dim(n + deg)
                sd = src.dim(n)
                for i in range(td):
                    for j in range(sd):
                        index[(k, n, i, j)] = count
                        count += 1
        return index, count

    def _assemble(self):
        index, nvars = self._var_layout()
        rowmap = {}

        def row_for(key):
            if key not in rowmap:
                rowmap[key] = ({}, [0])
            return rowmap[key]

        for cid, (terms, rhs) in enumerate(self.constraints):
            for n in rhs.source.degrees():
                b = rhs.blocks.get(n)
                if b is None:
                    continue
                for i, r in b.rows.items():
                    for j, x in r.items():
                        row_for((cid, n, i, j))[1][0] += x
            for coef, A, k, B in terms:
                coef = frac(coef)
                usrc, utgt, udeg = self.unknowns[k]
                bdeg = 0 if B is None else B.degree
                for n in rhs.source.degrees():
                    m = n + bdeg
                    if usrc.dim(m) == 0:
                        continue
                    Bb = None if B is None else B.blocks.get(n)
                    if B is not None and Bb is None:
                        continue
                    Ab = None if A is None else A.blocks.get(m + udeg)
                    if A is not None and Ab is None:
                        continue
                    td = utgt.dim(m + udeg)
                    sd = usrc.dim(m)
                    if A is None:
                        Aitems = [(i, i, 1) for i in range(td)]
                    else:
                        Aitems = [(r, i, x) for r, row in Ab.rows.items()
                                  for i, x in row.items()]
                    if B is None:
                        Bitems = [(j, j, 1) for j in range(sd)]
                    else:
                        Bitems = [(j, c, x) for j, row in Bb.rows.items()
                                  for c, x in row.items()]
                    for (r, i, a) in Aitems:
                        ca = coef * a
                        for (j, c, bb) in Bitems:
                            cells, _ = row_for((cid, n, r, c))
                            col = index[(k, m, i, j)]
                            v = cells.get(col, 0) + ca * bb
                            if v == 0:
                                cells.pop(col, None)
                            else:
                                cells[col] = v
        keys = sorted(rowmap)
        nrows = len(keys)
        Asys = Mat(nrows, nvars)
        bsys = Mat(nrows, 1)
        for ridx, key in enumerate(keys):
            cells, rhsval = rowmap[key]
            if cells:
                Asys.rows[ridx] = dict(cells)
            if rhsval[0] != 0:
                bsys.rows[ridx] = {0: rhsval[0]}
        return Asys, bsys, index, nvars

    def solve(self):
        """Particular solution as a list of GradedMaps, or None."""
        Asys, bsys, index, nvars = self._assemble()
        x = Asys.solve(bsys)
        if x is None:
            return None
        return self._unpack(x, index)

    def solve_with_nullity(self):
        """(solution-or-None, dimension of the homogeneous solution space)."""
        Asys, bsys, index, nvars = self._assemble()
        x = Asys.solve(bsys)
        nullity = nvars - Asys.rank()
        if x is None:
            return None, nullity
        return self._unpack(x, index), nullity

    def _unpack(self, x, index):
        out = []
        for k, (src, tgt, deg) in enumerate(self.unknowns):
            blocks = {}
            for n in src.degrees():
                td = tgt.dim(n + deg)
                sd = src.dim(n)
                ents = []
                for i in range(td):
                    for j in range(sd):
                        v = x.entry(index[(k, n, i, j)], 0)
                        if v != 0:
                            ents.append((i, j, v))
                if ents:
                    blocks[n] = Mat.from_entries(td, sd, ents)
            out.append(GradedMap(src, tgt, deg, blocks))
        return out
