"""Sparse exact matrices over the rationals.

A Mat stores only nonzero entries, as a dict of rows, each row a dict
column -> Fraction.  All elimination is plain Gauss-Jordan over Fraction
with a fixed deterministic pivot rule (columns scanned left to right,
first row with a nonzero entry wins), so echelon forms, kernels and
solve outputs are reproducible across runs.
"""

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x):
    """Coerce ints, strings like '2/3' and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def num(x):
    """Normalize an exact scalar for storage: plain ints stay ints (fast
    arithmetic), integral Fractions collapse to int, everything else
    becomes Fraction.  Mixed int/Fraction arithmetic is exact either way."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    f = Fraction(x)
    return int(f) if f.denominator == 1 else f


class Mat:

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows, ncols, rows=None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows if rows is not None else {}

    @staticmethod
    def zero(nrows, ncols):
        return Mat(nrows, ncols)

    @staticmethod
    def identity(n):
        return Mat(n, n, {i: {i: 1} for i in range(n)})

    @staticmethod
    def from_rows(dense):
        """Build from a dense list of row lists (ints/strings/Fractions)."""
        nrows = len(dense)
        ncols = len(dense[0]) if dense else 0
        rows = {}
        for i, row in enumerate(dense):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            r = {j: num(x) for j, x in enumerate(row) if num(x) != 0}
            if r:
                rows[i] = r
        return Mat(nrows, ncols, rows)

    @staticmethod
    def from_entries(nrows, ncols, entries):
        """entries: iterable of (i, j, value)."""
        rows = {}
        for i, j, x in entries:
            x = num(x)
            if x == 0:
                continue
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError((i, j))
            row = rows.setdefault(i, {})
            v = row.get(j, 0) + x
            if v == 0:
                row.pop(j, None)
            else:
                row[j] = v
        return Mat(nrows, ncols, {i: r for i, r in rows.items() if r})

    @staticmethod
    def column(entries_len, entries):
        """Single-column matrix from a dense list or dict idx->value."""
        if isinstance(entries, dict):
            items = entries.items()
        else:
            items = enumerate(entries)
        return Mat.from_entries(entries_len, 1, ((i, 0, x) for i, x in items))

    def entry(self, i, j):
        return self.rows.get(i, {}).get(j, 0)

    def is_zero(self):
        return not any(self.rows.values())

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        keys = set(self.rows) | set(other.rows)
        for i in keys:
            if self.rows.get(i, {}) != other.rows.get(i, {}):
                return False
        return True

    def __hash__(self):
        raise TypeError("Mat is not hashable")

    def copy(self):
        return Mat(self.nrows, self.ncols,
                   {i: dict(r) for i, r in self.rows.items()})

    def __add__(self, other):
        self._same_shape(other)
        rows = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            tr = rows.setdefault(i, {})
            for j, x in r.items():
                v = tr.get(j, 0) + x
                if v == 0:
                    tr.pop(j, None)
                else:
                    tr[j] = v
            if not tr:
                del rows[i]
        return Mat(self.nrows, self.ncols, rows)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = num(c)
        if c == 0:
            return Mat(self.nrows, self.ncols)
        return Mat(self.nrows, self.ncols,
                   {i: {j: c * x for j, x in r.items()}
                    for i, r in self.rows.items()})

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError(
                "shape mismatch %sx%s @ %sx%s" %
                (self.nrows, self.ncols, other.nrows, other.ncols))
        rows = {}
        orows = other.rows
        for i, r in self.rows.items():
            acc = {}
            for k, x in r.items():
                orow = orows.get(k)
                if not orow:
                    continue
                for j, y in orow.items():
                    v = acc.get(j, 0) + x * y
                    if v == 0:
                        acc.pop(j, None)
                    else:
                        acc[j] = v
            if acc:
                rows[i] = acc
        return Mat(self.nrows, other.ncols, rows)

    def transpose(self):
        rows = {}
        for i, r in self.rows.items():
            for j, x in r.items():
                rows.setdefault(j, {})[i] = x
        return Mat(self.ncols, self.nrows, rows)

    def to_dense(self):
        return [[self.entry(i, j) for j in range(self.ncols)]
                for i in range(self.nrows)]

    def __repr__(self):
        if self.nrows * self.ncols <= 64:
            return "Mat(%s)" % self.to_dense()
        return "Mat(%dx%d, %d nz)" % (
            self.nrows, self.ncols,
            sum(len(r) for r in self.rows.values()))

    def _same_shape(self, other):
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")

    # -- elimination ----------------------------------------------------

    def rref(self):
        """Reduced row echelon form.  Returns (R, pivots) with pivots the
        ordered list of pivot column indices."""
        rows = [dict(r) for r in
                (self.rows.get(i, {}) for i in range(self.nrows))]
        pivots = []
        cur = 0
        for col in range(self.ncols):
            piv = None
            for i in range(cur, self.nrows):
                if rows[i].get(col, 0) != 0:
                    piv = i
                    break
            if piv is None:
                continue
            rows[cur], rows[piv] = rows[piv], rows[cur]
            prow = rows[cur]
            pv = prow[col]
            inv = Fraction(1, pv) if isinstance(pv, int) else 1 / pv
            if inv != 1:
                for j in list(prow):
                    prow[j] *= inv
            for i in range(self.nrows):
                if i == cur:
                    continue
                c = rows[i].get(col, 0)
                if c == 0:
                    continue
                ri = rows[i]
                for j, x in prow.items():
                    v = ri.get(j, 0) - c * x
                    if v == 0:
                        ri.pop(j, None)
                    else:
                        ri[j] = v
            pivots.append(col)
            cur += 1
            if cur == self.nrows:
                break
        R = Mat(self.nrows, self.ncols,
                {i: r for i, r in enumerate(rows) if r})
        return R, pivots

    def rank(self):
        return len(self.rref()[1])

    def kernel_basis(self):
        """Matrix whose columns span ker(self), one column per free
        variable, in increasing column order; free variable set to 1."""
        R, pivots = self.rref()
        pivot_set = set(pivots)
        free = [j for j in range(self.ncols) if j not in pivot_set]
        cols = []
        for f in free:
            vec = {f: ONE}
            for r, p in enumerate(pivots):
                c = R.entry(r, f)
                if c != 0:
                    vec[p] = -c
            cols.append(vec)
        rows = {}
        for k, vec in enumerate(cols):
            for i, x in vec.items():
                rows.setdefault(i, {})[k] = x
        return Mat(self.ncols, len(cols), rows)

    def column_space_basis(self):
        """Matrix of the pivot columns of self (deterministic image basis)."""
        _, pivots = self.rref()
        rows = {}
        for i, r in self.rows.items():
            for k, j in enumerate(pivots):
                x = r.get(j, 0)
                if x != 0:
                    rows.setdefault(i, {})[k] = x
        return Mat(self.nrows, len(pivots), rows)

    def row_space(self):
        """Canonical RREF basis of the row space, zero rows dropped."""
        R, pivots = self.rref()
        k = len(pivots)
        return Mat(k, self.ncols, {i: R.rows[i] for i in range(k) if i in R.rows})

    def solve(self, b):
        """Solve self @ x = b columnwise; free variables set to zero.
        Returns x (ncols x b.ncols) or None if any column is unsolvable."""
        if b.nrows != self.nrows:
            raise ValueError("rhs shape mismatch")
        aug = Mat(self.nrows, self.ncols + b.ncols)
        for i, r in self.rows.items():
            aug.rows[i] = dict(r)
        for i, r in b.rows.items():
            tr = aug.rows.setdefault(i, {})
            for j, x in r.items():
                tr[self.ncols + j] = x
        R, pivots = aug.rref()
        # pivot in the augmented part means inconsistency
        for p in pivots:
            if p >= self.ncols:
                return None
        xrows = {}
        for r, p in enumerate(pivots):
            row = R.rows.get(r, {})
            for j, x in row.items():
                if j >= self.ncols and x != 0:
                    xrows.setdefault(p, {})[j - self.ncols] = x
        return Mat(self.ncols, b.ncols, xrows)
