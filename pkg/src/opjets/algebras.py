"""Algebras over an operad.

Free algebras carry a mandatory weight grading: the weight-n piece of
F_O(V) is the S_n-coinvariant quotient of O(n) (x) V^(x)n, with V placed
in weight 1.  All structure maps are additive in weight, so truncating
at a weight cap is an exact quotient and every diagram check below is
exact within the caps.

The tensor algebra T(A) and its maximal quotient U(A) (the enveloping
monoid) are graded by the total weight of the A-factors; truncation by
arity and weight is again a two-sided ideal, so the truncated objects
are honest monoids.
"""

from itertools import product as iproduct

from .complexes import Complex, is_chain_map, tensor_complex
from .errors import (DimensionError, IllDefinedQuotient,
                     TruncationExceeded)
from .graded import (GradedMap, GradedSpace, Subspace, direct_sum,
                     quotient)
from .linalg import Mat
from .operads import AxiomReport, compositions
from .permutations import Perm
from .tensors import TensorBasis, shuffle_map, tensor_map, \
    grouped_tensor_map


# -- column utilities ---------------------------------------------------

def apply_cols(f, n, col):
    """Apply one degree block of a GradedMap to a column dict."""
    out = {}
    blk = f.blocks.get(n)
    if blk is not None:
        for i, row in blk.rows.items():
            v = 0
            for j, x in row.items():
                c = col.get(j)
                if c:
                    v = v + x * c
            if v:
                out[i] = v
    return n + f.degree, out


def unit_tensor_iso(space, tbu, slot=1):
    """The isomorphism X -> 1 (x) X (or X (x) 1 for slot=0) onto the
    tensor basis tbu whose other factor is a weight-0 line in degree 0."""
    ents = []
    for n, d in space.dims.items():
        for j in range(d):
            key = ((0, n), (0, j)) if slot == 1 else ((n, 0), (j, 0))
            loc = tbu.index(*key)
            if loc is not None:
                ents.append((n, loc[1], j, 1))
    return GradedMap.from_entries(space, tbu.space, 0, ents)


def quotient_complex(X, sub, tag="q"):
    """Quotient of a complex by a d-stable subspace; raises if the
    differential does not descend."""
    q, proj, sec = quotient(X.space, sub, tag)
    dq = (proj @ X.d @ sec).with_spaces(q, q)
    if proj @ X.d != dq @ proj:
        raise IllDefinedQuotient("differential does not descend")
    return Complex(q, dq), proj, sec


def coinvariants(X, gens, tag="c"):
    """Coinvariant quotient of X by a group action given on generators.

    Divides by the span of x - x.g over all basis vectors x and
    generators g.  Returns (Complex, projection, section)."""
    per_deg = {}
    for g in gens:
        diff = GradedMap.identity(X.space) - g
        for n, m in diff.blocks.items():
            per_deg.setdefault(n, []).append(m.transpose())
    rows = {}
    for n, mats in per_deg.items():
        ents = []
        r0 = 0
        for m in mats:
            for i, row in m.rows.items():
                for j, x in row.items():
                    ents.append((r0 + i, j, x))
            r0 += m.nrows
        rows[n] = Mat.from_entries(r0, X.space.dim(n), ents)
    return quotient_complex(X, Subspace(X.space, rows), tag)


class SummandSum:
    """Direct sum of coinvariant quotients of tensor complexes, with
    bookkeeping to move vectors between the total space, the summands,
    and the ambient tensor bases."""

    def __init__(self, pieces, tag="t"):
        # pieces: list of (ambient Complex, TensorBasis, proj, sec,
        # quotient Complex)
        self.pieces = pieces
        total, incs, projs = direct_sum([p[4].space for p in pieces])
        self.incs = incs
        self.projs = projs
        d = GradedMap.zero(total, total, 1)
        for s, p in enumerate(pieces):
            d = d + incs[s] @ p[4].d @ projs[s]
        self.total = Complex(total, d)
        self.locate = {}
        for s, inc in enumerate(incs):
            for n, blk in inc.blocks.items():
                for gi, row in blk.rows.items():
                    for li in row:
                        self.locate[(n, gi)] = (s, li)

    def tb(self, s):
        return self.pieces[s][1]

    def lift(self, n, gidx):
        """Section of a total-space basis vector, decomposed in the
        ambient tensor basis of its summand.  Returns (s, terms) with
        terms a list of ((degs, idxs), value)."""
        s, li = self.locate[(n, gidx)]
        sec = self.pieces[s][3]
        tb = self.pieces[s][1]
        terms = []
        blk = sec.blocks.get(n)
        if blk is not None:
            for i, row in blk.rows.items():
                x = row.get(li)
                if x:
                    terms.append((tb.elems[n][i], x))
        return s, terms

    def push(self, s, n, col):
        """Project an ambient column of summand s into the total space."""
        _, c = apply_cols(self.pieces[s][2], n, col)
        out = {}
        blk = self.incs[s].blocks.get(n)
        if blk is not None and c:
            for gi, row in blk.rows.items():
                for li in row:
                    if li in c:
                        out[gi] = c[li]
        return out


# -- algebras over an operad --------------------------------------------

class OperadAlgebra:
    """Carrier complex with multiplications mu_n: O(n) (x) A^(x)n -> A."""

    def __init__(self, operad, carrier, mults, weight_cap=None):
        self.operad = operad
        self.carrier = carrier
        self.mults = dict(mults)
        self.weight_cap = weight_cap
        self._sources = {}

    def mult_source(self, n):
        if n not in self._sources:
            self._sources[n] = tensor_complex(
                [self.operad.component(n)] + [self.carrier] * n,
                weight_cap=self.weight_cap)
        return self._sources[n]

    def mult_tb(self, n):
        return self.mult_source(n)[1]

    def mult(self, n):
        return self.mults[n]

    def max_arity(self):
        return max(self.mults)

    def weight_dims(self):
        """Total dimension per weight, summed over degrees."""
        out = {}
        for n, ws in self.carrier.space.weights.items():
            for w in ws:
                out[w] = out.get(w, 0) + 1
        return out


class FreeAlgebra(OperadAlgebra):
    """Free algebra over a complex of generators, built weightwise."""

    def __init__(self, operad, gens, weight_cap, sum_data, gen_map):
        self.gens = gens
        self.sum = sum_data
        self.gen_map = gen_map  # generators -> carrier, lands in weight 1
        super().__init__(operad, sum_data.total, {}, weight_cap)
        for k in range(operad.arity_cap + 1):
            self.mults[k] = self._build_mult(k)

    def _build_mult(self, k):
        O = self.operad
        tb = self.mult_tb(k)
        S = self.sum
        ents = []
        for sn, es in tb.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                lifts = []
                ns = []
                for i in range(1, k + 1):
                    s, terms = S.lift(degs[i], idxs[i])
                    ns.append(s)
                    lifts.append(terms)
                ns = tuple(ns)
                N = sum(ns)
                g = O.gamma(k, ns)
                gtb = O.gamma_tb(k, ns)
                for combo in iproduct(*lifts):
                    val = 1
                    sign = 1
                    vacc = 0
                    ods, oidxs, vdegs, vidxs = [], [], [], []
                    for (tdegs, tidxs), x in combo:
                        val = val * x
                        if tdegs[0] % 2 and vacc % 2:
                            sign = -sign
                        ods.append(tdegs[0])
                        oidxs.append(tidxs[0])
                        vdegs.extend(tdegs[1:])
                        vidxs.extend(tidxs[1:])
                        vacc += sum(tdegs[1:])
                    loc = gtb.index((degs[0],) + tuple(ods),
                                    (idxs[0],) + tuple(oidxs))
                    if loc is None:
                        continue
                    gn, gp = loc
                    blk = g.blocks.get(gn)
                    if blk is None:
                        continue
                    ttb = S.tb(N)
                    for r, row in blk.rows.items():
                        gx = row.get(gp)
                        if not gx:
                            continue
                        tloc = ttb.index((gn,) + tuple(vdegs),
                                         (r,) + tuple(vidxs))
                        if tloc is None:
                            continue
                        tn, tpos = tloc
                        out = S.push(N, tn, {tpos: sign * val * gx})
                        for gi, v in out.items():
                            ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(tb.space, self.carrier.space, 0,
                                      ents)


def _reweight(X, w):
    """Same complex with every basis vector assigned weight w."""
    sp = GradedSpace(X.space.dims, None,
                     {n: (w,) * d for n, d in X.space.dims.items()})
    return Complex(sp, X.d.with_spaces(sp, sp))


def _symmetric_gens(O, arity, tb, first_slot=1, n_letters=None):
    """Generators of the S_n action on O(arity) (x) (factors), acting on
    the operad part through the right action and permuting the n_letters
    factors starting at first_slot."""
    n = n_letters if n_letters is not None else arity
    k = len(tb.factors)
    gens = []
    for i in range(1, n):
        perm = list(range(k))
        perm[first_slot + i - 1] = first_slot + i
        perm[first_slot + i] = first_slot + i - 1
        act = tensor_map(
            tb, [O.gen_action(arity, i)] + [None] * (k - 1), tb)
        gens.append(act @ shuffle_map(tb, tuple(perm), tb))
    return gens


def free_algebra(O, V, weight_cap):
    """The free algebra on V over the operad O, truncated at the given
    weight; V sits in weight 1."""
    if O.arity_cap < weight_cap:
        raise TruncationExceeded(
            "arity cap %d below weight cap %d"
            % (O.arity_cap, weight_cap))
    Vw = _reweight(V, 1)
    pieces = []
    for n in range(weight_cap + 1):
        Xn, tb = tensor_complex([O.component(n)] + [Vw] * n)
        gens = _symmetric_gens(O, n, tb)
        Cn, pr, sc = coinvariants(Xn, gens, tag="w%d" % n)
        pieces.append((Xn, tb, pr, sc, Cn))
    S = SummandSum(pieces)
    # natural map V -> F_O(V), landing in weight 1
    tb1 = pieces[1][1]
    ents = []
    for n, d in Vw.space.dims.items():
        for j in range(d):
            u = O.unit()
            ublk = u.blocks.get(0)
            for r, row in ublk.rows.items():
                loc = tb1.index((0, n), (r, j))
                if loc is None:
                    continue
                col = S.push(1, loc[0], {loc[1]: row[0]})
                for gi, v in col.items():
                    ents.append((n, gi, j, v))
    gen_map = GradedMap.from_entries(Vw.space, S.total.space, 0, ents)
    return FreeAlgebra(O, Vw, weight_cap, S, gen_map)


def check_algebra(A, cap=None):
    """Exact verification of the unit, equivariance, and associativity
    diagrams of an algebra over an operad, within the caps."""
    rep = AxiomReport()
    O = A.operad
    if cap is None:
        cap = min(O.arity_cap, A.max_arity())
    W = A.weight_cap
    for n in range(cap + 1):
        Tn, tbn = A.mult_source(n)
        if not is_chain_map(A.mult(n), Tn, A.carrier):
            rep.add("chain-map", ("mu", n))
        # weight additivity
        for sn, es in tbn.elems.items():
            blk = A.mult(n).blocks.get(sn)
            if blk is None:
                continue
            for i, row in blk.rows.items():
                tw = A.carrier.space.weight(sn, i)
                for j in row:
                    if tw != tbn.space.weight(sn, j):
                        rep.add("weight", ("mu", n, sn, i, j))
    # unit triangle
    usp = A.operad.unit().source
    tbu = TensorBasis([usp, A.carrier.space], weight_cap=W)
    u = tensor_map(tbu, [O.unit(), None], A.mult_tb(1))
    iso = unit_tensor_iso(A.carrier.space, tbu)
    if A.mult(1) @ u @ iso != GradedMap.identity(A.carrier.space):
        rep.add("unit", ())
    # equivariance on adjacent transpositions
    for n in range(2, cap + 1):
        tbn = A.mult_tb(n)
        for i in range(1, n):
            perm = list(range(n + 1))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            g = tensor_map(tbn, [O.gen_action(n, i)] + [None] * n, tbn) \
                @ shuffle_map(tbn, tuple(perm), tbn)
            if A.mult(n) @ g != A.mult(n):
                rep.add("equivariance", (n, i))
    # associativity
    for n in range(cap + 1):
        for ms in compositions(n, cap):
            m = sum(ms)
            src_tb = TensorBasis(
                [O.component(n).space]
                + [O.component(mi).space for mi in ms]
                + [A.carrier.space] * m, weight_cap=W)
            gtb = O.gamma_tb(n, ms)
            blocks1 = [gtb] + [TensorBasis([A.carrier.space])
                               for _ in range(m)]
            r1 = grouped_tensor_map(
                src_tb, 0, blocks1, [O.gamma(n, ms)] + [None] * m,
                A.mult_tb(m))
            route1 = A.mult(m) @ r1
            perm = [0]
            mid_factors = [O.component(n).space]
            for i, mi in enumerate(ms):
                perm.append(1 + i)
                mid_factors.append(O.component(mi).space)
                base = 1 + n + sum(ms[:i])
                for j in range(mi):
                    perm.append(base + j)
                    mid_factors.append(A.carrier.space)
            mid_tb = TensorBasis(mid_factors, weight_cap=W)
            sh = shuffle_map(src_tb, tuple(perm), mid_tb)
            blocks2 = [A.mult_tb(mi) for mi in ms]
            r2 = grouped_tensor_map(
                mid_tb, 1, blocks2, [A.mult(mi) for mi in ms],
                A.mult_tb(n))
            route2 = A.mult(n) @ r2 @ sh
            if route1 != route2:
                rep.add("associativity", (n, ms))
    return rep


# -- monoids ------------------------------------------------------------

class Monoid:
    """Unital associative algebra in the category of complexes."""

    def __init__(self, carrier, mul, unit, weight_cap=None):
        self.carrier = carrier
        self.mul = mul
        self.unit = unit
        self.weight_cap = weight_cap
        self._tbs = {}

    def power_tb(self, k):
        if k not in self._tbs:
            self._tbs[k] = TensorBasis(
                [self.carrier.space] * k, weight_cap=self.weight_cap)
        return self._tbs[k]

    def weight_dims(self):
        out = {}
        for n, ws in self.carrier.space.weights.items():
            for w in ws:
                out[w] = out.get(w, 0) + 1
        return out


def check_monoid(M):
    """Exact associativity and unit triangles of a monoid."""
    rep = AxiomReport()
    C = M.carrier
    tb2 = M.power_tb(2)
    T2, tb2c = tensor_complex([C, C], weight_cap=M.weight_cap)
    if not is_chain_map(M.mul, T2, C):
        rep.add("chain-map", ("mul",))
    tb3 = M.power_tb(3)
    tb1 = TensorBasis([C.space])
    left = M.mul @ grouped_tensor_map(
        tb3, 0, [tb2, tb1], [M.mul, None], tb2)
    right = M.mul @ grouped_tensor_map(
        tb3, 0, [tb1, tb2], [None, M.mul], tb2)
    if left != right:
        rep.add("associativity", ())
    usp = M.unit.source
    for slot in (0, 1):
        factors = [usp, C.space] if slot == 1 else [C.space, usp]
        tbu = TensorBasis(factors, weight_cap=M.weight_cap)
        maps = [M.unit, None] if slot == 1 else [None, M.unit]
        u = tensor_map(tbu, maps, tb2)
        iso = unit_tensor_iso(C.space, tbu, slot=slot)
        if M.mul @ u @ iso != GradedMap.identity(C.space):
            rep.add("unit", ("left" if slot == 1 else "right",))
    return rep


# -- the tensor algebra and the enveloping monoid -----------------------

class TensorAlgebra(Monoid):
    """T(A): components O(n+1) (x)_{S_n} A^(x)n, multiplied by inserting
    units and composing into the last slot of the first factor."""

    def __init__(self, algebra):
        A = algebra
        O = A.operad
        W = A.weight_cap
        self.algebra = A
        pieces = []
        for n in range(O.arity_cap):
            Xn, tb = tensor_complex(
                [O.component(n + 1)] + [A.carrier] * n, weight_cap=W)
            gens = _symmetric_gens(O, n + 1, tb, n_letters=n)
            Cn, pr, sc = coinvariants(Xn, gens, tag="t%d" % n)
            pieces.append((Xn, tb, pr, sc, Cn))
        self.sum = SummandSum(pieces)
        carrier = self.sum.total
        unit = self._build_unit()
        super().__init__(carrier, None, unit, weight_cap=W)
        self.mul = self._build_mul()

    def _build_unit(self):
        O = self.algebra.operad
        S = self.sum
        u = O.unit()
        usp = u.source
        ents = []
        blk = u.blocks.get(0)
        for r, row in blk.rows.items():
            col = S.push(0, 0, {r: row[0]})
            for gi, v in col.items():
                ents.append((0, gi, 0, v))
        return GradedMap.from_entries(usp, S.total.space, 0, ents)

    def element_column(self, n, degs, idxs):
        """Class of a basis element of O(n+1) (x) A^(x)n in the carrier."""
        S = self.sum
        loc = S.tb(n).index(degs, idxs)
        if loc is None:
            return None, {}
        return loc[0], S.push(n, loc[0], {loc[1]: 1})

    def _mul_columns(self, n, xterms, m, yterms):
        """Multiply two lifted elements given by ambient terms of the
        components n and m; returns a column over the carrier."""
        O = self.algebra.operad
        S = self.sum
        if n + m + 1 > O.arity_cap:
            return {}
        g = O.gamma(n + 1, (1,) * n + (m + 1,))
        gtb = O.gamma_tb(n + 1, (1,) * n + (m + 1,))
        u = O.unit()
        ublk = u.blocks[0]
        uterms = [(r, row[0]) for r, row in ublk.rows.items() if 0 in row]
        out = {}
        for (xd, xi), xv in xterms:
            for (yd, yi), yv in yterms:
                # sign: the second operad factor moves left past the
                # A-factors of the first element
                sign = 1
                if yd[0] % 2 and sum(xd[1:]) % 2:
                    sign = -sign
                for uvec in iproduct(uterms, repeat=n):
                    uval = 1
                    for _, uv in uvec:
                        uval = uval * uv
                    sdegs = (xd[0],) + (0,) * n + (yd[0],)
                    sidxs = (xi[0],) + tuple(r for r, _ in uvec) \
                        + (yi[0],)
                    loc = gtb.index(sdegs, sidxs)
                    if loc is None:
                        continue
                    gn, gp = loc
                    blk = g.blocks.get(gn)
                    if blk is None:
                        continue
                    adegs = tuple(xd[1:]) + tuple(yd[1:])
                    aidxs = tuple(xi[1:]) + tuple(yi[1:])
                    ttb = S.tb(n + m)
                    for r, row in blk.rows.items():
                        gx = row.get(gp)
                        if not gx:
                            continue
                        tloc = ttb.index((gn,) + adegs, (r,) + aidxs)
                        if tloc is None:
                            continue
                        col = S.push(n + m, tloc[0],
                                     {tloc[1]: sign * xv * yv * gx
                                      * uval})
                        for gi2, v in col.items():
                            w = out.get(gi2, 0) + v
                            if w == 0:
                                out.pop(gi2, None)
                            else:
                                out[gi2] = w
        return out

    def _build_mul(self):
        S = self.sum
        tb2 = self.power_tb(2)
        ents = []
        for sn, es in tb2.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                nx, xterms = S.lift(degs[0], idxs[0])
                ny, yterms = S.lift(degs[1], idxs[1])
                col = self._mul_columns(nx, xterms, ny, yterms)
                for gi, v in col.items():
                    ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(tb2.space, self.carrier.space, 0,
                                      ents)


def tensor_algebra(A):
    return TensorAlgebra(A)


def universal_envelope(A, tensor=None):
    """The maximal monoid quotient U(A) of T(A) through which module
    actions factor.  Relations range the compatibility square over all
    arity tuples and basis vectors within the caps."""
    T = tensor if tensor is not None else TensorAlgebra(A)
    O = A.operad
    W = A.weight_cap
    cap = O.arity_cap
    S = T.sum
    rel_cols = {}

    def add_rel(n, col):
        rel_cols.setdefault(n, []).append(col)

    for n in range(cap):
        for ms in compositions(n + 1, cap, entry_max=cap):
            # the last inner factor feeds the free slot, so it must
            # have at least one input of its own; the second route
            # passes through the component n + ms[n] - 1, which must
            # exist within the arity truncation
            if ms[n] == 0 or n + ms[n] > cap:
                continue
            m = sum(ms) - 1
            src_tb = TensorBasis(
                [O.component(n + 1).space]
                + [O.component(mi).space for mi in ms]
                + [A.carrier.space] * m, weight_cap=W)
            g = O.gamma(n + 1, ms)
            gtb = O.gamma_tb(n + 1, ms)
            for sn, es in src_tb.elems.items():
                for (degs, idxs) in es:
                    r1 = _envelope_route1(T, g, gtb, n, ms, degs, idxs)
                    r2 = _envelope_route2(T, n, ms, degs, idxs)
                    col = dict(r1)
                    for gi, v in r2.items():
                        w = col.get(gi, 0) - v
                        if w == 0:
                            col.pop(gi, None)
                        else:
                            col[gi] = w
                    if col:
                        add_rel(sn, col)
    rows = {}
    dim = T.carrier.space.dim
    for n, cols in rel_cols.items():
        ents = []
        for r, col in enumerate(cols):
            for j, v in col.items():
                ents.append((r, j, v))
        rows[n] = Mat.from_entries(len(cols), dim(n), ents)
    sub = Subspace(T.carrier.space, rows)
    U, proj, sec = quotient_complex(T.carrier, sub, tag="u")
    # choose, per class, the representative of lowest arity; products
    # of such representatives stay inside the arity truncation exactly
    # when the untruncated product has an in-range representative
    lowsec = minimal_section(T.sum, U.space, proj)
    tbU = TensorBasis([U.space, U.space], weight_cap=W)
    ents = []
    for sn, es in tbU.elems.items():
        for spos, (degs, idxs) in enumerate(es):
            xt = _summand_terms(T.sum, lowsec, degs[0], idxs[0])
            yt = _summand_terms(T.sum, lowsec, degs[1], idxs[1])
            wx = U.space.weight(degs[0], idxs[0])
            wy = U.space.weight(degs[1], idxs[1])
            col = {}
            for sx, txs in xt.items():
                for sy, tys in yt.items():
                    if sx + sy + 1 > cap:
                        if wx + wy > (W if W is not None else -1):
                            continue
                        raise TruncationExceeded(
                            "envelope product leaves the arity cap")
                    c = T._mul_columns(sx, txs, sy, tys)
                    for gi, v in c.items():
                        w2 = col.get(gi, 0) + v
                        if w2 == 0:
                            col.pop(gi, None)
                        else:
                            col[gi] = w2
            _, ucol = apply_cols(proj, sn, col)
            for gi, v in ucol.items():
                ents.append((sn, gi, spos, v))
    mulU = GradedMap.from_entries(tbU.space, U.space, 0, ents)
    M = Monoid(U, mulU, proj @ T.unit, weight_cap=W)
    M.tensor = T
    M.proj = proj
    M.sec = lowsec
    M.square_tb = tbU
    return M


def minimal_section(S, uspace, proj):
    """Section of a SummandSum quotient projection sending each class
    to a representative supported on the lowest possible components."""
    amb = S.total.space
    nmax = len(S.pieces)
    ents = []
    for n, d in uspace.dims.items():
        dim_amb = amb.dim(n)
        Pm = proj.block(n)
        for j in range(d):
            e = Mat.from_entries(d, 1, [(j, 0, 1)])
            done = False
            for b in range(nmax):
                keep = [gi for gi in range(dim_amb)
                        if S.locate[(n, gi)][0] <= b]
                sub = Mat(d, len(keep))
                for i, row in Pm.rows.items():
                    r = {c: row[gi] for c, gi in enumerate(keep)
                         if gi in row}
                    if r:
                        sub.rows[i] = r
                x = sub.solve(e)
                if x is not None:
                    for rr, row in x.rows.items():
                        if 0 in row and row[0]:
                            ents.append((n, keep[rr], j, row[0]))
                    done = True
                    break
            if not done:
                raise TruncationExceeded(
                    "no in-range representative for an envelope class")
    return GradedMap.from_entries(uspace, amb, 0, ents)


def _summand_terms(S, secmap, n, idx):
    """Decompose the section of a class into per-component ambient
    terms: dict component -> list of ((degs, idxs), value)."""
    out = {}
    blk = secmap.blocks.get(n)
    if blk is None:
        return out
    for gi, row in blk.rows.items():
        x = row.get(idx)
        if not x:
            continue
        s, terms = S.lift(n, gi)
        dst = out.setdefault(s, [])
        for key, v in terms:
            dst.append((key, v * x))
    return out


def _envelope_route1(T, g, gtb, n, ms, degs, idxs):
    """Compose the operad factors, then project into the carrier."""
    S = T.sum
    k = len(ms)
    loc = gtb.index(degs[:1 + k], idxs[:1 + k])
    out = {}
    if loc is None:
        return out
    gn, gp = loc
    blk = g.blocks.get(gn)
    if blk is None:
        return out
    m = sum(ms) - 1
    adegs = degs[1 + k:]
    aidxs = idxs[1 + k:]
    ttb = S.tb(m)
    for r, row in blk.rows.items():
        gx = row.get(gp)
        if not gx:
            continue
        tloc = ttb.index((gn,) + adegs, (r,) + aidxs)
        if tloc is None:
            continue
        col = S.push(m, tloc[0], {tloc[1]: gx})
        for gi, v in col.items():
            w = out.get(gi, 0) + v
            if w == 0:
                out.pop(gi, None)
            else:
                out[gi] = w
    return out


def _envelope_route2(T, n, ms, degs, idxs):
    """Multiply the first n blocks into A, absorb the last block as a
    second carrier element, and multiply in T(A)."""
    A = T.algebra
    S = T.sum
    k = n + 1
    # regroup (o, tau_1..tau_k, a_1..a_m) into blocks, with the Koszul
    # sign of moving each tau past the preceding A-blocks
    sign = 1
    aoff = 1 + k
    blocks = []
    pos = 0
    aacc = 0
    for i in range(k):
        mi = ms[i]
        take = mi if i < n else mi - 1
        bdegs = degs[aoff + pos:aoff + pos + take]
        bidxs = idxs[aoff + pos:aoff + pos + take]
        if degs[1 + i] % 2 and aacc % 2:
            sign = -sign
        blocks.append(((degs[1 + i], idxs[1 + i]), bdegs, bidxs))
        pos += take
        aacc += sum(bdegs)
    # head: (o; mu(tau_1; block_1), .., mu(tau_n; block_n))
    head_cols = []
    for i in range(n):
        (td, ti), bdegs, bidxs = blocks[i]
        tb = A.mult_tb(ms[i])
        loc = tb.index((td,) + bdegs, (ti,) + bidxs)
        if loc is None:
            return {}
        cn, col = apply_cols(A.mult(ms[i]), loc[0], {loc[1]: 1})
        if not col:
            return {}
        head_cols.append((cn, col))
    out = {}
    (td, ti), bdegs, bidxs = blocks[n]
    yterms = [(((td,) + bdegs, (ti,) + bidxs), 1)]
    for combo in iproduct(*[list(c.items()) for _, c in head_cols]):
        val = sign
        hdegs, hidxs = [], []
        for i, (j, x) in enumerate(combo):
            val = val * x
            hdegs.append(head_cols[i][0])
            hidxs.append(j)
        xterms = [(((degs[0],) + tuple(hdegs),
                    (idxs[0],) + tuple(hidxs)), val)]
        col = T._mul_columns(n, xterms, ms[n] - 1, yterms)
        for gi, v in col.items():
            w = out.get(gi, 0) + v
            if w == 0:
                out.pop(gi, None)
            else:
                out[gi] = w
    return out


# -- derivations --------------------------------------------------------

class Derivation:
    """Chain map A -> M satisfying the derivative diagrams."""

    def __init__(self, algebra, target, dmap):
        self.algebra = algebra
        self.target = target
        self.map = dmap


def check_derivation(d, cap=None):
    """Exact verification of the derivative diagrams within the caps."""
    A = d.algebra
    M = d.target
    O = A.operad
    W = A.weight_cap
    if cap is None:
        cap = min(O.arity_cap, A.max_arity())
    for n in range(cap + 1):
        lhs = d.map @ A.mult(n)
        tbn = A.mult_tb(n)
        rhs = GradedMap.zero(tbn.space, M.carrier.space, d.map.degree)
        for p in range(n):
            q = n - 1 - p
            factors = [O.component(n).space] + [A.carrier.space] * p \
                + [M.carrier.space] + [A.carrier.space] * q
            tbp = TensorBasis(factors, weight_cap=W)
            step = tensor_map(
                tbn, [None] * (1 + p) + [d.map] + [None] * q, tbp)
            perm = list(range(1 + p)) + list(range(2 + p, n + 1)) \
                + [1 + p]
            sh = shuffle_map(tbp, tuple(perm), M.action_tb(n - 1))
            rhs = rhs + M.action(n - 1) @ sh @ step
        if lhs != rhs:
            return False
    return True


def derivation_from_map(A, M, phi):
    """The unique derivation of a free algebra restricting to phi on the
    generators (phi: generators -> M)."""
    O = A.operad
    S = A.sum
    W = A.weight_cap
    dmap = GradedMap.zero(A.carrier.space, M.carrier.space,
                          phi.degree)
    for n in range(1, W + 1):
        tb = S.tb(n)
        sec = S.pieces[n][3]
        part = GradedMap.zero(tb.space, M.carrier.space, phi.degree)
        for p in range(n):
            q = n - 1 - p
            factors = [O.component(n).space] + [A.carrier.space] * p \
                + [M.carrier.space] + [A.carrier.space] * q
            tbp = TensorBasis(factors, weight_cap=W)
            maps = [None] + [A.gen_map] * p + [phi] + [A.gen_map] * q
            step = tensor_map(tb, maps, tbp)
            perm = list(range(1 + p)) + list(range(2 + p, n + 1)) \
                + [1 + p]
            sh = shuffle_map(tbp, tuple(perm), M.action_tb(n - 1))
            part = part + M.action(n - 1) @ sh @ step
        dmap = dmap + part @ sec @ S.projs[n]
    return Derivation(A, M, dmap)


def restrict_to_generators(d):
    """Precompose a derivation of a free algebra with the generator
    inclusion."""
    return d.map @ d.algebra.gen_map


def kahler(A, cap=None):
    """The module of differentials: the maximal module quotient of the
    free module on the carrier making the tautological map derivative.
    Returns (module, Derivation)."""
    from .modules import free_module, module_quotient
    O = A.operad
    W = A.weight_cap
    if cap is None:
        cap = min(O.arity_cap, A.max_arity())
    F = free_module(A, A.carrier)
    # tautological map: a |-> unit (x) a, landing in the envelope part
    tilde = F.from_fiber
    rel_cols = {}
    for n in range(cap + 1):
        tbn = A.mult_tb(n)
        lhs = tilde @ A.mult(n)
        rhs = GradedMap.zero(tbn.space, F.carrier.space, 0)
        for p in range(n):
            q = n - 1 - p
            factors = [O.component(n).space] + [A.carrier.space] * p \
                + [F.carrier.space] + [A.carrier.space] * q
            tbp = TensorBasis(factors, weight_cap=W)
            step = tensor_map(
                tbn, [None] * (1 + p) + [tilde] + [None] * q, tbp)
            perm = list(range(1 + p)) + list(range(2 + p, n + 1)) \
                + [1 + p]
            sh = shuffle_map(tbp, tuple(perm), F.action_tb(n - 1))
            rhs = rhs + F.action(n - 1) @ sh @ step
        diff = lhs - rhs
        for sn, blk in diff.blocks.items():
            cols = {}
            for i, row in blk.rows.items():
                for j, x in row.items():
                    cols.setdefault(j, {})[i] = x
            for col in cols.values():
                rel_cols.setdefault(sn, []).append(col)
    Om, proj, _ = module_quotient(F, rel_cols, tag="om")
    d = Derivation(A, Om, proj @ tilde)
    return Om, d
