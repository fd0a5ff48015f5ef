"""Modules over an algebra over an operad.

A module structure is a family of actions O(n+1) (x) A^(x)n (x) E -> E;
the module slot is always the last tensor factor.  Free modules are
U(A) (x) W.  The lax product P_A(M_1..M_m) is the quotient of
(+)_k O(k+m) (x)_{S_k} A^(x)k (x) M_1 (x) .. (x) M_m
by the span of the composition-compatibility squares, truncated in k by
the arity cap and in weight by the algebra's weight cap; both
truncations are ideals for every structure map used here, so all
diagram checks remain exact.
"""

from itertools import product as iproduct

from .algebras import (OperadAlgebra, SummandSum, apply_cols,
                       coinvariants, minimal_section, quotient_complex,
                       unit_tensor_iso, _symmetric_gens)
from .complexes import (Complex, HomBasis, inner_hom, is_chain_map,
                        tensor_complex)
from .errors import (DimensionError, IllDefinedQuotient,
                     TruncationExceeded)
from .graded import GradedMap, GradedSpace, Subspace, direct_sum
from .linalg import Mat
from .operads import AxiomReport, compositions
from .tensors import TensorBasis, shuffle_map, tensor_map, \
    grouped_tensor_map


def reorder_sign(degs, perm):
    """Koszul sign of the shuffle where target slot j holds the source
    factor perm[j] (0-based)."""
    posn = [0] * len(degs)
    for j, a in enumerate(perm):
        posn[a] = j
    odd = [a for a in range(len(degs)) if degs[a] % 2]
    sign = 1
    for ai in range(len(odd)):
        for bi in range(ai + 1, len(odd)):
            if posn[odd[ai]] > posn[odd[bi]]:
                sign = -sign
    return sign


class AModule:
    """Carrier with actions nu_n: O(n+1) (x) A^(x)n (x) E -> E."""

    def __init__(self, algebra, carrier, actions, weight_cap=None):
        self.algebra = algebra
        self.carrier = carrier
        self.actions = dict(actions)
        self.weight_cap = weight_cap if weight_cap is not None \
            else algebra.weight_cap
        self._sources = {}

    def action_source(self, n):
        if n not in self._sources:
            A = self.algebra
            self._sources[n] = tensor_complex(
                [A.operad.component(n + 1)] + [A.carrier] * n
                + [self.carrier], weight_cap=self.weight_cap)
        return self._sources[n]

    def action_tb(self, n):
        return self.action_source(n)[1]

    def action(self, n):
        return self.actions[n]

    def max_arity(self):
        return max(self.actions)

    def weight_dims(self):
        out = {}
        for n, ws in self.carrier.space.weights.items():
            for w in ws:
                out[w] = out.get(w, 0) + 1
        return out


def module_over_self(A):
    """The algebra as a module over itself: nu_n = mu_{n+1}."""
    actions = {}
    for n in range(A.operad.arity_cap):
        actions[n] = A.mult(n + 1)
    return AModule(A, A.carrier, actions)


def check_module(E, cap=None):
    """Exact verification of the unit, equivariance, and associativity
    diagrams of a module, within the caps."""
    rep = AxiomReport()
    A = E.algebra
    O = A.operad
    W = E.weight_cap
    if cap is None:
        cap = min(O.arity_cap - 1, E.max_arity())
    for n in range(cap + 1):
        Tn, tbn = E.action_source(n)
        if not is_chain_map(E.action(n), Tn, E.carrier):
            rep.add("chain-map", ("nu", n))
    # unit triangle: E -> O(1) (x) E -> E
    usp = O.unit().source
    tbu = TensorBasis([usp, E.carrier.space], weight_cap=W)
    u = tensor_map(tbu, [O.unit(), None], E.action_tb(0))
    iso = unit_tensor_iso(E.carrier.space, tbu)
    if E.action(0) @ u @ iso != GradedMap.identity(E.carrier.space):
        rep.add("unit", ())
    # equivariance: a transposition acts on O(n+1) through sigma + id
    # and swaps the matching A factors, fixing the module slot
    for n in range(2, cap + 1):
        tbn = E.action_tb(n)
        for i in range(1, n):
            perm = list(range(n + 2))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            g = tensor_map(tbn,
                           [O.gen_action(n + 1, i)] + [None] * (n + 1),
                           tbn) @ shuffle_map(tbn, tuple(perm), tbn)
            if E.action(n) @ g != E.action(n):
                rep.add("equivariance", (n, i))
    # associativity: the last inner factor carries the module slot and
    # must have at least one input of its own
    for n in range(cap + 1):
        for ms in compositions(n + 1, O.arity_cap):
            if ms[n] == 0:
                continue
            m = sum(ms) - 1
            if m > cap or m not in E.actions:
                continue
            src_tb = TensorBasis(
                [O.component(n + 1).space]
                + [O.component(mi).space for mi in ms]
                + [A.carrier.space] * m + [E.carrier.space],
                weight_cap=W)
            gtb = O.gamma_tb(n + 1, ms)
            blocks1 = [gtb] \
                + [TensorBasis([A.carrier.space]) for _ in range(m)] \
                + [TensorBasis([E.carrier.space])]
            r1 = grouped_tensor_map(
                src_tb, 0, blocks1,
                [O.gamma(n + 1, ms)] + [None] * (m + 1),
                E.action_tb(m))
            route1 = E.action(m) @ r1
            perm = [0]
            mid_factors = [O.component(n + 1).space]
            for i in range(n + 1):
                perm.append(1 + i)
                mid_factors.append(O.component(ms[i]).space)
                take = ms[i] if i < n else ms[i] - 1
                base = 2 + n + sum(ms[:i])
                for j in range(take):
                    perm.append(base + j)
                    mid_factors.append(A.carrier.space)
            perm.append(len(src_tb.factors) - 1)
            mid_factors.append(E.carrier.space)
            mid_tb = TensorBasis(mid_factors, weight_cap=W)
            sh = shuffle_map(src_tb, tuple(perm), mid_tb)
            blocks2 = [A.mult_tb(ms[i]) for i in range(n)] \
                + [E.action_tb(ms[n] - 1)]
            maps2 = [A.mult(ms[i]) for i in range(n)] \
                + [E.action(ms[n] - 1)]
            r2 = grouped_tensor_map(mid_tb, 1, blocks2, maps2,
                                    E.action_tb(n))
            route2 = E.action(n) @ r2 @ sh
            if route1 != route2:
                rep.add("associativity", (n, ms))
    return rep


def module_quotient(E, rel_cols, tag="q"):
    """Quotient module by the span of the given relation columns
    (dict degree -> list of column dicts); raises if the action or the
    differential does not descend."""
    A = E.algebra
    rows = {}
    dim = E.carrier.space.dim
    for n, cols in rel_cols.items():
        ents = []
        for r, col in enumerate(cols):
            for j, v in col.items():
                ents.append((r, j, v))
        rows[n] = Mat.from_entries(len(cols), dim(n), ents)
    sub = Subspace(E.carrier.space, rows)
    Q, proj, sec = quotient_complex(E.carrier, sub, tag)
    r = GradedMap.identity(E.carrier.space) - sec @ proj
    actions = {}
    for n in E.actions:
        tbq = TensorBasis(
            [A.operad.component(n + 1).space] + [A.carrier.space] * n
            + [Q.space], weight_cap=E.weight_cap)
        tbe = E.action_tb(n)
        lift = tensor_map(tbq, [None] * (n + 1) + [sec], tbe)
        probe = tensor_map(tbe, [None] * (n + 1) + [r], tbe)
        if not (proj @ E.action(n) @ probe).is_zero():
            raise IllDefinedQuotient(
                "module action does not descend (nu_%d)" % n)
        actions[n] = (proj @ E.action(n) @ lift).with_spaces(
            tbq.space, Q.space)
    M = AModule(A, Q, actions, weight_cap=E.weight_cap)
    return M, proj, sec


class FreeModule(AModule):
    """U(A) (x) W with the action through the envelope."""

    def __init__(self, algebra, fiber, envelope):
        A = algebra
        U = envelope
        self.envelope = U
        self.fiber = fiber
        W = A.weight_cap
        carrier, tb = tensor_complex([U.carrier, fiber], weight_cap=W)
        self.pair_tb = tb
        T = U.tensor
        actions = {}
        for n in range(A.operad.arity_cap):
            actions[n] = self._build_action(A, U, T, tb, n)
        super().__init__(A, carrier, actions)
        # natural map W -> U(A) (x) W through the unit of the envelope
        ents = []
        ublk = U.unit.blocks.get(0)
        for nd, d in fiber.space.dims.items():
            for j in range(d):
                for r, row in ublk.rows.items():
                    loc = tb.index((0, nd), (r, j))
                    if loc is not None:
                        ents.append((nd, loc[1], j, row[0]))
        self.from_fiber = GradedMap.from_entries(
            fiber.space, carrier.space, 0, ents)

    def _build_action(self, A, U, T, tb, n):
        tbn = TensorBasis(
            [A.operad.component(n + 1).space] + [A.carrier.space] * n
            + [tb.space], weight_cap=A.weight_cap)
        sq = U.square_tb
        ents = []
        for sn, es in tbn.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                # decode the module element into its U and W parts
                pdegs, pidxs = tb.elems[degs[-1]][idxs[-1]]
                u_deg, w_deg = pdegs
                u_idx, w_idx = pidxs
                # head: class of (o; a_1..a_n) in U(A)
                hs, hcol = T.element_column(n, degs[:-1], idxs[:-1])
                if not hcol:
                    continue
                _, hu = apply_cols(U.proj, hs, hcol)
                # multiply onto the U part in U(A); the fiber element
                # rides along without signs
                out = {}
                for hi, hv in hu.items():
                    loc = sq.index((hs, u_deg), (hi, u_idx))
                    if loc is None:
                        continue
                    mn, mcol = apply_cols(U.mul, loc[0], {loc[1]: hv})
                    for pi, pv in mcol.items():
                        floc = tb.index((mn, w_deg), (pi, w_idx))
                        if floc is None:
                            continue
                        v = out.get(floc[1], 0) + pv
                        if v == 0:
                            out.pop(floc[1], None)
                        else:
                            out[floc[1]] = v
                for gi, v in out.items():
                    ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(tbn.space, tb.space, 0, ents)


def free_module(A, fiber, envelope=None):
    if envelope is None:
        from .algebras import universal_envelope
        envelope = universal_envelope(A)
    return FreeModule(A, fiber, envelope)


# -- lax products -------------------------------------------------------

class LaxProduct(AModule):
    """P_A(M_1..M_m): quotient of the truncated ambient sum by the
    composition-compatibility relations, with the induced action."""

    def __init__(self, algebra, mods, sym_count=0):
        A = algebra
        O = A.operad
        W = A.weight_cap
        m = len(mods)
        if m > O.arity_cap:
            raise TruncationExceeded("too many lax factors")
        self.mods = list(mods)
        self.sym_count = sym_count
        pieces = []
        for k in range(O.arity_cap - m + 1):
            Xk, tb = tensor_complex(
                [O.component(k + m)] + [A.carrier] * k
                + [M.carrier for M in mods], weight_cap=W)
            gens = _symmetric_gens(O, k + m, tb, n_letters=k)
            # optionally symmetrize the leading module factors as well
            for i in range(1, sym_count):
                perm = list(range(len(tb.factors)))
                perm[k + i], perm[k + i + 1] = \
                    perm[k + i + 1], perm[k + i]
                act = tensor_map(
                    tb, [O.gen_action(k + m, k + i)]
                    + [None] * (len(tb.factors) - 1), tb)
                gens.append(act @ shuffle_map(tb, tuple(perm), tb))
            Ck, pr, sc = coinvariants(Xk, gens, tag="p%d" % k)
            pieces.append((Xk, tb, pr, sc, Ck))
        self.sum = SummandSum(pieces)
        rel_cols = self._relations(A, mods)
        rows = {}
        dims = self.sum.total.space.dim
        for n, cols in rel_cols.items():
            ents = []
            for r, col in enumerate(cols):
                for j, v in col.items():
                    ents.append((r, j, v))
            rows[n] = Mat.from_entries(len(cols), dims(n), ents)
        sub = Subspace(self.sum.total.space, rows)
        carrier, self.proj, self.sec = quotient_complex(
            self.sum.total, sub, tag="P")
        self.lowsec = minimal_section(self.sum, carrier.space,
                                      self.proj)
        actions = {}
        for n in range(O.arity_cap):
            # even a component-0 term needs arity n + m, so larger n
            # is out of range altogether within the truncation
            if n + len(mods) > O.arity_cap:
                break
            actions[n] = self._build_action(A, mods, carrier, n)
        super().__init__(A, carrier, actions)

    def ambient_class(self, k, degs, idxs):
        """Class in the carrier of an ambient basis element of the
        k-th component."""
        S = self.sum
        loc = S.tb(k).index(degs, idxs)
        if loc is None:
            return {}
        col = S.push(k, loc[0], {loc[1]: 1})
        _, out = apply_cols(self.proj, loc[0], col)
        return out

    def lift(self, n, idx):
        """Minimal-arity section of a carrier basis vector: list of
        (k, ((degs, idxs), value)) ambient terms."""
        S = self.sum
        out = []
        blk = self.lowsec.blocks.get(n)
        if blk is None:
            return out
        for gi, row in blk.rows.items():
            x = row.get(idx)
            if not x:
                continue
            s, terms = S.lift(n, gi)
            for key, v in terms:
                out.append((s, (key, v * x)))
        return out

    def _relations(self, A, mods):
        O = A.operad
        W = A.weight_cap
        m = len(mods)
        cap = O.arity_cap
        rel_cols = {}
        for n in range(cap - m + 1):
            if n + m == 0:
                continue
            for ks in compositions(n + m, cap):
                if any(ks[n + j] == 0 for j in range(m)):
                    continue
                src_tb = TensorBasis(
                    [O.component(n + m).space]
                    + [O.component(x).space for x in ks]
                    + [A.carrier.space] * (sum(ks) - m)
                    + [M.carrier.space for M in mods], weight_cap=W)
                g = O.gamma(n + m, ks)
                gtb = O.gamma_tb(n + m, ks)
                for sn, es in src_tb.elems.items():
                    for (degs, idxs) in es:
                        r1 = self._route1(A, g, gtb, n + m, ks,
                                          degs, idxs)
                        r2 = self._route2(A, mods, n, ks, degs, idxs)
                        col = dict(r1)
                        for gi, v in r2.items():
                            w = col.get(gi, 0) - v
                            if w == 0:
                                col.pop(gi, None)
                            else:
                                col[gi] = w
                        if col:
                            rel_cols.setdefault(sn, []).append(col)
        return rel_cols

    def _route1(self, A, g, gtb, width, ks, degs, idxs):
        """Compose the operad factors, sort the composed inputs back
        into the ambient layout (A-leaves first, then the module
        factors), and push into the total space."""
        O = A.operad
        S = self.sum
        m = len(self.mods)
        n = width - m
        k = sum(ks) - m
        K = sum(ks)
        loc = gtb.index(degs[:1 + width], idxs[:1 + width])
        out = {}
        if loc is None:
            return out
        gn, gp = loc
        blk = g.blocks.get(gn)
        if blk is None:
            return out
        wcol0 = {r: row[gp] for r, row in blk.rows.items()
                 if gp in row}
        if not wcol0:
            return out
        items = []
        tperm = []
        apos = 0
        for i in range(width):
            take = ks[i] - (0 if i < n else 1)
            for t in range(take):
                items.append(((0, apos), degs[1 + width + apos]))
                tperm.append(apos)
                apos += 1
            if i >= n:
                j = i - n
                mslot = 1 + width + k + j
                items.append(((1, j), degs[mslot]))
                tperm.append(k + j)
        wcol, _, sign = sort_operad_tensor(O, K, gn, wcol0, items)
        # the ambient tail stores all A-leaves before the module
        # factors; composing first shuffles them into block order
        sign = sign * reorder_sign(degs[1 + width:], tuple(tperm))
        tail_d = degs[1 + width:]
        tail_i = idxs[1 + width:]
        ttb = S.tb(k)
        for r, gx in wcol.items():
            tloc = ttb.index((gn,) + tail_d, (r,) + tail_i)
            if tloc is None:
                continue
            col = S.push(k, tloc[0], {tloc[1]: sign * gx})
            for gi, v in col.items():
                w = out.get(gi, 0) + v
                if w == 0:
                    out.pop(gi, None)
                else:
                    out[gi] = w
        return out

    def _route2(self, A, mods, n, ks, degs, idxs):
        """Regroup the leaves with their blocks, multiply the A-blocks
        into A, act with each module block, and push the resulting
        component-n element into the total space."""
        m = len(mods)
        width = n + m
        aoff = 1 + width
        perm = [0]
        pos = 0
        blocks = []
        for i in range(width):
            take = ks[i] if i < n else ks[i] - 1
            leaf = list(range(aoff + pos, aoff + pos + take))
            perm.append(1 + i)
            perm.extend(leaf)
            extra = None
            if i >= n:
                extra = len(degs) - m + (i - n)
                perm.append(extra)
            blocks.append((i, leaf, extra))
            pos += take
        sign = reorder_sign(degs, perm)
        cols = []
        for i, leaf, extra in blocks:
            td, ti = degs[1 + i], idxs[1 + i]
            bdegs = tuple(degs[p] for p in leaf)
            bidxs = tuple(idxs[p] for p in leaf)
            if i < n:
                tb = A.mult_tb(ks[i])
                f = A.mult(ks[i])
                loc = tb.index((td,) + bdegs, (ti,) + bidxs)
            else:
                M = mods[i - n]
                tb = M.action_tb(ks[i] - 1)
                f = M.action(ks[i] - 1)
                loc = tb.index((td,) + bdegs + (degs[extra],),
                               (ti,) + bidxs + (idxs[extra],))
            if loc is None:
                return {}
            cn, col = apply_cols(f, loc[0], {loc[1]: 1})
            if not col:
                return {}
            cols.append((cn, list(col.items())))
        out = {}
        ttb = self.sum.tb(n)
        for combo in iproduct(*[c for _, c in cols]):
            val = sign
            tdegs, tidxs = [], []
            for i, (j, x) in enumerate(combo):
                val = val * x
                tdegs.append(cols[i][0])
                tidxs.append(j)
            tloc = ttb.index((degs[0],) + tuple(tdegs),
                             (idxs[0],) + tuple(tidxs))
            if tloc is None:
                continue
            col = self.sum.push(n, tloc[0], {tloc[1]: val})
            for gi, v in col.items():
                w = out.get(gi, 0) + v
                if w == 0:
                    out.pop(gi, None)
                else:
                    out[gi] = w
        return out

    def _build_action(self, A, mods, carrier, n):
        O = A.operad
        W = A.weight_cap
        m = len(mods)
        tbn = TensorBasis(
            [O.component(n + 1).space] + [A.carrier.space] * n
            + [carrier.space], weight_cap=W)
        u = O.unit()
        ublk = u.blocks[0]
        uterms = [(r, row[0]) for r, row in ublk.rows.items()]
        ents = []
        for sn, es in tbn.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                terms = self.lift(degs[-1], idxs[-1])
                out = {}
                for k, ((pd, pi), pval) in terms:
                    kk = k + m
                    if n + kk > O.arity_cap:
                        raise TruncationExceeded(
                            "lax action leaves the arity cap")
                    g = O.gamma(n + 1, (1,) * n + (kk,))
                    gtb = O.gamma_tb(n + 1, (1,) * n + (kk,))
                    # sign: the inner operad element moves left past
                    # the outer A-factors
                    sign = 1
                    if pd[0] % 2 and sum(degs[1:1 + n]) % 2:
                        sign = -sign
                    for uvec in iproduct(uterms, repeat=n):
                        uval = 1
                        for _, uv in uvec:
                            uval = uval * uv
                        sdegs = (degs[0],) + (0,) * n + (pd[0],)
                        sidxs = (idxs[0],) \
                            + tuple(r for r, _ in uvec) + (pi[0],)
                        loc = gtb.index(sdegs, sidxs)
                        if loc is None:
                            continue
                        gn, gp = loc
                        blk = g.blocks.get(gn)
                        if blk is None:
                            continue
                        adegs = tuple(degs[1:1 + n]) + tuple(pd[1:])
                        aidxs = tuple(idxs[1:1 + n]) + tuple(pi[1:])
                        ttb = self.sum.tb(n + k)
                        for r, row in blk.rows.items():
                            gx = row.get(gp)
                            if not gx:
                                continue
                            tloc = ttb.index((gn,) + adegs,
                                             (r,) + aidxs)
                            if tloc is None:
                                continue
                            col = self.sum.push(
                                n + k, tloc[0],
                                {tloc[1]: sign * pval * gx * uval})
                            _, col = apply_cols(self.proj, tloc[0],
                                                col)
                            for gi, v in col.items():
                                w = out.get(gi, 0) + v
                                if w == 0:
                                    out.pop(gi, None)
                                else:
                                    out[gi] = w
                for gi, v in out.items():
                    ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(tbn.space, carrier.space, 0,
                                      ents)


def lax_product(A, mods):
    return LaxProduct(A, mods)


# -- hom-space dimension counting ---------------------------------------

def linear_hom_dim(constraints, source, target, degree=0,
                   return_basis=False):
    """Dimension of the space of GradedMaps source -> target of the
    given degree satisfying a list of linear constraints; each
    constraint is a function GradedMap -> GradedMap that must vanish."""
    unknowns = []
    for n in source.degrees():
        tn = n + degree
        for i in range(target.dim(tn)):
            for j in range(source.dim(n)):
                unknowns.append((n, i, j))
    cols = []
    for (n, i, j) in unknowns:
        f = GradedMap.from_entries(source, target, degree,
                                   [(n, i, j, 1)])
        vec = {}
        for c, fn in enumerate(constraints):
            out = fn(f)
            for bn, blk in out.blocks.items():
                for r, row in blk.rows.items():
                    for cc, x in row.items():
                        if x:
                            vec[(c, bn, r, cc)] = x
        cols.append(vec)
    keys = sorted({k for col in cols for k in col})
    kindex = {k: r for r, k in enumerate(keys)}
    ents = []
    for c, col in enumerate(cols):
        for k, x in col.items():
            ents.append((kindex[k], c, x))
    mat = Mat.from_entries(len(keys), len(unknowns), ents)
    if not return_basis:
        return len(unknowns) - mat.rank()
    kb = mat.kernel_basis()
    basis = []
    for c in range(kb.ncols):
        bents = []
        for rr, row in kb.rows.items():
            if c in row:
                n, i, j = unknowns[rr]
                bents.append((n, i, j, row[c]))
        basis.append(GradedMap.from_entries(source, target, degree,
                                            bents))
    return basis


def module_map_constraints(E, N, cap=None):
    """Linear constraints making f: E -> N a module chain map."""
    if cap is None:
        cap = min(E.max_arity(), N.max_arity())
    cons = [lambda f: f @ E.carrier.d - N.carrier.d @ f]
    for n in range(cap + 1):
        def cn(f, n=n):
            tbe = E.action_tb(n)
            tbn = N.action_tb(n)
            push = tensor_map(tbe, [None] * (n + 1) + [f], tbn)
            return f @ E.action(n) - N.action(n) @ push
        cons.append(cn)
    return cons


def module_hom_dim(E, N, cap=None, return_basis=False):
    return linear_hom_dim(module_map_constraints(E, N, cap),
                          E.carrier.space, N.carrier.space,
                          return_basis=return_basis)


# -- lax inner homs -----------------------------------------------------

def hom_precompose(hb_from, g, hb_to):
    """Precomposition hom(Y, N) -> hom(Y', N) with a degree-0 map
    g: Y' -> Y, in hom coordinates."""
    ents = []
    for h, es in hb_from.elems.items():
        for kdx, (p, i, j) in enumerate(es):
            blk = g.blocks.get(p)
            if blk is None:
                continue
            row = blk.rows.get(j)
            if not row:
                continue
            for j2, x in row.items():
                t = hb_to.index(h, p, i, j2)
                if t is not None:
                    ents.append((h, t, kdx, x))
    return GradedMap.from_entries(hb_from.space, hb_to.space, 0, ents)


def sort_operad_tensor(O, K, wdeg, wcol, items):
    """Stable-sort tagged operad inputs, twisting the operad element by
    the corresponding right action and accumulating the Koszul sign of
    the element braidings.

    items: list of (sortkey, element degree); free input slots carry
    degree 0.  Returns (wcol, items, sign)."""
    sign = 1
    items = list(items)
    changed = True
    while changed:
        changed = False
        for i in range(len(items) - 1):
            if items[i][0] > items[i + 1][0]:
                if items[i][1] % 2 and items[i + 1][1] % 2:
                    sign = -sign
                _, wcol = apply_cols(O.gen_action(K, i + 1), wdeg,
                                     wcol)
                items[i], items[i + 1] = items[i + 1], items[i]
                changed = True
    return wcol, items, sign


class LaxHom(AModule):
    """H_A(M_2..M_m; N): the maximal subobject of the componentwise
    inner homs hom(O(n+m) (x)_{S_n} A^(x)n (x) M_2..M_m, N) on which
    the composition-compatibility squares commute; input n+1 of the
    operad factor is the free evaluation slot."""

    def __init__(self, algebra, others, target):
        A = algebra
        O = A.operad
        W = A.weight_cap
        self.others = list(others)
        self.target = target
        m = len(others) + 1
        self.m = m
        if m > O.arity_cap:
            raise TruncationExceeded("too many hom factors")
        pieces = []
        for n in range(O.arity_cap - m + 1):
            Xn, tb = tensor_complex(
                [O.component(n + m)] + [A.carrier] * n
                + [M.carrier for M in others], weight_cap=W)
            gens = _symmetric_gens(O, n + m, tb, n_letters=n)
            Cn, pr, sc = coinvariants(Xn, gens, tag="h%d" % n)
            pieces.append((Xn, tb, pr, sc, Cn))
        self.pieces = pieces
        homs = [inner_hom(p[4], target.carrier) for p in pieces]
        self.homs = homs
        total, incs, projs = direct_sum([h[0].space for h in homs])
        self.projs = projs
        d_total = GradedMap.zero(total, total, 1)
        for s, (Hc, hb) in enumerate(homs):
            d_total = d_total + incs[s] @ Hc.d @ projs[s]
        conds = self._conditions(A, others, total)
        # carve out the kernel of all conditions, degreewise
        kmats = {}
        for nn in total.degrees():
            rows = []
            for D in conds:
                blk = D.blocks.get(nn)
                if blk is not None:
                    rows.append(blk)
            if rows:
                r0 = 0
                ents = []
                for mtx in rows:
                    for i, row in mtx.rows.items():
                        for j, x in row.items():
                            ents.append((r0 + i, j, x))
                    r0 += mtx.nrows
                stacked = Mat.from_entries(
                    sum(mx.nrows for mx in rows), total.dim(nn), ents)
            else:
                stacked = Mat.zero(0, total.dim(nn))
            kmats[nn] = stacked.kernel_basis()
        from .graded import GradedSpace
        dims = {nn: kb.ncols for nn, kb in kmats.items() if kb.ncols}
        Hspace = GradedSpace(dims)
        iblocks = {nn: kmats[nn] for nn in dims}
        self.include = GradedMap(Hspace, total, 0, iblocks)
        dblocks = {}
        for nn in dims:
            rhs = d_total.block(nn) @ kmats[nn]
            tgt = kmats.get(nn + 1, Mat.zero(total.dim(nn + 1), 0))
            sol = tgt.solve(rhs)
            if sol is None:
                raise IllDefinedQuotient(
                    "hom differential leaves the subobject")
            if not sol.is_zero():
                dblocks[nn] = sol
        carrier = Complex(Hspace, GradedMap(Hspace, Hspace, 1,
                                            dblocks))
        actions = {}
        for k in range(O.arity_cap):
            actions[k] = self._build_action(A, carrier, k)
        super().__init__(A, carrier, actions)

    def component_map(self, nn, col):
        """Decompose an H-element (degree nn, coordinate column dict)
        into its per-component GradedMaps C_s -> N."""
        tot = {}
        blk = self.include.blocks.get(nn)
        if blk is not None:
            for gi, row in blk.rows.items():
                v = 0
                for j, x in row.items():
                    c = col.get(j)
                    if c:
                        v = v + x * c
                if v:
                    tot[gi] = v
        out = []
        for s, (Hc, hb) in enumerate(self.homs):
            pr = self.projs[s]
            _, sc_col = apply_cols(pr, nn, tot)
            d = hb.space.dim(nn)
            mat = Mat.from_entries(d, 1,
                                   ((i, 0, x) for i, x in
                                    sc_col.items()))
            out.append(hb.map_of(nn, mat))
        return out

    def _conditions(self, A, others, total):
        """One compatibility condition per composition pattern (n, ks):
        composing the inner operad factors and projecting to component
        sum(ks) - m must agree with applying the A-multiplications and
        module actions blockwise, where the free block acts on the
        values through the target module's action."""
        O = A.operad
        W = A.weight_cap
        m = self.m
        cap = O.arity_cap
        N = self.target
        conds = []
        for n in range(len(self.pieces)):
            for ks in compositions(n + m, cap):
                if ks[n] == 0:
                    continue
                if any(ks[n + 1 + j] == 0 for j in range(m - 1)):
                    continue
                k = sum(ks) - m
                if k >= len(self.pieces):
                    continue
                src_tb = TensorBasis(
                    [O.component(n + m).space]
                    + [O.component(x).space for x in ks]
                    + [A.carrier.space] * k
                    + [M.carrier.space for M in others],
                    weight_cap=W)
                hbig = HomBasis(src_tb.space, N.carrier.space)
                r1 = self._route1(A, n, ks, src_tb)
                D1 = hom_precompose(self.homs[k][1], r1, hbig) \
                    @ self.projs[k]
                D2 = self._route2(A, others, n, ks, src_tb, hbig) \
                    @ self.projs[n]
                D = D1 - D2
                if not D.is_zero():
                    conds.append(D)
        return conds

    def _route1(self, A, n, ks, src_tb):
        """Compose the operad factors, sort the composed inputs into
        the target convention (A's, free input, then module factors)."""
        O = A.operad
        m = self.m
        width = n + m
        k = sum(ks) - m
        g = O.gamma(width, ks)
        gtb = O.gamma_tb(width, ks)
        Cd = self.pieces[k]
        K = sum(ks)
        ents = []
        for sn, es in src_tb.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                loc = gtb.index(degs[:1 + width], idxs[:1 + width])
                if loc is None:
                    continue
                gn, gp = loc
                blk = g.blocks.get(gn)
                if blk is None:
                    continue
                # tag the composed inputs blockwise: A-leaves in flat
                # order, then the free input, then the module inputs
                items = []
                apos = 0
                for i in range(width):
                    take = ks[i] - (0 if i < n else 1)
                    for t in range(take):
                        items.append(((0, apos), degs[1 + width + apos]))
                        apos += 1
                    if i == n:
                        items.append(((1, 0), 0))
                    elif i > n:
                        j = i - n - 1
                        mslot = 1 + width + k + j
                        items.append(((2, j), degs[mslot]))
                wcol0 = {r: row[gp] for r, row in blk.rows.items()
                         if gp in row}
                if not wcol0:
                    continue
                wcol, _, sign = sort_operad_tensor(O, K, gn, wcol0,
                                                   items)
                tail_d = degs[1 + width:]
                tail_i = idxs[1 + width:]
                ttb = Cd[1]
                pr = Cd[2]
                for r, x in wcol.items():
                    tloc = ttb.index((gn,) + tail_d, (r,) + tail_i)
                    if tloc is None:
                        continue
                    _, col = apply_cols(pr, tloc[0],
                                        {tloc[1]: sign * x})
                    for gi, v in col.items():
                        ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(src_tb.space,
                                      self.pieces[k][4].space, 0, ents)

    def _route2(self, A, others, n, ks, src_tb, hbig):
        """Blockwise evaluation: multiply the A-blocks, act on the
        other module blocks, feed the results to the component-n map,
        and let the free block act on the value in the target module.
        Returns a map from the component-n hom space to hom
        coordinates on the condition source."""
        O = A.operad
        m = self.m
        width = n + m
        N = self.target
        Cd = self.pieces[n]
        hb = self.homs[n][1]
        aoff = 1 + width
        k = sum(ks) - m
        j = ks[n]
        ents = []
        for sn, es in src_tb.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                # regroup: free block first, then the outer element and
                # the remaining blocks with their leaves
                pos = 0
                binfo = []
                fleaf = None
                for i in range(width):
                    take = ks[i] - (0 if i < n else 1)
                    leaf = list(range(aoff + pos, aoff + pos + take))
                    if i == n:
                        fleaf = leaf
                    else:
                        extra = None
                        if i > n:
                            extra = aoff + k + (i - n - 1)
                        binfo.append((i, leaf, extra))
                    pos += take
                perm = [1 + n] + fleaf + [0]
                for i, leaf, extra in binfo:
                    perm.append(1 + i)
                    perm.extend(leaf)
                    if extra is not None:
                        perm.append(extra)
                s1 = reorder_sign(degs, perm)
                fdeg = degs[1 + n] + sum(degs[p] for p in fleaf)
                cols = []
                dead = False
                for i, leaf, extra in binfo:
                    td, ti = degs[1 + i], idxs[1 + i]
                    bdegs = tuple(degs[p] for p in leaf)
                    bidxs = tuple(idxs[p] for p in leaf)
                    if i < n:
                        tb = A.mult_tb(ks[i])
                        f = A.mult(ks[i])
                        loc = tb.index((td,) + bdegs, (ti,) + bidxs)
                    else:
                        M = others[i - n - 1]
                        tb = M.action_tb(ks[i] - 1)
                        f = M.action(ks[i] - 1)
                        loc = tb.index((td,) + bdegs + (degs[extra],),
                                       (ti,) + bidxs + (idxs[extra],))
                    if loc is None:
                        dead = True
                        break
                    cn, col = apply_cols(f, loc[0], {loc[1]: 1})
                    if not col:
                        dead = True
                        break
                    cols.append((cn, list(col.items())))
                if dead:
                    continue
                # class coordinates of the component-n argument
                ttb = Cd[1]
                pr = Cd[2]
                args = {}
                for combo in iproduct(*[c for _, c in cols]):
                    val = s1
                    tdegs, tidxs = [], []
                    for i2, (jj, x) in enumerate(combo):
                        val = val * x
                        tdegs.append(cols[i2][0])
                        tidxs.append(jj)
                    tloc = ttb.index((degs[0],) + tuple(tdegs),
                                     (idxs[0],) + tuple(tidxs))
                    if tloc is None:
                        continue
                    _, col = apply_cols(pr, tloc[0], {tloc[1]: val})
                    for ci, v in col.items():
                        w = args.get((tloc[0], ci), 0) + v
                        if w == 0:
                            args.pop((tloc[0], ci), None)
                        else:
                            args[(tloc[0], ci)] = w
                if not args:
                    continue
                ntb = N.action_tb(j - 1)
                nu = N.action(j - 1)
                fdegs = (degs[1 + n],) + tuple(degs[p] for p in fleaf)
                fidxs = (idxs[1 + n],) + tuple(idxs[p] for p in fleaf)
                for (p, ci), v in args.items():
                    for h, helems in hb.elems.items():
                        s2 = -1 if (h % 2 and fdeg % 2) else 1
                        for kdx, (hp, hi, hj) in enumerate(helems):
                            if hp != p or hj != ci:
                                continue
                            loc = ntb.index(fdegs + (p + h,),
                                            fidxs + (hi,))
                            if loc is None:
                                continue
                            _, ncol = apply_cols(nu, loc[0],
                                                 {loc[1]: s2 * v})
                            for i3, x in ncol.items():
                                t = hbig.index(h, sn, i3, spos)
                                if t is not None:
                                    ents.append((h, t, kdx, x))
        return GradedMap.from_entries(hb.space, hbig.space, 0, ents)

    def _build_action(self, A, carrier, kk):
        O = A.operad
        W = A.weight_cap
        N = self.target
        tbk = TensorBasis(
            [O.component(kk + 1).space] + [A.carrier.space] * kk
            + [carrier.space], weight_cap=W)
        ntb = N.action_tb(kk)
        nu = N.action(kk)
        ents = []
        for sn, es in tbk.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                # B: partial evaluation y |-> nu(o; b..., y) on N
                bents = []
                for dy in N.carrier.space.degrees():
                    for jy in range(N.carrier.space.dim(dy)):
                        loc = ntb.index(tuple(degs[:-1]) + (dy,),
                                        tuple(idxs[:-1]) + (jy,))
                        if loc is None:
                            continue
                        cn, col = apply_cols(nu, loc[0], {loc[1]: 1})
                        for i, x in col.items():
                            bents.append((dy, i, jy, x))
                bdeg = sum(degs[:-1])
                B = GradedMap.from_entries(
                    N.carrier.space, N.carrier.space, bdeg, bents)
                phis = self.component_map(degs[-1], {idxs[-1]: 1})
                tcol = {}
                for s, phi in enumerate(phis):
                    psi = B @ phi
                    coords = self.homs[s][1].coords_of(psi)
                    blk = self.projs[s].blocks.get(degs[-1] + bdeg)
                    # inject coords of summand s into the total space
                    inc_rows = {}
                    if blk is not None:
                        for i, row in blk.rows.items():
                            for j in row:
                                inc_rows[i] = j
                    for i, row in coords.rows.items():
                        x = row.get(0)
                        if x and i in inc_rows:
                            gi = inc_rows[i]
                            w = tcol.get(gi, 0) + x
                            if w == 0:
                                tcol.pop(gi, None)
                            else:
                                tcol[gi] = w
                # express in the subobject coordinates
                nn = degs[-1] + bdeg
                kb = self.include.blocks.get(nn)
                dimH = carrier.space.dim(nn)
                if not tcol:
                    continue
                if kb is None:
                    raise IllDefinedQuotient(
                        "hom action leaves the subobject")
                rhs = Mat.from_entries(kb.nrows, 1,
                                       ((i, 0, x) for i, x in
                                        tcol.items()))
                sol = kb.solve(rhs)
                if sol is None:
                    raise IllDefinedQuotient(
                        "hom action leaves the subobject")
                for i, row in sol.rows.items():
                    x = row.get(0)
                    if x:
                        ents.append((sn, i, spos, x))
        return GradedMap.from_entries(tbk.space, carrier.space, 0,
                                      ents)


def lax_hom(A, others, N):
    return LaxHom(A, others, N)


def transpose_to_hom(f, P, H):
    """Adjunction transpose of a module map f: P_A(M_1, M_2..M_m) -> N
    into a map M_1 -> H_A(M_2..M_m; N)."""
    M1 = P.mods[0]
    ents = []
    for dx in M1.carrier.space.degrees():
        for jx in range(M1.carrier.space.dim(dx)):
            tcol = {}
            for s, (Xn, tb, pr, sc, Cn) in enumerate(H.pieces):
                hb = H.homs[s][1]
                # phi_s(class(w; a...; m'...)) =
                #   (-1)^(|x|(|w| + sum |a|)) f(class(w; a..., x, m'...))
                for cd in Cn.space.degrees():
                    for ci in range(Cn.space.dim(cd)):
                        blks = sc.blocks.get(cd)
                        if blks is None:
                            continue
                        vals = {}
                        for gi, row in blks.rows.items():
                            x = row.get(ci)
                            if not x:
                                continue
                            degs, idxs = tb.elems[cd][gi]
                            n = len(degs) - H.m
                            sign = 1
                            if dx % 2 and sum(degs[:1 + n]) % 2:
                                sign = -sign
                            pdegs = degs[:1 + n] + (dx,) \
                                + degs[1 + n:]
                            pidxs = idxs[:1 + n] + (jx,) \
                                + idxs[1 + n:]
                            pcol = P.ambient_class(n, pdegs, pidxs)
                            _, fcol = apply_cols(f, cd + dx, pcol)
                            for i, v in fcol.items():
                                w = vals.get(i, 0) + sign * x * v
                                if w == 0:
                                    vals.pop(i, None)
                                else:
                                    vals[i] = w
                        for i, v in vals.items():
                            pos = hb.index(dx + f.degree, cd, i, ci)
                            if pos is None:
                                raise IllDefinedQuotient(
                                    "transpose outside hom window")
                            blk = H.projs[s].blocks.get(dx + f.degree)
                            row = blk.rows.get(pos, {}) if blk else {}
                            for gi2, w0 in row.items():
                                w = tcol.get(gi2, 0) + v * w0
                                if w == 0:
                                    tcol.pop(gi2, None)
                                else:
                                    tcol[gi2] = w
            nn = dx + f.degree
            kb = H.include.blocks.get(nn)
            if not tcol:
                continue
            if kb is None:
                raise IllDefinedQuotient("transpose not in subobject")
            rhs = Mat.from_entries(kb.nrows, 1,
                                   ((i, 0, x) for i, x in
                                    tcol.items()))
            sol = kb.solve(rhs)
            if sol is None:
                raise IllDefinedQuotient("transpose not in subobject")
            for i, row in sol.rows.items():
                x = row.get(0)
                if x:
                    ents.append((dx, i, jx, x))
    return GradedMap.from_entries(M1.carrier.space, H.carrier.space,
                                  f.degree, ents)


def transpose_from_hom(g, P, H):
    """Adjunction transpose of g: M_1 -> H_A(M_2..M_m; N) into a
    module map P_A(M_1, M_2..M_m) -> N."""
    N = H.target
    ents = []
    for pn in P.carrier.space.degrees():
        for pj in range(P.carrier.space.dim(pn)):
            out = {}
            for k, ((degs, idxs), val) in P.lift(pn, pj):
                n = k
                xslot = 1 + k
                dx, jx = degs[xslot], idxs[xslot]
                sign = 1
                if dx % 2 and sum(degs[:xslot]) % 2:
                    sign = -sign
                _, gc = apply_cols(g, dx, {jx: 1})
                if not gc:
                    continue
                phis = H.component_map(dx + g.degree, gc)
                phi = phis[k]
                cdegs = degs[:xslot] + degs[xslot + 1:]
                cidxs = idxs[:xslot] + idxs[xslot + 1:]
                Xn, tb, pr, sc, Cn = H.pieces[k]
                loc = tb.index(cdegs, cidxs)
                if loc is None:
                    continue
                _, ccol = apply_cols(pr, loc[0], {loc[1]: 1})
                for ci, cv in ccol.items():
                    _, ncol = apply_cols(phi, loc[0], {ci: cv})
                    for i, v in ncol.items():
                        w = out.get(i, 0) + sign * val * v
                        if w == 0:
                            out.pop(i, None)
                        else:
                            out[i] = w
            for i, v in out.items():
                ents.append((pn, i, pj, v))
    return GradedMap.from_entries(P.carrier.space, N.carrier.space,
                                  g.degree, ents)


# -- free algebras on a module ------------------------------------------

def symmetric_power(A, M, n, extras=()):
    """S^n_A(M, E_1..E_r): coinvariants of the n-fold lax product by
    the symmetry permuting the M factors."""
    return LaxProduct(A, [M] * n + list(extras), sym_count=n)


def _compose_star_terms(O, W, outer, parts, levels):
    """Substitute lifted lax-product terms into an outer operad
    element: compose the operad parts, sort the composed inputs into
    the ambient layout (A-leaves, M-leaves, then extra factors), and
    push into the matching symmetric-power level.

    outer: (deg, idx, val) of an element of O(len(parts)).
    parts: per input a term (lvl, ext, comp, (degs, idxs), val) from a
    level lift, whose tensor layout is [O] + A^comp + M^lvl + E^ext.
    levels: target levels indexed by total M-count.

    Returns a dict over the total carrier coordinates of the target
    level's own carrier, together with the level index, as
    (m, {(deg, idx): val}).  Raises TruncationExceeded if the needed
    operad arity leaves the cap."""
    o_deg, o_idx, o_val = outer
    nargs = len(parts)
    ws = tuple(p[2] + p[0] + p[1] for p in parts)
    K = sum(ws)
    if K > O.arity_cap:
        raise TruncationExceeded(
            "product of module-algebra elements leaves the arity cap")
    m = sum(p[0] for p in parts)
    ka = sum(p[2] for p in parts)
    g = O.gamma(nargs, ws) if nargs else None
    # flatten: (o, rho_1, leaves_1, ..., rho_n, leaves_n) and regroup
    # the operad parts to the front
    flat_degs = [o_deg]
    perm = [0]
    oppos = []
    leafpos = []
    pos = 1
    for p in parts:
        degs = p[3][0]
        oppos.append(pos)
        flat_degs.append(degs[0])
        pos += 1
        for dg in degs[1:]:
            flat_degs.append(dg)
            leafpos.append(pos)
            pos += 1
    perm = [0] + oppos + leafpos
    sign0 = reorder_sign(flat_degs, perm)
    val = o_val * sign0
    for p in parts:
        val = val * p[4]
    if val == 0:
        return m, {}
    opdegs = tuple(p[3][0][0] for p in parts)
    opidxs = tuple(p[3][1][0] for p in parts)
    if nargs:
        gtb = O.gamma_tb(nargs, ws)
        loc = gtb.index((o_deg,) + opdegs, (o_idx,) + opidxs)
        if loc is None:
            return m, {}
        gn, gp = loc
        blk = g.blocks.get(gn)
        if blk is None:
            return m, {}
        wcol = {r: row[gp] * val for r, row in blk.rows.items()
                if gp in row}
    else:
        gn, wcol = o_deg, {o_idx: val}
    if not wcol:
        return m, {}
    # tag the composed inputs: A's, then M's, then extras, blockwise
    tagged = []
    for i, p in enumerate(parts):
        lvl, ext, k, (degs, idxs), _ = p
        for t in range(k):
            tagged.append(((0, i, t), degs[1 + t], idxs[1 + t]))
        for t in range(lvl):
            tagged.append(((1, i, t), degs[1 + k + t],
                           idxs[1 + k + t]))
        for t in range(ext):
            tagged.append(((2, i, t), degs[1 + k + lvl + t],
                           idxs[1 + k + lvl + t]))
    items = [(key, dg) for key, dg, _ in tagged]
    wcol, _, sign = sort_operad_tensor(O, K, gn, wcol, items)
    order = sorted(tagged, key=lambda e: e[0])
    tdegs = tuple(e[1] for e in order)
    tidxs = tuple(e[2] for e in order)
    out = {}
    for r, x in wcol.items():
        col = levels[m].ambient_class(ka, (gn,) + tdegs,
                                      (r,) + tidxs)
        for gi, v in col.items():
            w = out.get(gi, 0) + sign * x * v
            if w == 0:
                out.pop(gi, None)
            else:
                out[gi] = w
    return m, out


class _LevelSum:
    """Direct sum of symmetric-power levels with coordinate lookup."""

    def __init__(self, levels):
        self.levels = levels
        total, incs, projs = direct_sum(
            [L.carrier.space for L in levels])
        self.space = total
        self.incs = incs
        self.projs = projs
        d = GradedMap.zero(total, total, 1)
        for s, L in enumerate(levels):
            d = d + incs[s] @ L.carrier.d @ projs[s]
        self.complex = Complex(total, d)
        self.locate = {}
        for s, inc in enumerate(incs):
            for n, blk in inc.blocks.items():
                for ti, row in blk.rows.items():
                    for li in row:
                        self.locate[(n, ti)] = (s, li)

    def inject(self, s, n, col):
        out = {}
        blk = self.incs[s].blocks.get(n)
        if blk is None:
            return out
        back = {}
        for ti, row in blk.rows.items():
            for li in row:
                back[li] = ti
        for li, v in col.items():
            out[back[li]] = v
        return out


class ModuleFreeAlgebra(OperadAlgebra):
    """S*_A(M): the free algebra over A on the module M, truncated at
    symmetric degree strunc; level n is S^n_A(M)."""

    def __init__(self, A, M, strunc):
        O = A.operad
        W = A.weight_cap
        self.base = A
        self.module = M
        self.strunc = strunc
        self.levels = [symmetric_power(A, M, n)
                       for n in range(strunc + 1)]
        self.lsum = _LevelSum(self.levels)
        # multiplications are kept up to the largest arity whose
        # composites stay inside the arity cap for every basis input
        mults = {}
        for k in range(O.arity_cap + 1):
            try:
                mults[k] = self._build_mult(k)
            except TruncationExceeded:
                break
        super().__init__(O, self.lsum.complex, mults, weight_cap=W)
        self.from_base = self._unit_inclusion(0, A.carrier.space, 1)
        self.from_module = self._unit_inclusion(1, M.carrier.space, 0)

    def _unit_inclusion(self, lvl, space, comp):
        """x -> class of [unit; x] in the given level and component."""
        O = self.base.operad
        u = O.unit()
        ents = []
        for n in space.degrees():
            for j in range(space.dim(n)):
                for r, row in u.blocks.get(0, Mat.zero(0, 1)).rows \
                        .items():
                    uv = row.get(0)
                    if not uv:
                        continue
                    col = self.levels[lvl].ambient_class(
                        comp, (0, n), (r, j))
                    tot = self.lsum.inject(lvl, n, col)
                    for gi, v in tot.items():
                        ents.append((n, gi, j, uv * v))
        return GradedMap.from_entries(space, self.lsum.space, 0, ents)

    def _parts_of(self, deg, idx):
        s, li = self.lsum.locate[(deg, idx)]
        terms = self.levels[s].lift(deg, li)
        return [(s, 0, k, key, v) for k, (key, v) in terms]

    def _build_mult(self, k):
        O = self.base.operad
        W = self.base.weight_cap
        tbk = TensorBasis([O.component(k).space]
                          + [self.lsum.space] * k, weight_cap=W)
        self._sources = getattr(self, "_sources", {})
        ents = []
        for sn, es in tbk.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                termlists = [self._parts_of(degs[1 + i], idxs[1 + i])
                             for i in range(k)]
                m = sum(self.lsum.locate[(degs[1 + i],
                                          idxs[1 + i])][0]
                        for i in range(k))
                if m > self.strunc:
                    continue
                acc = {}
                for combo in iproduct(*termlists):
                    lm, col = _compose_star_terms(
                        O, W, (degs[0], idxs[0], 1), list(combo),
                        self.levels)
                    tot = self.lsum.inject(lm, sn, col)
                    for gi, v in tot.items():
                        w = acc.get(gi, 0) + v
                        if w == 0:
                            acc.pop(gi, None)
                        else:
                            acc[gi] = w
                for gi, v in acc.items():
                    ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(tbk.space, self.lsum.space, 0,
                                      ents)


def module_free_algebra(A, M, strunc):
    return ModuleFreeAlgebra(A, M, strunc)


class ModuleFreeModule(AModule):
    """S*_A(M, E): the free S*_A(M)-module on the A-module E; level n
    is S^n_A(M, E)."""

    def __init__(self, S, E):
        A = S.base
        O = A.operad
        self.star = S
        self.emodule = E
        self.levels = [symmetric_power(A, S.module, n, extras=[E])
                       for n in range(S.strunc + 1)]
        self.lsum = _LevelSum(self.levels)
        actions = {}
        for n in range(O.arity_cap):
            try:
                actions[n] = self._build_action(n)
            except TruncationExceeded:
                break
        self.from_emodule = self._unit_inclusion(E.carrier.space)
        super().__init__(S, self.lsum.complex, actions,
                         weight_cap=A.weight_cap)

    def _unit_inclusion(self, space):
        O = self.star.base.operad
        u = O.unit()
        ents = []
        for n in space.degrees():
            for j in range(space.dim(n)):
                for r, row in u.blocks.get(0, Mat.zero(0, 1)).rows \
                        .items():
                    uv = row.get(0)
                    if not uv:
                        continue
                    col = self.levels[0].ambient_class(
                        0, (0, n), (r, j))
                    tot = self.lsum.inject(0, n, col)
                    for gi, v in tot.items():
                        ents.append((n, gi, j, uv * v))
        return GradedMap.from_entries(space, self.lsum.space, 0, ents)

    def _parts_of(self, deg, idx):
        s, li = self.lsum.locate[(deg, idx)]
        terms = self.levels[s].lift(deg, li)
        return [(s, 1, k - 0, key, v) for k, (key, v) in terms], s

    def _build_action(self, n):
        S = self.star
        O = S.base.operad
        W = S.base.weight_cap
        tbn = TensorBasis([O.component(n + 1).space]
                          + [S.carrier.space if hasattr(S, "carrier")
                             else S.lsum.space] * n
                          + [self.lsum.space], weight_cap=W)
        ents = []
        for sn, es in tbn.elems.items():
            for spos, (degs, idxs) in enumerate(es):
                termlists = [S._parts_of(degs[1 + i], idxs[1 + i])
                             for i in range(n)]
                last_terms, s_last = self._parts_of(degs[-1],
                                                    idxs[-1])
                m = s_last + sum(
                    S.lsum.locate[(degs[1 + i], idxs[1 + i])][0]
                    for i in range(n))
                if m > S.strunc:
                    continue
                acc = {}
                for combo in iproduct(*(termlists + [last_terms])):
                    # the lifted extra factor's component count: its
                    # tb is [O] + A^k + M^lvl + E, so k is stored
                    lm, col = _compose_star_terms(
                        O, W, (degs[0], idxs[0], 1), list(combo),
                        self.levels)
                    tot = self.lsum.inject(lm, sn, col)
                    for gi, v in tot.items():
                        w = acc.get(gi, 0) + v
                        if w == 0:
                            acc.pop(gi, None)
                        else:
                            acc[gi] = w
                for gi, v in acc.items():
                    ents.append((sn, gi, spos, v))
        return GradedMap.from_entries(tbn.space, self.lsum.space, 0,
                                      ents)


def module_free_module(S, E):
    return ModuleFreeModule(S, E)


# -- induced maps between lax products ----------------------------------

def is_module_morphism(f, E, N):
    """f(nu(o; a, e)) = +- nu(o; a, f e) for every available arity; the
    Koszul sign for odd f is supplied by the tensor insertion."""
    for n in sorted(set(E.actions) & set(N.actions)):
        tbn = E.action_tb(n)
        ins = tensor_map(tbn, [None] * (n + 1) + [f], N.action_tb(n))
        if f @ E.action(n) != N.action(n) @ ins:
            return False
    return True


def lax_transfer(P, Q):
    """The identity-induced map between two lax products with the same
    factor layout (for instance P_A(M, E) into S^1_A(M, E))."""
    ents = []
    for n in P.carrier.space.degrees():
        for idx in range(P.carrier.space.dim(n)):
            for k, ((degs, idxs), val) in P.lift(n, idx):
                col = Q.ambient_class(k, degs, idxs)
                for gi, v in col.items():
                    ents.append((n, gi, idx, val * v))
    return GradedMap.from_entries(P.carrier.space, Q.carrier.space, 0,
                                  ents)


def lax_insert(P, slot, f, FT, Q, placement=None):
    """One Leibniz summand of an induced map between lax products:
    apply f to the factor in the given slot and flatten its image
    (a class in the lax product FT) into the wider product Q.

    placement, when given, is a pair (outer, inner) of target factor
    indices for the surviving outer factors and for FT's factors; by
    default FT's factors replace the slot in place.  Individual
    summands are only canonical in derivation-style totals."""
    A = P.algebra
    O = A.operad
    m = len(P.mods)
    r = len(FT.mods)
    h = f.degree
    if placement is None:
        outer_tags = [j if j < slot else j - 1 + r
                      for j in range(m) if j != slot]
        inner_tags = [slot + t for t in range(r)]
    else:
        outer_tags, inner_tags = placement
    u = O.unit()
    uterms = [(ri, row[0]) for ri, row in u.blocks[0].rows.items()
              if 0 in row]
    ents = []
    for n in P.carrier.space.degrees():
        for idx in range(P.carrier.space.dim(n)):
            out = {}
            for k, ((degs, idxs), val) in P.lift(n, idx):
                jpos = 1 + k + slot
                fd, fcol = apply_cols(f, degs[jpos], {idxs[jpos]: 1})
                if not fcol:
                    continue
                pre = degs[0] + sum(degs[1:jpos])
                s_h = -1 if h % 2 and pre % 2 else 1
                for fi, fv in fcol.items():
                    for q, ((qdegs, qidxs), qv) in FT.lift(fd, fi):
                        if k + m - 1 + q + r > O.arity_cap:
                            raise TruncationExceeded(
                                "lax insertion leaves the arity cap")
                        col = _insert_compose(
                            O, Q, k, m, r, slot, degs, idxs,
                            qdegs, qidxs, uterms, outer_tags,
                            inner_tags)
                        c = val * fv * qv * s_h
                        for gi, v in col.items():
                            w = out.get(gi, 0) + c * v
                            if w == 0:
                                out.pop(gi, None)
                            else:
                                out[gi] = w
            for gi, v in out.items():
                ents.append((n, gi, idx, v))
    return GradedMap.from_entries(P.carrier.space, Q.carrier.space, h,
                                  ents)


def _insert_compose(O, Q, k, m, r, slot, degs, idxs, qdegs, qidxs,
                    uterms, outer_tags, inner_tags):
    """Compose the inner operad part into the outer one at the slot,
    sort the combined inputs into Q's ambient layout, and return the
    resulting carrier column."""
    jpos = 1 + k + slot
    q = len(qdegs) - 1 - r
    tdeg, tidx = qdegs[0], qidxs[0]
    # the inner operad element moves left past the factors between the
    # outer operad part and its slot
    sign = -1 if tdeg % 2 and sum(degs[1:jpos]) % 2 else 1
    ms = (1,) * (k + slot) + (q + r,) + (1,) * (m - 1 - slot)
    g = O.gamma(k + m, ms)
    gtb = O.gamma_tb(k + m, ms)
    flat = []
    for i in range(k):
        flat.append(((0, i), degs[1 + i], idxs[1 + i]))
    oseq = 0
    for j in range(m):
        if j == slot:
            for t in range(q):
                flat.append(((0, k + t), qdegs[1 + t], qidxs[1 + t]))
            for t in range(r):
                flat.append(((1, inner_tags[t]), qdegs[1 + q + t],
                             qidxs[1 + q + t]))
        else:
            flat.append(((1, outer_tags[oseq]), degs[1 + k + j],
                         idxs[1 + k + j]))
            oseq += 1
    K = k + m - 1 + q + r
    out = {}
    for uvec in iproduct(uterms, repeat=k + m - 1):
        uval = sign
        for _, uv in uvec:
            uval = uval * uv
        uis = tuple(ri for ri, _ in uvec)
        sdegs = (degs[0],) + (0,) * (k + slot) + (tdeg,) \
            + (0,) * (m - 1 - slot)
        sidxs = (idxs[0],) + uis[:k + slot] + (tidx,) \
            + uis[k + slot:]
        loc = gtb.index(sdegs, sidxs)
        if loc is None:
            continue
        gn, gp = loc
        blk = g.blocks.get(gn)
        if blk is None:
            continue
        wcol = {ri: row[gp] * uval for ri, row in blk.rows.items()
                if gp in row}
        if not wcol:
            continue
        items = [(key, dg) for key, dg, _ in flat]
        wcol, _, s2 = sort_operad_tensor(O, K, gn, wcol, items)
        order = sorted(flat, key=lambda e: e[0])
        tdegs = tuple(e[1] for e in order)
        tidxs = tuple(e[2] for e in order)
        for ri, gx in wcol.items():
            col = Q.ambient_class(k + q, (gn,) + tdegs, (ri,) + tidxs)
            for gi, v in col.items():
                w = out.get(gi, 0) + s2 * gx * v
                if w == 0:
                    out.pop(gi, None)
                else:
                    out[gi] = w
    return out


def lax_leibniz(P, dmap, Q):
    """Sum over A-input positions of turning that input into a module
    factor through dmap: P_A(X_1..X_m) -> Q = P_A(N, X_1..X_m) where N
    is the target module of dmap.  The new factor lands in target
    index 0 and the old factors shift up by one."""
    O = P.algebra.operad
    m = len(P.mods)
    ents = []
    for n in P.carrier.space.degrees():
        for idx in range(P.carrier.space.dim(n)):
            out = {}
            for k, ((degs, idxs), val) in P.lift(n, idx):
                for p in range(k):
                    md, mcol = apply_cols(dmap, degs[1 + p],
                                          {idxs[1 + p]: 1})
                    if not mcol:
                        continue
                    pre = degs[0] + sum(degs[1:1 + p])
                    sd = -1 if dmap.degree % 2 and pre % 2 else 1
                    items = []
                    seq = 0
                    for j in range(k):
                        if j == p:
                            items.append(((1, 0), md))
                        else:
                            items.append(((0, seq), degs[1 + j]))
                            seq += 1
                    for t in range(m):
                        items.append(((1, 1 + t), degs[1 + k + t]))
                    wcol, _, s2 = sort_operad_tensor(
                        O, k + m, degs[0], {idxs[0]: 1}, items)
                    rest_d = tuple(degs[1 + j] for j in range(k)
                                   if j != p)
                    rest_i = tuple(idxs[1 + j] for j in range(k)
                                   if j != p)
                    for ri, gx in wcol.items():
                        for mi, mv in mcol.items():
                            col = Q.ambient_class(
                                k - 1,
                                (degs[0],) + rest_d + (md,)
                                + degs[1 + k:],
                                (ri,) + rest_i + (mi,)
                                + idxs[1 + k:])
                            c = sd * s2 * val * gx * mv
                            for gi, v in col.items():
                                w = out.get(gi, 0) + c * v
                                if w == 0:
                                    out.pop(gi, None)
                                else:
                                    out[gi] = w
            for gi, v in out.items():
                ents.append((n, gi, idx, v))
    return GradedMap.from_entries(P.carrier.space, Q.carrier.space,
                                  dmap.degree, ents)


def lax_slot_derivation(P, amap, fmaps):
    """Slotwise Leibniz sum of endomorphism insertions on a lax
    product: amap on each A-input, fmaps[j] on the j-th factor (None
    skips a slot); again only the full sum is canonical."""
    degset = {g.degree for g in [amap] + list(fmaps) if g is not None}
    if len(degset) != 1:
        raise DimensionError("slot derivation maps must share a degree")
    h = degset.pop()
    ents = []
    for n in P.carrier.space.degrees():
        for idx in range(P.carrier.space.dim(n)):
            out = {}
            for k, ((degs, idxs), val) in P.lift(n, idx):
                for p in range(1, len(degs)):
                    f = amap if p <= k else fmaps[p - 1 - k]
                    if f is None:
                        continue
                    fd, fcol = apply_cols(f, degs[p], {idxs[p]: 1})
                    if not fcol:
                        continue
                    pre = degs[0] + sum(degs[1:p])
                    s = -1 if h % 2 and pre % 2 else 1
                    ndegs = degs[:p] + (fd,) + degs[p + 1:]
                    for fi, fv in fcol.items():
                        nidxs = idxs[:p] + (fi,) + idxs[p + 1:]
                        col = P.ambient_class(k, ndegs, nidxs)
                        c = s * val * fv
                        for gi, v in col.items():
                            w = out.get(gi, 0) + c * v
                            if w == 0:
                                out.pop(gi, None)
                            else:
                                out[gi] = w
            for gi, v in out.items():
                ents.append((n, gi, idx, v))
    return GradedMap.from_entries(P.carrier.space, P.carrier.space, h,
                                  ents)


def leibniz_insert(P, dmap, odeg, oidx, adegs, aidxs, last):
    """Column over the carrier of P = P_A(M, X) for the Leibniz sum
    sum_p (o; a_1 .. d(a_p) .. a_n, x): the derivation turns one
    A-input into an M-input, which is then sorted into the ambient
    layout.  last = (degree, [(index, value), ...]) gives the X slot."""
    O = P.algebra.operad
    n = len(adegs)
    xdeg, xterms = last
    out = {}
    for p in range(n):
        md, mcol = apply_cols(dmap, adegs[p], {aidxs[p]: 1})
        if not mcol:
            continue
        pre = odeg + sum(adegs[:p])
        sd = -1 if dmap.degree % 2 and pre % 2 else 1
        items = []
        seq = 0
        for j in range(n):
            if j == p:
                items.append(((1, 0), md))
            else:
                items.append(((0, seq), adegs[j]))
                seq += 1
        items.append(((2, 0), xdeg))
        wcol, _, s2 = sort_operad_tensor(O, n + 1, odeg, {oidx: 1},
                                         items)
        rest_d = tuple(adegs[j] for j in range(n) if j != p)
        rest_i = tuple(aidxs[j] for j in range(n) if j != p)
        for ri, gx in wcol.items():
            for mi, mv in mcol.items():
                for xi, xv in xterms:
                    col = P.ambient_class(
                        n - 1, (odeg,) + rest_d + (md, xdeg),
                        (ri,) + rest_i + (mi, xi))
                    c = sd * s2 * gx * mv * xv
                    for gi, v in col.items():
                        w = out.get(gi, 0) + c * v
                        if w == 0:
                            out.pop(gi, None)
                        else:
                            out[gi] = w
    return out
