"""Truncated S-modules and operads with exhaustively checkable axioms.

An Operad stores components O(n) for n up to an arity cap, right S_n
actions given on adjacent transpositions and composed on demand, and
the simultaneous composition law gamma_{n; m_1..m_n} defined whenever
n <= cap and sum(m_i) <= cap.  Partial compositions are derived by
inserting units.

Built in: the associative operad (components 1^(S_n), composition by
the block-permutation formula), the commutative operad (components 1),
and the endomorphism operad of a complex V (components hom(V^(x)n, V),
composition of maps)."""

from .complexes import Complex, inner_hom, is_chain_map, tensor_complex
from .errors import DimensionError, TruncationExceeded
from .graded import GradedMap, GradedSpace
from .linalg import Mat
from .permutations import Perm, act_on_factors, block_perm, perm_sum
from .tensors import (TensorBasis, expand_map, grouped_tensor_map,
                      shuffle_map, tensor_map)


def compositions(length, total_max, entry_max=None):
    """All tuples of `length` non-negative ints with sum <= total_max."""
    if entry_max is None:
        entry_max = total_max
    if length == 0:
        yield ()
        return
    for first in range(0, min(total_max, entry_max) + 1):
        for rest in compositions(length - 1, total_max - first, entry_max):
            yield (first,) + rest


class Operad:

    def __init__(self, arity_cap):
        self.arity_cap = arity_cap
        self.unit_space = GradedSpace.line(0, "1")
        self._components = {}
        self._gen_actions = {}
        self._actions = {}
        self._gammas = {}
        self._gamma_tbs = {}

    # subclasses implement these three
    def _build_component(self, n):
        raise NotImplementedError

    def _build_gen_action(self, n, i):
        raise NotImplementedError

    def _build_gamma(self, n, ms):
        raise NotImplementedError

    def unit(self):
        """Chain map 1 -> O(1)."""
        raise NotImplementedError

    def component(self, n):
        if n < 0 or n > self.arity_cap:
            raise TruncationExceeded("arity %d beyond cap %d"
                                     % (n, self.arity_cap))
        if n not in self._components:
            self._components[n] = self._build_component(n)
        return self._components[n]

    def gen_action(self, n, i):
        key = (n, i)
        if key not in self._gen_actions:
            self._gen_actions[key] = self._build_gen_action(n, i)
        return self._gen_actions[key]

    def action(self, n, sigma):
        """Right action of sigma on O(n)."""
        if len(sigma) != n:
            raise DimensionError("degree of permutation mismatch")
        key = (n, sigma.images)
        if key not in self._actions:
            sp = self.component(n).space
            acc = GradedMap.identity(sp)
            for i in sigma.adjacent_word():
                acc = self.gen_action(n, i) @ acc
            self._actions[key] = acc
        return self._actions[key]

    def components_tb(self, arities):
        """Cached TensorBasis of a tuple of components."""
        key = tuple(arities)
        if key not in self._gamma_tbs:
            self._gamma_tbs[key] = TensorBasis(
                [self.component(a).space for a in key])
        return self._gamma_tbs[key]

    def gamma_tb(self, n, ms):
        return self.components_tb((n,) + tuple(ms))

    def gamma_source(self, n, ms):
        """The source complex of gamma as a tensor of components."""
        cs = [self.component(n)] + [self.component(m) for m in ms]
        return tensor_complex(cs)

    def gamma(self, n, ms):
        ms = tuple(ms)
        m = sum(ms)
        if n > self.arity_cap or m > self.arity_cap:
            raise TruncationExceeded(
                "gamma(%d; %s) beyond arity cap %d" % (n, ms, self.arity_cap))
        key = (n, ms)
        if key not in self._gammas:
            self._gammas[key] = self._build_gamma(n, ms)
        return self._gammas[key]

    def max_component_arity(self):
        return self.arity_cap


class AssOperad(Operad):
    """Components 1^(S_n); e_sigma . tau = e_(sigma tau); composition
    gamma(e_sigma; e_tau1 .. e_taun) = e_(sigma_blocks o (tau1+..+taun))."""

    name = "ass"

    def __init__(self, arity_cap):
        super().__init__(arity_cap)
        from itertools import permutations as iperms
        self._perms = {}
        self._pindex = {}
        for n in range(arity_cap + 1):
            ps = [Perm(p) for p in iperms(range(1, n + 1))]
            ps.sort(key=lambda p: p.images)
            self._perms[n] = ps
            self._pindex[n] = {p.images: k for k, p in enumerate(ps)}

    def _build_component(self, n):
        ps = self._perms[n]
        sp = GradedSpace({0: len(ps)},
                         {0: tuple("e%s" % (p.images,) for p in ps)})
        return Complex(sp)

    def _build_gen_action(self, n, i):
        sp = self.component(n).space
        t = Perm.transposition(n, i)
        ents = [(0, self._pindex[n][(p * t).images], k, 1)
                for k, p in enumerate(self._perms[n])]
        return GradedMap.from_entries(sp, sp, 0, ents)

    def _build_gamma(self, n, ms):
        tb = self.gamma_tb(n, ms)
        m = sum(ms)
        tgt = self.component(m).space
        ents = []
        for spos, (degs, idxs) in enumerate(tb.elements(0)):
            sigma = self._perms[n][idxs[0]]
            taus = [self._perms[ms[i]][idxs[1 + i]] for i in range(n)]
            res = block_perm(sigma, ms) * perm_sum(taus)
            ents.append((0, self._pindex[m][res.images], spos, 1))
        return GradedMap.from_entries(tb.space, tgt, 0, ents)

    def unit(self):
        return GradedMap.from_entries(self.unit_space,
                                      self.component(1).space, 0,
                                      [(0, 0, 0, 1)])


class ComOperad(Operad):
    """Components 1 with trivial actions; composition the unit laws."""

    name = "com"

    def _build_component(self, n):
        return Complex(GradedSpace.line(0, "c%d" % n))

    def _build_gen_action(self, n, i):
        sp = self.component(n).space
        return GradedMap.identity(sp)

    def _build_gamma(self, n, ms):
        tb = self.gamma_tb(n, ms)
        tgt = self.component(sum(ms)).space
        return GradedMap.from_entries(tb.space, tgt, 0, [(0, 0, 0, 1)])

    def unit(self):
        return GradedMap.from_entries(self.unit_space,
                                      self.component(1).space, 0,
                                      [(0, 0, 0, 1)])


class EndOperad(Operad):
    """End_V(n) = hom(V^(x)n, V) with composition of maps."""

    name = "end"

    def __init__(self, V, arity_cap, window=None):
        super().__init__(arity_cap)
        self.V = V
        self.window = window
        self._powers = {}
        self._homs = {}

    def power(self, n):
        """(Complex, TensorBasis) of V^(x)n."""
        if n not in self._powers:
            self._powers[n] = tensor_complex([self.V] * n,
                                             window=self.window)
        return self._powers[n]

    def hom_basis(self, n):
        self.component(n)
        return self._homs[n]

    def _build_component(self, n):
        P, _ = self.power(n)
        H, hb = inner_hom(P, self.V, window=self.window)
        self._homs[n] = hb
        return H

    def _build_gen_action(self, n, i):
        H = self.component(n)
        hb = self._homs[n]
        _, tbn = self.power(n)
        S = act_on_factors(Perm.transposition(n, i), tbn)
        ents = []
        for hn in sorted(hb.elems):
            for k in range(len(hb.elems[hn])):
                col = Mat.from_entries(len(hb.elems[hn]), 1, [(k, 0, 1)])
                f = hb.map_of(hn, col)
                g = f @ S
                cc = hb.coords_of(g)
                for r, row in cc.rows.items():
                    ents.append((hn, r, k, row[0]))
        return GradedMap.from_entries(H.space, H.space, 0, ents)

    def _build_gamma(self, n, ms):
        tb = self.gamma_tb(n, ms)
        m = sum(ms)
        Hm = self.component(m)
        hbm = self._homs[m]
        _, tbm = self.power(m)
        self._ensure_homs(n, ms)
        ents = []
        # iterate over tuples of inner maps, then over the outer map
        from itertools import product as iproduct
        inner_bases = []
        for mi in ms:
            hb = self.hom_basis(mi)
            items = []
            for hn in sorted(hb.elems):
                for k in range(len(hb.elems[hn])):
                    col = Mat.from_entries(len(hb.elems[hn]), 1, [(k, 0, 1)])
                    items.append((hn, k, hb.map_of(hn, col)))
            inner_bases.append(items)
        outer_hb = self.hom_basis(n)
        outer_items = []
        for hn in sorted(outer_hb.elems):
            for k in range(len(outer_hb.elems[hn])):
                col = Mat.from_entries(len(outer_hb.elems[hn]), 1,
                                       [(k, 0, 1)])
                outer_items.append((hn, k, outer_hb.map_of(hn, col)))
        block_tbs = [self.power(mi)[1] for mi in ms]
        for gcombo in iproduct(*inner_bases):
            G = grouped_tensor_map(
                tbm, 0, block_tbs, [g[2] for g in gcombo],
                self.power(n)[1])
            for (fn, fk, fmap) in outer_items:
                comp = fmap @ G
                cc = hbm.coords_of(comp)
                if cc.is_zero():
                    continue
                src = (fn,) + tuple(g[0] for g in gcombo)
                sidx = (fk,) + tuple(g[1] for g in gcombo)
                loc = tb.index(src, sidx)
                if loc is None:
                    continue
                sn, spos = loc
                for r, row in cc.rows.items():
                    ents.append((sn, r, spos, row[0]))
        return GradedMap.from_entries(tb.space, Hm.space, 0, ents)

    def _ensure_homs(self, n, ms):
        for k in (n,) + tuple(ms):
            self.component(k)
        return ms

    def unit(self):
        hb = self.hom_basis(1)
        _, tb1 = self.power(1)
        ident = GradedMap.identity(self.power(1)[0].space)
        # hom(V^(x)1, V): identify the power with V itself
        cc = hb.coords_of(ident)
        ents = [(0, r, 0, row[0]) for r, row in cc.rows.items()]
        return GradedMap.from_entries(self.unit_space,
                                      self.component(1).space, 0, ents)


class TableOperad(Operad):
    """Operad given by explicit tables (loaded from definition files)."""

    name = "table"

    def __init__(self, arity_cap, components, gen_actions, gammas, unit_map):
        super().__init__(arity_cap)
        self._components = dict(components)
        self._gen_actions = dict(gen_actions)
        self._gammas = dict(gammas)
        self._unit = unit_map

    def _build_component(self, n):
        raise DimensionError("component %d missing from table" % n)

    def _build_gen_action(self, n, i):
        raise DimensionError("action generator (%d,%d) missing" % (n, i))

    def _build_gamma(self, n, ms):
        raise DimensionError("gamma(%d;%s) missing from table" % (n, ms))

    def unit(self):
        return self._unit


class AxiomReport:
    """List of failed diagrams, each a (diagram id, detail) pair."""

    def __init__(self):
        self.failures = []

    def ok(self):
        return not self.failures

    def add(self, diagram, detail):
        self.failures.append((diagram, detail))

    def __repr__(self):
        if self.ok():
            return "AxiomReport(ok)"
        return "AxiomReport(%d failures: %s...)" % (
            len(self.failures), self.failures[:3])


def unit_insertion(O, n, ms):
    """The iso-with-units map O(n) -> O(n) (x) O(1)^(x)n followed by
    nothing: returns the map O(n) -> gamma source for ms = (1,..,1)."""
    tb = O.gamma_tb(n, ms)
    sp = O.component(n).space
    eta = O.unit()
    tbu = TensorBasis([sp] + [O.unit_space] * n)
    inc = GradedMap.from_entries(
        sp, tbu.space, 0,
        ((deg, tbu.index((deg,) + (0,) * n, (idx,) + (0,) * n)[1], idx, 1)
         for (deg, idx) in sp.basis()))
    ins = tensor_map(tbu, [None] + [eta] * n, tb)
    return ins @ inc


def left_unit_insertion(O, m):
    """O(m) -> O(1) (x) O(m) gamma source via the unit."""
    sp = O.component(m).space
    tb = O.gamma_tb(1, (m,))
    tbu = TensorBasis([O.unit_space, sp])
    inc = GradedMap.from_entries(
        sp, tbu.space, 0,
        ((deg, tbu.index((0, deg), (0, idx))[1], idx, 1)
         for (deg, idx) in sp.basis()))
    ins = tensor_map(tbu, [O.unit(), None], tb)
    return ins @ inc


def check_actions(O, report, cap):
    for n in range(2, cap + 1):
        C = O.component(n)
        gens = [O.gen_action(n, i) for i in range(1, n)]
        for i, g in enumerate(gens, start=1):
            if not is_chain_map(g, C, C):
                report.add("action-chain-map", (n, i))
            if g @ g != GradedMap.identity(C.space):
                report.add("action-involution", (n, i))
        for i in range(len(gens)):
            for j in range(i + 2, len(gens)):
                if gens[i] @ gens[j] != gens[j] @ gens[i]:
                    report.add("action-commute", (n, i + 1, j + 1))
        for i in range(len(gens) - 1):
            lhs = gens[i] @ gens[i + 1] @ gens[i]
            rhs = gens[i + 1] @ gens[i] @ gens[i + 1]
            if lhs != rhs:
                report.add("action-braid", (n, i + 1))


def check_units(O, report, cap):
    for n in range(0, cap + 1):
        sp = O.component(n).space
        route = O.gamma(n, (1,) * n) @ unit_insertion(O, n, (1,) * n)
        if route != GradedMap.identity(sp):
            report.add("unit-right", (n,))
        route = O.gamma(1, (n,)) @ left_unit_insertion(O, n)
        if route != GradedMap.identity(sp):
            report.add("unit-left", (n,))


def check_equivariance(O, report, cap):
    from itertools import permutations as iperms
    for n in range(0, cap + 1):
        for ms in compositions(n, cap):
            g = O.gamma(n, ms)
            m = sum(ms)
            tb = O.gamma_tb(n, ms)
            for pi in iperms(range(1, n + 1)):
                sigma = Perm(pi)
                if sigma.is_identity():
                    continue
                pm = tuple(ms[sigma(j) - 1] for j in range(1, n + 1))
                tb_mid = O.gamma_tb(n, pm)
                step1 = tensor_map(
                    tb, [O.action(n, sigma)] + [None] * n, tb)
                perm = (0,) + tuple(sigma(j) for j in range(1, n + 1))
                step2 = shuffle_map(tb, perm, tb_mid)
                lhs = O.gamma(n, pm) @ step2 @ step1
                rhs = O.action(m, block_perm(sigma, pm)) @ g
                if lhs != rhs:
                    report.add("equivariance-sigma", (n, ms, pi))
            # inner actions: generators of each S_(m_i) suffice
            for i in range(n):
                for t in range(1, ms[i]):
                    taus = [Perm.identity(mm) for mm in ms]
                    taus[i] = Perm.transposition(ms[i], t)
                    maps = [None] + [
                        O.action(ms[j], taus[j]) if j == i else None
                        for j in range(n)]
                    step = tensor_map(tb, maps, tb)
                    lhs = g @ step
                    rhs = O.action(m, perm_sum(taus)) @ g
                    if lhs != rhs:
                        report.add("equivariance-tau", (n, ms, i + 1, t))


def check_associativity(O, report, cap):
    """Element-wise evaluation of both associativity routes.

    Every gamma is a degree-0 chain map, so route 1 (inner compositions
    first) picks up no Koszul signs; route 2 (outer composition first)
    only needs the sign of the shuffle moving the inner arguments past
    the other outer arguments."""
    from itertools import product as iproduct
    basis_cache = {}

    def basis_of(a):
        if a not in basis_cache:
            basis_cache[a] = list(O.component(a).space.basis())
        return basis_cache[a]

    def col_of(gmap, tb, degs, idxs):
        loc = tb.index(degs, idxs)
        if loc is None:
            return ()
        sn, spos = loc
        blk = gmap.blocks.get(sn)
        if blk is None:
            return ()
        return tuple((sn, r, row[spos]) for r, row in blk.rows.items()
                     if spos in row)

    for n in range(1, cap + 1):
        for ms in compositions(n, cap):
            m = sum(ms)
            g_nm = O.gamma(n, ms)
            tb_nm = O.gamma_tb(n, ms)
            for ls in _l_tuples(ms, cap):
                lis = tuple(sum(x) for x in ls)
                flat_ls = tuple(x for li in ls for x in li)
                g_out1 = O.gamma(n, lis)
                tb_out1 = O.gamma_tb(n, lis)
                g_fin = O.gamma(m, flat_ls)
                tb_fin = O.gamma_tb(m, flat_ls)
                # per block i, group the choices of (b_i, c_i1..c_ik) by
                # b_i, with the inner gamma column computed once each:
                # choices[i][b_i] = [(cdeg, cs, inner column), ...]
                choices = []
                for i in range(n):
                    g_in = O.gamma(ms[i], ls[i])
                    tb_in = O.gamma_tb(ms[i], ls[i])
                    by_b = {}
                    for b in basis_of(ms[i]):
                        lst = []
                        for cs in iproduct(*[basis_of(x) for x in ls[i]]):
                            degs = (b[0],) + tuple(e[0] for e in cs)
                            idxs = (b[1],) + tuple(e[1] for e in cs)
                            col = col_of(g_in, tb_in, degs, idxs)
                            lst.append((sum(e[0] for e in cs), cs, col))
                        by_b[b] = lst
                    choices.append(by_b)
                bad = None
                for o in basis_of(n):
                    if bad:
                        break
                    for bs in iproduct(*[basis_of(ms[i])
                                         for i in range(n)]):
                        odegs = (o[0],) + tuple(b[0] for b in bs)
                        oidxs = (o[1],) + tuple(b[1] for b in bs)
                        col_nm = col_of(g_nm, tb_nm, odegs, oidxs)
                        bsuf = [0] * (n + 1)
                        for i in range(n - 1, -1, -1):
                            bsuf[i] = bsuf[i + 1] + bs[i][0]
                        for pick in iproduct(*[choices[i][bs[i]]
                                               for i in range(n)]):
                            # route 1: inner gammas then gamma(n; l's)
                            r1 = {}
                            inner_cols = [p[2] for p in pick]
                            if all(inner_cols):
                                partial = [((o[0],), (o[1],), 1)]
                                for col in inner_cols:
                                    partial = [
                                        (dg + (cd,), ix + (ci,), v * cv)
                                        for (dg, ix, v) in partial
                                        for (cd, ci, cv) in col]
                                for dg, ix, val in partial:
                                    for (tn, r, x) in col_of(
                                            g_out1, tb_out1, dg, ix):
                                        key = (tn, r)
                                        v = r1.get(key, 0) + val * x
                                        if v == 0:
                                            r1.pop(key, None)
                                        else:
                                            r1[key] = v
                            # route 2: shuffle the inner arguments past
                            # the later outer arguments, gamma(n; m),
                            # then gamma(m; flat l's)
                            r2 = {}
                            sign = 1
                            for i in range(n):
                                if pick[i][0] % 2 and bsuf[i + 1] % 2:
                                    sign = -sign
                            cs = tuple(e for p in pick for e in p[1])
                            cdegs = tuple(e[0] for e in cs)
                            cidxs = tuple(e[1] for e in cs)
                            for (tn, r, x) in col_nm:
                                for (fn, fr, y) in col_of(
                                        g_fin, tb_fin,
                                        (tn,) + cdegs, (r,) + cidxs):
                                    key = (fn, fr)
                                    v = r2.get(key, 0) + sign * x * y
                                    if v == 0:
                                        r2.pop(key, None)
                                    else:
                                        r2[key] = v
                            if r1 != r2:
                                bad = (n, ms, ls)
                                break
                        if bad:
                            break
                if bad is not None:
                    report.add("associativity", bad)


def _l_tuples(ms, cap):
    """All tuples (ls_1, .., ls_n) of compositions with total sum <= cap."""
    if not ms:
        yield ()
        return
    first, rest = ms[0], ms[1:]
    for head in compositions(first, cap):
        for tail in _l_tuples(rest, cap - sum(head)):
            yield (head,) + tail


def check_operad(O, cap=None):
    """Exhaustive axiom check within the arity cap; empty report iff
    all diagrams commute exactly."""
    if cap is None:
        cap = O.arity_cap
    report = AxiomReport()
    for n in range(0, cap + 1):
        O.component(n)  # constructing asserts the differential squares
    u = O.unit()
    if not is_chain_map(u, Complex.unit(), O.component(1)):
        report.add("unit-chain-map", ())
    check_actions(O, report, cap)
    check_units(O, report, cap)
    for n in range(0, cap + 1):
        for ms in compositions(n, cap):
            g = O.gamma(n, ms)
            src, _ = O.gamma_source(n, ms)
            if not is_chain_map(g, src, O.component(sum(ms))):
                report.add("gamma-chain-map", (n, ms))
    check_equivariance(O, report, cap)
    check_associativity(O, report, cap)
    return report
