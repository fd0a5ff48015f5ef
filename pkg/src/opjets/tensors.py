"""Ordered bases for tensor products of graded spaces.

A TensorBasis enumerates the basis of X_1 (x) ... (x) X_k as tuples of
factor basis vectors, grouped by total degree, in lexicographic order of
the factor (degree, index) pairs.  An optional weight cap drops basis
tuples whose summed weight exceeds the cap; maps built through the basis
then silently project onto the truncated quotient, which is legitimate
exactly when (as everywhere in this engine) all structure maps are
weight-non-decreasing.

All Koszul signs for maps of nonzero degree acting on tensor factors are
produced here; nothing else in the engine introduces signs by hand.
"""

from itertools import product as iproduct

from .errors import DimensionError, TruncationExceeded
from .graded import GradedMap, GradedSpace
from .linalg import Mat


class TensorBasis:

    __slots__ = ("factors", "weight_cap", "elems", "pos", "space")

    def __init__(self, factors, weight_cap=None, window=None):
        self.factors = list(factors)
        self.weight_cap = weight_cap
        elems = {}

        def rec(i, degs, idxs, deg, wt):
            if self.weight_cap is not None and wt > self.weight_cap:
                return
            if i == len(self.factors):
                if window is not None and not (window[0] <= deg <= window[1]):
                    raise TruncationExceeded(
                        "tensor basis element in degree %d outside window %s"
                        % (deg, (window,)))
                elems.setdefault(deg, []).append((tuple(degs), tuple(idxs)))
                return
            f = self.factors[i]
            for n in f.degrees():
                for j in range(f.dims[n]):
                    degs.append(n)
                    idxs.append(j)
                    rec(i + 1, degs, idxs, deg + n, wt + f.weight(n, j))
                    degs.pop()
                    idxs.pop()

        rec(0, [], [], 0, 0)
        self.elems = elems
        self.pos = {}
        dims, weights = {}, {}
        for n in sorted(elems):
            es = elems[n]
            dims[n] = len(es)
            wts = []
            for k, (degs, idxs) in enumerate(es):
                self.pos[(degs, idxs)] = (n, k)
                wts.append(sum(
                    self.factors[i].weight(degs[i], idxs[i])
                    for i in range(len(self.factors))))
            weights[n] = tuple(wts)
        self.space = GradedSpace(dims, weights=weights)

    def element_label(self, n, k):
        degs, idxs = self.elems[n][k]
        return "|".join(self.factors[i].label(degs[i], idxs[i])
                        for i in range(len(self.factors))) or "()"

    def index(self, degs, idxs):
        return self.pos.get((tuple(degs), tuple(idxs)))

    def elements(self, n):
        return self.elems.get(n, [])


def tensor_map(tb_src, maps, tb_tgt):
    """(f_1 (x) ... (x) f_k) with Koszul signs.

    maps[i] is a GradedMap from tb_src.factors[i] to tb_tgt.factors[i],
    or None for the identity.  Sign on a source tuple of degrees p_i is
    (-1)^(sum_i deg(f_i) * (p_1 + ... + p_{i-1})).  Images falling out of
    tb_tgt's weight cap are projected away."""
    k = len(tb_src.factors)
    if len(maps) != k or len(tb_tgt.factors) != k:
        raise DimensionError("tensor_map factor count mismatch")
    degs_of = [0 if m is None else m.degree for m in maps]
    total_deg = sum(degs_of)
    entries = []
    for n, es in tb_src.elems.items():
        for spos, (degs, idxs) in enumerate(es):
            sign = 1
            acc = 0
            cols = []
            dead = False
            for i in range(k):
                m = maps[i]
                if m is None:
                    cols.append([(degs[i], idxs[i], 1)])
                else:
                    if degs_of[i] * acc % 2 == 1:
                        sign = -sign
                    blk = m.blocks.get(degs[i])
                    if blk is None:
                        dead = True
                        break
                    col = [(degs[i] + m.degree, r, row.get(idxs[i]))
                           for r, row in blk.rows.items()
                           if row.get(idxs[i])]
                    if not col:
                        dead = True
                        break
                    cols.append(col)
                acc += degs[i]
            if dead:
                continue
            for combo in iproduct(*cols):
                tdegs = tuple(c[0] for c in combo)
                tidxs = tuple(c[1] for c in combo)
                loc = tb_tgt.index(tdegs, tidxs)
                if loc is None:
                    continue
                val = sign
                for c in combo:
                    val = val * c[2]
                tn, tpos = loc
                entries.append((n, tpos, spos, val))
    return GradedMap.from_entries(tb_src.space, tb_tgt.space,
                                  total_deg, entries)


def shuffle_map(tb_src, perm, tb_tgt):
    """Reorder tensor factors: target slot j holds source factor perm[j].

    Pure Koszul-sign permutation matrix: for each source tuple the sign
    is the product of (-1)^(p_a p_b) over factor pairs a < b whose order
    is reversed in the target."""
    k = len(tb_src.factors)
    if sorted(perm) != list(range(k)) or len(tb_tgt.factors) != k:
        raise DimensionError("shuffle_map permutation invalid")
    posn = [0] * k
    for j, a in enumerate(perm):
        posn[a] = j
    entries = []
    for n, es in tb_src.elems.items():
        for spos, (degs, idxs) in enumerate(es):
            sign = 1
            odd = [a for a in range(k) if degs[a] % 2]
            for ai in range(len(odd)):
                for bi in range(ai + 1, len(odd)):
                    if posn[odd[ai]] > posn[odd[bi]]:
                        sign = -sign
            tdegs = tuple(degs[perm[j]] for j in range(k))
            tidxs = tuple(idxs[perm[j]] for j in range(k))
            loc = tb_tgt.index(tdegs, tidxs)
            if loc is None:
                continue
            tn, tpos = loc
            entries.append((n, tpos, spos, sign))
    return GradedMap.from_entries(tb_src.space, tb_tgt.space, 0, entries)


def grouped_tensor_map(tb_src, prefix, block_tbs, maps, tb_tgt):
    """Apply maps to consecutive blocks of tensor factors.

    tb_src factors: `prefix` leading factors (kept), then the factors of
    each block_tbs[i] in order.  maps[i] goes from block_tbs[i].space to
    tb_tgt.factors[prefix + i] (None for the flat-to-nested identity).
    Koszul sign: (-1)^(deg(map_i) * total degree of everything before
    block i)."""
    sizes = [len(b.factors) for b in block_tbs]
    k = prefix + sum(sizes)
    if len(tb_src.factors) != k:
        raise DimensionError("grouped_tensor_map factor count mismatch")
    entries = []
    for n, es in tb_src.elems.items():
        for spos, (degs, idxs) in enumerate(es):
            out = [(degs[i], idxs[i], 1) for i in range(prefix)]
            cols = [[c] for c in out]
            off = prefix
            acc = sum(degs[:prefix])
            sign = 1
            dead = False
            for bi, btb in enumerate(block_tbs):
                w = sizes[bi]
                part_d = tuple(degs[off:off + w])
                part_i = tuple(idxs[off:off + w])
                loc = btb.index(part_d, part_i)
                if loc is None:
                    dead = True
                    break
                bdeg, bpos = loc
                m = maps[bi]
                if m is None:
                    cols.append([(bdeg, bpos, 1)])
                else:
                    if m.degree % 2 and acc % 2:
                        sign = -sign
                    blk = m.blocks.get(bdeg)
                    col = [] if blk is None else \
                        [(bdeg + m.degree, r, row.get(bpos))
                         for r, row in blk.rows.items() if row.get(bpos)]
                    if not col:
                        dead = True
                        break
                    cols.append(col)
                acc += bdeg
                off += w
            if dead:
                continue
            for combo in iproduct(*cols):
                tdegs = tuple(c[0] for c in combo)
                tidxs = tuple(c[1] for c in combo)
                loc = tb_tgt.index(tdegs, tidxs)
                if loc is None:
                    continue
                val = sign
                for c in combo:
                    val = val * c[2]
                tn, tpos = loc
                entries.append((n, tpos, spos, val))
    deg = sum(0 if m is None else m.degree for m in maps)
    return GradedMap.from_entries(tb_src.space, tb_tgt.space, deg, entries)


def expand_map(tb_src, expansions, tb_tgt):
    """Reassociation: expand nested tensor-space factors into their flat
    factors.  expansions maps a source factor position to the
    TensorBasis whose space that factor is.  Sign-free bijection onto
    the surviving (non-truncated) part of tb_tgt."""
    entries = []
    for n, es in tb_src.elems.items():
        for spos, (degs, idxs) in enumerate(es):
            tdegs, tidxs = [], []
            for i in range(len(tb_src.factors)):
                if i in expansions:
                    bd, bi = expansions[i].elems[degs[i]][idxs[i]]
                    tdegs.extend(bd)
                    tidxs.extend(bi)
                else:
                    tdegs.append(degs[i])
                    tidxs.append(idxs[i])
            loc = tb_tgt.index(tuple(tdegs), tuple(tidxs))
            if loc is None:
                continue
            tn, tpos = loc
            entries.append((n, tpos, spos, 1))
    return GradedMap.from_entries(tb_src.space, tb_tgt.space, 0, entries)
