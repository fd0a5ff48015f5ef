"""Connections on modules, jet modules, and Atiyah classes.

A connection on a module E relative to a derivation d: A -> M is a map
nabla: E -> P_A(M, E) satisfying the derivative diagrams: acting first
and then differentiating equals differentiating each A-input (Leibniz)
plus differentiating the module element.  A connection is the same as a
module splitting of the jet sequence

    0 -> P_A(M, E) -> J_d E -> E -> 0,

and the failure of a degree-0 solution of the diagrams to commute with
the differentials represents the extension class of that sequence: the
Atiyah class of E.  Both routes to that class are implemented
independently and compared through an explicit null homotopy.
"""

from .algebras import _summand_terms, apply_cols
from .complexes import (Complex, check_degreewise_exact, extension_class,
                        is_chain_map, null_homotopy)
from .errors import AxiomError, NotFreeModule
from .graded import GradedMap, direct_sum
from .linalg import Mat
from .modules import (AModule, FreeModule, LaxProduct, is_module_morphism,
                      lax_insert, leibniz_insert)
from .tensors import TensorBasis, tensor_map


def leibniz_map(P, dmap, tbn):
    """The first summand of the derivative diagram as a map
    O(n+1) (x) A^n (x) X -> P_A(M, X): differentiate each A-input and
    sort the new M-input into the ambient layout."""
    ents = []
    for sn, es in tbn.elems.items():
        for spos, (degs, idxs) in enumerate(es):
            col = leibniz_insert(P, dmap, degs[0], idxs[0],
                                 degs[1:-1], idxs[1:-1],
                                 (degs[-1], [(idxs[-1], 1)]))
            for gi, v in col.items():
                ents.append((sn, gi, spos, v))
    return GradedMap.from_entries(tbn.space, P.carrier.space,
                                  dmap.degree, ents)


def derivative_defects(nabla, E, P, d):
    """Arity-indexed differences of the two routes of the derivative
    diagram; an empty dict means nabla is derivative."""
    out = {}
    for n in sorted(set(E.actions) & set(P.actions)):
        tbn = E.action_tb(n)
        lhs = nabla @ E.action(n)
        ins = tensor_map(tbn, [None] * (n + 1) + [nabla],
                         P.action_tb(n))
        rhs = P.action(n) @ ins + leibniz_map(P, d.map, tbn)
        defect = lhs - rhs
        if not defect.is_zero():
            out[n] = defect
    return out


class FreeConnection:
    """Degree-0 solution of the derivative diagrams, with no condition
    on the differentials."""

    chain = False

    def __init__(self, module, kahler, product, nmap):
        E = module
        M, d = kahler
        if self.chain and not is_chain_map(nmap, E.carrier,
                                           product.carrier):
            raise AxiomError("connection is not a chain map")
        bad = derivative_defects(nmap, E, product, d)
        if bad:
            raise AxiomError(
                "derivative diagram fails in arities %s" % sorted(bad))
        self.module = E
        self.kahler = (M, d)
        self.product = product
        self.map = nmap


class Connection(FreeConnection):
    """A chain map E -> P_A(M, E) satisfying the derivative diagrams."""

    chain = True


class JetModule(AModule):
    """J_d E = E (+) P_A(M, E) with the twisted action: the structure
    action on each summand, plus the Leibniz insertion of d carrying
    the E-summand into the P-summand."""

    def __init__(self, E, d, product=None):
        A = E.algebra
        O = A.operad
        M = d.target
        P = product if product is not None else LaxProduct(A, [M, E])
        total, (iE, iP), (pE, pP) = direct_sum(
            [E.carrier.space, P.carrier.space])
        dJ = iE @ E.carrier.d @ pE + iP @ P.carrier.d @ pP
        carrier = Complex(total, dJ)
        actions = {}
        for n in sorted(set(E.actions) & set(P.actions)):
            tbJ = TensorBasis(
                [O.component(n + 1).space] + [A.carrier.space] * n
                + [total], weight_cap=E.weight_cap)
            tE = tensor_map(tbJ, [None] * (n + 1) + [pE],
                            E.action_tb(n))
            tP = tensor_map(tbJ, [None] * (n + 1) + [pP],
                            P.action_tb(n))
            L = leibniz_map(P, d.map, E.action_tb(n))
            actions[n] = iE @ E.action(n) @ tE + iP @ L @ tE \
                + iP @ P.action(n) @ tP
        super().__init__(A, carrier, actions, weight_cap=E.weight_cap)
        self.module = E
        self.product = P
        self.kahler = (M, d)
        self.sub_include = iP
        self.module_include = iE
        self.project = pE

    def check_exact(self):
        check_degreewise_exact(self.sub_include, self.project,
                               self.product.carrier, self.carrier,
                               self.module.carrier)


def jet_module(E, d, product=None):
    J = JetModule(E, d, product)
    J.check_exact()
    return J


def connection_splitting_test(nabla, E, d, product=None, jet=None):
    """Dual verdicts: the derivative diagrams for nabla, and the module
    morphism squares for (id, nabla): E -> J_d E.  Both are computed
    and asserted equal; the common verdict is returned."""
    J = jet if jet is not None else JetModule(E, d, product)
    P = J.product
    v1 = not derivative_defects(nabla, E, P, d)
    s = J.module_include + J.sub_include @ nabla
    v2 = is_module_morphism(s, E, J)
    if v1 != v2:
        raise AxiomError("splitting criterion verdicts disagree")
    return v1


def canonical_connection(F, d, product=None):
    """The Leibniz-insertion connection on a free module U(A) (x) W:
    differentiate each A-input of the minimal envelope representative
    and pair the result with the unit-included fiber element."""
    if not isinstance(F, FreeModule):
        raise NotFreeModule("canonical connection needs a free module")
    A = F.algebra
    U = F.envelope
    M = d.target
    P = product if product is not None else LaxProduct(A, [M, F])
    ents = []
    for nd in F.carrier.space.degrees():
        for j in range(F.carrier.space.dim(nd)):
            (ud, wd), (ui, wi) = F.pair_tb.elems[nd][j]
            blk = F.from_fiber.blocks.get(wd)
            if blk is None:
                continue
            xterms = [(ri, row[wi]) for ri, row in blk.rows.items()
                      if wi in row]
            out = {}
            for _, tlist in _summand_terms(U.tensor.sum, U.sec,
                                           ud, ui).items():
                for (tdegs, tidxs), tv in tlist:
                    col = leibniz_insert(P, d.map, tdegs[0], tidxs[0],
                                         tdegs[1:], tidxs[1:],
                                         (wd, xterms))
                    for gi, v in col.items():
                        w = out.get(gi, 0) + tv * v
                        if w == 0:
                            out.pop(gi, None)
                        else:
                            out[gi] = w
            for gi, v in out.items():
                ents.append((nd, gi, j, v))
    nmap = GradedMap.from_entries(F.carrier.space, P.carrier.space,
                                  d.map.degree, ents)
    cls = Connection if is_chain_map(nmap, F.carrier, P.carrier) \
        else FreeConnection
    return cls(F, (M, d), P, nmap)


def find_free_connection(E, d, product=None):
    """Solve the derivative diagrams as an affine-linear system in the
    unknown degree-0 map; deterministic (free variables zero), None if
    the truncated system is infeasible."""
    A = E.algebra
    M = d.target
    P = product if product is not None else LaxProduct(A, [M, E])
    degrees = sorted(set(E.carrier.space.degrees())
                     & set(P.carrier.space.degrees()))
    layout = {}
    nvars = 0
    for nd in degrees:
        for ip in range(P.carrier.space.dim(nd)):
            for ie in range(E.carrier.space.dim(nd)):
                layout[(nd, ip, ie)] = nvars
                nvars += 1
    rows = []
    rhs = []
    for n in sorted(set(E.actions) & set(P.actions)):
        tbn = E.action_tb(n)
        lei = leibniz_map(P, d.map, tbn)
        for sn, es in tbn.elems.items():
            tdim = P.carrier.space.dim(sn)
            for spos, (degs, idxs) in enumerate(es):
                eqs = [{} for _ in range(tdim)]
                en, ecol = apply_cols(E.action(n), sn, {spos: 1})
                for ie, v in ecol.items():
                    for ip in range(tdim):
                        var = layout.get((en, ip, ie))
                        if var is not None:
                            eqs[ip][var] = eqs[ip].get(var, 0) + v
                de = degs[-1]
                for ip0 in range(P.carrier.space.dim(de)):
                    var = layout.get((de, ip0, idxs[-1]))
                    if var is None:
                        continue
                    loc = P.action_tb(n).index(
                        degs[:-1] + (de,), idxs[:-1] + (ip0,))
                    if loc is None:
                        continue
                    _, acol = apply_cols(P.action(n), loc[0],
                                         {loc[1]: 1})
                    for jp, w in acol.items():
                        eqs[jp][var] = eqs[jp].get(var, 0) - w
                lb = lei.blocks.get(sn)
                for ip in range(tdim):
                    b = 0
                    if lb is not None:
                        b = lb.rows.get(ip, {}).get(spos, 0)
                    if eqs[ip] or b:
                        rows.append(eqs[ip])
                        rhs.append(b)
    sysm = Mat(len(rows), nvars,
               {i: r for i, r in enumerate(rows) if r})
    b = Mat.column(len(rows), rhs)
    x = sysm.solve(b)
    if x is None:
        return None
    ents = []
    for (nd, ip, ie), var in layout.items():
        v = x.entry(var, 0)
        if v:
            ents.append((nd, ip, ie, v))
    nmap = GradedMap.from_entries(E.carrier.space, P.carrier.space, 0,
                                  ents)
    return FreeConnection(E, (M, d), P, nmap)


class AtiyahClass:
    """A representative E -> P_A(M, E) of degree +1, recorded together
    with the route that produced it."""

    def __init__(self, module, product, rep, provenance):
        self.module = module
        self.product = product
        self.rep = rep
        self.provenance = provenance


def atiyah_from_connection(conn):
    """-[d, nabla] = nabla d - d nabla, asserted to be a chain map and
    a module morphism."""
    E = conn.module
    P = conn.product
    rep = conn.map @ E.carrier.d - P.carrier.d @ conn.map
    if not is_chain_map(rep, E.carrier, P.carrier):
        raise AxiomError("curvature of a connection is not closed")
    if not is_module_morphism(rep, E, P):
        raise AxiomError("curvature of a connection is not linear")
    return AtiyahClass(E, P, rep, "connection")


def atiyah_from_extension(E, d, product=None, jet=None):
    """The extension class of the jet sequence; the independent oracle
    for the connection route."""
    J = jet if jet is not None else JetModule(E, d, product)
    J.check_exact()
    cls = extension_class(J.sub_include, J.project, J.product.carrier,
                          J.carrier, E.carrier)
    rep = GradedMap(E.carrier.space, J.product.carrier.space, 1,
                    cls.blocks)
    return AtiyahClass(E, J.product, rep, "extension")


def atiyah_homotopy(a1, a2):
    """An explicit h with [d, h] = difference of the representatives;
    None if the routes differ by more than a homotopy."""
    diff = a1.rep - a2.rep
    return null_homotopy(diff, a1.module.carrier, a1.product.carrier)


def product_connection(conns, P, Q):
    """(nabla_1, .., nabla_m): P_A(E_1..E_m) -> P_A(M, E_1..E_m), the
    slotwise Leibniz sum of the given connections."""
    m = len(P.mods)
    total = GradedMap.zero(P.carrier.space, Q.carrier.space, 0)
    for j, c in enumerate(conns):
        outer = [1 + i for i in range(m) if i != j]
        inner = [0, 1 + j]
        total = total + lax_insert(P, j, c.map, c.product, Q,
                                   placement=(outer, inner))
    return total


def product_connection_defects(pc, P, Q, d, inner_product=None):
    """The connection-like diagram for a product connection: P plays
    the module, and the Leibniz summand lands in P_A(M, P) before
    being flattened into Q."""
    A = P.algebra
    M = d.target
    PP = inner_product if inner_product is not None \
        else LaxProduct(A, [M, P])
    flat = lax_insert(PP, 1, GradedMap.identity(P.carrier.space), P, Q,
                      placement=([0], [1 + i for i in
                                       range(len(P.mods))]))
    out = {}
    for n in sorted(set(P.actions) & set(Q.actions) & set(PP.actions)):
        tbn = P.action_tb(n)
        lhs = pc @ P.action(n)
        ins = tensor_map(tbn, [None] * (n + 1) + [pc], Q.action_tb(n))
        rhs = Q.action(n) @ ins + flat @ leibniz_map(PP, d.map, tbn)
        defect = lhs - rhs
        if not defect.is_zero():
            out[n] = defect
    return out


def derivative_of_morphism(f, conn, conns, P, Q):
    """nabla f = (nabla_1..nabla_m) o f - P_A(id, f) o nabla, for a
    module map f: E -> P = P_A(E_1..E_m) and connections on E and on
    the factors; a degree-0 free map E -> Q = P_A(M, E_1..E_m)."""
    pc = product_connection(conns, P, Q)
    m = len(P.mods)
    pif = lax_insert(conn.product, 1, f, P, Q,
                     placement=([0], [1 + i for i in range(m)]))
    return pc @ f - pif @ conn.map
