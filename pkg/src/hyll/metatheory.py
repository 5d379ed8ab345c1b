"""Admissible transformations on proof certificates.

Everything here consumes and produces checkable trees; nothing reaches
into the checker's internals.  The main entry points:

- `identity_expand`: init at arbitrary propositions, built from atomic init
- `eliminate_cut`: removes cut and cutbang nodes by local reduction
- `invert_left` / `invert_right`: inversion lemmas, built with cuts
- `seq_to_nd` / `nd_to_seq`: round trips with natural deduction
- `relocalise`: rebuilds a proof with every judgement world extended
- `derive_s5`: the modal collapse derivation over any domain

Cut elimination runs on explicit recursion with a fuel counter; the fuel
default over-approximates the number of reduction steps and exhausting it
is reported as an internal error rather than looping.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from . import kernel, syntax, worlds
from .kernel import (
    CheckError, J, NameSupply, Proof, Sequent, g_add, jkey, ms_add,
    ms_remove, ms_union, sequent,
)
from .syntax import (
    Atom, Bang, Down, ExistsT, ExistsW, ForallT, ForallW, Lolli, Neg, One,
    Plus, Pos, At, TApp, TVar, TWorld, Tensor, Top, With, Zero, open_term,
)
from .worlds import Domain, World


class MetaError(Exception):
    pass


class RelocalisationError(MetaError):
    pass


# ---------------------------------------------------------------------------
# Name bookkeeping


def _term_names(t) -> set:
    match t:
        case TVar(name):
            return {name}
        case TApp(_, args):
            out = set()
            for a in args:
                out |= _term_names(a)
            return out
        case TWorld(w):
            return worlds.free_vars(w) | worlds.constants(w)
        case _:
            return set()


def _witness_names(w) -> set:
    if w is None:
        return set()
    if isinstance(w, str):
        return {w}
    if isinstance(w, World):
        return worlds.free_vars(w) | worlds.constants(w)
    return _term_names(w)


def seq_names(s: Sequent) -> set:
    return kernel.seq_term_names(s) | kernel.seq_world_names(s)


def proof_names(p: Proof) -> set:
    out = set()
    stack = [p]
    while stack:
        n = stack.pop()
        out |= seq_names(n.seq)
        out |= _witness_names(n.witness)
        stack.extend(n.premises)
    return out


def _eigen_sort(node: Proof) -> str | None:
    """Which binder sort a fresh-name witness belongs to, or None."""
    if node.rule in ("forallR", "forallI"):
        p = node.seq.goal.prop
    elif node.rule == "existsL":
        p = node.principal.prop
    elif node.rule == "existsE":
        p = node.premises[0].seq.goal.prop
    else:
        return None
    return "term" if isinstance(p, (ForallT, ExistsT)) else "world"


def _eigen_scope(node: Proof) -> int:
    """Index of the premise the eigenvariable scopes over."""
    return 1 if node.rule == "existsE" else 0


# ---------------------------------------------------------------------------
# Structural transformers.  These are rule-agnostic tree maps, so they work
# for both the sequent calculus and natural deduction.


def _map_j(j: J, on_prop, on_world) -> J:
    return J(on_prop(j.prop), on_world(j.world))


def _map_proof(node: Proof, on_prop, on_world, on_term_witness) -> Proof:
    s = node.seq
    new_seq = Sequent(
        tuple(sorted({_map_j(j, on_prop, on_world) for j in s.gamma}, key=jkey)),
        tuple(sorted((_map_j(j, on_prop, on_world) for j in s.delta), key=jkey)),
        _map_j(s.goal, on_prop, on_world),
    )
    principal = None if node.principal is None else _map_j(node.principal, on_prop, on_world)
    w = node.witness
    if w is None or isinstance(w, str):
        witness = w
    elif isinstance(w, World):
        witness = on_world(w)
    else:
        witness = on_term_witness(w)
    prems = tuple(_map_proof(q, on_prop, on_world, on_term_witness) for q in node.premises)
    return Proof(node.rule, new_seq, prems, principal, witness)


def _subst_term_in_term(t, name, payload):
    match t:
        case TVar(n) if n == name:
            return payload
        case TApp(fn, args):
            return TApp(fn, tuple(_subst_term_in_term(a, name, payload) for a in args))
        case _:
            return t


def _subst_world_in_term(dom, t, name, payload):
    match t:
        case TApp(fn, args):
            return TApp(fn, tuple(_subst_world_in_term(dom, a, name, payload) for a in args))
        case TWorld(w):
            return TWorld(dom.normalize(worlds.subst_var(w, name, payload)))
        case _:
            return t


def _freshen_clashing_eigens(dom, node: Proof, avoid: set, supply: NameSupply) -> Proof:
    """Rename every eigenvariable of `node`'s subtree that collides with `avoid`."""
    sort = _eigen_sort(node)
    if sort is not None and node.witness in avoid:
        node = rename_eigen(dom, node, supply, avoid)
    prems = tuple(_freshen_clashing_eigens(dom, q, avoid, supply) for q in node.premises)
    return Proof(node.rule, node.seq, prems, node.principal, node.witness)


def rename_eigen(dom, node: Proof, supply: NameSupply, avoid: set = frozenset()) -> Proof:
    """Replace the eigenvariable introduced at `node` with a fresh name."""
    sort = _eigen_sort(node)
    if sort is None:
        raise MetaError(f"{node.rule} introduces no eigenvariable")
    old = node.witness
    fresh = supply.fresh(old, set(avoid) | proof_names(node))
    i = _eigen_scope(node)
    prems = list(node.premises)
    if sort == "term":
        prems[i] = subst_proof_term(dom, prems[i], old, TVar(fresh), supply)
    else:
        prems[i] = subst_proof_world(dom, prems[i], old, worlds.var(fresh), supply)
    return Proof(node.rule, node.seq, tuple(prems), node.principal, fresh)


def subst_proof_term(dom, p: Proof, name: str, payload, supply: NameSupply | None = None) -> Proof:
    supply = supply or NameSupply()
    clash = _term_names(payload)
    p = _freshen_clashing_eigens(dom, p, clash, supply)
    return _map_proof(
        p,
        lambda pr: syntax.subst_term_var(pr, name, payload),
        lambda w: w,
        lambda t: _subst_term_in_term(t, name, payload),
    )


def subst_proof_world(dom, p: Proof, name: str, payload: World, supply: NameSupply | None = None) -> Proof:
    supply = supply or NameSupply()
    clash = worlds.free_vars(payload) | worlds.constants(payload)
    p = _freshen_clashing_eigens(dom, p, clash, supply)
    on_w = lambda w: dom.normalize(worlds.subst_var(w, name, payload))
    return _map_proof(
        p,
        lambda pr: syntax.normalize_worlds(dom, syntax.subst_world_var(pr, name, payload)),
        on_w,
        lambda t: _subst_world_in_term(dom, t, name, payload),
    )


def weaken(dom, p: Proof, js, supply: NameSupply | None = None) -> Proof:
    """Add unrestricted judgements throughout a proof."""
    supply = supply or NameSupply()
    js = tuple(js)
    if not js:
        return p
    clash = set()
    for j in js:
        clash |= seq_names(sequent((j,), (), j))
    p = _freshen_clashing_eigens(dom, p, clash, supply)

    def go(node: Proof) -> Proof:
        s = node.seq
        new_seq = sequent(s.gamma + js, s.delta, s.goal)
        return Proof(node.rule, new_seq, tuple(go(q) for q in node.premises), node.principal, node.witness)

    return go(p)


# ---------------------------------------------------------------------------
# Identity expansion


def identity_expand(dom: Domain, prop, world: World, gamma=(), supply: NameSupply | None = None) -> Proof:
    """A derivation of gamma ; A@w |- A@w for arbitrary A."""
    supply = supply or NameSupply()
    gamma = tuple(sorted(set(gamma), key=jkey))
    world = dom.normalize(world)
    prop = syntax.normalize_worlds(dom, prop)
    return _idx(dom, prop, world, gamma, supply)


def _idx(dom, a, w, gamma, supply) -> Proof:
    j = J(a, w)
    concl = sequent(gamma, (j,), j)

    def names():
        return seq_names(concl)

    match a:
        case Atom():
            return Proof("init", concl)
        case Tensor(l, r):
            jl, jr = J(l, w), J(r, w)
            inner = Proof(
                "tensR",
                sequent(gamma, (jl, jr), j),
                (_idx(dom, l, w, gamma, supply), _idx(dom, r, w, gamma, supply)),
            )
            return Proof("tensL", concl, (inner,), principal=j)
        case One():
            inner = Proof("oneR", sequent(gamma, (), j))
            return Proof("oneL", concl, (inner,), principal=j)
        case Lolli(l, r):
            jl, jr = J(l, w), J(r, w)
            s1 = sequent(gamma, (j, jl), jr)
            inner = Proof(
                "lolliL",
                s1,
                (_idx(dom, l, w, gamma, supply), _idx(dom, r, w, gamma, supply)),
                principal=j,
            )
            return Proof("lolliR", concl, (inner,))
        case With(l, r):
            p1 = Proof("withL1", sequent(gamma, (j,), J(l, w)), (_idx(dom, l, w, gamma, supply),), principal=j)
            p2 = Proof("withL2", sequent(gamma, (j,), J(r, w)), (_idx(dom, r, w, gamma, supply),), principal=j)
            return Proof("withR", concl, (p1, p2))
        case Top():
            return Proof("topR", concl)
        case Plus(l, r):
            p1 = Proof("plusR1", sequent(gamma, (J(l, w),), j), (_idx(dom, l, w, gamma, supply),))
            p2 = Proof("plusR2", sequent(gamma, (J(r, w),), j), (_idx(dom, r, w, gamma, supply),))
            return Proof("plusL", concl, (p1, p2), principal=j)
        case Zero():
            return Proof("zeroL", concl, principal=j)
        case Bang(b):
            jb = J(b, w)
            g2 = g_add(gamma, jb)
            core = _idx(dom, b, w, g2, supply)
            cp = Proof("copy", sequent(g2, (), jb), (core,), principal=jb)
            br = Proof("bangR", sequent(g2, (), j), (cp,))
            return Proof("bangL", concl, (br,), principal=j)
        case ForallT(body):
            x = supply.fresh(a.hint, names())
            inst = open_term(body, TVar(x))
            ji = J(inst, w)
            inner = Proof("forallL", sequent(gamma, (j,), ji), (_idx(dom, inst, w, gamma, supply),), principal=j, witness=TVar(x))
            return Proof("forallR", concl, (inner,), witness=x)
        case ExistsT(body):
            x = supply.fresh(a.hint, names())
            inst = open_term(body, TVar(x))
            inner = Proof("existsR", sequent(gamma, (J(inst, w),), j), (_idx(dom, inst, w, gamma, supply),), witness=TVar(x))
            return Proof("existsL", concl, (inner,), principal=j, witness=x)
        case ForallW(body):
            u = supply.fresh(a.hint, names())
            inst = kernel._open_w(dom, body, worlds.var(u))
            ji = J(inst, w)
            inner = Proof("forallL", sequent(gamma, (j,), ji), (_idx(dom, inst, w, gamma, supply),), principal=j, witness=worlds.var(u))
            return Proof("forallR", concl, (inner,), witness=u)
        case ExistsW(body):
            u = supply.fresh(a.hint, names())
            inst = kernel._open_w(dom, body, worlds.var(u))
            inner = Proof("existsR", sequent(gamma, (J(inst, w),), j), (_idx(dom, inst, w, gamma, supply),), witness=worlds.var(u))
            return Proof("existsL", concl, (inner,), principal=j, witness=u)
        case At(body, v):
            jb = J(body, v)
            core = _idx(dom, body, v, gamma, supply)
            al = Proof("atL", sequent(gamma, (j,), jb), (core,), principal=j)
            return Proof("atR", concl, (al,))
        case Down(body):
            inst = kernel._open_w(dom, body, w)
            ji = J(inst, w)
            core = _idx(dom, inst, w, gamma, supply)
            dl = Proof("dnL", sequent(gamma, (j,), ji), (core,), principal=j)
            return Proof("dnR", concl, (dl,))
        case Pos() | Neg():
            raise MetaError("polarity shifts do not occur in checked propositions")
    raise MetaError(f"identity expansion: unhandled proposition {a!r}")


# ---------------------------------------------------------------------------
# Cut elimination


@dataclass
class _CutState:
    supply: NameSupply
    fuel: int


_LEFTISH = frozenset(
    "copy tensL oneL withL1 withL2 plusL zeroL existsL forallL atL dnL bangL lolliL".split()
)


def default_fuel(d: Proof, e: Proof, a: J) -> int:
    return 50_000 + 64 * d.size() * e.size() * max(1, syntax.size(a.prop))


def eliminate_cut(dom: Domain, p: Proof, supply: NameSupply | None = None, fuel: int | None = None) -> Proof:
    """Rewrite a certificate into a cut-free one with the same end sequent."""
    st = _CutState(supply or NameSupply(), fuel if fuel is not None else 0)
    if fuel is None:
        st.fuel = 10_000 + default_fuel(p, p, p.seq.goal)
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 100_000))
    try:
        return _elim(dom, p, st)
    finally:
        sys.setrecursionlimit(old_limit)


def _elim(dom, p: Proof, st) -> Proof:
    prems = tuple(_elim(dom, q, st) for q in p.premises)
    if p.rule == "cut":
        return _rc(dom, prems[0], prems[1], p.principal, st)
    if p.rule == "cutbang":
        return _rcb(dom, prems[0], prems[1], p.principal, st)
    return Proof(p.rule, p.seq, prems, p.principal, p.witness)


def _spend(st, what):
    st.fuel -= 1
    if st.fuel <= 0:
        raise MetaError(f"cut elimination fuel exhausted during {what}")


def _cut_concl(d: Proof, e: Proof, a: J) -> Sequent:
    return sequent(e.seq.gamma, ms_union(d.seq.delta, ms_remove(e.seq.delta, a)), e.seq.goal)


_PRINCIPAL_LEFT = {
    Tensor: "tensL",
    One: "oneL",
    Lolli: "lolliL",
    With: ("withL1", "withL2"),
    Plus: "plusL",
    ForallT: "forallL",
    ForallW: "forallL",
    ExistsT: "existsL",
    ExistsW: "existsL",
    Bang: "bangL",
    At: "atL",
    Down: "dnL",
}


def _rc(dom, d: Proof, e: Proof, a: J, st) -> Proof:
    """Cut-free d proving a and cut-free e consuming a; returns a cut-free proof."""
    _spend(st, "cut")

    if d.rule == "init":
        return e
    if e.rule == "init" and e.seq.goal == a:
        return d

    if d.rule in _LEFTISH:
        return _commute_d(dom, d, e, a, st)

    left = _PRINCIPAL_LEFT.get(type(a.prop))
    if e.principal == a and (e.rule == left or (isinstance(left, tuple) and e.rule in left)):
        return _principal(dom, d, e, a, st)

    return _commute_e(dom, d, e, a, st)


def _principal(dom, d, e, a, st) -> Proof:
    w = a.world
    match a.prop:
        case Tensor(l, r):
            d1, d2 = d.premises
            e1 = e.premises[0]
            inner = _rc(dom, d1, e1, J(l, w), st)
            return _rc(dom, d2, inner, J(r, w), st)
        case One():
            return e.premises[0]
        case Lolli(l, r):
            d1 = d.premises[0]
            e1, e2 = e.premises
            mid = _rc(dom, e1, d1, J(l, w), st)
            return _rc(dom, mid, e2, J(r, w), st)
        case With(l, r):
            which = 0 if e.rule == "withL1" else 1
            comp = l if which == 0 else r
            return _rc(dom, d.premises[which], e.premises[0], J(comp, w), st)
        case Plus(l, r):
            which = 0 if d.rule == "plusR1" else 1
            comp = l if which == 0 else r
            return _rc(dom, d.premises[0], e.premises[which], J(comp, w), st)
        case ForallT(body):
            x, tau = d.witness, e.witness
            d1 = subst_proof_term(dom, d.premises[0], x, tau, st.supply)
            return _rc(dom, d1, e.premises[0], J(open_term(body, tau), w), st)
        case ForallW(body):
            x, tau = d.witness, e.witness
            d1 = subst_proof_world(dom, d.premises[0], x, tau, st.supply)
            return _rc(dom, d1, e.premises[0], J(kernel._open_w(dom, body, tau), w), st)
        case ExistsT(body):
            tau, x = d.witness, e.witness
            e1 = subst_proof_term(dom, e.premises[0], x, tau, st.supply)
            return _rc(dom, d.premises[0], e1, J(open_term(body, tau), w), st)
        case ExistsW(body):
            tau, x = d.witness, e.witness
            e1 = subst_proof_world(dom, e.premises[0], x, tau, st.supply)
            return _rc(dom, d.premises[0], e1, J(kernel._open_w(dom, body, tau), w), st)
        case Bang(b):
            return _rcb(dom, d.premises[0], e.premises[0], J(b, w), st)
        case At(b, v):
            return _rc(dom, d.premises[0], e.premises[0], J(b, v), st)
        case Down(b):
            return _rc(dom, d.premises[0], e.premises[0], J(kernel._open_w(dom, b, w), w), st)
    raise MetaError(f"principal cut on unexpected proposition {a.prop!r}")


def _commute_d(dom, d, e, a, st) -> Proof:
    """Push the cut above d's final left rule."""
    concl = _cut_concl(d, e, a)
    b = d.principal
    if d.rule == "zeroL":
        return Proof("zeroL", concl, principal=b)
    if d.rule == "copy":
        return Proof("copy", concl, (_rc(dom, d.premises[0], e, a, st),), principal=b)
    if d.rule == "lolliL":
        d1, d2 = d.premises
        return Proof("lolliL", concl, (d1, _rc(dom, d2, e, a, st)), principal=b)
    if d.rule == "bangL":
        body = J(b.prop.body, b.world)
        e2 = weaken(dom, e, (body,), st.supply)
        return Proof("bangL", concl, (_rc(dom, d.premises[0], e2, a, st),), principal=b)
    if d.rule == "existsL":
        if d.witness in proof_names(e) | seq_names(concl):
            d = rename_eigen(dom, d, st.supply, proof_names(e) | seq_names(concl))
        return Proof("existsL", concl, (_rc(dom, d.premises[0], e, a, st),), principal=d.principal, witness=d.witness)
    if d.rule == "plusL":
        d1, d2 = d.premises
        return Proof("plusL", concl, (_rc(dom, d1, e, a, st), _rc(dom, d2, e, a, st)), principal=b)
    # tensL, oneL, withL1, withL2, forallL, atL, dnL: one premise, same goal
    return Proof(d.rule, concl, (_rc(dom, d.premises[0], e, a, st),), principal=b, witness=d.witness)


def _commute_e(dom, d, e, a, st) -> Proof:
    """Push the cut above e's final rule, which does not act on a."""
    concl = _cut_concl(d, e, a)
    b = e.principal
    rule = e.rule

    if rule == "topR":
        return Proof("topR", concl)
    if rule == "zeroL":
        return Proof("zeroL", concl, principal=b)
    if rule == "copy":
        return Proof("copy", concl, (_rc(dom, d, e.premises[0], a, st),), principal=b)
    if rule == "bangL":
        body = J(b.prop.body, b.world)
        d2 = weaken(dom, d, (body,), st.supply)
        return Proof("bangL", concl, (_rc(dom, d2, e.premises[0], a, st),), principal=b)
    if rule in ("forallR", "existsL"):
        if e.witness in proof_names(d) | seq_names(concl):
            e = rename_eigen(dom, e, st.supply, proof_names(d) | seq_names(concl))
        return Proof(rule, concl, (_rc(dom, d, e.premises[0], a, st),), principal=e.principal, witness=e.witness)
    if rule == "withR":
        e1, e2 = e.premises
        return Proof("withR", concl, (_rc(dom, d, e1, a, st), _rc(dom, d, e2, a, st)))
    if rule == "plusL":
        e1, e2 = e.premises
        return Proof("plusL", concl, (_rc(dom, d, e1, a, st), _rc(dom, d, e2, a, st)), principal=b)
    if rule in ("tensR", "lolliL"):
        e1, e2 = e.premises
        if a in e1.seq.delta:
            return Proof(rule, concl, (_rc(dom, d, e1, a, st), e2), principal=b, witness=e.witness)
        return Proof(rule, concl, (e1, _rc(dom, d, e2, a, st)), principal=b, witness=e.witness)
    if rule in ("oneR", "bangR", "init"):
        raise MetaError(f"cannot commute a cut past {rule}: the cut judgement has nowhere to go")
    # single-premise rules that keep the surrounding linear zone:
    # tensL oneL withL1 withL2 plusR1 plusR2 forallL existsR lolliR atR atL dnR dnL
    return Proof(rule, concl, (_rc(dom, d, e.premises[0], a, st),), principal=b, witness=e.witness)


def _rcb(dom, d: Proof, e: Proof, a: J, st) -> Proof:
    """Unrestricted cut: d proves a with no resources, e assumes it in gamma."""
    _spend(st, "unrestricted cut")
    if a in d.seq.gamma:
        # the judgement is unrestricted below the cut already; e proves the
        # target as it stands (set semantics collapsed the two occurrences)
        return e
    new_gamma = tuple(j for j in e.seq.gamma if j != a)
    concl = sequent(new_gamma, e.seq.delta, e.seq.goal)

    if e.rule == "copy" and e.principal == a:
        inner = _rcb(dom, d, e.premises[0], a, st)
        return _rc(dom, d, inner, a, st)
    if e.rule == "bangL" and J(e.principal.prop.body, e.principal.world) == a:
        # the premise reintroduces the very judgement being removed; its
        # subtree is already well-formed for the shrunken conclusion
        return Proof("bangL", concl, e.premises, principal=e.principal, witness=e.witness)
    prems = tuple(_rcb(dom, d, q, a, st) for q in e.premises)
    return Proof(e.rule, concl, prems, e.principal, e.witness)


def cut(dom: Domain, d: Proof, e: Proof, a: J, supply: NameSupply | None = None, fuel: int | None = None) -> Proof:
    """Combine two cut-free proofs across judgement `a`, eliminating the cut."""
    st = _CutState(supply or NameSupply(), fuel if fuel is not None else default_fuel(d, e, a))
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 100_000))
    try:
        return _rc(dom, d, e, a, st)
    finally:
        sys.setrecursionlimit(old_limit)


# ---------------------------------------------------------------------------
# Inversion lemmas, as small cut constructions


def invert_left(dom: Domain, p: Proof, a: J, supply: NameSupply | None = None):
    """Decompose judgement `a` in p's linear zone into its components.

    Returns a proof, or a pair of proofs for additive disjunction.
    """
    supply = supply or NameSupply()
    g = p.seq.gamma
    w = a.world
    match a.prop:
        case Tensor(l, r):
            jl, jr = J(l, w), J(r, w)
            lemma = Proof(
                "tensR",
                sequent(g, (jl, jr), a),
                (identity_expand(dom, l, w, g, supply), identity_expand(dom, r, w, g, supply)),
            )
            return cut(dom, lemma, p, a, supply)
        case One():
            lemma = Proof("oneR", sequent(g, (), a))
            return cut(dom, lemma, p, a, supply)
        case ExistsT(body):
            x = supply.fresh(a.prop.hint, proof_names(p))
            inst = open_term(body, TVar(x))
            lemma = Proof("existsR", sequent(g, (J(inst, w),), a), (identity_expand(dom, inst, w, g, supply),), witness=TVar(x))
            return cut(dom, lemma, p, a, supply)
        case ExistsW(body):
            x = supply.fresh(a.prop.hint, proof_names(p))
            inst = kernel._open_w(dom, body, worlds.var(x))
            lemma = Proof("existsR", sequent(g, (J(inst, w),), a), (identity_expand(dom, inst, w, g, supply),), witness=worlds.var(x))
            return cut(dom, lemma, p, a, supply)
        case At(b, v):
            jb = J(b, v)
            lemma = Proof("atR", sequent(g, (jb,), a), (identity_expand(dom, b, v, g, supply),))
            return cut(dom, lemma, p, a, supply)
        case Down(b):
            inst = kernel._open_w(dom, b, w)
            lemma = Proof("dnR", sequent(g, (J(inst, w),), a), (identity_expand(dom, inst, w, g, supply),))
            return cut(dom, lemma, p, a, supply)
        case Plus(l, r):
            out = []
            for comp, rule in ((l, "plusR1"), (r, "plusR2")):
                jc = J(comp, w)
                lemma = Proof(rule, sequent(g, (jc,), a), (identity_expand(dom, comp, w, g, supply),))
                out.append(cut(dom, lemma, p, a, supply))
            return tuple(out)
        case Bang(b):
            jb = J(b, w)
            g2 = g_add(g, jb)
            lemma = Proof(
                "bangR",
                sequent(g2, (), a),
                (Proof("copy", sequent(g2, (jb,), jb), (identity_expand(dom, b, w, g2, supply),), principal=jb),),
            )
            st = _CutState(supply, default_fuel(lemma, p, a))
            return _rc(dom, lemma, weaken(dom, p, (jb,), supply), a, st)
    raise MetaError(f"no left inversion for {type(a.prop).__name__}")


def invert_right(dom: Domain, p: Proof, arg=None, supply: NameSupply | None = None) -> Proof:
    """Peel the outer connective off p's goal (which must be invertible
    or instantiable: &, top has none, -o, forall, at, down, !)."""
    supply = supply or NameSupply()
    g = p.seq.gamma
    a = p.seq.goal
    w = a.world
    match a.prop:
        case With(l, r):
            which, comp = (1, l) if arg in (None, 1) else (2, r)
            jc = J(comp, w)
            lemma = Proof(f"withL{which}", sequent(g, (a,), jc), (identity_expand(dom, comp, w, g, supply),), principal=a)
            return cut(dom, p, lemma, a, supply)
        case Lolli(l, r):
            jl, jr = J(l, w), J(r, w)
            lemma = Proof(
                "lolliL",
                sequent(g, (a, jl), jr),
                (identity_expand(dom, l, w, g, supply), identity_expand(dom, r, w, g, supply)),
                principal=a,
            )
            return cut(dom, p, lemma, a, supply)
        case ForallT(body):
            inst = open_term(body, arg)
            lemma = Proof("forallL", sequent(g, (a,), J(inst, w)), (identity_expand(dom, inst, w, g, supply),), principal=a, witness=arg)
            return cut(dom, p, lemma, a, supply)
        case ForallW(body):
            inst = kernel._open_w(dom, body, arg)
            lemma = Proof("forallL", sequent(g, (a,), J(inst, w)), (identity_expand(dom, inst, w, g, supply),), principal=a, witness=arg)
            return cut(dom, p, lemma, a, supply)
        case At(b, v):
            jb = J(b, v)
            lemma = Proof("atL", sequent(g, (a,), jb), (identity_expand(dom, b, v, g, supply),), principal=a)
            return cut(dom, p, lemma, a, supply)
        case Down(b):
            inst = kernel._open_w(dom, b, w)
            lemma = Proof("dnL", sequent(g, (a,), J(inst, w)), (identity_expand(dom, inst, w, g, supply),), principal=a)
            return cut(dom, p, lemma, a, supply)
        case Bang(b):
            jb = J(b, w)
            g2 = g_add(g, jb)
            inner = Proof("copy", sequent(g2, (), jb), (identity_expand(dom, b, w, g2, supply),), principal=jb)
            lemma = Proof("bangL", sequent(g, (a,), jb), (inner,), principal=a)
            return cut(dom, p, lemma, a, supply)
    raise MetaError(f"no right inversion for {type(a.prop).__name__}")


# ---------------------------------------------------------------------------
# Natural deduction round trip


def _hyp(g, a: J) -> Proof:
    return Proof("hyp", sequent(g, (a,), a))


def nd_subst(dom: Domain, d: Proof, e: Proof, a: J, supply: NameSupply | None = None) -> Proof:
    """Substitute derivation d for one linear hypothesis a inside e."""
    supply = supply or NameSupply()
    return _nds(dom, d, e, a, _CutState(supply, default_fuel(d, e, a)))


def _nds(dom, d, e, a, st) -> Proof:
    _spend(st, "substitution")
    if e.rule == "hyp":
        return d  # the hypothesis is a itself: its delta is exactly {a}
    concl = _cut_concl(d, e, a)
    rule = e.rule

    if rule == "topI":
        return Proof("topI", concl)
    if rule == "zeroE" and a not in e.premises[0].seq.delta:
        return Proof("zeroE", concl, e.premises)
    if rule in ("forallI", "existsE"):
        if e.witness in proof_names(d) | seq_names(concl):
            e = rename_eigen(dom, e, st.supply, proof_names(d) | seq_names(concl))
    if rule == "bangE":
        major, minor = e.premises
        if a in major.seq.delta:
            return Proof("bangE", concl, (_nds(dom, d, major, a, st), minor))
        body = J(major.seq.goal.prop.body, major.seq.goal.world)
        d2 = weaken(dom, d, (body,), st.supply)
        return Proof("bangE", concl, (major, _nds(dom, d2, minor, a, st)))
    if rule == "withI":
        e1, e2 = e.premises
        return Proof("withI", concl, (_nds(dom, d, e1, a, st), _nds(dom, d, e2, a, st)))
    if rule == "plusE":
        major, m1, m2 = e.premises
        if a in major.seq.delta:
            return Proof("plusE", concl, (_nds(dom, d, major, a, st), m1, m2))
        return Proof("plusE", concl, (major, _nds(dom, d, m1, a, st), _nds(dom, d, m2, a, st)))
    if len(e.premises) == 2:
        e1, e2 = e.premises
        if a in e1.seq.delta:
            return Proof(rule, concl, (_nds(dom, d, e1, a, st), e2), e.principal, e.witness)
        return Proof(rule, concl, (e1, _nds(dom, d, e2, a, st)), e.principal, e.witness)
    if len(e.premises) == 1:
        return Proof(rule, concl, (_nds(dom, d, e.premises[0], a, st),), e.principal, e.witness)
    raise MetaError(f"cannot substitute into {rule}")


def nd_subst_bang(dom: Domain, d: Proof, e: Proof, a: J, supply: NameSupply | None = None) -> Proof:
    """Substitute a resource-free derivation d for unrestricted hypothesis a."""
    supply = supply or NameSupply()
    return _ndsb(dom, d, e, a, _CutState(supply, default_fuel(d, e, a)))


def _ndsb(dom, d, e, a, st) -> Proof:
    _spend(st, "unrestricted substitution")
    if a in d.seq.gamma:
        return e
    new_gamma = tuple(j for j in e.seq.gamma if j != a)
    concl = sequent(new_gamma, e.seq.delta, e.seq.goal)
    if e.rule == "hypbang" and e.seq.goal == a:
        return d
    if e.rule == "bangE":
        major, minor = e.premises
        body = J(major.seq.goal.prop.body, major.seq.goal.world)
        if body == a:
            return Proof("bangE", concl, (_ndsb(dom, d, major, a, st), minor))
        d2 = weaken(dom, d, (body,), st.supply)
        return Proof("bangE", concl, (_ndsb(dom, d, major, a, st), _ndsb(dom, d2, minor, a, st)))
    prems = tuple(_ndsb(dom, d, q, a, st) for q in e.premises)
    return Proof(e.rule, concl, prems, e.principal, e.witness)


_R_TO_I = {
    "tensR": "tensI", "oneR": "oneI", "lolliR": "lolliI", "withR": "withI",
    "topR": "topI", "plusR1": "plusI1", "plusR2": "plusI2", "forallR": "forallI",
    "existsR": "existsI", "bangR": "bangI", "atR": "atI", "dnR": "dnI",
}
_I_TO_R = {v: k for k, v in _R_TO_I.items()}


def seq_to_nd(dom: Domain, p: Proof, supply: NameSupply | None = None) -> Proof:
    """Translate a sequent derivation (cuts allowed) to natural deduction."""
    supply = supply or NameSupply()
    return _s2n(dom, p, supply)


def _s2n(dom, p, supply) -> Proof:
    rule = p.rule
    s = p.seq
    if rule == "init":
        return _hyp(s.gamma, s.goal)
    if rule in _R_TO_I:
        prems = tuple(_s2n(dom, q, supply) for q in p.premises)
        return Proof(_R_TO_I[rule], s, prems, witness=p.witness)
    if rule == "copy":
        bang = Proof("hypbang", sequent(s.gamma, (), p.principal))
        return nd_subst(dom, bang, _s2n(dom, p.premises[0], supply), p.principal, supply)
    if rule == "cut":
        return nd_subst(dom, _s2n(dom, p.premises[0], supply), _s2n(dom, p.premises[1], supply), p.principal, supply)
    if rule == "cutbang":
        return nd_subst_bang(dom, _s2n(dom, p.premises[0], supply), _s2n(dom, p.premises[1], supply), p.principal, supply)

    a = p.principal
    w = a.world
    major = _hyp(s.gamma, a)
    if rule == "tensL":
        return Proof("tensE", s, (major, _s2n(dom, p.premises[0], supply)))
    if rule == "oneL":
        return Proof("oneE", s, (major, _s2n(dom, p.premises[0], supply)))
    if rule == "plusL":
        return Proof("plusE", s, (major, _s2n(dom, p.premises[0], supply), _s2n(dom, p.premises[1], supply)))
    if rule == "existsL":
        return Proof("existsE", s, (major, _s2n(dom, p.premises[0], supply)), witness=p.witness)
    if rule == "zeroL":
        return Proof("zeroE", s, (major,))
    if rule == "bangL":
        return Proof("bangE", s, (major, _s2n(dom, p.premises[0], supply)))
    if rule in ("withL1", "withL2"):
        comp = J(_which_with(a, rule), w)
        small = Proof(f"withE{rule[-1]}", sequent(s.gamma, (a,), comp), (major,))
        return nd_subst(dom, small, _s2n(dom, p.premises[0], supply), comp, supply)
    if rule == "lolliL":
        jb = J(a.prop.succ, w)
        ih1 = _s2n(dom, p.premises[0], supply)
        small = Proof("lolliE", sequent(s.gamma, ms_add(ih1.seq.delta, a), jb), (major, ih1))
        return nd_subst(dom, small, _s2n(dom, p.premises[1], supply), jb, supply)
    if rule == "forallL":
        if isinstance(a.prop, ForallT):
            inst = open_term(a.prop.body, p.witness)
        else:
            inst = kernel._open_w(dom, a.prop.body, p.witness)
        ji = J(inst, w)
        small = Proof("forallE", sequent(s.gamma, (a,), ji), (major,), witness=p.witness)
        return nd_subst(dom, small, _s2n(dom, p.premises[0], supply), ji, supply)
    if rule == "atL":
        jb = J(a.prop.body, a.prop.world)
        small = Proof("atE", sequent(s.gamma, (a,), jb), (major,))
        return nd_subst(dom, small, _s2n(dom, p.premises[0], supply), jb, supply)
    if rule == "dnL":
        jb = J(kernel._open_w(dom, a.prop.body, w), w)
        small = Proof("dnE", sequent(s.gamma, (a,), jb), (major,))
        return nd_subst(dom, small, _s2n(dom, p.premises[0], supply), jb, supply)
    raise MetaError(f"no translation for {rule}")


def _which_with(a, rule):
    return a.prop.left if rule.endswith("1") else a.prop.right


def nd_to_seq(dom: Domain, p: Proof, supply: NameSupply | None = None) -> Proof:
    """Translate natural deduction to the sequent calculus; the output may
    contain cut nodes (run eliminate_cut to clear them)."""
    supply = supply or NameSupply()
    return _n2s(dom, p, supply)


def _cutnode(d: Proof, e: Proof, a: J) -> Proof:
    return Proof("cut", _cut_concl(d, e, a), (d, e), principal=a)


def _n2s(dom, p, supply) -> Proof:
    rule = p.rule
    s = p.seq
    g = s.gamma
    if rule == "hyp":
        return identity_expand(dom, s.goal.prop, s.goal.world, g, supply)
    if rule == "hypbang":
        a = s.goal
        inner = identity_expand(dom, a.prop, a.world, g, supply)
        return Proof("copy", s, (inner,), principal=a)
    if rule in _I_TO_R:
        prems = tuple(_n2s(dom, q, supply) for q in p.premises)
        return Proof(_I_TO_R[rule], s, prems, witness=p.witness)

    major = _n2s(dom, p.premises[0], supply)
    a = p.premises[0].seq.goal
    w = a.world
    if rule == "tensE":
        minor = _n2s(dom, p.premises[1], supply)
        jl, jr = J(a.prop.left, w), J(a.prop.right, w)
        e = Proof("tensL", sequent(g, ms_add(ms_remove(ms_remove(minor.seq.delta, jl), jr), a), s.goal), (minor,), principal=a)
        return _cutnode(major, e, a)
    if rule == "oneE":
        minor = _n2s(dom, p.premises[1], supply)
        e = Proof("oneL", sequent(g, ms_add(minor.seq.delta, a), s.goal), (minor,), principal=a)
        return _cutnode(major, e, a)
    if rule == "plusE":
        m1 = _n2s(dom, p.premises[1], supply)
        m2 = _n2s(dom, p.premises[2], supply)
        rest = ms_remove(m1.seq.delta, J(a.prop.left, w))
        e = Proof("plusL", sequent(g, ms_add(rest, a), s.goal), (m1, m2), principal=a)
        return _cutnode(major, e, a)
    if rule == "existsE":
        minor = _n2s(dom, p.premises[1], supply)
        if isinstance(a.prop, ExistsT):
            inst = open_term(a.prop.body, TVar(p.witness))
        else:
            inst = kernel._open_w(dom, a.prop.body, worlds.var(p.witness))
        rest = ms_remove(minor.seq.delta, J(inst, w))
        e = Proof("existsL", sequent(g, ms_add(rest, a), s.goal), (minor,), principal=a, witness=p.witness)
        return _cutnode(major, e, a)
    if rule == "zeroE":
        extra = list(s.delta)
        for j in p.premises[0].seq.delta:
            extra.remove(j)
        e = Proof("zeroL", sequent(g, ms_add(tuple(extra), a), s.goal), (), principal=a)
        return _cutnode(major, e, a)
    if rule == "bangE":
        minor = _n2s(dom, p.premises[1], supply)
        jb = J(a.prop.body, w)
        e = Proof("bangL", sequent(g, ms_add(minor.seq.delta, a), s.goal), (minor,), principal=a)
        return _cutnode(major, e, a)
    if rule in ("withE1", "withE2"):
        comp = s.goal
        e = Proof(f"withL{rule[-1]}", sequent(g, (a,), comp), (identity_expand(dom, comp.prop, comp.world, g, supply),), principal=a)
        return _cutnode(major, e, a)
    if rule == "lolliE":
        minor = _n2s(dom, p.premises[1], supply)
        jb = J(a.prop.succ, w)
        idb = identity_expand(dom, jb.prop, w, g, supply)
        e = Proof("lolliL", sequent(g, ms_add(minor.seq.delta, a), jb), (minor, idb), principal=a)
        return _cutnode(major, e, a)
    if rule == "forallE":
        ji = s.goal
        e = Proof("forallL", sequent(g, (a,), ji), (identity_expand(dom, ji.prop, ji.world, g, supply),), principal=a, witness=p.witness)
        return _cutnode(major, e, a)
    if rule == "atE":
        jb = s.goal
        e = Proof("atL", sequent(g, (a,), jb), (identity_expand(dom, jb.prop, jb.world, g, supply),), principal=a)
        return _cutnode(major, e, a)
    if rule == "dnE":
        jb = s.goal
        e = Proof("dnL", sequent(g, (a,), jb), (identity_expand(dom, jb.prop, jb.world, g, supply),), principal=a)
        return _cutnode(major, e, a)
    raise MetaError(f"no translation for {rule}")


# ---------------------------------------------------------------------------
# Relocalisation


class _RbFail(Exception):
    pass


def relocalise(dom: Domain, p: Proof, v: World, supply: NameSupply | None = None) -> Proof:
    """Rebuild p so that every judgement world w becomes w . v.

    This is a structural reconstruction, not a metatheorem: proofs that pin
    judgements to fixed worlds (through satisfaction statements) generally
    cannot be relocated, and such cases raise RelocalisationError.
    """
    supply = supply or NameSupply()
    v = dom.normalize(v)
    shift = lambda j: J(j.prop, dom.compose(j.world, v))
    g_old = list(p.seq.gamma)
    d_old = list(p.seq.delta)
    try:
        out = _rb(dom, p, [(j, shift(j)) for j in g_old], [(j, shift(j)) for j in d_old], shift(p.seq.goal), v, supply)
    except _RbFail as e:
        raise RelocalisationError(str(e)) from None
    try:
        kernel.check(dom, out)
    except CheckError as e:
        raise RelocalisationError(f"rebuilt proof does not check: {e}") from None
    want = sequent((shift(j) for j in g_old), (shift(j) for j in d_old), shift(p.seq.goal))
    if out.seq != want:
        raise RelocalisationError("rebuilt proof proves a different sequent")
    return out


def _sort_pairs(pairs):
    return sorted(pairs, key=lambda pq: jkey(pq[0]))


def _take_split(pairs, want):
    """Partition aligned pairs so the first part's old judgements match `want`."""
    need = list(want)
    first, second = [], []
    for pr in pairs:
        if pr[0] in need:
            need.remove(pr[0])
            first.append(pr)
        else:
            second.append(pr)
    if need:
        raise _RbFail("cannot re-derive a context split")
    return first, second


def _rb(dom, old: Proof, gp, dp, ngoal: J, v, supply) -> Proof:
    """gp/dp: (old judgement, new judgement) pairs aligned with old's zones."""
    gp = _sort_pairs(gp)
    dp = _sort_pairs(dp)
    if [j for j, _ in gp] != list(old.seq.gamma) or [j for j, _ in dp] != list(old.seq.delta):
        raise _RbFail("alignment lost while rebuilding")
    concl = sequent((q for _, q in gp), (q for _, q in dp), ngoal)
    rule = old.rule

    def prem(node, gp2, dp2, goal2):
        return _rb(dom, node, gp2, dp2, goal2, v, supply)

    def principal_pair(zone_pairs):
        i = next(k for k, pr in enumerate(zone_pairs) if pr[0] == old.principal)
        return i, zone_pairs[i][1]

    if rule == "init":
        if len(dp) == 1 and dp[0][1] == ngoal and isinstance(ngoal.prop, Atom):
            return Proof("init", concl)
        raise _RbFail("init no longer closes after relocation")
    if rule == "topR":
        if isinstance(ngoal.prop, Top):
            return Proof("topR", concl)
        raise _RbFail("top mismatch")
    if rule == "zeroL":
        i, pj = principal_pair(dp)
        return Proof("zeroL", concl, principal=pj)
    if rule == "oneR":
        if dp or not isinstance(ngoal.prop, One):
            raise _RbFail("oneR no longer applies")
        return Proof("oneR", concl)
    if rule == "copy":
        i, pj = principal_pair(gp)
        inner = prem(old.premises[0], gp, dp + [(old.principal, pj)], ngoal)
        return Proof("copy", concl, (inner,), principal=pj)
    if rule == "bangR":
        inner = prem(old.premises[0], gp, [], J(ngoal.prop.body, ngoal.world))
        return Proof("bangR", concl, (inner,))
    if rule == "bangL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        oldbody = J(old.principal.prop.body, old.principal.world)
        inner = prem(old.premises[0], gp + [(oldbody, J(pj.prop.body, pj.world))], rest, ngoal)
        return Proof("bangL", concl, (inner,), principal=pj)
    if rule == "tensR":
        o1, o2 = old.premises
        first, second = _take_split(dp, o1.seq.delta)
        p1 = prem(o1, gp, first, J(ngoal.prop.left, ngoal.world))
        p2 = prem(o2, gp, second, J(ngoal.prop.right, ngoal.world))
        return Proof("tensR", concl, (p1, p2))
    if rule == "tensL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        oj = old.principal
        comp = [
            (J(oj.prop.left, oj.world), J(pj.prop.left, pj.world)),
            (J(oj.prop.right, oj.world), J(pj.prop.right, pj.world)),
        ]
        inner = prem(old.premises[0], gp, rest + comp, ngoal)
        return Proof("tensL", concl, (inner,), principal=pj)
    if rule == "oneL":
        i, pj = principal_pair(dp)
        inner = prem(old.premises[0], gp, dp[:i] + dp[i + 1:], ngoal)
        return Proof("oneL", concl, (inner,), principal=pj)
    if rule == "lolliR":
        oj = J(old.seq.goal.prop.ante, old.seq.goal.world)
        nj = J(ngoal.prop.ante, ngoal.world)
        inner = prem(old.premises[0], gp, dp + [(oj, nj)], J(ngoal.prop.succ, ngoal.world))
        return Proof("lolliR", concl, (inner,))
    if rule == "lolliL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        o1, o2 = old.premises
        oj = old.principal
        first, second = _take_split(rest, o1.seq.delta)
        p1 = prem(o1, gp, first, J(pj.prop.ante, pj.world))
        succ_pair = (J(oj.prop.succ, oj.world), J(pj.prop.succ, pj.world))
        p2 = prem(o2, gp, second + [succ_pair], ngoal)
        return Proof("lolliL", concl, (p1, p2), principal=pj)
    if rule == "withR":
        p1 = prem(old.premises[0], gp, dp, J(ngoal.prop.left, ngoal.world))
        p2 = prem(old.premises[1], gp, dp, J(ngoal.prop.right, ngoal.world))
        return Proof("withR", concl, (p1, p2))
    if rule in ("withL1", "withL2"):
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        oj = old.principal
        which = rule[-1]
        oc = oj.prop.left if which == "1" else oj.prop.right
        nc = pj.prop.left if which == "1" else pj.prop.right
        inner = prem(old.premises[0], gp, rest + [(J(oc, oj.world), J(nc, pj.world))], ngoal)
        return Proof(rule, concl, (inner,), principal=pj)
    if rule in ("plusR1", "plusR2"):
        comp = ngoal.prop.left if rule.endswith("1") else ngoal.prop.right
        inner = prem(old.premises[0], gp, dp, J(comp, ngoal.world))
        return Proof(rule, concl, (inner,))
    if rule == "plusL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        oj = old.principal
        p1 = prem(old.premises[0], gp, rest + [(J(oj.prop.left, oj.world), J(pj.prop.left, pj.world))], ngoal)
        p2 = prem(old.premises[1], gp, rest + [(J(oj.prop.right, oj.world), J(pj.prop.right, pj.world))], ngoal)
        return Proof("plusL", concl, (p1, p2), principal=pj)
    if rule == "atR":
        inner = prem(old.premises[0], gp, dp, J(ngoal.prop.body, ngoal.prop.world))
        return Proof("atR", concl, (inner,))
    if rule == "atL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        oj = old.principal
        inner = prem(old.premises[0], gp, rest + [(J(oj.prop.body, oj.prop.world), J(pj.prop.body, pj.prop.world))], ngoal)
        return Proof("atL", concl, (inner,), principal=pj)
    if rule == "dnR":
        inner = prem(old.premises[0], gp, dp, J(kernel._open_w(dom, ngoal.prop.body, ngoal.world), ngoal.world))
        return Proof("dnR", concl, (inner,))
    if rule == "dnL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        oj = old.principal
        oinst = J(kernel._open_w(dom, oj.prop.body, oj.world), oj.world)
        ninst = J(kernel._open_w(dom, pj.prop.body, pj.world), pj.world)
        inner = prem(old.premises[0], gp, rest + [(oinst, ninst)], ngoal)
        return Proof("dnL", concl, (inner,), principal=pj)
    if rule == "forallR":
        node = old
        if node.witness in seq_names(concl):
            node = rename_eigen(dom, node, supply, seq_names(concl))
        if isinstance(ngoal.prop, ForallT):
            obody = J(open_term(node.seq.goal.prop.body, TVar(node.witness)), node.seq.goal.world)
            nbody = J(open_term(ngoal.prop.body, TVar(node.witness)), ngoal.world)
        else:
            obody = J(kernel._open_w(dom, node.seq.goal.prop.body, worlds.var(node.witness)), node.seq.goal.world)
            nbody = J(kernel._open_w(dom, ngoal.prop.body, worlds.var(node.witness)), ngoal.world)
        inner = prem(node.premises[0], gp, dp, nbody)
        return Proof("forallR", concl, (inner,), witness=node.witness)
    if rule == "existsL":
        i, pj = principal_pair(dp)
        rest = dp[:i] + dp[i + 1:]
        node = old
        if node.witness in seq_names(concl):
            node = rename_eigen(dom, node, supply, seq_names(concl))
        oj = node.principal
        if isinstance(oj.prop, ExistsT):
            oinst = J(open_term(oj.prop.body, TVar(node.witness)), oj.world)
            ninst = J(open_term(pj.prop.body, TVar(node.witness)), pj.world)
        else:
            oinst = J(kernel._open_w(dom, oj.prop.body, worlds.var(node.witness)), oj.world)
            ninst = J(kernel._open_w(dom, pj.prop.body, worlds.var(node.witness)), pj.world)
        inner = prem(node.premises[0], gp, rest + [(oinst, ninst)], ngoal)
        return Proof("existsL", concl, (inner,), principal=pj, witness=node.witness)
    if rule == "existsR":
        return _rb_instantiation(dom, old, gp, dp, ngoal, v, supply, left=False, concl=concl)
    if rule == "forallL":
        return _rb_instantiation(dom, old, gp, dp, ngoal, v, supply, left=True, concl=concl)
    raise _RbFail(f"relocalisation does not support {rule}")


def _rb_instantiation(dom, old, gp, dp, ngoal, v, supply, left, concl):
    """existsR / forallL: a world witness may need the relocation factor."""
    if left:
        i = next(k for k, pr in enumerate(dp) if pr[0] == old.principal)
        pj = dp[i][1]
        rest = dp[:i] + dp[i + 1:]
        shape = pj.prop
    else:
        shape = ngoal.prop
    term_sort = isinstance(shape, (ForallT, ExistsT))
    if term_sort:
        candidates = [old.witness]
    else:
        candidates = [old.witness, dom.compose(old.witness, v)]
    last = None
    for wit in candidates:
        if term_sort:
            ninst = open_term(shape.body, wit)
            oinst = open_term((old.principal if left else old.seq.goal).prop.body, wit)
        else:
            ninst = kernel._open_w(dom, shape.body, wit)
            oinst = kernel._open_w(dom, (old.principal if left else old.seq.goal).prop.body, old.witness)
        try:
            if left:
                world = old.principal.world
                inner = _rb(dom, old.premises[0], gp, rest + [(J(oinst, world), J(ninst, pj.world))], ngoal, v, supply)
                return Proof("forallL", concl, (inner,), principal=pj, witness=wit)
            inner = _rb(dom, old.premises[0], gp, dp, J(ninst, ngoal.world), v, supply)
            return Proof("existsR", concl, (inner,), witness=wit)
        except _RbFail as e:
            last = e
    raise last or _RbFail("no viable witness")


# ---------------------------------------------------------------------------
# The modal collapse derivation


def derive_s5(dom: Domain, a=None, w: World | None = None, supply: NameSupply | None = None) -> Proof:
    """Possibility implies known possibility: from (ex u. A at u) @ w the
    sequent calculus derives (all u. ((ex v. A at v) at u)) @ w."""
    supply = supply or NameSupply()
    if a is None:
        a = Atom("p")
    if w is None:
        w = worlds.RID
    a = syntax.normalize_worlds(dom, a)
    w = dom.normalize(w)
    left = syntax.mk_dia_global(a)
    right = syntax.mk_bangbang(left)
    avoid = seq_names(sequent((), (J(left, w),), J(right, w)))
    an = supply.fresh("a", avoid)
    bn = supply.fresh("b", avoid | {an})
    wa, wb = worlds.var(an), worlds.var(bn)

    ja = J(a, wa)
    core = identity_expand(dom, a, wa, (), supply)
    s_atR2 = sequent((), (ja,), J(At(a, wa), wb))
    n_atR2 = Proof("atR", s_atR2, (core,))
    s_exR = sequent((), (ja,), J(left, wb))
    n_exR = Proof("existsR", s_exR, (n_atR2,), witness=wa)
    s_atL = sequent((), (J(At(a, wa), w),), J(left, wb))
    n_atL = Proof("atL", s_atL, (n_exR,), principal=J(At(a, wa), w))
    s_atR1 = sequent((), (J(At(a, wa), w),), J(At(left, wb), w))
    n_atR1 = Proof("atR", s_atR1, (n_atL,))
    s_allR = sequent((), (J(At(a, wa), w),), J(right, w))
    n_allR = Proof("forallR", s_allR, (n_atR1,), witness=bn)
    s_exL = sequent((), (J(left, w),), J(right, w))
    return Proof("existsL", s_exL, (n_allR,), principal=J(left, w), witness=an)
