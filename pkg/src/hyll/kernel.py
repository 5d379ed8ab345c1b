"""Proof certificates and the trusted checker.

A sequent has an unrestricted zone (a set of judgements, written Gamma), a
linear zone (a multiset, written Delta) and a goal judgement.  A judgement
pairs a proposition with the world it is asserted at.

Certificates are explicit trees: every node carries its full conclusion
sequent, so multiplicative context splits are stored rather than
reconstructed.  The checker validates each node against the rule schema
and the recorded premises; it trusts nothing else.

Two admissible node kinds, ``cut`` and ``cutbang``, may appear in
certificates produced by the natural-deduction translation.  The
metatheory module removes them; `is_cut_free` reports their absence.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax, worlds
from .syntax import (
    Atom, Bang, Down, ExistsT, ExistsW, ForallT, ForallW, Lolli, One, Plus,
    At, Tensor, Top, TVar, With, Zero, open_term, open_world, prop_str,
)
from .worlds import Domain, World


class CheckError(Exception):
    pass


@dataclass(frozen=True)
class J:
    """A judgement: proposition A is true at world w."""

    prop: object
    world: World

    def __repr__(self):
        return f"{prop_str(self.prop)} @ {syntax._world_tight(self.world, ())}"


def jkey(j: J):
    return (prop_str(j.prop), repr(j.world))


@dataclass(frozen=True)
class Sequent:
    gamma: tuple  # sorted, duplicate-free
    delta: tuple  # sorted multiset
    goal: J

    def __repr__(self):
        g = ", ".join(map(repr, self.gamma)) or "."
        d = ", ".join(map(repr, self.delta)) or "."
        return f"{g} ; {d} |- {self.goal!r}"


def sequent(gamma, delta, goal: J) -> Sequent:
    """Build a sequent in canonical order."""
    g = tuple(sorted(set(gamma), key=jkey))
    d = tuple(sorted(delta, key=jkey))
    return Sequent(g, d, goal)


def normalize_judgement(dom: Domain, j: J) -> J:
    return J(syntax.normalize_worlds(dom, j.prop), dom.normalize(j.world))


def normalize_sequent(dom: Domain, s: Sequent) -> Sequent:
    return sequent(
        (normalize_judgement(dom, j) for j in s.gamma),
        (normalize_judgement(dom, j) for j in s.delta),
        normalize_judgement(dom, s.goal),
    )


# -- multiset helpers over sorted tuples -----------------------------------


def ms_add(delta, *js):
    return tuple(sorted(delta + js, key=jkey))


def ms_remove(delta, j):
    out = list(delta)
    try:
        out.remove(j)
    except ValueError:
        raise CheckError(f"{j!r} not present in linear zone") from None
    return tuple(out)


def ms_union(*deltas):
    return tuple(sorted((j for d in deltas for j in d), key=jkey))


def g_add(gamma, *js):
    return tuple(sorted(set(gamma) | set(js), key=jkey))


# ---------------------------------------------------------------------------
# Proof trees


@dataclass(frozen=True)
class Proof:
    rule: str
    seq: Sequent
    premises: tuple = ()
    principal: J | None = None  # judgement acted on, for left rules / copy / cut
    witness: object = None  # Term/World for instantiations, fresh name for eigenrules

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def rules_used(self) -> set:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules_used()
        return out


def is_cut_free(p: Proof) -> bool:
    return not ({"cut", "cutbang"} & p.rules_used())


SEQ_RULES = frozenset(
    "init copy tensR tensL oneR oneL lolliR lolliL topR withR withL1 withL2 "
    "plusR1 plusR2 plusL zeroL forallR forallL existsR existsL bangR bangL "
    "atR atL dnR dnL cut cutbang".split()
)

ND_RULES = frozenset(
    "hyp hypbang tensI tensE oneI oneE lolliI lolliE withI withE1 withE2 "
    "plusI1 plusI2 plusE topI zeroE forallI forallE existsI existsE bangI "
    "bangE atI atE dnI dnE".split()
)


class NameSupply:
    """Deterministic fresh-name generation for eigenvariables."""

    def __init__(self, start=0):
        self.n = start

    def fresh(self, hint="x", avoid=frozenset()) -> str:
        base = hint.split("#")[0] or "x"
        while True:
            self.n += 1
            name = f"{base}#{self.n}"
            if name not in avoid:
                return name


def seq_term_names(s: Sequent) -> set:
    """Free term-variable names occurring anywhere in the sequent."""
    out = set()
    for j in s.gamma + s.delta + (s.goal,):
        out |= syntax.free_term_vars(j.prop)
    return out


def seq_world_names(s: Sequent) -> set:
    """World variable and constant names occurring anywhere in the sequent."""
    out = set()
    for j in s.gamma + s.delta + (s.goal,):
        out |= syntax.free_world_vars(j.prop)
        out |= syntax.world_constants(j.prop)
        out |= worlds.free_vars(j.world)
        out |= worlds.constants(j.world)
    return out


# ---------------------------------------------------------------------------
# The checker


def check(dom: Domain, p: Proof, nd: bool = False) -> None:
    """Validate a certificate; raises CheckError with the offending node."""
    table = _ND_CHECKS if nd else _SEQ_CHECKS
    rules = ND_RULES if nd else SEQ_RULES
    stack = [p]
    while stack:
        node = stack.pop()
        if node.rule not in rules:
            raise CheckError(f"unknown rule {node.rule!r}")
        try:
            table[node.rule](dom, node)
        except CheckError as e:
            raise CheckError(f"{node.rule} at [{node.seq!r}]: {e}") from None
        stack.extend(node.premises)


def checks(dom: Domain, p: Proof, nd: bool = False) -> bool:
    try:
        check(dom, p, nd=nd)
        return True
    except CheckError:
        return False


def _expect(cond, msg):
    if not cond:
        raise CheckError(msg)


def _arity(node, n):
    _expect(len(node.premises) == n, f"expected {n} premises, got {len(node.premises)}")


def _same_gamma(node):
    for p in node.premises:
        _expect(p.seq.gamma == node.seq.gamma, "unrestricted zone must not change")


def _same_goal(node, prem):
    _expect(prem.seq.goal == node.seq.goal, "goal must be preserved")


def _principal(node) -> J:
    _expect(node.principal is not None, "missing principal judgement")
    return node.principal


def _delta_minus_principal(node) -> tuple:
    return ms_remove(node.seq.delta, _principal(node))


def _fresh_term_eigen(node) -> TVar:
    name = node.witness
    _expect(isinstance(name, str), "eigenvariable name required")
    _expect(name not in seq_term_names(node.seq), f"eigenvariable {name} not fresh")
    return TVar(name)


def _fresh_world_eigen(node) -> World:
    name = node.witness
    _expect(isinstance(name, str), "eigenvariable name required")
    _expect(name not in seq_world_names(node.seq), f"eigenvariable {name} not fresh")
    return worlds.var(name)


def _open_w(dom, body, w):
    return syntax.normalize_worlds(dom, open_world(body, w))


def _closed_term(t) -> bool:
    match t:
        case syntax.TBound():
            return False
        case syntax.TApp(_, args):
            return all(_closed_term(a) for a in args)
        case syntax.TWorld(w):
            return worlds.max_bound(w) < 0
        case _:
            return True


def _check_witness_closed(node, want_world: bool):
    if want_world:
        _expect(isinstance(node.witness, World), "world witness required")
        _expect(worlds.max_bound(node.witness) < 0, "witness must be closed")
    else:
        _expect(node.witness is not None and not isinstance(node.witness, (World, str)), "term witness required")
        _expect(_closed_term(node.witness), "witness must be closed")


# -- sequent calculus rules -------------------------------------------------


def _ck_init(dom, node):
    _arity(node, 0)
    _expect(isinstance(node.seq.goal.prop, Atom), "init concludes atoms only")
    _expect(node.seq.delta == (node.seq.goal,), "linear zone must be exactly the goal")


def _ck_copy(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _expect(a in node.seq.gamma, "copy principal must be unrestricted")
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    _expect(node.premises[0].seq.delta == ms_add(node.seq.delta, a), "copy adds one linear occurrence")


def _ck_tensR(dom, node):
    _arity(node, 2)
    _expect(isinstance(node.seq.goal.prop, Tensor), "goal must be a tensor")
    w = node.seq.goal.world
    a, b = node.seq.goal.prop.left, node.seq.goal.prop.right
    p1, p2 = node.premises
    _same_gamma(node)
    _expect(p1.seq.goal == J(a, w) and p2.seq.goal == J(b, w), "premise goals are the factors")
    _expect(ms_union(p1.seq.delta, p2.seq.delta) == node.seq.delta, "split must partition the linear zone")


def _ck_tensL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _expect(isinstance(a.prop, Tensor), "principal must be a tensor")
    rest = _delta_minus_principal(node)
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    want = ms_add(rest, J(a.prop.left, a.world), J(a.prop.right, a.world))
    _expect(node.premises[0].seq.delta == want, "premise gains both factors")


def _ck_oneR(dom, node):
    _arity(node, 0)
    _expect(isinstance(node.seq.goal.prop, One), "goal must be 1")
    _expect(node.seq.delta == (), "linear zone must be empty")


def _ck_oneL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _expect(isinstance(a.prop, One), "principal must be 1")
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    _expect(node.premises[0].seq.delta == _delta_minus_principal(node), "premise drops the unit")


def _ck_lolliR(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    _expect(isinstance(g.prop, Lolli), "goal must be linear implication")
    _same_gamma(node)
    prem = node.premises[0]
    _expect(prem.seq.goal == J(g.prop.succ, g.world), "premise goal is the consequent")
    _expect(prem.seq.delta == ms_add(node.seq.delta, J(g.prop.ante, g.world)), "premise assumes the antecedent")


def _ck_lolliL(dom, node):
    _arity(node, 2)
    a = _principal(node)
    _expect(isinstance(a.prop, Lolli), "principal must be linear implication")
    rest = _delta_minus_principal(node)
    p1, p2 = node.premises
    _same_gamma(node)
    _expect(p1.seq.goal == J(a.prop.ante, a.world), "first premise proves the antecedent")
    _same_goal(node, p2)
    p2_delta_expect = ms_remove(p2.seq.delta, J(a.prop.succ, a.world))
    _expect(ms_union(p1.seq.delta, p2_delta_expect) == rest, "split must partition the linear zone")


def _ck_topR(dom, node):
    _arity(node, 0)
    _expect(isinstance(node.seq.goal.prop, Top), "goal must be top")


def _ck_withR(dom, node):
    _arity(node, 2)
    g = node.seq.goal
    _expect(isinstance(g.prop, With), "goal must be additive conjunction")
    p1, p2 = node.premises
    _same_gamma(node)
    _expect(p1.seq.goal == J(g.prop.left, g.world) and p2.seq.goal == J(g.prop.right, g.world), "premises prove both components")
    _expect(p1.seq.delta == node.seq.delta and p2.seq.delta == node.seq.delta, "additive premises share the linear zone")


def _with_component(a, which):
    return a.prop.left if which == 1 else a.prop.right


def _ck_withL(which):
    def ck(dom, node):
        _arity(node, 1)
        a = _principal(node)
        _expect(isinstance(a.prop, With), "principal must be additive conjunction")
        _same_gamma(node)
        _same_goal(node, node.premises[0])
        want = ms_add(_delta_minus_principal(node), J(_with_component(a, which), a.world))
        _expect(node.premises[0].seq.delta == want, "premise keeps the chosen component")

    return ck


def _ck_plusR(which):
    def ck(dom, node):
        _arity(node, 1)
        g = node.seq.goal
        _expect(isinstance(g.prop, Plus), "goal must be additive disjunction")
        comp = g.prop.left if which == 1 else g.prop.right
        _same_gamma(node)
        _expect(node.premises[0].seq.goal == J(comp, g.world), "premise proves the chosen component")
        _expect(node.premises[0].seq.delta == node.seq.delta, "linear zone unchanged")

    return ck


def _ck_plusL(dom, node):
    _arity(node, 2)
    a = _principal(node)
    _expect(isinstance(a.prop, Plus), "principal must be additive disjunction")
    rest = _delta_minus_principal(node)
    p1, p2 = node.premises
    _same_gamma(node)
    _same_goal(node, p1)
    _same_goal(node, p2)
    _expect(p1.seq.delta == ms_add(rest, J(a.prop.left, a.world)), "left premise assumes left component")
    _expect(p2.seq.delta == ms_add(rest, J(a.prop.right, a.world)), "right premise assumes right component")


def _ck_zeroL(dom, node):
    _arity(node, 0)
    a = _principal(node)
    _expect(isinstance(a.prop, Zero), "principal must be 0")
    _expect(a in node.seq.delta, "principal must be linear")


def _ck_forallR(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    prem = node.premises[0]
    _same_gamma(node)
    _expect(prem.seq.delta == node.seq.delta, "linear zone unchanged")
    if isinstance(g.prop, ForallT):
        x = _fresh_term_eigen(node)
        want = J(open_term(g.prop.body, x), g.world)
    elif isinstance(g.prop, ForallW):
        u = _fresh_world_eigen(node)
        want = J(_open_w(dom, g.prop.body, u), g.world)
    else:
        raise CheckError("goal must be universally quantified")
    _expect(prem.seq.goal == want, "premise opens the binder with the eigenvariable")


def _ck_forallL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    if isinstance(a.prop, ForallT):
        _check_witness_closed(node, want_world=False)
        inst = open_term(a.prop.body, node.witness)
    elif isinstance(a.prop, ForallW):
        _check_witness_closed(node, want_world=True)
        inst = _open_w(dom, a.prop.body, node.witness)
    else:
        raise CheckError("principal must be universally quantified")
    want = ms_add(_delta_minus_principal(node), J(inst, a.world))
    _expect(node.premises[0].seq.delta == want, "premise holds the instance")


def _ck_existsR(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    _same_gamma(node)
    _expect(node.premises[0].seq.delta == node.seq.delta, "linear zone unchanged")
    if isinstance(g.prop, ExistsT):
        _check_witness_closed(node, want_world=False)
        inst = open_term(g.prop.body, node.witness)
    elif isinstance(g.prop, ExistsW):
        _check_witness_closed(node, want_world=True)
        inst = _open_w(dom, g.prop.body, node.witness)
    else:
        raise CheckError("goal must be existentially quantified")
    _expect(node.premises[0].seq.goal == J(inst, g.world), "premise proves the instance")


def _ck_existsL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    if isinstance(a.prop, ExistsT):
        x = _fresh_term_eigen(node)
        inst = open_term(a.prop.body, x)
    elif isinstance(a.prop, ExistsW):
        u = _fresh_world_eigen(node)
        inst = _open_w(dom, a.prop.body, u)
    else:
        raise CheckError("principal must be existentially quantified")
    want = ms_add(_delta_minus_principal(node), J(inst, a.world))
    _expect(node.premises[0].seq.delta == want, "premise opens the binder with the eigenvariable")


def _ck_bangR(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    _expect(isinstance(g.prop, Bang), "goal must be banged")
    _expect(node.seq.delta == (), "linear zone must be empty")
    _same_gamma(node)
    prem = node.premises[0]
    _expect(prem.seq.delta == (), "premise linear zone must be empty")
    _expect(prem.seq.goal == J(g.prop.body, g.world), "premise proves the body")


def _ck_bangL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _expect(isinstance(a.prop, Bang), "principal must be banged")
    prem = node.premises[0]
    _expect(prem.seq.gamma == g_add(node.seq.gamma, J(a.prop.body, a.world)), "body moves to the unrestricted zone")
    _same_goal(node, prem)
    _expect(prem.seq.delta == _delta_minus_principal(node), "principal leaves the linear zone")


def _ck_atR(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    _expect(isinstance(g.prop, At), "goal must be a satisfaction statement")
    _same_gamma(node)
    _expect(node.premises[0].seq.delta == node.seq.delta, "linear zone unchanged")
    _expect(node.premises[0].seq.goal == J(g.prop.body, g.prop.world), "premise relocates to the named world")


def _ck_atL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _expect(isinstance(a.prop, At), "principal must be a satisfaction statement")
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    want = ms_add(_delta_minus_principal(node), J(a.prop.body, a.prop.world))
    _expect(node.premises[0].seq.delta == want, "premise relocates to the named world")


def _ck_dnR(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    _expect(isinstance(g.prop, Down), "goal must be a world binder")
    _same_gamma(node)
    _expect(node.premises[0].seq.delta == node.seq.delta, "linear zone unchanged")
    want = J(_open_w(dom, g.prop.body, g.world), g.world)
    _expect(node.premises[0].seq.goal == want, "premise captures the current world")


def _ck_dnL(dom, node):
    _arity(node, 1)
    a = _principal(node)
    _expect(isinstance(a.prop, Down), "principal must be a world binder")
    _same_gamma(node)
    _same_goal(node, node.premises[0])
    want = ms_add(_delta_minus_principal(node), J(_open_w(dom, a.prop.body, a.world), a.world))
    _expect(node.premises[0].seq.delta == want, "premise captures the judgement world")


def _ck_cut(dom, node):
    _arity(node, 2)
    a = _principal(node)
    d, e = node.premises
    _same_gamma(node)
    _expect(d.seq.goal == a, "first premise proves the cut judgement")
    _same_goal(node, e)
    _expect(ms_union(d.seq.delta, ms_remove(e.seq.delta, a)) == node.seq.delta, "cut contexts must recombine")


def _ck_cutbang(dom, node):
    _arity(node, 2)
    a = _principal(node)
    d, e = node.premises
    _expect(d.seq.gamma == node.seq.gamma, "first premise shares the unrestricted zone")
    _expect(d.seq.delta == () and d.seq.goal == a, "first premise proves the cut judgement with no resources")
    _expect(e.seq.gamma == g_add(node.seq.gamma, a), "second premise assumes the cut judgement unrestricted")
    _expect(e.seq.delta == node.seq.delta, "linear zone unchanged")
    _same_goal(node, e)


_SEQ_CHECKS = {
    "init": _ck_init,
    "copy": _ck_copy,
    "tensR": _ck_tensR,
    "tensL": _ck_tensL,
    "oneR": _ck_oneR,
    "oneL": _ck_oneL,
    "lolliR": _ck_lolliR,
    "lolliL": _ck_lolliL,
    "topR": _ck_topR,
    "withR": _ck_withR,
    "withL1": _ck_withL(1),
    "withL2": _ck_withL(2),
    "plusR1": _ck_plusR(1),
    "plusR2": _ck_plusR(2),
    "plusL": _ck_plusL,
    "zeroL": _ck_zeroL,
    "forallR": _ck_forallR,
    "forallL": _ck_forallL,
    "existsR": _ck_existsR,
    "existsL": _ck_existsL,
    "bangR": _ck_bangR,
    "bangL": _ck_bangL,
    "atR": _ck_atR,
    "atL": _ck_atL,
    "dnR": _ck_dnR,
    "dnL": _ck_dnL,
    "cut": _ck_cut,
    "cutbang": _ck_cutbang,
}


# -- natural deduction ------------------------------------------------------
#
# Same tree shape, introduction/elimination rule set.  Elimination nodes
# store the major premise first.


def _ck_hyp(dom, node):
    _arity(node, 0)
    _expect(node.seq.delta == (node.seq.goal,), "hypothesis must be the only resource")


def _ck_hypbang(dom, node):
    _arity(node, 0)
    _expect(node.seq.goal in node.seq.gamma, "goal must be an unrestricted hypothesis")
    _expect(node.seq.delta == (), "linear zone must be empty")


def _ck_tensI(dom, node):
    _ck_tensR(dom, node)


def _ck_tensE(dom, node):
    _arity(node, 2)
    major, minor = node.premises
    a = major.seq.goal
    _expect(isinstance(a.prop, Tensor), "major premise must prove a tensor")
    _same_gamma(node)
    _same_goal(node, minor)
    rest = ms_remove(ms_remove(minor.seq.delta, J(a.prop.left, a.world)), J(a.prop.right, a.world))
    _expect(ms_union(major.seq.delta, rest) == node.seq.delta, "contexts must recombine")


def _ck_oneI(dom, node):
    _ck_oneR(dom, node)


def _ck_oneE(dom, node):
    _arity(node, 2)
    major, minor = node.premises
    _expect(isinstance(major.seq.goal.prop, One), "major premise must prove 1")
    _same_gamma(node)
    _same_goal(node, minor)
    _expect(ms_union(major.seq.delta, minor.seq.delta) == node.seq.delta, "contexts must recombine")


def _ck_lolliI(dom, node):
    _ck_lolliR(dom, node)


def _ck_lolliE(dom, node):
    _arity(node, 2)
    major, minor = node.premises
    a = major.seq.goal
    _expect(isinstance(a.prop, Lolli), "major premise must prove an implication")
    _same_gamma(node)
    _expect(minor.seq.goal == J(a.prop.ante, a.world), "minor premise proves the antecedent")
    _expect(node.seq.goal == J(a.prop.succ, a.world), "conclusion is the consequent")
    _expect(ms_union(major.seq.delta, minor.seq.delta) == node.seq.delta, "contexts must recombine")


def _ck_withI(dom, node):
    _ck_withR(dom, node)


def _ck_withE(which):
    def ck(dom, node):
        _arity(node, 1)
        major = node.premises[0]
        a = major.seq.goal
        _expect(isinstance(a.prop, With), "major premise must prove an additive conjunction")
        _same_gamma(node)
        _expect(node.seq.goal == J(_with_component(a, which), a.world), "conclusion is the component")
        _expect(major.seq.delta == node.seq.delta, "linear zone unchanged")

    return ck


def _ck_plusI(which):
    return _ck_plusR(which)


def _ck_plusE(dom, node):
    _arity(node, 3)
    major, m1, m2 = node.premises
    a = major.seq.goal
    _expect(isinstance(a.prop, Plus), "major premise must prove an additive disjunction")
    _same_gamma(node)
    _same_goal(node, m1)
    _same_goal(node, m2)
    r1 = ms_remove(m1.seq.delta, J(a.prop.left, a.world))
    r2 = ms_remove(m2.seq.delta, J(a.prop.right, a.world))
    _expect(r1 == r2, "minor premises share their extra resources")
    _expect(ms_union(major.seq.delta, r1) == node.seq.delta, "contexts must recombine")


def _ck_topI(dom, node):
    _ck_topR(dom, node)


def _ck_zeroE(dom, node):
    _arity(node, 1)
    major = node.premises[0]
    _expect(isinstance(major.seq.goal.prop, Zero), "major premise must prove 0")
    _same_gamma(node)
    for j in major.seq.delta:
        _expect(j in node.seq.delta, "conclusion may only add resources")


def _ck_forallI(dom, node):
    _ck_forallR(dom, node)


def _ck_forallE(dom, node):
    _arity(node, 1)
    major = node.premises[0]
    a = major.seq.goal
    _same_gamma(node)
    _expect(major.seq.delta == node.seq.delta, "linear zone unchanged")
    if isinstance(a.prop, ForallT):
        _check_witness_closed(node, want_world=False)
        inst = open_term(a.prop.body, node.witness)
    elif isinstance(a.prop, ForallW):
        _check_witness_closed(node, want_world=True)
        inst = _open_w(dom, a.prop.body, node.witness)
    else:
        raise CheckError("major premise must prove a universal")
    _expect(node.seq.goal == J(inst, a.world), "conclusion instantiates the binder")


def _ck_existsI(dom, node):
    _ck_existsR(dom, node)


def _ck_existsE(dom, node):
    _arity(node, 2)
    major, minor = node.premises
    a = major.seq.goal
    _same_gamma(node)
    _same_goal(node, minor)
    if isinstance(a.prop, ExistsT):
        x = _fresh_term_eigen(node)
        inst = open_term(a.prop.body, x)
    elif isinstance(a.prop, ExistsW):
        u = _fresh_world_eigen(node)
        inst = _open_w(dom, a.prop.body, u)
    else:
        raise CheckError("major premise must prove an existential")
    rest = ms_remove(minor.seq.delta, J(inst, a.world))
    _expect(ms_union(major.seq.delta, rest) == node.seq.delta, "contexts must recombine")


def _ck_bangI(dom, node):
    _ck_bangR(dom, node)


def _ck_bangE(dom, node):
    _arity(node, 2)
    major, minor = node.premises
    a = major.seq.goal
    _expect(isinstance(a.prop, Bang), "major premise must prove a banged proposition")
    _expect(major.seq.gamma == node.seq.gamma, "major premise shares the unrestricted zone")
    _expect(minor.seq.gamma == g_add(node.seq.gamma, J(a.prop.body, a.world)), "minor premise assumes the body unrestricted")
    _same_goal(node, minor)
    _expect(ms_union(major.seq.delta, minor.seq.delta) == node.seq.delta, "contexts must recombine")


def _ck_atI(dom, node):
    _arity(node, 1)
    g = node.seq.goal
    _expect(isinstance(g.prop, At), "conclusion must be a satisfaction statement")
    _same_gamma(node)
    _expect(node.premises[0].seq.delta == node.seq.delta, "linear zone unchanged")
    _expect(node.premises[0].seq.goal == J(g.prop.body, g.prop.world), "premise proves the body at the named world")


def _ck_atE(dom, node):
    _arity(node, 1)
    major = node.premises[0]
    a = major.seq.goal
    _expect(isinstance(a.prop, At), "major premise must prove a satisfaction statement")
    _same_gamma(node)
    _expect(major.seq.delta == node.seq.delta, "linear zone unchanged")
    _expect(node.seq.goal == J(a.prop.body, a.prop.world), "conclusion moves to the named world")


def _ck_dnI(dom, node):
    _ck_dnR(dom, node)


def _ck_dnE(dom, node):
    _arity(node, 1)
    major = node.premises[0]
    a = major.seq.goal
    _expect(isinstance(a.prop, Down), "major premise must prove a world binder")
    _same_gamma(node)
    _expect(major.seq.delta == node.seq.delta, "linear zone unchanged")
    _expect(node.seq.goal == J(_open_w(dom, a.prop.body, a.world), a.world), "conclusion captures the world")


_ND_CHECKS = {
    "hyp": _ck_hyp,
    "hypbang": _ck_hypbang,
    "tensI": _ck_tensI,
    "tensE": _ck_tensE,
    "oneI": _ck_oneI,
    "oneE": _ck_oneE,
    "lolliI": _ck_lolliI,
    "lolliE": _ck_lolliE,
    "withI": _ck_withI,
    "withE1": _ck_withE(1),
    "withE2": _ck_withE(2),
    "plusI1": _ck_plusI(1),
    "plusI2": _ck_plusI(2),
    "plusE": _ck_plusE,
    "topI": _ck_topI,
    "zeroE": _ck_zeroE,
    "forallI": _ck_forallI,
    "forallE": _ck_forallE,
    "existsI": _ck_existsI,
    "existsE": _ck_existsE,
    "bangI": _ck_bangI,
    "bangE": _ck_bangE,
    "atI": _ck_atI,
    "atE": _ck_atE,
    "dnI": _ck_dnI,
    "dnE": _ck_dnE,
}


# ---------------------------------------------------------------------------
# Backward rule application (used by the unfocused prover and tests; the
# checker above never calls into this).


def apply_rule(dom, s: Sequent, rule: str, principal: J | None = None, witness=None, split=None):
    """Return the list of premise sequents for applying `rule` to `s`.

    `split` names the part of Delta sent to the first premise for the
    multiplicative two-premise rules.  Raises CheckError when the rule does
    not apply.
    """
    g, d, goal = s.gamma, s.delta, s.goal
    if rule == "init":
        _expect(isinstance(goal.prop, Atom) and d == (goal,), "init does not apply")
        return []
    if rule == "copy":
        _expect(principal in g, "copy principal must be unrestricted")
        return [sequent(g, ms_add(d, principal), goal)]
    if rule == "tensR":
        _expect(isinstance(goal.prop, Tensor), "goal is not a tensor")
        left = tuple(split or ())
        right = d
        for j in left:
            right = ms_remove(right, j)
        return [sequent(g, left, J(goal.prop.left, goal.world)),
                sequent(g, right, J(goal.prop.right, goal.world))]
    if rule == "lolliL":
        _expect(principal is not None and isinstance(principal.prop, Lolli), "principal is not an implication")
        rest = ms_remove(d, principal)
        left = tuple(split or ())
        right = rest
        for j in left:
            right = ms_remove(right, j)
        return [sequent(g, left, J(principal.prop.ante, principal.world)),
                sequent(g, ms_add(right, J(principal.prop.succ, principal.world)), goal)]
    if rule == "oneR":
        _expect(isinstance(goal.prop, One) and d == (), "oneR does not apply")
        return []
    if rule == "topR":
        _expect(isinstance(goal.prop, Top), "goal is not top")
        return []
    if rule == "zeroL":
        _expect(principal is not None and isinstance(principal.prop, Zero) and principal in d, "zeroL does not apply")
        return []
    if rule == "oneL":
        _expect(principal is not None and isinstance(principal.prop, One), "principal is not 1")
        return [sequent(g, ms_remove(d, principal), goal)]
    if rule == "tensL":
        _expect(principal is not None and isinstance(principal.prop, Tensor), "principal is not a tensor")
        rest = ms_remove(d, principal)
        return [sequent(g, ms_add(rest, J(principal.prop.left, principal.world), J(principal.prop.right, principal.world)), goal)]
    if rule == "lolliR":
        _expect(isinstance(goal.prop, Lolli), "goal is not an implication")
        return [sequent(g, ms_add(d, J(goal.prop.ante, goal.world)), J(goal.prop.succ, goal.world))]
    if rule == "withR":
        _expect(isinstance(goal.prop, With), "goal is not an additive conjunction")
        return [sequent(g, d, J(goal.prop.left, goal.world)), sequent(g, d, J(goal.prop.right, goal.world))]
    if rule in ("withL1", "withL2"):
        _expect(principal is not None and isinstance(principal.prop, With), "principal is not an additive conjunction")
        comp = _with_component(principal, 1 if rule == "withL1" else 2)
        return [sequent(g, ms_add(ms_remove(d, principal), J(comp, principal.world)), goal)]
    if rule in ("plusR1", "plusR2"):
        _expect(isinstance(goal.prop, Plus), "goal is not an additive disjunction")
        comp = goal.prop.left if rule == "plusR1" else goal.prop.right
        return [sequent(g, d, J(comp, goal.world))]
    if rule == "plusL":
        _expect(principal is not None and isinstance(principal.prop, Plus), "principal is not an additive disjunction")
        rest = ms_remove(d, principal)
        return [sequent(g, ms_add(rest, J(principal.prop.left, principal.world)), goal),
                sequent(g, ms_add(rest, J(principal.prop.right, principal.world)), goal)]
    if rule == "forallR":
        _expect(isinstance(goal.prop, (ForallT, ForallW)), "goal is not universal")
        if isinstance(goal.prop, ForallT):
            body = open_term(goal.prop.body, TVar(witness))
        else:
            body = _open_w(dom, goal.prop.body, worlds.var(witness))
        return [sequent(g, d, J(body, goal.world))]
    if rule == "forallL":
        _expect(principal is not None and isinstance(principal.prop, (ForallT, ForallW)), "principal is not universal")
        if isinstance(principal.prop, ForallT):
            inst = open_term(principal.prop.body, witness)
        else:
            inst = _open_w(dom, principal.prop.body, witness)
        return [sequent(g, ms_add(ms_remove(d, principal), J(inst, principal.world)), goal)]
    if rule == "existsR":
        _expect(isinstance(goal.prop, (ExistsT, ExistsW)), "goal is not existential")
        if isinstance(goal.prop, ExistsT):
            inst = open_term(goal.prop.body, witness)
        else:
            inst = _open_w(dom, goal.prop.body, witness)
        return [sequent(g, d, J(inst, goal.world))]
    if rule == "existsL":
        _expect(principal is not None and isinstance(principal.prop, (ExistsT, ExistsW)), "principal is not existential")
        if isinstance(principal.prop, ExistsT):
            body = open_term(principal.prop.body, TVar(witness))
        else:
            body = _open_w(dom, principal.prop.body, worlds.var(witness))
        return [sequent(g, ms_add(ms_remove(d, principal), J(body, principal.world)), goal)]
    if rule == "bangR":
        _expect(isinstance(goal.prop, Bang) and d == (), "bangR does not apply")
        return [sequent(g, (), J(goal.prop.body, goal.world))]
    if rule == "bangL":
        _expect(principal is not None and isinstance(principal.prop, Bang), "principal is not banged")
        return [sequent(g_add(g, J(principal.prop.body, principal.world)), ms_remove(d, principal), goal)]
    if rule == "atR":
        _expect(isinstance(goal.prop, At), "goal is not a satisfaction statement")
        return [sequent(g, d, J(goal.prop.body, goal.prop.world))]
    if rule == "atL":
        _expect(principal is not None and isinstance(principal.prop, At), "principal is not a satisfaction statement")
        return [sequent(g, ms_add(ms_remove(d, principal), J(principal.prop.body, principal.prop.world)), goal)]
    if rule == "dnR":
        _expect(isinstance(goal.prop, Down), "goal is not a world binder")
        return [sequent(g, d, J(_open_w(dom, goal.prop.body, goal.world), goal.world))]
    if rule == "dnL":
        _expect(principal is not None and isinstance(principal.prop, Down), "principal is not a world binder")
        return [sequent(g, ms_add(ms_remove(d, principal), J(_open_w(dom, principal.prop.body, principal.world), principal.world)), goal)]
    raise CheckError(f"apply_rule does not support {rule!r}")
