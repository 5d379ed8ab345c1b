"""Focused proof search with certificate output.

Sequents come in four phases: neutral (all formulas stable), active
(invertible decomposition), and left or right focus.  The stable linear
zone holds negative propositions and positive atoms; the active left zone
is an ordered queue of positives; the right side is a negative being
decomposed or a stable goal (a positive, or a negative atom).

The searcher threads an available-resource multiset through the tree
instead of guessing multiplicative splits, reporting what each subtree
consumed and whether it can absorb more (a `slack` subtree contains a top
or zero leaf on its spine).  A second pass turns the accepted skeleton
into a full certificate with an explicit stable zone at every node, which
`focus_check` validates against the discipline and `defocus` lowers to a
kernel certificate.

Budgets count decision steps (focus choices) along each branch.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from . import kernel, syntax, worlds
from .kernel import J, NameSupply, Proof, jkey, sequent
from .syntax import (
    Atom, Bang, Down, ExistsT, ExistsW, ForallT, ForallW, Lolli, Neg, One,
    Plus, Pos, At, Tensor, Top, TVar, With, Zero, DEFAULT_POLARITY,
    PolarityTable, erase, open_term, polarity, prop_str,
)
from .worlds import Domain, World


class FocusError(Exception):
    pass


@dataclass(frozen=True)
class FSeq:
    """A polarized sequent in one of the four phases."""

    kind: str  # "neutral" | "active" | "left" | "right"
    gamma: tuple  # sorted negative judgements
    delta: tuple  # sorted stable zone: negatives and positive atoms
    omega: tuple = ()  # ordered active queue of positives (active only)
    rr: J | None = None  # right side under active decomposition
    goal: J | None = None  # stable goal (neutral/active/left)
    focus: J | None = None  # formula under focus (left/right)

    def __repr__(self):
        g = ", ".join(repr(j) for j in self.gamma) or "."
        d = ", ".join(repr(j) for j in self.delta) or "."
        o = ", ".join(repr(j) for j in self.omega)
        if self.kind == "neutral":
            return f"{g} ; {d} ==> {self.goal!r}"
        if self.kind == "active":
            right = repr(self.rr) if self.rr is not None else f"; {self.goal!r}"
            return f"{g} ; {d} ; [{o}] ==> {right}"
        if self.kind == "left":
            return f"{g} ; {d} [{self.focus!r}] ==> {self.goal!r}"
        return f"{g} ; {d} ==> [{self.focus!r}]"


@dataclass(frozen=True)
class FProof:
    rule: str
    fseq: FSeq
    premises: tuple = ()
    principal: J | None = None
    witness: object = None

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def decides(self) -> int:
        own = 1 if self.rule in ("lf", "cplf", "rf") else 0
        return own + max((p.decides() for p in self.premises), default=0)

    def rules_used(self) -> set:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules_used()
        return out


def _sorted_js(js):
    return tuple(sorted(js, key=jkey))


def _gsorted(js):
    return tuple(sorted(set(js), key=jkey))


def fneutral(gamma, delta, goal: J) -> FSeq:
    return FSeq("neutral", _gsorted(gamma), _sorted_js(delta), goal=goal)


# ---------------------------------------------------------------------------
# Polarity helpers


def _is_pos_atom(p, table) -> bool:
    return isinstance(p, Atom) and table.of(p.pred) == "pos"


def _is_neg_atom(p, table) -> bool:
    return isinstance(p, Atom) and table.of(p.pred) == "neg"


def _atomish(p) -> bool:
    """Right focus on this resolves by a lookup, with no real search."""
    match p:
        case Atom() | One():
            return True
        case At(body=b):
            return _atomish(b)
    return False


def _stable_left_ok(p, table) -> bool:
    """May this proposition sit in the stable linear zone?"""
    return _is_pos_atom(p, table) or polarity(p, table) == "neg"


def _stable_goal_ok(p, table) -> bool:
    return _is_neg_atom(p, table) or polarity(p, table) == "pos"


# ---------------------------------------------------------------------------
# Entry points: polarize an ordinary sequent


def focused_entry(dom: Domain, s: kernel.Sequent, table: PolarityTable = DEFAULT_POLARITY) -> FSeq:
    """The initial active sequent whose provability matches s."""
    gamma = [J(syntax.normalize_worlds(dom, syntax.polarize(j.prop, "neg", table)), j.world) for j in s.gamma]
    omega = [J(syntax.normalize_worlds(dom, syntax.polarize(j.prop, "pos", table)), j.world) for j in s.delta]
    rr = J(syntax.normalize_worlds(dom, syntax.polarize(s.goal.prop, "neg", table)), s.goal.world)
    return FSeq("active", _gsorted(gamma), (), tuple(omega), rr=rr)


# ---------------------------------------------------------------------------
# Flattening and defocusing


def flatten(fs: FSeq) -> kernel.Sequent:
    """The unfocused sequent a phase sequent stands for."""
    gamma = [J(erase(j.prop), j.world) for j in fs.gamma]
    delta = [J(erase(j.prop), j.world) for j in fs.delta + fs.omega]
    if fs.kind == "left":
        delta.append(J(erase(fs.focus.prop), fs.focus.world))
    if fs.kind == "right":
        goal = fs.focus
    elif fs.rr is not None:
        goal = fs.rr
    else:
        goal = fs.goal
    return sequent(gamma, delta, J(erase(goal.prop), goal.world))


_VANISH = frozenset("lf rf negL posR negR posL lp rp".split())

_DEFOCUS_RULE = {
    "li": "init", "ri": "init", "cplf": "copy",
    "withL1": "withL1", "withL2": "withL2", "lolliL": "lolliL",
    "forallL": "forallL", "dnLF": "dnL", "atLF": "atL",
    "tensR": "tensR", "oneR": "oneR", "plusR1": "plusR1", "plusR2": "plusR2",
    "bangR": "bangR", "existsR": "existsR", "dnRF": "dnR", "atRF": "atR",
    "withR": "withR", "topR": "topR", "lolliR": "lolliR", "forallR": "forallR",
    "dnRA": "dnR", "atRA": "atR",
    "tensL": "tensL", "oneL": "oneL", "plusL": "plusL", "zeroL": "zeroL",
    "dnLA": "dnL", "atLA": "atL", "existsL": "existsL", "bangL": "bangL",
}


_OMEGA_RULES = frozenset("tensL oneL plusL zeroL dnLA atLA existsL bangL".split())


def defocus(dom: Domain, fp: FProof) -> Proof:
    """Lower a focused certificate to a kernel certificate."""
    if fp.rule in _VANISH:
        return defocus(dom, fp.premises[0])
    rule = _DEFOCUS_RULE.get(fp.rule)
    if rule is None:
        raise FocusError(f"cannot defocus rule {fp.rule!r}")
    concl = flatten(fp.fseq)
    prems = tuple(defocus(dom, q) for q in fp.premises)
    principal = fp.principal
    if principal is None:
        if fp.fseq.kind == "left":
            principal = fp.fseq.focus
        elif fp.rule in _OMEGA_RULES:
            principal = fp.fseq.omega[0]
    if principal is not None:
        principal = J(erase(principal.prop), principal.world)
    return Proof(rule, concl, prems, principal, fp.witness)


# ---------------------------------------------------------------------------
# The discipline checker


def focus_check(dom: Domain, fp: FProof, table: PolarityTable = DEFAULT_POLARITY) -> None:
    stack = [fp]
    while stack:
        node = stack.pop()
        try:
            _fcheck_node(dom, node, table)
        except FocusError as e:
            raise FocusError(f"{node.rule} at [{node.fseq!r}]: {e}") from None
        stack.extend(node.premises)


def _fx(cond, msg):
    if not cond:
        raise FocusError(msg)


def _fcheck_node(dom, node: FProof, table):
    fs = node.fseq
    prems = node.premises
    rule = node.rule

    def one():
        _fx(len(prems) == 1, "expected one premise")
        return prems[0]

    def two():
        _fx(len(prems) == 2, "expected two premises")
        return prems

    def leaf():
        _fx(not prems, "expected no premises")

    def same_gamma():
        for q in prems:
            _fx(q.fseq.gamma == fs.gamma, "unrestricted zone must not change")

    def opened_w(body, w):
        return syntax.normalize_worlds(dom, syntax.open_world(body, w))

    if rule in ("lf", "cplf", "rf"):
        _fx(fs.kind == "neutral", "decision steps start from neutral sequents")
        q = one()
        same_gamma()
        if rule == "rf":
            g = fs.goal
            _fx(_stable_goal_ok(g.prop, table) and not _is_neg_atom(g.prop, table), "right focus needs a positive goal")
            _fx(q.fseq == FSeq("right", fs.gamma, fs.delta, focus=g), "premise must focus on the goal")
        else:
            a = node.principal
            _fx(a is not None, "missing focus formula")
            _fx(polarity(a.prop, table) == "neg", "left focus needs a negative")
            if rule == "lf":
                _fx(a in fs.delta, "focus formula must be linear")
                rest = kernel.ms_remove(fs.delta, a)
            else:
                _fx(a in fs.gamma, "focus formula must be unrestricted")
                rest = fs.delta
            _fx(q.fseq == FSeq("left", fs.gamma, rest, goal=fs.goal, focus=a), "premise must focus on the formula")
        return

    if fs.kind == "left":
        a = fs.focus
        if rule == "li":
            leaf()
            _fx(_is_neg_atom(a.prop, table), "left identity closes negative atoms")
            _fx(fs.delta == (), "left identity leaves no resources")
            _fx(fs.goal == a, "goal must match the focused atom")
            return
        if rule == "negL":
            _fx(isinstance(a.prop, Neg), "focus must be a shifted positive")
            q = one()
            same_gamma()
            want = FSeq("active", fs.gamma, fs.delta, (J(a.prop.body, a.world),), goal=fs.goal)
            _fx(q.fseq == want, "releasing focus queues the body")
            return
        if rule in ("withL1", "withL2"):
            _fx(isinstance(a.prop, With), "focus must be an additive conjunction")
            comp = a.prop.left if rule.endswith("1") else a.prop.right
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, focus=J(comp, a.world)), "focus moves to the component")
            return
        if rule == "lolliL":
            _fx(isinstance(a.prop, Lolli), "focus must be an implication")
            q1, q2 = two()
            same_gamma()
            _fx(q1.fseq.kind == "right" and q1.fseq.focus == J(a.prop.ante, a.world), "first premise right-focuses the antecedent")
            _fx(q2.fseq.kind == "left" and q2.fseq.focus == J(a.prop.succ, a.world), "second premise continues on the consequent")
            _fx(q2.fseq.goal == fs.goal, "goal must be preserved")
            _fx(kernel.ms_union(q1.fseq.delta, q2.fseq.delta) == fs.delta, "split must partition the stable zone")
            return
        if rule == "forallL":
            q = one()
            same_gamma()
            if isinstance(a.prop, ForallT):
                kernel._check_witness_closed(node, want_world=False)
                inst = open_term(a.prop.body, node.witness)
            elif isinstance(a.prop, ForallW):
                kernel._check_witness_closed(node, want_world=True)
                inst = opened_w(a.prop.body, node.witness)
            else:
                raise FocusError("focus must be universally quantified")
            _fx(q.fseq == replace(fs, focus=J(inst, a.world)), "focus moves to the instance")
            return
        if rule == "dnLF":
            _fx(isinstance(a.prop, Down), "focus must be a world binder")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, focus=J(opened_w(a.prop.body, a.world), a.world)), "binder captures the judgement world")
            return
        if rule == "atLF":
            _fx(isinstance(a.prop, At), "focus must be a satisfaction statement")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, focus=J(a.prop.body, a.prop.world)), "focus relocates to the named world")
            return
        raise FocusError("rule does not apply under left focus")

    if fs.kind == "right":
        a = fs.focus
        if rule == "ri":
            leaf()
            _fx(_is_pos_atom(a.prop, table), "right identity closes positive atoms")
            _fx(fs.delta == (a,), "the atom must be the only resource")
            return
        if rule == "posR":
            _fx(isinstance(a.prop, Pos), "focus must be a shifted negative")
            q = one()
            same_gamma()
            want = FSeq("active", fs.gamma, fs.delta, (), rr=J(a.prop.body, a.world))
            _fx(q.fseq == want, "releasing focus activates the body")
            return
        if rule == "tensR":
            _fx(isinstance(a.prop, Tensor), "focus must be a tensor")
            q1, q2 = two()
            same_gamma()
            _fx(q1.fseq.kind == "right" and q1.fseq.focus == J(a.prop.left, a.world), "first premise focuses the left factor")
            _fx(q2.fseq.kind == "right" and q2.fseq.focus == J(a.prop.right, a.world), "second premise focuses the right factor")
            _fx(kernel.ms_union(q1.fseq.delta, q2.fseq.delta) == fs.delta, "split must partition the stable zone")
            return
        if rule == "oneR":
            leaf()
            _fx(isinstance(a.prop, One), "focus must be 1")
            _fx(fs.delta == (), "no resources may remain")
            return
        if rule in ("plusR1", "plusR2"):
            _fx(isinstance(a.prop, Plus), "focus must be an additive disjunction")
            comp = a.prop.left if rule.endswith("1") else a.prop.right
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, focus=J(comp, a.world)), "focus moves to the injected component")
            return
        if rule == "bangR":
            _fx(isinstance(a.prop, Bang), "focus must be banged")
            _fx(fs.delta == (), "no resources may remain")
            q = one()
            same_gamma()
            want = FSeq("active", fs.gamma, (), (), rr=J(a.prop.body, a.world))
            _fx(q.fseq == want, "premise decomposes the body with no resources")
            return
        if rule == "existsR":
            q = one()
            same_gamma()
            if isinstance(a.prop, ExistsT):
                kernel._check_witness_closed(node, want_world=False)
                inst = open_term(a.prop.body, node.witness)
            elif isinstance(a.prop, ExistsW):
                kernel._check_witness_closed(node, want_world=True)
                inst = opened_w(a.prop.body, node.witness)
            else:
                raise FocusError("focus must be existentially quantified")
            _fx(q.fseq == replace(fs, focus=J(inst, a.world)), "focus moves to the instance")
            return
        if rule == "dnRF":
            _fx(isinstance(a.prop, Down), "focus must be a world binder")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, focus=J(opened_w(a.prop.body, a.world), a.world)), "binder captures the judgement world")
            return
        if rule == "atRF":
            _fx(isinstance(a.prop, At), "focus must be a satisfaction statement")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, focus=J(a.prop.body, a.prop.world)), "focus relocates to the named world")
            return
        raise FocusError("rule does not apply under right focus")

    _fx(fs.kind == "active", f"unknown phase {fs.kind!r}")

    if rule == "rp":
        _fx(fs.rr is None and not fs.omega, "transition needs a fully stable sequent")
        _fx(_stable_goal_ok(fs.goal.prop, table), "goal is not stable")
        q = one()
        same_gamma()
        _fx(q.fseq == fneutral(fs.gamma, fs.delta, fs.goal), "premise is the neutral sequent")
        return

    if fs.rr is not None:
        g = fs.rr
        if rule == "withR":
            _fx(isinstance(g.prop, With), "right side must be an additive conjunction")
            q1, q2 = two()
            same_gamma()
            _fx(q1.fseq == replace(fs, rr=J(g.prop.left, g.world)), "first premise takes the left component")
            _fx(q2.fseq == replace(fs, rr=J(g.prop.right, g.world)), "second premise takes the right component")
            return
        if rule == "topR":
            leaf()
            _fx(isinstance(g.prop, Top), "right side must be top")
            return
        if rule == "lolliR":
            _fx(isinstance(g.prop, Lolli), "right side must be an implication")
            q = one()
            same_gamma()
            want = replace(fs, omega=fs.omega + (J(g.prop.ante, g.world),), rr=J(g.prop.succ, g.world))
            _fx(q.fseq == want, "antecedent queues, consequent continues")
            return
        if rule == "forallR":
            q = one()
            same_gamma()
            name = node.witness
            _fx(isinstance(name, str), "eigenvariable name required")
            used = set()
            for j in (fs.rr, fs.goal, *fs.gamma, *fs.delta, *fs.omega):
                if j is not None:
                    used |= syntax.free_term_vars(j.prop) | syntax.free_world_vars(j.prop)
                    used |= worlds.free_vars(j.world)
            _fx(name not in used, f"eigenvariable {name} not fresh")
            if isinstance(g.prop, ForallT):
                inst = open_term(g.prop.body, TVar(name))
            elif isinstance(g.prop, ForallW):
                inst = opened_w(g.prop.body, worlds.var(name))
            else:
                raise FocusError("right side must be universally quantified")
            _fx(q.fseq == replace(fs, rr=J(inst, g.world)), "premise opens the binder")
            return
        if rule == "dnRA":
            _fx(isinstance(g.prop, Down), "right side must be a world binder")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, rr=J(opened_w(g.prop.body, g.world), g.world)), "binder captures the judgement world")
            return
        if rule == "atRA":
            _fx(isinstance(g.prop, At), "right side must be a satisfaction statement")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, rr=J(g.prop.body, g.prop.world)), "right side relocates")
            return
        if rule == "negR":
            _fx(isinstance(g.prop, Neg), "right side must be a shifted positive")
            q = one()
            same_gamma()
            _fx(q.fseq == replace(fs, rr=None, goal=J(g.prop.body, g.world)), "the shifted body becomes the stable goal")
            return
        raise FocusError("rule does not apply while the right side is active")

    _fx(len(fs.omega) > 0, "no active work remains")
    a = fs.omega[0]
    rest = fs.omega[1:]

    if rule == "tensL":
        _fx(isinstance(a.prop, Tensor), "head must be a tensor")
        q = one()
        same_gamma()
        want = replace(fs, omega=(J(a.prop.left, a.world), J(a.prop.right, a.world)) + rest)
        _fx(q.fseq == want, "both factors queue in order")
        return
    if rule == "oneL":
        q = one()
        same_gamma()
        _fx(isinstance(a.prop, One), "head must be 1")
        _fx(q.fseq == replace(fs, omega=rest), "the unit disappears")
        return
    if rule == "plusL":
        _fx(isinstance(a.prop, Plus), "head must be an additive disjunction")
        q1, q2 = two()
        same_gamma()
        _fx(q1.fseq == replace(fs, omega=(J(a.prop.left, a.world),) + rest), "first premise takes the left component")
        _fx(q2.fseq == replace(fs, omega=(J(a.prop.right, a.world),) + rest), "second premise takes the right component")
        return
    if rule == "zeroL":
        leaf()
        _fx(isinstance(a.prop, Zero), "head must be 0")
        return
    if rule == "dnLA":
        _fx(isinstance(a.prop, Down), "head must be a world binder")
        q = one()
        same_gamma()
        _fx(q.fseq == replace(fs, omega=(J(opened_w(a.prop.body, a.world), a.world),) + rest), "binder captures the judgement world")
        return
    if rule == "atLA":
        _fx(isinstance(a.prop, At), "head must be a satisfaction statement")
        q = one()
        same_gamma()
        _fx(q.fseq == replace(fs, omega=(J(a.prop.body, a.prop.world),) + rest), "head relocates")
        return
    if rule == "existsL":
        q = one()
        same_gamma()
        name = node.witness
        _fx(isinstance(name, str), "eigenvariable name required")
        used = set()
        for j in (fs.rr, fs.goal, *fs.gamma, *fs.delta, *fs.omega):
            if j is not None:
                used |= syntax.free_term_vars(j.prop) | syntax.free_world_vars(j.prop)
                used |= worlds.free_vars(j.world)
        _fx(name not in used, f"eigenvariable {name} not fresh")
        if isinstance(a.prop, ExistsT):
            inst = open_term(a.prop.body, TVar(name))
        elif isinstance(a.prop, ExistsW):
            inst = opened_w(a.prop.body, worlds.var(name))
        else:
            raise FocusError("head must be existentially quantified")
        _fx(q.fseq == replace(fs, omega=(J(inst, a.world),) + rest), "premise opens the binder")
        return
    if rule == "bangL":
        _fx(isinstance(a.prop, Bang), "head must be banged")
        q = one()
        want = replace(fs, gamma=_gsorted(fs.gamma + (J(a.prop.body, a.world),)), omega=rest)
        _fx(q.fseq == want, "the body joins the unrestricted zone")
        return
    if rule == "posL":
        _fx(isinstance(a.prop, Pos), "head must be a shifted negative")
        q = one()
        same_gamma()
        want = replace(fs, delta=kernel.ms_add(fs.delta, J(a.prop.body, a.world)), omega=rest)
        _fx(q.fseq == want, "the shifted body joins the stable zone")
        return
    if rule == "lp":
        _fx(_is_pos_atom(a.prop, table), "head must be a positive atom")
        q = one()
        same_gamma()
        want = replace(fs, delta=kernel.ms_add(fs.delta, a), omega=rest)
        _fx(q.fseq == want, "the atom joins the stable zone")
        return
    raise FocusError("rule does not apply to the active queue")


# ---------------------------------------------------------------------------
# Search


class _Skel:
    __slots__ = ("rule", "fs0", "children", "consumed", "slack", "principal", "witness")

    def __init__(self, rule, fs0, children=(), consumed=None, slack=False, principal=None, witness=None):
        self.rule = rule
        self.fs0 = fs0  # FSeq with delta left empty; assembly fills it
        self.children = children
        self.consumed = consumed if consumed is not None else Counter()
        self.slack = slack
        self.principal = principal
        self.witness = witness


class _Ctx:
    def __init__(self, dom, table, hints, supply):
        self.dom = dom
        self.table = table
        self.hint_terms = tuple(h for h in hints if not isinstance(h, World))
        self.hint_worlds = tuple(h for h in hints if isinstance(h, World))
        self.supply = supply
        self.failed = {}  # neutral key -> largest budget that yielded nothing
        self.decides = 0


def _freeze(avail: Counter):
    return tuple(sorted(((jkey(j), n) for j, n in avail.items() if n), key=lambda kv: kv[0]))


def _state_js(gamma, avail, extra=()):
    for j in gamma:
        yield j
    for j in avail:
        yield j
    for j in extra:
        if j is not None:
            yield j


def _term_candidates(ctx, gamma, avail, extra):
    seen, out = set(), []
    for t in ctx.hint_terms:
        if t not in seen:
            seen.add(t)
            out.append(t)
    for j in _state_js(gamma, avail, extra):
        for t in syntax.closed_subterms(j.prop):
            if t not in seen:
                seen.add(t)
                out.append(t)
    return out


def _world_candidates(ctx, gamma, avail, extra):
    pool = set()
    for j in _state_js(gamma, avail, extra):
        pool.add(j.world)
        for w in syntax.prop_worlds(j.prop):
            if worlds.max_bound(w) < 0:
                pool.add(w)
    out, seen = [], set()
    for w in ctx.hint_worlds:
        if w not in seen:
            seen.add(w)
            out.append(w)
    for w in sorted(pool, key=repr):
        for sub in ctx.dom.subwords(w):
            if sub not in seen:
                seen.add(sub)
                out.append(sub)
    if worlds.RID not in seen:
        out.append(worlds.RID)
    return out


def _fresh_eigen(ctx, hint, gamma, avail, extra):
    used = set()
    for j in _state_js(gamma, avail, extra):
        used |= syntax.free_term_vars(j.prop) | syntax.free_world_vars(j.prop)
        used |= worlds.free_vars(j.world) | worlds.constants(j.world)
        used |= syntax.world_constants(j.prop)
    return ctx.supply.fresh(hint, used)


def _add_avail(avail, j):
    out = Counter(avail)
    out[j] += 1
    return out


def _sub(avail, consumed):
    out = Counter(avail)
    out.subtract(consumed)
    return +out


def _settle(node_rule, fs0, child, introduced, principal=None):
    """Close over a resource introduced into the stable zone by `node_rule`:
    subtract it if the subtree consumed it, else require slack."""
    c = Counter(child.consumed)
    if c[introduced] > 0:
        c[introduced] -= 1
        c = +c
        yield _Skel(node_rule, fs0, (child,), c, child.slack, principal=principal)
    elif child.slack:
        yield _Skel(node_rule, fs0, (child,), +c, True, principal=principal)


def _reconcile(c1, s1, c2, s2):
    """Additive premises must agree on consumption up to slack."""
    need = c1 | c2  # multiset max
    if c1 != need and not s1:
        return None
    if c2 != need and not s2:
        return None
    return need, (s1 and s2)


# -- the four phase searchers ------------------------------------------------


def _neutral(ctx, gamma, avail, goal: J, budget):
    if budget <= 0:
        return
    key = (gamma, _freeze(avail), goal)
    if ctx.failed.get(key, -1) >= budget:
        return
    fs0 = FSeq("neutral", gamma, (), goal=goal)
    produced = False

    if _stable_goal_ok(goal.prop, ctx.table) and not _is_neg_atom(goal.prop, ctx.table):
        ctx.decides += 1
        for child in _rfocus(ctx, gamma, avail, goal, budget - 1):
            produced = True
            yield _Skel("rf", fs0, (child,), child.consumed, child.slack)

    for a in sorted(set(avail), key=jkey):
        if avail[a] <= 0 or not polarity(a.prop, ctx.table) == "neg":
            continue
        ctx.decides += 1
        rest = _sub(avail, Counter({a: 1}))
        for child in _lfocus(ctx, gamma, rest, a, goal, budget - 1):
            produced = True
            c = Counter(child.consumed)
            c[a] += 1
            yield _Skel("lf", fs0, (child,), c, child.slack, principal=a)

    for a in gamma:
        ctx.decides += 1
        for child in _lfocus(ctx, gamma, avail, a, goal, budget - 1):
            produced = True
            yield _Skel("cplf", fs0, (child,), child.consumed, child.slack, principal=a)

    if not produced:
        prev = ctx.failed.get(key, -1)
        if budget > prev:
            ctx.failed[key] = budget


def _lfocus(ctx, gamma, avail, focus: J, goal: J, budget):
    fs0 = FSeq("left", gamma, (), goal=goal, focus=focus)
    a, w = focus.prop, focus.world
    match a:
        case Atom():
            if _is_neg_atom(a, ctx.table) and focus == goal:
                yield _Skel("li", fs0)
            return
        case Neg(body):
            for child in _active(ctx, gamma, avail, (J(body, w),), None, goal, budget):
                yield _Skel("negL", fs0, (child,), child.consumed, child.slack)
            return
        case With(l, r):
            for rule, comp in (("withL1", l), ("withL2", r)):
                for child in _lfocus(ctx, gamma, avail, J(comp, w), goal, budget):
                    yield _Skel(rule, fs0, (child,), child.consumed, child.slack)
            return
        case Lolli(p, n):
            # antecedents are usually atom lookups; gate on them before
            # exploring the continuation
            for ante in _rfocus(ctx, gamma, avail, J(p, w), budget):
                remaining = _sub(avail, ante.consumed)
                for cont in _lfocus(ctx, gamma, remaining, J(n, w), goal, budget):
                    yield _Skel(
                        "lolliL", fs0, (ante, cont),
                        ante.consumed + cont.consumed, ante.slack or cont.slack,
                    )
            return
        case ForallT(body):
            for tau in _term_candidates(ctx, gamma, avail, (goal, focus)):
                inst = open_term(body, tau)
                for child in _lfocus(ctx, gamma, avail, J(inst, w), goal, budget):
                    yield _Skel("forallL", fs0, (child,), child.consumed, child.slack, witness=tau)
            return
        case ForallW(body):
            for tau in _world_candidates(ctx, gamma, avail, (goal, focus)):
                inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, tau))
                for child in _lfocus(ctx, gamma, avail, J(inst, w), goal, budget):
                    yield _Skel("forallL", fs0, (child,), child.consumed, child.slack, witness=tau)
            return
        case Down(body):
            inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, w))
            for child in _lfocus(ctx, gamma, avail, J(inst, w), goal, budget):
                yield _Skel("dnLF", fs0, (child,), child.consumed, child.slack)
            return
        case At(body, v):
            for child in _lfocus(ctx, gamma, avail, J(body, v), goal, budget):
                yield _Skel("atLF", fs0, (child,), child.consumed, child.slack)
            return
    return


def _rfocus(ctx, gamma, avail, focus: J, budget):
    fs0 = FSeq("right", gamma, (), focus=focus)
    a, w = focus.prop, focus.world
    match a:
        case Atom():
            if _is_pos_atom(a, ctx.table) and avail[focus] > 0:
                yield _Skel("ri", fs0, consumed=Counter({focus: 1}))
            return
        case Pos(body):
            for child in _active(ctx, gamma, avail, (), J(body, w), None, budget):
                yield _Skel("posR", fs0, (child,), child.consumed, child.slack)
            return
        case Tensor(l, r):
            if _atomish(r) and not _atomish(l):
                # gate on the cheap factor before exploring the other
                for c2 in _rfocus(ctx, gamma, avail, J(r, w), budget):
                    remaining = _sub(avail, c2.consumed)
                    for c1 in _rfocus(ctx, gamma, remaining, J(l, w), budget):
                        yield _Skel("tensR", fs0, (c1, c2), c1.consumed + c2.consumed, c1.slack or c2.slack)
                return
            for c1 in _rfocus(ctx, gamma, avail, J(l, w), budget):
                remaining = _sub(avail, c1.consumed)
                for c2 in _rfocus(ctx, gamma, remaining, J(r, w), budget):
                    yield _Skel("tensR", fs0, (c1, c2), c1.consumed + c2.consumed, c1.slack or c2.slack)
            return
        case One():
            yield _Skel("oneR", fs0)
            return
        case Plus(l, r):
            for rule, comp in (("plusR1", l), ("plusR2", r)):
                for child in _rfocus(ctx, gamma, avail, J(comp, w), budget):
                    yield _Skel(rule, fs0, (child,), child.consumed, child.slack)
            return
        case Bang(body):
            for child in _active(ctx, gamma, Counter(), (), J(body, w), None, budget):
                if not child.consumed:
                    yield _Skel("bangR", fs0, (child,), Counter(), False)
            return
        case ExistsT(body):
            for tau in _term_candidates(ctx, gamma, avail, (focus,)):
                inst = open_term(body, tau)
                for child in _rfocus(ctx, gamma, avail, J(inst, w), budget):
                    yield _Skel("existsR", fs0, (child,), child.consumed, child.slack, witness=tau)
            return
        case ExistsW(body):
            for tau in _world_candidates(ctx, gamma, avail, (focus,)):
                inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, tau))
                for child in _rfocus(ctx, gamma, avail, J(inst, w), budget):
                    yield _Skel("existsR", fs0, (child,), child.consumed, child.slack, witness=tau)
            return
        case Down(body):
            inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, w))
            for child in _rfocus(ctx, gamma, avail, J(inst, w), budget):
                yield _Skel("dnRF", fs0, (child,), child.consumed, child.slack)
            return
        case At(body, v):
            for child in _rfocus(ctx, gamma, avail, J(body, v), budget):
                yield _Skel("atRF", fs0, (child,), child.consumed, child.slack)
            return
    return


def _active(ctx, gamma, avail, omega: tuple, rr: J | None, goal: J | None, budget):
    # a negative atom on the right is already stable
    if rr is not None and isinstance(rr.prop, Atom):
        rr, goal = None, rr
    fs0 = FSeq("active", gamma, (), omega, rr=rr, goal=goal)

    if rr is not None:
        g, w = rr.prop, rr.world
        match g:
            case With(l, r):
                for c1 in _active(ctx, gamma, avail, omega, J(l, w), None, budget):
                    for c2 in _active(ctx, gamma, avail, omega, J(r, w), None, budget):
                        rec = _reconcile(c1.consumed, c1.slack, c2.consumed, c2.slack)
                        if rec is not None:
                            yield _Skel("withR", fs0, (c1, c2), rec[0], rec[1])
                return
            case Top():
                yield _Skel("topR", fs0, slack=True)
                return
            case Lolli(p, n):
                for child in _active(ctx, gamma, avail, omega + (J(p, w),), J(n, w), None, budget):
                    yield _Skel("lolliR", fs0, (child,), child.consumed, child.slack)
                return
            case ForallT(body):
                x = _fresh_eigen(ctx, g.hint, gamma, avail, omega + (rr, goal))
                inst = open_term(body, TVar(x))
                for child in _active(ctx, gamma, avail, omega, J(inst, w), None, budget):
                    yield _Skel("forallR", fs0, (child,), child.consumed, child.slack, witness=x)
                return
            case ForallW(body):
                x = _fresh_eigen(ctx, g.hint, gamma, avail, omega + (rr, goal))
                inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, worlds.var(x)))
                for child in _active(ctx, gamma, avail, omega, J(inst, w), None, budget):
                    yield _Skel("forallR", fs0, (child,), child.consumed, child.slack, witness=x)
                return
            case Down(body):
                inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, w))
                for child in _active(ctx, gamma, avail, omega, J(inst, w), None, budget):
                    yield _Skel("dnRA", fs0, (child,), child.consumed, child.slack)
                return
            case At(body, v):
                for child in _active(ctx, gamma, avail, omega, J(body, v), None, budget):
                    yield _Skel("atRA", fs0, (child,), child.consumed, child.slack)
                return
            case Neg(body):
                for child in _active(ctx, gamma, avail, omega, None, J(body, w), budget):
                    yield _Skel("negR", fs0, (child,), child.consumed, child.slack)
                return
        raise FocusError(f"ill-polarized right side: {prop_str(g)}")

    if omega:
        a = omega[0]
        rest = omega[1:]
        p, w = a.prop, a.world
        match p:
            case Tensor(l, r):
                for child in _active(ctx, gamma, avail, (J(l, w), J(r, w)) + rest, None, goal, budget):
                    yield _Skel("tensL", fs0, (child,), child.consumed, child.slack)
                return
            case One():
                for child in _active(ctx, gamma, avail, rest, None, goal, budget):
                    yield _Skel("oneL", fs0, (child,), child.consumed, child.slack)
                return
            case Plus(l, r):
                for c1 in _active(ctx, gamma, avail, (J(l, w),) + rest, None, goal, budget):
                    for c2 in _active(ctx, gamma, avail, (J(r, w),) + rest, None, goal, budget):
                        rec = _reconcile(c1.consumed, c1.slack, c2.consumed, c2.slack)
                        if rec is not None:
                            yield _Skel("plusL", fs0, (c1, c2), rec[0], rec[1])
                return
            case Zero():
                yield _Skel("zeroL", fs0, slack=True)
                return
            case ExistsT(body):
                x = _fresh_eigen(ctx, p.hint, gamma, avail, omega + (goal,))
                inst = open_term(body, TVar(x))
                for child in _active(ctx, gamma, avail, (J(inst, w),) + rest, None, goal, budget):
                    yield _Skel("existsL", fs0, (child,), child.consumed, child.slack, witness=x)
                return
            case ExistsW(body):
                x = _fresh_eigen(ctx, p.hint, gamma, avail, omega + (goal,))
                inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, worlds.var(x)))
                for child in _active(ctx, gamma, avail, (J(inst, w),) + rest, None, goal, budget):
                    yield _Skel("existsL", fs0, (child,), child.consumed, child.slack, witness=x)
                return
            case Down(body):
                inst = syntax.normalize_worlds(ctx.dom, syntax.open_world(body, w))
                for child in _active(ctx, gamma, avail, (J(inst, w),) + rest, None, goal, budget):
                    yield _Skel("dnLA", fs0, (child,), child.consumed, child.slack)
                return
            case At(body, v):
                for child in _active(ctx, gamma, avail, (J(body, v),) + rest, None, goal, budget):
                    yield _Skel("atLA", fs0, (child,), child.consumed, child.slack)
                return
            case Bang(body):
                g2 = _gsorted(gamma + (J(body, w),))
                for child in _active(ctx, g2, avail, rest, None, goal, budget):
                    yield _Skel("bangL", fs0, (child,), child.consumed, child.slack)
                return
            case Pos(body):
                j = J(body, w)
                for child in _active(ctx, gamma, _add_avail(avail, j), rest, None, goal, budget):
                    yield from _settle("posL", fs0, child, j)
                return
            case Atom():
                if _is_pos_atom(p, ctx.table):
                    for child in _active(ctx, gamma, _add_avail(avail, a), rest, None, goal, budget):
                        yield from _settle("lp", fs0, child, a)
                    return
        raise FocusError(f"ill-polarized active formula: {prop_str(p)}")

    for child in _neutral(ctx, gamma, avail, goal, budget):
        yield _Skel("rp", fs0, (child,), child.consumed, child.slack)


# ---------------------------------------------------------------------------
# Assembly: fill in the stable zones


def _assemble(sk: _Skel, extra: Counter) -> FProof:
    delta = _sorted_js((sk.consumed + extra).elements())
    fs = replace(sk.fs0, delta=delta)
    rule = sk.rule

    if not sk.children:
        assert not extra or sk.slack, f"{rule}: extra routed to a rigid leaf"
        return FProof(rule, fs, (), sk.principal, sk.witness)

    if rule in ("withR", "plusL"):
        want = sk.consumed + extra
        prems = tuple(_assemble(c, _sub(want, c.consumed)) for c in sk.children)
        return FProof(rule, fs, prems, sk.principal, sk.witness)

    if rule in ("tensR", "lolliL"):
        c1, c2 = sk.children
        if extra and c1.slack:
            e1, e2 = extra, Counter()
        else:
            e1, e2 = Counter(), extra
        prems = (_assemble(c1, e1), _assemble(c2, e2))
        return FProof(rule, fs, prems, sk.principal, sk.witness)

    if rule == "lf":
        child = sk.children[0]
        prem = _assemble(child, extra)
        return FProof(rule, fs, (prem,), sk.principal, sk.witness)

    if rule in ("posL", "lp"):
        child = sk.children[0]
        introduced = sk.fs0.omega[0]
        if rule == "posL":
            introduced = J(introduced.prop.body, introduced.world)
        if child.consumed[introduced] > 0:
            e = extra
        else:
            e = _add_avail(extra, introduced)
        return FProof(rule, fs, (_assemble(child, e),), sk.principal, sk.witness)

    if rule == "bangR":
        assert not extra, "bangR admits no leftover resources"
        return FProof(rule, fs, (_assemble(sk.children[0], Counter()),), sk.principal, sk.witness)

    prems = tuple(_assemble(c, extra) for c in sk.children)
    return FProof(rule, fs, prems, sk.principal, sk.witness)


# ---------------------------------------------------------------------------
# Public interface


@dataclass
class SearchStats:
    """decides counts every decide attempted, across all budgets tried;
    budget_used is the depth at which a proof came back."""

    decides: int = 0
    budget_used: int = 0


def search_fseq(
    dom: Domain,
    fs: FSeq,
    budget: int,
    table: PolarityTable = DEFAULT_POLARITY,
    hints=(),
    all_proofs: bool = False,
    deepen: bool = True,
    stats: SearchStats | None = None,
):
    """Prove a polarized sequent.  Returns one FProof (or None), or every
    FProof found within the budget when all_proofs is set."""
    for j in fs.gamma:
        if not syntax.polarized_wf(j.prop, "neg", table):
            raise FocusError(f"not a negative proposition: {prop_str(j.prop)}")
    for j in fs.delta:
        if not _stable_left_ok(j.prop, table):
            raise FocusError(f"not stable on the left: {prop_str(j.prop)}")
    if fs.kind == "neutral" and not _stable_goal_ok(fs.goal.prop, table):
        raise FocusError(f"not a stable goal: {prop_str(fs.goal.prop)}")

    def run(b):
        ctx = _Ctx(dom, table, hints, NameSupply())
        avail = Counter(fs.delta)
        if fs.kind == "active":
            gen = _active(ctx, fs.gamma, avail, fs.omega, fs.rr, fs.goal, b)
        elif fs.kind == "neutral":
            gen = _neutral(ctx, fs.gamma, avail, fs.goal, b)
        else:
            raise FocusError("search starts from a neutral or active sequent")

        def proofs():
            for sk in gen:
                leftover = _sub(avail, sk.consumed)
                if leftover and not sk.slack:
                    continue
                yield _assemble(sk, leftover)

        return ctx, proofs()

    if all_proofs:
        ctx, gen = run(budget)
        found = list(gen)
        if stats is not None:
            stats.decides += ctx.decides
            stats.budget_used = budget
        return found
    budgets = range(1, budget + 1) if deepen else [budget]
    for b in budgets:
        ctx, gen = run(b)
        fp = next(gen, None)
        if stats is not None:
            stats.decides += ctx.decides
        if fp is not None:
            if stats is not None:
                stats.budget_used = b
            return fp
    return None


def prove(
    dom: Domain,
    s: kernel.Sequent,
    budget: int = 6,
    table: PolarityTable = DEFAULT_POLARITY,
    hints=(),
    all_proofs: bool = False,
    deepen: bool = True,
    stats: SearchStats | None = None,
):
    """Prove an ordinary sequent by focused search.

    Worlds inside propositions are put in monoid normal form on entry, so
    a returned certificate defocuses to a kernel proof of
    `kernel.normalize_sequent(dom, s)`.
    """
    return search_fseq(dom, focused_entry(dom, s, table), budget, table, hints, all_proofs, deepen, stats)
