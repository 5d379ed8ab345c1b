"""A naive bounded prover over the raw sequent rules.

This is deliberately unsophisticated: depth-first search over every rule
the kernel accepts, with all context splits and witness instantiations
enumerated.  It exists as an independent reference point for the focused
engine, so it shares nothing with `focusing` beyond the kernel itself.
"""

from __future__ import annotations

from itertools import combinations

from . import kernel, syntax, worlds
from .kernel import J, NameSupply, Proof, Sequent, jkey
from .syntax import (
    Atom, Bang, Down, ExistsT, ExistsW, ForallT, ForallW, Lolli, One, Plus,
    At, Tensor, Top, With, Zero,
)


def _splits(delta):
    """All ways to divide a multiset of judgements in two ordered parts."""
    n = len(delta)
    seen = set()
    for k in range(n + 1):
        for idx in combinations(range(n), k):
            left = tuple(delta[i] for i in idx)
            if left in seen:
                continue
            seen.add(left)
            yield left


def _term_pool(s: Sequent):
    out, seen = [], set()
    for j in (*s.gamma, *s.delta, s.goal):
        for t in syntax.closed_subterms(j.prop):
            if t not in seen:
                seen.add(t)
                out.append(t)
    return out


def _world_pool(dom, s: Sequent):
    pool = set()
    for j in (*s.gamma, *s.delta, s.goal):
        pool.add(j.world)
        for w in syntax.prop_worlds(j.prop):
            if worlds.max_bound(w) < 0:
                pool.add(w)
    out, seen = [], set()
    for w in sorted(pool, key=repr):
        for sub in dom.subwords(w):
            if sub not in seen:
                seen.add(sub)
                out.append(sub)
    if worlds.RID not in seen:
        out.append(worlds.RID)
    return out


def _moves(dom, s: Sequent, supply: NameSupply):
    """Yield (rule, principal, witness) candidates at this sequent."""
    g = s.goal
    if isinstance(g.prop, Atom) and s.delta == (g,):
        yield "init", None, None
    match g.prop:
        case Tensor():
            yield "tensR", None, None
        case One():
            yield "oneR", None, None
        case Lolli():
            yield "lolliR", None, None
        case With():
            yield "withR", None, None
        case Top():
            yield "topR", None, None
        case Plus():
            yield "plusR1", None, None
            yield "plusR2", None, None
        case Bang():
            yield "bangR", None, None
        case ForallT() | ForallW():
            yield "forallR", None, supply.fresh(g.prop.hint, kernel.seq_term_names(s) | kernel.seq_world_names(s))
        case ExistsT():
            for t in _term_pool(s):
                yield "existsR", None, t
        case ExistsW():
            for w in _world_pool(dom, s):
                yield "existsR", None, w
        case At():
            yield "atR", None, None
        case Down():
            yield "dnR", None, None

    for a in sorted(set(s.delta), key=jkey):
        match a.prop:
            case Tensor():
                yield "tensL", a, None
            case One():
                yield "oneL", a, None
            case Lolli():
                yield "lolliL", a, None
            case With():
                yield "withL1", a, None
                yield "withL2", a, None
            case Plus():
                yield "plusL", a, None
            case Zero():
                yield "zeroL", a, None
            case Bang():
                yield "bangL", a, None
            case ForallT():
                for t in _term_pool(s):
                    yield "forallL", a, t
            case ForallW():
                for w in _world_pool(dom, s):
                    yield "forallL", a, w
            case ExistsT() | ExistsW():
                yield "existsL", a, supply.fresh(a.prop.hint, kernel.seq_term_names(s) | kernel.seq_world_names(s))
            case At():
                yield "atL", a, None
            case Down():
                yield "dnL", a, None

    for a in s.gamma:
        yield "copy", a, None


_SPLIT_RULES = ("tensR", "lolliL")


def prove(dom, s: Sequent, depth: int = 6, supply: NameSupply | None = None):
    """Search for a cut-free proof of at most the given depth."""
    supply = supply or NameSupply()
    failed = {}

    def go(s, depth):
        if depth <= 0:
            return None
        key = s
        if failed.get(key, -1) >= depth:
            return None
        for rule, principal, witness in _moves(dom, s, supply):
            if rule in _SPLIT_RULES:
                pool = kernel.ms_remove(s.delta, principal) if rule == "lolliL" else s.delta
                for left in _splits(pool):
                    try:
                        prems = kernel.apply_rule(dom, s, rule, principal, witness, split=left)
                    except kernel.CheckError:
                        continue
                    node = _close(s, rule, principal, witness, prems, depth)
                    if node is not None:
                        return node
            else:
                try:
                    prems = kernel.apply_rule(dom, s, rule, principal, witness)
                except kernel.CheckError:
                    continue
                node = _close(s, rule, principal, witness, prems, depth)
                if node is not None:
                    return node
        prev = failed.get(key, -1)
        if depth > prev:
            failed[key] = depth
        return None

    def _close(s, rule, principal, witness, prems, depth):
        subs = []
        for q in prems:
            sub = go(q, depth - 1)
            if sub is None:
                return None
            subs.append(sub)
        return Proof(rule, s, tuple(subs), principal, witness)

    p = go(kernel.normalize_sequent(dom, s), depth)
    if p is not None:
        kernel.check(dom, p)
    return p
