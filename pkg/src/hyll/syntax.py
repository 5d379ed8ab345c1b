"""Propositions and first-order terms.

The proposition language is intuitionistic linear logic extended with two
hybrid connectives: a satisfaction operator ``A @ w`` that relocates a
proposition to a named world, and a binder ``down u. A`` that captures the
current world.  Quantifiers come in two sorts, over terms and over worlds.

Binders use de Bruijn indices internally, with separate index spaces for
the two sorts: a term index counts enclosing term binders only, a world
index counts enclosing world binders (``forall world``, ``exists world``
and ``down``) only.  Free variables are named.

Rate-carrying predicates (``tau``/``rt`` in the process encoding) need a
world in argument position; the ``TWorld`` term constructor embeds a world
expression as a term argument.  World binders bind through it.  This is the
only place the two sorts meet; the surface syntax keeps them apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import worlds
from .worlds import World

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class TConst:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class TVar:
    """A named free variable (eigenvariables are generated in this form)."""

    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class TBound:
    index: int

    def __repr__(self):
        return f"#{self.index}"


@dataclass(frozen=True)
class TApp:
    fn: str
    args: tuple

    def __repr__(self):
        return f"{self.fn}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class TWorld:
    """A world expression embedded in term-argument position."""

    world: World

    def __repr__(self):
        return "{%r}" % (self.world,)


# ---------------------------------------------------------------------------
# Propositions


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Tensor:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Lolli:
    ante: "Prop"
    succ: "Prop"


@dataclass(frozen=True)
class With:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Plus:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Bang:
    body: "Prop"


@dataclass(frozen=True)
class ForallT:
    body: "Prop"
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class ExistsT:
    body: "Prop"
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class ForallW:
    body: "Prop"
    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class ExistsW:
    body: "Prop"
    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class At:
    body: "Prop"
    world: World


@dataclass(frozen=True)
class Down:
    body: "Prop"
    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class Pos:
    """Positive shift: embeds a negative proposition into the positives."""

    body: "Prop"


@dataclass(frozen=True)
class Neg:
    """Negative shift: embeds a positive proposition into the negatives."""

    body: "Prop"


ONE = One()
TOP = Top()
ZERO = Zero()

BINDERS_T = (ForallT, ExistsT)
BINDERS_W = (ForallW, ExistsW, Down)

# Predicate names reserved for the process encoding.
RESERVED_PREDS = frozenset({"dt", "out", "in", "tau", "rt", "act"})


# ---------------------------------------------------------------------------
# Generic traversal.  on_term(t, td, wd) and on_world(w, td, wd) receive the
# number of term/world binders passed on the way down.


def map_prop(p, on_term, on_world, td=0, wd=0):
    match p:
        case Atom(pred, args):
            return Atom(pred, tuple(_map_term(a, on_term, on_world, td, wd) for a in args))
        case Tensor(a, b):
            return Tensor(map_prop(a, on_term, on_world, td, wd), map_prop(b, on_term, on_world, td, wd))
        case Lolli(a, b):
            return Lolli(map_prop(a, on_term, on_world, td, wd), map_prop(b, on_term, on_world, td, wd))
        case With(a, b):
            return With(map_prop(a, on_term, on_world, td, wd), map_prop(b, on_term, on_world, td, wd))
        case Plus(a, b):
            return Plus(map_prop(a, on_term, on_world, td, wd), map_prop(b, on_term, on_world, td, wd))
        case One() | Top() | Zero():
            return p
        case Bang(a):
            return Bang(map_prop(a, on_term, on_world, td, wd))
        case Pos(a):
            return Pos(map_prop(a, on_term, on_world, td, wd))
        case Neg(a):
            return Neg(map_prop(a, on_term, on_world, td, wd))
        case ForallT(a, hint):
            return ForallT(map_prop(a, on_term, on_world, td + 1, wd), hint)
        case ExistsT(a, hint):
            return ExistsT(map_prop(a, on_term, on_world, td + 1, wd), hint)
        case ForallW(a, hint):
            return ForallW(map_prop(a, on_term, on_world, td, wd + 1), hint)
        case ExistsW(a, hint):
            return ExistsW(map_prop(a, on_term, on_world, td, wd + 1), hint)
        case Down(a, hint):
            return Down(map_prop(a, on_term, on_world, td, wd + 1), hint)
        case At(a, w):
            return At(map_prop(a, on_term, on_world, td, wd), on_world(w, td, wd))
        case _:
            raise TypeError(f"not a proposition: {p!r}")


def _map_term(t, on_term, on_world, td, wd):
    match t:
        case TApp(fn, args):
            return TApp(fn, tuple(_map_term(a, on_term, on_world, td, wd) for a in args))
        case TWorld(w):
            return TWorld(on_world(w, td, wd))
        case _:
            return on_term(t, td, wd)


def walk_prop(p, visit_term=None, visit_world=None):
    """Visit every term and world in p (read-only)."""

    def on_t(t, td, wd):
        if visit_term:
            visit_term(t, td, wd)
        return t

    def on_w(w, td, wd):
        if visit_world:
            visit_world(w, td, wd)
        return w

    map_prop(p, on_t, on_w)


# ---------------------------------------------------------------------------
# Substitution


def open_term(p, payload):
    """Instantiate the body of a term binder with a closed term."""

    def on_t(t, td, wd):
        if isinstance(t, TBound):
            if t.index == td:
                return payload
            if t.index > td:
                return TBound(t.index - 1)
        return t

    return map_prop(p, on_t, lambda w, td, wd: w)


def open_world(p, payload: World):
    """Instantiate the body of a world binder with a bound-free world."""

    def on_w(w, td, wd):
        return worlds.open_bound(w, wd, payload)

    return map_prop(p, lambda t, td, wd: t, on_w)


def close_term(p, name):
    """Abstract the free term variable `name` into a new outermost binder body."""

    def on_t(t, td, wd):
        if isinstance(t, TVar) and t.name == name:
            return TBound(td)
        return t

    return map_prop(p, on_t, lambda w, td, wd: w)


def close_world(p, name):
    def on_w(w, td, wd):
        return worlds.close_var(w, name, wd)

    return map_prop(p, lambda t, td, wd: t, on_w)


def subst_term_var(p, name, payload):
    def on_t(t, td, wd):
        if isinstance(t, TVar) and t.name == name:
            return payload
        return t

    return map_prop(p, on_t, lambda w, td, wd: w)


def subst_world_var(p, name, payload: World):
    def on_w(w, td, wd):
        return worlds.subst_var(w, name, payload)

    return map_prop(p, lambda t, td, wd: t, on_w)


def shift_world_indices(p, by, cutoff=0):
    def on_w(w, td, wd):
        return worlds.shift(w, by, cutoff + wd)

    return map_prop(p, lambda t, td, wd: t, on_w)


def normalize_worlds(dom, p):
    """Put every world inside p into the domain's normal form."""
    return map_prop(p, lambda t, td, wd: t, lambda w, td, wd: dom.normalize(w))


# ---------------------------------------------------------------------------
# Queries


def free_term_vars(p) -> set:
    out = set()

    def on_t(t, td, wd):
        if isinstance(t, TVar):
            out.add(t.name)

    walk_prop(p, visit_term=on_t)
    return out


def free_world_vars(p) -> set:
    out = set()

    def on_w(w, td, wd):
        out.update(worlds.free_vars(w))

    walk_prop(p, visit_world=on_w)
    return out


def world_constants(p) -> set:
    out = set()

    def on_w(w, td, wd):
        out.update(worlds.constants(w))

    walk_prop(p, visit_world=on_w)
    return out


def prop_worlds(p) -> list:
    """All world expressions occurring in p (closed ones only)."""
    out = []

    def on_w(w, td, wd):
        if worlds.max_bound(w) < 0:
            out.append(w)

    walk_prop(p, visit_world=on_w)
    return out


def closed_subterms(p) -> list:
    """Binder-free leaf terms occurring in p, for witness enumeration.

    map_prop recurses through TApp itself, so the visitor sees leaves only;
    constants and free variables are the useful witness candidates.
    """
    out = []

    def on_t(t, td, wd):
        if isinstance(t, (TConst, TVar)):
            out.append(t)

    walk_prop(p, visit_term=on_t)
    seen, uniq = set(), []
    for t in out:
        if t not in seen:
            seen.add(t)
            uniq.append(t)
    return uniq


def atom_preds(p) -> set:
    out = set()

    def rec(q):
        match q:
            case Atom(pred, _):
                out.add(pred)
            case Tensor(a, b) | Lolli(a, b) | With(a, b) | Plus(a, b):
                rec(a), rec(b)
            case Bang(a) | Pos(a) | Neg(a):
                rec(a)
            case ForallT(a) | ExistsT(a) | ForallW(a) | ExistsW(a) | Down(a):
                rec(a)
            case At(a, _):
                rec(a)
            case _:
                pass

    rec(p)
    return out


def size(p) -> int:
    match p:
        case Atom(_, _) | One() | Top() | Zero():
            return 1
        case Tensor(a, b) | Lolli(a, b) | With(a, b) | Plus(a, b):
            return 1 + size(a) + size(b)
        case Bang(a) | Pos(a) | Neg(a):
            return 1 + size(a)
        case ForallT(a) | ExistsT(a) | ForallW(a) | ExistsW(a) | Down(a):
            return 1 + size(a)
        case At(a, _):
            return 1 + size(a)
    raise TypeError(f"not a proposition: {p!r}")


def has_shifts(p) -> bool:
    match p:
        case Pos(_) | Neg(_):
            return True
        case Tensor(a, b) | Lolli(a, b) | With(a, b) | Plus(a, b):
            return has_shifts(a) or has_shifts(b)
        case Bang(a) | ForallT(a) | ExistsT(a) | ForallW(a) | ExistsW(a) | Down(a) | At(a, _):
            return has_shifts(a)
        case _:
            return False


# ---------------------------------------------------------------------------
# Polarity


class PolarityTable:
    """Assignment of polarities to atomic predicates.

    Atoms default to positive; `rt` is negative (rate facts live in the
    unrestricted context and are consumed by matching against a goal).
    Theories may declare further negative atoms.
    """

    def __init__(self, negatives=()):
        self.negatives = frozenset(negatives) | {"rt"}

    def of(self, pred: str) -> str:
        return "neg" if pred in self.negatives else "pos"


DEFAULT_POLARITY = PolarityTable()


def polarity(p, table: PolarityTable = DEFAULT_POLARITY) -> str:
    """Intrinsic polarity of a proposition; at/down inherit from the body."""
    match p:
        case Atom(pred, _):
            return table.of(pred)
        case Tensor(_, _) | One() | Plus(_, _) | Zero() | Bang(_) | ExistsT(_) | ExistsW(_) | Pos(_):
            return "pos"
        case With(_, _) | Top() | Lolli(_, _) | ForallT(_) | ForallW(_) | Neg(_):
            return "neg"
        case At(a, _) | Down(a):
            return polarity(a, table)
    raise TypeError(f"not a proposition: {p!r}")


def polarize(p, sign, table: PolarityTable = DEFAULT_POLARITY):
    """Insert shifts so that p becomes a well-formed polarized proposition
    of the given sign.  at/down are parasitic: they take the polarity of
    their body and never force a shift by themselves."""
    match p:
        case Atom(_, _):
            out = p
        case Tensor(a, b):
            out = Tensor(polarize(a, "pos", table), polarize(b, "pos", table))
        case Plus(a, b):
            out = Plus(polarize(a, "pos", table), polarize(b, "pos", table))
        case One() | Zero() | Top():
            out = p
        case Bang(a):
            out = Bang(polarize(a, "neg", table))
        case ExistsT(a, h):
            out = ExistsT(polarize(a, "pos", table), h)
        case ExistsW(a, h):
            out = ExistsW(polarize(a, "pos", table), h)
        case With(a, b):
            out = With(polarize(a, "neg", table), polarize(b, "neg", table))
        case Lolli(a, b):
            out = Lolli(polarize(a, "pos", table), polarize(b, "neg", table))
        case ForallT(a, h):
            out = ForallT(polarize(a, "neg", table), h)
        case ForallW(a, h):
            out = ForallW(polarize(a, "neg", table), h)
        case At(a, w):
            out = At(polarize(a, sign, table), w)
        case Down(a, h):
            out = Down(polarize(a, sign, table), h)
        case Pos(_) | Neg(_):
            raise ValueError("polarize expects a shift-free proposition")
        case _:
            raise TypeError(f"not a proposition: {p!r}")
    got = polarity(out, table)
    if got == sign:
        return out
    return Pos(out) if sign == "pos" else Neg(out)


def erase(p):
    """Remove all shifts, returning the underlying plain proposition."""
    match p:
        case Pos(a) | Neg(a):
            return erase(a)
        case Atom(_, _) | One() | Top() | Zero():
            return p
        case Tensor(a, b):
            return Tensor(erase(a), erase(b))
        case Lolli(a, b):
            return Lolli(erase(a), erase(b))
        case With(a, b):
            return With(erase(a), erase(b))
        case Plus(a, b):
            return Plus(erase(a), erase(b))
        case Bang(a):
            return Bang(erase(a))
        case ForallT(a, h):
            return ForallT(erase(a), h)
        case ExistsT(a, h):
            return ExistsT(erase(a), h)
        case ForallW(a, h):
            return ForallW(erase(a), h)
        case ExistsW(a, h):
            return ExistsW(erase(a), h)
        case At(a, w):
            return At(erase(a), w)
        case Down(a, h):
            return Down(erase(a), h)
    raise TypeError(f"not a proposition: {p!r}")


def polarized_wf(p, sign, table: PolarityTable = DEFAULT_POLARITY) -> bool:
    """Check conformance with the polarized grammar."""
    try:
        _pwf(p, sign, table)
        return True
    except ValueError:
        return False


def _pwf(p, sign, table):
    def need(cond):
        if not cond:
            raise ValueError(f"ill-polarized at {p!r} (expected {sign})")

    match p:
        case Atom(pred, _):
            need(table.of(pred) == sign)
        case Tensor(a, b) | Plus(a, b):
            need(sign == "pos")
            _pwf(a, "pos", table), _pwf(b, "pos", table)
        case One() | Zero():
            need(sign == "pos")
        case Bang(a):
            need(sign == "pos")
            _pwf(a, "neg", table)
        case ExistsT(a) | ExistsW(a):
            need(sign == "pos")
            _pwf(a, "pos", table)
        case Pos(a):
            need(sign == "pos")
            _pwf(a, "neg", table)
        case With(a, b):
            need(sign == "neg")
            _pwf(a, "neg", table), _pwf(b, "neg", table)
        case Top():
            need(sign == "neg")
        case Lolli(a, b):
            need(sign == "neg")
            _pwf(a, "pos", table), _pwf(b, "neg", table)
        case ForallT(a) | ForallW(a):
            need(sign == "neg")
            _pwf(a, "neg", table)
        case Neg(a):
            need(sign == "neg")
            _pwf(a, "pos", table)
        case At(a, _) | Down(a):
            _pwf(a, sign, table)
        case _:
            raise TypeError(f"not a proposition: {p!r}")


# ---------------------------------------------------------------------------
# Derived connectives.  The temporal reading: box = at every reachable
# world, dia = at some reachable world, rho{v} = exactly v away.


def mk_box(p) -> Down:
    body = shift_world_indices(p, 2)
    w = World(((worlds.BOUND, 1), (worlds.BOUND, 0)))
    return Down(ForallW(At(body, w), "w"), "u")


def mk_dia(p) -> Down:
    body = shift_world_indices(p, 2)
    w = World(((worlds.BOUND, 1), (worlds.BOUND, 0)))
    return Down(ExistsW(At(body, w), "w"), "u")


def mk_rate(v: World, p) -> Down:
    assert worlds.max_bound(v) < 0, "rate annotation must be binder-free"
    body = shift_world_indices(p, 1)
    w = World(((worlds.BOUND, 0),) + v.atoms)
    return Down(At(body, w), "u")


def mk_bangbang(p) -> ForallW:
    """The global modality: p at every world whatsoever."""
    body = shift_world_indices(p, 1)
    return ForallW(At(body, worlds.bound(0)), "u")


def mk_dia_global(p) -> ExistsW:
    """Dual of the global modality: p at some world."""
    body = shift_world_indices(p, 1)
    return ExistsW(At(body, worlds.bound(0)), "u")


def _body_avoids(p, *indices) -> bool:
    bad = []

    def on_w(w, td, wd):
        for kind, k in w.atoms:
            if kind == worlds.BOUND and (k - wd) in indices:
                bad.append(k)

    walk_prop(p, visit_world=on_w)
    return not bad


def as_rate(p):
    """Recognize mk_rate(v, q), returning (v, q) or None."""
    match p:
        case Down(At(body, w)):
            hits = [a for a in w.atoms if a == (worlds.BOUND, 0)]
            if len(hits) != 1 or not _body_avoids(body, 0):
                return None
            rest = World(tuple(a for a in w.atoms if a != (worlds.BOUND, 0)))
            return worlds.shift(rest, -1), shift_world_indices(body, -1)
    return None


def as_bangbang(p):
    match p:
        case ForallW(At(body, w)):
            if w == worlds.bound(0) and _body_avoids(body, 0):
                return shift_world_indices(body, -1)
    return None


def as_dia_global(p):
    match p:
        case ExistsW(At(body, w)):
            if w == worlds.bound(0) and _body_avoids(body, 0):
                return shift_world_indices(body, -1)
    return None


def as_box(p):
    match p:
        case Down(ForallW(At(body, w))):
            if w == World(((worlds.BOUND, 1), (worlds.BOUND, 0))) and _body_avoids(body, 0, 1):
                return shift_world_indices(body, -2)
    return None


def as_dia(p):
    match p:
        case Down(ExistsW(At(body, w))):
            if w == World(((worlds.BOUND, 1), (worlds.BOUND, 0))) and _body_avoids(body, 0, 1):
                return shift_world_indices(body, -2)
    return None


# Embedding of the intuitionistic connectives: conjunction becomes additive
# conjunction, disjunction and implication guard their components with !.


def intu_imp(a, b):
    return Lolli(Bang(a), b)


def intu_and(a, b):
    return With(a, b)


def intu_or(a, b):
    return Plus(Bang(a), Bang(b))


# ---------------------------------------------------------------------------
# Printing


_LV_BIND, _LV_LOLLI, _LV_WITH, _LV_PLUS, _LV_TENS, _LV_AT, _LV_PRE, _LV_ATOM = range(8)


def _fresh_name(hint, used):
    if hint not in used:
        return hint
    i = 1
    while f"{hint}{i}" in used:
        i += 1
    return f"{hint}{i}"


def world_str(w: World, wenv=()) -> str:
    if not w.atoms:
        return "id"
    parts = []
    for kind, payload in w.atoms:
        if kind == worlds.BOUND:
            parts.append(wenv[payload] if payload < len(wenv) else f"${payload}")
        elif kind == worlds.VAR:
            parts.append(f"?{payload}")
        else:
            parts.append(payload)
    return " * ".join(parts)


def _world_tight(w: World, wenv) -> str:
    s = world_str(w, wenv)
    return s if len(w.atoms) <= 1 else f"({s})"


def term_str(t, tenv=(), wenv=()) -> str:
    match t:
        case TConst(name) | TVar(name):
            return name
        case TBound(k):
            return tenv[k] if k < len(tenv) else f"#{k}"
        case TApp(fn, args):
            return f"{fn}({', '.join(term_str(a, tenv, wenv) for a in args)})"
        case TWorld(w):
            return "{%s}" % world_str(w, wenv)
    raise TypeError(f"not a term: {t!r}")


def prop_str(p, level=_LV_BIND, tenv=(), wenv=()) -> str:
    def wrap(lv, s):
        return f"({s})" if lv < level else s

    sugar = as_rate(p)
    if sugar is not None:
        v, body = sugar
        return wrap(_LV_PRE, f"rho{{{world_str(v, wenv)}}} {prop_str(body, _LV_PRE, tenv, wenv)}")
    body = as_bangbang(p)
    if body is not None:
        return wrap(_LV_PRE, f"!!{prop_str(body, _LV_PRE, tenv, wenv)}")
    body = as_box(p)
    if body is not None:
        return wrap(_LV_PRE, f"box {prop_str(body, _LV_PRE, tenv, wenv)}")
    body = as_dia(p)
    if body is not None:
        return wrap(_LV_PRE, f"dia {prop_str(body, _LV_PRE, tenv, wenv)}")

    match p:
        case Atom(pred, args):
            if not args:
                return pred
            s = " ".join([pred] + [term_str(a, tenv, wenv) for a in args])
            return wrap(_LV_PRE, s)
        case One():
            return "1"
        case Top():
            return "top"
        case Zero():
            return "0"
        case Tensor(a, b):
            return wrap(_LV_TENS, f"{prop_str(a, _LV_TENS, tenv, wenv)} * {prop_str(b, _LV_AT, tenv, wenv)}")
        case Plus(a, b):
            return wrap(_LV_PLUS, f"{prop_str(a, _LV_PLUS, tenv, wenv)} + {prop_str(b, _LV_TENS, tenv, wenv)}")
        case With(a, b):
            return wrap(_LV_WITH, f"{prop_str(a, _LV_WITH, tenv, wenv)} & {prop_str(b, _LV_PLUS, tenv, wenv)}")
        case Lolli(a, b):
            return wrap(_LV_LOLLI, f"{prop_str(a, _LV_WITH, tenv, wenv)} -o {prop_str(b, _LV_LOLLI, tenv, wenv)}")
        case Bang(a):
            inner = prop_str(a, _LV_PRE, tenv, wenv)
            if inner.startswith("!"):
                # keep ! ! distinct from the !! modality
                inner = f"({prop_str(a, _LV_BIND, tenv, wenv)})"
            return wrap(_LV_PRE, f"!{inner}")
        case Pos(a):
            return wrap(_LV_PRE, f"pos {prop_str(a, _LV_PRE, tenv, wenv)}")
        case Neg(a):
            return wrap(_LV_PRE, f"neg {prop_str(a, _LV_PRE, tenv, wenv)}")
        case At(a, w):
            return wrap(_LV_AT, f"{prop_str(a, _LV_AT, tenv, wenv)} @ {_world_tight(w, wenv)}")
        case ForallT(a, hint):
            n = _fresh_name(hint, set(tenv) | free_term_vars(p))
            return wrap(_LV_BIND, f"forall {n}. {prop_str(a, _LV_BIND, (n,) + tenv, wenv)}")
        case ExistsT(a, hint):
            n = _fresh_name(hint, set(tenv) | free_term_vars(p))
            return wrap(_LV_BIND, f"exists {n}. {prop_str(a, _LV_BIND, (n,) + tenv, wenv)}")
        case ForallW(a, hint):
            n = _fresh_name(hint, set(wenv) | free_world_vars(p))
            return wrap(_LV_BIND, f"forall world {n}. {prop_str(a, _LV_BIND, tenv, (n,) + wenv)}")
        case ExistsW(a, hint):
            n = _fresh_name(hint, set(wenv) | free_world_vars(p))
            return wrap(_LV_BIND, f"exists world {n}. {prop_str(a, _LV_BIND, tenv, (n,) + wenv)}")
        case Down(a, hint):
            n = _fresh_name(hint, set(wenv) | free_world_vars(p))
            return wrap(_LV_BIND, f"down {n}. {prop_str(a, _LV_BIND, tenv, (n,) + wenv)}")
    raise TypeError(f"not a proposition: {p!r}")
