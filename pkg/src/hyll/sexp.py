"""Certificate serialization as s-expressions.

The grammar is deliberately small: lists, symbols and integers.  Proof
trees, sequents, propositions, terms and worlds each get a fixed layout so
that writing then reading is the identity and reading then writing
reproduces the input text byte for byte (modulo surrounding whitespace).
"""

from __future__ import annotations

from . import syntax, worlds
from .kernel import J, Proof, Sequent
from .syntax import (
    Atom, Bang, Down, ExistsT, ExistsW, ForallT, ForallW, Lolli, Neg, One,
    Plus, Pos, At, TApp, TBound, TConst, Tensor, Top, TVar, TWorld, With,
    Zero,
)
from .worlds import World


class SexpError(Exception):
    pass


# -- reader -----------------------------------------------------------------


def tokenize(text: str):
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _parse(tokens, pos):
    if pos >= len(tokens):
        raise SexpError("unexpected end of input")
    t = tokens[pos]
    if t == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _parse(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise SexpError("unclosed parenthesis")
        return items, pos + 1
    if t == ")":
        raise SexpError("unexpected closing parenthesis")
    if t.lstrip("-").isdigit():
        return int(t), pos + 1
    return t, pos + 1


def read(text: str):
    tokens = tokenize(text)
    sx, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise SexpError("trailing tokens after expression")
    return sx


def show(sx) -> str:
    if isinstance(sx, list):
        return "(" + " ".join(show(x) for x in sx) + ")"
    return str(sx)


# -- converters -------------------------------------------------------------


def world_to_sexp(w: World):
    out = ["w"]
    for kind, payload in w.atoms:
        if kind == worlds.CONST:
            out.append(payload)
        elif kind == worlds.VAR:
            out.append(["var", payload])
        else:
            out.append(["bv", payload])
    return out


def world_of_sexp(sx) -> World:
    if not (isinstance(sx, list) and sx and sx[0] == "w"):
        raise SexpError(f"not a world: {show(sx)}")
    atoms = []
    for item in sx[1:]:
        if isinstance(item, str):
            atoms.append((worlds.CONST, item))
        elif isinstance(item, list) and len(item) == 2 and item[0] == "var":
            atoms.append((worlds.VAR, item[1]))
        elif isinstance(item, list) and len(item) == 2 and item[0] == "bv":
            atoms.append((worlds.BOUND, item[1]))
        else:
            raise SexpError(f"bad world atom: {show(item)}")
    return World(tuple(atoms))


def term_to_sexp(t):
    match t:
        case TConst(name):
            return ["c", name]
        case TVar(name):
            return ["v", name]
        case TBound(k):
            return ["b", k]
        case TApp(fn, args):
            return ["f", fn, *map(term_to_sexp, args)]
        case TWorld(w):
            return ["tw", world_to_sexp(w)]
    raise SexpError(f"not a term: {t!r}")


def term_of_sexp(sx):
    if not (isinstance(sx, list) and sx):
        raise SexpError(f"not a term: {show(sx)}")
    match sx:
        case ["c", str(name)]:
            return TConst(name)
        case ["v", str(name)]:
            return TVar(name)
        case ["b", int(k)]:
            return TBound(k)
        case ["f", str(fn), *args]:
            return TApp(fn, tuple(term_of_sexp(a) for a in args))
        case ["tw", w]:
            return TWorld(world_of_sexp(w))
    raise SexpError(f"bad term: {show(sx)}")


def prop_to_sexp(p):
    match p:
        case Atom(pred, args):
            return ["atom", pred, *map(term_to_sexp, args)]
        case Tensor(a, b):
            return ["tens", prop_to_sexp(a), prop_to_sexp(b)]
        case One():
            return ["one"]
        case Lolli(a, b):
            return ["lolli", prop_to_sexp(a), prop_to_sexp(b)]
        case With(a, b):
            return ["with", prop_to_sexp(a), prop_to_sexp(b)]
        case Top():
            return ["top"]
        case Plus(a, b):
            return ["plus", prop_to_sexp(a), prop_to_sexp(b)]
        case Zero():
            return ["zero"]
        case Bang(a):
            return ["bang", prop_to_sexp(a)]
        case ForallT(a):
            return ["all", prop_to_sexp(a)]
        case ExistsT(a):
            return ["ex", prop_to_sexp(a)]
        case ForallW(a):
            return ["allw", prop_to_sexp(a)]
        case ExistsW(a):
            return ["exw", prop_to_sexp(a)]
        case At(a, w):
            return ["at", prop_to_sexp(a), world_to_sexp(w)]
        case Down(a):
            return ["dn", prop_to_sexp(a)]
        case Pos(a):
            return ["pos", prop_to_sexp(a)]
        case Neg(a):
            return ["neg", prop_to_sexp(a)]
    raise SexpError(f"not a proposition: {p!r}")


def prop_of_sexp(sx):
    if not (isinstance(sx, list) and sx):
        raise SexpError(f"not a proposition: {show(sx)}")
    match sx:
        case ["atom", str(pred), *args]:
            return Atom(pred, tuple(term_of_sexp(a) for a in args))
        case ["tens", a, b]:
            return Tensor(prop_of_sexp(a), prop_of_sexp(b))
        case ["one"]:
            return syntax.ONE
        case ["lolli", a, b]:
            return Lolli(prop_of_sexp(a), prop_of_sexp(b))
        case ["with", a, b]:
            return With(prop_of_sexp(a), prop_of_sexp(b))
        case ["top"]:
            return syntax.TOP
        case ["plus", a, b]:
            return Plus(prop_of_sexp(a), prop_of_sexp(b))
        case ["zero"]:
            return syntax.ZERO
        case ["bang", a]:
            return Bang(prop_of_sexp(a))
        case ["all", a]:
            return ForallT(prop_of_sexp(a))
        case ["ex", a]:
            return ExistsT(prop_of_sexp(a))
        case ["allw", a]:
            return ForallW(prop_of_sexp(a))
        case ["exw", a]:
            return ExistsW(prop_of_sexp(a))
        case ["at", a, w]:
            return At(prop_of_sexp(a), world_of_sexp(w))
        case ["dn", a]:
            return Down(prop_of_sexp(a))
        case ["pos", a]:
            return Pos(prop_of_sexp(a))
        case ["neg", a]:
            return Neg(prop_of_sexp(a))
    raise SexpError(f"bad proposition: {show(sx)}")


def j_to_sexp(j: J):
    return ["j", prop_to_sexp(j.prop), world_to_sexp(j.world)]


def j_of_sexp(sx) -> J:
    match sx:
        case ["j", p, w]:
            return J(prop_of_sexp(p), world_of_sexp(w))
    raise SexpError(f"bad judgement: {show(sx)}")


def sequent_to_sexp(s: Sequent):
    return [
        "seq",
        ["gamma", *map(j_to_sexp, s.gamma)],
        ["delta", *map(j_to_sexp, s.delta)],
        ["goal", j_to_sexp(s.goal)],
    ]


def sequent_of_sexp(sx) -> Sequent:
    match sx:
        case ["seq", ["gamma", *gs], ["delta", *ds], ["goal", goal]]:
            return Sequent(
                tuple(j_of_sexp(g) for g in gs),
                tuple(j_of_sexp(d) for d in ds),
                j_of_sexp(goal),
            )
    raise SexpError(f"bad sequent: {show(sx)}")


def _witness_to_sexp(w):
    if w is None:
        return ["none"]
    if isinstance(w, World):
        return ["world", world_to_sexp(w)]
    if isinstance(w, str):
        return ["name", w]
    return ["term", term_to_sexp(w)]


def _witness_of_sexp(sx):
    match sx:
        case ["none"]:
            return None
        case ["world", w]:
            return world_of_sexp(w)
        case ["name", str(n)]:
            return n
        case ["term", t]:
            return term_of_sexp(t)
    raise SexpError(f"bad witness: {show(sx)}")


def proof_to_sexp(p: Proof):
    out = ["proof", p.rule, sequent_to_sexp(p.seq)]
    out.append(["none"] if p.principal is None else ["some", j_to_sexp(p.principal)])
    out.append(_witness_to_sexp(p.witness))
    out.append(["prems", *map(proof_to_sexp, p.premises)])
    return out


def proof_of_sexp(sx) -> Proof:
    match sx:
        case ["proof", str(rule), seq, principal, witness, ["prems", *prems]]:
            match principal:
                case ["none"]:
                    pj = None
                case ["some", j]:
                    pj = j_of_sexp(j)
                case _:
                    raise SexpError(f"bad principal: {show(principal)}")
            return Proof(
                rule,
                sequent_of_sexp(seq),
                tuple(proof_of_sexp(q) for q in prems),
                pj,
                _witness_of_sexp(witness),
            )
    raise SexpError(f"bad proof node: {show(sx)}")


def dump_proof(p: Proof, domain: str | None = None, kind: str = "sequent") -> str:
    """Render a self-describing certificate (domain name + proof tree)."""
    header = ["cert", kind, domain or "temporal"]
    return show([header, proof_to_sexp(p)]) + "\n"


def load_proof(text: str):
    """Parse a certificate; returns (kind, domain_name, proof)."""
    sx = read(text)
    match sx:
        case [["cert", str(kind), str(domain)], body]:
            return kind, domain, proof_of_sexp(body)
    raise SexpError("not a certificate file")
