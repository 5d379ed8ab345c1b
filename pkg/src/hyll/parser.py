"""Readers for the textual surface language, plus the process printer.

Three layers share one tokenizer:

  * propositions, terms, and worlds in the notation `prop_str` emits, so
    anything the printer produces parses back to an equal tree (binder
    hints aside, which do not take part in equality anyway);
  * theory files: a domain line, world-constant declarations, named
    axioms, linear hypotheses, a goal, and world hints for the search;
  * process files: channel rates, stochastic weights, definitions, and
    the process to run.

Every name in term position reads back as a variable; binders abstract
their name on exit, so shadowing resolves to the innermost binder and
free names stay inert variables, the same leaves the process encoding
uses.  Grammar words
(`forall`, `exists`, `down`, `world`, `box`, `dia`, `rho`, `pos`, `neg`,
`top`, `id`) cannot name atoms; `new` and `tau` cannot name channels.

Proposition grammar, loosest first::

    P ::= forall x. P | exists x. P | forall world u. P
        | exists world u. P | down u. P
        | P -o P                (right associative)
        | P & P | P + P | P * P (left associative)
        | P @ w                 (w a name, id, or parenthesised product)
        | !P | !!P | box P | dia P | rho{w} P | pos P | neg P
        | atom t1 .. tn | 1 | top | 0 | (P)

Process grammar::

    Q ::= Q | Q                 (loosest)
        | Q + Q
        | c!(m).Q | c?(y).Q | tau{w}.Q
        | new(w) x in Q         (the body extends as far as possible)
        | X | X(a, .., z) | 0 | (Q)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from . import kernel, spi, syntax, worlds
from .kernel import J
from .syntax import (
    At, Atom, Bang, Down, ExistsT, ExistsW, ForallT, ForallW, Lolli, Neg,
    One, Plus, Pos, TApp, Tensor, Top, TVar, TWorld, With, Zero,
)
from .worlds import RID, World


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Tokens

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NUM = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")
_PUNCT2 = ("-o", "!!", "=>", "|-")
_PUNCT1 = "(){}[].,:=|!?@*+&"


@dataclass(frozen=True)
class Tok:
    kind: str  # "name", "num", "punct", "end"
    text: str
    line: int
    col: int


def tokenize(src: str, line: int = 1) -> list:
    toks = []
    i, n = 0, len(src)
    col0 = 0
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col0 = i + 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        col = i - col0 + 1
        if src[i : i + 2] in _PUNCT2:
            toks.append(Tok("punct", src[i : i + 2], line, col))
            i += 2
            continue
        m = _NAME.match(src, i)
        if m:
            toks.append(Tok("name", m.group(), line, col))
            i = m.end()
            continue
        m = _NUM.match(src, i)
        if m:
            toks.append(Tok("num", m.group(), line, col))
            i = m.end()
            continue
        if c in _PUNCT1:
            toks.append(Tok("punct", c, line, col))
            i += 1
            continue
        raise ParseError(f"stray character {c!r} (line {line}, column {col})")
    toks.append(Tok("end", "", line, n - col0 + 1))
    return toks


_PROP_WORDS = {"forall", "exists", "down", "world", "box", "dia", "rho",
               "pos", "neg", "top", "id"}
_PROC_WORDS = {"new", "tau", "id"}


# ---------------------------------------------------------------------------
# The parser proper.  Binders parse their body with the bound name in
# scope, then abstract it on exit, so nested same-name binders shadow
# correctly: the inner close runs first and leaves nothing for the outer
# one to capture.


class _P:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "end"

    def take(self, text: str | None = None) -> Tok:
        t = self.tok
        if t.kind == "end":
            self.fail(f"expected {text!r}" if text else "more input")
        if text is not None and t.text != text:
            self.fail(f"expected {text!r}")
        self.i += 1
        return t

    def name(self, what: str = "a name") -> str:
        if self.tok.kind != "name":
            self.fail(f"expected {what}")
        return self.take().text

    def done(self):
        if self.tok.kind != "end":
            self.fail("trailing input")

    def fail(self, msg: str):
        t = self.tok
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"{msg}, got {got} (line {t.line}, column {t.col})")

    # propositions ----------------------------------------------------

    def prop(self, wenv=()):
        t = self.tok
        if t.kind == "name" and t.text in ("forall", "exists"):
            self.take()
            if self.at("world"):
                self.take()
                u = self.name("a world variable")
                self.take(".")
                body = syntax.close_world(self.prop((u,) + wenv), u)
                return (ForallW if t.text == "forall" else ExistsW)(body, u)
            x = self.name("a variable")
            self.take(".")
            body = syntax.close_term(self.prop(wenv), x)
            return (ForallT if t.text == "forall" else ExistsT)(body, x)
        if t.kind == "name" and t.text == "down":
            self.take()
            u = self.name("a world variable")
            self.take(".")
            return Down(syntax.close_world(self.prop((u,) + wenv), u), u)
        return self._lolli(wenv)

    def _lolli(self, wenv):
        a = self._with(wenv)
        if self.at("-o"):
            self.take()
            return Lolli(a, self.prop(wenv))
        return a

    def _with(self, wenv):
        a = self._plus(wenv)
        while self.at("&"):
            self.take()
            a = With(a, self._plus(wenv))
        return a

    def _plus(self, wenv):
        a = self._tens(wenv)
        while self.at("+"):
            self.take()
            a = Plus(a, self._tens(wenv))
        return a

    def _tens(self, wenv):
        a = self._atp(wenv)
        while self.at("*"):
            self.take()
            a = Tensor(a, self._atp(wenv))
        return a

    def _atp(self, wenv):
        a = self._prefix(wenv)
        while self.at("@"):
            self.take()
            a = At(a, self._watom(wenv))
        return a

    def _prefix(self, wenv):
        t = self.tok
        if t.text == "!!":
            self.take()
            return syntax.mk_bangbang(self._prefix(wenv))
        if t.text == "!":
            self.take()
            return Bang(self._prefix(wenv))
        if t.kind == "name" and t.text == "rho":
            self.take()
            self.take("{")
            v = self.world(wenv)
            self.take("}")
            return syntax.mk_rate(v, self._prefix(wenv))
        if t.kind == "name" and t.text in ("box", "dia", "pos", "neg"):
            self.take()
            body = self._prefix(wenv)
            mk = {"box": syntax.mk_box, "dia": syntax.mk_dia, "pos": Pos, "neg": Neg}
            return mk[t.text](body)
        return self._primary(wenv)

    def _primary(self, wenv):
        t = self.tok
        if t.text == "(":
            self.take()
            p = self.prop(wenv)
            self.take(")")
            return p
        if t.kind == "num" and t.text == "1":
            self.take()
            return One()
        if t.kind == "num" and t.text == "0":
            self.take()
            return Zero()
        if t.kind == "name" and t.text == "top":
            self.take()
            return Top()
        if t.kind == "name" and t.text not in _PROP_WORDS:
            pred = self.take().text
            args = []
            while self._starts_term():
                args.append(self.term(wenv))
            return Atom(pred, tuple(args))
        self.fail("expected a proposition (parenthesise binders used as operands)")

    def _starts_term(self):
        t = self.tok
        return (t.kind == "name" and t.text not in _PROP_WORDS) or t.text == "{"

    # terms -------------------------------------------------------------

    def term(self, wenv=()):
        if self.at("{"):
            self.take()
            w = self.world(wenv)
            self.take("}")
            return TWorld(w)
        name = self.name("a term")
        if self.at("("):
            self.take()
            args = []
            if not self.at(")"):
                args.append(self.term(wenv))
                while self.at(","):
                    self.take()
                    args.append(self.term(wenv))
            self.take(")")
            return TApp(name, tuple(args))
        return TVar(name)

    # worlds ------------------------------------------------------------

    def world(self, wenv=()) -> World:
        w = self._watom(wenv)
        while self.at("*"):
            self.take()
            w = World(w.atoms + self._watom(wenv).atoms)
        return w

    def _watom(self, wenv) -> World:
        if self.at("("):
            self.take()
            w = self.world(wenv)
            self.take(")")
            return w
        if self.at("?"):
            self.take()
            return worlds.var(self.name("a world variable"))
        name = self.name("a world")
        if name == "id":
            return RID
        return worlds.var(name) if name in wenv else worlds.const(name)

    # processes -----------------------------------------------------------
    # Bound channel and message names resolve by position in `bound`
    # (innermost first), which is exactly their de Bruijn index.

    def proc(self, bound=()):
        a = self._psum(bound)
        while self.at("|"):
            self.take()
            a = spi.Par(a, self._psum(bound))
        return a

    def _psum(self, bound):
        a = self._pguard(bound)
        while self.at("+"):
            self.take()
            a = spi.Sum(a, self._pguard(bound))
        return a

    def _pguard(self, bound):
        t = self.tok
        if t.kind == "num" and t.text == "0":
            self.take()
            return spi.Nil()
        if t.text == "(":
            self.take()
            p = self.proc(bound)
            self.take(")")
            return p
        if t.kind == "name" and t.text == "new":
            self.take()
            self.take("(")
            r = self.world(())
            self.take(")")
            x = self.name("a channel name")
            self.take("in")
            return spi.New(r, self.proc((x,) + bound), x)
        if t.kind == "name" and t.text == "tau":
            self.take()
            self.take("{")
            r = self.world(())
            self.take("}")
            self.take(".")
            return spi.Tau(r, self._pguard(bound))
        if t.kind == "name" and t.text not in _PROC_WORDS:
            name = self.take().text
            if self.at("!"):
                self.take()
                self.take("(")
                msg = self._pname(bound)
                self.take(")")
                self.take(".")
                return spi.Send(self._resolve(name, bound), msg, self._pguard(bound))
            if self.at("?"):
                self.take()
                self.take("(")
                y = self.name("a bound name")
                self.take(")")
                self.take(".")
                return spi.Recv(self._resolve(name, bound), self._pguard((y,) + bound), y)
            if self.at("("):
                self.take()
                args = []
                if not self.at(")"):
                    args.append(self._pname(bound))
                    while self.at(","):
                        self.take()
                        args.append(self._pname(bound))
                self.take(")")
                return spi.Call(name, tuple(args))
            return spi.Call(name, ())
        self.fail("expected a process")

    def _resolve(self, name, bound):
        return bound.index(name) if name in bound else name

    def _pname(self, bound):
        return self._resolve(self.name("a name"), bound)


# ---------------------------------------------------------------------------
# String entry points


def _full(text: str, method, *args):
    p = _P(tokenize(text))
    out = method(p, *args)
    p.done()
    return out


def parse_prop(text: str):
    return _full(text, _P.prop)


def parse_term(text: str):
    return _full(text, _P.term)


def parse_world(text: str) -> World:
    return _full(text, _P.world)


def parse_proc(text: str):
    return _full(text, _P.proc)


def parse_judgement(text: str) -> J:
    p = parse_prop(text)
    if isinstance(p, At):
        return J(p.body, p.world)
    raise ParseError(f"a judgement needs a world: write (P) @ w, got {text!r}")


def judgement_str(j: J) -> str:
    """Inverse of parse_judgement: the outermost @ is the judgement world."""
    return syntax.prop_str(At(j.prop, j.world))


# ---------------------------------------------------------------------------
# Theory files


@dataclass(frozen=True)
class Theory:
    dom_name: str
    consts: tuple  # (name, weight | None) world constants, declaration order
    polarity: tuple  # (pred, "pos" | "neg") declarations
    axioms: tuple  # (name, judgement) pairs for the persistent zone
    assumes: tuple  # judgements for the linear zone
    goals: tuple  # judgements to prove, in declaration order
    hints: tuple  # worlds and terms offered to the search as candidates
    system: tuple = ()  # names of the axioms forming the reaction system

    @property
    def dom(self) -> worlds.Domain:
        return _DOMAINS[self.dom_name]

    @property
    def table(self) -> syntax.PolarityTable:
        return syntax.PolarityTable(p for p, pol in self.polarity if pol == "neg")

    def sequent(self, goal: J | None = None, delta: tuple | None = None) -> kernel.Sequent:
        if goal is None:
            if not self.goals:
                raise ParseError("the theory declares no goal")
            goal = self.goals[0]
        d = self.assumes if delta is None else delta
        return kernel.sequent((j for _, j in self.axioms), d, goal)


_DOMAINS = worlds.DOMAINS

_HEAD = re.compile(r"^([A-Za-z_][A-Za-z0-9_'-]*)\s*(.*)$")


def _logical_lines(src: str):
    for lineno, raw in enumerate(src.splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text


def _directive(text: str, lineno: int):
    m = _HEAD.match(text)
    if not m:
        raise ParseError(f"cannot read directive (line {lineno}): {text!r}")
    return m.group(1), m.group(2)


def _line_judgement(p: _P) -> J:
    prop = p.prop()
    p.done()
    if isinstance(prop, At):
        return J(prop.body, prop.world)
    t = p.toks[0]
    raise ParseError(f"missing vantage world, write (P) @ w (line {t.line})")


def _opt_weight(p: _P):
    """An optional `[const 2.5]` tail; the brackets may be dropped."""
    if not (p.at("[") or p.at("const")):
        return None
    bracket = p.at("[")
    if bracket:
        p.take()
    p.take("const")
    t = p.tok
    if t.kind != "num":
        p.fail("expected a number")
    p.take()
    if bracket:
        p.take("]")
    return float(t.text)


def _names(p: _P, what: str):
    out = [p.name(what)]
    while p.tok.kind != "end":
        if p.at(","):
            p.take()
        out.append(p.name(what))
    return out


def parse_theory(src: str) -> Theory:
    dom_name = None
    consts, polarity, axioms, assumes, goals, hints, system = [], [], [], [], [], [], []
    for lineno, text in _logical_lines(src):
        head, rest = _directive(text, lineno)
        if head == "domain":
            key = rest.strip()
            if key not in _DOMAINS:
                opts = ", ".join(sorted(_DOMAINS))
                raise ParseError(f"unknown domain {key!r}, expected one of {opts} (line {lineno})")
            if dom_name is not None:
                raise ParseError(f"second domain header (line {lineno})")
            dom_name = key
        elif head == "world":
            p = _P(tokenize(rest, lineno))
            name = p.name("a world constant")
            w = _opt_weight(p)
            if w is not None:
                p.done()
                consts.append((name, w))
            else:
                consts.append((name, None))
                while p.tok.kind != "end":
                    if p.at(","):
                        p.take()
                    consts.append((p.name("a world constant"), None))
        elif head == "polarity":
            p = _P(tokenize(rest, lineno))
            pol = p.name("pos or neg")
            if pol not in ("pos", "neg"):
                raise ParseError(f"polarity is pos or neg, not {pol!r} (line {lineno})")
            for pred in _names(p, "a predicate"):
                polarity.append((pred, pol))
        elif head == "axiom":
            p = _P(tokenize(rest, lineno))
            name = f"ax{len(axioms) + 1}"
            if p.tok.kind == "name" and p.toks[p.i + 1].text == ":":
                name = p.take().text
                p.take(":")
            axioms.append((name, _line_judgement(p)))
        elif head == "assume":
            assumes.append(_line_judgement(_P(tokenize(rest, lineno))))
        elif head == "goal":
            goals.append(_line_judgement(_P(tokenize(rest, lineno))))
        elif head == "hint":
            p = _P(tokenize(rest, lineno))
            hints.append(_parse_hint(p))
            p.done()
        elif head == "system":
            p = _P(tokenize(rest, lineno))
            if p.at("="):
                p.take()
            system.extend(_names(p, "an axiom name"))
        else:
            raise ParseError(f"unknown directive {head!r} (line {lineno})")
    if dom_name is None:
        raise ParseError("missing domain header (write `domain temporal` or `domain rate`)")
    th = Theory(dom_name, tuple(consts), tuple(polarity), tuple(axioms),
                tuple(assumes), tuple(goals), tuple(hints), tuple(system))
    _check_theory(th)
    return th


def _parse_hint(p: _P):
    if p.at("term"):
        p.take()
        return p.term()
    return p.world(())


def _check_theory(th: Theory):
    names = {n for n, _ in th.axioms}
    for n in th.system:
        if n not in names:
            raise ParseError(f"system names an unknown axiom {n!r}")
    declared = {n for n, _ in th.consts}
    used = set()
    for j in [j for _, j in th.axioms] + list(th.assumes) + list(th.goals):
        used |= syntax.world_constants(j.prop)
        used |= worlds.constants(j.world)
    for w in th.hints:
        if isinstance(w, World):
            used |= worlds.constants(w)
    missing = sorted(used - declared)
    if missing:
        raise ParseError(f"undeclared world constants: {', '.join(missing)} (add a `world` line)")


def print_theory(th: Theory) -> str:
    """Inverse of parse_theory, up to comments and line grouping."""
    out = [f"domain {th.dom_name}"]
    for name, w in th.consts:
        out.append(f"world {name}" + (f" [const {w:g}]" if w is not None else ""))
    for pred, pol in th.polarity:
        out.append(f"polarity {pol} {pred}")
    for name, j in th.axioms:
        out.append(f"axiom {name} : {judgement_str(j)}")
    for j in th.assumes:
        out.append(f"assume {judgement_str(j)}")
    for j in th.goals:
        out.append(f"goal {judgement_str(j)}")
    for h in th.hints:
        if isinstance(h, World):
            out.append(f"hint {syntax.world_str(h)}")
        else:
            out.append(f"hint term {syntax.term_str(h)}")
    if th.system:
        out.append("system " + " ".join(th.system))
    return "\n".join(out) + "\n"


def parse_hints(src: str) -> tuple:
    """A hints file: one `hint` line per world or `hint term t` entry."""
    hints = []
    for lineno, text in _logical_lines(src):
        head, rest = _directive(text, lineno)
        if head != "hint":
            raise ParseError(f"hints files contain hint lines only (line {lineno})")
        p = _P(tokenize(rest, lineno))
        hints.append(_parse_hint(p))
        p.done()
    return tuple(hints)


def parse_sequent_arg(text: str):
    """A goal argument: `goal` or `hyp, hyp, ... => goal` (|- also works).

    Returns (delta | None, goal); the hypotheses replace a theory's assume
    lines when present.
    """
    toks = tokenize(text)
    split = next((i for i, t in enumerate(toks) if t.text in ("=>", "|-") and t.kind == "punct"), None)
    if split is None:
        return None, _arg_judgement(_P(toks))
    delta = []
    p = _P(toks[:split] + [toks[-1]])
    if p.tok.kind != "end":
        delta.append(_split_at(p.prop()))
        while p.at(","):
            p.take()
            delta.append(_split_at(p.prop()))
    p.done()
    return tuple(delta), _arg_judgement(_P(toks[split + 1 :]))


def _arg_judgement(p: _P) -> J:
    prop = p.prop()
    p.done()
    return _split_at(prop)


def _split_at(prop) -> J:
    if isinstance(prop, At):
        return J(prop.body, prop.world)
    raise ParseError(f"a judgement needs a world: write (P) @ w, got {syntax.prop_str(prop)!r}")


def load_theory(path) -> Theory:
    try:
        return parse_theory(Path(path).read_text())
    except ParseError as e:
        raise ParseError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# Process files


@dataclass(frozen=True)
class SpiFile:
    env: spi.SpiEnv
    proc: object  # None when the file only declares definitions
    start: World | None  # declared start world, if any


def parse_spi(src: str) -> SpiFile:
    defs, chan_rates, rate_consts = [], {}, {}
    proc = start = None
    for lineno, text in _logical_lines(src):
        head, rest = _directive(text, lineno)
        p = _P(tokenize(rest, lineno))
        if head == "rate":
            c = p.name("a channel")
            p.take("=")
            w = p.world(())
            weight = _opt_weight(p)
            p.done()
            if c in chan_rates:
                raise ParseError(f"channel {c!r} already has a rate (line {lineno})")
            chan_rates[c] = w
            if weight is not None:
                if len(w.atoms) != 1 or w.atoms[0][0] != worlds.CONST:
                    raise ParseError(f"an inline weight needs a single rate name (line {lineno})")
                rate_consts[w.atoms[0][1]] = weight
        elif head == "const":
            c = p.name("a rate constant")
            p.take("=")
            t = p.tok
            if t.kind != "num":
                p.fail("expected a number")
            p.take()
            p.done()
            rate_consts[c] = float(t.text)
        elif head == "def":
            name = p.name("a definition name")
            params = []
            if p.at("("):
                p.take()
                if not p.at(")"):
                    params.append(p.name("a parameter"))
                    while p.at(","):
                        p.take()
                        params.append(p.name("a parameter"))
                p.take(")")
            p.take("=")
            body = p.proc(())
            p.done()
            defs.append(spi.SpiDef(name, tuple(params), body))
        elif head == "run":
            if proc is not None:
                raise ParseError(f"second run line (line {lineno}); a file has one")
            proc = p.proc(())
            p.done()
        elif head == "start":
            start = p.world(())
            p.done()
        else:
            raise ParseError(f"unknown directive {head!r} (line {lineno})")
    try:
        env = spi.SpiEnv(defs, chan_rates, rate_consts)
    except spi.SpiError as e:
        raise ParseError(str(e)) from None
    return SpiFile(env, proc, start)


def load_spi(path) -> SpiFile:
    try:
        return parse_spi(Path(path).read_text())
    except ParseError as e:
        raise ParseError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# Process printer.  Parenthesisation mirrors the grammar above, so the
# output reparses to an equal process as long as no runtime-generated
# name contains '#'.

_PR_BIND, _PR_PAR, _PR_SUM, _PR_PRE = range(4)


def proc_str(p, level: int = _PR_BIND, bound=()) -> str:
    def wrap(lv, s):
        return f"({s})" if lv < level else s

    def nm(x):
        if isinstance(x, int):
            return bound[x] if x < len(bound) else f"${x}"
        return x

    def fresh(hint, node):
        return syntax._fresh_name(hint, spi.free_names(node) | set(bound))

    match p:
        case spi.Nil():
            return "0"
        case spi.Call(name, args):
            if not args:
                return name
            return f"{name}({', '.join(nm(a) for a in args)})"
        case spi.Par(l, r):
            return wrap(_PR_PAR, f"{proc_str(l, _PR_PAR, bound)} | {proc_str(r, _PR_SUM, bound)}")
        case spi.Sum(l, r):
            return wrap(_PR_SUM, f"{proc_str(l, _PR_SUM, bound)} + {proc_str(r, _PR_PRE, bound)}")
        case spi.Send(c, m, k):
            return wrap(_PR_PRE, f"{nm(c)}!({nm(m)}).{proc_str(k, _PR_PRE, bound)}")
        case spi.Recv(c, k, h):
            y = fresh(h, p)
            return wrap(_PR_PRE, f"{nm(c)}?({y}).{proc_str(k, _PR_PRE, (y,) + bound)}")
        case spi.Tau(r, k):
            return wrap(_PR_PRE, f"tau{{{syntax.world_str(r)}}}.{proc_str(k, _PR_PRE, bound)}")
        case spi.New(r, b, h):
            x = fresh(h, p)
            return wrap(_PR_BIND, f"new({syntax.world_str(r)}) {x} in {proc_str(b, _PR_BIND, (x,) + bound)}")
    raise TypeError(f"not a process: {p!r}")
