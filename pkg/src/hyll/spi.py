"""Synchronous stochastic pi-calculus over rate worlds.

Two independent views of the same calculus live here.  The operational
one (`normalize`, `step`, `traces`, `congruent`, `race_select`) is a
direct simulator used as the reference.  The logical one encodes
processes as polarized propositions: a stable thread is a derelictable
offer `dt -o <choices>`, communication is mediated by one unrestricted
interaction axiom that consumes the clock token `act` at the current
world and reissues it at the rated distance, and each definition
contributes an unfold/fold axiom.  A focused proof of

    defs, rates, fork ; act@u, threads@rid ==> (Q at rid) * act @ w

is then a rated schedule from the threads to Q whose delays compose to
the difference between u and w; `trace_extract` reads the schedule back
off the certificate and `trace_embed` finds a certificate realizing a
given schedule.

Channel and message names are plain strings; input and restriction
binders use de Bruijn indices inside process terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from . import focusing, syntax, worlds
from .kernel import J, NameSupply, sequent
from .syntax import (
    Atom, At, Bang, ExistsT, ForallT, ForallW, Lolli, Neg, Pos,
    Tensor, TConst, TVar, TWorld, With, ONE, PolarityTable,
)
from .worlds import RATE, RID, World


class SpiError(Exception):
    pass


# ---------------------------------------------------------------------------
# Process terms


@dataclass(frozen=True)
class Nil:
    def __repr__(self):
        return "0"


@dataclass(frozen=True)
class Par:
    left: object
    right: object

    def __repr__(self):
        return f"({self.left!r} | {self.right!r})"


@dataclass(frozen=True)
class Send:
    chan: object  # str, or int for a de Bruijn index
    msg: object
    cont: object

    def __repr__(self):
        return f"{_n(self.chan)}!({_n(self.msg)}).{self.cont!r}"


@dataclass(frozen=True)
class Recv:
    chan: object
    cont: object  # binds the received name at index 0
    hint: str = field(default="y", compare=False)

    def __repr__(self):
        return f"{_n(self.chan)}?({self.hint}).{self.cont!r}"


@dataclass(frozen=True)
class Tau:
    rate: World
    cont: object

    def __repr__(self):
        return f"tau{{{self.rate!r}}}.{self.cont!r}"


@dataclass(frozen=True)
class Sum:
    left: object
    right: object

    def __repr__(self):
        return f"({self.left!r} + {self.right!r})"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()

    def __repr__(self):
        if not self.args:
            return f"{self.name}()"
        return f"{self.name}({', '.join(_n(a) for a in self.args)})"


@dataclass(frozen=True)
class New:
    rate: World
    body: object  # binds the new channel at index 0
    hint: str = field(default="x", compare=False)

    def __repr__(self):
        return f"new{{{self.rate!r}}} {self.hint}. {self.body!r}"


def _n(x):
    return f"${x}" if isinstance(x, int) else str(x)


def _map_names(p, f, depth=0):
    """Rewrite every name position with f(name_or_index, binder_depth)."""
    match p:
        case Nil():
            return p
        case Par(l, r):
            return Par(_map_names(l, f, depth), _map_names(r, f, depth))
        case Sum(l, r):
            return Sum(_map_names(l, f, depth), _map_names(r, f, depth))
        case Send(c, m, k):
            return Send(f(c, depth), f(m, depth), _map_names(k, f, depth))
        case Recv(c, k, h):
            return Recv(f(c, depth), _map_names(k, f, depth + 1), h)
        case Tau(r, k):
            return Tau(r, _map_names(k, f, depth))
        case Call(name, args):
            return Call(name, tuple(f(a, depth) for a in args))
        case New(r, b, h):
            return New(r, _map_names(b, f, depth + 1), h)
    raise SpiError(f"not a process: {p!r}")


def open_name(p, name: str, k: int = 0):
    """Replace bound index k with a free name."""

    def f(x, depth):
        if isinstance(x, int) and x == k + depth:
            return name
        return x

    return _map_names(p, f)


def rename_free(p, mapping: dict):
    def f(x, depth):
        if isinstance(x, str):
            return mapping.get(x, x)
        return x

    return _map_names(p, f)


def free_names(p) -> set:
    out = set()

    def f(x, depth):
        if isinstance(x, str):
            out.add(x)
        return x

    _map_names(p, f)
    return out


def proc_size(p) -> int:
    match p:
        case Nil() | Call():
            return 1
        case Par(l, r) | Sum(l, r):
            return 1 + proc_size(l) + proc_size(r)
        case Send(_, _, k) | Recv(_, k, _) | Tau(_, k) | New(_, k, _):
            return 1 + proc_size(k)
    raise SpiError(f"not a process: {p!r}")


def _is_choice(p) -> bool:
    match p:
        case Send() | Recv() | Tau():
            return True
        case Sum(l, r):
            return _is_choice(l) and _is_choice(r)
    return False


def summands(m):
    if isinstance(m, Sum):
        return summands(m.left) + summands(m.right)
    return [m]


def _closed(p, depth=0) -> bool:
    ok = True

    def f(x, d):
        nonlocal ok
        if isinstance(x, int) and x >= d + depth:
            ok = False
        return x

    _map_names(p, f)
    return ok


# ---------------------------------------------------------------------------
# Environments and states


@dataclass(frozen=True)
class SpiDef:
    name: str
    params: tuple
    body: object


class SpiEnv:
    """Definitions, the channel rate table, and rate constants."""

    def __init__(self, defs=(), chan_rates=(), rate_consts=(), dom=RATE):
        self.defs = {d.name: d for d in defs}
        self.chan_rates = {c: dom.normalize(r) for c, r in dict(chan_rates).items()}
        self.rate_consts = dict(rate_consts)
        self.dom = dom
        self.validate()

    def validate(self):
        for name in self.defs:
            if name in syntax.RESERVED_PREDS:
                raise SpiError(f"process name {name!r} collides with a reserved predicate")
        for d in self.defs.values():
            if len(set(d.params)) != len(d.params):
                raise SpiError(f"{d.name}: duplicate parameters")
            if not _closed(d.body):
                raise SpiError(f"{d.name}: dangling binder index")
        for x, r in self.chan_rates.items():
            _check_rate(x, r)
        self._check_guarded()

    def _check_guarded(self):
        # every unfolding chain must bottom out in a guard
        def heads(p):
            match p:
                case Par(l, r):
                    return heads(l) | heads(r)
                case New(_, b, _):
                    return heads(b)
                case Call(name, _):
                    return {name}
            return set()

        edges = {n: heads(d.body) for n, d in self.defs.items()}
        for start in edges:
            seen, stack = set(), [start]
            while stack:
                n = stack.pop()
                for m in edges.get(n, ()):
                    if m == start:
                        raise SpiError(f"unguarded recursion through {start}")
                    if m not in seen:
                        seen.add(m)
                        stack.append(m)

    def rate_of(self, chan: str, local_rates=()) -> World:
        for c, r in local_rates:
            if c == chan:
                return r
        if chan in self.chan_rates:
            return self.chan_rates[chan]
        raise SpiError(f"no rate declared for channel {chan!r}")


def _check_rate(owner, r: World):
    # an identity rate would make the interaction invisible in the clock chain
    if r == RID or worlds.max_bound(r) >= 0 or worlds.free_vars(r):
        raise SpiError(f"{owner}: rate must be a proper closed world, got {r!r}")


@dataclass(frozen=True)
class State:
    """A flattened process: parallel threads plus locally extruded rates."""

    threads: tuple
    rates: tuple = ()  # ((chan, World), ...) for restriction-extruded channels

    def __repr__(self):
        body = " | ".join(repr(t) for t in self.threads) or "0"
        if not self.rates:
            return body
        rs = ", ".join(f"{c}:{r!r}" for c, r in self.rates)
        return f"{body}  [new {rs}]"


def _mk_state(threads, rates):
    return State(tuple(sorted(threads, key=repr)), tuple(sorted(rates, key=repr)))


def normalize(env: SpiEnv, p, rates=(), supply: NameSupply | None = None,
              avoid=frozenset()) -> State:
    """Flatten parallel composition, drop inert stops, extrude restrictions.

    Definitions are left folded."""
    supply = supply or NameSupply()
    rates = list(rates)
    avoid = set(avoid) | free_names(p) | set(env.chan_rates) | {c for c, _ in rates} | set(env.defs)
    threads = []

    def walk(q):
        match q:
            case Nil():
                return
            case Par(l, r):
                walk(l)
                walk(r)
                return
            case New(r, body, hint):
                _check_rate(f"new {hint}", r)
                c = supply.fresh(hint, avoid)
                avoid.add(c)
                rates.append((c, env.dom.normalize(r)))
                walk(open_name(body, c))
                return
            case Call():
                threads.append(q)
                return
            case _ if _is_choice(q):
                threads.append(q)
                return
        raise SpiError(f"not a well-formed process: {q!r}")

    walk(p)
    return _mk_state(threads, rates)


def state_of(env: SpiEnv, p) -> State:
    return normalize(env, p)


def _state_names(s: State) -> set:
    out = {c for c, _ in s.rates}
    for t in s.threads:
        out |= free_names(t)
    return out


def saturate(env: SpiEnv, s: State, max_rounds: int = 64) -> State:
    """Unfold every top-level definition call until only choices remain."""
    return _saturate_n(env, s, max_rounds)[0]


def _saturate_n(env: SpiEnv, s: State, max_rounds: int = 64):
    """Saturation plus the number of unfoldings performed."""
    cur, n = s, 0
    for _ in range(max_rounds):
        calls = [t for t in cur.threads if isinstance(t, Call)]
        if not calls:
            return cur, n
        rest = [t for t in cur.threads if not isinstance(t, Call)]
        grown = _mk_state(rest, cur.rates)
        for c in calls:
            unf = _unfold(env, c, grown.rates, _state_names(grown))
            grown = _mk_state(grown.threads + unf.threads, unf.rates)
            n += 1
        cur = grown
    raise SpiError("definition unfolding did not converge")


def _unfold(env: SpiEnv, call: Call, rates, avoid) -> State:
    d = env.defs.get(call.name)
    if d is None:
        raise SpiError(f"undefined process {call.name!r}")
    if len(d.params) != len(call.args):
        raise SpiError(f"{call.name}: arity mismatch")
    body = rename_free(d.body, dict(zip(d.params, call.args)))
    return normalize(env, body, rates, avoid=avoid)


# labels: ("tau", rate) or ("syn", chan, msg, rate)


def label_world(label) -> World:
    return label[-1]


def label_str(label) -> str:
    if label[0] == "tau":
        return f"tau{{{label[1]!r}}}"
    return f"{label[1]}!({label[2]}){{{label[3]!r}}}"


def step(env: SpiEnv, s: State):
    """All single interactions, as (label, next_state) pairs."""
    sat = saturate(env, s)
    threads, rates = sat.threads, sat.rates
    names = _state_names(sat)
    out = []
    for i, t in enumerate(threads):
        rest = threads[:i] + threads[i + 1 :]
        for g in summands(t):
            if isinstance(g, Tau):
                _check_rate("tau", g.rate)
                nxt = normalize(env, g.cont, rates, avoid=names)
                label = ("tau", env.dom.normalize(g.rate))
                out.append((label, _mk_state(rest + nxt.threads, nxt.rates)))
    for i, ti in enumerate(threads):
        for j, tj in enumerate(threads):
            if i == j:
                continue
            rest = tuple(t for k, t in enumerate(threads) if k not in (i, j))
            for gi in summands(ti):
                if not isinstance(gi, Send):
                    continue
                for gj in summands(tj):
                    if not (isinstance(gj, Recv) and gj.chan == gi.chan):
                        continue
                    rate = env.rate_of(gi.chan, rates)
                    cont = Par(gi.cont, open_name(gj.cont, gi.msg))
                    nxt = normalize(env, cont, rates, avoid=names)
                    label = ("syn", gi.chan, gi.msg, rate)
                    out.append((label, _mk_state(rest + nxt.threads, nxt.rates)))
    return out


def traces(env: SpiEnv, s: State, kmax: int):
    """Every rated schedule of at most kmax interactions, with its endpoint."""
    out = [((), s)]
    frontier = [((), s)]
    for _ in range(kmax):
        nxt = []
        for labels, st in frontier:
            for label, st2 in step(env, st):
                nxt.append((labels + (label,), st2))
        out.extend(nxt)
        frontier = nxt
    return out


def trace_world(env: SpiEnv, start: World, labels) -> World:
    return env.dom.compose(start, *(label_world(l) for l in labels))


# ---------------------------------------------------------------------------
# Structural congruence, with at most one unfolding round per side


def congruent(env: SpiEnv, s1: State, s2: State, max_fresh: int = 3) -> bool:
    for a in (s1, saturate(env, s1)):
        for b in (s2, saturate(env, s2)):
            if _match_states(a, b, max_fresh):
                return True
    return False


def _match_states(a: State, b: State, max_fresh: int) -> bool:
    if a == b:
        return True
    la = [c for c, _ in a.rates]
    lb = [c for c, _ in b.rates]
    if len(la) != len(lb) or not la or len(la) > max_fresh:
        return False
    # extruded names are arbitrary; try every alignment
    for perm in permutations(lb):
        mapping = dict(zip(perm, la))
        rb = [(mapping.get(c, c), r) for c, r in b.rates]
        tb = [rename_free(t, mapping) for t in b.threads]
        if _mk_state(tb, rb) == a:
            return True
    return False


# ---------------------------------------------------------------------------
# Races


def rate_weight(env: SpiEnv, w: World) -> float:
    out = 1.0
    for kind, payload in w.atoms:
        if kind == worlds.CONST:
            out *= env.rate_consts.get(payload, 1.0)
    return out


def race_select(env: SpiEnv, s: State, rng):
    """One enabled interaction, drawn with probability proportional to its
    rate constant; None when the state is stuck."""
    moves = step(env, s)
    if not moves:
        return None
    weights = [rate_weight(env, label_world(l)) for l, _ in moves]
    return rng.choices(moves, weights=weights, k=1)[0]


def simulate(env: SpiEnv, s: State, steps: int, rng):
    path = []
    for _ in range(steps):
        picked = race_select(env, s, rng)
        if picked is None:
            break
        path.append(picked)
        s = picked[1]
    return path


# ---------------------------------------------------------------------------
# Encoding into the logic


DT = Atom("dt")
ACT = Atom("act")

SPI_POLARITY = PolarityTable()


def _t(name) -> TVar:
    if isinstance(name, int):
        raise SpiError("cannot encode a dangling binder index")
    return TVar(name)


def _rt(name) -> Atom:
    return Atom("rt", (_t(name),))


def _tensor_all(ps):
    ps = list(ps)
    if not ps:
        return ONE
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = Tensor(p, out)
    return out


def enc_proc(env: SpiEnv, p, supply: NameSupply | None = None):
    """The positive proposition standing for a process."""
    supply = supply or NameSupply()
    match p:
        case Nil():
            return ONE
        case Par(l, r):
            return Tensor(enc_proc(env, l, supply), enc_proc(env, r, supply))
        case Call(name, args):
            return Atom(name, tuple(_t(a) for a in args))
        case New(r, body, hint):
            c = supply.fresh(hint, free_names(body))
            inner = Tensor(Bang(At(_rt(c), env.dom.normalize(r))),
                           enc_proc(env, open_name(body, c), supply))
            return ExistsT(syntax.close_term(inner, c), hint=hint)
        case _ if _is_choice(p):
            return Pos(Lolli(DT, enc_sum(env, p, supply)))
    raise SpiError(f"cannot encode: {p!r}")


def enc_sum(env: SpiEnv, m, supply: NameSupply | None = None):
    """The negative proposition standing for a guarded choice."""
    supply = supply or NameSupply()
    match m:
        case Sum(l, r):
            return With(enc_sum(env, l, supply), enc_sum(env, r, supply))
        case Send(x, msg, cont):
            return Neg(Tensor(Atom("out", (_t(x), _t(msg))), enc_proc(env, cont, supply)))
        case Recv(x, cont, hint):
            n = supply.fresh(hint, free_names(cont) | ({x} if isinstance(x, str) else set()))
            body = Neg(Tensor(Atom("in", (_t(x), _t(n))),
                              enc_proc(env, open_name(cont, n), supply)))
            return ForallT(syntax.close_term(body, n), hint=hint)
        case Tau(r, cont):
            return Neg(Tensor(Atom("tau", (TWorld(env.dom.normalize(r)),)),
                              enc_proc(env, cont, supply)))
    raise SpiError(f"not a guarded choice: {m!r}")


def can_thread(env: SpiEnv, t):
    """The stable-zone proposition for one running thread."""
    if isinstance(t, Call):
        return enc_proc(env, t)
    return Lolli(DT, enc_sum(env, t))


def enc_def(env: SpiEnv, name: str, fold: bool = True):
    """Unfold axiom for one definition, closed over its parameters; with
    `fold` the converse direction is adjoined, giving the bi-implication.

    Thread judgements all live at the reference world, so the axiom is
    stated there rather than under a world quantifier."""
    d = env.defs[name]
    head = Atom(name, tuple(_t(p) for p in d.params))
    body = enc_proc(env, d.body)
    ax = Lolli(head, Neg(body))
    if fold:
        ax = With(ax, Lolli(body, Neg(head)))
    for p in reversed(d.params):
        ax = ForallT(syntax.close_term(ax, p), hint=p)
    return ax


def _build_fork():
    # one clock token at the current world buys either a delay or a
    # synchronisation, each reissuing the token at the rated distance
    r = worlds.var("r")
    x, m = TVar("x"), TVar("m")
    int_coll = ForallW(
        syntax.close_world(
            Lolli(At(Atom("tau", (TWorld(r),)), RID), syntax.mk_rate(r, Neg(ACT))),
            "r"),
        hint="r",
    )
    int_branch = Tensor(At(DT, RID), Pos(int_coll))
    pair = Tensor(Atom("out", (x, m)), Atom("in", (x, m)))
    inner = Lolli(At(pair, RID),
                  Lolli(Pos(At(Atom("rt", (x,)), r)), syntax.mk_rate(r, Neg(ACT))))
    syn_coll = ForallT(
        syntax.close_term(
            ForallW(
                syntax.close_world(ForallT(syntax.close_term(inner, "m"), hint="m"), "r"),
                hint="r"),
            "x"),
        hint="x",
    )
    syn_branch = Tensor(At(Tensor(DT, DT), RID), Pos(syn_coll))
    return syntax.mk_bangbang(Lolli(ACT, With(Neg(int_branch), Neg(syn_branch))))


FORK = _build_fork()


def canonical_gamma(env: SpiEnv, s: State, fold: bool = False):
    g = [J(FORK, RID)]
    for name in sorted(env.defs):
        g.append(J(enc_def(env, name, fold), RID))
    for c, r in sorted(env.chan_rates.items()):
        g.append(J(_rt(c), r))
    for c, r in s.rates:
        g.append(J(_rt(c), r))
    return tuple(g)


def canonical_delta(env: SpiEnv, s: State, act_world: World):
    d = [J(ACT, env.dom.normalize(act_world))]
    for t in s.threads:
        d.append(J(can_thread(env, t), RID))
    return tuple(d)


def state_prop(env: SpiEnv, s: State, skip=frozenset()):
    """The process proposition of a state, with local channels outside
    `skip` re-bound existentially."""
    rebind = [(c, r) for c, r in s.rates if c not in skip]
    parts = [Bang(At(_rt(c), r)) for c, r in rebind]
    parts += [enc_proc(env, t) for t in s.threads]
    body = _tensor_all(parts)
    for c, _ in reversed(rebind):
        body = ExistsT(syntax.close_term(body, c), hint="x")
    return body


def endpoint_goal(env: SpiEnv, start: State, end: State, end_world: World) -> J:
    """(Q at rid) * act @ w, with freshly extruded channels re-bound."""
    base = frozenset(c for c, _ in start.rates)
    body = state_prop(env, end, skip=base)
    return J(Tensor(At(body, RID), ACT), env.dom.normalize(end_world))


def canonical_sequent(env: SpiEnv, start: State, act_world: World,
                      end: State, end_world: World, fold: bool = False):
    return sequent(
        canonical_gamma(env, start, fold),
        canonical_delta(env, start, act_world),
        endpoint_goal(env, start, end, end_world),
    )


def match_depth(p) -> int:
    """Decide depth of matching a suspended process against its encoding
    in the endpoint goal: each guard costs a focus on the offer and a
    focus on the released guts."""
    match p:
        case Nil() | Call():
            return 0
        case Par(l, r) | Sum(l, r):
            return max(match_depth(l), match_depth(r))
        case New(_, b, _):
            return max(1, match_depth(b))
        case Send(_, _, k) | Recv(_, k, _) | Tau(_, k):
            return 2 + match_depth(k)
    raise SpiError(f"not a process: {p!r}")


def trace_budget(env: SpiEnv, start: State, labels) -> int:
    """Exact decide budget of the canonical proof realizing a schedule:
    each unfolding and each interaction phase is one focus deep, plus the
    final goal match."""

    def go(st, rest):
        if not rest:
            return 1 + max((match_depth(t) for t in st.threads), default=0)
        sat, unfolds = _saturate_n(env, st)
        cost = 3 if rest[0][0] == "tau" else 4
        best = None
        for l2, s2 in step(env, st):
            if _label_eq(env, l2, rest[0]):
                try:
                    sub = go(s2, rest[1:])
                except SpiError:
                    continue
                best = sub if best is None else max(best, sub)
        if best is None:
            raise SpiError(f"schedule does not run at {label_str(rest[0])}")
        return unfolds + cost + best

    return go(start, tuple(labels))


def search_endpoint(env: SpiEnv, start: State, act_world: World, end: State,
                    end_world: World, budget: int, all_proofs: bool = False,
                    fold: bool = False, deepen: bool | None = None,
                    stats: focusing.SearchStats | None = None):
    """Focused search for schedules from start to end."""
    s = canonical_sequent(env, start, act_world, end, end_world, fold)
    fs = focusing.fneutral(
        (_normal_j(env, j) for j in s.gamma),
        (_normal_j(env, j) for j in s.delta),
        _normal_j(env, s.goal),
    )
    if deepen is None:
        deepen = not all_proofs
    return focusing.search_fseq(env.dom, fs, budget, SPI_POLARITY,
                                all_proofs=all_proofs, deepen=deepen, stats=stats)


def _normal_j(env: SpiEnv, j: J) -> J:
    return J(syntax.normalize_worlds(env.dom, j.prop), env.dom.normalize(j.world))


# ---------------------------------------------------------------------------
# Reading schedules off certificates


def _forall_witnesses(node):
    """Witness list along a left-focus spine of forallL steps."""
    out = []
    cur = node
    while cur.premises:
        if cur.rule == "forallL":
            out.append(cur.witness)
        if cur.rule in ("lf", "cplf", "forallL", "withL1", "withL2", "dnLF", "atLF"):
            cur = cur.premises[0]
        else:
            break
    return out


def _is_int_collector(p) -> bool:
    match p:
        case ForallW(body=Lolli(ante=At(body=Atom(pred="tau")))):
            return True
    return False


def _is_syn_collector(p) -> bool:
    match p:
        case ForallT(body=ForallW(body=ForallT(body=Lolli(
                ante=At(body=Tensor(left=Atom(pred="out"), right=Atom(pred="in"))))))):
            return True
    return False


def _name(t) -> str:
    match t:
        case TVar(n) | TConst(n):
            return n
    raise SpiError(f"not a name term: {t!r}")


def trace_extract(env: SpiEnv, fp: focusing.FProof, start_world: World):
    """Recover the schedule from a certificate of a canonical sequent.

    Each interaction leaves one collector discharge in the proof, stamped
    with the world of the clock token it consumed; chaining them from the
    start world recovers the order."""
    events = {}

    def record(w, label):
        old = events.get(w)
        if old is not None and old != label:
            raise SpiError(f"conflicting interactions at world {w!r}")
        events[w] = label

    def visit(node):
        if node.rule == "lf":
            a = node.principal
            if _is_int_collector(a.prop):
                (r,) = _forall_witnesses(node)
                record(a.world, ("tau", env.dom.normalize(r)))
            elif _is_syn_collector(a.prop):
                x, r, m = _forall_witnesses(node)
                record(a.world, ("syn", _name(x), _name(m), env.dom.normalize(r)))
        for q in node.premises:
            visit(q)

    visit(fp)
    labels = []
    w = env.dom.normalize(start_world)
    while w in events:
        label = events.pop(w)
        labels.append(label)
        w = env.dom.compose(w, label_world(label))
    if events:
        raise SpiError(f"interactions outside the clock chain: {events}")
    return tuple(labels)


def proof_traces(env: SpiEnv, start: State, act_world: World, end: State,
                 end_world: World, budget: int):
    """The set of schedules realized by focused proofs of this endpoint."""
    fps = search_endpoint(env, start, act_world, end, end_world, budget, all_proofs=True)
    return {trace_extract(env, fp, act_world) for fp in fps}


def proof_stages(env: SpiEnv, fp: focusing.FProof):
    """Classify the decide steps of a trace certificate.

    Returns (stage, detail) pairs in presentation order: the fork decide,
    each interaction selection with its witnesses, the dt unlocks of the
    threads taking part, rate-fact lookups, definition unfolds, and the
    closing right focus."""
    fork = _normal_j(env, J(FORK, RID))
    rank = {"fork": 0, "tau": 1, "syn": 1, "unlock output": 2, "unlock input": 3,
            "unlock": 3, "rate": 4, "unfold": 5, "match": 6, "close": 7}
    out = []

    def classify(n):
        pj, pr = n.principal, n.principal.prop if n.principal else None
        if n.rule == "rf":
            return "close", ""
        if n.rule == "cplf":
            if pj == fork:
                return "fork", ""
            if isinstance(pr, Atom) and pr.pred == "rt":
                return "rate", f"{syntax.prop_str(pr)} @ {syntax.world_str(pj.world)}"
            return "unfold", syntax.prop_str(syntax.erase(pr))
        if _is_int_collector(pr):
            (r,) = _forall_witnesses(n)[:1] or (None,)
            return "tau", f"rate {syntax.world_str(r)}" if r is not None else ""
        if _is_syn_collector(pr):
            ws = _forall_witnesses(n)
            if len(ws) == 3:
                x, r, m = ws
                return "syn", f"{_name(x)}({_name(m)}) rate {syntax.world_str(r)}"
            return "syn", ""
        if isinstance(pr, Lolli) and pr.ante == DT:
            guards = syntax.atom_preds(pr.succ) & {"out", "in", "tau"}
            if guards == {"out"}:
                return "unlock output", ""
            if guards == {"in"}:
                return "unlock input", ""
            return "unlock", syntax.prop_str(syntax.erase(pr.succ))
        return "unfold", syntax.prop_str(syntax.erase(pr))

    def walk(n, matching):
        if n.rule in ("lf", "cplf", "rf"):
            if matching:
                # decides below the goal's right focus re-derive the
                # surviving threads; they are bookkeeping, not steps
                if n.rule != "rf":
                    pj = n.principal
                    out.append(("match", syntax.prop_str(syntax.erase(pj.prop)) if pj else ""))
            else:
                out.append(classify(n))
                matching = matching or n.rule == "rf"
        for c in n.premises:
            walk(c, matching)

    walk(fp, False)
    out.sort(key=lambda sd: rank.get(sd[0], 9))
    return out


def _label_eq(env: SpiEnv, l1, l2) -> bool:
    if l1[0] != l2[0] or len(l1) != len(l2):
        return False
    if l1[0] == "tau":
        return env.dom.eq(l1[1], l2[1])
    return l1[1] == l2[1] and l1[2] == l2[2] and env.dom.eq(l1[3], l2[3])


def run_schedule(env: SpiEnv, start: State, labels):
    """All endpoints the oracle reaches by following the given labels."""
    frontier = [start]
    for label in labels:
        nxt = []
        for st in frontier:
            for l2, s2 in step(env, st):
                if _label_eq(env, l2, label):
                    nxt.append(s2)
        if not nxt:
            raise SpiError(f"schedule does not run at {label_str(label)}")
        frontier = nxt
    return frontier


def trace_embed(env: SpiEnv, start: State, act_world: World, labels,
                budget: int | None = None):
    """A certificate realizing one oracle schedule, with its endpoint.

    Searched by enumerating proofs of the schedule's endpoint and keeping
    one whose extracted schedule matches."""
    labels = tuple(labels)
    if budget is None:
        budget = trace_budget(env, start, labels)
    end_world = trace_world(env, act_world, labels)
    for end in run_schedule(env, start, labels):
        for fp in search_endpoint(env, start, act_world, end, end_world, budget,
                                  all_proofs=True):
            if trace_extract(env, fp, act_world) == labels:
                return fp, end, end_world
    raise SpiError("no certificate realizes the schedule")


# ---------------------------------------------------------------------------
# Congruence as interderivability


def congr_proves(env: SpiEnv, s1: State, s2: State, budget: int = 4):
    """A focused proof of  defs ; <s1> ==> <s2> @ rid, if one exists.

    No clock is involved: this is pure structural rearrangement plus
    definition unfold/fold."""
    gamma = tuple(_normal_j(env, J(enc_def(env, n, fold=True), RID))
                  for n in sorted(env.defs))
    fs = focusing.FSeq(
        "active",
        focusing._gsorted(gamma),
        (),
        omega=(_normal_j(env, J(state_prop(env, s1), RID)),),
        rr=_normal_j(env, J(Neg(state_prop(env, s2)), RID)),
    )
    return focusing.search_fseq(env.dom, fs, budget, SPI_POLARITY)


def interderivable(env: SpiEnv, s1: State, s2: State, budget: int = 4) -> bool:
    """Both directions of the congruence sequents prove within budget."""
    return (congr_proves(env, s1, s2, budget) is not None
            and congr_proves(env, s2, s1, budget) is not None)
