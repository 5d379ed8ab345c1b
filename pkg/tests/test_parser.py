import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_prop
from hyll import parser, spi, syntax, worlds
from hyll.parser import (
    ParseError,
    judgement_str,
    parse_hints,
    parse_judgement,
    parse_proc,
    parse_prop,
    parse_sequent_arg,
    parse_spi,
    parse_term,
    parse_theory,
    parse_world,
    print_theory,
    proc_str,
)
from hyll.spi import Call, New, Nil, Par, Recv, Send, Sum, Tau
from hyll.syntax import At, Atom, TConst, TVar, Tensor, prop_str
from hyll.worlds import RATE, RID, TEMPORAL, const, var

dom = TEMPORAL


def _tvars_only(p):
    return syntax.map_prop(
        p,
        lambda t, td, wd: TVar(t.name) if isinstance(t, TConst) else t,
        lambda w, td, wd: w,
    )


@settings(max_examples=300)
@given(st.integers(0, 10**9))
def test_prop_parse_print_roundtrip(seed):
    rng = random.Random(seed)
    p = _tvars_only(rand_prop(rng, 5, dom))
    assert parse_prop(prop_str(p)) == p


@given(st.integers(0, 10**9))
def test_print_parse_print_fixpoint(seed):
    rng = random.Random(seed)
    p = rand_prop(rng, 5, dom)  # TConst leaves reparse as TVar; text is stable
    s = prop_str(p)
    assert prop_str(parse_prop(s)) == s


def test_world_syntax():
    assert parse_world("id") == RID
    assert parse_world("r") == const("r")
    assert parse_world("?u") == var("u")
    assert parse_world("r * t * r") == worlds.World(
        (("const", "r"), ("const", "t"), ("const", "r"))
    )


def test_term_syntax():
    assert parse_term("x") == TVar("x")
    assert parse_term("f(a, g(b))") == syntax.TApp("f", (TVar("a"), syntax.TApp("g", (TVar("b"),))))
    assert parse_term("{r * t}") == syntax.TWorld(TEMPORAL.compose(const("r"), const("t")))


def test_judgement_world_is_tight():
    j = parse_judgement("(p * q) @ (r * t)")
    assert j.world == worlds.World((("const", "r"), ("const", "t")))
    # without parens the product splits at the tensor level (left assoc)
    p = parse_prop("p * q @ r * t")
    assert p == Tensor(Tensor(Atom("p"), At(Atom("q"), const("r"))), Atom("t"))


def test_judgement_str_roundtrip():
    for text in ("p @ r", "(p -o q) @ (r * t)", "rho{t} p @ id"):
        assert judgement_str(parse_judgement(text)) == text


def test_double_bang_stays_distinct_from_bangbang():
    from hyll.syntax import Bang, mk_bangbang

    two = Bang(Bang(Atom("p")))
    assert prop_str(two) == "!(!p)"
    assert parse_prop(prop_str(two)) == two
    assert parse_prop(prop_str(mk_bangbang(Atom("p")))) == mk_bangbang(Atom("p"))
    assert parse_prop("!!p") == mk_bangbang(Atom("p"))


def test_binders_and_shadowing():
    p = parse_prop("forall x. s x -o exists x. s x")
    q = parse_prop("forall world u. (p @ u) -o down u. p @ u")
    assert prop_str(parse_prop(prop_str(p))) == prop_str(p)
    assert prop_str(parse_prop(prop_str(q))) == prop_str(q)


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError, match="line 2"):
        parse_prop("p *\n* q")
    with pytest.raises(ParseError):
        parse_prop("(p")
    with pytest.raises(ParseError):
        parse_prop("")


PROCS = [
    Nil(),
    Send("x", "a", Nil()),
    Recv("x", Nil()),
    Tau(const("q"), Nil()),
    Par(Send("x", "a", Nil()), Recv("x", Nil())),
    Sum(Send("x", "a", Nil()), Tau(const("q"), Recv("x", Nil()))),
    New(const("r"), Par(Send(0, "a", Nil()), Recv(0, Nil()))),
    Call("X", ("a", "b")),
    Par(New(const("r"), Send(0, "a", Nil())), Call("X", ())),
]


@pytest.mark.parametrize("p", PROCS, ids=proc_str)
def test_proc_parse_print_roundtrip(p):
    assert parse_proc(proc_str(p)) == p


def test_proc_surface_forms():
    assert parse_proc("0") == Nil()
    assert parse_proc("x!(a).0 | x?(y).0") == Par(Send("x", "a", Nil()), Recv("x", Nil()))
    got = parse_proc("new(r) x in x!(a).0")
    assert got == New(const("r"), Send(0, "a", Nil()))
    # new extends maximally: both sides of the parallel are in scope
    scoped = parse_proc("new(r) x in x!(a).0 | x?(y).0")
    assert scoped == New(const("r"), Par(Send(0, "a", Nil()), Recv(0, Nil())))
    assert parse_proc("tau{q}.X") == Tau(const("q"), Call("X", ()))


THEORY = """\
# a tiny reaction system
domain temporal
world r
world t [const 2.5]
polarity neg q
axiom step : !!(forall x. s x -o rho{r} q) @ id
assume (s a) @ id
goal (exists world k. rho{k} q) @ id
hint r
hint term a
system step
"""


def test_theory_parse_print_identity():
    th = parse_theory(THEORY)
    assert th.dom_name == "temporal"
    assert th.consts == (("r", None), ("t", 2.5))
    assert th.polarity == (("q", "neg"),)
    assert [n for n, _ in th.axioms] == ["step"]
    assert len(th.assumes) == 1 and len(th.goals) == 1
    assert th.system == ("step",)
    assert parse_theory(print_theory(th)) == th


def test_theory_table_and_sequent():
    th = parse_theory(THEORY)
    assert th.table.of("q") == "neg"
    s = th.sequent()
    assert len(s.gamma) == 1 and len(s.delta) == 1


def test_theory_errors():
    with pytest.raises(ParseError, match="domain"):
        parse_theory("")
    with pytest.raises(ParseError, match="domain"):
        parse_theory("world r\n")
    with pytest.raises(ParseError):
        parse_theory("domain euclidean\n")
    with pytest.raises(ParseError, match="undeclared"):
        parse_theory("domain temporal\ngoal (rho{z} p) @ id\n")
    with pytest.raises(ParseError, match="system"):
        parse_theory("domain temporal\nsystem ghost\n")


def test_hints_file():
    hs = parse_hints("hint r * t\nhint term f(a)\n")
    assert hs[0] == TEMPORAL.compose(const("r"), const("t"))
    assert hs[1] == syntax.TApp("f", (TVar("a"),))
    with pytest.raises(ParseError):
        parse_hints("goal p @ r\n")


def test_sequent_arg_forms():
    delta, goal = parse_sequent_arg("p @ r")
    assert delta is None and goal == parse_judgement("p @ r")
    delta, goal = parse_sequent_arg("p @ r, q @ t => (p * q) @ r")
    assert [judgement_str(j) for j in delta] == ["p @ r", "q @ t"]
    delta2, goal2 = parse_sequent_arg("|- p @ r")
    assert delta2 == () and goal2 == parse_judgement("p @ r")
    assert parse_sequent_arg("=> p @ r")[0] == ()
    with pytest.raises(ParseError, match="world"):
        parse_sequent_arg("p, q => r")


SPI = """\
rate x = r [const 1.5]
const s = 2
def X(m) = x!(m).0
run X(a) | x?(y).tau{s}.0
start w
"""


def test_spi_file():
    sf = parse_spi(SPI)
    assert sf.env.dom is RATE
    assert sf.env.chan_rates["x"] == const("r")
    assert sf.env.rate_consts == {"r": 1.5, "s": 2.0}
    assert set(sf.env.defs) == {"X"}
    assert sf.start == const("w")
    assert sf.proc == Par(Call("X", ("a",)), Recv("x", Tau(const("s"), Nil())))


def test_spi_file_errors():
    with pytest.raises(ParseError, match="run"):
        parse_spi("run 0\nrun 0\n")
    with pytest.raises(ParseError, match="single rate name"):
        parse_spi("rate x = r * t [const 2]\nrun 0\n")
    with pytest.raises(ParseError):
        parse_spi("def X = \nrun X\n")


def test_load_wraps_errors_with_path(tmp_path):
    f = tmp_path / "broken.hyll"
    f.write_text("domain temporal\ngoal oops\n")
    with pytest.raises(ParseError, match="broken.hyll"):
        parser.load_theory(f)
