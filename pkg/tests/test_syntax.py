import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rand_prop
from hyll import syntax, worlds
from hyll.syntax import (
    ONE,
    TOP,
    At,
    Atom,
    Bang,
    Down,
    ExistsW,
    ForallW,
    Lolli,
    Neg,
    PolarityTable,
    Pos,
    TApp,
    TConst,
    TVar,
    Tensor,
    With,
    as_bangbang,
    as_box,
    as_dia,
    as_dia_global,
    as_rate,
    close_term,
    close_world,
    erase,
    mk_bangbang,
    mk_box,
    mk_dia,
    mk_dia_global,
    mk_rate,
    open_term,
    open_world,
    polarize,
    polarized_wf,
    prop_str,
)
from hyll.worlds import RID, TEMPORAL, const, var

r, t = const("r"), const("t")


def test_close_open_term_roundtrip():
    p = Tensor(Atom("s", (TVar("x"),)), At(Atom("p", (TApp("f", (TVar("x"),)),)), r))
    body = close_term(p, "x")
    assert "x" not in syntax.free_term_vars(body)
    assert open_term(body, TVar("x")) == p


def test_close_open_world_roundtrip():
    p = At(Atom("p"), TEMPORAL.compose(var("u"), r))
    body = close_world(p, "u")
    assert "u" not in syntax.free_world_vars(body)
    assert open_world(body, var("u")) == p


def test_nested_binders_shadow_correctly():
    inner = close_world(At(Atom("p"), var("u")), "u")
    outer = close_world(ForallW(inner), "u")
    assert outer == ForallW(close_world(At(Atom("p"), var("u")), "u"))
    assert open_world(outer, r) == ForallW(inner)


def test_modality_sugar_roundtrips():
    p = Atom("p")
    assert as_rate(mk_rate(r, p)) == (r, p)
    assert as_bangbang(mk_bangbang(p)) == p
    assert as_dia_global(mk_dia_global(p)) == p
    assert as_box(mk_box(p)) == p
    assert as_dia(mk_dia(p)) == p
    assert as_rate(mk_box(p)) is None
    assert as_box(mk_dia(p)) is None
    assert as_dia(mk_box(p)) is None


def test_mk_rate_rejects_open_worlds():
    with pytest.raises(AssertionError):
        mk_rate(worlds.bound(0), Atom("p"))


def test_prop_str_sugar_forms():
    assert prop_str(mk_rate(r, Atom("p"))) == "rho{r} p"
    assert prop_str(mk_bangbang(Atom("p"))) == "!!p"
    assert prop_str(mk_box(Atom("p"))) == "box p"
    assert prop_str(mk_dia(Atom("p"))) == "dia p"
    assert prop_str(mk_dia_global(Atom("p"))) == "exists world u. p @ u"


def test_prop_str_precedence():
    p, q = Atom("p"), Atom("q")
    assert prop_str(Tensor(p, Tensor(q, p))) == "p * (q * p)"
    assert prop_str(Tensor(Tensor(p, q), p)) == "p * q * p"
    assert prop_str(Lolli(Lolli(p, q), p)) == "(p -o q) -o p"
    assert prop_str(Lolli(p, Lolli(q, p))) == "p -o q -o p"
    assert prop_str(At(Tensor(p, q), TEMPORAL.compose(r, t))) == "(p * q) @ (r * t)"
    assert prop_str(Bang(Tensor(p, q))) == "!(p * q)"


def test_polarize_then_erase_is_identity():
    rng = random.Random(11)
    for _ in range(300):
        p = rand_prop(rng, 4, TEMPORAL)
        for sign in ("pos", "neg"):
            pol = polarize(p, sign)
            assert polarized_wf(pol, sign)
            assert erase(pol) == p


def test_polarize_rejects_explicit_shifts():
    with pytest.raises(ValueError):
        polarize(Pos(Atom("p")), "pos")


def test_polarity_table_flips_atoms():
    tbl = PolarityTable(negatives=("q",))
    assert syntax.polarity(Atom("p"), tbl) == "pos"
    assert syntax.polarity(Atom("q"), tbl) == "neg"
    assert syntax.polarity(Atom("rt"), tbl) == "neg"  # the rate predicate stays negative
    assert polarize(Atom("q"), "pos", tbl) == Pos(Atom("q"))
    assert polarize(Atom("q"), "neg", tbl) == Atom("q")


def test_closed_subterms_collects_leaf_candidates():
    p = Tensor(Atom("s", (TApp("f", (TConst("a"),)),)), Atom("q", (TVar("y"),)))
    subs = syntax.closed_subterms(p)
    assert TConst("a") in subs
    assert TVar("y") in subs
    assert all(isinstance(s, (TConst, TVar)) for s in subs)


def test_fresh_name_avoids_used():
    assert syntax._fresh_name("x", set()) == "x"
    assert syntax._fresh_name("x", {"x"}) == "x1"
    assert syntax._fresh_name("x", {"x", "x1"}) == "x2"


def test_normalize_worlds_orders_products():
    p = At(Atom("p"), World_tr := TEMPORAL.compose(t, r))
    assert syntax.normalize_worlds(TEMPORAL, p) == At(Atom("p"), TEMPORAL.normalize(World_tr))


@given(st.integers(0, 10**9))
def test_prop_str_is_deterministic_and_total(seed):
    rng = random.Random(seed)
    p = rand_prop(rng, 5, TEMPORAL)
    s1 = prop_str(p)
    s2 = prop_str(p)
    assert s1 == s2 and s1


def test_prop_worlds_and_atom_preds():
    p = Tensor(At(Atom("p"), r), mk_rate(t, Atom("q")))
    assert r in syntax.prop_worlds(p)
    assert syntax.atom_preds(p) == {"p", "q"}


def test_size_counts_connectives():
    assert syntax.size(Atom("p")) == 1
    assert syntax.size(Tensor(Atom("p"), ONE)) == 3
