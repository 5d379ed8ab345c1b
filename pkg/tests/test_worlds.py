import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyll import worlds
from hyll.worlds import RATE, RATE_NONCOMM, RID, TEMPORAL, World, bound, const, var

ATOMS = st.sampled_from([const("r"), const("t"), const("s"), var("u"), RID])
WORLDS = st.builds(lambda parts: World(tuple(a for w in parts for a in w.atoms)), st.lists(ATOMS, max_size=4))
DOMS = st.sampled_from([TEMPORAL, RATE, RATE_NONCOMM])


@given(DOMS, WORLDS, WORLDS, WORLDS)
def test_compose_associative(dom, u, v, w):
    assert dom.compose(dom.compose(u, v), w) == dom.compose(u, dom.compose(v, w))


@given(DOMS, WORLDS)
def test_unit_laws(dom, w):
    assert dom.compose(w, RID) == dom.normalize(w)
    assert dom.compose(RID, w) == dom.normalize(w)


@given(WORLDS, WORLDS)
def test_commutative_domains_commute(u, v):
    assert TEMPORAL.compose(u, v) == TEMPORAL.compose(v, u)
    assert RATE.compose(u, v) == RATE.compose(v, u)


def test_noncommutative_keeps_order():
    r, t = const("r"), const("t")
    assert RATE_NONCOMM.compose(r, t) != RATE_NONCOMM.compose(t, r)
    assert RATE_NONCOMM.compose(r, t).atoms == (("const", "r"), ("const", "t"))


@given(DOMS, WORLDS)
def test_normalize_idempotent(dom, w):
    assert dom.normalize(dom.normalize(w)) == dom.normalize(w)


@given(DOMS, WORLDS, WORLDS)
def test_reachable_is_division(dom, u, v):
    w = dom.compose(u, v)
    rest = dom.reachable(u, w)
    assert rest is not None
    assert dom.eq(dom.compose(u, rest), w)


def test_reachable_none_when_not_below():
    assert TEMPORAL.reachable(const("r"), const("t")) is None
    assert RATE_NONCOMM.reachable(const("t"), RATE_NONCOMM.compose(const("r"), const("t"))) is None


def test_subwords_cover_divisors():
    w = TEMPORAL.compose(const("r"), const("r"), const("t"))
    subs = TEMPORAL.subwords(w)
    assert RID in subs and TEMPORAL.normalize(w) in subs
    assert len(subs) == 6  # r^{0..2} x t^{0..1}
    for v in subs:
        assert TEMPORAL.reachable(v, w) is not None


def test_subwords_noncomm_are_contiguous():
    w = World((("const", "r"), ("const", "t"), ("const", "s")))
    subs = RATE_NONCOMM.subwords(w)
    assert World((("const", "r"), ("const", "s"))) not in subs
    assert World((("const", "t"), ("const", "s"))) in subs


def test_match_single_variable():
    pat = TEMPORAL.compose(var("k"), const("r"))
    target = TEMPORAL.compose(const("r"), const("t"))
    ((sol,),) = [TEMPORAL.match(pat, target)]
    assert sol == {"k": const("t")}
    assert TEMPORAL.match(pat, const("t")) == []
    assert TEMPORAL.match(const("r"), const("r")) == [{}]
    assert TEMPORAL.match(const("r"), const("t")) == []


def test_match_noncomm_respects_position():
    r, t, s = const("r"), const("t"), const("s")
    pat = World((*r.atoms, *var("k").atoms, *s.atoms))
    target = World((*r.atoms, *t.atoms, *t.atoms, *s.atoms))
    [sol] = RATE_NONCOMM.match(pat, target)
    assert sol["k"].atoms == (*t.atoms, *t.atoms)
    assert RATE_NONCOMM.match(pat, World((*t.atoms, *s.atoms))) == []


def test_debruijn_open_close_roundtrip():
    rng = random.Random(0)
    for _ in range(200):
        w = World(tuple(a for v in (rng.choice([const("r"), var("x"), RID]) for _ in range(3)) for a in v.atoms))
        closed = worlds.close_var(w, "x", 0)
        assert worlds.max_bound(closed) <= 0
        assert worlds.open_bound(closed, 0, var("x")) == w


def test_open_bound_renumbers_deeper_refs():
    w = World(((worlds.BOUND, 0), (worlds.BOUND, 1)))
    out = worlds.open_bound(w, 0, const("r"))
    assert out == World((("const", "r"), (worlds.BOUND, 0)))


def test_shift_respects_cutoff():
    w = World(((worlds.BOUND, 0), (worlds.BOUND, 2)))
    assert worlds.shift(w, 3, cutoff=1) == World(((worlds.BOUND, 0), (worlds.BOUND, 5)))


def test_subst_and_free_vars():
    w = TEMPORAL.compose(var("k"), const("r"))
    assert worlds.free_vars(w) == {"k"}
    assert worlds.subst_var(w, "k", const("t")) == TEMPORAL.compose(const("t"), const("r"))
    assert worlds.constants(w) == {"r"}


def test_domain_by_name():
    assert worlds.domain_by_name("rate") is RATE
    with pytest.raises(ValueError):
        worlds.domain_by_name("euclidean")


def test_world_validation():
    with pytest.raises(AssertionError):
        World((("nope", "x"),))
    with pytest.raises(AssertionError):
        World(((worlds.BOUND, "x"),))
