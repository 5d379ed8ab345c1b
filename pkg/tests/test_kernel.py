import pytest

from hyll import kernel, syntax
from hyll.kernel import CheckError, J, Proof, check, checks, sequent
from hyll.syntax import At, Atom, Bang, Down, Lolli, One, Tensor, close_world
from hyll.worlds import RID, TEMPORAL, const, var

dom = TEMPORAL
r, t = const("r"), const("t")
p, q = Atom("p"), Atom("q")
jp, jq = J(p, r), J(q, r)


def test_init_checks():
    check(dom, Proof("init", sequent((), (jp,), jp)))


def test_init_rejects_extra_resources():
    bad = Proof("init", sequent((), (jp, jq), jp))
    with pytest.raises(CheckError):
        check(dom, bad)
    assert not checks(dom, bad)


def test_init_rejects_world_mismatch():
    with pytest.raises(CheckError):
        check(dom, Proof("init", sequent((), (J(p, t),), jp)))


def test_tensor_right_splits_context():
    goal = J(Tensor(p, q), r)
    pf = Proof(
        "tensR",
        sequent((), (jp, jq), goal),
        (Proof("init", sequent((), (jp,), jp)), Proof("init", sequent((), (jq,), jq))),
    )
    check(dom, pf)
    assert pf.size() == 3
    assert pf.rules_used() == {"tensR", "init"}


def test_tensor_right_rejects_bad_split():
    goal = J(Tensor(p, q), r)
    bad = Proof(
        "tensR",
        sequent((), (jp, jq), goal),
        (Proof("init", sequent((), (jp, jq), jp)), Proof("init", sequent((), (), jq))),
    )
    with pytest.raises(CheckError):
        check(dom, bad)


def test_lolli_right_then_init():
    goal = J(Lolli(p, p), r)
    pf = Proof("lolliR", sequent((), (), goal), (Proof("init", sequent((), (jp,), jp)),))
    check(dom, pf)


def test_copy_requires_persistent_assumption():
    g = (J(p, r),)
    pf = Proof(
        "copy",
        sequent(g, (), jp),
        (Proof("init", sequent(g, (jp,), jp)),),
        principal=J(p, r),
    )
    check(dom, pf)
    with pytest.raises(CheckError):
        check(dom, Proof("copy", sequent((), (), jp), (Proof("init", sequent((), (jp,), jp)),), principal=J(p, r)))


def test_at_rules_move_worlds():
    goal = J(At(p, r), t)
    pf = Proof("atR", sequent((), (jp,), goal), (Proof("init", sequent((), (jp,), jp)),))
    check(dom, pf)
    ja = J(At(p, r), t)
    pf2 = Proof(
        "atL",
        sequent((), (ja,), jp),
        (Proof("init", sequent((), (jp,), jp)),),
        principal=ja,
    )
    check(dom, pf2)


def test_down_binds_current_world():
    body = close_world(At(p, var("u")), "u")
    jd = J(Down(body), r)
    # dnR premise: body opened with the judgement world, at the same world
    pf = Proof(
        "dnR",
        sequent((), (jp,), jd),
        (Proof("atR", sequent((), (jp,), J(At(p, r), r)), (Proof("init", sequent((), (jp,), jp)),)),),
    )
    check(dom, pf)


def test_bang_right_needs_empty_delta():
    jb = J(Bang(p), r)
    ok = Proof(
        "bangR",
        sequent((J(p, r),), (), jb),
        (Proof("copy", sequent((J(p, r),), (), jp), (Proof("init", sequent((J(p, r),), (jp,), jp)),), principal=J(p, r)),),
    )
    check(dom, ok)
    with pytest.raises(CheckError):
        check(dom, Proof("bangR", sequent((), (jp,), jb), (Proof("init", sequent((), (jp,), jp)),)))


def test_unknown_rule_rejected():
    with pytest.raises(CheckError):
        check(dom, Proof("abracadabra", sequent((), (jp,), jp)))


def test_nd_flag_selects_rule_set():
    nd = Proof("hyp", sequent((), (jp,), jp))
    check(dom, nd, nd=True)
    with pytest.raises(CheckError):
        check(dom, nd)  # sequent checker does not know "hyp"


def test_normalize_judgement_orders_world_products():
    j = J(At(p, World_tr := dom.compose(t, r)), dom.compose(t, r))
    n = kernel.normalize_judgement(dom, j)
    assert n.world == dom.normalize(World_tr)
    assert n.prop == syntax.normalize_worlds(dom, j.prop)


def test_sequent_canonicalizes_gamma_order():
    s1 = sequent((jp, jq), (), jp)
    s2 = sequent((jq, jp), (), jp)
    assert s1.gamma == s2.gamma


def test_one_rules():
    j1 = J(One(), r)
    check(dom, Proof("oneR", sequent((), (), j1)))
    pf = Proof("oneL", sequent((), (j1,), J(One(), t)), (Proof("oneR", sequent((), (), J(One(), t))),), principal=j1)
    check(dom, pf)
