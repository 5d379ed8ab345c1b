import random

import pytest

from conftest import rand_prop
from hyll import kernel, metatheory as M, worlds
from hyll.kernel import J, Proof, check, sequent
from hyll.syntax import Atom, Tensor, With
from hyll.worlds import RATE, RID, TEMPORAL, const

dom = TEMPORAL
w = dom.compose(const("r"), const("t"))


def test_identity_expand_random_props_check():
    rng = random.Random(7)
    for _ in range(60):
        a = rand_prop(rng, 4, dom)
        pf = M.identity_expand(dom, a, w)
        check(dom, pf)
        assert pf.seq.goal.prop == kernel.normalize_judgement(dom, J(a, w)).prop


def test_identity_expand_keeps_gamma():
    g = (J(Atom("h"), RID),)
    pf = M.identity_expand(dom, Tensor(Atom("p"), Atom("q")), w, gamma=g)
    check(dom, pf)
    assert pf.seq.gamma == g


def test_derive_s5_checks_in_both_domains():
    for d in (TEMPORAL, RATE):
        pf = M.derive_s5(d, Atom("p"), const("r"))
        check(d, pf)
        pf2 = M.derive_s5(d, Tensor(Atom("p"), Atom("q")), RID)
        check(d, pf2)


def test_nd_translation_roundtrip():
    rng = random.Random(3)
    for _ in range(15):
        pf = M.identity_expand(dom, rand_prop(rng, 3, dom), w)
        nd = M.seq_to_nd(dom, pf)
        check(dom, nd, nd=True)
        back = M.nd_to_seq(dom, nd)
        check(dom, back)
        clean = M.eliminate_cut(dom, back)
        check(dom, clean)
        assert kernel.is_cut_free(clean)
        assert clean.seq == pf.seq


def _swap_consumer(a_left, a_right, world):
    """A checked proof consuming Tensor(a_left, a_right) into the swap."""
    jl, jr = J(a_left, world), J(a_right, world)
    jin = J(Tensor(a_left, a_right), world)
    jout = J(Tensor(a_right, a_left), world)
    return Proof(
        "tensL",
        sequent((), (jin,), jout),
        (
            Proof(
                "tensR",
                sequent((), (jl, jr), jout),
                (
                    M.identity_expand(dom, a_right, world),
                    M.identity_expand(dom, a_left, world),
                ),
            ),
        ),
        principal=jin,
    )


def test_cut_on_assembled_instance():
    p, q = Atom("p"), Atom("q")
    jp, jq = J(p, w), J(q, w)
    d = Proof(
        "tensR",
        sequent((), (jp, jq), J(Tensor(p, q), w)),
        (Proof("init", sequent((), (jp,), jp)), Proof("init", sequent((), (jq,), jq))),
    )
    e = _swap_consumer(p, q, w)
    check(dom, d)
    check(dom, e)
    res = M.cut(dom, d, e, J(Tensor(p, q), w))
    check(dom, res)
    assert kernel.is_cut_free(res)
    assert res.seq.goal == J(Tensor(q, p), w)
    assert sorted(res.seq.delta, key=kernel.jkey) == sorted((jp, jq), key=kernel.jkey)


def test_eliminate_cut_on_embedded_cut_node():
    p, q = Atom("p"), Atom("q")
    jp, jq = J(p, w), J(q, w)
    jpq = J(Tensor(p, q), w)
    d = Proof(
        "tensR",
        sequent((), (jp, jq), jpq),
        (Proof("init", sequent((), (jp,), jp)), Proof("init", sequent((), (jq,), jq))),
    )
    e = _swap_consumer(p, q, w)
    node = Proof("cut", sequent((), (jp, jq), J(Tensor(q, p), w)), (d, e), principal=jpq)
    check(dom, node)  # the kernel accepts explicit cuts
    clean = M.eliminate_cut(dom, node)
    check(dom, clean)
    assert kernel.is_cut_free(clean)
    assert clean.seq == node.seq


def test_cut_with_identity_consumer_is_general():
    rng = random.Random(21)
    for _ in range(20):
        a = rand_prop(rng, 3, dom)
        d = M.identity_expand(dom, a, w)
        e = M.identity_expand(dom, a, w)
        res = M.cut(dom, d, e, d.seq.goal)
        check(dom, res)
        assert kernel.is_cut_free(res)
        assert res.seq.goal == d.seq.goal


def test_cut_fuel_raises_instead_of_looping():
    p = Atom("p")
    jp = J(p, w)
    d = Proof("init", sequent((), (jp,), jp))
    with pytest.raises(M.MetaError):
        M.cut(dom, d, d, jp, fuel=0)


def test_invert_left_tensor():
    p, q = Atom("p"), Atom("q")
    jpq = J(Tensor(p, q), w)
    e = _swap_consumer(p, q, w)
    inv = M.invert_left(dom, e, jpq)
    check(dom, inv)
    assert sorted(inv.seq.delta, key=kernel.jkey) == sorted((J(p, w), J(q, w)), key=kernel.jkey)


def test_relocalise_identity_proofs():
    rng = random.Random(5)
    for _ in range(10):
        pf = M.identity_expand(dom, rand_prop(rng, 3, dom), w)
        out = M.relocalise(dom, pf, const("v"))
        check(dom, out)


def test_with_projection_cut():
    p, q = Atom("p"), Atom("q")
    jw = J(With(p, q), w)
    d = M.identity_expand(dom, With(p, q), w)
    e = Proof(
        "withL1",
        sequent((), (jw,), J(p, w)),
        (Proof("init", sequent((), (J(p, w),), J(p, w))),),
        principal=jw,
    )
    check(dom, e)
    res = M.cut(dom, d, e, jw)
    check(dom, res)
    assert kernel.is_cut_free(res)
    assert res.seq.goal == J(p, w)
