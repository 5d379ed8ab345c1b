import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rand_prop, rand_world
from hyll import metatheory as M, sexp
from hyll.kernel import J, Proof, sequent
from hyll.syntax import Atom, TApp, TConst, TVar, TWorld, Tensor
from hyll.worlds import TEMPORAL, const, var

dom = TEMPORAL


@given(st.integers(0, 10**9))
def test_world_roundtrip(seed):
    rng = random.Random(seed)
    w = rand_world(rng, dom)
    assert sexp.world_of_sexp(sexp.read(sexp.show(sexp.world_to_sexp(w)))) == w


def test_term_roundtrip():
    for t in (TConst("a"), TVar("x"), TApp("f", (TConst("a"), TVar("y"))), TWorld(const("r"))):
        assert sexp.term_of_sexp(sexp.read(sexp.show(sexp.term_to_sexp(t)))) == t


@given(st.integers(0, 10**9))
def test_prop_roundtrip(seed):
    rng = random.Random(seed)
    p = rand_prop(rng, 5, dom)
    assert sexp.prop_of_sexp(sexp.read(sexp.show(sexp.prop_to_sexp(p)))) == p


def test_judgement_and_sequent_roundtrip():
    j = J(Tensor(Atom("p"), Atom("q")), dom.compose(const("r"), var("u")))
    assert sexp.j_of_sexp(sexp.read(sexp.show(sexp.j_to_sexp(j)))) == j
    s = sequent((j,), (J(Atom("p"), const("r")),), j)
    assert sexp.sequent_of_sexp(sexp.read(sexp.show(sexp.sequent_to_sexp(s)))) == s


def test_proof_roundtrip_through_text():
    rng = random.Random(4)
    for _ in range(10):
        pf = M.identity_expand(dom, rand_prop(rng, 3, dom), const("r"))
        text = sexp.dump_proof(pf, dom.name)
        kind, dom_name, back = sexp.load_proof(text)
        assert (kind, dom_name) == ("sequent", "temporal")
        assert back == pf


def test_dump_proof_is_stable_text():
    pf = M.identity_expand(dom, Atom("p"), const("r"))
    assert sexp.dump_proof(pf, dom.name) == sexp.dump_proof(pf, dom.name)
    assert sexp.dump_proof(pf, dom.name).endswith("\n")


def test_malformed_inputs_raise():
    with pytest.raises(sexp.SexpError):
        sexp.read("(unbalanced")
    with pytest.raises(sexp.SexpError):
        sexp.load_proof("(not a cert)")
    with pytest.raises(sexp.SexpError):
        sexp.prop_of_sexp(["frobnicate"])


def test_witnesses_survive_roundtrip():
    pf = Proof(
        "existsR",
        sequent((), (), J(Atom("p"), const("r"))),
        (Proof("init", sequent((), (J(Atom("p"), const("r")),), J(Atom("p"), const("r")))),),
        witness=TConst("a"),
    )
    # the checker would reject this shape; serialization is structural
    text = sexp.dump_proof(pf, "temporal")
    _, _, back = sexp.load_proof(text)
    assert back.witness == TConst("a")
    wpf = Proof("existsR", pf.seq, pf.premises, witness=const("r"))
    _, _, back2 = sexp.load_proof(sexp.dump_proof(wpf, "temporal"))
    assert back2.witness == const("r")
