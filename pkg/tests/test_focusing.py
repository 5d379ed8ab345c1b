import pytest

from hyll import focusing, kernel, parser, syntax, worlds
from hyll.focusing import FocusError, SearchStats, defocus, prove
from hyll.kernel import J, check, sequent
from hyll.syntax import Atom, Neg, PolarityTable
from hyll.worlds import RID, TEMPORAL, const

dom = TEMPORAL


def seq(goal, delta="", gamma=""):
    pj = parser.parse_judgement
    return sequent(
        tuple(pj(x) for x in gamma.split(";") if x.strip()),
        tuple(pj(x) for x in delta.split(";") if x.strip()),
        pj(goal),
    )


PROVABLE = [
    seq("p @ r", delta="p @ r"),
    seq("(p -o p) @ r"),
    seq("(p * q) @ r", delta="q @ r; p @ r"),
    seq("(q * p) @ r", delta="(p * q) @ r"),
    seq("(p + q) @ r", delta="p @ r"),
    seq("(p & (p + q)) @ r", delta="p @ r"),
    seq("top @ r", delta="p @ r; q @ r"),
    seq("1 @ r"),
    seq("(p -o q -o p * q) @ r"),
    seq("((p @ r) * 1) @ t", delta="p @ r"),
    seq("(rho{t} p) @ r", delta="(p) @ (r * t)"),
    seq("(exists world u. p @ u) @ r", delta="p @ t"),
    seq("(forall x. s x -o s x) @ r"),
    seq("(s a) @ r", delta="(forall x. s x) @ r"),
    seq("(exists x. s x) @ r", delta="s a @ r"),
    seq("q @ r", delta="p @ r", gamma="(p -o q) @ r"),
    seq("(!(p -o q) -o p -o q) @ r"),
    seq("(down u. p @ u) @ r", delta="p @ r"),
    seq("(box p -o p) @ r"),
    seq("(p -o dia p) @ r"),
]

UNPROVABLE = [
    seq("0 @ r"),
    seq("p @ r"),
    seq("p @ r", delta="q @ r"),
    seq("p @ r", delta="p @ t"),
    seq("(p * p) @ r", delta="p @ r"),
    seq("1 @ r", delta="p @ r"),
    seq("(p & q) @ r", delta="p @ r"),
    seq("q @ r", gamma="(p -o q) @ r"),
]


@pytest.mark.parametrize("s", PROVABLE, ids=lambda s: parser.judgement_str(s.goal)[:40])
def test_provable_corpus(s):
    fp = prove(dom, s, budget=4)
    assert fp is not None
    check(dom, defocus(dom, fp))


@pytest.mark.parametrize("s", UNPROVABLE, ids=lambda s: parser.judgement_str(s.goal)[:40])
def test_unprovable_corpus(s):
    assert prove(dom, s, budget=4) is None


def test_stats_track_attempts_and_depth():
    st = SearchStats()
    fp = prove(dom, seq("(q * p) @ r", delta="(p * q) @ r"), budget=4, stats=st)
    assert fp is not None
    assert st.budget_used >= 1
    assert st.decides >= st.budget_used

    st2 = SearchStats()
    assert prove(dom, seq("0 @ r"), budget=4, stats=st2) is None
    assert st2.decides >= 1 and st2.budget_used == 0


def test_world_hints_unlock_rho_goals():
    s = seq("(exists world k. rho{k} p) @ id", delta="p @ (r * t)")
    hinted = prove(dom, s, budget=3, hints=(dom.compose(const("r"), const("t")),))
    assert hinted is not None
    check(dom, defocus(dom, hinted))


def test_term_hints_are_offered():
    s = seq("(exists x. s x) @ r", gamma="(forall x. s x) @ r")
    fp = prove(dom, s, budget=3, hints=(syntax.TVar("a"),))
    assert fp is not None


def test_all_proofs_enumerates_alternatives():
    s = seq("(p + (q + p)) @ r", delta="p @ r")
    fps = prove(dom, s, budget=3, all_proofs=True)
    assert len(fps) >= 2
    for fp in fps:
        check(dom, defocus(dom, fp))


def test_deterministic_proof_object():
    s = seq("(q * p) @ r", delta="(p * q) @ r")
    assert prove(dom, s, budget=4) == prove(dom, s, budget=4)


def test_polarity_table_changes_atom_behavior():
    tbl = PolarityTable(negatives=("q",))
    s = seq("q @ r", delta="q @ r")
    fp = prove(dom, s, budget=3, table=tbl)
    assert fp is not None
    check(dom, defocus(dom, fp))


def test_focused_entry_rejects_ill_polarized_input():
    fs = focusing.fneutral((J(Neg(Atom("p")), RID),), (), J(Neg(Atom("p")), RID))
    with pytest.raises(FocusError):
        focusing.search_fseq(dom, fs, 2)


def test_defocus_preserves_endsequent():
    s = seq("(q * p) @ r", delta="(p * q) @ r")
    fp = prove(dom, s, budget=4)
    kp = defocus(dom, fp)
    check(dom, kp)
    norm = kernel.normalize_judgement
    assert kp.seq.goal == norm(dom, s.goal)
    assert sorted(kp.seq.delta, key=kernel.jkey) == sorted(
        (norm(dom, j) for j in s.delta), key=kernel.jkey
    )


def test_iterative_deepening_finds_minimal_depth():
    st = SearchStats()
    prove(dom, seq("p @ r", delta="p @ r"), budget=6, stats=st)
    assert st.budget_used == 1
