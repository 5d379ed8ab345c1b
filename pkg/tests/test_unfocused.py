import pytest

from hyll import parser, unfocused
from hyll.kernel import check, sequent
from hyll.worlds import TEMPORAL

dom = TEMPORAL


def seq(goal, delta="", gamma=""):
    pj = parser.parse_judgement
    return sequent(
        tuple(pj(x) for x in gamma.split(";") if x.strip()),
        tuple(pj(x) for x in delta.split(";") if x.strip()),
        pj(goal),
    )


@pytest.mark.parametrize(
    "s",
    [
        seq("p @ r", delta="p @ r"),
        seq("(p -o p) @ r"),
        seq("(q * p) @ r", delta="(p * q) @ r"),
        seq("(p + q) @ r", delta="q @ r"),
        seq("top @ r", delta="p @ r"),
        seq("(rho{t} p) @ r", delta="(p) @ (r * t)"),
        seq("q @ r", delta="p @ r", gamma="(p -o q) @ r"),
        seq("(exists x. s x) @ r", delta="s a @ r"),
        seq("(down u. p @ u) @ r", delta="p @ r"),
    ],
    ids=str,
)
def test_proves_and_certifies(s):
    pf = unfocused.prove(dom, s, depth=6)
    assert pf is not None
    check(dom, pf)


@pytest.mark.parametrize(
    "s",
    [
        seq("0 @ r"),
        seq("p @ r", delta="q @ r"),
        seq("(p * p) @ r", delta="p @ r"),
        seq("p @ r", delta="p @ t"),
    ],
    ids=str,
)
def test_refuses(s):
    assert unfocused.prove(dom, s, depth=5) is None


def test_depth_bound_is_a_real_bound():
    s = seq("(q * p) @ r", delta="(p * q) @ r")
    assert unfocused.prove(dom, s, depth=1) is None
    assert unfocused.prove(dom, s, depth=6) is not None
