import pytest

from hyll import ill
from hyll.syntax import ONE, TOP, ZERO, At, Atom, Bang, Lolli, Plus, Tensor, With
from hyll.worlds import const

p, q = Atom("p"), Atom("q")


def test_is_pure():
    assert ill.is_pure(Tensor(Lolli(p, q), Bang(With(ONE, TOP))))
    assert not ill.is_pure(At(p, const("r")))


@pytest.mark.parametrize(
    "gamma, delta, goal",
    [
        ((), (p,), p),
        ((), (), Lolli(p, p)),
        ((), (p, q), Tensor(q, p)),
        ((), (Tensor(p, q),), Tensor(q, p)),
        ((), (p,), Plus(p, q)),
        ((), (With(p, q),), p),
        ((), (p, q), TOP),
        ((), (), ONE),
        ((), (ZERO,), q),
        ((p,), (), Bang(p)),
        ((), (Bang(p),), Bang(p)),
        ((p,), (p,), Tensor(p, p)),
        ((), (), Lolli(Bang(p), Tensor(p, p))),
    ],
)
def test_provable(gamma, delta, goal):
    assert ill.provable(gamma, delta, goal)


@pytest.mark.parametrize(
    "gamma, delta, goal",
    [
        ((), (), ZERO),
        ((), (), p),
        ((), (p,), q),
        ((), (p,), Tensor(p, p)),
        ((), (p, p), p),
        ((), (), Lolli(p, Tensor(p, p))),
        ((), (Plus(p, q),), p),
    ],
)
def test_unprovable(gamma, delta, goal):
    assert not ill.provable(gamma, delta, goal)


def test_rejects_hybrid_propositions():
    with pytest.raises(AssertionError):
        ill.provable((), (At(p, const("r")),), p)
