"""A small decision procedure for propositional intuitionistic linear logic.

Works on world-free propositions (atoms and the multiplicative, additive,
and exponential connectives only).  Independent of the kernel and of the
focused engine: sequents here are plain tuples and the search is a direct
bounded backward chaining with full split enumeration.  Used to
cross-check that judgements at a single fixed world coincide with plain
linear provability.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from .syntax import Atom, Bang, Lolli, One, Plus, Tensor, Top, With, Zero

PURE = (Atom, Tensor, One, Lolli, With, Top, Plus, Zero, Bang)


def is_pure(p) -> bool:
    match p:
        case Atom():
            return True
        case Tensor(l, r) | Lolli(l, r) | With(l, r) | Plus(l, r):
            return is_pure(l) and is_pure(r)
        case One() | Top() | Zero():
            return True
        case Bang(b):
            return is_pure(b)
    return False


def _splits(delta):
    n = len(delta)
    seen = set()
    for k in range(n + 1):
        for idx in combinations(range(n), k):
            left = tuple(delta[i] for i in idx)
            rightidx = [i for i in range(n) if i not in idx]
            right = tuple(delta[i] for i in rightidx)
            if left in seen:
                continue
            seen.add(left)
            yield left, right


def _key(p):
    return repr(p)


def _norm(gamma, delta):
    return tuple(sorted(set(gamma), key=_key)), tuple(sorted(delta, key=_key))


def provable(gamma, delta, goal, depth: int = 8) -> bool:
    """Bounded provability for a two-zone linear sequent."""
    for p in (*gamma, *delta, goal):
        assert is_pure(p), f"not a pure proposition: {p!r}"

    @lru_cache(maxsize=None)
    def go(gamma, delta, goal, depth):
        if depth <= 0:
            return False
        d = depth - 1
        if isinstance(goal, Atom) and delta == (goal,):
            return True

        match goal:
            case Tensor(l, r):
                for dl, dr in _splits(delta):
                    if go(gamma, dl, l, d) and go(gamma, dr, r, d):
                        return True
            case One():
                if delta == ():
                    return True
            case Lolli(l, r):
                g2, d2 = _norm(gamma, delta + (l,))
                if go(g2, d2, r, d):
                    return True
            case With(l, r):
                if go(gamma, delta, l, d) and go(gamma, delta, r, d):
                    return True
            case Top():
                return True
            case Plus(l, r):
                if go(gamma, delta, l, d) or go(gamma, delta, r, d):
                    return True
            case Bang(b):
                if delta == () and go(gamma, (), b, d):
                    return True

        for i, a in enumerate(delta):
            rest = delta[:i] + delta[i + 1 :]
            match a:
                case Tensor(l, r):
                    g2, d2 = _norm(gamma, rest + (l, r))
                    if go(g2, d2, goal, d):
                        return True
                case One():
                    if go(*_norm(gamma, rest), goal, d):
                        return True
                case Lolli(l, r):
                    for dl, dr in _splits(rest):
                        g2, d2 = _norm(gamma, dr + (r,))
                        if go(gamma, dl, l, d) and go(g2, d2, goal, d):
                            return True
                case With(l, r):
                    for c in (l, r):
                        g2, d2 = _norm(gamma, rest + (c,))
                        if go(g2, d2, goal, d):
                            return True
                case Plus(l, r):
                    gl, dl = _norm(gamma, rest + (l,))
                    gr, dr = _norm(gamma, rest + (r,))
                    if go(gl, dl, goal, d) and go(gr, dr, goal, d):
                        return True
                case Zero():
                    return True
                case Bang(b):
                    g2, d2 = _norm(gamma + (b,), rest)
                    if go(g2, d2, goal, d):
                        return True

        for a in gamma:
            if go(*_norm(gamma, delta + (a,)), goal, d):
                return True
        return False

    g, dl = _norm(gamma, delta)
    return go(g, dl, goal, depth)
