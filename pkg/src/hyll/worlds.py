"""Monoidal constraint domains and the worlds built over them.

Worlds are finite products of symbolic atoms.  An atom is a constant
(declared in a theory header), a named variable (used in goal patterns and
as an eigenvariable during proof search), or a de Bruijn reference bound by
a world binder inside a proposition.  The unit world is written ``id``.

Three domains are provided:

* ``temporal`` - free commutative monoid, composition read as addition of
  delays;
* ``rate``     - free commutative monoid, composition read as multiplication
  of rates;
* ``rate-noncomm`` - free (non-commutative) monoid over rate atoms, for
  experiments where the order of rate events matters.

The two commutative domains are structurally identical; they are kept
distinct so theories can declare their intent and so printers can label
the unit accordingly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

CONST = "const"
VAR = "var"
BOUND = "bound"

# An atom is a (kind, payload) pair; payload is a name for const/var and an
# integer de Bruijn index for bound.
Atom = tuple


@dataclass(frozen=True)
class World:
    """A world expression: a tuple of atoms composed with the monoid product."""

    atoms: tuple = ()

    def __post_init__(self):
        for kind, payload in self.atoms:
            assert kind in (CONST, VAR, BOUND), f"bad world atom kind {kind!r}"
            if kind == BOUND:
                assert isinstance(payload, int) and payload >= 0
            else:
                assert isinstance(payload, str) and payload

    def is_unit(self) -> bool:
        return not self.atoms

    def is_ground(self) -> bool:
        """True when the world mentions only constants."""
        return all(kind == CONST for kind, _ in self.atoms)

    def __repr__(self) -> str:
        if not self.atoms:
            return "id"
        return " * ".join(_atom_str(a) for a in self.atoms)


def _atom_str(atom: Atom) -> str:
    kind, payload = atom
    if kind == CONST:
        return payload
    if kind == VAR:
        return f"?{payload}"
    return f"${payload}"


RID = World(())


def const(name: str) -> World:
    return World(((CONST, name),))


def var(name: str) -> World:
    return World(((VAR, name),))


def bound(index: int) -> World:
    return World(((BOUND, index),))


def _atom_key(atom: Atom):
    kind, payload = atom
    rank = {CONST: 0, VAR: 1, BOUND: 2}[kind]
    return (rank, str(payload))


@dataclass(frozen=True)
class Domain:
    """A monoidal constraint domain: a name plus a commutativity flag."""

    name: str
    commutative: bool

    def normalize(self, w: World) -> World:
        if self.commutative:
            return World(tuple(sorted(w.atoms, key=_atom_key)))
        return w

    def compose(self, *ws: World) -> World:
        atoms = tuple(a for w in ws for a in w.atoms)
        return self.normalize(World(atoms))

    def eq(self, u: World, v: World) -> bool:
        return self.normalize(u) == self.normalize(v)

    def reachable(self, u: World, w: World):
        """Return the witness v with u * v = w, or None when u is not below w.

        In a free commutative monoid the witness is unique (multiset
        difference); in the free monoid it is the suffix left after removing
        the prefix u.
        """
        if self.commutative:
            rest = list(self.normalize(w).atoms)
            for a in self.normalize(u).atoms:
                if a in rest:
                    rest.remove(a)
                else:
                    return None
            return World(tuple(rest))
        nu, nw = u.atoms, w.atoms
        if nw[: len(nu)] == nu:
            return World(nw[len(nu):])
        return None

    def subwords(self, w: World) -> list:
        """All worlds v such that v * v' = w for some v' (including id and w).

        Used as the enumeration universe for world witnesses during search.
        """
        w = self.normalize(w)
        if self.commutative:
            counts = {}
            for a in w.atoms:
                counts[a] = counts.get(a, 0) + 1
            keys = sorted(counts, key=_atom_key)
            out = []
            for picks in itertools.product(*(range(counts[k] + 1) for k in keys)):
                atoms = tuple(
                    a for k, n in zip(keys, picks) for a in itertools.repeat(k, n)
                )
                out.append(World(atoms))
            return sorted(set(out), key=lambda x: (len(x.atoms), repr(x)))
        n = len(w.atoms)
        slices = {w.atoms[i:j] for i in range(n + 1) for j in range(i, n + 1)}
        return sorted((World(s) for s in slices), key=lambda x: (len(x.atoms), repr(x)))

    def match(self, pattern: World, target: World) -> list:
        """Solve pattern = target for the single variable occurring in pattern.

        Returns a list of substitutions (variable name -> World).  The list
        is empty when there is no solution, and has one entry per solution.
        A pattern with no variable matches iff it equals the target.
        """
        vs = [a for a in pattern.atoms if a[0] == VAR]
        assert len({a[1] for a in vs}) <= 1, "pattern has more than one variable"
        assert len(vs) <= 1, "pattern variable occurs more than once"
        if not vs:
            return [{}] if self.eq(pattern, target) else []
        name = vs[0][1]
        if self.commutative:
            groundpart = World(tuple(a for a in pattern.atoms if a[0] != VAR))
            rest = self.reachable(groundpart, target)
            if rest is None:
                return []
            return [{name: rest}]
        i = pattern.atoms.index(vs[0])
        prefix, suffix = pattern.atoms[:i], pattern.atoms[i + 1:]
        t = target.atoms
        if len(prefix) + len(suffix) > len(t):
            return []
        if t[: len(prefix)] != prefix:
            return []
        if suffix and t[len(t) - len(suffix):] != suffix:
            return []
        mid = t[len(prefix): len(t) - len(suffix)]
        return [{name: World(mid)}]


TEMPORAL = Domain("temporal", True)
RATE = Domain("rate", True)
RATE_NONCOMM = Domain("rate-noncomm", False)

DOMAINS = {d.name: d for d in (TEMPORAL, RATE, RATE_NONCOMM)}


def domain_by_name(name: str) -> Domain:
    if name not in DOMAINS:
        raise ValueError(f"unknown constraint domain {name!r}")
    return DOMAINS[name]


# ---------------------------------------------------------------------------
# de Bruijn plumbing for world binders inside propositions.


def shift(w: World, by: int, cutoff: int = 0) -> World:
    """Shift bound references >= cutoff by `by`."""
    atoms = tuple(
        (BOUND, k + by) if kind == BOUND and k >= cutoff else (kind, k)
        for kind, k in w.atoms
    )
    return World(atoms)


def open_bound(w: World, depth: int, payload: World) -> World:
    """Replace bound reference `depth` with payload; renumber deeper refs.

    The payload must not itself contain bound references (witnesses and
    eigenvariables are always closed in that sense).
    """
    assert all(kind != BOUND for kind, _ in payload.atoms), "payload must be closed"
    out = []
    for kind, k in w.atoms:
        if kind == BOUND and k == depth:
            out.extend(payload.atoms)
        elif kind == BOUND and k > depth:
            out.append((BOUND, k - 1))
        else:
            out.append((kind, k))
    return World(tuple(out))


def close_var(w: World, name: str, depth: int) -> World:
    """Replace free variable `name` with bound reference `depth` (for binders)."""
    atoms = tuple(
        (BOUND, depth) if kind == VAR and payload == name else (kind, payload)
        for kind, payload in w.atoms
    )
    return World(atoms)


def subst_var(w: World, name: str, payload: World) -> World:
    out = []
    for kind, p in w.atoms:
        if kind == VAR and p == name:
            out.extend(payload.atoms)
        else:
            out.append((kind, p))
    return World(tuple(out))


def free_vars(w: World) -> set:
    return {p for kind, p in w.atoms if kind == VAR}


def max_bound(w: World) -> int:
    """Largest bound index in w, or -1 when none occur."""
    return max((p for kind, p in w.atoms if kind == BOUND), default=-1)


def constants(w: World) -> set:
    return {p for kind, p in w.atoms if kind == CONST}
