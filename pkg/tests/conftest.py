"""Shared generators and the acceptance summary section."""

from hyll import worlds
from hyll.syntax import (
    ONE,
    TOP,
    ZERO,
    At,
    Atom,
    Bang,
    Down,
    ExistsT,
    ExistsW,
    ForallT,
    ForallW,
    Lolli,
    Plus,
    TConst,
    TVar,
    Tensor,
    With,
    close_term,
    close_world,
)


def rand_world(rng, dom, names=("r", "t")):
    opts = [worlds.RID] + [worlds.const(n) for n in names]
    return dom.compose(*(rng.choice(opts) for _ in range(rng.randint(1, 2))))


def rand_prop(rng, depth, dom, names=("r", "t")):
    """A random closed proposition of connective depth <= depth."""
    if depth <= 0:
        return rng.choice([Atom("p"), Atom("q", (TConst("a"),)), ONE, TOP, ZERO])
    d = depth - 1
    sub = lambda: rand_prop(rng, d, dom, names)
    k = rng.randrange(12)
    if k == 0:
        return Tensor(sub(), sub())
    if k == 1:
        return Lolli(sub(), sub())
    if k == 2:
        return With(sub(), sub())
    if k == 3:
        return Plus(sub(), sub())
    if k == 4:
        return Bang(sub())
    if k == 5:
        return ForallT(close_term(Tensor(Atom("s", (TVar("zz"),)), sub()), "zz"))
    if k == 6:
        return ExistsT(close_term(Atom("s", (TVar("zz"),)), "zz"))
    if k == 7:
        return At(sub(), rand_world(rng, dom, names))
    if k == 8:
        return Down(close_world(At(sub(), worlds.var("ww")), "ww"))
    if k == 9:
        return ForallW(
            close_world(At(Atom("p"), dom.compose(worlds.var("ww"), worlds.const(names[0]))), "ww")
        )
    if k == 10:
        return ExistsW(close_world(At(sub(), worlds.var("ww")), "ww"))
    return rng.choice([Atom("p"), ONE, TOP])


def rand_pure(rng, depth):
    """A random proposition in the world-free fragment shared with ill.py."""
    if depth <= 0:
        return rng.choice([Atom("p"), Atom("q"), ONE, TOP, ZERO])
    d = depth - 1
    sub = lambda: rand_pure(rng, d)
    k = rng.randrange(7)
    if k == 0:
        return Tensor(sub(), sub())
    if k == 1:
        return Lolli(sub(), sub())
    if k == 2:
        return With(sub(), sub())
    if k == 3:
        return Plus(sub(), sub())
    if k == 4:
        return Bang(sub())
    return rng.choice([Atom("p"), Atom("q"), ONE])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One outcome line per acceptance criterion at the end of the run."""
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                rows[nodeid.split("::")[-1]] = outcome.upper()
    if rows:
        terminalreporter.section("acceptance criteria")
        for name in sorted(rows):
            terminalreporter.write_line(f"{rows[name]:6s} {name}")
