"""Command line front end.

Commands:

    hyll prove THEORY [GOAL]             prove a theory file's goals
    hyll check CERT                      re-check an emitted certificate
    hyll cutelim C1 C2 --formula J       splice two certificates across J
    hyll spi encode|steps|trace|simulate FILE

Every command prints a one-line machine-readable summary first
(``<command> key=value ...``), then a human report.  Wall-clock timing
goes to stderr, so stdout is byte-stable for a fixed seed.  Exit codes:
0 success, 1 goal not proved / certificate invalid, 2 error.

File arguments that do not name an existing path fall back to the
bundled corpus in hyll/theories (by basename; the extension may be
dropped), so ``hyll prove s5`` works from anywhere.
"""

from __future__ import annotations

import functools
import os
import random
import sys
import time
from importlib import resources
from pathlib import Path

import click

from . import focusing, kernel, metatheory, parser, sexp, spi, syntax, worlds
from .parser import ParseError, judgement_str, proc_str
from .syntax import world_str


# ---------------------------------------------------------------------------
# Report plumbing

_FAIL = (
    ParseError,
    sexp.SexpError,
    spi.SpiError,
    focusing.FocusError,
    metatheory.MetaError,
    kernel.CheckError,
    OSError,
    ValueError,
)


def _guard(f):
    @functools.wraps(f)
    def inner(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except BrokenPipeError:
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
            raise SystemExit(141)
        except _FAIL as e:
            click.echo(f"error: {e}", err=True)
            raise SystemExit(2)

    return inner


def _ok(s: str) -> str:
    return click.style(s, fg="green")


def _bad(s: str) -> str:
    return click.style(s, fg="red")


def _summary(command: str, **kv):
    parts = [command]
    for k, v in kv.items():
        parts.append(f"{k}={v}")
    click.echo(" ".join(parts))


def _compact(w: worlds.World) -> str:
    return world_str(w).replace(" ", "")


def _stopwatch():
    t0 = time.perf_counter()
    return lambda: click.echo(f"time: {time.perf_counter() - t0:.3f}s", err=True)


def _sequent_str(s: kernel.Sequent) -> str:
    g = ", ".join(judgement_str(j) for j in s.gamma) or "."
    d = ", ".join(judgement_str(j) for j in s.delta) or "."
    return f"{g} ; {d} => {judgement_str(s.goal)}"


def _fp_decides(fp) -> int:
    me = 1 if fp.rule in ("lf", "cplf", "rf") else 0
    return me + sum(_fp_decides(c) for c in fp.premises)


# ---------------------------------------------------------------------------
# File resolution.  Missing paths fall back to the bundled corpus.


def _resolve(path: str, ext: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.name.endswith(ext) else p.name + ext
    bundled = resources.files("hyll.theories") / name
    if bundled.is_file():
        return Path(str(bundled))
    raise ParseError(f"no such file: {path} (no bundled {name} either)")


def _load_spi_file(path: str) -> tuple:
    sf = parser.load_spi(_resolve(path, ".spi"))
    if sf.proc is None:
        raise ParseError(f"{path}: the file declares no process (no run line)")
    return sf, spi.state_of(sf.env, sf.proc), sf.start or worlds.RID


def _state_str(env, s) -> str:
    body = " | ".join(proc_str(t) for t in s.threads) or "0"
    if s.rates:
        local = ", ".join(f"{c} @ {world_str(r)}" for c, r in s.rates)
        body += f"   (local: {local})"
    return body


def _write_cert(emit: str, kp: kernel.Proof, dom_name: str):
    Path(emit).write_text(sexp.dump_proof(kp, dom_name))
    click.echo(f"wrote {emit}: kernel certificate, {kp.size()} nodes, re-checked")


# ---------------------------------------------------------------------------
# Entry


@click.group()
@click.pass_context
def main(ctx):
    """Hybrid linear logic: prove, check, and run process encodings.

    Set HYLL_COLOR=1 (or 0) to force colored output on (or off);
    unset, color follows whether stdout is a terminal.
    """
    v = os.environ.get("HYLL_COLOR", "").strip().lower()
    if v in ("0", "off", "never", "no", "false"):
        ctx.color = False
    elif v in ("1", "on", "always", "yes", "true"):
        ctx.color = True


@main.command()
@click.argument("theory")
@click.argument("goal", required=False)
@click.option("--budget", default=6, show_default=True, help="Decide-depth limit.")
@click.option("--seed", default=0, show_default=True, help="Recorded in the report; search is deterministic.")
@click.option("--emit", metavar="PATH", help="Write the first proved goal's kernel certificate here.")
@click.option("--format", "fmt", type=click.Choice(["text", "sexp"]), default="text", show_default=True)
@click.option("--hints", "hints_path", metavar="PATH", help="Extra hint lines (same syntax as in theory files).")
@_guard
def prove(theory, goal, budget, seed, emit, fmt, hints_path):
    """Prove GOAL (or the theory file's goal lines) from THEORY.

    GOAL is a judgement `(P) @ w`, or a full sequent
    `hyp, hyp => (P) @ w` whose hypotheses replace the theory's assume
    lines.  Exit 0 when every goal proves, 1 otherwise.
    """
    done = _stopwatch()
    th = parser.load_theory(_resolve(theory, ".hyll"))
    hints = th.hints
    if hints_path:
        hints += parser.parse_hints(Path(hints_path).read_text())
    if goal is not None:
        delta, gj = parser.parse_sequent_arg(goal)
        jobs = [th.sequent(goal=gj, delta=delta)]
    else:
        jobs = [th.sequent(goal=g) for g in th.goals]
        if not jobs:
            raise ParseError(f"{theory}: no goal lines and no goal argument")

    results = []
    total = focusing.SearchStats()
    for s in jobs:
        st = focusing.SearchStats()
        fp = focusing.prove(th.dom, s, budget=budget, table=th.table, hints=hints, stats=st)
        total.decides += st.decides
        results.append((s, fp, st))

    proved = sum(1 for _, fp, _ in results if fp is not None)
    in_proof = sum(_fp_decides(fp) for _, fp, _ in results if fp is not None)
    _summary(
        "prove",
        outcome="proved" if proved == len(results) else "not-found",
        goals=f"{proved}/{len(results)}",
        decides=total.decides,
        backtracks=total.decides - in_proof,
        budget=budget,
        seed=seed,
        cert=emit or "-",
    )
    for i, (s, fp, st) in enumerate(results, 1):
        click.echo(f"goal {i}: {judgement_str(s.goal)}")
        if fp is None:
            click.echo(f"  {_bad('no proof')} within budget {budget} ({st.decides} decides attempted)")
        else:
            d = _fp_decides(fp)
            click.echo(
                f"  {_ok('proved')} at budget {st.budget_used} of {budget}: "
                f"{st.decides} decides attempted, {d} in the proof, {st.decides - d} backtracked"
            )

    first = next((fp for _, fp, _ in results if fp is not None), None)
    if first is not None and (emit or fmt == "sexp"):
        kp = focusing.defocus(th.dom, first)
        kernel.check(th.dom, kp)
        if emit:
            _write_cert(emit, kp, th.dom_name)
        if fmt == "sexp":
            click.echo(sexp.dump_proof(kp, th.dom_name), nl=False)
    done()
    raise SystemExit(0 if proved == len(results) else 1)


@main.command()
@click.argument("cert", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "sexp"]), default="text", show_default=True)
@_guard
def check(cert, fmt):
    """Re-check an emitted certificate.  Exit 0 ok, 1 invalid."""
    done = _stopwatch()
    kind, dom_name, p = sexp.load_proof(Path(cert).read_text())
    if kind not in ("sequent", "nd"):
        raise ParseError(f"{cert}: unknown certificate kind {kind!r}")
    dom = worlds.domain_by_name(dom_name)
    try:
        kernel.check(dom, p, nd=(kind == "nd"))
    except kernel.CheckError as e:
        _summary("check", outcome="invalid", kind=kind, domain=dom_name, size=p.size())
        click.echo(f"{_bad('invalid')}: {e}")
        done()
        raise SystemExit(1)
    _summary("check", outcome="ok", kind=kind, domain=dom_name, size=p.size())
    click.echo(f"{_ok('ok')}: {_sequent_str(p.seq)}")
    if fmt == "sexp":
        click.echo(sexp.dump_proof(p, dom_name, kind), nl=False)
    done()


@main.command()
@click.argument("cert1", type=click.Path(exists=True, dir_okay=False))
@click.argument("cert2", type=click.Path(exists=True, dir_okay=False))
@click.option("--formula", required=True, metavar="'(A) @ w'", help="The judgement the two certificates meet on.")
@click.option("--emit", metavar="PATH", help="Write the combined certificate here.")
@click.option("--format", "fmt", type=click.Choice(["text", "sexp"]), default="text", show_default=True)
@_guard
def cutelim(cert1, cert2, formula, emit, fmt):
    """Combine CERT1 (proving A) with CERT2 (consuming A), cut-free.

    The result proves CERT2's sequent with one copy of A removed from
    its linear zone, and is checked before being written.
    """
    done = _stopwatch()
    k1, dn1, d = sexp.load_proof(Path(cert1).read_text())
    k2, dn2, e = sexp.load_proof(Path(cert2).read_text())
    if (k1, k2) != ("sequent", "sequent"):
        raise ParseError("cutelim wants two sequent-calculus certificates")
    if dn1 != dn2:
        raise ParseError(f"domain mismatch: {dn1} vs {dn2}")
    dom = worlds.domain_by_name(dn1)
    a = kernel.normalize_judgement(dom, parser.parse_judgement(formula))
    if d.seq.goal != a:
        raise ParseError(f"{cert1} proves {judgement_str(d.seq.goal)}, not {judgement_str(a)}")
    if a not in e.seq.delta:
        raise ParseError(f"{cert2} does not consume {judgement_str(a)}")
    q = metatheory.cut(dom, d, e, a)
    kernel.check(dom, q)
    _summary(
        "cutelim",
        outcome="ok",
        sizes=f"{d.size()}+{e.size()}->{q.size()}",
        cert=emit or "-",
    )
    click.echo(f"cut judgement: {judgement_str(a)}")
    click.echo(f"{_ok('ok')}: {_sequent_str(q.seq)}")
    if emit:
        _write_cert(emit, q, dn1)
    if fmt == "sexp":
        click.echo(sexp.dump_proof(q, dn1), nl=False)
    done()


# ---------------------------------------------------------------------------
# Process commands


@main.group()
def spi_group():
    """Stochastic pi-calculus: encode, step, trace, simulate."""


main.add_command(spi_group, name="spi")


@spi_group.command()
@click.argument("file")
@click.option("--format", "fmt", type=click.Choice(["text", "sexp"]), default="text", show_default=True)
@_guard
def encode(file, fmt):
    """Print the canonical sequent zones of the file's process."""
    sf, s0, start = _load_spi_file(file)
    gamma = spi.canonical_gamma(sf.env, s0)
    delta = spi.canonical_delta(sf.env, s0, start)
    _summary(
        "spi-encode",
        file=Path(file).name,
        domain=sf.env.dom.name,
        threads=len(s0.threads),
        start=_compact(start),
    )
    if fmt == "sexp":
        sx = [
            "encode",
            sf.env.dom.name,
            ["gamma", *map(sexp.j_to_sexp, gamma)],
            ["delta", *map(sexp.j_to_sexp, delta)],
        ]
        click.echo(sexp.show(sx))
        return
    click.echo("gamma:")
    for j in gamma:
        click.echo(f"  {judgement_str(j)}")
    click.echo("delta:")
    for j in delta:
        click.echo(f"  {judgement_str(j)}")


@spi_group.command()
@click.argument("file")
@_guard
def steps(file):
    """List the one-step interactions the oracle offers."""
    sf, s0, _ = _load_spi_file(file)
    moves = spi.step(sf.env, s0)
    _summary("spi-steps", file=Path(file).name, count=len(moves))
    click.echo(f"state: {_state_str(sf.env, s0)}")
    for i, (label, s2) in enumerate(moves, 1):
        click.echo(f"step {i}: {spi.label_str(label)} -> {_state_str(sf.env, s2)}")


@spi_group.command()
@click.argument("file")
@click.option("--budget", default=1, show_default=True, help="Maximum interactions per trace.")
@click.option("--emit", metavar="PATH", help="Write the first trace's kernel certificate here.")
@click.option("--format", "fmt", type=click.Choice(["text", "sexp"]), default="text", show_default=True)
@_guard
def trace(file, budget, emit, fmt):
    """Realize every oracle schedule of length <= budget as a proof.

    Each trace is printed with its decide stages and final lock world;
    the certificate is the defocused proof of the endpoint sequent.
    """
    done = _stopwatch()
    sf, s0, start = _load_spi_file(file)
    schedules = [labels for labels, _ in spi.traces(sf.env, s0, budget) if labels]
    _summary("spi-trace", file=Path(file).name, budget=budget, traces=len(schedules))
    for i, labels in enumerate(schedules, 1):
        fp, end, end_world = spi.trace_embed(sf.env, s0, start, labels)
        click.echo(f"trace {i}: {'; '.join(spi.label_str(l) for l in labels)}")
        click.echo(f"  lock world: {world_str(end_world)}")
        click.echo("  stages:")
        for stage, detail in spi.proof_stages(sf.env, fp):
            click.echo(f"    {stage}" + (f": {detail}" if detail else ""))
        click.echo(f"  end: {_state_str(sf.env, end)}")
        if i == 1 and (emit or fmt == "sexp"):
            kp = focusing.defocus(sf.env.dom, fp)
            kernel.check(sf.env.dom, kp)
            if emit:
                _write_cert(emit, kp, sf.env.dom.name)
            if fmt == "sexp":
                click.echo(sexp.dump_proof(kp, sf.env.dom.name), nl=False)
    done()


@spi_group.command()
@click.argument("file")
@click.option("--seed", default=0, show_default=True)
@click.option("--budget", default=10, show_default=True, help="Maximum interactions to perform.")
@_guard
def simulate(file, seed, budget):
    """Run a weighted race for up to --budget interactions."""
    sf, s0, start = _load_spi_file(file)
    rng = random.Random(seed)
    path = spi.simulate(sf.env, s0, budget, rng)
    lock = start
    lines = []
    for i, (label, s2) in enumerate(path, 1):
        lock = sf.env.dom.compose(lock, spi.label_world(label))
        lines.append(f"step {i}: {spi.label_str(label)}   lock: {world_str(lock)}")
    _summary(
        "spi-simulate",
        file=Path(file).name,
        seed=seed,
        budget=budget,
        performed=len(path),
        lock=_compact(lock),
    )
    for line in lines:
        click.echo(line)
    click.echo(f"end: {_state_str(sf.env, path[-1][1] if path else s0)}")


if __name__ == "__main__":
    main()
