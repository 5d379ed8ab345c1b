import random

import pytest

from hyll import focusing, kernel, parser, spi, worlds
from hyll.parser import parse_proc, parse_spi, proc_str
from hyll.spi import (
    Call,
    New,
    Nil,
    Par,
    Recv,
    Send,
    SpiEnv,
    SpiError,
    Sum,
    Tau,
    canonical_gamma,
    canonical_delta,
    congruent,
    label_str,
    race_select,
    simulate,
    state_of,
    step,
    trace_budget,
    trace_embed,
    trace_extract,
    traces,
)
from hyll.worlds import RATE, RID, const

r, q = const("r"), const("q")


def env(src):
    return parse_spi(src)


FIG5 = "rate x = r\nstart s\nrun x!(a).0 | x?(y).0\n"


def test_single_synchronization():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    moves = step(sf.env, s0)
    assert len(moves) == 1
    label, s1 = moves[0]
    assert label == ("syn", "x", "a", r)
    assert label_str(label) == "x!(a){r}"
    assert s1.threads == ()


def test_tau_step_and_label():
    sf = env("rate x = r\nrun tau{q}.x!(a).0\n")
    s0 = state_of(sf.env, sf.proc)
    [(label, s1)] = step(sf.env, s0)
    assert label == ("tau", q)
    assert len(s1.threads) == 1


def test_choice_offers_both_branches():
    sf = env("rate x = r\nrate y = q\nrun x!(a).0 + y!(b).0 | x?(m).0 | y?(m).0\n")
    s0 = state_of(sf.env, sf.proc)
    labels = {label_str(l) for l, _ in step(sf.env, s0)}
    assert labels == {"x!(a){r}", "y!(b){q}"}
    # committing to one branch removes the other
    for l, s1 in step(sf.env, s0):
        assert len(step(sf.env, s1)) == 0


def test_new_extrudes_a_fresh_channel():
    sf = env("run new(r) z in z!(a).0 | z?(m).0\n")
    s0 = state_of(sf.env, sf.proc)
    assert len(s0.rates) == 1
    [(label, s1)] = step(sf.env, s0)
    assert label[0] == "syn" and label[3] == r
    assert s1.threads == ()


def test_definitions_unfold_on_demand():
    sf = env("rate x = r\ndef X() = x!(a).X()\nrun X() | x?(m).x?(k).0\n")
    s0 = state_of(sf.env, sf.proc)
    [(label, s1)] = step(sf.env, s0)
    assert label[:2] == ("syn", "x")
    # the recursive sender re-expands for the second receive
    [(label2, s2)] = step(sf.env, s1)
    assert label2[:2] == ("syn", "x")
    assert step(sf.env, s2) == []  # receiver exhausted; lone sender is stuck


def test_congruent_on_rearrangements():
    sf = env("rate x = r\nrate y = q\ndef X() = x!(a).0\nrun 0\n")
    e = sf.env
    a = state_of(e, parse_proc("x!(a).0 | y?(m).0"))
    b = state_of(e, parse_proc("y?(m).0 | x!(a).0"))
    assert congruent(e, a, b)
    c = state_of(e, Call("X", ()))
    d = state_of(e, parse_proc("x!(a).0"))
    assert congruent(e, c, d)
    assert not congruent(e, a, d)


def test_traces_enumerates_bounded_schedules():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    ts = traces(sf.env, s0, 2)
    assert ((), s0) in ts
    nonempty = [labels for labels, _ in ts if labels]
    assert nonempty == [(("syn", "x", "a", r),)]


def test_canonical_zones_shape():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    g = canonical_gamma(sf.env, s0)
    d = canonical_delta(sf.env, s0, const("s"))
    assert g[0].prop is spi.FORK
    assert any(j.prop == spi._rt("x") and j.world == r for j in g)
    assert d[0].prop is spi.ACT and d[0].world == const("s")
    assert len(d) == 3


def test_trace_budget_matches_embedding():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    labels = (("syn", "x", "a", r),)
    b = trace_budget(sf.env, s0, labels)
    fp, end, end_world = trace_embed(sf.env, s0, const("s"), labels)
    assert end_world == sf.env.dom.compose(const("s"), r)
    assert trace_extract(sf.env, fp, const("s")) == labels
    st = focusing.SearchStats()
    # the canonical proof of the schedule sits exactly at the predicted budget
    fps = spi.search_endpoint(sf.env, s0, const("s"), end, end_world, b, all_proofs=True, stats=st)
    assert any(trace_extract(sf.env, f, const("s")) == labels for f in fps)


def test_trace_embed_rejects_impossible_schedule():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    with pytest.raises(SpiError):
        trace_embed(sf.env, s0, const("s"), (("tau", q),))


def test_proof_stages_fig5_golden():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    fp, _, _ = trace_embed(sf.env, s0, const("s"), (("syn", "x", "a", r),))
    stages = spi.proof_stages(sf.env, fp)
    kinds = [k for k, _ in stages]
    assert kinds == ["fork", "syn", "unlock output", "unlock input", "rate", "close"]
    assert dict(stages)["syn"] == "x(a) rate r"


def test_proof_stages_tau_uses_match_for_survivors():
    sf = env("rate x = r\nrun tau{q}.0 | x!(a).0 | x?(y).0\n")
    s0 = state_of(sf.env, sf.proc)
    fp, _, _ = trace_embed(sf.env, s0, RID, (("tau", q),))
    kinds = [k for k, _ in spi.proof_stages(sf.env, fp)]
    assert kinds[0] == "fork" and kinds[1] == "tau"
    assert "unlock" in kinds
    assert kinds.count("match") == 2  # both surviving endpoint threads
    assert kinds[-1] == "close"
    assert "unlock output" not in kinds and "unlock input" not in kinds


def test_defocused_trace_certificates_check():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    fp, _, _ = trace_embed(sf.env, s0, const("s"), (("syn", "x", "a", r),))
    kp = focusing.defocus(sf.env.dom, fp)
    kernel.check(sf.env.dom, kp)


def test_race_select_is_weighted_and_seeded():
    sf = env("rate x = r [const 1]\nrate y = q [const 3]\nrun x!(a).0 | x?(m).0 | y!(b).0 | y?(m).0\n")
    s0 = state_of(sf.env, sf.proc)
    rng = random.Random(0)
    picks = [race_select(sf.env, s0, rng)[0][1] for _ in range(2000)]
    frac_y = picks.count("y") / len(picks)
    assert 0.70 <= frac_y <= 0.80
    assert race_select(sf.env, state_of(sf.env, Nil()), rng) is None


def test_simulate_stops_when_stuck():
    sf = env(FIG5)
    s0 = state_of(sf.env, sf.proc)
    path = simulate(sf.env, s0, 10, random.Random(1))
    assert len(path) == 1


def test_interderivable_matches_congruence():
    sf = env("rate x = r\ndef X() = x!(a).0\nrun 0\n")
    e = sf.env
    a = state_of(e, parse_proc("x!(a).0 | x?(m).0"))
    b = state_of(e, parse_proc("x?(m).0 | x!(a).0"))
    assert spi.interderivable(e, a, b)
    c = state_of(e, parse_proc("x!(a).0"))
    assert not spi.interderivable(e, a, c)


def test_encoding_is_invariant_under_congruence():
    sf = env("rate x = r\nrun 0\n")
    e = sf.env
    a = state_of(e, parse_proc("x!(a).0 | x?(m).0"))
    b = state_of(e, parse_proc("x?(m).0 | x!(a).0"))
    assert spi.state_prop(e, a) == spi.state_prop(e, b) or spi.interderivable(e, a, b)
