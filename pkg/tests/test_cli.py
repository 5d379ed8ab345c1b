import subprocess
import sys

import pytest
from click.testing import CliRunner

from hyll.cli import main

run = CliRunner()


def invoke(*args, **kw):
    return run.invoke(main, list(args), **kw)


def test_prove_bundled_s5():
    res = invoke("prove", "s5")
    assert res.exit_code == 0
    first = res.output.splitlines()[0]
    assert first.startswith("prove outcome=proved goals=1/1")
    assert "decides=" in first and "backtracks=" in first


def test_prove_resolves_examples_style_paths():
    res = invoke("prove", "examples/s5.hyll", "--budget", "3")
    assert res.exit_code == 0


def test_prove_goal_argument_and_failure_exit():
    res = invoke("prove", "s5", "(0) @ w", "--budget", "3")
    assert res.exit_code == 1
    assert "outcome=not-found" in res.output.splitlines()[0]


def test_prove_sequent_argument():
    res = invoke("prove", "s5", "p @ w, q @ w => (q * p) @ w")
    assert res.exit_code == 0


def test_missing_file_is_an_error():
    res = invoke("prove", "no-such-theory")
    assert res.exit_code == 2


def test_bad_goal_syntax_is_an_error():
    res = invoke("prove", "s5", "p @")
    assert res.exit_code == 2


def test_emit_check_roundtrip_cross_process(tmp_path):
    cert = tmp_path / "s5.fsx"
    res = invoke("prove", "s5", "--emit", str(cert))
    assert res.exit_code == 0 and cert.exists()
    out = subprocess.run(
        [sys.executable, "-m", "hyll.cli", "check", str(cert)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.splitlines()[0].startswith("check outcome=ok")


def test_check_rejects_corrupt_certificate(tmp_path):
    cert = tmp_path / "cert.fsx"
    res = invoke("prove", "s5", "--emit", str(cert))
    assert res.exit_code == 0
    text = cert.read_text()
    cert.write_text(text.replace("forallR", "tensR", 1))
    res2 = invoke("check", str(cert))
    assert res2.exit_code == 1
    assert "outcome=invalid" in res2.output
    cert.write_text("(not a certificate)")
    assert invoke("check", str(cert)).exit_code == 2


def test_cutelim_combines_certificates(tmp_path):
    c1, c2, c3 = (tmp_path / n for n in ("d.fsx", "e.fsx", "cut.fsx"))
    assert invoke("prove", "s5", "p @ w, q @ w => (p * q) @ w", "--emit", str(c1)).exit_code == 0
    assert invoke("prove", "s5", "(p * q) @ w => (q * p) @ w", "--emit", str(c2)).exit_code == 0
    res = invoke("cutelim", str(c1), str(c2), "--formula", "(p * q) @ w", "--emit", str(c3))
    assert res.exit_code == 0, res.output
    assert invoke("check", str(c3)).exit_code == 0
    bad = invoke("cutelim", str(c1), str(c2), "--formula", "(q * p) @ w")
    assert bad.exit_code == 2


def test_spi_encode_lists_zones():
    res = invoke("spi", "encode", "fig5")
    assert res.exit_code == 0
    assert res.output.splitlines()[0].startswith("spi-encode file=fig5 domain=rate threads=2 start=s")
    assert "gamma:" in res.output and "delta:" in res.output
    assert "act @ s" in res.output


def test_spi_steps_lists_interactions():
    res = invoke("spi", "steps", "fig5")
    assert res.exit_code == 0
    assert "count=1" in res.output.splitlines()[0]
    assert "x!(a){r}" in res.output


def test_spi_trace_fig5_budget_1():
    res = invoke("spi", "trace", "fig5", "--budget", "1")
    assert res.exit_code == 0, res.output
    lines = res.output.splitlines()
    assert lines[0].startswith("spi-trace file=fig5 budget=1 traces=1")
    assert any("x!(a){r}" in l for l in lines)
    assert any("lock world: r * s" in l for l in lines)
    for stage in ("fork", "syn", "unlock output", "unlock input", "close"):
        assert any(stage in l for l in lines), stage


def test_spi_trace_emitted_certificate_rechecks(tmp_path):
    cert = tmp_path / "trace.fsx"
    res = invoke("spi", "trace", "fig5", "--budget", "1", "--emit", str(cert))
    assert res.exit_code == 0
    assert invoke("check", str(cert)).exit_code == 0


def test_spi_simulate_is_byte_stable():
    a = invoke("spi", "simulate", "fig5", "--seed", "5", "--budget", "4")
    b = invoke("spi", "simulate", "fig5", "--seed", "5", "--budget", "4")
    assert a.exit_code == 0
    assert a.output == b.output
    assert a.output.splitlines()[0].startswith("spi-simulate file=fig5 seed=5")


def test_color_env_forces_ansi():
    plain = invoke("prove", "s5", env={"HYLL_COLOR": "0"})
    forced = invoke("prove", "s5", env={"HYLL_COLOR": "1"}, color=True)
    assert "\x1b[" not in plain.output
    assert "\x1b[32m" in forced.output


@pytest.mark.parametrize("name", ["s5", "repressilator-temporal"])
def test_bundled_theories_prove(name):
    assert invoke("prove", name).exit_code == 0


def test_bundled_stochastic_repressilator_proves():
    res = invoke("prove", "repressilator-stochastic", "--budget", "8")
    assert res.exit_code == 0


def test_help_screens():
    for args in ([], ["prove"], ["spi"], ["spi", "trace"]):
        assert invoke(*args, "--help").exit_code == 0
