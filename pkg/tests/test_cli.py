import json

from dworkcrystal import cli
from dworkcrystal.report import Report


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fixtures_listing(capsys):
    code, out, _ = run(capsys, "fixtures")
    assert code == 0 and "legendre" in out.split()


def test_verify_all_on_legendre(capsys):
    code, out, _ = run(capsys, "verify", "legendre")
    assert code == 0
    assert "beta-congruence" in out and "fail" not in out


def test_hasse_witt_shows_face_layout(capsys):
    code, out, _ = run(capsys, "hasse-witt", "example7")
    assert code == 0
    lines = [l for l in out.splitlines() if "|" in l]
    assert len(lines) == 5
    assert lines[-1].rstrip().endswith("codim 0")
    assert "codim 1" in lines[3] and "codim 2" in lines[0]


def test_beta_and_matrices(capsys):
    code, out, _ = run(capsys, "beta", "example7", "--m", "5", "--precision", "3")
    assert code == 0 and "1 + 12*t" in out
    assert run(capsys, "lambda", "legendre")[0] == 0
    assert run(capsys, "connection", "legendre")[0] == 0
    assert run(capsys, "connection", "segment")[0] == 2


def test_json_report_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "verify", "segment", "--json", str(a))[0] == 0
    assert run(capsys, "verify", "segment", "--json", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["outcome"] == "ok"
    assert doc["problem"]["prime"] == "3"  # integers travel as decimal strings


def test_json_on_stdout_stays_parseable(capsys):
    code, out, err = run(capsys, "verify", "segment", "--json", "-")
    assert code == 0
    assert json.loads(out)["command"] == "verify"
    assert "beta-congruence" in err


def test_malformed_spec_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("prime = [\n")
    code, _, err = run(capsys, "verify", str(bad))
    assert code == 2 and "cannot parse" in err
    bad.write_text('prime = 3\nterms = [{ exponents = [0], coeff = "x" }]\n')
    code, _, err = run(capsys, "verify", str(bad))
    assert code == 2 and "terms/0/coeff" in err


def test_unknown_verifier_exits_2(capsys):
    assert run(capsys, "verify", "segment", "nonsense")[0] == 2


def test_violation_exits_1(monkeypatch, capsys):
    def broken(*args, **kwargs):
        r = Report("trace-congruence", 3, 1)
        r.fail(reason="injected")
        return r

    monkeypatch.setattr(cli.zeta, "verify_trace_congruence", broken)
    code, out, _ = run(capsys, "verify", "segment", "trace")
    assert code == 1 and "fail" in out


def test_named_verifiers_and_seed(capsys):
    code, out, _ = run(capsys, "verify", "hypercube", "katz", "bhs", "--seed", "7")
    assert code == 0
    assert "katz-congruences" in out and "bhs-congruence" in out


def test_expand_count_trace_fgl(capsys):
    code, out, _ = run(capsys, "expand", "segment", "--degree", "4")
    assert code == 0 and "[4]: 1" in out
    code, out, _ = run(capsys, "count", "segment", "--s", "2")
    assert code == 0 and "torus 1" in out
    assert run(capsys, "trace", "hypercube")[0] == 0
    code, out, _ = run(capsys, "fgl", "one-vertex", "--degree", "5")
    assert code == 0 and "fgl-integrality" in out


def test_legendre_command(capsys):
    code, out, _ = run(capsys, "legendre", "--z0", "3", "--prime", "5")
    assert code == 0 and "legendre-unit-root" in out
    # supersingular: the unit root does not exist, reported as skipped
    code, out, _ = run(capsys, "legendre", "--z0", "2", "--prime", "3")
    assert code == 0 and "skipped" in out


def test_show_round_trips(capsys):
    code, out, _ = run(capsys, "show", "legendre")
    assert code == 0 and out.startswith('name = "legendre"')


def test_bad_arguments_exit_2(capsys):
    assert run(capsys, "beta", "legendre")[0] == 2
