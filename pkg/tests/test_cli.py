import json
import subprocess
import sys

import numpy as np
import pytest

from pureconn import cli
from pureconn.config import RunConfig, load_config, parse_config_text
from pureconn.errors import ConfigError


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, [json.loads(line) for line in out.splitlines()], err


def test_decompose_sphere(capsys):
    code, recs, _ = run(["decompose", "--model", "sphere4", "--point", "0,0,0,0"], capsys)
    assert code == 0
    np.testing.assert_allclose(recs[1]["Rplus"], np.eye(3), atol=1e-12)
    assert recs[1]["scalar"] == pytest.approx(12)


def test_decompose_flat(capsys):
    code, recs, _ = run(["decompose", "--model", "flat", "--point", "1,1,1,1"], capsys)
    assert code == 0
    assert np.all(np.array(recs[1]["Rplus"]) == 0) and recs[1]["scalar"] == 0


def test_decompose_s2xs2(capsys):
    _, recs, _ = run(["decompose", "--model", "s2xs2", "--point", "0.1,0,0.2,0"], capsys)
    np.testing.assert_allclose(recs[1]["spectrum_plus"], [0, 0, 1], atol=1e-12)


@pytest.mark.parametrize("argv", [
    ["decompose", "--model", "sphere4", "--point", "0,0,0"],
    ["decompose", "--point", "0,0,0,0"],
    ["check", "nosuch"],
    ["check", "symbol", "--h", "-1"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == 2


def test_domain_error_exit(capsys):
    assert cli.main(["decompose", "--model", "hyperbolic4", "--point", "2,0,0,0"]) == 1


def test_check_failure_exit(capsys):
    code, recs, _ = run(["check", "reconstruction", "--model", "sphere4", "--points", "5",
                         "--tol", "1e-30"], capsys)
    assert code == 1 and recs[-1]["summary"]["failed"] >= 1


def test_check_symbol_report(capsys):
    code, recs, err = run(["check", "symbol", "--points", "10", "--seed", "3"], capsys)
    assert code == 0
    assert recs[0]["config"]["seed"] == 3
    names = [r["check"] for r in recs[1:-1]]
    assert names == sorted(names) and len(set(names)) == len(names)
    for r in recs[1:-1]:
        assert r["pass"] == (r["value"] <= r["tolerance"])
    assert recs[-1]["summary"]["passed"] == len(names)
    assert "checks passed" in err


def test_check_action(capsys):
    code, recs, _ = run(["check", "action"], capsys)
    rec = recs[1]
    assert code == 0 and rec["inputs"]["value"] == pytest.approx(4 * np.pi**2, rel=5e-3)


def test_determinism(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.jsonl"
        assert cli.main(["check", "identities", "--points", "30", "--seed", "7", "--out", str(path)]) == 0
        lines = path.read_text().splitlines()
        assert json.loads(lines[0])["config"]["out"] == str(path)
        outs.append(lines[1:-1])  # check records: everything except config echo and timing summary
    assert outs[0] == outs[1]


def test_seed_changes_inputs(tmp_path):
    digests = []
    for seed in (1, 2):
        path = tmp_path / f"s{seed}.jsonl"
        cli.main(["check", "symbol", "--points", "5", "--seed", str(seed), "--out", str(path)])
        digests.append([json.loads(x).get("inputs_digest") for x in path.read_text().splitlines()])
    assert digests[0] != digests[1]


class TestConfig:
    def test_precedence(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\n[run]\npoints = 7\nseed = 4\nlambda = -3\nscheme = \"fd\"\n")
        cfg = load_config(str(path), {"seed": 9, "points": None})
        assert (cfg.points, cfg.seed, cfg.lam, cfg.scheme) == (7, 9, -3.0, "fd")
        assert load_config().points == RunConfig().points

    def test_bad_lines(self):
        with pytest.raises(ConfigError):
            parse_config_text("points 3")
        with pytest.raises(ConfigError):
            parse_config_text("colour = blue")
        with pytest.raises(ConfigError):
            parse_config_text("points = many")

    def test_validate(self):
        with pytest.raises(ConfigError):
            load_config(overrides={"model": "torus"})
        with pytest.raises(ConfigError):
            load_config("/nonexistent/file.cfg")

    def test_config_file_through_cli(self, tmp_path, capsys):
        path = tmp_path / "c.cfg"
        path.write_text("points = 3\nseed = 5\n")
        code, recs, _ = run(["check", "hessian", "--config", str(path), "--seed", "6"], capsys)
        assert code == 0 and recs[0]["config"]["points"] == 3 and recs[0]["config"]["seed"] == 6
        path.write_text("points = x\n")
        assert cli.main(["check", "hessian", "--config", str(path)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pureconn", "decompose", "--model", "sphere4",
                          "--point", "0.1,0,0,0"], capture_output=True, text=True)
    assert res.returncode == 0 and "Rplus" in res.stdout
