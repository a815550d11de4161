from __future__ import annotations

import json

import pytest

from adaptive_gibbs.cli import main, read_config_file, resolve_config
from adaptive_gibbs.errors import ConfigError


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\np = 0.3\nn_max=20\n")
    values = read_config_file(cfg)
    out = resolve_config("example2", values, {"p": "0.7"})
    assert out["p"] == 0.7 and out["n_max"] == 20 and out["seed"] == 1729
    with pytest.raises(ConfigError):
        resolve_config("example2", {"bogus": "1"}, {})
    with pytest.raises(ConfigError):
        resolve_config("example2", {"n_max": "ten"}, {})


@pytest.mark.parametrize("argv", [
    ["counterexample", "--steps", "0"],
    ["truncated", "--M", "1"],
    ["example2", "--p", "0"],
    ["glmm", "--strategy", "nope"],
])
def test_bad_config_exits_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "o")]) == 2


def test_unknown_flag_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["example2", "--nope", "1", "--out", str(tmp_path / "o")])
    assert exc.value.code == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("p=0.5\nextra=1\n")
    assert main(["example2", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_refuses_to_overwrite(tmp_path):
    out = tmp_path / "e"
    assert main(["example2", "--out", str(out)]) == 0
    assert main(["example2", "--out", str(out)]) == 2
    assert main(["example2", "--out", str(out), "--force"]) == 0


def test_example2_exit_codes(tmp_path):
    assert main(["example2", "--p", "0.5", "--out", str(tmp_path / "a")]) == 0
    assert main(["example2", "--p", "0.9", "--out", str(tmp_path / "b")]) == 1
    summary = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert summary["p_gap_lower_final"] == pytest.approx(0.1, abs=2e-3)
    lines = (tmp_path / "a" / "gaps.csv").read_text().splitlines()
    assert lines[0] == "n,q_gap,p_gap_lower" and len(lines) == 41


def test_verify_bounds_and_selftest(tmp_path):
    assert main(["verify-bounds", "--pairs", "20", "--out", str(tmp_path / "a")]) == 0
    assert main(["verify-bounds", "--pairs", "20", "--selftest-negate", "--out", str(tmp_path / "b")]) == 1
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["passed"] and summary["worst_by_model"]


def test_truncated_writes_curve(tmp_path):
    code = main(["truncated", "--M", "5", "--n_max", "1000", "--grid_points", "10",
                 "--threshold", "0.5", "--out", str(tmp_path / "t")])
    summary = json.loads((tmp_path / "t" / "summary.json").read_text())
    assert code == (0 if summary["final_tv"] < 0.5 else 1)
    assert (tmp_path / "t" / "tv_curve.csv").read_text().startswith("n,tv\n1,")


@pytest.mark.parametrize("argv", [
    ["counterexample", "--replicas", "3", "--steps", "3000", "--thin", "10"],
    ["glmm", "--strategy", "accept44", "--steps", "3000"],
    ["glmm", "--strategy", "var24", "--steps", "3000"],
    ["truncated", "--M", "8", "--n_max", "5000"],
    ["example2", "--p", "0.7"],
    ["verify-bounds", "--pairs", "10", "--chains", "5"],
])
def test_rerun_is_byte_identical(tmp_path, argv):
    codes = [main(argv + ["--out", str(tmp_path / name)]) for name in ("a", "b")]
    assert codes[0] == codes[1] and codes[0] in (0, 1)
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a == b and "summary.json" in a and "config.txt" in a


def test_counterexample_outputs(tmp_path):
    assert main(["counterexample", "--replicas", "2", "--steps", "1000", "--thin", "100",
                 "--out", str(tmp_path / "c")]) == 0
    summary = json.loads((tmp_path / "c" / "summary.json").read_text())
    for key in ("replicas", "steps", "frac_exceeding_threshold", "threshold", "seed"):
        assert key in summary
    trace = (tmp_path / "c" / "traces" / "replica_0001.csv").read_text().splitlines()
    assert trace[0] == "n,coord,accepted,x1,x2,alpha1,alpha2"
    assert len(trace) == 11
