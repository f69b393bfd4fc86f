import csv
import io
import json
import subprocess
import sys

import pytest

from mvfloor import cli
from mvfloor.dea import DeaParams
from mvfloor.ffa import FfaConfig
from mvfloor.gss import GssParams
from mvfloor.objective import PenaltyWeights

FAST = ["--max-generations", "4", "--np", "2", "--no-timing"]


@pytest.fixture(scope="module")
def synth(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert cli.main(["synth", "8", "--seed", "1", "--out", str(out)]) == 0
    return out / "synth8.aux"


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_two_runs_give_two_rows_and_a_summary(synth, capsys):
    code, out, _ = run(["fixed-outline", "--aux", synth, "--runs", 2, "--csv", "-", *FAST], capsys)
    assert code == 0
    table = rows(out)
    assert [r["seed"] for r in table] == ["0", "1", "SR"]
    assert all(r["mode"] == "fixed-outline" and float(r["R"]) == 1 for r in table[:2])


def test_runs_per_ratio(synth, capsys):
    code, out, _ = run(["fixed-outline", "--aux", synth, "--ratio", 1, "--ratio", 2, "--csv", "-", *FAST], capsys)
    assert code == 0
    assert [float(r["R"]) for r in rows(out)[:2]] == [1, 2]


def test_same_config_gives_byte_identical_csv(synth, capsys):
    argv = ["fixed-outline", "--aux", synth, "--runs", 2, "--csv", "-", *FAST]
    first = run(argv, capsys)[1]
    second = run(argv, capsys)[1]
    assert first == second


def test_thread_count_does_not_change_output(synth, capsys, monkeypatch):
    argv = ["fixed-outline", "--aux", synth, "--csv", "-", *FAST]
    one = run([*argv, "--threads", 1], capsys)[1]
    four = run([*argv, "--threads", 4], capsys)[1]
    monkeypatch.setenv("MVFLOOR_THREADS", "4")
    env = run(argv, capsys)[1]
    assert one == four == env


def test_missing_blocks_file_names_the_path(tmp_path, capsys):
    missing = tmp_path / "gone.blocks"
    code, _, err = run(["fixed-outline", "--blocks", missing, "--nets", "x.nets", "--pl", "x.pl"], capsys)
    assert code == 2
    assert str(missing) in err


def test_parse_error_exits_two(tmp_path, synth, capsys):
    bad = tmp_path / "bad.blocks"
    bad.write_text("sb0 hardrectilinear 4 (0,0) (0,1)\n")
    stem = synth.with_suffix("")
    code, _, err = run(["fixed-outline", "--blocks", bad, "--nets", f"{stem}.nets", "--pl", f"{stem}.pl"], capsys)
    assert code == 2 and "bad.blocks:1" in err


@pytest.mark.parametrize(
    "extra",
    [["--runs", "0"], ["--np", "0"], ["--ratio", "-1"], ["--gamma", "-0.1"], ["--dea.alpha0", "2"]],
)
def test_usage_errors_exit_one(synth, capsys, extra):
    code, _, err = run(["fixed-outline", "--aux", synth, *FAST, *extra], capsys)
    assert code == 1 and err.startswith("mvfloor: error:")


def test_unknown_flag_exit_status(synth):
    with pytest.raises(SystemExit) as info:
        cli.main(["fixed-outline", "--aux", str(synth), "--bogus"])
    assert info.value.code == 1


def test_no_instance_is_a_usage_error(capsys):
    code, _, err = run(["fixed-outline"], capsys)
    assert code == 1 and "--aux" in err


def test_infeasible_search_exits_three(tmp_path, capsys):
    (tmp_path / "a.blocks").write_text("a hardrectilinear 4 (0,0) (0,1) (40,1) (40,0)\n")
    (tmp_path / "a.nets").write_text("")
    (tmp_path / "a.pl").write_text("")
    files = ["--blocks", tmp_path / "a.blocks", "--nets", tmp_path / "a.nets", "--pl", tmp_path / "a.pl"]
    code, _, err = run(["min-area", *files, "--np", 1, "--gss.trial_generations", 2], capsys)
    assert code == 3 and "cap" in err


def test_single_module_min_area_costs_one(tmp_path, capsys):
    (tmp_path / "a.blocks").write_text("a hardrectilinear 4 (0,0) (0,2) (2,2) (2,0)\n")
    (tmp_path / "a.nets").write_text("")
    (tmp_path / "a.pl").write_text("")
    trials = tmp_path / "trials.csv"
    files = ["--blocks", tmp_path / "a.blocks", "--nets", tmp_path / "a.nets", "--pl", tmp_path / "a.pl"]
    code, out, _ = run(["min-area", *files, "--csv", "-", "--trials", trials, "--gss.trial_generations", 10], capsys)
    assert code == 0
    row = rows(out)[0]
    assert row["mode"] == "min-area" and float(row["cost"]) == pytest.approx(1.0)
    assert float(row["gamma"]) == pytest.approx(0.0, abs=1e-12)
    log = rows(trials.read_text())
    assert log and {r["feasible"] for r in log} <= {"1", "0", "True", "False"}


def test_precedence_flags_over_file_over_defaults(synth, tmp_path):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"np": 3, "seed": 9, "gamma": 0.2, "dea": {"alpha0": 0.3}, "csa.q": 0.99}))
    parser = cli.build_parser()
    args = parser.parse_args(["fixed-outline", "--aux", str(synth), "--config", str(config), "--seed", "4"])
    s = cli.resolve_settings(args, min_area=False)
    assert s["seed"] == 4  # flag beats file
    assert s["np"] == 3 and s["gamma"] == 0.2  # file beats default
    assert s["runs"] == 1  # default
    assert s["dea.alpha0"] == 0.3 and s["csa.q"] == 0.99
    cfg = cli.ffa_config(s, None)
    assert cfg.dea.alpha0 == 0.3 and cfg.dea.np == 3 and cfg.q == 0.99


def test_unknown_config_key_is_rejected(synth, tmp_path, capsys):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"nope": 1}))
    code, _, err = run(["fixed-outline", "--aux", synth, "--config", config], capsys)
    assert code == 1 and "nope" in err


def test_every_constant_has_a_flag_and_a_config_key():
    parser = cli.build_parser()
    fixed = parser._subparsers._group_actions[0].choices["fixed-outline"]
    area = parser._subparsers._group_actions[0].choices["min-area"]
    flags = {opt for action in area._actions for opt in action.option_strings}
    expected = {f"--weights.{f}" for f in PenaltyWeights.__dataclass_fields__}
    expected |= {f"--dea.{f}" for f in DeaParams.__dataclass_fields__ if f != "np"}
    expected |= {"--csa.k_max", "--csa.q", "--csa.stall_limit", "--ffa.delta1", "--ffa.s0", "--gss.gamma_cap"}
    assert expected <= flags
    assert "--np" in flags and "--epsilon" in flags
    fixed_flags = {opt for action in fixed._actions for opt in action.option_strings}
    assert not any(f.startswith("--gss.") for f in fixed_flags)
    for ns, name, _ in cli.OVERRIDES:
        assert f"{ns}.{name}" not in cli.DEFAULTS
    assert {f.name for f in FfaConfig.__dataclass_fields__.values()} and GssParams()


def test_dash_alias_for_overrides(synth):
    parser = cli.build_parser()
    args = parser.parse_args(["fixed-outline", "--aux", str(synth), "--ffa.stall-reinit", "7"])
    assert cli.resolve_settings(args, False)["ffa.stall_reinit"] == 7


def test_artifacts_and_render(synth, tmp_path, capsys):
    svg_dir, pl_dir = tmp_path / "svg", tmp_path / "pl"
    code, _, _ = run(
        ["fixed-outline", "--aux", synth, "--runs", 2, "--svg", f"{svg_dir}/", "--pl-out", f"{pl_dir}/", *FAST], capsys
    )
    assert code == 0
    svgs = sorted(p.name for p in svg_dir.iterdir())
    assert svgs == ["synth8_R1_s0.svg", "synth8_R1_s1.svg"]
    plan = pl_dir / "synth8_R1_s0.pl"
    out_svg = tmp_path / "drawn.svg"
    code, _, _ = run(["render", "--aux", synth, "--plan", plan, "--svg", out_svg, "--ratio", 1], capsys)
    assert code == 0
    assert out_svg.read_text().count('class="module"') == 8


def test_render_missing_plan_exits_two(synth, tmp_path, capsys):
    code, _, err = run(["render", "--aux", synth, "--plan", tmp_path / "no.pl", "--svg", "-"], capsys)
    assert code == 2 and "no.pl" in err


def test_selftest_clean_and_mutated(capsys):
    code, out, _ = run(["selftest", "--quick"], capsys)
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(["selftest", "--quick", "--mutate", "overlap-branch"], capsys)
    assert code == 3 and "FAIL" in out


def test_module_entry_point(synth):
    proc = subprocess.run(
        [sys.executable, "-m", "mvfloor", "fixed-outline", "--aux", str(synth), "--csv", "-", *FAST],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.splitlines()[0].startswith("instance,mode,R,gamma")
