import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from correlator.cli import EXIT_GATE, EXIT_OK, EXIT_VALIDATION, main
from correlator.config import (
    EXPERIMENTS,
    load_config,
    load_preset,
    parse_config,
    preset_names,
    resolve_config,
)
from correlator.exceptions import ConfigurationError
from correlator.qite import TAU_PLUS

TIM_SMALL = """\
experiment = "tim_otoc"
seed = 3

[model]
L = 3
v_site = 0
w_site = 2

[trotter]
order = 1
dt = 0.5
t_max = 2.0
"""


def test_presets_load():
    names = preset_names()
    assert {"schwinger", "schwinger_exact", "schwinger_noisy", "ssh", "tim_otoc", "selftest"} <= set(names)
    for name in names:
        cfg = load_preset(name)
        assert cfg.experiment in EXPERIMENTS


def test_preset_defaults():
    s = load_preset("schwinger")
    assert (s.model.L, s.model.m, s.model.g) == (6, 0.5, 0.3)
    assert (s.trotter.order, s.trotter.dt, s.trotter.t_max) == (2, 2.0, 40.0)
    assert s.qite.tau_plus == pytest.approx(TAU_PLUS)
    ssh = load_preset("ssh")
    assert (ssh.model.L, ssh.model.delta, ssh.trotter.dt, ssh.trotter.t_max) == (12, 0.8, 0.4, 23.6)
    tim = load_preset("tim_otoc")
    assert (tim.model.L, tim.trotter.order, tim.trotter.dt, tim.trotter.t_max) == (8, 1, 0.2, 11.8)


def test_unknown_key_reports_line():
    text = TIM_SMALL.replace("dt = 0.5", "dt = 0.5\nstep = 0.1")
    with pytest.raises(ConfigurationError, match=r"cfg\.toml:12: unknown key 'step' in \[trotter\]"):
        parse_config(text, "cfg.toml")


def test_unknown_section_and_top_level_key():
    with pytest.raises(ConfigurationError, match=r":9: unknown section \[trotr\]"):
        parse_config(TIM_SMALL.replace("[trotter]", "[trotr]"), "x")
    with pytest.raises(ConfigurationError, match="unknown top-level key 'sead'"):
        parse_config(TIM_SMALL.replace("seed = 3", "sead = 3"), "x")


@pytest.mark.parametrize("old, new, fragment", [
    ("order = 1", "order = 3", "order must be 1 or 2"),
    ("t_max = 2.0", "t_max = 2.1", "integer multiple of dt"),
    ("L = 3", "L = 1", "L must be at least 2"),
    ("w_site = 2", "w_site = 5", "w_site out of range"),
    ("dt = 0.5", 'dt = "fast"', "'dt' expects float"),
    ('experiment = "tim_otoc"', 'experiment = "tea"', "experiment must be one of"),
    ("seed = 3", "seed = 3.5", "seed must be an integer"),
])
def test_validation_errors(old, new, fragment):
    with pytest.raises(ConfigurationError, match=fragment):
        parse_config(TIM_SMALL.replace(old, new), "x")


def test_malformed_toml_and_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        parse_config("experiment = ", "x")
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "nope.toml")
    with pytest.raises(ConfigurationError):
        load_preset("nope")


@pytest.mark.parametrize("name", ["schwinger", "schwinger_noisy", "ssh", "tim_otoc", "selftest"])
def test_roundtrip(name):
    cfg = load_preset(name)
    again = parse_config(cfg.to_toml())
    assert again == cfg
    assert again.digest() == cfg.digest()


@given(st.integers(0, 2**62), st.sampled_from([1, 2]), st.floats(0.0, 0.5), st.integers(0, 1000),
       st.sampled_from(["hamming", "rectangular"]), st.sampled_from(["oracle", "unitary", "analytic", "projective"]))
def test_roundtrip_property(seed, order, p, shots, window, variant):
    cfg = parse_config(TIM_SMALL.replace("seed = 3", f"seed = {seed}")
                       .replace("order = 1", f"order = {order}")
                       + f"\n[noise]\np = {p!r}\nshots = {shots}\n"
                       + f'\n[processing]\nwindow = "{window}"\n'
                       + f'\n[qite]\nvariant = "{variant}"\n')
    assert parse_config(cfg.to_toml()) == cfg


def test_resolve_config_path_and_preset(tmp_path):
    path = tmp_path / "tim.toml"
    path.write_text(TIM_SMALL)
    assert resolve_config(str(path)).model.L == 3
    assert resolve_config("tim_otoc").model.L == 8


# -- command line --------------------------------------------------------------------

def _run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cli_run_writes_manifest(tmp_path, capsys):
    cfg = tmp_path / "tim.toml"
    cfg.write_text(TIM_SMALL)
    code, out, _ = _run(["run", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == EXIT_OK
    assert "valley_time" in json.loads(out)
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert set(manifest) >= {"config_sha256", "version", "seed", "wall_time_s", "files"}
    assert manifest["seed"] == 3
    assert manifest["config_sha256"] == parse_config(TIM_SMALL).digest()
    assert "otoc.csv" in manifest["files"]
    assert parse_config((tmp_path / "o" / "config.toml").read_text()) == parse_config(TIM_SMALL)


def test_cli_seed_override(tmp_path, capsys):
    cfg = tmp_path / "tim.toml"
    cfg.write_text(TIM_SMALL)
    assert _run(["run", str(cfg), "--seed", "11", "--out", str(tmp_path / "o")], capsys)[0] == EXIT_OK
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["seed"] == 11


def test_cli_validation_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(TIM_SMALL.replace("L = 3", "L = 3\nLL = 4"))
    code, _, err = _run(["run", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == EXIT_VALIDATION
    assert "bad.toml:6" in err
    assert not (tmp_path / "o").exists()


def test_cli_oracle_cap_is_a_validation_error(tmp_path, capsys):
    cfg = tmp_path / "tim.toml"
    cfg.write_text(TIM_SMALL.replace("order = 1", 'backend = "exact"'))
    code, _, err = _run(["run", str(cfg), "--oracle-max-qubits", "2", "--out", str(tmp_path / "o")], capsys)
    assert code == EXIT_VALIDATION and "cap" in err
    code, _, _ = _run(["selftest", "--oracle-max-qubits", "2", "--out", str(tmp_path / "s")], capsys)
    assert code == EXIT_VALIDATION


def test_cli_selftest_pass_and_gate_failure(tmp_path, capsys):
    code, out, _ = _run(["selftest", "--cases", "12", "--out", str(tmp_path / "a")], capsys)
    assert code == EXIT_OK and json.loads(out)["passed"]
    strict = tmp_path / "strict.toml"
    strict.write_text('experiment = "bracket_selftest"\n[model]\ncases = 12\ntolerance = 1e-30\n')
    code, _, err = _run(["run", str(strict), "--out", str(tmp_path / "b")], capsys)
    assert code == EXIT_GATE and "gate" in err


def test_cli_rejects_bad_arguments(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "tim_otoc", "--oracle-max-qubits", "0"])
    assert exc.value.code != 0
    assert _run(["run", "no_such_preset_or_file"], capsys)[0] == EXIT_VALIDATION


def test_noisy_runs_are_bit_identical(tmp_path, capsys):
    cfg = tmp_path / "noisy.toml"
    cfg.write_text(TIM_SMALL + "\n[noise]\np = 0.02\nshots = 50\n")
    for name in ("a", "b"):
        assert _run(["run", str(cfg), "--out", str(tmp_path / name)], capsys)[0] == EXIT_OK
    assert (tmp_path / "a" / "otoc.csv").read_bytes() == (tmp_path / "b" / "otoc.csv").read_bytes()
    assert _run(["run", str(cfg), "--seed", "4", "--out", str(tmp_path / "c")], capsys)[0] == EXIT_OK
    assert (tmp_path / "a" / "otoc.csv").read_bytes() != (tmp_path / "c" / "otoc.csv").read_bytes()


def test_selftest_report_is_bit_identical(tmp_path, capsys):
    for name in ("a", "b"):
        assert _run(["selftest", "--cases", "8", "--seed", "5", "--out", str(tmp_path / name)], capsys)[0] == 0
    a = (tmp_path / "a" / "selftest_report.json").read_bytes()
    assert a == (tmp_path / "b" / "selftest_report.json").read_bytes()
