"""Serialization, configuration loading and the command-line interface."""

import hashlib
import json
import shutil
import subprocess

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lincalderon import io
from lincalderon.cli import COMMANDS, main
from lincalderon.config import DEFAULT_CONFIG, ConfigError, ExperimentConfig, load_config
from lincalderon.symbols import SymbolTable

SMALL = {
    "grid": {"n_boundary_modes": 128, "L": 4.0, "n_depth_points": 48},
    "probe": {"boundary_points": [0.0, 1.0], "tau_min": 4.0, "tau_max": 48.0, "n_frequencies": 16},
    "laplace_fit": {"n_terms": 6},
    "reconstruct": {"n_terms": 6, "radius": 0.1, "n_output_depths": 5},
    "injectivity": {"grid": {"n_boundary_modes": 32, "L": 4.0, "n_depth_points": 24},
                    "frequencies": [4.0, 6.0, 8.0]},
    "fbi": {"half_width": 2.0, "h_ladder": [0.08, 0.04, 0.02]},
}


def write_config(path, cfg):
    path.write_text(json.dumps(cfg, indent=2))
    return path


@pytest.fixture
def small_config(tmp_path):
    return write_config(tmp_path / "small.json", SMALL)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (2, 3), elements=finite), arrays(np.float64, (2, 3), elements=finite))
def test_symbol_table_csv_roundtrip_is_lossless(tmp_path_factory, re, im):
    table = SymbolTable([0.0, 1.5], [2.0, 3.5, 7.25], re + 1j * im)
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    io.write_symbol_table(path, table)
    back = io.read_symbol_table(path)
    np.testing.assert_array_equal(back.values, table.values)
    np.testing.assert_array_equal(back.frequencies, table.frequencies)


def test_read_symbol_table_checks(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        io.read_symbol_table(p)
    p.write_text("y_prime,tau,re,im\n0,2,1,0\n1,3,1,0\n")
    with pytest.raises(ValueError, match="full"):
        io.read_symbol_table(p)


def test_to_jsonable():
    out = io.to_jsonable({"a": np.float64(np.nan), "b": 1 + 2j, "c": np.arange(2), "d": np.bool_(True)})
    assert out == {"a": "nan", "b": {"re": 1.0, "im": 2.0}, "c": [0, 1], "d": True}


def test_default_config_loads():
    cfg = load_config()
    assert cfg == load_config(DEFAULT_CONFIG)
    assert cfg.grid.n_boundary_modes == 1024
    assert cfg.potential_profile() is None
    assert cfg.perturbation_profile().name == "exp"


def test_config_hash_is_stable():
    a = io.config_hash(ExperimentConfig().model_dump(mode="json"))
    assert a == io.config_hash(json.loads(json.dumps(ExperimentConfig().model_dump(mode="json"))))
    assert a != io.config_hash(ExperimentConfig(forward={"t": 0.5}).model_dump(mode="json"))


def test_config_error_reports_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "grid": {\n    "L": 4.0,\n    "bogus": 1\n  }\n}\n')
    with pytest.raises(ConfigError, match=r"c\.json:4: grid\.bogus") as info:
        load_config(p)
    assert info.value.line == 4


def test_config_json_syntax_error(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "grid": {\n    "L": 4.0,\n  }\n}\n')
    with pytest.raises(ConfigError, match="JSON syntax error") as info:
        load_config(p)
    assert info.value.line == 4


@pytest.mark.parametrize("cfg, msg", [
    ({"probe": {"tau_min": 10.0, "tau_max": 5.0}}, "tau_max must exceed tau_min"),
    ({"perturbation": {"kind": "gaussian"}}, "invalid profile spec"),
    ({"eikonal": {"metric": {"kind": "flat"}}}, "invalid metric spec"),
    ({"fbi": {"h_ladder": [0.1, 0.05]}}, "at least three"),
    ({"grid": {"n_boundary_modes": 2}}, "greater than or equal"),
])
def test_config_validation(tmp_path, cfg, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(write_config(tmp_path / "c.json", cfg))


def test_config_top_level_and_missing_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


EXPECTED_FILES = {
    "forward": ["forward.json", "dn_diagonal.csv", "matrices.json"],
    "symbol": ["symbol_table.csv"],
    "laplace-fit": ["coefficients.json"],
    "borel-reconstruct": ["profile.csv", "reconstruct.json"],
    "injectivity": ["injectivity.json"],
    "eikonal": ["eikonal.json"],
    "fbi": ["indicator.csv"],
}


@pytest.mark.parametrize("command", sorted(EXPECTED_FILES))
def test_cli_commands_write_outputs_with_sidecars(tmp_path, small_config, command):
    out = tmp_path / "out"
    assert main([command, "--config", str(small_config), "--out", str(out)]) == 0
    digest = io.config_hash(load_config(small_config).model_dump(mode="json"))
    for name in EXPECTED_FILES[command]:
        data = out / name
        meta = json.loads((out / (name + ".meta.json")).read_text())
        assert meta == {"command": command, "config_sha256": digest, "file": name, "file_sha256": sha(data)}


def test_cli_outputs_are_deterministic(tmp_path, small_config):
    for cmd in ("symbol", "laplace-fit", "forward"):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main([cmd, "--config", str(small_config), "--out", str(a)]) == 0
        assert main([cmd, "--config", str(small_config), "--out", str(b), "--seed", "7"]) == 0
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name
        shutil.rmtree(a)
        shutil.rmtree(b)


def test_cli_forward_summary(tmp_path, small_config):
    out = tmp_path / "o"
    main(["forward", "--config", str(small_config), "--out", str(out)])
    summary = json.loads((out / "forward.json").read_text())
    assert summary["green_identity_residual"] < 1e-10
    assert summary["difference_quotient_error"] <= 10 * summary["difference_quotient_t"] * summary["lambda_dot_norm"]


def test_cli_zero_perturbation_gives_zero_symbols(tmp_path):
    cfg = dict(SMALL, perturbation={"kind": "zero"})
    out = tmp_path / "o"
    assert main(["symbol", "--config", str(write_config(tmp_path / "z.json", cfg)), "--out", str(out)]) == 0
    table = io.read_symbol_table(out / "symbol_table.csv")
    assert not np.any(table.values)


def test_cli_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "grid": {\n    "bogus": 1\n  }\n}\n')
    assert main(["symbol", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "bad.json:3" in err and "grid.bogus" in err


def test_cli_numerical_error_exit_code(tmp_path, capsys):
    cfg = dict(SMALL, probe={"tau_min": 4.0, "tau_max": 60.0, "n_frequencies": 8})
    p = write_config(tmp_path / "alias.json", cfg)
    assert main(["symbol", "--config", str(p), "--out", str(tmp_path / "o")]) == 3
    assert "AliasingError" in capsys.readouterr().err


def test_cli_verify(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert sum(line.startswith("[PASS]") for line in lines) == 11
    assert lines[-1] == "11/11 criteria passed"
    assert len(json.loads((tmp_path / "acceptance.json").read_text())) == 11


def test_console_script_help():
    exe = shutil.which("lincalderon")
    if exe is None:
        pytest.skip("console script not installed")
    res = subprocess.run([exe, "--help"], capture_output=True, text=True, check=True)
    for cmd in COMMANDS:
        assert cmd in res.stdout
