"""Configuration grammar, validation messages, and CLI behavior."""

import json

import numpy as np
import pytest

from axibouss.cli import main
from axibouss.config import parse_config
from axibouss.errors import ConfigError

MINIMAL = """
grid.nr = 32
grid.nz = 32
grid.Lr = 6.0
grid.Lz = 6.0
run.t_end = 0.0
"""

SMALL_RUN = """
grid.nr = 49
grid.nz = 49
grid.Lr = 6.0
grid.Lz = 6.0
vortex.l2 = 1.0
vortex.r0 = 1.5
vortex.z0 = -0.5
vortex.sigma = 0.4
density.peak = 1.0
density.r1 = 1.0
density.r2 = 2.0
density.z0 = -0.5
density.h = 0.5
step.dt_max = 0.01
run.t_end = 0.1
run.record_interval = 0.05
run.snapshot_interval = 0.1
particles.seeds = 1.5:-0.5, 1.2:-0.8
support.threshold_rel = 1e-6
"""


def test_empty_config_names_first_missing_key():
    with pytest.raises(ConfigError, match="grid.nr missing"):
        parse_config("")


def test_unknown_key_is_an_error():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(MINIMAL + "grid.banana = 1\n")


def test_duplicate_key_is_an_error():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL + "grid.nr = 64\n")


def test_syntax_error_reports_line_number():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("# fine\nthis is not a setting\n")


def test_bad_value_type_reports_key():
    with pytest.raises(ConfigError, match="grid.nr expects a int"):
        parse_config(MINIMAL.replace("grid.nr = 32", "grid.nr = many"))


def test_axis_clearance_validation_message():
    bad = MINIMAL + "density.peak = 1.0\ndensity.r1 = 0.0\ndensity.r2 = 2.0\ndensity.h = 0.5\n"
    with pytest.raises(ConfigError, match="axis-clearance"):
        parse_config(bad)


def test_density_margin_validation():
    bad = MINIMAL + "density.peak = 1.0\ndensity.r1 = 1.0\ndensity.r2 = 5.9\ndensity.h = 0.5\n"
    with pytest.raises(ConfigError, match="3/4 of the radial extent"):
        parse_config(bad)


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("# header\n\n" + MINIMAL + "  # trailing comment line\n")
    assert cfg.nr == 32


def test_unknown_check_name_rejected():
    with pytest.raises(ConfigError, match="unknown check name"):
        parse_config(MINIMAL + "checks.not-a-check = 0.1\n")


def test_check_tolerance_override_parsed():
    cfg = parse_config(MINIMAL + "checks.rho-L2 = 0.01\n")
    assert cfg.check_tolerances == {"rho-L2": 0.01}


def test_canonical_round_trip_is_byte_identical():
    cfg = parse_config(SMALL_RUN)
    text1 = cfg.canonical_text()
    text2 = parse_config(text1).canonical_text()
    assert text1 == text2


def test_print_config_round_trip(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text(SMALL_RUN)
    assert main(["run", str(path), "--print-config"]) == 0
    first = capsys.readouterr().out
    path2 = tmp_path / "canon.cfg"
    path2.write_text(first)
    assert main(["run", str(path2), "--print-config"]) == 0
    second = capsys.readouterr().out
    assert first == second


def test_version_exit_code(capsys):
    assert main(["version"]) == 0
    out = capsys.readouterr().out
    assert "axibouss" in out and "cutoff" in out


def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("grid.nr = 32\n")
    assert main(["run", str(path)]) == 2


def test_oracle_strain_sharpness_cli(capsys):
    assert main(["oracle", "strain-sharpness"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_run_check_pipeline(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_RUN)
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert main(["run", str(cfg), "--output", str(out1), "--quiet"]) == 0
    assert main(["run", str(cfg), "--output", str(out2), "--quiet"]) == 0
    capsys.readouterr()

    for name in ("diagnostics.csv", "checks.json", "particles.csv"):
        assert (out1 / name).exists()
    snaps = sorted(p.name for p in out1.glob("snap_t*.fld"))
    assert snaps  # snapshot files per the field format

    # determinism: byte-identical outputs
    assert (out1 / "diagnostics.csv").read_bytes() == (out2 / "diagnostics.csv").read_bytes()
    assert (out1 / "checks.json").read_bytes() == (out2 / "checks.json").read_bytes()
    assert (out1 / "particles.csv").read_bytes() == (out2 / "particles.csv").read_bytes()

    # offline re-evaluation reproduces the ledger bytes
    recheck = tmp_path / "rechecks.json"
    assert main(["check", str(out1 / "diagnostics.csv"),
                 "--output", str(recheck)]) == 0
    capsys.readouterr()
    assert recheck.read_bytes() == (out1 / "checks.json").read_bytes()

    checks = json.loads((out1 / "checks.json").read_text())
    assert {c["status"] for c in checks} <= {"ASSERTED", "REPORTED", "SUSPENDED"}
    assert all(c["paper_anchor"] for c in checks)

    particles = (out1 / "particles.csv").read_text().splitlines()
    assert particles[0] == "t,id,r,theta,z,escaped"
    assert len(particles) > 2


def test_besov_monitoring_written_separately(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(SMALL_RUN + "lpaley.besov_interval = 0.1\nlpaley.besov_box = 16\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--output", str(out), "--quiet"]) == 0
    capsys.readouterr()
    rows = json.loads((out / "besov.json").read_text())
    assert rows and all(r["status"] == "REPORTED" for r in rows)
    assert all(r["lhs"] > 0.0 for r in rows)
    # checks.json carries no besov rows, keeping offline re-evaluation exact
    names = {c["name"] for c in json.loads((out / "checks.json").read_text())}
    assert not any(n.startswith("besov") for n in names)


def test_csv_export_helpers():
    import numpy as np
    from axibouss.elliptic import biot_savart_csv_text
    from axibouss.lpaley import block_energies_csv_text, dyadic_blocks
    text = biot_savart_csv_text([(0.5, 0.0)], [(0.1, -0.2)])
    assert text.splitlines()[0] == "r,z,vr,vz"
    assert "0.1" in text and "-0.2" in text
    x = -0.5 + np.arange(16) / 16
    X = x[:, None, None] * np.ones((16, 16, 16))
    d = dyadic_blocks(np.sin(2 * np.pi * 4 * X))
    lines = block_energies_csv_text(d).splitlines()
    assert lines[0] == "q,block_lp_norm"
    assert len(lines) == 1 + len(d.blocks)


def test_t_end_zero_single_record(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(MINIMAL + "run.record_interval = 0.05\nrun.snapshot_interval = 1.0\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--output", str(out), "--quiet"]) == 0
    capsys.readouterr()
    lines = (out / "diagnostics.csv").read_text().splitlines()
    assert len(lines) == 2  # header + the initial record
