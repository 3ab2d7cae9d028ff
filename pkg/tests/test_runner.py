import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ewspec.cli import main
from ewspec.config import parse_config
from ewspec.errors import ConfigError
from ewspec.figures import expand_ids, reproduce_figure
from ewspec.runner import compute_correlation, compute_spectrum, run_eigensweep, run_scenario
from ewspec.spectrum import find_peaks

KERR_FOCK = """
[model]
kind = FieldOnly
deformation = linear_kerr
chi = 0.2
[state]
kind = fock_field
n = 2
[time]
gamma_t = 20
[spectrum]
Gamma = 0.05
points = 401
[run]
method = both
[output]
name = kerr
"""

FIG5_SHORT = """
[model]
kind = DJC
deformation = linear_kerr
chi = 0.0125
selective_m = 4
Omega0 = 0.125
[state]
kind = fock_excited
n = 4
[time]
periods = 16
reference_n = 4
[spectrum]
Gamma = 0.01
points = 801
[run]
method = both
"""


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_both_methods_and_metadata(tmp_path):
    csv_path, json_path = run_scenario(parse_config(KERR_FOCK), tmp_path)
    header, data = read_csv(csv_path)
    assert header == ["omega", "S_numeric", "S_closed_form"]
    meta = json.loads(Path(json_path).read_text())
    assert meta["max_abs_difference"] < 1e-6 * data[:, 2].max()
    assert meta["resolved"]["cutoff"] >= 3
    assert set(meta["methods"]) == {"numeric_gram", "closed_form"}
    assert "version" in meta and meta["config"]["model"]["chi"] == 0.2
    raw = Path(csv_path).read_bytes()
    assert b"\r" not in raw


def test_csv_is_deterministic(tmp_path):
    cfg = parse_config(KERR_FOCK)
    a = Path(run_scenario(cfg, tmp_path / "a")[0]).read_bytes()
    b = Path(run_scenario(cfg, tmp_path / "b")[0]).read_bytes()
    assert a == b


def test_rerun_from_sidecar(tmp_path):
    csv_path, json_path = run_scenario(parse_config(KERR_FOCK), tmp_path / "first")
    again = parse_config(Path(json_path).read_text())
    csv2, _ = run_scenario(again, tmp_path / "second")
    assert Path(csv_path).read_bytes() == Path(csv2).read_bytes()


def test_selective_scenario_peaks_match_closed_form():
    run = compute_spectrum(parse_config(FIG5_SHORT))
    num, closed = run.numeric[0], run.closed[0]
    pos_n, h_n = find_peaks(run.omega, num)
    pos_c, h_c = find_peaks(run.omega, closed)
    step = run.omega[1] - run.omega[0]
    assert pos_n.size == pos_c.size > 0
    assert np.abs(pos_n - pos_c).max() <= step
    assert np.abs(h_n / h_c - 1).max() < 1e-6
    assert run.metadata["max_abs_difference"] < 1e-6 * closed.max()


def test_time_sweep_has_t_column(tmp_path):
    text = KERR_FOCK.replace("gamma_t = 20", "gamma_t = 5, 10, 20")
    header, data = read_csv(run_scenario(parse_config(text), tmp_path)[0])
    assert header[0] == "t"
    assert sorted(set(data[:, 0])) == pytest.approx([100.0, 200.0, 400.0])


def test_missing_closed_form_is_reported():
    text = "[model]\nkind = Rabi\nOmega0 = 0.2\n[run]\nmethod = closed_form\n"
    with pytest.raises(ConfigError, match="no closed-form"):
        compute_spectrum(parse_config(text))


def test_correlation_output():
    text = "[model]\nkind = JC\nOmega0 = 0.25\n[state]\nn = 2\n[run]\nmethod = both\n[correlation]\nsamples = 8\n"
    ds = compute_correlation(parse_config(text))
    assert len(ds.rows) == 64
    assert ds.metadata["max_abs_difference"] < 1e-8


def test_eigensweep_output(tmp_path):
    text = "[model]\nkind = DJC\ndeformation = linear_kerr\nchi = 0.05\nomega_c = 0.7692\n[sweep]\npoints = 4\nlevels = 6\n"
    header, data = read_csv(run_eigensweep(parse_config(text), tmp_path)[0])
    assert header[:3] == ["coupling", "Omega0", "E0"]
    assert data.shape == (4, 2 + 6 + 1)


def test_output_directory_precedence(tmp_path, monkeypatch):
    cfg = parse_config(KERR_FOCK + "directory = " + str(tmp_path / "cfg") + "\n")
    monkeypatch.setenv("EWSPEC_OUT", str(tmp_path / "env"))
    assert run_scenario(cfg)[0].startswith(str(tmp_path / "env"))
    assert run_scenario(cfg, tmp_path / "flag")[0].startswith(str(tmp_path / "flag"))
    monkeypatch.delenv("EWSPEC_OUT")
    assert run_scenario(cfg)[0].startswith(str(tmp_path / "cfg"))


def test_fig1b_peaks(tmp_path):
    (path,) = reproduce_figure("fig1b", tmp_path)
    header, data = read_csv(path)
    assert header == ["omega", "S_n1", "S_n2", "S_n3"]
    step = data[1, 0] - data[0, 0]
    for n in (1, 2, 3):
        pos, _ = find_peaks(data[:, 0], data[:, n])
        assert abs(pos[0] - (1 + 0.4 * n)) <= step


def test_fig2b_metadata(tmp_path):
    (path,) = reproduce_figure("fig2b", tmp_path)
    meta = json.loads(Path(path).with_suffix(".json").read_text())
    assert meta["models"] == ["DJC", "JC"]
    assert meta["selective_rectangle"]["coupling_range"] == [0.0, 0.05]


def test_fig3_panels(tmp_path):
    assert expand_ids(["fig3"]) == ["fig3a", "fig3b", "fig3c"]
    chis = []
    for fig in expand_ids(["fig3"]):
        (path,) = reproduce_figure(fig, tmp_path)
        chis.append(json.loads(Path(path).with_suffix(".json").read_text())["params"]["deformation"].get("chi"))
    assert chis == [0.0, 0.125, 0.25]


def test_unknown_figure():
    with pytest.raises(ValueError, match="unknown figure"):
        expand_ids(["fig9"])


def test_cli_spectrum_and_errors(tmp_path, capsys):
    cfg = tmp_path / "kerr.ini"
    cfg.write_text(KERR_FOCK)
    assert main(["--out", str(tmp_path / "out"), "spectrum", str(cfg)]) == 0
    assert (tmp_path / "out" / "kerr.csv").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nkind = JC\nbogus = 1\n")
    assert main(["spectrum", str(bad)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_cli_validate_subset(capsys):
    assert main(["validate", "--only", "8"]) == 0
    assert "[PASS]  8" in capsys.readouterr().out


def test_cli_validate_mutation_fails(capsys):
    assert main(["validate", "--only", "5", "--mutate"]) == 1
    assert "[FAIL]  5" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "ewspec", "--out", str(tmp_path), "figure", "fig3a"],
                         capture_output=True, text=True, check=True)
    assert "fig3a.csv" in out.stdout


def test_uncoupled_spectrum_needs_time():
    cfg = parse_config("[model]\nkind = JC\n")
    assert cfg.times == []
    with pytest.raises(ConfigError, match="no observation time"):
        compute_spectrum(cfg)
