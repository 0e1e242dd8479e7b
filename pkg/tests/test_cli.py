"""Config language and the command line front end."""
import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from willmore.cli import EXPAND_HEADER, LEAVES_HEADER, dispatch, main
from willmore.config import parse_config, print_config
from willmore.errors import ConfigError


def test_parse_basics():
    cfg = parse_config(
        "# a comment\n"
        "command = solve\n"
        "metric = conformal_bump\n"
        "eta = 0.1\n"
        "sigma = 1.5\n"
        "\n"
        "L = 12\n"
        "eps = 0.1\n"
        "P = 0.1, -0.2, 0.3  # trailing comment\n"
    )
    assert cfg.command == "solve" and cfg.metric == "conformal_bump"
    assert cfg.metric_params == {"eta": 0.1, "sigma": 1.5}
    assert cfg.L == 12 and cfg.eps == 0.1
    assert cfg.P == (0.1, -0.2, 0.3)


def test_parse_error_messages():
    cases = [
        ("command = solve\nmetric = nosuch\neps = 0.1\nP = 0,0,0\n",
         "unknown metric: nosuch"),
        ("command = solve\nmetric = euclidean\nP = 0,0,0\n",
         "solve requires eps"),
        ("command = fly\nmetric = euclidean\n", "unknown command: fly"),
        ("metric = euclidean\n", "config requires command"),
        ("command = solve\n", "config requires metric"),
        ("command = solve\nmetric = euclidean\neps = 0.9\nP = 0,0,0\n",
         "eps must lie in (0, 0.5], got 0.9"),
        ("command = solve\nmetric = euclidean\neps = 0.1\nP = 0,0,0\nzzz = 1\n",
         "unknown key: zzz"),
        ("command = solve\nmetric = euclidean\nL = 3\neps = 0.1\nP = 0,0,0\n",
         "L must be at least 4, got 3"),
        ("command = hawking\nmetric = schwarzschild\nradii = 2, -1\n",
         "radii must be positive, got -1"),
        ("command = expand\nmetric = euclidean\nP = 0,0,0\n"
         "eps_grid = 0.2, 0.9\n",
         "eps must lie in (0, 0.5], got 0.9"),
    ]
    for text, message in cases:
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert str(err.value) == message


def test_roundtrip_all_commands():
    texts = [
        "command = curvature\nmetric = round_s3\nR = 2\nP = 0.1, 0, 0\n",
        "command = solve\nmetric = conformal_quadratic\neta = -0.02\n"
        "eps = 0.1\nP = 0, 0, 0\ntol = 1e-9\n",
        "command = expand\nmetric = conformal_bump\neps_grid = 0.2, 0.1, 0.05\n"
        "P = 0, 0, 0\nseed = 7\n",
        "command = landscape\nmetric = conformal_two_bump\neta1 = 0.1\n"
        "eta2 = 0.05\ncenter = 1, 0, 0\neps = 0.1\nP = 0, 0, 0\n"
        "grad_tol = 1e-8\n",
        "command = foliate\nmetric = euclidean\neps_grid = 0.2, 0.1, 0.05\n"
        "P = 0, 0, 0\npin_center = true\noutput_dir = out\n",
        "command = hawking\nmetric = schwarzschild\nm = 1\nradii = 2, 3, 4\n",
    ]
    for text in texts:
        cfg = parse_config(text)
        assert parse_config(print_config(cfg)) == cfg


@settings(max_examples=40, deadline=None)
@given(
    eps=st.floats(1.0e-3, 0.5, allow_nan=False),
    p=st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)),
    L=st.integers(4, 48),
)
def test_roundtrip_property(eps, p, L):
    text = (
        "command = solve\nmetric = euclidean\n"
        f"L = {L}\neps = {eps!r}\nP = {p[0]!r}, {p[1]!r}, {p[2]!r}\n"
    )
    cfg = parse_config(text)
    assert parse_config(print_config(cfg)) == cfg


def test_print_config_full_precision():
    cfg = parse_config(
        "command = solve\nmetric = euclidean\neps = 0.1\nP = 0.1, 0.2, 0.3\n"
    )
    text = print_config(cfg)
    assert "eps = 0.10000000000000001" in text


def _write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_main_solve(tmp_path, capsys):
    cfg = _write(tmp_path, "command = solve\nmetric = euclidean\nL = 8\n"
                           "eps = 0.1\nP = 0, 0, 0\n")
    out = tmp_path / "out"
    assert main([cfg, "--output-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert abs(report["W"] - 16.0 * math.pi) <= 1.0e-10
    assert report["phi_sup"] == 0.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "solve"
    assert manifest["backend"] in ("numpy", "numba")
    assert "report.json" in manifest["files"]
    listed = capsys.readouterr().out.strip().splitlines()
    assert listed == [str(out / "report.json")]


def test_main_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path, "command = solve\nmetric = nosuch\n"
                           "eps = 0.1\nP = 0, 0, 0\n")
    assert main([bad]) == 2
    assert "unknown metric: nosuch" in capsys.readouterr().err
    assert main([str(tmp_path / "missing.cfg")]) == 2
    # domain failure inside the run: hawking sphere cuts the excluded ball
    dom = _write(tmp_path, "command = hawking\nmetric = schwarzschild\n"
                           "L = 8\nradii = 0.05\n")
    assert main([dom]) == 1
    assert "excluded ball" in capsys.readouterr().err


def test_main_hawking_and_determinism(tmp_path):
    cfg = _write(tmp_path, "command = hawking\nmetric = schwarzschild\n"
                           "m = 1\nL = 12\nradii = 2, 3\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main([cfg, "--output-dir", str(out1)]) == 0
    assert main([cfg, "--output-dir", str(out2)]) == 0
    r1 = (out1 / "report.json").read_bytes()
    assert r1 == (out2 / "report.json").read_bytes()
    rows = json.loads(r1)["rows"]
    assert all(abs(r["hawking"] - 1.0) <= 1.0e-8 for r in rows)


def test_expand_csv_shape(tmp_path):
    cfg = _write(tmp_path, "command = expand\nmetric = euclidean\nL = 8\n"
                           "eps_grid = 0.2, 0.1, 0.05\nP = 0, 0, 0\n")
    out = tmp_path / "out"
    assert main([cfg, "--output-dir", str(out)]) == 0
    lines = (out / "expand.csv").read_text().splitlines()
    assert lines[0] == EXPAND_HEADER
    assert len(lines) == 4
    # euclidean residual columns sit at roundoff
    for line in lines[1:]:
        cells = [c.strip() for c in line.split(",")]
        assert len(cells) == 7
        assert float(cells[2]) <= 1.0e-10


def test_foliate_csv_shape(tmp_path):
    cfg = _write(tmp_path, "command = foliate\nmetric = euclidean\nL = 8\n"
                           "eps_grid = 0.2, 0.1, 0.05\nP = 0, 0, 0\n"
                           "pin_center = true\n")
    out = tmp_path / "out"
    assert main([cfg, "--output-dir", str(out)]) == 0
    lines = (out / "leaves.csv").read_text().splitlines()
    assert lines[0] == LEAVES_HEADER
    assert len(lines) == 4
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"].startswith("foliation verified")
    assert report["mode"] == "pinned"


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = _write(tmp_path, "command = hawking\nmetric = schwarzschild\nL = 8\n"
                           "radii = 3\noutput_dir = nested/dir\n")
    assert main([cfg]) == 0
    assert (tmp_path / "nested" / "dir" / "report.json").exists()


def test_shipped_configs_parse():
    import pathlib
    root = pathlib.Path(__file__).resolve().parent.parent / "configs"
    files = sorted(root.glob("*.cfg"))
    assert len(files) >= 14
    for path in files:
        cfg = parse_config(path.read_text())
        assert parse_config(print_config(cfg)) == cfg


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("WILLMORE_THREADS", "1")
    cfg = _write(tmp_path, "command = hawking\nmetric = schwarzschild\nL = 8\n"
                           "radii = 3\n")
    assert main([cfg, "--output-dir", str(tmp_path / "o")]) == 0
