import math
import time

import numpy as np
import pytest

from nonlocal_vortex.biphoton import MIXED, POSITION, BiphotonState, prob_map
from nonlocal_vortex.cli import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, NUMERIC_BANNER, main
from nonlocal_vortex.config import ENV_CONFIG, ConfigError, RunConfig, load_config, write_config_file
from nonlocal_vortex.grid import Axis
from nonlocal_vortex.io import read_csv, read_pgm16, write_csv


def run(args, out):
    return main(list(args) + ["--out", str(out)])


def test_csv_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(7, 5)) * 10.0 ** rng.integers(-300, 300, size=(7, 5))
    write_csv(tmp_path / "a.csv", vals, {"kind": "test"})
    meta, back = read_csv(tmp_path / "a.csv")
    assert meta == {"kind": "test"}
    np.testing.assert_array_equal(back, vals)
    assert b"\r" not in (tmp_path / "a.csv").read_bytes()


@pytest.mark.parametrize("plane", [POSITION, MIXED])
def test_coincidence_map_round_trip(plane, out_dir):
    assert run(["coincidence-map", "--plane", plane], out_dir) == EXIT_OK
    meta, vals = read_csv(out_dir / f"coincidence_{plane}.csv")
    ax = Axis.centered(128, 6.0 * math.sqrt(2)) if plane == POSITION else Axis.centered(128, 6.0)
    ref = prob_map(BiphotonState.hg10(), plane, ax, ax)
    np.testing.assert_array_equal(vals, ref.values)
    assert meta["config_sha256"] == RunConfig(plane=plane).sha256
    assert "n=128" in meta["axis1"] and "n=128" in meta["axis2"]
    img = read_pgm16(out_dir / f"coincidence_{plane}.pgm")
    assert img.shape == (128, 128) and img.max() == 65535


def test_mixed_map_doughnut(out_dir):
    run(["coincidence-map", "--plane", "mixed"], out_dir)
    _, vals = read_csv(out_dir / "coincidence_mixed.csv")
    assert vals[64, 64] == 0 and vals.max() > 0


def test_position_map_node_on_anti_sum_line(out_dir):
    run(["coincidence-map", "--plane", "position"], out_dir)
    _, vals = read_csv(out_dir / "coincidence_position.csv")
    idx = np.arange(1, 128)  # coordinate of index i is (i - 64) * step, so i pairs with 128 - i
    assert np.all(vals[idx, 128 - idx] <= 1e-10 * vals.max())


def test_gaussian_mixed_map_single_blob(out_dir):
    run(["coincidence-map", "--pump", "gauss"], out_dir)
    _, vals = read_csv(out_dir / "coincidence_mixed.csv")
    assert np.unravel_index(np.argmax(vals), vals.shape) == (64, 64)


def test_determinism_with_noise(tmp_path):
    args = ["coincidence-map", "--noise-events", "50000", "--seed", "9"]
    run(args, tmp_path / "a")
    run(args, tmp_path / "b")
    for name in ("coincidence_mixed.csv", "counts_mixed.csv", "counts_mixed.pgm"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    run(["coincidence-map", "--noise-events", "50000", "--seed", "10"], tmp_path / "c")
    assert (tmp_path / "a" / "counts_mixed.csv").read_bytes() != (tmp_path / "c" / "counts_mixed.csv").read_bytes()


def test_noise_requires_seed(out_dir, capsys):
    assert run(["coincidence-map", "--noise-events", "100"], out_dir) == EXIT_CONFIG
    assert "seed" in capsys.readouterr().err


def test_bad_config_values(out_dir):
    assert run(["coincidence-map", "--sigma", "-1"], out_dir) == EXIT_CONFIG
    assert run(["coincidence-map", "--samples", "abc"], out_dir) == EXIT_CONFIG
    assert run(["fringes", "--slit-width-um", "300"], out_dir) == EXIT_CONFIG


def test_non_power_of_two_warns(out_dir, capsys):
    assert run(["coincidence-map", "--samples", "100"], out_dir) == EXIT_OK
    assert "power of two" in capsys.readouterr().err


def test_config_file_env_and_flag_precedence(tmp_path, monkeypatch):
    path = tmp_path / "run.ini"
    write_config_file(RunConfig(pump="gauss", samples=64), path)
    monkeypatch.setenv(ENV_CONFIG, str(path))
    cfg = load_config()
    assert cfg.pump == "gauss" and cfg.samples == 64
    cfg = load_config(overrides={"pump": "hg10"})
    assert cfg.pump == "hg10" and cfg.samples == 64
    bad = tmp_path / "bad.ini"
    bad.write_text("[grid]\npump = hg10\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_config_file_comments_and_lists(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[lab]\ndetector1 = 0.1, 0.25, 0.4  # mm\n[state]\npump = gauss\n")
    cfg = load_config(path)
    assert cfg.detector1 == (0.1, 0.25, 0.4) and cfg.pump == "gauss"


def test_fringes_outputs(out_dir, capsys):
    assert run(["fringes"], out_dir) == EXIT_OK
    meta, rows = read_csv(out_dir / "fringe_shifts.csv")
    shift, predicted = rows[0, 2], rows[0, 3]
    assert abs(((shift - predicted) + 0.5) % 1.0 - 0.5) <= 0.01
    assert abs(shift) >= 0.35
    _, scan = read_csv(out_dir / "fringes_0.csv")
    assert scan.shape == (161, 3)


def test_fringes_gaussian_pump_null(out_dir):
    run(["fringes", "--pump", "gauss"], out_dir)
    _, rows = read_csv(out_dir / "fringe_shifts.csv")
    assert abs(rows[0, 2]) <= 0.02


def test_fringes_single_position(out_dir):
    run(["fringes", "--detector1", "0.2"], out_dir)
    assert (out_dir / "fringes_0.csv").exists()
    assert not (out_dir / "fringe_shifts.csv").exists()


def test_vortex_report_default(out_dir):
    assert run(["vortex-report"], out_dir) == EXIT_OK
    text = (out_dir / "vortex_report.txt").read_text()
    assert "verdict: entangled" in text
    assert "singularities: 1" in text and "charge=-1" in text
    assert "schmidt_spectrum (analytic): 0.70710678, 0.70710678" in text
    assert NUMERIC_BANNER not in text


def test_vortex_report_gaussian_and_unmatched(out_dir):
    run(["vortex-report", "--pump", "gauss"], out_dir)
    assert "verdict: separable" in (out_dir / "vortex_report.txt").read_text()
    run(["vortex-report", "--sigma", "2.0", "--delta", "1.0"], out_dir)
    text = (out_dir / "vortex_report.txt").read_text()
    assert text.splitlines()[1] == NUMERIC_BANNER
    assert "verdict: entangled" in text


def test_validate_default_passes(out_dir):
    assert run(["validate"], out_dir) == EXIT_OK


def test_validate_coarse_grid_fails(out_dir, capsys):
    assert run(["validate", "--samples", "16"], out_dir) == EXIT_VALIDATION
    out = capsys.readouterr().out
    assert "FAIL  oracle equivalence" in out and "aliasing" in out


def test_validate_quick_is_fast(out_dir, capsys):
    t0 = time.perf_counter()
    assert run(["validate", "--quick"], out_dir) == EXIT_OK
    assert time.perf_counter() - t0 < 10.0
    assert "fringe shifts" not in capsys.readouterr().out


def test_apertures_in_detector_units(out_dir):
    run(["coincidence-map", "--aperture1-um", "20", "--aperture2-um", "50"], out_dir)
    meta, vals = read_csv(out_dir / "coincidence_mixed.csv")
    assert "apertures" in meta and vals[64, 64] > 0
    assert np.sum(vals) * (12.0 / 128) ** 2 == pytest.approx(1.0, abs=1e-6)
