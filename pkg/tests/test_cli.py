import csv
import json
import time

import numpy as np
import pytest

from topobatt.cli import main
from topobatt.phases import phase_boundaries


def write_config(path, **overrides):
    base = {
        "J": 1.0, "delta": 0.5, "kappa_a": 0.0, "kappa_b": 0.0,
        "Delta": 0.0, "Omega": 0.0, "g": 1.0,
        "x1": -1, "alpha": "B", "x2": 0, "beta": "A", "omega_e": 1.0,
    }
    base.update(overrides)
    path.write_text(json.dumps(base))
    return path


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_config_error_names_key_and_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"delta": 1.4}')
    code = main(["bound-states", "--config", str(cfg), "--out", str(tmp_path / "o.csv")])
    assert code == 2
    assert "delta" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{delta: nope")
    code = main(["bound-states", "--config", str(cfg), "--out", str(tmp_path / "o.csv")])
    assert code == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_bound_states_zero_energy_row(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "poles.csv"
    assert main(["bound-states", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_rows(out)
    zero = [r for r in rows if abs(float(r["energy_re"])) < 1e-9]
    assert len(zero) == 1
    assert float(zero[0]["res_abs"]) <= 1e-8
    assert int(zero[0]["multiplicity"]) == 2
    assert (tmp_path / "poles.csv.manifest.json").exists()


def test_bound_states_empty_for_decoupled_atoms(tmp_path):
    cfg = write_config(tmp_path / "c.json", g=0.0)
    out = tmp_path / "poles.csv"
    assert main(["bound-states", "--config", str(cfg), "--out", str(out)]) == 0
    assert read_rows(out) == []


def test_bound_states_delta_scan_has_delta_column(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "scan.csv"
    assert main(["bound-states", "--config", str(cfg), "--out", str(out),
                 "--delta-scan", "0.3:0.7:0.2"]) == 0
    rows = read_rows(out)
    assert {float(r["delta"]) for r in rows} == {0.3, 0.5, 0.7}
    assert "res_abs" in rows[0]


def test_dynamics_rabi_csv(tmp_path):
    cfg = write_config(tmp_path / "c.json", g=0.0, Omega=1.0, x1=0, alpha="A",
                       beta="A")
    out = tmp_path / "dyn.csv"
    assert main(["dynamics", "--config", str(cfg), "--tmax", "10",
                 "--dt", "0.1", "--out", str(out)]) == 0
    rows = read_rows(out)
    for row in rows:
        t = float(row["t"])
        assert abs(float(row["abs2_cB"]) - np.sin(t) ** 2) <= 1e-9
        assert abs(float(row["norm"]) - 1.0) <= 1e-9
    assert rows[0]["power"] == "nan"


def test_dynamics_light_cone_exit_4(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    code = main(["dynamics", "--config", str(cfg), "--tmax", "50", "--N", "10",
                 "--out", str(tmp_path / "d.csv")])
    assert code == 4
    assert "N >= 205" in capsys.readouterr().err


def test_dynamics_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    for out in (out_a, out_b):
        assert main(["dynamics", "--config", str(cfg), "--tmax", "8",
                     "--dt", "0.2", "--out", str(out)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_dynamics_ergotropy_ordering_under_dissipation(tmp_path):
    finals = {}
    for kappa in (0.0, 0.1, 0.3):
        cfg = write_config(tmp_path / f"c{kappa}.json", delta=-0.26, g=0.1,
                           kappa_a=kappa)
        out = tmp_path / f"dyn{kappa}.csv"
        assert main(["dynamics", "--config", str(cfg), "--tmax", "150",
                     "--dt", "5", "--out", str(out)]) == 0
        finals[kappa] = float(read_rows(out)[-1]["ergotropy"])
    assert finals[0.0] > finals[0.1] > finals[0.3]


def test_sweep_smoke_grid(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "grid.csv"
    overlay = tmp_path / "overlay.csv"
    t0 = time.time()
    assert main(["sweep", "--kind", "mse", "--config", str(cfg),
                 "--delta-grid=-0.6:0.6:0.3", "--g-grid=0.2:1.4:0.3",
                 "--out", str(out), "--overlay-out", str(overlay)]) == 0
    assert time.time() - t0 < 60.0
    rows = read_rows(out)
    assert len(rows) == 5 * 5
    # delta-major deterministic ordering
    deltas = [float(r["delta"]) for r in rows]
    assert deltas == sorted(deltas)
    for row in rows:
        assert 0.0 <= float(row["value"]) <= 1.0 + 1e-9
    # overlay rows satisfy the closed form when re-evaluated
    for row in read_rows(overlay):
        if row["curve"] == "l1":
            bp = phase_boundaries(float(row["delta"]), -1)
            assert float(row["g"]) == pytest.approx(bp.l1, abs=1e-12)
        if row["curve"] == "l2":
            bp = phase_boundaries(float(row["delta"]), -1)
            assert float(row["g"]) == pytest.approx(bp.l2, abs=1e-12)


def test_zeno_csv(tmp_path):
    cfg = write_config(tmp_path / "c.json", delta=0.9, Delta=1.0, Omega=-1.0,
                       g=1.0, x1=0, alpha="A", beta="A")
    out = tmp_path / "zeno.csv"
    e0 = 2.3781883753848616
    kq = 4 * e0
    grid = ",".join(str(v) for v in (0.0, 0.5 * kq, 2 * kq, 5 * kq, 20 * kq, 50 * kq))
    assert main(["zeno", "--config", str(cfg), "--kappa-grid", grid,
                 "--tmax-power", "6", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 6
    first = rows[0]
    # kappa = 0 row reduces to the coherent pair
    assert float(first["kappa"]) == 0.0
    assert abs(float(first["slow_im"])) <= 1e-10
    assert abs(abs(float(first["slow_re"])) - e0) <= 1e-9
    assert float(first["E0"]) == pytest.approx(e0, abs=1e-9)
    assert float(first["kappa_qze"]) == pytest.approx(kq, abs=1e-8)
    # slow pole lifetime grows with kappa in the Zeno regime:
    # log-log slope of |Im| over the last decade is -1 +- 0.1
    tail = [r for r in rows if float(r["kappa"]) >= 5 * kq]
    ks = np.array([float(r["kappa"]) for r in tail])
    ims = np.array([abs(float(r["slow_im"])) for r in tail])
    slope = np.polyfit(np.log(ks), np.log(ims), 1)[0]
    assert abs(slope + 1.0) <= 0.1


def test_zeno_rejects_separated_atoms(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    code = main(["zeno", "--config", str(cfg), "--kappa-grid", "0,1",
                 "--out", str(tmp_path / "z.csv")])
    assert code == 2
    assert "same-cavity" in capsys.readouterr().err


def test_greens_json_asymptotics(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    assert main(["greens", "--config", str(cfg), "--z", "100", "--x", "0",
                 "--sublattices", "AA"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert abs(data["re"] - 0.01) <= 1e-3
    assert data["method"] == "quadrature"
    assert data["est_error"] <= 1e-10


def test_greens_oracle_flag(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    assert main(["greens", "--config", str(cfg), "--z", "3.0", "--x", "1",
                 "--sublattices", "AB", "--oracle-n", "400"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["oracle_abs_diff"] <= 1e-6


def test_greens_gap_value_real(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    assert main(["greens", "--config", str(cfg), "--z", "0.5", "--x", "0",
                 "--sublattices", "BB"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert abs(data["im"]) <= 1e-10


def test_greens_on_spectrum_exit_4(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    code = main(["greens", "--config", str(cfg), "--z", "1.5", "--x", "0",
                 "--sublattices", "AA"])
    assert code == 4
    assert "spectrum" in capsys.readouterr().err


def test_boundaries_csv(tmp_path):
    out = tmp_path / "curves.csv"
    assert main(["boundaries", "--d=-2", "--delta-grid=-0.9:0.9:0.1",
                 "--out", str(out)]) == 0
    rows = read_rows(out)
    curves = {r["curve"] for r in rows}
    assert curves == {"l0", "l1", "l2"}
    for row in rows:
        if row["curve"] == "l2":
            bp = phase_boundaries(float(row["delta"]), -2)
            assert float(row["g"]) == pytest.approx(bp.l2, abs=1e-12)
