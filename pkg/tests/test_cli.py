import csv
import json

import pytest

from eebeam.cli import geometry_from_dict, main, system_from_dict
from eebeam.harness import CSV_COLUMNS, dbm_to_w


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


SMALL_SYSTEM = {"K": 2, "M": 2, "N": 1, "P_dbm": 40.0, "Pc_dbm": 30.0,
                "P0_dbm": 40.0}


class TestConfigParsing:
    def test_defaults(self):
        cfg = system_from_dict({})
        assert cfg.K == 3
        assert cfg.M == [4, 4, 4]
        assert cfg.P == [pytest.approx(dbm_to_w(46.0))] * 3
        # thermal noise over 10 MHz with a 9 dB noise figure
        assert cfg.sigma2[0][0] == pytest.approx(dbm_to_w(-95.0))

    def test_dbm_fields(self):
        cfg = system_from_dict({"K": 1, "P_dbm": 30.0, "Pc_dbm": 0.0,
                                "P0_dbm": 10.0, "sigma2_dbm": -90.0})
        assert cfg.P[0] == pytest.approx(1.0)
        assert cfg.Pc == pytest.approx(1e-3)
        assert cfg.sigma2[0][0] == pytest.approx(dbm_to_w(-90.0))

    def test_linear_fields_take_precedence(self):
        cfg = system_from_dict({"K": 1, "P": 2.0, "P_dbm": 0.0, "Pc": 0.5,
                                "P0": 1.0, "sigma2": 0.1})
        assert cfg.P == [2.0]
        assert cfg.Pc == 0.5

    def test_per_cell_lists(self):
        cfg = system_from_dict({"K": 2, "M": [2, 4], "N": [1, 2], "P": [1.0, 2.0],
                                "sigma2": 1.0, "Pc": 1.0, "P0": 1.0})
        assert cfg.M == [2, 4]
        assert cfg.N == [1, 2]

    def test_geometry(self):
        geom = geometry_from_dict({"cell_radius_m": 100.0,
                                   "min_user_distance_m": 70.0,
                                   "unrelated": 5})
        assert geom.cell_radius_m == 100.0


class TestCommands:
    def test_drop_and_solve(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"system": SMALL_SYSTEM})
        out = tmp_path / "chan.json"
        main(["drop", "--config", cfg_path, "--seed", "3", "--out", str(out)])
        payload = json.loads(out.read_text())
        assert payload["seed"] == 3
        assert payload["K"] == 2
        capsys.readouterr()

        main(["solve", "--config", cfg_path, "--seed", "3"])
        report = json.loads(capsys.readouterr().out)
        assert report["converged"] is True
        assert report["eta_star"] > 0
        assert len(report["per_bs_powers"]) == 2

    def test_flops(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"system": {"K": 3, "M": 4, "N": 1}})
        main(["flops", "--config", cfg_path])
        est = json.loads(capsys.readouterr().out)
        assert est == {"phi1": 324, "phi2": 489, "phi3": 26064,
                       "per_sweep_total": 324 + 489 + 26064}

    def test_parsim(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"system": SMALL_SYSTEM})
        trace_path = tmp_path / "trace.txt"
        main(["parsim", "--config", cfg_path, "--seed", "1",
              "--out", str(trace_path)])
        summary = json.loads(capsys.readouterr().out)
        assert summary["total_reals"] == summary["closed_form_reals"]
        assert trace_path.exists()

    def test_sweep(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {
            "system": SMALL_SYSTEM, "name": "cli-sweep",
            "sweep_variable": "bs_power_dbm", "sweep_values": [38.0, 42.0],
            "trials": 2, "algorithms": ["proposed"], "seed": 5})
        out = tmp_path / "res.csv"
        main(["sweep", "--config", cfg_path, "--out", str(out)])
        with open(out) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            body = list(reader)
        assert header == CSV_COLUMNS
        assert len(body) == 2 * 2 + 2  # data rows plus one mean per value
        assert (tmp_path / "res.csv.json").exists()

    def test_oracle(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {
            "system": {"K": 1, "M": 1, "N": 1, "P_dbm": 40.0, "Pc_dbm": 30.0,
                       "P0_dbm": 40.0}})
        main(["oracle", "--config", cfg_path, "--seed", "2"])
        res = json.loads(capsys.readouterr().out)
        assert res["eta_star"] > 0
        assert 0.0 <= res["p_star"] <= dbm_to_w(40.0)

    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            main([])
