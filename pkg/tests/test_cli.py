import json

import pytest

from hess2.cli import RunConfig, main, parse_dims, parse_domain, parse_source


class TestParsers:
    def test_dims_range(self):
        assert parse_dims("2..5") == (2, 3, 4, 5)
        assert parse_dims("3") == (3,)
        assert parse_dims("2,4,8") == (2, 4, 8)

    def test_source_presets(self):
        assert parse_source("const:2").label() == "const:2"
        assert parse_source("exp-dec").preset == "exp-dec"
        assert parse_source("power:1,0.5").params == (1.0, 0.5)
        assert parse_source("eigen:28").params == (28.0,)

    def test_domain_presets(self):
        assert parse_domain("disk:1").kind == "ball"
        assert parse_domain("ellipse:2,1").semi_axes == (2.0, 1.0)
        poly = parse_domain("polygon:-1,-1;1,-1;1,1;-1,1")
        assert poly.kind == "polygon" and len(poly.vertices) == 4

    def test_config_roundtrip(self):
        cfg = RunConfig("ineq", {"seed": "42", "dims": "2..8", "count": "1000"})
        again = RunConfig.from_text(cfg.canonical_text())
        assert again == cfg
        assert RunConfig.from_text(again.canonical_text()) == again


class TestIneqCommand:
    def test_positive_campaign(self, tmp_path):
        out = tmp_path / "ineq"
        code = main(["ineq", "--dims", "2..4", "--count", "400", "--seed", "42",
                     "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["ok"]
        assert set(summary["per_dim"]) == {"2", "3", "4"}
        for dim in (2, 3, 4):
            lines = (out / f"records_dim{dim}.csv").read_text().splitlines()
            assert lines[0] == ("seed,dim,sign,index,lhs,rhs,residual_direct,"
                                "residual_closed,scale")
            assert lines[1].startswith(f"42,{dim},positive,0,")

    def test_negative_campaign(self, tmp_path):
        out = tmp_path / "neg"
        code = main(["ineq", "--dims", "4,5", "--count", "400", "--sign",
                     "negative", "--seed", "1", "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        for block in summary["per_dim"].values():
            assert block["max_residual_over_scale"] <= 1e-9

    def test_dimension_three_identity(self, tmp_path):
        out = tmp_path / "id3"
        code = main(["ineq", "--dims", "3", "--count", "2000", "--sign",
                     "indefinite", "--seed", "5", "--out", str(out)])
        assert code == 0
        block = json.loads((out / "summary.json").read_text())["per_dim"]["3"]
        assert abs(block["min_residual_over_scale"]) <= 1e-10
        assert abs(block["max_residual_over_scale"]) <= 1e-10

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["ineq", "--dims", "2..3", "--count", "300",
                         "--seed", "9", "--out", str(out)]) == 0
        for name in ("summary.json", "records_dim2.csv", "records_dim3.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        out = tmp_path / "from-config"
        cfg.write_text(f"command=ineq\nseed=9\ndims=2..3\ncount=150\n"
                       f"sign=negative\nout={out}\n")
        assert main(["--config", str(cfg)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["sign"] == "negative"
        assert set(summary["per_dim"]) == {"2", "3"}

    def test_cli_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        out = tmp_path / "override"
        cfg.write_text("command=ineq\nseed=9\ndims=2..3\ncount=150\n")
        assert main(["ineq", "--config", str(cfg), "--dims", "2",
                     "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["per_dim"]) == {"2"}


class TestSolveCommand:
    def test_radial_solve(self, tmp_path):
        out = tmp_path / "rad"
        code = main(["solve", "--radial", "--dim", "3", "--f", "const:1",
                     "--nodes", "512", "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["u_min"] == pytest.approx(-0.2886751345948129, abs=1e-6)
        assert (out / "solution.npz").exists()
        first = (out / "profile.dat").read_text().splitlines()
        assert first[0].startswith("# r u up")

    def test_grid_solve(self, tmp_path):
        out = tmp_path / "grid"
        code = main(["solve", "--grid2d", "--domain", "disk:1", "--f", "const:1",
                     "--h", "0.03125", "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["u_min"] == pytest.approx(-0.5, abs=2e-3)
        assert summary["boundary_gradient_min"] == pytest.approx(1.0, abs=2e-3)
        assert summary["boundary_gradient_max"] == pytest.approx(1.0, abs=2e-3)

    def test_eigen_solve(self, tmp_path):
        out = tmp_path / "eig"
        code = main(["solve", "--eigen", "--dim", "3", "--nodes", "512",
                     "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["lambda1"] == pytest.approx(28.1434, abs=1e-3)
        assert summary["ode_residual_sup"] <= 1e-6

    def test_bad_input_exits_two(self, tmp_path):
        assert main(["solve", "--radial", "--dim", "1",
                     "--out", str(tmp_path / "bad")]) == 2

    def test_unsolvable_exits_three(self, tmp_path):
        # Unit-rate decreasing exponential on the wide ellipse sits beyond the
        # solvability fold; the solver reports a stall.
        code = main(["solve", "--grid2d", "--domain", "ellipse:2,1",
                     "--f", "exp-dec:1.5", "--h", "0.0625",
                     "--out", str(tmp_path / "fold")])
        assert code == 3


class TestVerifyCommand:
    def test_application1_radial(self, tmp_path):
        out = tmp_path / "v1"
        code = main(["verify", "--app", "1", "--radial", "--dim", "3",
                     "--alpha", "1", "--gamma", "0.5", "--nodes", "512",
                     "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["all_hold"]
        slack = report["bounds"]["gamma=0.5"]["slack"]
        assert slack == pytest.approx(0.2440169358562925, abs=1e-5)
        rows = (out / "verdicts.csv").read_text().splitlines()
        assert rows[0] == "domain,f,alpha,gamma,margin,slack,holds"
        assert rows[1].endswith("true")

    def test_application1_disk_equality(self, tmp_path):
        out = tmp_path / "v1g"
        code = main(["verify", "--app", "1", "--grid2d", "--domain", "disk:1",
                     "--f", "const:1", "--h", "0.03125", "--alpha", "1",
                     "--gamma", "0.5", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert abs(report["bounds"]["gamma=0.5"]["slack"]) <= 5 * 0.03125**2

    def test_application3_high_exponent_rejected(self, tmp_path):
        code = main(["verify", "--app", "3", "--p", "2.5",
                     "--out", str(tmp_path / "v3")])
        assert code == 2

    def test_application3_valid_exponent(self, tmp_path):
        out = tmp_path / "v3ok"
        code = main(["verify", "--app", "3", "--p", "0.5", "--lam", "1",
                     "--nodes", "512", "--gamma", "0.5", "--alpha", "1",
                     "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["bounds"]["gamma=0.5"]["holds"]


class TestIdentityScanCommand:
    def test_scan(self, tmp_path):
        out = tmp_path / "scan"
        code = main(["identity-scan", "--seed", "0", "--count", "40",
                     "--out", str(out)])
        assert code == 0
        payload = json.loads((out / "identities.json").read_text())
        assert payload["euler_gap_worst_over_scale"] <= 1e-10
        assert payload["philippin_safoui_min_gap_over_scale"] >= -1e-9
        fit = payload["h2_convention"]
        assert fit["closes_with_gradient_factor"]
        assert fit["factor_vs_gradnorm_times_s2kappa"] == pytest.approx(1.0, abs=1e-10)
