import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from polarimode.cli import main

DATA = Path(__file__).parent / "data"
SOSC = str(DATA / "sosc.json")
DUO = str(DATA / "duo.json")
INVALID = str(DATA / "invalid_sum.json")
MALFORMED = str(DATA / "malformed.json")
SILICA = str(DATA / "fused_silica.json")


@pytest.fixture
def runner():
    return CliRunner()


class TestValidate:
    def test_valid_exits_zero(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "validate"])
        assert result.exit_code == 0
        assert json.loads(result.output)["valid"] is True

    def test_invalid_exits_one_and_names_inequality(self, runner):
        result = runner.invoke(main, ["--material", INVALID, "validate"])
        assert result.exit_code == 1
        body = json.loads(result.output)
        assert ">= 1" in body["violations"][0]["message"]

    def test_malformed_exits_two(self, runner):
        result = runner.invoke(main, ["--material", MALFORMED, "validate"])
        assert result.exit_code == 2

    def test_missing_file_exits_two(self, runner):
        result = runner.invoke(main, ["--material", "/no/such.json", "validate"])
        assert result.exit_code == 2

    def test_missing_material_option_exits_two(self, runner):
        result = runner.invoke(main, ["validate"])
        assert result.exit_code == 2


class TestDispersion:
    def test_sosc_two_rows(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "dispersion",
                                      "--k", "1.0"])
        assert result.exit_code == 0
        lines = result.output.strip().split("\n")
        assert lines[0] == "k,branch,omega,v_group,v_em,z"
        assert len(lines) == 3
        omegas = sorted(float(l.split(",")[2]) for l in lines[1:])
        assert omegas[0] == pytest.approx(0.8349996, abs=1e-6)
        assert omegas[1] == pytest.approx(2.0743133, abs=1e-6)

    def test_vacuum_rows(self, runner, tmp_path):
        vac = tmp_path / "vac.json"
        vac.write_text(json.dumps({"name": "v", "units": "natural",
                                   "resonances": []}))
        result = runner.invoke(main, ["--material", str(vac), "dispersion",
                                      "--k", "1", "--k", "2", "--k", "3"])
        lines = result.output.strip().split("\n")[1:]
        assert len(lines) == 3
        for line in lines:
            parts = line.split(",")
            assert float(parts[2]) == pytest.approx(float(parts[0]))

    def test_duo_grid_row_count(self, runner):
        result = runner.invoke(main, ["--material", DUO, "dispersion",
                                      "--kmin", "0.1", "--kmax", "10",
                                      "--count", "100"])
        lines = result.output.strip().split("\n")
        assert len(lines) == 1 + 300

    def test_out_file_and_determinism(self, runner, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            r = runner.invoke(main, ["--material", DUO, "--out", str(out),
                                     "dispersion", "--k", "0.7", "--k", "2.2"])
            assert r.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestBandsAndFriends:
    def test_bands_text(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "bands"])
        assert result.exit_code == 0
        assert result.output.strip() == "(1.7320508, 2.0000000)"

    def test_bands_json(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "--format", "json",
                                      "bands"])
        body = json.loads(result.output)
        assert body["bands"][0]["omega_hi"] == pytest.approx(2.0)

    def test_zdp_fused_silica(self, runner):
        result = runner.invoke(main, ["--material", SILICA, "zdp"])
        assert result.exit_code == 0
        lams = json.loads(result.output)["wavelengths_um"]
        assert any(1.25 <= lam <= 1.30 for lam in lams)

    def test_convert_sosc(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "convert",
                                      "--to", "sellmeir"])
        body = json.loads(result.output)
        assert body["poles"] == [pytest.approx(3.0)]
        assert body["strengths"] == [pytest.approx(1.0)]

    def test_index(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "index",
                                      "--omega", "1.0"])
        assert json.loads(result.output)["n_squared"][0] == pytest.approx(1.5)


class TestSumRules:
    def test_pass(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "sumrules",
                                      "--k", "1.0"])
        assert result.exit_code == 0
        assert json.loads(result.output)["all_passed"] is True

    def test_duo_grid(self, runner):
        result = runner.invoke(main, ["--material", DUO, "sumrules",
                                      "--kmin", "0.1", "--kmax", "10",
                                      "--count", "10"])
        assert result.exit_code == 0

    def test_erratum_variant_fails(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "sumrules",
                                      "--k", "1.0", "--use-erratum-vform"])
        assert result.exit_code == 1
        assert json.loads(result.output)["all_passed"] is False


class TestEigenModesKernel:
    def test_eigen_1d(self, runner):
        result = runner.invoke(main, ["--material", DUO, "eigen", "--k", "1.0"])
        assert result.exit_code == 0
        assert json.loads(result.output)["kind"] == "1d"

    def test_eigen_3d(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "eigen",
                                      "--kvec", "0,0,1"])
        body = json.loads(result.output)
        assert body["classification_counts"]["gauge"] == 1

    def test_eigen_bad_kvec(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "eigen",
                                      "--kvec", "a,b"])
        assert result.exit_code == 2

    def test_modes(self, runner):
        result = runner.invoke(main, ["--material", SOSC, "modes",
                                      "--k", "1.0"])
        body = json.loads(result.output)
        assert len(body["modes"]) == 2

    def test_kernel(self, runner):
        result = runner.invoke(main, [
            "--material", SOSC, "kernel", "--pair", "lambda_pi",
            "--width", "0.5", "--cutoff", "30"])
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert body["value_im"] == pytest.approx(body["expected_magnitude"],
                                                 rel=5e-3)

    def test_invalid_material_domain_exit(self, runner):
        result = runner.invoke(main, ["--material", INVALID, "bands"])
        assert result.exit_code == 1
