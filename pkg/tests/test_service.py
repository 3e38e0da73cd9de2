import json
import math
import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from polarimode.service import app

SOSC = {"name": "sosc", "dimension": 1, "units": "natural",
        "resonances": [{"omega2": 4.0, "g": 1.0}]}
DUO = {"name": "duo", "dimension": 1, "units": "natural",
       "resonances": [{"omega2": 4.0, "g": 1.0}, {"omega2": 25.0, "g": 2.0}]}
INVALID = {"name": "bad", "units": "natural",
           "resonances": [{"omega2": 4.0, "g": 5.0}]}


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestValidateEndpoint:
    def test_valid(self, client):
        r = client.post("/validate", json={"material": SOSC})
        assert r.status_code == 200
        assert r.json()["valid"] is True

    def test_invalid_material_reports(self, client):
        r = client.post("/validate", json={"material": INVALID})
        assert r.status_code == 200
        body = r.json()
        assert body["valid"] is False
        assert body["violations"][0]["code"] == "coupling_sum"

    def test_schema_error_is_400(self, client):
        r = client.post("/validate", json={"material": {"units": "bogus"}})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "request_schema"


class TestDispersionEndpoint:
    def test_csv(self, client):
        r = client.post("/dispersion", json={
            "material": SOSC, "k_values": [1.0], "format": "csv"})
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("text/csv")
        lines = r.text.strip().split("\n")
        assert lines[0] == "k,branch,omega,v_group,v_em,z"
        assert len(lines) == 3

    def test_json_rows(self, client):
        r = client.post("/dispersion", json={
            "material": DUO,
            "k_grid": {"min": 0.5, "max": 1.5, "count": 4, "spacing": "linear"},
            "format": "json"})
        rows = r.json()["rows"]
        assert len(rows) == 4 * 3
        assert rows[0]["branch"] == 0

    def test_exactly_one_grid_source(self, client):
        r = client.post("/dispersion", json={
            "material": SOSC, "k_values": [1.0],
            "k_grid": {"min": 0.5, "max": 1.5}})
        assert r.status_code == 400

    def test_determinism(self, client):
        payload = {"material": DUO, "k_values": [0.4, 1.1], "format": "csv"}
        a = client.post("/dispersion", json=payload).text
        b = client.post("/dispersion", json=payload).text
        assert a == b

    def test_domain_error_422(self, client):
        r = client.post("/dispersion", json={
            "material": INVALID, "k_values": [1.0]})
        assert r.status_code == 422
        assert r.json()["error"]["code"] == "invalid_material"


class TestIndexEndpoint:
    def test_values(self, client):
        r = client.post("/index", json={
            "material": SOSC, "omega_values": [1.0, 0.0, 1.9]})
        vals = r.json()["n_squared"]
        assert vals[0] == pytest.approx(1.5)
        assert vals[1] == pytest.approx(4.0 / 3.0)
        assert vals[2] < 0.0

    def test_singular_point_422(self, client):
        r = client.post("/index", json={"material": SOSC, "omega_values": [2.0]})
        assert r.status_code == 422
        assert r.json()["error"]["code"] == "singular_point"

    def test_alpha_without_k_is_400(self, client):
        mat = {"name": "a", "units": "natural",
               "resonances": [{"omega2": 4.0, "g": 1.0, "alpha": 0.5}]}
        r = client.post("/index", json={"material": mat, "omega_values": [1.0]})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "bad_request"

    def test_nonpositive_k_is_400(self, client):
        r = client.post("/dispersion", json={"material": SOSC,
                                             "k_values": [0.0]})
        assert r.status_code == 400


class TestBandsAndZdp:
    def test_bands(self, client):
        r = client.post("/bands", json={"material": SOSC})
        (band,) = r.json()["bands"]
        assert band["omega_lo"] == pytest.approx(math.sqrt(3.0))
        assert band["omega_hi"] == pytest.approx(2.0)

    def test_zdp_natural_no_wavelengths(self, client):
        r = client.post("/zdp", json={"material": SOSC})
        body = r.json()
        assert body["omegas"] == []
        assert body["wavelengths_um"] is None

    def test_zdp_fused_silica(self, client):
        from pathlib import Path

        silica = Path(__file__).parent / "data" / "fused_silica.json"
        material = json.loads(silica.read_text(encoding="utf-8"))
        r = client.post("/zdp", json={"material": material})
        lams = r.json()["wavelengths_um"]
        assert any(1.25 <= lam <= 1.30 for lam in lams)


class TestConvertEndpoint:
    def test_to_sellmeir(self, client):
        r = client.post("/convert", json={"material": SOSC, "to": "sellmeir"})
        body = r.json()["sellmeir"]
        assert body["poles"] == [pytest.approx(3.0)]
        assert body["strengths"] == [pytest.approx(1.0)]

    def test_to_multipolar_roundtrip(self, client):
        r = client.post("/convert", json={"material": DUO, "to": "multipolar"})
        mat = r.json()["material"]
        got = sorted(res["omega2"] for res in mat["resonances"])
        assert got == [pytest.approx(4.0), pytest.approx(25.0)]


class TestSumRulesEndpoint:
    def test_pass(self, client):
        r = client.post("/sumrules", json={
            "material": DUO, "k_values": [0.5, 1.0, 2.0]})
        body = r.json()
        assert body["all_passed"] is True
        assert all(rep["pass"] for rep in body["reports"])
        assert set(body["reports"][0]) == {
            "k", "s1", "s2_max_offdiag", "s2_max_diag_err", "s3_max",
            "residue_s1", "pass", "erratum_variant_s3"}

    def test_erratum_variant_fails(self, client):
        r = client.post("/sumrules", json={
            "material": SOSC, "k_values": [1.0], "use_erratum_vform": True})
        body = r.json()
        assert body["all_passed"] is False
        assert body["reports"][0]["erratum_variant_s3"] == pytest.approx(
            0.1984, abs=5e-4)


class TestEigenEndpoint:
    def test_1d(self, client):
        r = client.post("/eigen", json={"material": SOSC, "k": 1.0})
        body = r.json()
        assert body["kind"] == "1d"
        assert body["max_normalization_residual"] < 1e-10

    def test_3d(self, client):
        r = client.post("/eigen", json={"material": SOSC,
                                        "k_vector": [0.0, 0.0, 1.0]})
        body = r.json()
        assert body["classification_counts"] == {
            "transverse": 4, "longitudinal": 1, "gauge": 1}

    def test_requires_exactly_one(self, client):
        r = client.post("/eigen", json={"material": SOSC})
        assert r.status_code == 400


class TestModesEndpoint:
    def test_1d_table(self, client):
        r = client.post("/modes", json={"material": SOSC, "k_values": [1.0]})
        rows = r.json()["modes"]
        assert len(rows) == 2
        row = rows[0]
        assert set(row) >= {"omega", "v", "v_em", "Lambda", "Pi_im", "p",
                            "pi", "D_coef", "E_coef", "B_coef"}
        assert row["Pi_im"] == pytest.approx(-row["omega"] * row["Lambda"])

    def test_longitudinal_table(self, client):
        mat = dict(SOSC, dimension=3)
        r = client.post("/modes", json={"material": mat, "k_values": [1.0],
                                        "sigma": 0})
        rows = r.json()["modes"]
        assert len(rows) == 1
        assert rows[0]["omega"] == pytest.approx(2.0)

    def test_transverse_sigma(self, client):
        mat = dict(SOSC, dimension=3)
        r = client.post("/modes", json={"material": mat, "k_values": [1.0],
                                        "sigma": 1})
        assert len(r.json()["modes"]) == 2


class TestKernelEndpoint:
    def test_lambda_pi(self, client):
        r = client.post("/kernel", json={
            "material": SOSC, "pair": "lambda_pi",
            "center": 0.0, "width": 0.5, "cutoff": 40.0})
        body = r.json()
        assert body["value_im"] == pytest.approx(body["expected_magnitude"],
                                                 rel=5e-3)

    def test_cutoff_guard_422(self, client):
        r = client.post("/kernel", json={
            "material": SOSC, "pair": "lambda_pi",
            "center": 0.0, "width": 0.5, "cutoff": 2.0})
        assert r.status_code == 422
        assert r.json()["error"]["code"] == "cutoff_too_small"


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200 and r.json() == {"status": "ok"}


def test_openapi_lists_all_routes(client):
    spec = client.get("/openapi.json").json()
    paths = set(spec["paths"])
    assert paths >= {"/validate", "/dispersion", "/index", "/bands", "/zdp",
                     "/convert", "/sumrules", "/eigen", "/modes", "/kernel",
                     "/health"}
