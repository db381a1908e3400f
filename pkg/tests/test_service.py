import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import bnrisk as b
from bnrisk import analytics, persist
from bnrisk.cli import main as cli_main
from bnrisk.data import save_dataset
from bnrisk.service import SessionModel, create_app

from conftest import make_net


@pytest.fixture(scope="module")
def session(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc")
    out = tmp / "ref"
    assert cli_main(["reference-model", "--out", str(out)]) == 0
    posterior = b.load_model(out / "model.json")
    net = b.posterior_mean_network(posterior)
    ds = b.forward_sample(net, 40_000, seed=21)
    yes = posterior.schema.state_index("v_CRC", "yes")
    positives = ds.select(ds.column("v_CRC") == yes, name="positives")
    positives = b.Dataset(posterior.schema, positives.codes[:10], positives.years[:10], "positives")
    return SessionModel(
        posterior=posterior,
        net=net,
        model_id=persist.model_id(posterior),
        positives=positives,
    ), out / "model.json"


@pytest.fixture(scope="module")
def client(session):
    return TestClient(create_app(session=session[0]))


class TestModelEndpoint:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"

    def test_model_lists_fourteen_variables(self, client):
        r = client.get("/model")
        assert r.status_code == 200
        body = r.json()
        assert len(body["schema"]["variables"]) == 14
        assert body["alpha"] == pytest.approx(31.69)
        assert body["model_id"].startswith("sha256:")

    def test_no_model_gives_503(self):
        empty = TestClient(create_app())
        assert empty.get("/model").status_code == 503
        assert empty.post("/query", json={"evidence": {}, "target": "v_CRC"}).status_code == 503

    def test_immutable_between_reads(self, client):
        a = client.get("/model").json()
        bb = client.get("/model").json()
        assert a == bb


class TestQueryEndpoint:
    def test_empty_evidence_marginal(self, client, session):
        r = client.post("/query", json={"evidence": {}, "target": "v_CRC"})
        assert r.status_code == 200
        body = r.json()
        lib = b.query(session[0].net, {}, "v_CRC")
        np.testing.assert_allclose(body["distribution"], lib.distribution, atol=0)
        assert body["states"] == ["yes", "no"]

    def test_labels_and_indices_accepted(self, client):
        r1 = client.post("/query", json={"evidence": {"v_sex": "male"}, "target": "v_CRC"})
        r2 = client.post("/query", json={"evidence": {"v_sex": 1}, "target": "v_CRC"})
        assert r1.json() == r2.json()

    def test_target_in_evidence_400(self, client):
        r = client.post("/query", json={"evidence": {"v_CRC": "yes"}, "target": "v_CRC"})
        assert r.status_code == 400

    def test_malformed_body_400(self, client):
        assert client.post("/query", json={"evidence": 7}).status_code == 400
        assert client.post("/query", json={"target": 3, "evidence": {}}).status_code == 400

    def test_unknown_variable_400(self, client):
        r = client.post("/query", json={"evidence": {"bogus": 0}, "target": "v_CRC"})
        assert r.status_code == 400

    def test_impossible_evidence_422(self):
        # a hand net with a structurally impossible configuration
        net = make_net(
            [("A", ("0", "1")), ("T", ("0", "1"))],
            [("A", "T")],
            {"A": [[1.0, 0.0]], "T": [[0.5, 0.5], [0.5, 0.5]]},
        )
        schema = net.schema
        post = b.ParameterPosterior(
            schema, net.dag,
            {"A": np.array([[1.0, 1.0]]), "T": np.array([[1.0, 1.0], [1.0, 1.0]])},
            alpha=2.0,
        )
        session = SessionModel(posterior=post, net=net, model_id="sha256:test")
        c = TestClient(create_app(session=session))
        r = c.post("/query", json={"evidence": {"A": 1}, "target": "T"})
        assert r.status_code == 422

    def test_matches_cli_query(self, client, session, tmp_path):
        out = tmp_path / "q"
        assert cli_main(
            ["query", "--model", str(session[1]), "--evidence", "v_sex=male",
             "--evidence", "v_smok=smoker", "--target", "v_CRC", "--out", str(out)]
        ) == 0
        cli_payload = json.loads((out / "query.json").read_text())
        r = client.post(
            "/query",
            json={"evidence": {"v_sex": "male", "v_smok": "smoker"}, "target": "v_CRC"},
        )
        assert r.json() == cli_payload


class TestRiskmapEndpoint:
    def test_grid_length_matches_axis_cardinality(self, client):
        r = client.post(
            "/riskmap",
            json={
                "target": "v_CRC", "target_state": "yes",
                "condition": {"v_sex": "female"}, "axes": ["v_SD"],
                "n_param_samples": 25, "seed": 5,
            },
        )
        assert r.status_code == 200
        assert len(r.json()["cells"]) == 3

    def test_same_seed_identical_json(self, client):
        body = {
            "target": "v_CRC", "target_state": "yes", "condition": {},
            "axes": ["v_age"], "n_param_samples": 20, "seed": 9,
        }
        r1 = client.post("/riskmap", json=body)
        r2 = client.post("/riskmap", json=body)
        assert r1.content == r2.content

    def test_byte_identical_to_library(self, client, session):
        spec = b.RiskMapSpec(
            target="v_CRC", target_state="yes", condition={"v_sex": "male"},
            axes=("v_age",), n_param_samples=15, seed=4,
        )
        expected = analytics.riskmap_to_obj(b.risk_map(session[0].posterior, spec))
        r = client.post(
            "/riskmap",
            json={
                "target": "v_CRC", "target_state": "yes",
                "condition": {"v_sex": "male"}, "axes": ["v_age"],
                "n_param_samples": 15, "seed": 4,
            },
        )
        assert r.json() == json.loads(json.dumps(expected))

    def test_axis_in_condition_400(self, client):
        r = client.post(
            "/riskmap",
            json={"target": "v_CRC", "target_state": "yes",
                  "condition": {"v_SD": "short"}, "axes": ["v_SD"], "seed": 1},
        )
        assert r.status_code == 400


class TestInfluenceEndpoint:
    def test_sample_count_contract(self, client):
        r = client.post(
            "/influence",
            json={"target": "v_CRC", "target_state": "yes", "iterations": 5, "seed": 3},
        )
        assert r.status_code == 200
        body = r.json()
        for v in body["variables"]:
            assert v["count"] == 50  # 10 positives x 5 iterations

    def test_inline_rows(self, client, session):
        schema = session[0].posterior.schema
        rows = [
            {v.name: v.states[0] for v in schema.variables if v.name != "v_CRC"}
            for _ in range(3)
        ]
        r = client.post(
            "/influence",
            json={"target": "v_CRC", "target_state": "yes", "iterations": 2, "seed": 1, "rows": rows},
        )
        assert r.status_code == 200
        assert r.json()["n_rows"] == 3

    def test_budget_overflow_yields_job_then_result(self, session):
        app = create_app(session=session[0], influence_budget=5)
        c = TestClient(app)
        body = {"target": "v_CRC", "target_state": "yes", "iterations": 2, "seed": 6}
        r = c.post("/influence", json=body)
        assert r.status_code == 202
        token = r.json()["job"]
        poll = r.json()["poll"]
        deadline = time.time() + 60
        while time.time() < deadline:
            rj = c.get(poll)
            if rj.status_code == 200:
                break
            assert rj.status_code == 202
            time.sleep(0.1)
        assert rj.status_code == 200
        direct = c.post(
            "/influence", json=body
        )  # still over budget; compare against a direct library run instead
        report = analytics.influential_findings(
            session[0].posterior, session[0].positives, "v_CRC", "yes", iterations=2, seed=6
        )
        assert rj.json() == json.loads(json.dumps(analytics.influence_to_obj(report)))
        assert direct.status_code == 202

    def test_unknown_job_404(self, client):
        assert client.get("/influence/jobs/deadbeef").status_code == 404

    def test_bad_iterations_400(self, client):
        r = client.post(
            "/influence",
            json={"target": "v_CRC", "target_state": "yes", "iterations": 0, "seed": 1},
        )
        assert r.status_code == 400
