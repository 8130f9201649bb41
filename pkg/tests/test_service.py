"""Endpoint tests for the HTTP service layer."""

import pytest
from fastapi.testclient import TestClient

from ellbailey import __version__
from ellbailey.ellgamma import BaseParams, elliptic_gamma
from ellbailey.service.app import create_app

BASE_FIELDS = {"q": [0.3, 0.0], "p": [0.2, 0.0]}
BETA_T = [[0.7, 0.0], [0.6, 0.0], [0.5, 0.0], [0.6, 0.0], [0.7, 0.0]]

REPORT_KEYS = {"identity_id", "assignment", "lhs", "rhs", "abs_err",
               "rel_err", "nodes_used", "converged", "runtime_ms"}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


class TestHealthAndValues:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "version": __version__}

    def test_gamma_matches_direct_call(self, client):
        resp = client.post("/gamma", json=dict(BASE_FIELDS, z=[0.5, 0.1]))
        assert resp.status_code == 200
        direct = elliptic_gamma(0.5 + 0.1j, BaseParams(q=0.3, p=0.2))
        got = complex(*resp.json()["value"])
        assert got == pytest.approx(direct, rel=1e-12)

    def test_gamma_rejects_bad_base(self, client):
        resp = client.post("/gamma", json={"q": [1.2, 0.0], "p": [0.2, 0.0],
                                           "z": [0.5, 0.0]})
        assert resp.status_code == 422
        assert resp.json()["error"] == "domain"

    def test_pochhammer_known_value(self, client):
        resp = client.post("/pochhammer", json={"a": [0.5, 0.0],
                                                "q": [0.5, 0.0]})
        assert resp.status_code == 200
        got = complex(*resp.json()["value"])
        assert got == pytest.approx(0.2887880950866, rel=1e-10)

    def test_malformed_payload(self, client):
        resp = client.post("/gamma", json={"q": [0.3, 0.0]})
        assert resp.status_code == 422


class TestBetaEndpoint:
    def test_explicit_values(self, client):
        resp = client.post("/beta", json=dict(BASE_FIELDS, t=BETA_T))
        assert resp.status_code == 200
        body = resp.json()
        assert set(body) == REPORT_KEYS
        assert body["identity_id"] == "beta"
        assert body["converged"]
        assert body["rel_err"] < 1e-8
        assert body["assignment"]["params"]["t0"] == [0.7, 0.0]

    def test_seeded(self, client):
        resp = client.post("/beta", json=dict(BASE_FIELDS, seed=1))
        assert resp.status_code == 200
        body = resp.json()
        assert body["converged"]
        assert body["rel_err"] < 1e-8

    def test_t_and_seed_conflict(self, client):
        resp = client.post("/beta", json=dict(BASE_FIELDS, t=BETA_T, seed=1))
        assert resp.status_code == 422

    def test_matches_verify_endpoint(self, client):
        params = {f"t{m}": BETA_T[m] for m in range(5)}
        via_beta = client.post("/beta", json=dict(BASE_FIELDS, t=BETA_T))
        via_verify = client.post("/verify", json=dict(
            BASE_FIELDS, identity_id="beta",
            assignment={"params": params, "vars": {}}))
        assert via_verify.status_code == 200
        assert via_beta.json()["lhs"] == via_verify.json()["lhs"]
        assert via_beta.json()["rhs"] == via_verify.json()["rhs"]


class TestVerifyEndpoint:
    def test_constraint_violation_status(self, client):
        t_bad = [[0.5, 0.0]] * 5
        resp = client.post("/beta", json=dict(BASE_FIELDS, t=t_bad))
        assert resp.status_code == 409
        body = resp.json()
        assert body["error"] == "constraint-violation"
        assert "pq" in body["detail"]

    def test_unknown_identity(self, client):
        resp = client.post("/verify", json=dict(BASE_FIELDS,
                                                identity_id="nope", seed=1))
        assert resp.status_code == 422
        assert resp.json()["error"] == "domain"

    def test_sampling_exhausted(self, client):
        resp = client.post("/verify", json=dict(
            BASE_FIELDS, identity_id="beta", seed=1,
            moduli_range=[0.41, 0.42]))
        assert resp.status_code == 409
        assert resp.json()["error"] == "sampling-exhausted"

    def test_seeded_identity_with_budget_cap(self, client):
        resp = client.post("/verify", json=dict(
            BASE_FIELDS, identity_id="id-seq:1", seed=3, n_max=64))
        assert resp.status_code == 200
        body = resp.json()
        assert body["identity_id"] == "id-seq:1"
        assert not body["converged"]

    def test_seeded_identity_default_budget(self, client):
        resp = client.post("/verify", json=dict(
            BASE_FIELDS, identity_id="transformation", seed=7))
        assert resp.status_code == 200
        body = resp.json()
        assert body["converged"]
        assert body["rel_err"] < 1e-8


class TestTreeEndpoint:
    def test_seeded_word_closes(self, client):
        resp = client.post("/tree", json=dict(BASE_FIELDS, word="C(s1,u1)",
                                              seed=2))
        assert resp.status_code == 200
        body = resp.json()
        assert body["word"] == "C(s1,u1)"
        assert body["converged"]
        assert body["rel_residual"] < 1e-8
        assert body["est_error"] is None
        assert set(body["assignment"]["params"]) == {
            "t", "t0", "t1", "t2", "s1", "u1"}

    def test_empty_word(self, client):
        resp = client.post("/tree", json=dict(BASE_FIELDS, word="", seed=4))
        assert resp.status_code == 200
        body = resp.json()
        assert body["word"] == ""
        assert body["converged"]
        assert body["rel_residual"] < 1e-8

    def test_bad_word(self, client):
        resp = client.post("/tree", json=dict(BASE_FIELDS, word="E(s,u)",
                                              seed=1))
        assert resp.status_code == 422
        assert resp.json()["error"] == "domain"

    def test_starved_budget_reports_honestly(self, client):
        # One grid doubling fits under a 32-node cap, so the refusal to
        # claim convergence comes with a concrete error estimate.
        resp = client.post("/tree", json=dict(BASE_FIELDS, word="C(s1,u1)",
                                              seed=2, n_max=32))
        assert resp.status_code == 200
        body = resp.json()
        assert not body["converged"]
        assert body["est_error"] is not None and body["est_error"] > 0

    def test_single_grid_budget_has_no_estimate(self, client):
        # An 8-node cap admits no doubling comparison at all; the report
        # still lands but carries no error estimate.
        resp = client.post("/tree", json=dict(BASE_FIELDS, word="C(s1,u1)",
                                              seed=2, n_max=8))
        assert resp.status_code == 200
        body = resp.json()
        assert not body["converged"]
        assert body["est_error"] is None
        assert body["rel_residual"] > 0
