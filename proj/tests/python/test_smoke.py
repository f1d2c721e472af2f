"""Smoke tests for the python extension module."""

import json

import numpy as np
import pytest

import drregret


def scalar_plant():
    A = np.array([[0.7]])
    B = np.array([[1.0]])
    C = np.array([[1.0]])
    Q = np.eye(1)
    R = np.eye(1)
    return A, B, C, Q, R


def test_boeing_preset_shapes():
    ss = drregret.boeing747()
    assert ss["A"].shape == (4, 4)
    assert ss["B"].shape == (4, 2)
    assert ss["C"].shape == (2, 4)
    assert ss["A"][0, 0] == pytest.approx(0.9801)


def test_lift_matches_recursion():
    A, B, C, Q, R = scalar_plant()
    N = 4
    ops = drregret.lift(A, B, C, Q, R, N)
    assert ops["F"].shape == (N, N)
    rng = np.random.default_rng(0)
    u = rng.normal(size=N)
    w = rng.normal(size=N)
    x = np.zeros(N)
    cur = 0.0
    for t in range(N):
        x[t] = cur
        cur = 0.7 * cur + u[t] + w[t]
    np.testing.assert_allclose(ops["F"] @ u + ops["G"] @ w, x, atol=1e-12)


def test_factorizations_orthogonal():
    A, B, C, Q, R = scalar_plant()
    fs = drregret.factorizations(A, B, C, Q, R, 5)
    theta = fs["Theta"]
    np.testing.assert_allclose(theta.T @ theta, np.eye(theta.shape[0]), atol=1e-9)
    assert fs["W"].shape == (5, 5)


def test_synthesize_and_worst_case():
    A, B, C, Q, R = scalar_plant()
    out = drregret.synthesize(A, B, C, Q, R, 3, "DR-RO-MF", 0.5)
    assert out["causal"]
    assert out["gamma_star"] > out["lambda_max"]

    wc = drregret.worst_case(out["C_K"], np.eye(6), 0.5)
    assert wc["expected_regret"] == pytest.approx(out["objective"], rel=1e-4)
    D = wc["D"]
    budget = np.trace((D - np.eye(6)) @ (D - np.eye(6)).T)
    assert budget == pytest.approx(0.25, rel=1e-8)


def test_baseline_menu():
    A, B, C, Q, R = scalar_plant()
    lqg = drregret.synthesize(A, B, C, Q, R, 3, "LQG", 0.0)
    romf = drregret.synthesize(A, B, C, Q, R, 3, "RO-MF", 0.0)
    hinf = drregret.synthesize(A, B, C, Q, R, 3, "HINF", 0.0)
    # the regret-level optimum has the smallest worst-case regret eigenvalue
    assert romf["lambda_max"] <= lqg["lambda_max"] + 1e-8
    assert romf["lambda_max"] <= hinf["lambda_max"] + 1e-8


def test_run_experiment_rows():
    config = {
        "system": {"A": [[0.7]], "B": [[1.0]], "C": [[1.0]]},
        "horizon": 2,
        "radii": [0, 0.5],
        "controllers": ["DR-RO-MF", "LQG"],
        "output": {"path": "/tmp/drregret_pysmoke.csv", "format": "csv"},
    }
    rows = drregret.run_experiment(json.dumps(config))
    assert len(rows) == 4
    assert rows[0]["radius"] == 0.0
    assert rows[0]["controller"] == "DR-RO-MF"
    by_key = {(r["radius"], r["controller"]): r for r in rows}
    dr = by_key[(0.5, "DR-RO-MF")]
    lqg = by_key[(0.5, "LQG")]
    assert dr["regret_under_dr_wc"] <= lqg["regret_under_dr_wc"] + 1e-9
