import math

import numpy as np
import pytest

import rcbf_shield as rs


def test_normalize_sector():
    theta, scale = rs.normalize_sector(0.5, 1.5)
    assert theta == pytest.approx(0.5)
    assert scale == pytest.approx(1.0)


def test_worst_case_and_multiplier():
    u = np.array([3.0, 4.0])
    a = np.array([1.0, 0.0])
    w = rs.worst_case_input(u, a, 0.2)
    np.testing.assert_allclose(w, [-1.0, 0.0])
    lam = rs.optimal_multiplier(u, a, 0.2)
    np.testing.assert_allclose(-a / (2.0 * lam), w, rtol=1e-12)


def test_robust_margin_scalar_and_per_channel():
    a = np.array([2.0, -1.0])
    u = np.array([0.5, 1.5])
    expected = 1.0 + 1.0 - 1.5 - 0.2 * np.linalg.norm(u) * math.sqrt(5.0)
    assert rs.robust_margin(1.0, a, u, 0.2) == pytest.approx(expected)
    per_channel = rs.robust_margin(1.0, a, u, np.array([0.2, 0.4]))
    assert per_channel == pytest.approx(0.5 - 0.2 - 0.6)


def test_safety_filter_paths():
    r = rs.safety_filter(np.array([0.0]), -1.0, np.array([1.0]), 0.5)
    assert r.path == "scalar_closed_form"
    assert r.status == "ok"
    assert r.u[0] == pytest.approx(2.0)
    s = rs.safety_filter(np.array([0.0]), -1.0, np.array([1.0]), 0.5, mode="socp")
    assert s.u[0] == pytest.approx(2.0, abs=1e-7)
    assert 2.0 * s.q_star == pytest.approx(4.0, abs=1e-6)
    q = rs.safety_filter(np.zeros(2), -1.0, np.array([1.0, 0.0]), np.array([0.5, 0.5]))
    assert q.path == "qp_channels"
    np.testing.assert_allclose(q.u, [2.0, 0.0], atol=1e-7)
    np.testing.assert_allclose(q.u_pos - q.u_neg, q.u, atol=1e-12)


def test_safety_filter_rejects_bad_theta():
    with pytest.raises(ValueError):
        rs.safety_filter(np.array([0.0]), -1.0, np.array([1.0]), 1.0)


def test_solve_cone_program_unit_disk():
    sol = rs.solve_cone_program(np.ones(2), [(np.eye(2), np.zeros(2), np.zeros(2), 1.0)])
    assert sol.status == "optimal"
    np.testing.assert_allclose(sol.z, [-math.sqrt(0.5)] * 2, atol=1e-8)


def test_simulate_preset():
    assert set(rs.preset_names()) == {"fig3_lqr", "fig3_ecbf", "fig3_recbf", "fig4_sweep"}
    out = rs.simulate("fig3_recbf", horizon=0.2)
    assert out["x"].shape == (201, 5)
    assert out["t"][-1] == pytest.approx(0.2)
    assert out["h"][0] == pytest.approx(395.0)
    assert out["metrics"]["violation"] is False
    with pytest.raises(ValueError):
        rs.simulate("fig4_sweep")


def test_run_verification_quick():
    results = rs.run_verification("quick", 3)
    assert len(results) == 6
    assert all(r["passed"] for r in results), results
