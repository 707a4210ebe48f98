import math

import medshift


def test_oracle_identity_decomposition():
    out = medshift.oracle(kind="identity", delta=0.0)
    assert math.isclose(out["psi_d"] + out["psi_i"], 0.0, abs_tol=1e-12)
    assert math.isclose(out["theta_1_null"], out["theta_1_delta"], abs_tol=1e-12)


def test_oracle_odds_tilt_golden():
    out = medshift.oracle(kind="odds_tilt", delta=2.0)
    assert math.isclose(out["theta_1_delta"], 0.80365107484450948, abs_tol=1e-12)
    assert math.isclose(out["psi_d"], 0.0036771595439900606, abs_tol=1e-12)


def test_simulate_deterministic():
    a = medshift.simulate(n=200, seed=7)
    b = medshift.simulate(n=200, seed=7)
    assert a == b
    header = a.splitlines()[0]
    assert header == "W1,W2,W3,A,L,Z,Y"


def test_estimate_roundtrip():
    csv_text = medshift.simulate(n=800, seed=3)
    roles = {"W": ["W1", "W2", "W3"], "A": "A", "L": "L", "Z": "Z", "Y": "Y"}
    out = medshift.estimate(csv_text, roles, kind="odds_tilt", delta=2.0,
                            estimator="both", seed=11)
    for name in ("onestep", "tmle"):
        est = out[name]
        assert est["ci_d"][0] <= est["psi_d"] <= est["ci_d"][1]
        assert est["se_d"] > 0 and est["se_i"] > 0
    assert out["tmle"]["diagnostics"]["converged"]
