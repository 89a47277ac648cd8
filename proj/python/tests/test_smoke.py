import math

import pytest

import hvctl

GAMMA1 = (1.0 - math.exp(-2.0)) / 2.0

LINEAR = {
    "s1": 0, "s2": 0, "g1": 0, "g2": 0,
    "diffusion_lo": 0, "diffusion_hi": 0, "diffusion_boost": 0,
    "paths": 2,
}


def test_gramian_closed_form():
    g = hvctl.gramian(1.0, 4)
    assert g[0] == pytest.approx(0.43233235838169365, rel=1e-15)
    assert g[3] == pytest.approx((1.0 - math.exp(-32.0)) / 32.0, rel=1e-15)
    assert hvctl.gramian(1.0, 2, [2.0, 1.0])[0] == pytest.approx(4.0 * g[0])


def test_resolvent_contracts():
    g = hvctl.gramian(1.0, 3)
    y = [1.0, -2.0, 0.5]
    r = hvctl.resolvent(0.1, g, y)
    assert r[0] == pytest.approx(1.0 / (0.1 + g[0]))
    assert math.hypot(*(0.1 * v for v in r)) <= math.hypot(*y)
    with pytest.raises(ValueError):
        hvctl.resolvent(0.1, g, [1.0])


def test_clarke():
    assert hvctl.clarke_interval(0.25) == (-0.5, 0.0)
    assert hvctl.clarke_interval(1.0) == (0.5, 0.5)
    assert hvctl.clarke_dirderiv(0.75, 1.0) == 0.5
    assert hvctl.clarke_dirderiv(0.75, -1.0) == 0.0


def test_linear_path_matches_closed_form():
    r = hvctl.solve_path(overrides=dict(LINEAR, eps=0.1))
    assert r["converged"]
    assert r["terminal_error"] == pytest.approx((0.1 / (0.1 + GAMMA1)) ** 2, rel=1e-6)
    assert len(r["q"]) == 257
    assert len(r["q"][0]) == 16


def test_thermostat_path_converges():
    r = hvctl.solve_path(overrides={"steps": 64})
    assert r["converged"]
    assert r["selection_defect"] == 0.0
    assert r["terminal_identity"] < 1e-6 + 10.0 / 64


def test_sweep_csv_schema():
    text = hvctl.sweep_csv(overrides=dict(LINEAR, eps_list="1, 0.1, 0.01"))
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert lines[0] == hvctl.SWEEP_HEADER == "eps,error_mean,error_ci,energy_mean,fp_rate,wallclock_s"
    errors = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert errors == sorted(errors, reverse=True)
    assert errors[2] == pytest.approx(0.000511, rel=1e-3)


def test_ensemble_and_config():
    st = hvctl.run_ensemble(overrides={"paths": 4, "steps": 64})
    assert st["failures"] == 0
    assert st["sup_moment"] <= st["apriori_bound"]
    assert hvctl.config_hash(overrides={"workers": 4}) == hvctl.config_hash()
    assert hvctl.config_hash(overrides={"eps": 0.2}) != hvctl.config_hash()
    assert "eps_list" in hvctl.config_keys()
    with pytest.raises(ValueError):
        hvctl.canonical_config("temperature = 3\n")


def test_ito_isometry():
    r = hvctl.ito_isometry([1.0, 0.5], [1.0, 0.25], paths=2000, seed=3)
    assert r["exact"] == pytest.approx(1.0 + 0.0625)
    assert abs(r["z_score"]) < 4.0
