import numpy as np
import pytest
from numpy.testing import assert_array_equal

from aircov.coverage import coverage_probability_circular
from aircov.errors import DomainError
from aircov.montecarlo import SimConfig
from aircov.tradeoff import (
    Curve,
    deployment_header,
    frequency_environment_sweep,
    gradient,
    sensitivity,
    spot_check,
    sweep_beamwidth_vs_height,
    sweep_radius_vs_beamwidth,
    sweep_radius_vs_height,
)

B_GRID = np.arange(1.0, 180.0, 1.0)


@pytest.fixture(scope="module")
def fig3():
    from aircov.coverage import Deployment
    return sweep_radius_vs_beamwidth(Deployment(), [1000.0, 3000.0, 5000.0, 7000.0], B_GRID)


def test_curve_invariants(dep):
    hdr = deployment_header(dep)
    with pytest.raises(DomainError):
        Curve("b", "deg", "r", "m", [1, 1, 2], [0, 0, 0], {}, hdr)
    with pytest.raises(DomainError):
        Curve("b", "deg", "r", "m", [1, 2], [0, 0], {}, {})
    with pytest.raises(DomainError):
        Curve("b", "deg", "r", "m", [1, 2], [0], {}, hdr)
    with pytest.raises(DomainError):
        sweep_radius_vs_beamwidth(dep, [1000.0], np.arange(1.0, 30.0, 3.0))
    assert hdr["sigma_l_db"] == dep.sigma_l and hdr["antenna"]["b_phi_deg"] == 50.0


def test_fig3_landmark(fig3):
    b, r = fig3[3].argmax()
    assert fig3[3].label == {"h_m": 7000.0}
    assert abs(b - 55.0) <= 5.0
    assert abs(r - 5000.0) <= 500.0


def test_fig3_optimum_moves_to_narrower_beams(fig3):
    peaks = [c.argmax()[0] for c in fig3]
    assert peaks == sorted(peaks, reverse=True)
    assert peaks[0] > 110.0


def test_fig3_interior_argmax(fig3):
    for c in fig3[1:]:
        b, _ = c.argmax()
        assert B_GRID[0] < b < B_GRID[-1]
        assert c.values[0] < c.argmax()[1] > c.values[-1]


def test_fig3_points_bracket(dep, fig3):
    rng = np.random.default_rng(4)
    for c in fig3:
        for k in rng.choice(len(c.params), 6, replace=False):
            d = dep.with_height(c.label["h_m"]).with_beamwidth(c.params[k])
            r = c.values[k]
            if r > 0:
                assert coverage_probability_circular(r, d) >= d.epsilon
                assert coverage_probability_circular(r + 2.0, d) < d.epsilon


def test_argmax_stable_under_refinement(dep):
    coarse = sweep_radius_vs_beamwidth(dep, [7000.0], np.arange(1.0, 180.0, 2.0))[0].argmax()[0]
    fine = sweep_radius_vs_beamwidth(dep, [7000.0], np.arange(1.0, 180.0, 0.5))[0].argmax()[0]
    assert abs(coarse - fine) <= 1.0


def test_sweeps_are_deterministic(dep):
    a = sweep_radius_vs_beamwidth(dep, [4000.0], B_GRID)[0]
    b = sweep_radius_vs_beamwidth(dep, [4000.0], B_GRID)[0]
    assert a.values.tobytes() == b.values.tobytes()


def test_fig4_shapes(dep):
    hs = np.arange(250.0, 25001.0, 250.0)
    curves = {c.label["b_deg"]: c for c in sweep_radius_vs_height(dep, [5.0, 10.0, 15.0, 100.0, 150.0], hs)}
    for b in (5.0, 10.0, 15.0):
        assert np.all(np.diff(curves[b].values) >= 0)
    for b in (100.0, 150.0):
        v = curves[b].values
        k = int(np.argmax(v))
        assert 0 < k < v.size - 1
        assert v[-1] < 0.5 * v[k]


def test_fig4_monte_carlo_spot_checks(dep):
    hs = np.arange(500.0, 15001.0, 500.0)
    curves = sweep_radius_vs_height(dep, [15.0, 50.0, 100.0], hs)
    rng = np.random.default_rng(8)
    for n in range(5):
        c = curves[rng.integers(len(curves))]
        k = rng.integers(hs.size)
        p, est, ok = spot_check(dep, c.params[k], c.label["b_deg"], c.values[k], SimConfig(seed=n, n_samples=20_000))
        assert ok, (c.label, c.params[k], p, est)


def test_fig5_branches(dep):
    curves = sweep_beamwidth_vs_height(dep, [4000.0], [5000.0, 10000.0])
    rising, falling = curves
    assert rising.label["branch"] == "rising" and falling.label["branch"] == "falling"
    assert abs(falling.values[1] - 70.0) <= 7.0
    assert abs(rising.values[0] - 42.0) <= 10.0 and abs(falling.values[0] - 110.0) <= 10.0


def test_fig5_branch_consistency(dep):
    from aircov.coverage import solve_coverage_radius
    hs = np.arange(1000.0, 15001.0, 1000.0)
    for c in sweep_beamwidth_vs_height(dep, [2000.0, 4000.0], hs):
        v = c.values[~np.isnan(c.values)]
        assert np.all((v >= 1.0) & (v < 180.0))
        for h, b in zip(c.params, c.values):
            if not np.isnan(b):
                r = solve_coverage_radius(dep.with_height(h).with_beamwidth(b))
                assert abs(r - c.label["r_m"]) <= 2.0
    # a radius beyond reach leaves gaps rather than failing
    gaps = sweep_beamwidth_vs_height(dep, [50000.0], [1000.0, 2000.0])
    assert all(np.isnan(c.values).all() for c in gaps)


def test_fig10_frequency_environment(dep):
    curves = frequency_environment_sweep(dep, freqs=(2.0,), b_grid=B_GRID)
    by_env = {c.label["environment"]: c for c in curves}
    sub, hr = by_env["suburban"], by_env["highrise_urban"]
    assert np.all(sub.values >= hr.values)
    assert hr.argmax()[0] < 45.0 and sub.argmax()[0] > 90.0
    assert sub.header["pl_max_db"] == 120.0 and sub.header["h_m"] == 3000.0


def test_fig10_monte_carlo_spot_checks(dep):
    from dataclasses import replace
    from aircov.channel import get_environment, shadowing_for_frequency
    for c in frequency_environment_sweep(dep, freqs=(2.0, 3.5), b_grid=np.arange(10.0, 171.0, 2.0)):
        b, r = c.argmax()
        d = replace(dep, pl_max=120.0, f_ghz=c.label["f_ghz"], env=get_environment(c.label["environment"]),
                    shadow=shadowing_for_frequency(c.label["f_ghz"]))
        assert spot_check(d, 3000.0, b, r, SimConfig(seed=3, n_samples=20_000))[2]


def test_gradient_basics(dep):
    hdr = deployment_header(dep)
    flat = Curve("b", "deg", "r", "m", np.arange(5.0), np.full(5, 42.0), {}, hdr)
    g = gradient(flat)
    assert np.all(g.values == 0) and g.value_units == "m/deg"
    line = Curve("h", "m", "r", "m", np.arange(0.0, 50.0, 10.0), 3 * np.arange(0.0, 50.0, 10.0), {}, hdr)
    assert np.allclose(gradient(line).values, 3.0)
    with pytest.raises(DomainError):
        gradient(Curve("b", "deg", "r", "m", [1.0, 2.0], [0.0, 1.0], {}, hdr))
    with pytest.raises(DomainError):
        gradient(Curve("b", "deg", "r", "m", [1.0, 2.0, 4.0], [0.0, 1.0, 2.0], {}, hdr))


def test_sensitivity_peak_at_narrow_beams(dep):
    s = sensitivity(dep, np.arange(100.0, 25001.0, 400.0), np.arange(1.0, 180.0, 1.0))
    g, h, b = s.max_dr_db
    assert b < 40.0
    assert s.radius.shape == (s.heights.size, s.beamwidths.size)
    assert_array_equal(s.dr_db.shape, s.dr_dh.shape)
    assert s.ratio == pytest.approx(g / s.max_dr_dh[0])
