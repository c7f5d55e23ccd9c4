import math
import warnings

import numpy as np
import pytest

from isoconv.bodies import ball, cross_polytope, cube, scale_body
from isoconv.functionals import (
    ENTROPY_DIM_CAP,
    RadModel,
    bound_rhs,
    entropy_numbers,
    mean_width,
    mp_comparison,
    parse_rad_model,
    urysohn_check,
)
from isoconv.grassmann import vk_estimate


# ---------------------------------------------------------------------------
# mean width
# ---------------------------------------------------------------------------


def test_mean_width_ball_exact():
    est = mean_width(ball(8))
    assert est.value == 1.0
    assert est.std_error == 0.0
    assert est.direction == "exact"
    assert mean_width(ball(3, radius=2.5)).value == pytest.approx(2.5)


def test_mean_width_square_oracle():
    # E(|t1| + |t2|) on S^1 = 4/pi
    est = mean_width(cube(2, side=2.0), sphere_samples=200_000, seed=1)
    assert abs(est.value - 4.0 / math.pi) < 3.0 * est.std_error + 1e-4
    assert est.std_error < 0.002


def test_mean_width_linearity_matched_seeds():
    K = cube(3, side=2.0)
    a = mean_width(K, sphere_samples=5000, seed=2)
    b = mean_width(scale_body(K, 3.0), sphere_samples=5000, seed=2)
    assert b.value == pytest.approx(3.0 * a.value, rel=1e-12)


def test_mean_width_cross_polytope_3d_oracle():
    # E ||theta||_inf over S^2 = 0.8311896374 (inclusion-exclusion of caps,
    # each coordinate uniform on [-1, 1])
    est = mean_width(cross_polytope(3), sphere_samples=200_000, seed=3)
    assert abs(est.value - 0.8311896374) < 3.0 * est.std_error + 1e-4


def test_mean_width_validates_samples():
    with pytest.raises(ValueError):
        mean_width(cube(2), sphere_samples=10, seed=1)


# ---------------------------------------------------------------------------
# Urysohn
# ---------------------------------------------------------------------------


def test_urysohn_ball_equality():
    mstar, vr, ok = urysohn_check(ball(4))
    assert ok
    assert mstar.value == pytest.approx(vr.value, abs=1e-8)


def test_urysohn_square_and_cross():
    for K in (cube(2, side=2.0), cross_polytope(3), cube(3, side=1.0)):
        mstar, vr, ok = urysohn_check(K, sphere_samples=20_000, seed=4)
        assert ok
        # strict gap for non-balls, visible well beyond the noise
        assert mstar.value > vr.value - 3.0 * (mstar.std_error + vr.std_error)


# ---------------------------------------------------------------------------
# entropy numbers
# ---------------------------------------------------------------------------


def test_entropy_interval_exact():
    seg = cube(1, side=2.0)  # [-1, 1]
    out = entropy_numbers(seg, j_max=5)
    for j, upper, lower in out:
        assert upper.value == pytest.approx(2.0 ** (-j), rel=1e-12)
        assert lower.value == upper.value
        assert upper.direction == "exact"


def test_entropy_brackets_square():
    out = entropy_numbers(cube(2, side=2.0), j_max=6, step=0.02, seed=5)
    for j, upper, lower in out:
        assert lower.value <= upper.value + 1e-12
        assert upper.direction == "upper" and lower.direction == "lower"
    uppers = [u.value for _, u, _ in out]
    assert all(a >= b - 1e-12 for a, b in zip(uppers, uppers[1:]))  # nonincreasing
    # any covering radius is at most the diameter, whatever the greedy start
    assert uppers[0] <= 2.0 * math.sqrt(2.0) + 0.1
    # with 2^6 = 64 centers the square is covered tightly
    assert uppers[-1] < 0.45


def test_entropy_lower_bound_volumetric():
    out = entropy_numbers(cube(2, side=2.0), j_max=4, step=0.02, seed=6)
    truth = (4.0 / math.pi) ** 0.5
    for j, _, lower in out:
        assert lower.value == pytest.approx(truth * 2.0 ** (-j / 2.0), rel=1e-9)


def test_entropy_dim_cap():
    with pytest.raises(ValueError):
        entropy_numbers(cube(ENTROPY_DIM_CAP + 1, side=1.0), j_max=2)


def test_vk_below_twice_entropy_upper():
    # v_k(K) <= 2 e_k(K): compare sampled v_k against the greedy upper bound
    K = cube(2, side=2.0)
    ent = entropy_numbers(K, j_max=2, step=0.02, seed=7)
    for k, upper, _ in ent:
        vk = vk_estimate(K, k, trials=32, seed=8)
        assert vk.value <= 2.0 * upper.value + 1e-9


# ---------------------------------------------------------------------------
# RadModel
# ---------------------------------------------------------------------------


def test_rad_model_values():
    assert RadModel("unit").value(5, 3.0) == 1.0
    assert RadModel("log-min").value(5, 3.0) == pytest.approx(math.log(4.0))
    assert RadModel("log-min").value(2, 3.0) == pytest.approx(math.log(3.0))
    assert RadModel("log-min").value(5) == pytest.approx(math.log(6.0))
    assert RadModel("sqrt-log").value(3) == pytest.approx(math.sqrt(math.log(4.0)))
    assert RadModel("constant", 2.5).value(9) == 2.5


def test_rad_model_nondecreasing_in_k():
    for kind in ("unit", "log-min", "sqrt-log"):
        m = RadModel(kind)
        vals = [m.value(k) for k in range(1, 20)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_parse_rad_model():
    assert parse_rad_model("unit").kind == "unit"
    assert parse_rad_model("log-min").kind == "log-min"
    assert parse_rad_model("constant:2.5") == RadModel("constant", 2.5)
    for bad in ("nosuch", "constant", "constant:x", "unit:3"):
        with pytest.raises(ValueError):
            parse_rad_model(bad)


# ---------------------------------------------------------------------------
# bound expressions
# ---------------------------------------------------------------------------


def test_thm_main_product_flat_spectrum_example():
    val = bound_rhs("thm-main-product", spectrum=[1.0, 1.0, 1.0, 1.0], p=4.0)
    assert val == pytest.approx(25.0 / 6.0, rel=1e-12)


def test_thm_main_arith_dominates_product():
    rng = np.random.default_rng(9)
    for _ in range(200):
        n = int(rng.integers(2, 30))
        lam = np.sort(rng.uniform(0.1, 3.0, size=n))[::-1]
        p = float(rng.uniform(1.0, 50.0))
        a = bound_rhs("thm-main-arith", spectrum=lam, p=p)
        g = bound_rhs("thm-main-product", spectrum=lam, p=p)
        assert a >= g - 1e-12 * a


def test_thm_main_nondecreasing_in_p():
    lam = [2.0, 1.0, 0.5]
    vals = [bound_rhs("thm-main-product", spectrum=lam, p=p) for p in (1, 2, 4, 8, 16)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_prop31_example():
    # flat spectrum, k = p: sqrt(p/k)*max(sqrt p, sqrt k) = sqrt(p)
    assert bound_rhs("prop31", spectrum=[1.0] * 8, p=4.0, k=4) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        bound_rhs("prop31", spectrum=[1.0] * 4, p=2.0, k=9)


def test_mp_sum_and_dudley_sum():
    vk = np.ones(16)
    expected = sum(1.0 / math.sqrt(k) for k in range(1, 17))
    assert bound_rhs("mp-sum", vk_values=vk) == pytest.approx(expected, rel=1e-12)
    assert bound_rhs("dudley-sum", ek_values=vk) == pytest.approx(expected, rel=1e-12)
    # rad model multiplies per-k
    v2 = bound_rhs("mp-sum", vk_values=[1.0, 1.0], rad=RadModel("constant", 2.0))
    assert v2 == pytest.approx(2.0 * (1.0 + 1.0 / math.sqrt(2.0)), rel=1e-12)


def test_summary_piecewise_first_regime():
    assert bound_rhs("summary-piecewise", n=16, p=4.0) == pytest.approx(2.0, rel=1e-12)
    assert bound_rhs("summary-piecewise", n=100, p=9.0) == pytest.approx(3.0, rel=1e-12)


def test_summary_piecewise_continuous_at_sqrt_n():
    for n in (16, 64, 1024):
        p = math.sqrt(n)
        below = bound_rhs("summary-piecewise", n=n, p=p - 1e-9)
        above = bound_rhs("summary-piecewise", n=n, p=p + 1e-9)
        assert below == pytest.approx(above, rel=1e-6)


def test_summary_piecewise_warns_beyond_n():
    with pytest.warns(UserWarning):
        bound_rhs("summary-piecewise", n=16, p=32.0)


def test_sudakov_hartzoulaki():
    assert bound_rhs("sudakov", n=9, mstar=2.0, t=3.0) == pytest.approx(4.0)
    assert bound_rhs("hartzoulaki", n=8, l_k=0.5, t=2.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        bound_rhs("sudakov", n=4, mstar=1.0, t=0.0)


def test_gpv_value_and_range_warning():
    val = bound_rhs("gpv", n=16, p=4.0, t=2.0)
    assert val == pytest.approx(16.0 / 4.0 + 4.0 * 2.0 / 2.0, rel=1e-12)
    with pytest.warns(UserWarning):
        bound_rhs("gpv", n=16, p=4.0, t=100.0)


def test_gpv_piecewise_continuous_at_tmid():
    n, p = 64, 4.0
    t_mid = math.sqrt(n / p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        below = bound_rhs("gpv-piecewise", n=n, p=p, t=t_mid * (1 - 1e-9))
        above = bound_rhs("gpv-piecewise", n=n, p=p, t=t_mid * (1 + 1e-9))
    assert below == pytest.approx(above, rel=1e-6)


def test_thm14_warns_outside_band():
    with pytest.warns(UserWarning):
        bound_rhs("thm14", n=16, rad_value=1.0, l_k=0.3, t=0.01)
    # inside the band no warning
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bound_rhs("thm14", n=16, rad_value=1.0, l_k=0.3, t=0.5)


def test_bound_rhs_validation():
    with pytest.raises(ValueError):
        bound_rhs("nosuch", n=4)
    with pytest.raises(ValueError):
        bound_rhs("thm-main-product", spectrum=[1.0, 2.0], p=2.0)  # ascending
    with pytest.raises(ValueError):
        bound_rhs("thm-main-product", spectrum=[1.0, -1.0], p=2.0)
    with pytest.raises(ValueError):
        bound_rhs("thm-main-product", spectrum=[1.0], p=0.5)
    with pytest.raises(KeyError):
        bound_rhs("sudakov", n=4, t=1.0)  # mstar missing


# ---------------------------------------------------------------------------
# Milman-Pisier comparison
# ---------------------------------------------------------------------------


def test_mp_comparison_ball_closed_form():
    # every projection of the ball is a unit ball: rhs = sum 1/sqrt(k),
    # lhs = sqrt(n) * 1
    rep = mp_comparison(ball(16), RadModel("unit"), trials=2,
                        sphere_samples=1000, seed=10)
    assert rep["lhs_sqrt_n_mstar"] == pytest.approx(4.0, rel=1e-12)
    assert rep["rhs_sum"] == pytest.approx(6.663994608237443, rel=1e-12)
    assert rep["ratio"] == pytest.approx(1.6659986520593608, rel=1e-12)
    assert not rep["truncated"]
    assert all(src == "measured" for _, _, src in rep["terms"])


def test_mp_comparison_interval_ratio_one():
    rep = mp_comparison(ball(1), RadModel("unit"), trials=1,
                        sphere_samples=1000, seed=11)
    assert rep["ratio"] == pytest.approx(1.0, rel=1e-12)


def test_mp_comparison_cube_truncates_without_spectrum():
    rep = mp_comparison(cube(8, side=1.0), RadModel("unit"), trials=2,
                        sphere_samples=2000, seed=12, k_cap=3)
    assert rep["truncated"]
    measured_ks = [k for k, _, src in rep["terms"] if src == "measured"]
    assert 8 in measured_ks  # k = n uses the analytic cube volume
    assert all(k <= 3 or k == 8 for k in measured_ks)


def test_mp_comparison_zp_fills_with_prop31():
    rep = mp_comparison(cube(8, side=1.0), RadModel("unit"), trials=2,
                        sphere_samples=2000, seed=13, k_cap=3,
                        p=2.0, spectrum=[1.0] * 8)
    assert not rep["truncated"]
    srcs = {src for _, _, src in rep["terms"]}
    assert srcs == {"measured", "analytic"}
