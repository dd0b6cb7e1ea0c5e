import cmath
import math
import random

import pytest

import ffext


def test_field_and_gauss_sum():
    f = ffext.Field(3, 2)
    assert f.q == 9
    assert f.modulus_string() == "x^2 + 1"
    assert abs(f.gauss_sum() - 3) < 1e-9
    g = ffext.Field.of_order(7).gauss_sum()
    assert abs(g * g + 7) < 1e-9


def test_errors_carry_codes():
    with pytest.raises(ffext.FfextError) as info:
        ffext.Field(4)
    assert info.value.code == "NotPrime"
    with pytest.raises(ffext.FfextError) as info:
        ffext.parse_poly("x1^6", ffext.Field(5))
    assert info.value.code == "DegreeExceedsCharacteristic"


def test_fourier_round_trip():
    f = ffext.Field.of_order(5)
    rng = random.Random(3)
    vals = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(25)]
    g = ffext.PlaneFunction(f, "dx", vals)
    back = ffext.inverse_ft(ffext.forward_ft(g))
    assert back.space == "dx"
    assert max(abs(a - b) for a, b in zip(back.values, vals)) < 1e-12
    assert abs(ffext.norm_lp(g, 2) - ffext.norm_lp(ffext.forward_ft(g), 2)) < 1e-12


def test_variety_and_extension():
    f = ffext.Field.of_order(5)
    v = ffext.Variety(ffext.parse_poly("x1^2+x2^2-1", f))
    assert v.cardinality == 4
    assert v.contains_line() is None
    sigma = ffext.SurfaceMeasure(v)
    assert sigma.total_mass() == pytest.approx(1.0)
    ext = ffext.extend([1.0] * sigma.size, sigma)
    assert ext[(0, 0)] == pytest.approx(1.0)
    est = ffext.estimate_rstar(sigma, 2.0, 4.0, restarts=4, seed=1)
    assert est["exhaustive_floor"] is not None
    assert est["ratio"] >= est["exhaustive_floor"] - 1e-9
    assert est["ratio"] <= ffext.rstar_upper_bound_2_4(v) + 1e-9


def test_line_variety_report():
    f = ffext.Field.of_order(11)
    rep = ffext.analyze_extension(ffext.parse_poly("x1*x2", f), restarts=2)
    assert rep["contains_line"]
    assert rep["line_test_ratio"] >= 0.5 * 11 ** 0.25


def test_distance_tools():
    f = ffext.Field.of_order(7)
    fam = ffext.LevelSetFamily.circle(f)
    assert sum(fam.level_size(t) for t in range(7)) == 49
    nu = ffext.counting_function(f, [(0, 0)], [(1, 0)], fam)
    assert nu[1] == 1 and sum(nu) == 1
    row = [(a, 0) for a in range(7)]
    assert len(ffext.distance_set(f, row, row)) == 4
    lhs, rhs = ffext.double_decay_sum(fam, (1, 0), (0, 1))
    assert abs(lhs - rhs) < 1e-12
    direct = fam.level_size(2) / 49
    assert abs(ffext.sphere_ft_explicit(fam, 2, (0, 0)) - direct) < 1e-12


def test_second_moment_identity():
    f = ffext.Field.of_order(5)
    fam = ffext.LevelSetFamily.circle(f)
    pts = [(a, b) for a in range(5) for b in range(5)]
    rng = random.Random(9)
    E = rng.sample(pts, 9)
    F = rng.sample(pts, 11)
    s = ffext.second_moment_decomposition(f, E, F, fam)
    assert s["I"] + s["II"] + s["III"] == pytest.approx(s["direct"], rel=1e-9)
    assert s["III_1"] + s["III_2"] == pytest.approx(s["III"], abs=1e-9)


def test_experiment_and_suite():
    rep = ffext.falconer_experiment(25, 74, 74, trials=3, seed=5)
    assert len(rep["rows"]) == 3
    assert rep["summary"]["above_threshold"]["min_ratio"] >= 0.5
    checks = ffext.run_suite("fourier", [3, 5])
    assert checks and all(c["pass"] for c in checks)
