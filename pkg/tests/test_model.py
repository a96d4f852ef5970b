import math
from fractions import Fraction
from itertools import product
from random import Random

import pytest

from altrank.linalg import AlternatingMatrix, cokernel, kernel_rank
from altrank.model import (
    MIN_HEIGHT,
    CurveParams,
    EmpiricalDistribution,
    ModelConfig,
    count_curves_exact,
    curve_height,
    draw_model,
    empirical_cl_distribution,
    empirical_corank_prob,
    empirical_sha_distribution,
    empirical_square_cyclic_fraction,
    is_square_of_cyclic,
    is_valid_curve,
    model_params,
    predicted_table,
    rank_survey,
    sample_alternating,
    sample_curve_in_band,
    schedule_eta,
    schedule_x,
    torsion_label,
)


CFG = ModelConfig()


# ---------------------------------------------------------------------------
# heights and curve validity


def test_curve_height_examples():
    assert curve_height(1, 1) == 27
    assert curve_height(-2, 3) == 243
    assert curve_height(0, 1) == 27
    assert curve_height(-1, 0) == 4


def test_is_valid_curve_singular_rejected():
    assert not is_valid_curve(0, 0)
    assert not is_valid_curve(-3, 2)  # 4(-27) + 27(4) = 0
    assert not is_valid_curve(-48, 128)  # scaled singular curve


def test_is_valid_curve_minimality():
    # (p^4 a, p^6 b) is a non-minimal model of (a, b)
    assert is_valid_curve(1, 1)
    assert not is_valid_curve(16, 64)
    assert is_valid_curve(16, 65)
    assert not is_valid_curve(3**4 * 2, 3**6 * 5)
    assert not is_valid_curve(0, 64)
    assert not is_valid_curve(16, 0)
    assert is_valid_curve(0, 1)
    assert is_valid_curve(-1, 0)


def test_curve_params_validation():
    c = CurveParams(-1, 1)
    assert c.height == 27
    with pytest.raises(ValueError):
        CurveParams(0, 0)
    with pytest.raises(ValueError):
        CurveParams(16, 64)


def test_count_curves_exact_tiny():
    # |4a^3| <= 27 allows a in {-1,0,1}; 27b^2 <= 27 allows |b| <= 1;
    # only (0,0) is singular, minimality is vacuous: 8 curves
    assert count_curves_exact(27) == 8
    assert count_curves_exact(3) == 0


def test_count_curves_exact_brute_midsize():
    # independent brute count over the coefficient box
    cap = 5000
    amax = 0
    while 4 * (amax + 1) ** 3 <= cap:
        amax += 1
    bmax = 0
    while 27 * (bmax + 1) ** 2 <= cap:
        bmax += 1
    brute = 0
    for a in range(-amax, amax + 1):
        for b in range(-bmax, bmax + 1):
            if max(abs(4 * a**3), 27 * b * b) <= cap and is_valid_curve(a, b):
                brute += 1
    assert count_curves_exact(cap) == brute


def test_count_curves_monotone():
    values = [count_curves_exact(h) for h in (100, 1000, 10000)]
    assert values[0] < values[1] < values[2]


def test_sample_curve_in_band_contract():
    rng = Random(30)
    for cap in (10**4, 10**6):
        for _ in range(40):
            c = sample_curve_in_band(cap, rng)
            assert cap // 2 < c.height <= cap
            assert is_valid_curve(c.a4, c.a6)


def test_sample_curve_empty_band_raises():
    rng = Random(31)
    with pytest.raises(ValueError):
        sample_curve_in_band(100, rng)
    with pytest.raises(ValueError):
        sample_curve_in_band(50, rng)


# ---------------------------------------------------------------------------
# parameter schedule


def test_schedule_grid_values():
    # the experiment grid: eta jumps at 10^18 and 10^24, x stays small
    want = {
        10**6: (2, 2),
        10**9: (2, 3),
        10**12: (2, 4),
        10**15: (2, 5),
        10**18: (3, 4),
        10**21: (3, 4),
        10**24: (4, 4),
    }
    for h, (eta, x) in want.items():
        e = schedule_eta(h, CFG)
        assert e == eta, h
        assert schedule_x(h, e, CFG) == x, h


def test_schedule_eta_exact_breakpoints():
    # eta(H) is the largest v with 3^(12 v) <= H, floored at 2
    for v in (2, 3, 4, 5):
        h = 3 ** (12 * v)
        assert schedule_eta(h, CFG) == v
        assert schedule_eta(h - 1, CFG) == max(2, v - 1)


def test_schedule_x_exact_ceiling():
    # x is the exact ceiling of H^(1/(12 eta)), never a float artifact
    for h, eta, want in [
        (2**24, 2, 2),  # (2^24)^(1/24) = 2 exactly
        (2**24 + 1, 2, 3),  # just past the perfect power
        (10**12, 2, 4),
        (10**12, 3, 3),  # 10^(1/3) rounds up to 3... 10^(12/36)=10^(1/3)=2.15 -> 3
    ]:
        assert schedule_x(h, eta, CFG) == want


def test_schedule_envelope_exact():
    # x^eta stays within [1, 16] times H^(1/12): checked as exact
    # integer inequalities (x^eta)^12 >= H and (x^eta)^12 <= 16^12 H
    heights = [10**k for k in range(4, 31)] + [
        3 * 10**7 + 7,
        5 * 10**13 + 1,
        7 * 10**22 + 9,
    ]
    for h in heights:
        eta = schedule_eta(h, CFG)
        x = schedule_x(h, eta, CFG)
        lhs = (x**eta) ** 12
        assert lhs >= h
        assert lhs <= 16**12 * h


def test_schedule_constant_mode():
    cfg = ModelConfig(eta_schedule="constant", eta_floor=3)
    assert schedule_eta(10**20, cfg) == 3
    assert schedule_eta(10**4, cfg) == 3


def test_model_config_validation():
    with pytest.raises(TypeError):
        ModelConfig(calibration_exponent=1 / 12)
    with pytest.raises(ValueError):
        ModelConfig(calibration_exponent=Fraction(0))
    with pytest.raises(ValueError):
        ModelConfig(eta_schedule="sqrt")
    with pytest.raises(ValueError):
        ModelConfig(x_min=1)
    cfg = ModelConfig(calibration_exponent="1/6")
    assert cfg.calibration_exponent == Fraction(1, 6)


def test_model_params_draws_both_sizes():
    rng = Random(32)
    cfg = ModelConfig()
    seen = {2: 0, 3: 0}
    for _ in range(2000):
        p = model_params(10**6, cfg, rng)
        assert p.eta == 2 and p.x == 2
        seen[p.n] += 1
    # n is uniform on {eta, eta+1}: 3 sigma band around 1000
    assert abs(seen[2] - 1000) < 3 * math.sqrt(500)


def test_model_params_rejects_small_height():
    with pytest.raises(ValueError):
        model_params(50, CFG, Random(0))


# ---------------------------------------------------------------------------
# matrix draws and model draws


def test_sample_alternating_ranges():
    rng = Random(33)
    for _ in range(50):
        a = sample_alternating(5, 3, rng)
        assert a.n == 5
        assert all(-3 <= v <= 3 for v in a.upper)
    counts = {}
    for _ in range(7000):
        a = sample_alternating(2, 1, rng)
        counts[a.upper[0]] = counts.get(a.upper[0], 0) + 1
    for v in (-1, 0, 1):
        assert abs(counts[v] - 7000 / 3) < 4 * math.sqrt(7000 * 2 / 9)


def test_torsion_label_and_square_of_cyclic():
    assert torsion_label(()) == "[]"
    assert torsion_label((2, 2)) == "[2,2]"
    assert is_square_of_cyclic(())
    assert is_square_of_cyclic((6, 6))
    assert not is_square_of_cyclic((2, 2, 4, 4))
    assert not is_square_of_cyclic((2, 4))


def test_draw_model_invariants():
    rng = Random(34)
    cfg = ModelConfig()
    for h in (10**6, 10**13, 10**19):
        for _ in range(60):
            d = draw_model(h, cfg, rng)
            assert d.height == h
            assert d.rk_prime >= 0
            assert d.rk_prime % 2 == d.n % 2  # alternating rank is even
            root = math.isqrt(d.sha_order)
            assert root * root == d.sha_order  # paired factors force squares
            assert d.sha_label.startswith("[") and d.sha_label.endswith("]")


def test_draw_model_parity_split():
    # rk' parity is decided entirely by the n coin: half odd, half even
    rng = Random(35)
    odd = 0
    for _ in range(4000):
        d = draw_model(10**6, ModelConfig(), rng)
        odd += d.rk_prime % 2
    assert abs(odd - 2000) < 3 * math.sqrt(1000)


def test_rank_one_probability_limit_sense():
    # with a large forced entry bound the even-n draw is almost never
    # singular, so P(rk' >= 1) approaches the odd-n frequency 1/2
    rng = Random(36)
    cfg = ModelConfig(eta_schedule="constant", x_min=200)
    hits = 0
    total = 20000
    for _ in range(total):
        d = draw_model(10**6, cfg, rng)
        hits += d.rk_prime >= 1
    assert abs(hits / total - 0.5) < 0.01


# ---------------------------------------------------------------------------
# empirical corank probabilities


def test_empirical_corank_exact_small():
    # n = 2, x = 1: singular iff the single entry is 0
    est = empirical_corank_prob(2, 1, 1, mode="exact")
    assert est.value == pytest.approx(1 / 3, abs=1e-15)
    assert est.stderr == 0.0
    # any alternating 3 x 3 has corank >= 1
    assert empirical_corank_prob(3, 1, 1, mode="exact").value == 1.0
    # corank 3 at n = 3 needs the zero matrix
    est3 = empirical_corank_prob(3, 1, 3, mode="exact")
    assert est3.value == pytest.approx(1 / 27, abs=1e-15)
    assert empirical_corank_prob(4, 2, 0).value == 1.0


def test_empirical_corank_monte_carlo_vs_exact():
    exact = empirical_corank_prob(4, 2, 2, mode="exact").value
    est = empirical_corank_prob(
        4, 2, 2, mode="monte_carlo", samples=20000, rng=Random(37)
    )
    assert abs(est.value - exact) < 4 * est.stderr + 1e-9
    with pytest.raises(ValueError):
        empirical_corank_prob(4, 2, 2, mode="bogus")


# ---------------------------------------------------------------------------
# conditioned sha distributions


def brute_torsion_distribution_n2(x, p):
    # cokernel of the 2 x 2 draw is Z/|a| x Z/|a|; enumerate a != 0
    counts = {}
    total = 0
    for a in range(-x, x + 1):
        if a == 0:
            continue
        v = 0
        m = abs(a)
        while m % p == 0:
            m //= p
            v += 1
        label = f"{p}:[{','.join(str(v) for _ in range(2))}]" if v else f"{p}:[]"
        counts[label] = counts.get(label, 0) + 1
        total += 1
    return {k: c / total for k, c in counts.items()}


@pytest.mark.parametrize("method", ["exact", "mod"])
def test_sha_distribution_n2_vs_census(method):
    want = brute_torsion_distribution_n2(3, 2)
    dist = empirical_sha_distribution(2, 3, 0, 2, 4000, Random(38), method=method)
    assert dist.total == 4000
    assert dist.meta["method"] == method
    for label, frac in want.items():
        emp = dist.frequency(label)
        se = math.sqrt(frac * (1 - frac) / 4000)
        assert abs(emp - frac) < 4 * se + 1e-9, label


def test_sha_distribution_methods_agree_statistically():
    a = empirical_sha_distribution(5, 8, 1, 2, 3000, Random(39), method="exact")
    b = empirical_sha_distribution(5, 8, 1, 2, 3000, Random(40), method="mod")
    support = set(a.counts) | set(b.counts)
    for label in support:
        fa = a.frequency(label)
        fb = b.frequency(label)
        se = math.sqrt(max(fa * (1 - fa), fb * (1 - fb)) / 3000) + 1e-6
        assert abs(fa - fb) < 5 * se, label


def test_sha_distribution_validation():
    rng = Random(41)
    with pytest.raises(ValueError):
        empirical_sha_distribution(5, 4, 0, 2, 10, rng)  # parity mismatch
    with pytest.raises(ValueError):
        empirical_sha_distribution(4, 4, 2, 2, 10, rng)  # r not in {0, 1}
    with pytest.raises(ValueError):
        empirical_sha_distribution(4, 4, 0, 2, 10, rng, method="guess")


def test_square_cyclic_fraction_n2_always_one():
    # Z/m x Z/m is a square of a cyclic group for every m >= 1
    est = empirical_square_cyclic_fraction(2, 2, 500, Random(42))
    assert est.value == 1.0


def test_square_cyclic_fraction_n4_vs_census():
    # exact conditional fraction over the 3^6 grid at x = 1
    hits = 0
    total = 0
    for upper in product((-1, 0, 1), repeat=6):
        a = AlternatingMatrix(4, upper)
        c = cokernel(a)
        if c.free_rank:
            continue
        total += 1
        hits += is_square_of_cyclic(c.torsion)
    want = hits / total
    est = empirical_square_cyclic_fraction(4, 1, 4000, Random(43))
    se = math.sqrt(want * (1 - want) / 4000)
    assert abs(est.value - want) < 4 * se + 1e-9
    with pytest.raises(ValueError):
        empirical_square_cyclic_fraction(5, 2, 10, Random(0))


# ---------------------------------------------------------------------------
# cokernel distribution for square (non-alternating) draws


def test_cl_distribution_small_matches_gl_probability():
    # P(trivial cokernel) for a uniform n x n matrix over Z_p is
    # prod_{i=1..n} (1 - p^-i); at n = 4, p = 2 that is 315/1024
    dist = empirical_cl_distribution(4, 2, 6, 3000, Random(44))
    want = 1.0
    for i in range(1, 5):
        want *= 1 - 2.0**-i
    emp = dist.frequency("2:[]")
    se = math.sqrt(want * (1 - want) / 3000)
    assert abs(emp - want) < 4 * se
    assert dist.total == 3000
    assert dist.meta["refinement_rounds"] >= 0


def test_cl_distribution_validation():
    with pytest.raises(ValueError):
        empirical_cl_distribution(4, 2, 3, 10, Random(0))  # k too small


def test_empirical_distribution_container():
    d = EmpiricalDistribution({"a": 3, "b": 1}, 4)
    assert d.frequency("a") == 0.75
    assert d.frequency("missing") == 0.0
    with pytest.raises(ValueError):
        EmpiricalDistribution({"a": 3}, 5)
    with pytest.raises(ValueError):
        EmpiricalDistribution({"a": -1}, -1)


# ---------------------------------------------------------------------------
# survey


def test_rank_survey_structure_and_determinism():
    grid = [10**6, 10**8, 10**10]
    cfg = ModelConfig(seed=777, chunk=500)
    recs1, fits1 = rank_survey(grid, 1500, cfg)
    recs2, fits2 = rank_survey(grid, 1500, cfg, threads=2)
    assert recs1 == recs2  # chunk seeding makes threads invisible
    assert fits1.keys() == fits2.keys()
    for r in fits1:
        assert fits1[r] == fits2[r]
    assert len(recs1) == 3 * 5
    for rec in recs1:
        assert rec.h_lo == rec.h_hi // 2
        assert rec.curves_sampled == 1500
        assert 0 <= rec.hits <= 1500
    by_band = {}
    for rec in recs1:
        by_band.setdefault(rec.h_hi, {})[rec.r] = rec.hits
    for h, hits in by_band.items():
        for r in range(1, 5):
            assert hits[r] >= hits[r + 1]  # thresholds nest


def test_rank_survey_seed_sensitivity():
    grid = [10**6, 10**8, 10**10]
    recs_a, _ = rank_survey(grid, 800, ModelConfig(seed=1, chunk=400))
    recs_b, _ = rank_survey(grid, 800, ModelConfig(seed=2, chunk=400))
    assert recs_a != recs_b


def test_rank_survey_validation():
    cfg = ModelConfig()
    with pytest.raises(ValueError):
        rank_survey([10**6, 10**8], 100, cfg)  # too few points
    with pytest.raises(ValueError):
        rank_survey([10**8, 10**6, 10**10], 100, cfg)  # not increasing
    with pytest.raises(ValueError):
        rank_survey([50, 10**6, 10**8], 100, cfg)  # below MIN_HEIGHT


# ---------------------------------------------------------------------------
# predicted table


def test_predicted_table_reference_values():
    # long-run percentage table; printed reference is rounded to 0.1
    reference = {
        10**10: (30.8, 42.7, 19.2, 7.3),
        10**11: (32.6, 43.9, 17.4, 6.0),
        10**12: (34.2, 45.0, 15.8, 5.0),
        10**13: (35.6, 45.9, 14.4, 4.1),
        10**14: (36.9, 46.6, 13.0, 3.4),
        10**15: (38.1, 47.2, 11.9, 2.8),
    }
    rows = predicted_table(sorted(reference))
    for h, c1, c2, c3, c4 in rows:
        for got, want in zip((c1, c2, c3, c4), reference[h]):
            # the reference digits are independently rounded, so agreement
            # is one decimal place, not half an ulp
            assert abs(got - want) <= 0.1 + 1e-9


def test_predicted_table_column_identities():
    rows = predicted_table([10**8, 10**12, 10**20])
    for _, c1, c2, c3, c4 in rows:
        assert c1 + c3 == pytest.approx(50.0, abs=1e-9)
        assert c2 + c4 == pytest.approx(50.0, abs=1e-9)
        assert c1 < c2 and c3 > c4  # rank 1 beats rank 0; tails order


def test_predicted_table_validation():
    with pytest.raises(ValueError):
        predicted_table([1])
