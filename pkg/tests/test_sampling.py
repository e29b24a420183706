"""Sampling distributions, streaming accumulators and the Monte Carlo engine."""

import math

import numpy as np
import pytest

from anticip import (
    MomentAccumulator,
    MonteCarloConfig,
    SamplingDistribution,
    build_orthogonal_measure,
    merge_accumulators,
    near_zero_statistics,
    parseval_total,
    run_monte_carlo,
    sample_spectral_difference,
    spectral_difference_from_measure,
    stream,
    tail_exceedance,
    two_shift_law,
)

UNIFORM = SamplingDistribution.uniform()


class TestDistributions:
    def test_two_point_support(self):
        dist = SamplingDistribution.two_point(1.0)
        draws = dist.sample(stream(0, 0), 1000)
        assert set(np.unique(draws)) <= {-1.0, 1.0}

    def test_uniform_moments_empirical(self):
        draws = UNIFORM.sample(stream(42, 0), 100_000)
        se1 = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean()) <= 4 * se1
        sq = draws**2
        se2 = sq.std(ddof=1) / math.sqrt(sq.size)
        assert abs(sq.mean() - 1 / 3) <= 4 * se2

    def test_symmetric_law_odd_moments_empirical(self):
        for dist in (UNIFORM, SamplingDistribution.two_point(0.7)):
            draws = dist.sample(stream(3, 0), 50_000)
            for power in (1, 3):
                vals = draws**power
                se = vals.std(ddof=1) / math.sqrt(vals.size)
                assert abs(vals.mean()) <= 4 * se

    def test_stream_determinism(self):
        a = UNIFORM.sample(stream(42, 5), 64)
        b = UNIFORM.sample(stream(42, 5), 64)
        assert np.array_equal(a, b)
        c = UNIFORM.sample(stream(42, 6), 64)
        assert not np.array_equal(a, c)

    def test_component_independence(self):
        # lag-1 sample correlation across components vanishes at SE scale
        draws = UNIFORM.sample(stream(12, 0), (5000, 16))
        x, y = draws[:, :-1].ravel(), draws[:, 1:].ravel()
        corr = np.corrcoef(x, y)[0, 1]
        assert abs(corr) <= 4 / math.sqrt(x.size)
        # and across stream indices
        other = UNIFORM.sample(stream(12, 1), (5000, 16))
        corr2 = np.corrcoef(draws.ravel(), other.ravel())[0, 1]
        assert abs(corr2) <= 4 / math.sqrt(draws.size)

    def test_parse_distribution(self):
        from anticip import parse_distribution

        assert parse_distribution("uniform").label == "uniform"
        two = parse_distribution("two-point:0.5")
        assert two.moments.m2 == pytest.approx(0.25)
        with pytest.raises(ValueError):
            parse_distribution("gaussian")

    def test_table_moments_and_validation(self):
        dist = SamplingDistribution.table([0.0, 1.0], [0.5, 0.5])
        assert dist.moments.m1 == pytest.approx(0.5)
        assert dist.moments.m2 == pytest.approx(0.5)
        assert dist.moments.sigma2 == pytest.approx(0.25)
        with pytest.raises(ValueError):
            SamplingDistribution.table([0.0, 2.0], [0.5, 0.5])
        with pytest.raises(ValueError):
            SamplingDistribution.table([0.0, 1.0], [0.9, 0.3])
        with pytest.raises(ValueError):
            SamplingDistribution.table([0.0, 1.0], [0.5, 0.5], symmetric=True)

    def test_mass_within(self):
        assert UNIFORM.mass_within(0.1) == pytest.approx(0.1)
        assert SamplingDistribution.two_point(1.0).mass_within(0.5) == 0.0
        assert SamplingDistribution.two_point(0.2).mass_within(0.5) == 1.0

    def test_sample_spectral_difference(self):
        sd = sample_spectral_difference(UNIFORM, stream(1, 0), period=16)
        assert sd.period == 16
        sdc = sample_spectral_difference(UNIFORM, stream(1, 0), cells=8)
        assert sdc.cells == 8
        with pytest.raises(ValueError):
            sample_spectral_difference(UNIFORM, stream(1, 0))


class TestAccumulator:
    def test_matches_numpy(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=10_000)
        acc = MomentAccumulator()
        acc.add_batch(x)
        assert acc.mean == pytest.approx(x.mean(), rel=1e-12)
        assert acc.variance == pytest.approx(x.var(ddof=1), rel=1e-12)
        mu4 = ((x - x.mean()) ** 4).mean()
        assert acc.m4 / acc.count == pytest.approx(mu4, rel=1e-10)

    def test_merge_equals_single_pass(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=5000)
        whole = MomentAccumulator()
        whole.add_batch(x)
        left, right = MomentAccumulator(), MomentAccumulator()
        left.add_batch(x[:1234])
        right.add_batch(x[1234:])
        merged = merge_accumulators(left, right)
        assert merged.count == whole.count
        assert merged.mean == pytest.approx(whole.mean, rel=1e-13, abs=1e-13)
        assert merged.variance == pytest.approx(whole.variance, rel=1e-12)
        assert merged.m4 == pytest.approx(whole.m4, rel=1e-10)

    def test_merge_with_empty(self):
        acc = MomentAccumulator()
        acc.add_batch(np.arange(5.0))
        merged = merge_accumulators(MomentAccumulator(), acc)
        assert merged.mean == acc.mean and merged.count == acc.count


class TestEngine:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            MonteCarloConfig(dist=UNIFORM, trials=10, seed=0)
        with pytest.raises(ValueError):
            MonteCarloConfig(dist=UNIFORM, trials=10, seed=0, period=8, cells=8)
        with pytest.raises(ValueError):
            MonteCarloConfig(dist=UNIFORM, trials=10, seed=0, period=8, n_list=(9,))
        with pytest.raises(ValueError):
            MonteCarloConfig(dist=UNIFORM, trials=10, seed=0, period=8, N_list=(4,))
        with pytest.raises(ValueError):
            MonteCarloConfig(dist=UNIFORM, trials=0, seed=0, period=8)

    def test_determinism(self):
        cfg = MonteCarloConfig(dist=UNIFORM, trials=2000, seed=11, period=16,
                               n_list=(1, 8), N_list=(0, 4), r_list=(1.0,))
        r1, r2 = run_monte_carlo(cfg), run_monte_carlo(cfg)
        for a, b in zip(r1.rows, r2.rows):
            assert a.acc.mean == b.acc.mean
            assert a.acc.m2 == b.acc.m2

    def test_partition_merge_and_threads(self):
        cfg = MonteCarloConfig(dist=UNIFORM, trials=2048, seed=4, period=32,
                               n_list=(1,), N_list=(0, 8))
        whole = run_monte_carlo(cfg)
        merged = run_monte_carlo(cfg, chunk_range=(0, 3)).merge(
            run_monte_carlo(cfg, chunk_range=(3, 8)))
        threaded = run_monte_carlo(cfg, threads=3)
        assert merged.trials == whole.trials == threaded.trials == 2048
        for a, b, c in zip(whole.rows, merged.rows, threaded.rows):
            assert math.isclose(a.acc.mean, b.acc.mean, rel_tol=1e-12, abs_tol=1e-12)
            assert math.isclose(a.acc.variance, b.acc.variance, rel_tol=1e-12, abs_tol=1e-12)
            assert a.acc.mean == c.acc.mean and a.acc.m2 == c.acc.m2

    def test_thread_env_variable(self, monkeypatch):
        cfg = MonteCarloConfig(dist=UNIFORM, trials=1024, seed=6, period=16)
        base = run_monte_carlo(cfg)
        monkeypatch.setenv("ANTICIP_THREADS", "4")
        from_env = run_monte_carlo(cfg)
        assert base.row("p_tot").acc.mean == from_env.row("p_tot").acc.mean
        assert base.row("p_tot").acc.m2 == from_env.row("p_tot").acc.m2

    def test_std_error_definition(self):
        cfg = MonteCarloConfig(dist=UNIFORM, trials=500, seed=2, period=8)
        row = run_monte_carlo(cfg).row("p_tot")
        assert row.acc.std_error == math.sqrt(row.acc.variance / row.acc.count)

    @pytest.mark.parametrize("p", [16, 64, 256])
    @pytest.mark.parametrize("dist", [UNIFORM, SamplingDistribution.two_point(1.0)],
                             ids=["uniform", "two-point"])
    def test_formula_vs_oracle(self, p, dist):
        cfg = MonteCarloConfig(dist=dist, trials=20_000, seed=101, period=p,
                               n_list=(1, p // 2), N_list=(0, p // 4))
        rep = run_monte_carlo(cfg)
        for row in rep.rows:
            if row.statistic == "moment":
                continue
            assert abs(row.acc.mean - row.pred_mean) <= 4 * row.acc.std_error + 1e-15
            assert (abs(row.acc.variance - row.pred_var)
                    <= 5 * row.acc.variance_std_error + 1e-15)

    def test_formula_vs_oracle_special_index(self):
        # odd p with 2n-1 a multiple of p exercises the T-kernel branch of
        # the variance polynomial
        for dist in (UNIFORM, SamplingDistribution.table([0.0, 1.0], [0.5, 0.5])):
            cfg = MonteCarloConfig(dist=dist, trials=40_000, seed=77, period=9,
                                   n_list=(5,), N_list=(0, 3))
            rep = run_monte_carlo(cfg)
            for row in rep.rows:
                assert abs(row.acc.mean - row.pred_mean) <= 4 * row.acc.std_error + 1e-15
                assert (abs(row.acc.variance - row.pred_var)
                        <= 5 * row.acc.variance_std_error + 1e-15)

    def test_zero_variance_rows_exact(self):
        dist = SamplingDistribution.two_point(1.0)
        cfg = MonteCarloConfig(dist=dist, trials=5000, seed=0, period=16, N_list=(0,))
        rep = run_monte_carlo(cfg)
        tot = rep.row("p_tot")
        assert tot.acc.mean == 1.0
        assert tot.acc.variance == 0.0
        assert rep.row("p_N", 0.0).acc.variance == 0.0
        assert rep.max_abs_z() <= 5.0

    def test_chebyshev_tail_fractions(self):
        cfg = MonteCarloConfig(dist=UNIFORM, trials=20_000, seed=3, period=64)
        rep = run_monte_carlo(cfg)
        mean = rep.row("p_tot").acc.mean
        sd = math.sqrt(rep.row("p_tot").acc.variance)
        # re-draw the same trials to measure exceedance fractions directly
        for delta in (2.0, 3.0):
            frac = tail_exceedance(UNIFORM, 64, 0, mean + delta * sd, 20_000, 3) \
                 + (1.0 - tail_exceedance(UNIFORM, 64, 0, mean - delta * sd, 20_000, 3))
            assert frac <= 1.0 / delta**2 + 0.01

    def test_continuous_mode(self):
        cfg = MonteCarloConfig(dist=UNIFORM, trials=4000, seed=8, cells=32,
                               n_list=(1, 5), N_list=(0, 4))
        rep = run_monte_carlo(cfg)
        tot = rep.row("p_tot")
        assert abs(tot.acc.mean - 1 / 3) <= 4 * tot.acc.std_error
        # total never below the tail
        assert rep.row("p_N", 4.0).acc.mean < tot.acc.mean
        # near-window means stay close to the cell-mapped prediction
        row = rep.row("p_n", 1.0)
        assert abs(row.acc.mean - row.pred_mean) <= 6 * row.acc.std_error
        assert row.z_mean is None  # approximate pairing carries no z-score


class TestNearZero:
    def test_uniform_counts(self):
        rep = near_zero_statistics(UNIFORM, 100, 0.1, 5000, 0)
        assert rep.q == pytest.approx(0.1)
        assert abs(rep.acc.mean - 10.0) <= 4 * rep.acc.std_error
        assert abs(rep.acc.variance - 9.0) <= 5 * rep.acc.variance_std_error
        assert rep.histogram.sum() == 5000
        assert rep.chi_square_dof > 0
        # loose sanity on the fit statistic
        assert rep.chi_square <= rep.chi_square_dof + 6 * math.sqrt(2 * rep.chi_square_dof)

    def test_two_point_counts_zero(self):
        rep = near_zero_statistics(SamplingDistribution.two_point(1.0), 20, 0.5, 500, 0)
        assert rep.acc.mean == 0.0
        assert rep.histogram[0] == 500
        assert rep.z_mean == 0.0

    def test_epsilon_near_one_captures_all(self):
        rep = near_zero_statistics(UNIFORM, 20, 1.0 - 1e-12, 500, 7)
        assert rep.acc.mean == 20.0
        assert rep.histogram[20] == 500

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            near_zero_statistics(UNIFORM, 10, 0.0, 10, 0)
        with pytest.raises(ValueError):
            near_zero_statistics(UNIFORM, 10, 1.0, 10, 0)


def test_measure_route_matches_direct_sampling():
    # building measures and folding them back gives the same p_tot statistics
    # as sampling the induced component law directly
    p, trials = 16, 3000
    gen = stream(21, 0)
    totals = []
    for _ in range(trials):
        m = build_orthogonal_measure(p, two_shift_law(UNIFORM), gen)
        totals.append(parseval_total(spectral_difference_from_measure(m, p)))
    totals = np.asarray(totals)

    cfg = MonteCarloConfig(dist=UNIFORM, trials=trials, seed=22, period=p)
    direct = run_monte_carlo(cfg).row("p_tot")
    se = math.sqrt(totals.var(ddof=1) / trials + direct.acc.std_error**2)
    assert abs(totals.mean() - direct.acc.mean) <= 4 * se
