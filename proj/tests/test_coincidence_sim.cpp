#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "opocomb/coincidence_sim.hpp"
#include "opocomb/fitter.hpp"
#include "sim_oracle.hpp"

using namespace opocomb;

namespace
{

CavityParams single_mode()
{
    CavityParams p;
    p.gamma1 = units::mhz_to_rad_per_s(7.8);
    p.gamma2 = 0.0;
    p.epsilon = 0.01 * p.gamma1;
    p.bandwidth = units::mhz_to_rad_per_s(7.8);
    p.fsr = units::two_pi / 1.63e-9;
    p.n_modes = 0;
    return p;
}

// Survival function of the difference jitter, t >= 0.
double jitter_tail(double t, double fwhm)
{
    const double x = 2.0 * t * units::ln2 / fwhm;
    return 0.5 * std::exp(-x) * (1.0 + 0.5 * x);
}

} // namespace

TEST(SamplePairDelay, SingleModeIsDoubleExponential)
{
    const auto p = single_mode();
    PairDelaySampler sampler(p, DelayWindow{});
    std::mt19937_64 rng(1);
    const std::size_t n = 100000;
    std::vector<double> xs(n);
    for (auto &x : xs)
        x = sampler(rng);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double t = xs[i];
        const double cdf = t < 0.0 ? 0.5 * std::exp(p.bandwidth * t) : 1.0 - 0.5 * std::exp(-p.bandwidth * t);
        d = std::max({d, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
    }
    // asymptotic Kolmogorov critical value at the 1% level
    EXPECT_LT(d * std::sqrt(static_cast<double>(n)), 1.628);
}

TEST(SamplePairDelay, OneToothWindow)
{
    CavityParams p = single_mode();
    p.n_modes = 200;
    const double T = p.round_trip_time();
    const DelayWindow w{2.5 * T, 3.5 * T};
    std::mt19937_64 rng(2);
    PairDelaySampler sampler(p, w);
    for (int i = 0; i < 20000; ++i)
    {
        const double t = sampler(rng);
        ASSERT_GE(t, w.lo);
        ASSERT_LT(t, w.hi);
    }
    auto c = nominal_comb_params();
    std::mt19937_64 rng2(3);
    for (int i = 0; i < 1000; ++i)
        EXPECT_DOUBLE_EQ(sample_pair_delay(c, DelayWindow{-0.5 * c.tau_opo, 0.5 * c.tau_opo}, rng2), 0.0);
}

TEST(SamplePairDelay, ToothWeightsFollowEnvelope)
{
    const auto p = nominal_comb_params();
    PairDelaySampler sampler(p, DelayWindow{});
    std::mt19937_64 rng(4);
    const long n = 1000000;
    std::vector<long> hits(21, 0);
    for (long i = 0; i < n; ++i)
    {
        const long k = std::lround(sampler(rng) / p.tau_opo);
        if (std::abs(k) <= 10)
            ++hits[static_cast<std::size_t>(k + 10)];
    }
    double z = 0.0;
    for (int k = -p.n_sum; k <= p.n_sum; ++k)
        z += std::exp(-p.bandwidth * std::abs(k) * p.tau_opo);
    for (int k = -10; k <= 10; ++k)
    {
        const double prob = std::exp(-p.bandwidth * std::abs(k) * p.tau_opo) / z;
        const double mean = n * prob, sd = std::sqrt(n * prob * (1.0 - prob));
        EXPECT_NEAR(static_cast<double>(hits[static_cast<std::size_t>(k + 10)]), mean, 3.0 * sd) << "tooth " << k;
    }
}

TEST(SamplePairDelay, Errors)
{
    std::mt19937_64 rng(5);
    const auto c = nominal_comb_params();
    EXPECT_THROW(sample_pair_delay(c, DelayWindow{1e-9, 1e-9}, rng), InvalidInput);
    EXPECT_THROW(sample_pair_delay(c, DelayWindow{0.3 * c.tau_opo, 0.6 * c.tau_opo}, rng), InvalidInput);
}

TEST(ApplyJitter, ZeroWidthIsIdentity)
{
    std::mt19937_64 rng(6);
    EXPECT_EQ(apply_jitter(1.25e-9, 0.0, rng), 1.25e-9);
    EXPECT_THROW(apply_jitter(0.0, -1.0, rng), InvalidInput);
}

TEST(ApplyJitter, MeanAndToothShape)
{
    const double fwhm = 220e-12;
    const double b = fwhm / (2.0 * units::ln2);
    std::mt19937_64 rng(7);
    const int n = 1000000;
    const double width = 20e-12, reach = 1500e-12;
    const auto n_bins = static_cast<std::size_t>(2.0 * reach / width + 0.5);
    std::vector<double> counts(n_bins, 0.0);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double j = apply_jitter(0.0, fwhm, rng);
        sum += j;
        if (j >= -reach && j < reach)
            counts[std::min(n_bins - 1, static_cast<std::size_t>((j + reach) / width))] += 1.0;
    }
    EXPECT_LT(std::abs(sum / n), 3.0 * 2.0 * b / std::sqrt(static_cast<double>(n)));

    auto cdf = [&](double t) { return t < 0.0 ? jitter_tail(-t, fwhm) : 1.0 - jitter_tail(t, fwhm); };
    double chi2 = 0.0;
    int dof = 0;
    for (std::size_t i = 0; i < n_bins; ++i)
    {
        const double lo = -reach + i * width;
        const double m = n * (cdf(lo + width) - cdf(lo));
        if (m < 5.0)
            continue;
        chi2 += (counts[i] - m) * (counts[i] - m) / m;
        ++dof;
    }
    EXPECT_LT(chi2 / dof, 1.5);
}

TEST(Simulate, EmptyRunGivesZeroHistogram)
{
    auto cfg = oracle::nominal_config(0, 1);
    const auto h = simulate(nominal_comb_params(), cfg);
    EXPECT_EQ(h.size(), static_cast<std::size_t>(std::floor(100000.0 / 4.88)));
    EXPECT_EQ(h.total(), 0);
    ASSERT_EQ(h.masks.size(), 1u);
    EXPECT_EQ(h.masks[0], (TimeRange{0.0, 45000.0}));
    EXPECT_TRUE(h.masked(0));
    EXPECT_FALSE(h.masked(h.size() - 1));
    EXPECT_EQ(h.acquisition.seed, std::optional<std::uint64_t>(1));
}

TEST(Simulate, CountConservation)
{
    auto cfg = oracle::nominal_config(70000, 11);
    cfg.background_ratio = 0.3;
    const auto out = simulate_tallied(nominal_comb_params(), cfg);
    EXPECT_EQ(out.tally.pairs, 70000u);
    EXPECT_EQ(out.tally.accidentals, 21000u);
    EXPECT_EQ(out.tally.pairs + out.tally.accidentals,
              out.tally.recorded + out.tally.outside_window + out.tally.in_dead_region);
    EXPECT_EQ(static_cast<std::uint64_t>(out.histogram.total()), out.tally.recorded);
    EXPECT_GT(out.tally.in_dead_region, 0u);
    EXPECT_GT(out.tally.outside_window, 0u);
    for (std::size_t i = 0; i < out.histogram.size(); ++i)
    {
        if (out.histogram.masked(i))
        {
            EXPECT_EQ(out.histogram.counts[i], 0);
        }
    }
}

TEST(Simulate, SeedDeterminism)
{
    auto cfg = oracle::nominal_config(100000, 42);
    cfg.background_ratio = 0.1;
    const auto a = simulate(nominal_comb_params(), cfg);
    const auto b = simulate(nominal_comb_params(), cfg);
    EXPECT_EQ(a, b);
    cfg.seed = 43;
    EXPECT_NE(simulate(nominal_comb_params(), cfg).counts, a.counts);
}

TEST(Simulate, ThreadCountDoesNotChangeResult)
{
    auto cfg = oracle::nominal_config(150000, 9);
    cfg.background_ratio = 0.5;
    const auto one = simulate(nominal_comb_params(), cfg);
    cfg.threads = 3;
    EXPECT_EQ(simulate(nominal_comb_params(), cfg), one);
}

TEST(Simulate, MatchesGeneratingModel)
{
    const auto cfg = oracle::nominal_config(200000, 2024);
    const auto h = simulate(nominal_comb_params(), cfg);
    const auto m = oracle::expected_counts(nominal_comb_params(), cfg, h.size());
    const auto r = oracle::pearson(h, m);
    EXPECT_GT(r.reduced(), 0.8);
    EXPECT_LT(r.reduced(), 1.3);
}

TEST(Simulate, CavityModelMatchesAnalyticShape)
{
    CavityParams p = single_mode();
    p.n_modes = 200;
    SimConfig cfg;
    cfg.pair_count = 200000;
    cfg.t_min = -20000.0;
    cfg.t_max = 20000.0;
    cfg.bin_width = 40.0;
    cfg.seed = 5;
    const auto h = simulate(p, cfg);
    // total area from the cosine series of the comb:
    // integral of e^{-a|t|} cos(k W t) over the line is 2a / (a^2 + k^2 W^2)
    const int m = 2 * p.n_modes + 1;
    const double a = p.bandwidth;
    double z = 0.0;
    for (int k = -(m - 1); k <= m - 1; ++k)
        z += (m - std::abs(k)) * 2.0 * a / (a * a + k * k * p.fsr * p.fsr);
    auto density = [&](double t) { return std::exp(-a * std::abs(t)) * dirichlet_comb(p.fsr * t / 2.0, p.n_modes) / z; };
    std::vector<double> expect(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
    {
        const int sub = 400;
        double s = 0.0;
        for (int k = 0; k < sub; ++k)
            s += density(units::ps_to_s(h.bin_lo(i) + (k + 0.5) * h.bin_width / sub));
        expect[i] = cfg.pair_count * s * units::ps_to_s(h.bin_width) / sub;
    }
    const auto r = oracle::pearson(h, expect);
    EXPECT_GT(r.reduced(), 0.8);
    EXPECT_LT(r.reduced(), 1.3);
}

TEST(Simulate, AutocorrelationFindsRoundTrip)
{
    const auto h = simulate(nominal_comb_params(), oracle::nominal_config(200000, 77));
    const auto est = detect_period(h);
    EXPECT_NEAR(est.period_ps, 1630.0, 4.88);
}

TEST(Simulate, SingleModeHasNoPeriodicity)
{
    SimConfig cfg;
    cfg.pair_count = 200000;
    cfg.t_min = -50000.0;
    cfg.t_max = 50000.0;
    cfg.jitter_fwhm = 220.0;
    cfg.seed = 8;
    const auto h = simulate(single_mode(), cfg);
    EXPECT_THROW(detect_period(h), PeriodicityError);
}

TEST(Simulate, ConfigErrors)
{
    auto cfg = oracle::nominal_config(10, 1);
    cfg.t_max = cfg.t_min + 3.0;
    EXPECT_THROW(simulate(nominal_comb_params(), cfg), InvalidInput);
    cfg = oracle::nominal_config(10, 1);
    cfg.t_max = cfg.t_min;
    EXPECT_THROW(simulate(nominal_comb_params(), cfg), InvalidInput);
    cfg = oracle::nominal_config(10, 1);
    cfg.jitter_fwhm = 300.0;
    EXPECT_THROW(simulate(nominal_comb_params(), cfg), InvalidInput);
}
