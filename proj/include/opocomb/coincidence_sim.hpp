#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "correlation_model.hpp"
#include "error.hpp"
#include "histogram.hpp"
#include "units.hpp"

// Monte Carlo coincidence histograms: comb-distributed pair delays, detector
// jitter, flat accidentals, pTA-style binning and a leading dead region.
namespace opocomb
{

// CavityParams: pair delays follow the enveloped Dirichlet comb.
// CombFitParams: pair delays sit on an ideal delta comb offset by tau0, and
// after jitter the recorded delays follow gamma2_comb_fit exactly.
using CorrelationModel = std::variant<CavityParams, CombFitParams>;

// Delay interval in seconds, [lo, hi).
struct DelayWindow
{
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

namespace detail
{
// Standard Laplace deviate scaled so its density has the given FWHM.
template <class Rng>
double laplace_deviate(double fwhm, Rng &rng)
{
    std::exponential_distribution<double> e(1.0);
    return fwhm / (2.0 * units::ln2) * (e(rng) - e(rng));
}
} // namespace detail

// Draws pedestal-free pair delays (seconds, centred on the zero-delay tooth)
// restricted to a window. Tooth index n is drawn with weight
// e^{-bandwidth |n| tau_opo}; within a tooth the offset is drawn from the
// single-tooth profile and the envelope mismatch across the tooth is removed
// by rejection.
class PairDelaySampler
{
public:
    PairDelaySampler(const CorrelationModel &model, DelayWindow window) : window_(window)
    {
        if (!(window.lo < window.hi))
            throw InvalidInput("sample_pair_delay: empty window");

        long n_lim = 0;
        if (const auto *cav = std::get_if<CavityParams>(&model))
        {
            validate(*cav);
            period_ = cav->round_trip_time();
            bandwidth_ = cav->bandwidth;
            n_modes_ = cav->n_modes;
            delta_teeth_ = false;
            // weights below e^{-42} are never drawn in practice
            n_lim = static_cast<long>(std::ceil(42.0 / (bandwidth_ * period_)));
        }
        else
        {
            const auto &comb = std::get<CombFitParams>(model);
            validate(comb);
            period_ = comb.tau_opo;
            bandwidth_ = comb.bandwidth;
            delta_teeth_ = true;
            n_lim = comb.n_sum;
        }

        // teeth whose support meets the window
        const double reach = delta_teeth_ ? 0.0 : 0.5 * period_;
        const double lo_d = std::ceil((window.lo - reach) / period_ - (delta_teeth_ ? 0.0 : 1e-12));
        const double hi_d = delta_teeth_ ? std::ceil(window.hi / period_) - 1.0
                                         : std::floor((window.hi + reach) / period_);
        const long lo = static_cast<long>(std::max(lo_d, static_cast<double>(-n_lim)));
        const long hi = static_cast<long>(std::min(hi_d, static_cast<double>(n_lim)));
        for (long n = lo; n <= hi; ++n)
        {
            if (delta_teeth_ && !(n * period_ >= window.lo && n * period_ < window.hi))
                continue;
            teeth_.push_back(n);
        }
        if (teeth_.empty())
            throw InvalidInput("sample_pair_delay: window covers no tooth");

        std::vector<double> w;
        w.reserve(teeth_.size());
        const long n_min = *std::min_element(teeth_.begin(), teeth_.end(),
                                             [](long a, long b) { return std::abs(a) < std::abs(b); });
        // relative weights keep the largest at 1
        for (long n : teeth_)
            w.push_back(std::exp(-bandwidth_ * period_ * static_cast<double>(std::abs(n) - std::abs(n_min))));
        tooth_dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }

    double period() const { return period_; }
    double bandwidth() const { return bandwidth_; }
    const std::vector<long> &teeth() const { return teeth_; }

    template <class Rng>
    double operator()(Rng &rng)
    {
        if (delta_teeth_)
            return static_cast<double>(teeth_[tooth_dist_(rng)]) * period_;

        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double m = 2.0 * n_modes_ + 1.0;
        const double theta_c = std::numbers::pi / (2.0 * m);
        const double flat_mass = m;       // both masses divided by pi
        const double tail_mass = m - 1.0;
        const double slack = std::exp(-0.5 * bandwidth_ * period_);

        for (long attempt = 0; attempt < max_attempts; ++attempt)
        {
            const long n = teeth_[tooth_dist_(rng)];

            // proposal min(M^2, (pi/2)^2 / theta^2) on [-pi/2, pi/2]
            double theta, bound;
            if (unit(rng) * (flat_mass + tail_mass) < flat_mass)
            {
                theta = (2.0 * unit(rng) - 1.0) * theta_c;
                bound = m * m;
            }
            else
            {
                const double inv = 1.0 / theta_c - unit(rng) * (1.0 / theta_c - 2.0 / std::numbers::pi);
                theta = (unit(rng) < 0.5 ? -1.0 : 1.0) / inv;
                bound = 0.25 * std::numbers::pi * std::numbers::pi / (theta * theta);
            }
            if (unit(rng) * bound > dirichlet_comb(theta, n_modes_))
                continue;

            const double tau = static_cast<double>(n) * period_ + theta * period_ / std::numbers::pi;
            const double env = std::exp(-bandwidth_ * (std::abs(tau) - std::abs(static_cast<double>(n)) * period_));
            if (unit(rng) >= env * slack)
                continue;
            if (tau < window_.lo || tau >= window_.hi)
                continue;
            return tau;
        }
        throw InvalidInput("sample_pair_delay: window too narrow for rejection sampling");
    }

    static constexpr long max_attempts = 10'000'000;

private:
    DelayWindow window_;
    double period_ = 0.0;
    double bandwidth_ = 0.0;
    int n_modes_ = 0;
    bool delta_teeth_ = true;
    std::vector<long> teeth_;
    std::discrete_distribution<std::size_t> tooth_dist_;
};

template <class Rng>
double sample_pair_delay(const CorrelationModel &model, DelayWindow window, Rng &rng)
{
    PairDelaySampler sampler(model, window);
    return sampler(rng);
}

// tau_true plus the two-detector difference jitter: the sum of two
// independent Laplace deviates of FWHM jitter_fwhm. Convolving a delta with
// this kernel gives the (1 + x) e^{-x} tooth.
template <class Rng>
double apply_jitter(double tau_true, double jitter_fwhm, Rng &rng)
{
    if (!(jitter_fwhm >= 0.0))
        throw InvalidInput("apply_jitter: jitter_fwhm must be non-negative");
    if (jitter_fwhm == 0.0)
        return tau_true;
    return tau_true + detail::laplace_deviate(jitter_fwhm, rng) + detail::laplace_deviate(jitter_fwhm, rng);
}

// Simulation settings. Times in picoseconds.
struct SimConfig
{
    std::uint64_t pair_count = 0;
    double background_ratio = 0.0; // accidentals per true pair, flat over the window
    double t_min = 0.0;
    double t_max = 0.0;
    double dead_before = 0.0;      // leading dead region, from t_min
    double jitter_fwhm = 0.0;      // 0 with a CombFitParams model means "use tau_d"
    double bin_width = 4.88;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::string label;
    unsigned threads = 1;          // 0 picks the hardware concurrency
};

inline void validate(const SimConfig &c)
{
    if (!(c.t_min < c.t_max))
        throw InvalidInput("simulate: require t_min < t_max");
    if (!(c.bin_width > 0.0))
        throw InvalidInput("simulate: bin width must be positive");
    if (c.t_max - c.t_min < c.bin_width)
        throw InvalidInput("simulate: window narrower than one bin");
    if (!(c.dead_before >= 0.0) || !(c.background_ratio >= 0.0) || !(c.jitter_fwhm >= 0.0))
        throw InvalidInput("simulate: dead_before, background_ratio and jitter_fwhm must be non-negative");
}

// Where generated events ended up.
struct SimTally
{
    std::uint64_t pairs = 0;
    std::uint64_t accidentals = 0;
    std::uint64_t outside_window = 0;
    std::uint64_t in_dead_region = 0;
    std::uint64_t recorded = 0;
};

struct SimOutput
{
    Histogram histogram;
    SimTally tally;
};

namespace detail
{
inline constexpr std::uint64_t sim_chunk = 1u << 16;

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(chunk),
                      static_cast<std::uint32_t>(chunk >> 32)};
    return std::mt19937_64(seq);
}

struct ChunkResult
{
    std::vector<std::int64_t> counts;
    SimTally tally;
};
} // namespace detail

inline SimOutput simulate_tallied(const CorrelationModel &model, const SimConfig &config)
{
    validate(config);
    const auto n_bins = static_cast<std::size_t>(std::floor((config.t_max - config.t_min) / config.bin_width + 1e-9));

    Histogram hist;
    hist.bin_width = config.bin_width;
    hist.origin = config.t_min;
    hist.counts.assign(n_bins, 0);
    if (config.dead_before > 0.0)
        hist.masks.push_back({config.t_min, config.t_min + config.dead_before});
    hist.acquisition = {config.duration_s, config.label, config.seed};
    const std::vector<bool> visible = visible_bins(hist);

    const bool comb_model = std::holds_alternative<CombFitParams>(model);
    double jitter = config.jitter_fwhm;
    double shift = 0.0;
    double bandwidth = 0.0;
    if (comb_model)
    {
        const auto &p = std::get<CombFitParams>(model);
        if (jitter == 0.0)
            jitter = units::s_to_ps(p.tau_d);
        else if (std::abs(jitter - units::s_to_ps(p.tau_d)) > 1e-9 * jitter)
            throw InvalidInput("simulate: jitter_fwhm must match the comb model's tau_d");
        shift = p.tau0;
        bandwidth = p.bandwidth;
    }
    const double jitter_s = units::ps_to_s(jitter);
    // largest jitter excursion the envelope correction accounts for
    const double jitter_cap = 50.0 * jitter_s / (2.0 * units::ln2);

    const PairDelaySampler proto(model, DelayWindow{});
    const auto accidentals = static_cast<std::uint64_t>(std::llround(config.background_ratio * static_cast<double>(config.pair_count)));
    const double axis_hi = hist.bin_lo(0) + static_cast<double>(n_bins) * config.bin_width;

    auto record = [&](detail::ChunkResult &out, double t_ps) {
        if (!(t_ps >= config.t_min && t_ps < axis_hi))
        {
            ++out.tally.outside_window;
            return;
        }
        auto bin = static_cast<std::size_t>((t_ps - config.t_min) / config.bin_width);
        bin = std::min(bin, n_bins - 1);
        if (!visible[bin])
        {
            ++out.tally.in_dead_region;
            return;
        }
        ++out.counts[bin];
        ++out.tally.recorded;
    };

    const std::uint64_t pair_chunks = (config.pair_count + detail::sim_chunk - 1) / detail::sim_chunk;
    const std::uint64_t acc_chunks = (accidentals + detail::sim_chunk - 1) / detail::sim_chunk;
    const std::uint64_t total_chunks = pair_chunks + acc_chunks;

    // each worker accumulates into its own tally; integer sums make the merge
    // independent of the thread count
    auto run_chunk = [&](std::uint64_t idx, detail::ChunkResult &out) {
        if (idx < pair_chunks)
        {
            auto rng = detail::stream_rng(config.seed, 0, idx);
            PairDelaySampler sampler = proto;
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const std::uint64_t begin = idx * detail::sim_chunk;
            const std::uint64_t end = std::min(config.pair_count, begin + detail::sim_chunk);
            for (std::uint64_t i = begin; i < end; ++i)
            {
                double tau;
                for (;;)
                {
                    const double base = sampler(rng);
                    tau = apply_jitter(base, jitter_s, rng);
                    if (!comb_model)
                        break;
                    // move the envelope from the tooth centre to the recorded delay
                    const double accept = std::exp(-bandwidth * (std::abs(tau) - std::abs(base) + jitter_cap));
                    if (unit(rng) < accept)
                        break;
                }
                ++out.tally.pairs;
                record(out, units::s_to_ps(tau + shift));
            }
        }
        else
        {
            const std::uint64_t a = idx - pair_chunks;
            auto rng = detail::stream_rng(config.seed, 1, a);
            std::uniform_real_distribution<double> where(config.t_min, axis_hi);
            const std::uint64_t begin = a * detail::sim_chunk;
            const std::uint64_t end = std::min(accidentals, begin + detail::sim_chunk);
            for (std::uint64_t i = begin; i < end; ++i)
            {
                ++out.tally.accidentals;
                record(out, where(rng));
            }
        }
    };

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = static_cast<unsigned>(std::clamp<std::uint64_t>(total_chunks, 1, threads));
    std::vector<detail::ChunkResult> partial(threads);
    for (auto &p : partial)
        p.counts.assign(n_bins, 0);
    if (threads == 1)
    {
        for (std::uint64_t i = 0; i < total_chunks; ++i)
            run_chunk(i, partial[0]);
    }
    else
    {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::uint64_t i; (i = next.fetch_add(1)) < total_chunks;)
                    run_chunk(i, partial[t]);
            });
    }

    SimTally tally;
    for (const auto &r : partial)
    {
        for (std::size_t b = 0; b < n_bins; ++b)
            hist.counts[b] += r.counts[b];
        tally.pairs += r.tally.pairs;
        tally.accidentals += r.tally.accidentals;
        tally.outside_window += r.tally.outside_window;
        tally.in_dead_region += r.tally.in_dead_region;
        tally.recorded += r.tally.recorded;
    }
    return {std::move(hist), tally};
}

inline Histogram simulate(const CorrelationModel &model, const SimConfig &config)
{
    return simulate_tallied(model, config).histogram;
}

} // namespace opocomb
