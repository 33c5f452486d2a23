#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "correlation_model.hpp"
#include "error.hpp"
#include "histogram.hpp"
#include "units.hpp"

// Recovers CombFitParams from a coincidence histogram by bounded
// Levenberg-Marquardt on the binned jitter-averaged comb.
namespace opocomb
{

enum class Loss { least_squares, poisson_weighted };

struct ParamBounds
{
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

// Bounds are in CombFitParams units (seconds, rad/s). Indices follow CombParam.
struct FitOptions
{
    std::vector<TimeRange> mask;  // picoseconds, in addition to the histogram's own masks
    std::array<ParamBounds, comb_param_count> bounds{};
    std::array<bool, comb_param_count> frozen{};
    std::optional<int> n_sum;     // derived from the guess when unset
    Loss loss = Loss::poisson_weighted;
    int max_iter = 200;
    double tol = 1e-9;
    // Simpson average over each bin instead of the bin centre. Unset: on when
    // bin_width > tau_d / 10.
    std::optional<bool> intrabin;
};

struct FitResult
{
    CombFitParams params;
    double objective = 0.0;
    double initial_objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::array<double, comb_param_count> stderr_estimates{}; // SI units, 0 for frozen parameters
    Loss loss = Loss::poisson_weighted;
};

namespace detail
{
// Internal fit coordinates: c1, c2, bandwidth in MHz (cyclic), times in ps.
inline constexpr std::array<double, comb_param_count> fit_scale{
    1.0, 1.0, units::two_pi * 1e6, 1e-12, 1e-12, 1e-12};

inline std::array<double, comb_param_count> to_internal(const CombFitParams &p)
{
    return {p.c1, p.c2, p.bandwidth / fit_scale[2], p.tau0 / fit_scale[3], p.tau_opo / fit_scale[4],
            p.tau_d / fit_scale[5]};
}

inline CombFitParams from_internal(const std::array<double, comb_param_count> &x, int n_sum)
{
    CombFitParams p;
    p.c1 = x[0];
    p.c2 = x[1];
    p.bandwidth = x[2] * fit_scale[2];
    p.tau0 = x[3] * fit_scale[3];
    p.tau_opo = x[4] * fit_scale[4];
    p.tau_d = x[5] * fit_scale[5];
    p.n_sum = n_sum;
    return p;
}

inline bool use_intrabin(const FitOptions &opts, const Histogram &h, const CombFitParams &p)
{
    if (opts.intrabin)
        return *opts.intrabin;
    return units::ps_to_s(h.bin_width) > p.tau_d / 10.0;
}

inline std::vector<std::size_t> visible_indices(const Histogram &h, const std::vector<TimeRange> &extra)
{
    const auto vis = visible_bins(h, extra);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < vis.size(); ++i)
        if (vis[i])
            idx.push_back(i);
    return idx;
}

inline CombFitValue binned_model(const CombFitParams &p, const Histogram &h, std::size_t i, bool intrabin)
{
    if (!intrabin)
        return gamma2_comb_fit_gradient(p, h.bin_center_s(i));
    const double lo = units::ps_to_s(h.bin_lo(i));
    const double hi = units::ps_to_s(h.bin_lo(i) + h.bin_width);
    const auto a = gamma2_comb_fit_gradient(p, lo);
    const auto b = gamma2_comb_fit_gradient(p, 0.5 * (lo + hi));
    const auto c = gamma2_comb_fit_gradient(p, hi);
    CombFitValue out;
    out.value = (a.value + 4.0 * b.value + c.value) / 6.0;
    for (int j = 0; j < comb_param_count; ++j)
        out.gradient[j] = (a.gradient[j] + 4.0 * b.gradient[j] + c.gradient[j]) / 6.0;
    return out;
}

inline double binned_value(const CombFitParams &p, const Histogram &h, std::size_t i, bool intrabin)
{
    if (!intrabin)
        return gamma2_comb_fit(p, h.bin_center_s(i));
    const double lo = units::ps_to_s(h.bin_lo(i));
    const double hi = units::ps_to_s(h.bin_lo(i) + h.bin_width);
    return (gamma2_comb_fit(p, lo) + 4.0 * gamma2_comb_fit(p, 0.5 * (lo + hi)) + gamma2_comb_fit(p, hi)) / 6.0;
}

inline double loss_weight(Loss loss, double model)
{
    return loss == Loss::poisson_weighted ? std::max(model, 1.0) : 1.0;
}
} // namespace detail

// Sum over visible bins of (count - model)^2, divided by max(model, 1) for
// the Poisson-weighted loss. Model evaluated per bin (centre or Simpson).
inline double objective(const CombFitParams &params, const Histogram &hist, const FitOptions &opts)
{
    const auto idx = detail::visible_indices(hist, opts.mask);
    if (idx.empty())
        throw InvalidInput("objective: every bin is masked");
    const bool intrabin = detail::use_intrabin(opts, hist, params);
    double sum = 0.0;
    for (std::size_t i : idx)
    {
        const double m = detail::binned_value(params, hist, i, intrabin);
        const double r = static_cast<double>(hist.counts[i]) - m;
        sum += r * r / detail::loss_weight(opts.loss, m);
    }
    return sum;
}

// Analytic gradient of objective() with respect to the CombFitParams fields (SI).
inline std::array<double, comb_param_count> objective_gradient(const CombFitParams &params, const Histogram &hist,
                                                               const FitOptions &opts)
{
    const auto idx = detail::visible_indices(hist, opts.mask);
    if (idx.empty())
        throw InvalidInput("objective: every bin is masked");
    const bool intrabin = detail::use_intrabin(opts, hist, params);
    std::array<double, comb_param_count> g{};
    for (std::size_t i : idx)
    {
        const auto mv = detail::binned_model(params, hist, i, intrabin);
        const double r = static_cast<double>(hist.counts[i]) - mv.value;
        const double w = detail::loss_weight(opts.loss, mv.value);
        const bool weight_moves = opts.loss == Loss::poisson_weighted && mv.value > 1.0;
        for (int j = 0; j < comb_param_count; ++j)
        {
            double d = -2.0 * r / w * mv.gradient[j];
            if (weight_moves)
                d -= r * r / (w * w) * mv.gradient[j];
            g[j] += d;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Periodicity and initial guess

struct PeriodEstimate
{
    double period_ps = 0.0;
    double prominence = 0.0;
    int harmonics = 0; // autocorrelation peaks used in the refinement
};

namespace detail
{
// Longest run of consecutive visible bins, [first, last).
inline std::array<std::size_t, 2> longest_visible_run(const std::vector<bool> &vis)
{
    std::size_t best_a = 0, best_len = 0;
    for (std::size_t i = 0; i < vis.size();)
    {
        if (!vis[i])
        {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < vis.size() && vis[j])
            ++j;
        if (j - i > best_len)
        {
            best_a = i;
            best_len = j - i;
        }
        i = j;
    }
    return {best_a, best_a + best_len};
}

inline std::vector<double> moving_average(const std::vector<double> &v, std::size_t half)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        const std::size_t a = i >= half ? i - half : 0;
        const std::size_t b = std::min(v.size(), i + half + 1);
        double s = 0.0;
        for (std::size_t k = a; k < b; ++k)
            s += v[k];
        out[i] = s / static_cast<double>(b - a);
    }
    return out;
}

// Vertex offset of the parabola through (−1, a), (0, b), (1, c).
inline double parabolic_offset(double a, double b, double c)
{
    const double den = a - 2.0 * b + c;
    if (den >= 0.0)
        return 0.0;
    return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}
} // namespace detail

// Dominant comb period from the autocorrelation of the longest visible run.
// The first autocorrelation maximum rising at least 0.1 above the preceding
// valley is taken, confirmed at twice the lag when that fits, and refined by
// a least-squares line through the harmonic peak lags.
inline PeriodEstimate detect_period(const Histogram &hist, const std::vector<TimeRange> &extra_mask = {})
{
    const auto vis = visible_bins(hist, extra_mask);
    const auto [a, b] = detail::longest_visible_run(vis);
    const std::size_t n = b - a;

    PeriodicityDiagnostics diag;
    diag.visible_bins = n;
    diag.span_ps = static_cast<double>(n) * hist.bin_width;
    if (n < 16)
        throw PeriodicityError("too few visible bins for a period search", diag);

    std::vector<double> y(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += y[i] = static_cast<double>(hist.counts[a + i]);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (auto &v : y)
    {
        v -= mean;
        var += v * v;
    }
    if (var <= 0.0)
        throw PeriodicityError("histogram is flat", diag);

    const std::size_t lmax = n / 2;
    std::vector<double> acf(lmax + 1);
    for (std::size_t lag = 0; lag <= lmax; ++lag)
    {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            s += y[i] * y[i + lag];
        acf[lag] = s / var;
    }
    const auto r = detail::moving_average(acf, 1);

    constexpr double min_prominence = 0.1;
    std::size_t start = 1;
    while (start < lmax && r[start] >= 0.5)
        ++start;

    std::size_t first = 0;
    double valley = r[start], best_prom = 0.0;
    for (std::size_t lag = start + 1; lag + 1 <= lmax; ++lag)
    {
        valley = std::min(valley, r[lag]);
        const bool local_max = r[lag] >= r[lag - 1] && r[lag] > r[lag + 1];
        if (!local_max)
            continue;
        const double prom = r[lag] - valley;
        if (prom > best_prom)
        {
            best_prom = prom;
            diag.best_lag_ps = static_cast<double>(lag) * hist.bin_width;
        }
        if (prom > min_prominence)
        {
            first = lag;
            break;
        }
    }
    diag.prominence = best_prom;
    if (first == 0)
        throw PeriodicityError("no autocorrelation peak above the prominence threshold", diag);

    // the first qualifying local maximum can sit on the rising edge
    std::size_t peak = first;
    const std::size_t look = std::max<std::size_t>(1, first / 4);
    for (std::size_t lag = first; lag <= std::min(lmax - 1, first + look); ++lag)
        if (r[lag] > r[peak])
            peak = lag;

    if (3 * peak > n)
        throw PeriodicityError("fewer than three periods visible", diag);

    const double p0 = static_cast<double>(peak);
    auto peak_near = [&](double centre) -> std::optional<double> {
        const double w = p0 / 4.0;
        const auto lo = static_cast<std::size_t>(std::max(1.0, std::floor(centre - w)));
        const auto hi = static_cast<std::size_t>(std::floor(centre + w));
        if (hi + 1 > lmax)
            return std::nullopt;
        std::size_t best = lo;
        for (std::size_t lag = lo; lag <= hi; ++lag)
            if (acf[lag] > acf[best])
                best = lag;
        return static_cast<double>(best) + detail::parabolic_offset(acf[best - 1], acf[best], acf[best + 1]);
    };

    // second harmonic must also stand out when it is inside the search range
    if (auto second = peak_near(2.0 * p0))
    {
        double dip = std::numeric_limits<double>::infinity();
        for (std::size_t lag = peak; lag <= static_cast<std::size_t>(*second); ++lag)
            dip = std::min(dip, r[lag]);
        if (r[static_cast<std::size_t>(std::lround(*second))] - dip < min_prominence / 2.0)
            throw PeriodicityError("autocorrelation peak does not repeat at twice its lag", diag);
    }

    double num = 0.0, den = 0.0;
    int used = 0;
    for (int k = 1;; ++k)
    {
        const auto lag = peak_near(k * p0);
        if (!lag)
            break;
        num += k * *lag;
        den += static_cast<double>(k) * k;
        ++used;
    }
    PeriodEstimate est;
    est.period_ps = (used > 0 ? num / den : p0) * hist.bin_width;
    est.prominence = best_prom;
    est.harmonics = used;
    return est;
}

struct EnvelopeEstimate
{
    double bandwidth = 0.0; // rad/s
    int teeth = 0;
};

// Log-linear regression of tooth heights against |n| tau_opo. Each height is
// the summed count within +-half_width of tau0 + n tau_opo; teeth whose
// window is not fully visible are skipped. Times in ps.
inline EnvelopeEstimate envelope_decay_rate(const Histogram &hist, double tau0_ps, double tau_opo_ps, int max_n,
                                            double half_width_ps, const std::vector<TimeRange> &extra_mask = {})
{
    const auto vis = visible_bins(hist, extra_mask);
    std::vector<double> xs, ys;
    for (int k = -max_n; k <= max_n; ++k)
    {
        const double c = tau0_ps + k * tau_opo_ps;
        const double lo = c - half_width_ps, hi = c + half_width_ps;
        if (lo < hist.origin || hi > hist.origin + hist.span())
            continue;
        const auto i0 = static_cast<std::size_t>(std::ceil((lo - hist.origin) / hist.bin_width - 0.5));
        const auto i1 = static_cast<std::size_t>(std::floor((hi - hist.origin) / hist.bin_width - 0.5));
        double sum = 0.0;
        bool ok = i1 >= i0 && i1 < hist.size();
        for (std::size_t i = i0; ok && i <= i1; ++i)
        {
            ok = vis[i];
            sum += static_cast<double>(hist.counts[i]);
        }
        if (!ok || sum <= 0.0)
            continue;
        xs.push_back(units::ps_to_s(std::abs(k * tau_opo_ps)));
        ys.push_back(std::log(sum));
    }
    EnvelopeEstimate out;
    out.teeth = static_cast<int>(xs.size());
    if (xs.size() < 2)
        return out;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    out.bandwidth = sxx > 0.0 ? -sxy / sxx : 0.0;
    return out;
}

namespace detail
{
// x where (1 + x) e^{-x} = 1/2.
inline double tooth_half_point()
{
    double x = 1.7;
    for (int i = 0; i < 50; ++i)
    {
        const double f = (1.0 + x) * std::exp(-x) - 0.5;
        const double df = -x * std::exp(-x);
        x -= f / df;
    }
    return x;
}
} // namespace detail

// Starting point for the fit from the histogram alone. Throws
// PeriodicityError when no comb is found.
inline CombFitParams initial_guess(const Histogram &hist, const std::vector<TimeRange> &extra_mask = {})
{
    validate(hist);
    const PeriodEstimate period = detect_period(hist, extra_mask);
    const double P = period.period_ps;
    const auto vis = visible_bins(hist, extra_mask);

    std::vector<double> raw(hist.size());
    for (std::size_t i = 0; i < hist.size(); ++i)
        raw[i] = static_cast<double>(hist.counts[i]);
    const auto half = static_cast<std::size_t>(std::max(0.0, std::round(P / 128.0 / hist.bin_width)));
    const auto smooth = detail::moving_average(raw, half);

    std::size_t ipk = hist.size();
    for (std::size_t i = 0; i < hist.size(); ++i)
        if (vis[i] && (ipk == hist.size() || smooth[i] > smooth[ipk]))
            ipk = i;
    const double tau0 = hist.bin_center(ipk);
    const double peak = smooth[ipk];

    // valley half a period away on the visible side(s)
    double valley = peak;
    const auto half_period_bins = static_cast<long>(std::lround(P / 2.0 / hist.bin_width));
    for (long d : {-half_period_bins, half_period_bins})
    {
        const long j = static_cast<long>(ipk) + d;
        if (j >= 0 && j < static_cast<long>(hist.size()) && vis[static_cast<std::size_t>(j)])
            valley = std::min(valley, smooth[static_cast<std::size_t>(j)]);
    }
    if (valley == peak)
        valley = 0.0;

    // full width at half height above the valley
    const double level = valley + 0.5 * (peak - valley);
    auto crossing = [&](int dir) {
        long i = static_cast<long>(ipk);
        while (true)
        {
            const long j = i + dir;
            if (j < 0 || j >= static_cast<long>(hist.size()) || !vis[static_cast<std::size_t>(j)])
                return hist.bin_center(static_cast<std::size_t>(i));
            if (smooth[static_cast<std::size_t>(j)] < level)
            {
                const double a = smooth[static_cast<std::size_t>(i)], b = smooth[static_cast<std::size_t>(j)];
                const double f = (a - level) / (a - b);
                return hist.bin_center(static_cast<std::size_t>(i)) + dir * f * hist.bin_width;
            }
            i = j;
        }
    };
    const double fwhm = std::max(crossing(+1) - crossing(-1), hist.bin_width);
    const double tau_d = fwhm * units::ln2 / detail::tooth_half_point();

    const int teeth = static_cast<int>(hist.span() / P) + 1;
    auto env = envelope_decay_rate(hist, tau0, P, teeth, std::min(tau_d / 2.0, P / 4.0), extra_mask);
    double bandwidth = env.bandwidth;
    if (!(bandwidth > 0.0))
        bandwidth = 1.0 / units::ps_to_s(hist.span());

    CombFitParams g;
    g.tau0 = units::ps_to_s(tau0);
    g.tau_opo = units::ps_to_s(P);
    g.tau_d = units::ps_to_s(tau_d);
    g.bandwidth = bandwidth;
    g.c1 = std::max(peak, 1e-9);
    const double tails = 2.0 * tooth_profile(g.tau_opo / 2.0, g.tau_d) * std::exp(-bandwidth * g.tau_opo / 2.0);
    g.c2 = std::max(0.0, valley / g.c1 - tails);
    g.n_sum = std::max(required_n_sum(g.bandwidth, g.tau_opo), teeth + 2);
    return g;
}

// ---------------------------------------------------------------------------
// Fit

namespace detail
{
inline std::array<ParamBounds, comb_param_count> effective_bounds(const FitOptions &opts, const Histogram &h)
{
    // physical limits in internal units
    std::array<ParamBounds, comb_param_count> b{{{1e-12, 1e15},
                                                 {0.0, 1e9},
                                                 {1e-6, 1e6},
                                                 {h.origin - h.span(), h.origin + 2.0 * h.span()},
                                                 {1e-3, 1e9},
                                                 {1e-3, 1e9}}};
    for (int j = 0; j < comb_param_count; ++j)
    {
        b[j].lo = std::max(b[j].lo, opts.bounds[j].lo / fit_scale[j]);
        b[j].hi = std::min(b[j].hi, opts.bounds[j].hi / fit_scale[j]);
    }
    return b;
}
} // namespace detail

inline FitResult fit(const Histogram &hist, const FitOptions &opts, std::optional<CombFitParams> guess = std::nullopt)
{
    validate(hist);
    if (opts.max_iter < 0 || !(opts.tol >= 0.0))
        throw InvalidInput("fit: max_iter and tol must be non-negative");
    for (int j = 0; j < comb_param_count; ++j)
        if (!opts.frozen[j] && !(opts.bounds[j].lo < opts.bounds[j].hi))
            throw InvalidInput("fit: bounds need lower < upper for every free parameter");

    const CombFitParams start = guess ? *guess : initial_guess(hist, opts.mask);
    const int n_sum = opts.n_sum ? *opts.n_sum : start.n_sum;
    const auto bounds = detail::effective_bounds(opts, hist);

    std::vector<int> free;
    for (int j = 0; j < comb_param_count; ++j)
        if (!opts.frozen[j])
            free.push_back(j);

    auto x = detail::to_internal(start);
    for (int j : free)
        x[j] = std::clamp(x[j], bounds[j].lo, bounds[j].hi);

    const auto idx = detail::visible_indices(hist, opts.mask);
    if (idx.empty())
        throw InvalidInput("fit: every bin is masked");
    const bool intrabin = detail::use_intrabin(opts, hist, detail::from_internal(x, n_sum));

    auto eval = [&](const std::array<double, comb_param_count> &xi) {
        FitOptions o = opts;
        o.intrabin = intrabin;
        return objective(detail::from_internal(xi, n_sum), hist, o);
    };

    const auto nf = static_cast<Eigen::Index>(free.size());
    const auto nb = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd J(nb, nf);
    Eigen::VectorXd res(nb);

    // weighted residuals and their Jacobian, weights frozen at x
    auto linearize = [&](const std::array<double, comb_param_count> &xi) {
        const CombFitParams p = detail::from_internal(xi, n_sum);
        for (Eigen::Index r = 0; r < nb; ++r)
        {
            const auto mv = detail::binned_model(p, hist, idx[static_cast<std::size_t>(r)], intrabin);
            const double s = 1.0 / std::sqrt(detail::loss_weight(opts.loss, mv.value));
            res[r] = (static_cast<double>(hist.counts[idx[static_cast<std::size_t>(r)]]) - mv.value) * s;
            for (Eigen::Index c = 0; c < nf; ++c)
            {
                const int j = free[static_cast<std::size_t>(c)];
                J(r, c) = -mv.gradient[j] * detail::fit_scale[j] * s;
            }
        }
    };

    FitResult out;
    out.loss = opts.loss;
    double f = eval(x);
    out.initial_objective = f;
    double lambda = 1e-6;

    if (nf == 0)
        out.converged = true;
    while (!out.converged && out.iterations < opts.max_iter)
    {
        ++out.iterations;
        if (f == 0.0)
        {
            out.converged = true;
            break;
        }
        linearize(x);
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * res;

        // parameters held at a bound by the descent direction sit out this step
        std::vector<Eigen::Index> moving;
        for (Eigen::Index c = 0; c < nf; ++c)
        {
            const int j = free[static_cast<std::size_t>(c)];
            const bool pinned = (x[j] <= bounds[j].lo && g[c] > 0.0) || (x[j] >= bounds[j].hi && g[c] < 0.0);
            if (!pinned)
                moving.push_back(c);
        }
        if (moving.empty())
        {
            out.converged = true;
            break;
        }
        const auto nm = static_cast<Eigen::Index>(moving.size());
        Eigen::MatrixXd Am(nm, nm);
        Eigen::VectorXd gm(nm);
        for (Eigen::Index r = 0; r < nm; ++r)
        {
            gm[r] = g[moving[static_cast<std::size_t>(r)]];
            for (Eigen::Index c = 0; c < nm; ++c)
                Am(r, c) = A(moving[static_cast<std::size_t>(r)], moving[static_cast<std::size_t>(c)]);
        }

        bool accepted = false;
        while (lambda < 1e16)
        {
            Eigen::MatrixXd M = Am;
            for (Eigen::Index c = 0; c < nm; ++c)
                M(c, c) += lambda * std::max(Am(c, c), 1e-300);
            const Eigen::VectorXd step = M.ldlt().solve(-gm);
            auto trial = x;
            for (Eigen::Index c = 0; c < nm; ++c)
            {
                const int j = free[static_cast<std::size_t>(moving[static_cast<std::size_t>(c)])];
                trial[j] = std::clamp(x[j] + step[c], bounds[j].lo, bounds[j].hi);
            }
            const double ft = step.allFinite() ? eval(trial) : std::numeric_limits<double>::infinity();
            if (ft < f)
            {
                const double rel = (f - ft) / f;
                x = trial;
                f = ft;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel < opts.tol)
                    out.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        // no step lowers the objective: stationary within round-off
        if (!accepted)
            out.converged = true;
    }

    out.params = detail::from_internal(x, n_sum);
    out.objective = f;
    // teeth beyond the guess's n_sum lie outside the window, so raising it
    // to the tail criterion of the fitted envelope leaves the objective as is
    if (!opts.n_sum)
        out.params.n_sum = std::max(n_sum, required_n_sum(out.params.bandwidth, out.params.tau_opo));

    // standard errors from the Gauss-Newton curvature at the optimum
    if (nf > 0)
    {
        linearize(x);
        const Eigen::MatrixXd A = J.transpose() * J;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible())
        {
            const Eigen::MatrixXd cov = lu.inverse();
            double s2 = 1.0;
            if (opts.loss == Loss::least_squares)
                s2 = nb > nf ? f / static_cast<double>(nb - nf) : 0.0;
            for (Eigen::Index c = 0; c < nf; ++c)
            {
                const int j = free[static_cast<std::size_t>(c)];
                out.stderr_estimates[j] = std::sqrt(std::max(0.0, s2 * cov(c, c))) * detail::fit_scale[j];
            }
        }
    }
    return out;
}

} // namespace opocomb
