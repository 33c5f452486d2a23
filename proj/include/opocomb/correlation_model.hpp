#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "units.hpp"

// Analytic model of the two-photon intensity correlation from a degenerate
// OPO far below threshold: cavity gains, the multimode comb, the detector
// jitter kernel, and the jitter-averaged comb used for fitting histograms.
namespace opocomb
{

// Physical cavity description. Angular frequencies in rad/s.
struct CavityParams
{
    double gamma1 = 0.0;        // output-coupler coupling constant
    double gamma2 = 0.0;        // loss-channel coupling constant
    double epsilon = 0.0;       // single-pass parametric amplitude gain
    double bandwidth = 0.0;     // cavity bandwidth, sets the e^{-bandwidth |tau|} envelope
    double fsr = 0.0;           // free spectral range; round trip = 2 pi / fsr
    int n_modes = 200;          // N, so that 2N+1 longitudinal modes contribute
    double finesse_ratio = 1.0; // lossy over lossless finesse

    double round_trip_time() const { return units::two_pi / fsr; }
};

// Hard invariants throw; the below-threshold check is soft and only reported.
inline std::vector<std::string> validate(const CavityParams &p)
{
    if (!(p.gamma1 > 0.0) || !(p.gamma2 >= 0.0))
        throw InvalidInput("cavity: require gamma1 > 0 and gamma2 >= 0");
    if (!(p.bandwidth > 0.0) || !(p.fsr > 0.0))
        throw InvalidInput("cavity: require bandwidth > 0 and fsr > 0");
    if (!(p.bandwidth < p.fsr))
        throw InvalidInput("cavity: bandwidth must be below the free spectral range");
    if (!(p.finesse_ratio > 0.0 && p.finesse_ratio <= 1.0))
        throw InvalidInput("cavity: finesse_ratio must lie in (0, 1]");
    if (p.n_modes < 0)
        throw InvalidInput("cavity: n_modes must be non-negative");
    if (!std::isfinite(p.epsilon))
        throw InvalidInput("cavity: epsilon must be finite");

    std::vector<std::string> notes;
    if (!(std::abs(p.epsilon) < (p.gamma1 + p.gamma2) / 4.0))
        notes.emplace_back("cavity: |epsilon| >= (gamma1+gamma2)/4, outside the far-below-threshold regime");
    return notes;
}

// Parameters of the jitter-averaged comb. Times in seconds, bandwidth in rad/s.
struct CombFitParams
{
    double c1 = 1.0;        // count scale
    double c2 = 0.0;        // flat pedestal, in units of c1
    double bandwidth = 0.0; // envelope decay constant
    double tau0 = 0.0;      // delay offset of the central tooth
    double tau_opo = 0.0;   // tooth spacing (cavity round trip)
    double tau_d = 0.0;     // detector resolving time (FWHM of the single-channel kernel)
    int n_sum = 0;          // teeth n in [-n_sum, n_sum] are summed
};

// Envelope weight below which omitted teeth are considered negligible.
inline constexpr double comb_tail_tolerance = 1e-6;

// Smallest n_sum whose omitted tail tooth satisfies the tail tolerance.
inline int required_n_sum(double bandwidth, double tau_opo)
{
    const double n = -std::log(comb_tail_tolerance) / (bandwidth * tau_opo);
    return static_cast<int>(std::floor(n)) + 1;
}

namespace detail
{
inline void check_comb_core(const CombFitParams &p)
{
    if (!(p.tau_d > 0.0))
        throw InvalidInput("comb: tau_d must be positive");
    if (!(p.c1 > 0.0) || !(p.c2 >= 0.0))
        throw InvalidInput("comb: require c1 > 0 and c2 >= 0");
    if (!(p.tau_opo > 0.0) || !(p.bandwidth > 0.0))
        throw InvalidInput("comb: require tau_opo > 0 and bandwidth > 0");
    if (p.n_sum < 1)
        throw InvalidInput("comb: n_sum must be positive");
    if (!std::isfinite(p.tau0))
        throw InvalidInput("comb: tau0 must be finite");
}
} // namespace detail

inline void validate(const CombFitParams &p)
{
    detail::check_comb_core(p);
    if (!(std::exp(-p.bandwidth * p.n_sum * p.tau_opo) < comb_tail_tolerance))
        throw InvalidInput("comb: n_sum too small, omitted tooth weight exceeds 1e-6 (need n_sum >= " +
                           std::to_string(required_n_sum(p.bandwidth, p.tau_opo)) + ")");
}

struct CavityGains
{
    std::complex<double> G1, g1, G2, g2;
};

// Output-field gains of the cavity at offset omega from a mode centre.
inline CavityGains gain_functions(const CavityParams &p, double omega)
{
    if (!std::isfinite(omega))
        throw InvalidInput("gain_functions: omega must be finite");
    using namespace std::complex_literals;
    const std::complex<double> den = p.gamma1 + p.gamma2 - 2.0i * omega;
    const double root = std::sqrt(p.gamma1 * p.gamma2);
    CavityGains out;
    out.G1 = (p.gamma1 - p.gamma2 + 2.0i * omega) / den;
    out.g1 = 4.0 * p.epsilon * p.gamma1 / (den * den);
    out.G2 = 2.0 * root / den;
    out.g2 = 4.0 * p.epsilon * root / (den * den);
    return out;
}

// sin^2((2N+1) theta) / sin^2(theta), with the removable singularity at
// theta = k pi filled in as (2N+1)^2.
inline double dirichlet_comb(double theta, int n_modes)
{
    const double m = 2.0 * n_modes + 1.0;
    // both numerator and denominator are pi-periodic once squared
    const double r = std::remainder(theta, std::numbers::pi);
    const double s = std::sin(r);
    if (s == 0.0)
        return m * m;
    const double q = std::sin(m * r) / s;
    return q * q;
}

// Multimode intensity correlation, pedestal plus enveloped comb.
inline double gamma2_analytic(const CavityParams &p, double tau)
{
    const double eps = std::abs(p.epsilon);
    const double m = 2.0 * p.n_modes + 1.0;
    const double pedestal = 2.0 * eps * m / p.bandwidth;
    const double comb = std::exp(-p.bandwidth * std::abs(tau)) * dirichlet_comb(p.fsr * tau / 2.0, p.n_modes);
    return eps * eps * p.finesse_ratio * p.finesse_ratio * (pedestal * pedestal + comb);
}

// Single-channel timing jitter density with FWHM tau_d.
inline double jitter_pdf(double tau, double tau_d)
{
    if (!(tau_d > 0.0))
        throw InvalidInput("jitter_pdf: tau_d must be positive");
    return units::ln2 / tau_d * std::exp(-2.0 * std::abs(tau) * units::ln2 / tau_d);
}

// Unnormalized tooth shape (1 + x) e^{-x}, x = 2 |offset| ln2 / tau_d.
inline double tooth_profile(double offset, double tau_d)
{
    const double x = 2.0 * std::abs(offset) * units::ln2 / tau_d;
    return (1.0 + x) * std::exp(-x);
}

namespace detail
{
// Teeth further than this many kernel scale lengths contribute below 1e-20.
inline constexpr double tooth_cutoff = 50.0;

// Range of tooth indices that can contribute at offset u from tau0.
inline std::array<long, 2> contributing_teeth(const CombFitParams &p, double u)
{
    const double reach = tooth_cutoff * p.tau_d / (2.0 * units::ln2);
    const double lo = std::ceil((u - reach) / p.tau_opo);
    const double hi = std::floor((u + reach) / p.tau_opo);
    const double n = static_cast<double>(p.n_sum);
    return {static_cast<long>(std::max(lo, -n)), static_cast<long>(std::min(hi, n))};
}
} // namespace detail

// Jitter-averaged comb:
//   c1 [c2 + e^{-bw |tau - tau0|} sum_n (1 + x_n) e^{-x_n}],
//   x_n = 2 |tau - n tau_opo - tau0| ln2 / tau_d.
inline double gamma2_comb_fit(const CombFitParams &p, double tau)
{
    detail::check_comb_core(p);
    const double u = tau - p.tau0;
    const double k = 2.0 * units::ln2 / p.tau_d;
    const auto [lo, hi] = detail::contributing_teeth(p, u);
    double sum = 0.0;
    for (long n = lo; n <= hi; ++n)
    {
        const double x = k * std::abs(u - static_cast<double>(n) * p.tau_opo);
        sum += (1.0 + x) * std::exp(-x);
    }
    return p.c1 * (p.c2 + std::exp(-p.bandwidth * std::abs(u)) * sum);
}

// Parameter order for gradients and fit vectors.
enum class CombParam : int { c1 = 0, c2, bandwidth, tau0, tau_opo, tau_d };
inline constexpr int comb_param_count = 6;

struct CombFitValue
{
    double value = 0.0;
    std::array<double, comb_param_count> gradient{}; // d value / d param, SI units
};

inline CombFitValue gamma2_comb_fit_gradient(const CombFitParams &p, double tau)
{
    detail::check_comb_core(p);
    const double u = tau - p.tau0;
    const double k = 2.0 * units::ln2 / p.tau_d;
    const auto [lo, hi] = detail::contributing_teeth(p, u);

    double s = 0.0, ds_tau0 = 0.0, ds_tau_opo = 0.0, ds_tau_d = 0.0;
    for (long n = lo; n <= hi; ++n)
    {
        const double d = u - static_cast<double>(n) * p.tau_opo;
        const double x = k * std::abs(d);
        const double e = std::exp(-x);
        const double sg = (d > 0.0) - (d < 0.0);
        s += (1.0 + x) * e;
        // d/dx (1+x)e^{-x} = -x e^{-x}
        ds_tau0 += x * e * k * sg;
        ds_tau_opo += x * e * k * sg * static_cast<double>(n);
        ds_tau_d += x * x * e / p.tau_d;
    }
    const double au = std::abs(u);
    const double env = std::exp(-p.bandwidth * au);
    const double su = (u > 0.0) - (u < 0.0);

    CombFitValue out;
    out.value = p.c1 * (p.c2 + env * s);
    out.gradient[0] = p.c2 + env * s;
    out.gradient[1] = p.c1;
    out.gradient[2] = -p.c1 * au * env * s;
    out.gradient[3] = p.c1 * env * (p.bandwidth * su * s + ds_tau0);
    out.gradient[4] = p.c1 * env * ds_tau_opo;
    out.gradient[5] = p.c1 * env * ds_tau_d;
    return out;
}

// Nominal values of the 780 nm degenerate OPO comb fit (C1 = 93, C2 = 0,
// bandwidth / 2pi = 7.8 MHz, tau0 = 59 ns, tau_opo = 1.63 ns, tau_d = 220 ps).
inline CombFitParams nominal_comb_params()
{
    CombFitParams p;
    p.c1 = 93.0;
    p.c2 = 0.0;
    p.bandwidth = units::mhz_to_rad_per_s(7.8);
    p.tau0 = 59e-9;
    p.tau_opo = 1.63e-9;
    p.tau_d = 220e-12;
    p.n_sum = required_n_sum(p.bandwidth, p.tau_opo);
    return p;
}

} // namespace opocomb
