#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "correlation_model.hpp"
#include "error.hpp"
#include "units.hpp"

// Fabry-Perot etalon after the OPO: per-mode transmission and the filtered
// multimode correlation it leaves behind.
namespace opocomb
{

// Frequencies in Hz.
struct EtalonSpec
{
    double fsr = 0.0;
    double fwhm = 0.0;
    double detuning = 0.0; // etalon peak minus the OPO degenerate frequency

    double finesse() const { return fsr / fwhm; }
};

inline void validate(const EtalonSpec &e)
{
    if (!(e.fwhm > 0.0) || !(e.fsr > e.fwhm))
        throw InvalidInput("etalon: require fsr > fwhm > 0");
    if (!std::isfinite(e.detuning))
        throw InvalidInput("etalon: detuning must be finite");
}

// 13 GHz free spectral range, 1 GHz linewidth, tuned to the degenerate frequency.
inline EtalonSpec nominal_etalon()
{
    return EtalonSpec{13e9, 1e9, 0.0};
}

// Lossless symmetric Airy transmission at offset delta (Hz) from a peak.
inline double airy_transmission(const EtalonSpec &e, double delta)
{
    const double coeff = 2.0 * e.finesse() / std::numbers::pi;
    const double s = std::sin(std::numbers::pi * delta / e.fsr);
    return 1.0 / (1.0 + coeff * coeff * s * s);
}

// Transmissions of OPO modes m = -N..N, stored at index m + N.
struct ModeWeights
{
    std::vector<double> weights;

    int n_modes() const { return static_cast<int>(weights.size() / 2); }
    double at(int m) const { return weights[static_cast<std::size_t>(m + n_modes())]; }
};

inline void validate(const ModeWeights &w)
{
    if (w.weights.size() % 2 != 1)
        throw InvalidInput("mode weights: length must be 2N+1");
    for (double v : w.weights)
        if (!(v >= 0.0 && v <= 1.0))
            throw InvalidInput("mode weights: each weight must lie in [0, 1]");
}

inline ModeWeights uniform_weights(int n_modes, double value = 1.0)
{
    return ModeWeights{std::vector<double>(static_cast<std::size_t>(2 * n_modes + 1), value)};
}

// fsr_opo in Hz.
inline ModeWeights mode_weights(const EtalonSpec &e, double fsr_opo, int n_modes)
{
    validate(e);
    if (!(fsr_opo > 0.0))
        throw InvalidInput("mode_weights: OPO free spectral range must be positive");
    if (n_modes < 0)
        throw InvalidInput("mode_weights: n_modes must be non-negative");
    ModeWeights out;
    out.weights.reserve(static_cast<std::size_t>(2 * n_modes + 1));
    for (int m = -n_modes; m <= n_modes; ++m)
        out.weights.push_back(airy_transmission(e, e.detuning + m * fsr_opo));
    return out;
}

// Fraction of modes whose transmission exceeds the threshold.
inline double preserved_fraction(const ModeWeights &w, double threshold = 0.5)
{
    std::size_t kept = 0;
    for (double v : w.weights)
        kept += v > threshold;
    return static_cast<double>(kept) / static_cast<double>(w.weights.size());
}

// e^{-bandwidth |tau|} |sum_m w_m e^{i m fsr_opo tau}|^2, pedestal omitted.
// bandwidth and fsr_opo in rad/s. Extended precision keeps the relative
// error small near the zeros of the mode sum.
inline double filtered_comb(const ModeWeights &w, double bandwidth, double fsr_opo, double tau)
{
    const int n = w.n_modes();
    const long double phase = static_cast<long double>(fsr_opo * tau);
    long double re = 0.0L, im = 0.0L;
    for (int m = -n; m <= n; ++m)
    {
        const long double wm = w.at(m);
        re += wm * std::cos(m * phase);
        im += wm * std::sin(m * phase);
    }
    return std::exp(-bandwidth * std::abs(tau)) * static_cast<double>(re * re + im * im);
}

namespace detail
{
// (e^z - 1) / z without cancellation near z = 0.
inline std::complex<double> expm1_over(std::complex<double> z)
{
    if (std::abs(z) < 1e-4)
        return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return (std::exp(z) - 1.0) / z;
}

// Real part of the convolution of e^{-a|t|} e^{i w t} with the single-channel
// jitter density of FWHM tau_d, evaluated at tau. Closed form obtained by
// splitting the integral at s = 0 and s = tau.
inline double laplace_smoothed_mode(double a, double w, double tau_d, double tau)
{
    using namespace std::complex_literals;
    const double t = std::abs(tau);
    const double c = 2.0 * units::ln2 / tau_d;
    const std::complex<double> carrier = std::exp((-a + 1.0i * w) * t);
    const std::complex<double> beta = a - c - 1.0i * w;
    const std::complex<double> left = carrier / (a + c - 1.0i * w);
    const std::complex<double> middle = carrier * t * expm1_over(beta * t);
    const std::complex<double> right = std::exp(-c * t) / (a + c + 1.0i * w);
    return 0.5 * c * (left + middle + right).real();
}
} // namespace detail

// filtered_comb convolved with jitter_pdf(., tau_d), evaluated exactly through
// the cosine expansion of |sum_m w_m e^{i m fsr tau}|^2.
class SmoothedFilteredComb
{
public:
    SmoothedFilteredComb(const ModeWeights &w, double bandwidth, double fsr_opo, double tau_d)
        : bandwidth_(bandwidth), fsr_(fsr_opo), tau_d_(tau_d)
    {
        validate(w);
        if (!(tau_d > 0.0))
            throw InvalidInput("smoothed comb: tau_d must be positive");
        const auto &v = w.weights;
        lag_weights_.assign(v.size(), 0.0);
        for (std::size_t k = 0; k < v.size(); ++k)
            for (std::size_t m = 0; m + k < v.size(); ++m)
                lag_weights_[k] += v[m] * v[m + k];
    }

    double operator()(double tau) const
    {
        double sum = lag_weights_[0] * detail::laplace_smoothed_mode(bandwidth_, 0.0, tau_d_, tau);
        for (std::size_t k = 1; k < lag_weights_.size(); ++k)
        {
            if (lag_weights_[k] == 0.0)
                continue;
            sum += 2.0 * lag_weights_[k] *
                   detail::laplace_smoothed_mode(bandwidth_, static_cast<double>(k) * fsr_, tau_d_, tau);
        }
        return sum;
    }

private:
    double bandwidth_, fsr_, tau_d_;
    std::vector<double> lag_weights_; // sum_m w_m w_{m+k}
};

// Comb contrast of a correlation curve at the k-th multiple of period:
// (peak - mid) / (peak + mid), with mid the mean of the two flanking
// half-period points.
template <class Curve>
double comb_contrast(const Curve &curve, double period, int k = 1)
{
    const double peak = curve(k * period);
    const double mid = 0.5 * (curve((k - 0.5) * period) + curve((k + 0.5) * period));
    return (peak - mid) / (peak + mid);
}

} // namespace opocomb
