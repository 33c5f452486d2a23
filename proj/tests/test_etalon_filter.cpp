#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "opocomb/etalon_filter.hpp"

using namespace opocomb;

namespace
{

constexpr double round_trip = 1.63e-9;
const double fsr_opo = units::two_pi / round_trip;
const double bw = units::mhz_to_rad_per_s(7.8);

// Direct convolution of filtered_comb with the jitter density.
double smoothed_by_quadrature(const ModeWeights &w, double tau_d, double tau)
{
    const double step = 10e-12;
    const double reach = 40.0 * tau_d;
    double sum = 0.0;
    for (double s0 = -reach; s0 < reach; s0 += step)
    {
        // split exactly at the kinks s = 0 and s = tau so each panel is smooth
        double cuts[4] = {s0, s0 + step, 0.0, tau};
        std::vector<double> pts{cuts[0], cuts[1]};
        for (int k = 2; k < 4; ++k)
            if (cuts[k] > s0 && cuts[k] < s0 + step)
                pts.push_back(cuts[k]);
        std::sort(pts.begin(), pts.end());
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                [&](double s) { return filtered_comb(w, bw, fsr_opo, tau - s) * jitter_pdf(s, tau_d); },
                pts[k], pts[k + 1], 0);
    }
    return sum;
}

} // namespace

TEST(Airy, Examples)
{
    const auto e = nominal_etalon();
    EXPECT_DOUBLE_EQ(airy_transmission(e, 0.0), 1.0);
    EXPECT_NEAR(airy_transmission(e, e.fsr / 2.0), 0.01438991367711597, 1e-15);
    EXPECT_NEAR(airy_transmission(e, e.fwhm / 2.0), 0.5, 0.01);
    EXPECT_NEAR(airy_transmission(e, 3.0 * e.fsr), 1.0, 1e-12);
}

TEST(Airy, RejectsDegenerateEtalon)
{
    EXPECT_THROW(validate(EtalonSpec{1e9, 0.0, 0.0}), InvalidInput);
    EXPECT_THROW(validate(EtalonSpec{1e9, 2e9, 0.0}), InvalidInput);
    EXPECT_THROW(validate(EtalonSpec{13e9, 1e9, NAN}), InvalidInput);
}

TEST(ModeWeights, SymmetricWhenCentred)
{
    const auto w = mode_weights(nominal_etalon(), 1.0 / round_trip, 200);
    ASSERT_EQ(w.n_modes(), 200);
    for (int m = 0; m <= 200; ++m)
        EXPECT_DOUBLE_EQ(w.at(m), w.at(-m));
    EXPECT_DOUBLE_EQ(w.at(0), 1.0);
}

TEST(ModeWeights, EtalonKeepsFewModes)
{
    const auto w = mode_weights(nominal_etalon(), 1.0 / round_trip, 200);
    const double f = preserved_fraction(w);
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, 0.10);
}

TEST(ModeWeights, ValidateRejectsOutOfRange)
{
    EXPECT_THROW(validate(ModeWeights{{0.5, 1.2, 0.5}}), InvalidInput);
    EXPECT_THROW(validate(ModeWeights{{0.5, 0.5}}), InvalidInput);
    EXPECT_NO_THROW(validate(ModeWeights{{0.0, 1.0, 0.0}}));
}

TEST(FilteredComb, UnitWeightsReduceToDirichlet)
{
    const int n = 200;
    const auto w = uniform_weights(n);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> t(-20e-9, 20e-9);
    for (int i = 0; i < 1000; ++i)
    {
        const double tau = t(rng);
        const double want = std::exp(-bw * std::abs(tau)) * dirichlet_comb(fsr_opo * tau / 2.0, n);
        EXPECT_NEAR(filtered_comb(w, bw, fsr_opo, tau), want, 1e-9 * want);
    }
}

TEST(FilteredComb, SingleModeIsPureExponential)
{
    ModeWeights w{{0.0, 0.0, 0.7, 0.0, 0.0}};
    for (double tau : {0.0, 1e-9, -3e-9, 17e-9})
        EXPECT_NEAR(filtered_comb(w, bw, fsr_opo, tau), 0.49 * std::exp(-bw * std::abs(tau)), 1e-15);
}

TEST(FilteredComb, QuadraticInWeightScale)
{
    auto w = mode_weights(nominal_etalon(), 1.0 / round_trip, 50);
    auto half = w;
    for (auto &v : half.weights)
        v *= 0.5;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> t(-10e-9, 10e-9);
    for (int i = 0; i < 50; ++i)
    {
        const double tau = t(rng);
        const double a = filtered_comb(w, bw, fsr_opo, tau);
        EXPECT_GE(a, 0.0);
        EXPECT_NEAR(filtered_comb(half, bw, fsr_opo, tau), 0.25 * a, 1e-12 * std::max(a, 1.0));
    }
}

TEST(SmoothedComb, MatchesDirectConvolution)
{
    const auto w = mode_weights(EtalonSpec{3.0 / round_trip, 1.0 / round_trip, 0.0}, 1.0 / round_trip, 5);
    const double td = 220e-12;
    const SmoothedFilteredComb f(w, bw, fsr_opo, td);
    for (double tau : {0.0, 0.3e-9, -0.8e-9, 1.63e-9, 2.1e-9})
    {
        const double want = smoothed_by_quadrature(w, td, tau);
        EXPECT_NEAR(f(tau), want, 1e-6 * want) << "tau=" << tau;
    }
}

TEST(SmoothedComb, NonNegativeAndEven)
{
    const auto w = mode_weights(nominal_etalon(), 1.0 / round_trip, 200);
    const SmoothedFilteredComb f(w, bw, fsr_opo, 220e-12);
    for (int i = 0; i < 200; ++i)
    {
        const double tau = i * 37e-12;
        EXPECT_GT(f(tau), 0.0);
        EXPECT_NEAR(f(tau), f(-tau), 1e-12 * f(tau));
    }
}

TEST(Contrast, EtalonWashesOutFastTeeth)
{
    const auto w = mode_weights(nominal_etalon(), 1.0 / round_trip, 200);
    const SmoothedFilteredComb f(w, bw, fsr_opo, 220e-12);
    const double period = 1.0 / nominal_etalon().fsr;
    for (int k = 1; k <= 4; ++k)
        EXPECT_LT(comb_contrast(f, period, k), 0.1) << "k=" << k;
}

TEST(Contrast, UnfilteredTeethStayResolved)
{
    const SmoothedFilteredComb f(uniform_weights(200), bw, fsr_opo, 220e-12);
    for (int k = 1; k <= 4; ++k)
        EXPECT_GT(comb_contrast(f, round_trip, k), 0.9) << "k=" << k;
}
