#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "billiard_thermo/distributions.hpp"
#include "billiard_thermo/stats.hpp"

namespace st = bt::stat;
using st::RandomStream;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(DrawGaussian, ZeroSigmaReturnsMeanExactly) {
    RandomStream s(5);
    EXPECT_EQ(st::draw_gaussian(s, 3.0, 0.0), 3.0);
}

TEST(DrawGaussian, NegativeSigmaThrows) {
    RandomStream s(5);
    EXPECT_THROW(st::draw_gaussian(s, 0.0, -1.0), std::invalid_argument);
}

TEST(DrawGaussian, SampleMeanWithinCltBound) {
    RandomStream s(11);
    st::RunningStats rs;
    for (int i = 0; i < 1000000; ++i) rs.add(st::draw_gaussian(s, 0.0, 1.0));
    EXPECT_LE(std::abs(rs.mean()), 4e-3);
}

TEST(DrawGaussian, KsAgainstStandardNormal) {
    RandomStream s(12);
    std::vector<double> x(100000);
    for (auto& v : x) v = st::draw_gaussian(s, 0.0, 1.0);
    const auto ks = st::ks_statistic(x, [](double t) { return st::cdf_normal(t); });
    EXPECT_LE(ks.statistic, 0.006);
}

TEST(DrawUniform, DegenerateAndBadRange) {
    RandomStream s(1);
    EXPECT_EQ(st::draw_uniform(s, 2.0, 2.0), 2.0);
    EXPECT_THROW(st::draw_uniform(s, 1.0, 0.0), std::invalid_argument);
}

TEST(DrawUniform, MeanAndKs) {
    RandomStream s(2);
    st::RunningStats rs;
    for (int i = 0; i < 1000000; ++i) {
        const double u = st::draw_uniform(s, 0.0, 1.0);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        rs.add(u);
    }
    EXPECT_NEAR(rs.mean(), 0.5, 0.002);
    std::vector<double> x(100000);
    for (auto& v : x) v = st::draw_uniform(s, 0.0, 1.0);
    EXPECT_LE(st::ks_statistic(x, [](double t) { return std::clamp(t, 0.0, 1.0); }).statistic, 0.006);
}

TEST(Hemisphere, SpecValidation) {
    EXPECT_THROW(st::HemisphereSpec(0, 1.0), std::invalid_argument);
    EXPECT_THROW(st::HemisphereSpec(2, 0.0), std::invalid_argument);
    const st::HemisphereSpec h(3, 2.0);
    EXPECT_DOUBLE_EQ(h.radius() * h.radius(), 4.0 * 4.0);
}

class HemisphereNorm : public ::testing::TestWithParam<int> {};

TEST_P(HemisphereNorm, DrawsLieOnUpperHemisphere) {
    const st::HemisphereSpec spec(GetParam(), 1.3);
    RandomStream s(static_cast<std::uint64_t>(GetParam()));
    for (int i = 0; i < 2000; ++i) {
        const auto v = st::sample_cosine_hemisphere(s, spec);
        ASSERT_EQ(v.size(), static_cast<std::size_t>(GetParam()) + 1);
        ASSERT_GT(v[0], 0.0);
        double n2 = 0.0;
        for (double c : v) n2 += c * c;
        ASSERT_NEAR(std::sqrt(n2) / spec.radius(), 1.0, 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, HemisphereNorm, ::testing::Values(1, 2, 3, 5, 50, 200));

TEST(Hemisphere, K2MeanOfV0IsTwoThirdsR) {
    // Radius 1 means sigma = 1/sqrt(3).
    const st::HemisphereSpec spec(2, 1.0 / std::sqrt(3.0));
    ASSERT_NEAR(spec.radius(), 1.0, 1e-15);
    RandomStream s(21);
    st::RunningStats rs;
    std::vector<double> v0(1000000);
    for (auto& x : v0) {
        x = st::sample_cosine_hemisphere(s, spec)[0];
        rs.add(x);
    }
    EXPECT_NEAR(rs.mean(), 2.0 / 3.0, 0.002);
    // Density proportional to v0 on (0, 1): CDF v0^2.
    EXPECT_LE(st::ks_statistic(v0, [](double t) { return std::clamp(t * t, 0.0, 1.0); }).statistic, 0.01);
}

TEST(Hemisphere, K3MarginalMatchesPolarFormula) {
    // k = 3: density of v0 ∝ v0 (R^2 - v0^2)^{1/2}, CDF 1 - (1 - x^2)^{3/2} with x = v0/R.
    const st::HemisphereSpec spec(3, 0.5);
    RandomStream s(23);
    std::vector<double> x(100000);
    for (auto& v : x) v = st::sample_cosine_hemisphere(s, spec)[0] / spec.radius();
    const auto cdf = [](double t) {
        t = std::clamp(t, 0.0, 1.0);
        return 1.0 - std::pow(1.0 - t * t, 1.5);
    };
    EXPECT_LE(st::ks_statistic(x, cdf).statistic, 0.006);
}

TEST(Hemisphere, K1RejectsNothingAndIsSymmetric) {
    const st::HemisphereSpec spec(1, 1.0);
    RandomStream s(24);
    int positive = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) positive += st::sample_cosine_hemisphere(s, spec)[1] > 0.0;
    EXPECT_NEAR(positive / static_cast<double>(n), 0.5, 4.0 * 0.5 / std::sqrt(n));
}

TEST(Hemisphere, LargeKLimitLaws) {
    const st::HemisphereSpec spec(200, 1.0);
    RandomStream s(25);
    std::vector<double> v0(100000), v1(100000);
    for (std::size_t i = 0; i < v0.size(); ++i) {
        const auto v = st::sample_cosine_hemisphere(s, spec);
        v0[i] = v[0];
        v1[i] = v[17];
    }
    EXPECT_LE(st::ks_statistic(v0, [](double t) { return st::cdf_mb_post_collision(t, 1.0); }).statistic, 0.02);
    EXPECT_LE(st::ks_statistic(v1, [](double t) { return st::cdf_normal(t); }).statistic, 0.02);
}

TEST(MbPostCollision, IntegratesToOne) {
    for (double sigma : {0.3, 1.0, 4.5}) {
        boost::math::quadrature::exp_sinh<double> q;
        const double total = q.integrate([&](double v) { return st::pdf_mb_post_collision(v, sigma); });
        EXPECT_NEAR(total, 1.0, 1e-9) << "sigma=" << sigma;
    }
}

TEST(MbPostCollision, ModeAndMean) {
    const double sigma = 1.7;
    // Mode: density increases just below sigma and decreases just above.
    const double h = 1e-4;
    EXPECT_LT(st::pdf_mb_post_collision(sigma - h, sigma), st::pdf_mb_post_collision(sigma, sigma));
    EXPECT_LT(st::pdf_mb_post_collision(sigma + h, sigma), st::pdf_mb_post_collision(sigma, sigma));
    boost::math::quadrature::exp_sinh<double> q;
    const double mean = q.integrate([&](double v) { return v * st::pdf_mb_post_collision(v, sigma); });
    EXPECT_NEAR(mean, sigma * std::sqrt(kPi / 2.0), 1e-9);
}

TEST(MbPostCollision, CdfIsIntegralOfPdf) {
    const double sigma = 0.8;
    for (double v : {0.1, 0.5, 1.0, 2.5}) {
        const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double t) { return t > 0.0 ? st::pdf_mb_post_collision(t, sigma) : 0.0; }, 0.0, v);
        EXPECT_NEAR(st::cdf_mb_post_collision(v, sigma), integral, 1e-12);
    }
}

TEST(MbPostCollision, RejectsNonPositive) {
    EXPECT_THROW(st::pdf_mb_post_collision(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(st::pdf_mb_post_collision(1.0, -1.0), std::invalid_argument);
}

TEST(CosineLaw, KnownValues) {
    EXPECT_DOUBLE_EQ(st::cdf_cosine_law(0.0), 0.5);
    EXPECT_DOUBLE_EQ(st::cdf_cosine_law(kPi / 2.0), 1.0);
    EXPECT_NEAR(st::cdf_cosine_law(kPi / 6.0), 0.75, 1e-15);
    EXPECT_THROW(st::cdf_cosine_law(2.0), std::invalid_argument);
}

TEST(CosineLaw, PdfIntegratesToCdf) {
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(st::pdf_cosine_law, -kPi / 2.0, 0.3);
    EXPECT_NEAR(integral, st::cdf_cosine_law(0.3), 1e-13);
}

TEST(Reproducibility, SameSeedSameHemisphereDraws) {
    const st::HemisphereSpec spec(4, 1.0);
    RandomStream a(77), b(77);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(st::sample_cosine_hemisphere(a, spec), st::sample_cosine_hemisphere(b, spec));
}
