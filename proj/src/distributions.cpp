#include "billiard_thermo/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bt::stat {

double draw_gaussian(RandomStream& stream, double mean, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("draw_gaussian: sigma must be non-negative");
    const double u1 = stream.next_open_unit();
    const double u2 = stream.next_unit();
    if (sigma == 0.0) return mean;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    return mean + sigma * z;
}

double draw_uniform(RandomStream& stream, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("draw_uniform: lo must not exceed hi");
    const double u = stream.next_unit();
    if (lo == hi) return lo;
    const double x = lo + (hi - lo) * u;
    // lo + (hi-lo)*u can round up to hi for u close to 1.
    return x < hi ? x : std::nextafter(hi, lo);
}

HemisphereSpec::HemisphereSpec(int dimension, double sigma)
    : k_(dimension), sigma_(sigma), radius_(sigma * std::sqrt(static_cast<double>(dimension) + 1.0)) {
    if (dimension < 1) throw std::invalid_argument("HemisphereSpec: dimension must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("HemisphereSpec: sigma must be positive");
}

std::vector<double> sample_cosine_hemisphere(RandomStream& stream, const HemisphereSpec& spec) {
    const int k = spec.dimension();
    const double R = spec.radius();
    std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);

    const double u = stream.next_open_unit();
    const double s = -std::expm1((2.0 / k) * std::log(u));  // 1 - u^{2/k}
    v[0] = R * std::sqrt(s);
    if (v[0] <= 0.0) v[0] = std::nextafter(0.0, 1.0);
    const double rest = R * std::sqrt(std::max(0.0, 1.0 - s));

    if (k == 1) {
        v[1] = (stream.next_u64() >> 63) ? rest : -rest;
        return v;
    }
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (int i = 1; i <= k; ++i) {
            v[i] = draw_gaussian(stream, 0.0, 1.0);
            norm2 += v[i] * v[i];
        }
    } while (norm2 == 0.0);
    const double scale = rest / std::sqrt(norm2);
    for (int i = 1; i <= k; ++i) v[i] *= scale;
    return v;
}

double pdf_mb_post_collision(double v, double sigma) {
    if (!(v > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("pdf_mb_post_collision: arguments must be positive");
    const double s2 = sigma * sigma;
    return (v / s2) * std::exp(-0.5 * v * v / s2);
}

double cdf_mb_post_collision(double v, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("cdf_mb_post_collision: sigma must be positive");
    if (v <= 0.0) return 0.0;
    return -std::expm1(-0.5 * v * v / (sigma * sigma));
}

double cdf_cosine_law(double theta) {
    constexpr double half_pi = kPi / 2.0;
    // Allow a few ulps of slack so that atan2 results at the edges pass.
    if (!(theta >= -half_pi - 1e-12 && theta <= half_pi + 1e-12))
        throw std::invalid_argument("cdf_cosine_law: theta outside [-pi/2, pi/2]: " + std::to_string(theta));
    if (theta >= half_pi) return 1.0;
    if (theta <= -half_pi) return 0.0;
    return 0.5 * (1.0 + std::sin(theta));
}

double pdf_cosine_law(double theta) {
    constexpr double half_pi = kPi / 2.0;
    if (theta < -half_pi || theta > half_pi) return 0.0;
    return 0.5 * std::cos(theta);
}

double cdf_normal(double x, double mean, double sigma) {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

}  // namespace bt::stat
