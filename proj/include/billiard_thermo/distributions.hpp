#pragma once

#include <vector>

#include "billiard_thermo/random_stream.hpp"

namespace bt::stat {

inline constexpr double kPi = 3.14159265358979323846;

/// Normal draw via the Box-Muller transform (one variate per call).
/// Throws std::invalid_argument for negative sigma; sigma == 0 returns mean.
double draw_gaussian(RandomStream& stream, double mean, double sigma);

/// Uniform draw on [lo, hi). lo == hi returns lo.
double draw_uniform(RandomStream& stream, double lo, double hi);

/// Upper hemisphere S^k_+(R) of R^{k+1} with R = sigma * sqrt(k + 1),
/// carrying the cosine-weighted measure  C * v0 * dV.
class HemisphereSpec {
public:
    HemisphereSpec(int dimension, double sigma);

    int dimension() const noexcept { return k_; }
    double sigma() const noexcept { return sigma_; }
    double radius() const noexcept { return radius_; }

private:
    int k_;
    double sigma_;
    double radius_;
};

/// Draws v in R^{k+1} from the cosine measure on the hemisphere.
///
/// In polar coordinates v = (v0, sqrt(R^2 - v0^2) u) with u uniform on the
/// unit (k-1)-sphere, the v0 marginal has density proportional to
/// v0 (R^2 - v0^2)^{(k-2)/2}. With s = (v0/R)^2 this is Beta(1, k/2), whose
/// inverse CDF is s = 1 - U^{2/k}, so v0 is sampled exactly for every k.
std::vector<double> sample_cosine_hemisphere(RandomStream& stream, const HemisphereSpec& spec);

/// Post-collision Maxwell-Boltzmann density (v / sigma^2) exp(-v^2 / 2 sigma^2).
double pdf_mb_post_collision(double v, double sigma);

/// CDF of the post-collision Maxwell-Boltzmann law: 1 - exp(-v^2 / 2 sigma^2).
/// Returns 0 for v <= 0.
double cdf_mb_post_collision(double v, double sigma);

/// Cosine-law CDF on [-pi/2, pi/2]: (1 + sin theta) / 2.
double cdf_cosine_law(double theta);

/// Cosine-law density on [-pi/2, pi/2]: cos(theta) / 2.
double pdf_cosine_law(double theta);

double cdf_normal(double x, double mean = 0.0, double sigma = 1.0);

}  // namespace bt::stat
