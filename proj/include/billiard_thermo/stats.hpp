#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bt::stat {

/// Fixed-edge histogram. Values outside [edges.front(), edges.back()) are
/// counted in `out_of_range()` and do not contribute to `total()`; the last
/// bin is closed on the right.
class Histogram {
public:
    explicit Histogram(std::vector<double> edges);

    static Histogram uniform(double lo, double hi, std::size_t bins);

    void add(double x);
    void add_all(std::span<const double> xs);

    const std::vector<double>& edges() const noexcept { return edges_; }
    const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
    std::int64_t total() const noexcept { return total_; }
    std::int64_t out_of_range() const noexcept { return out_of_range_; }
    std::size_t bins() const noexcept { return counts_.size(); }

    /// Normalized bin masses counts / total.
    std::vector<double> probabilities() const;

private:
    std::vector<double> edges_;
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
    std::int64_t out_of_range_ = 0;
    bool uniform_ = false;
};

struct KsResult {
    double statistic = 0.0;  // sup |F_emp - F_ref|
    std::size_t n = 0;
};

using Cdf = std::function<double(double)>;

/// One-sample Kolmogorov-Smirnov distance, evaluated with both one-sided
/// envelopes at every order statistic. Throws on empty input.
KsResult ks_statistic(std::span<const double> samples, const Cdf& reference_cdf);

/// Total-variation distance between two histograms with identical edges:
/// 0.5 * sum |p1_i - p2_i|.
double tv_distance(const Histogram& h1, const Histogram& h2);

/// Total-variation distance between a histogram and the bin masses of a
/// reference CDF over the same edges.
double tv_distance_to_cdf(const Histogram& h, const Cdf& reference_cdf);

/// 0.5 * sum |p_i - q_i| for two probability vectors of equal length.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Streaming mean / variance (Welford).
class RunningStats {
public:
    void add(double x) noexcept;
    void merge(const RunningStats& other) noexcept;

    std::int64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept;  // unbiased
    double stddev() const noexcept;
    double standard_error() const noexcept;

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 3 points with
/// at least two distinct x values.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against x over entries with y > 0.
double log_linear_slope(std::span<const double> x, std::span<const double> y);

/// Standard error of the mean of a correlated series from `batches` equal
/// contiguous batches (a trailing remainder is dropped). Needs batches >= 2
/// and at least one sample per batch.
double batch_means_se(std::span<const double> xs, std::size_t batches = 20);

}  // namespace bt::stat
