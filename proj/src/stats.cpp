#include "billiard_thermo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bt::stat {

Histogram::Histogram(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw std::invalid_argument("Histogram: need at least two edges");
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (!(edges_[i] > edges_[i - 1])) throw std::invalid_argument("Histogram: edges must be strictly increasing");
    counts_.assign(edges_.size() - 1, 0);
}

Histogram Histogram::uniform(double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw std::invalid_argument("Histogram::uniform: bad range");
    std::vector<double> e(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    e.back() = hi;
    Histogram h(std::move(e));
    h.uniform_ = true;
    return h;
}

void Histogram::add(double x) {
    const double lo = edges_.front();
    const double hi = edges_.back();
    if (!(x >= lo && x <= hi)) {
        ++out_of_range_;
        return;
    }
    std::size_t idx;
    if (uniform_) {
        idx = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(counts_.size()));
        idx = std::min(idx, counts_.size() - 1);
        // Guard the floating-point bin boundary.
        if (x < edges_[idx]) --idx;
        else if (idx + 1 < counts_.size() && x >= edges_[idx + 1]) ++idx;
    } else {
        auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        idx = static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
        idx = std::min(idx, counts_.size() - 1);
    }
    ++counts_[idx];
    ++total_;
}

void Histogram::add_all(std::span<const double> xs) {
    for (double x : xs) add(x);
}

std::vector<double> Histogram::probabilities() const {
    std::vector<double> p(counts_.size(), 0.0);
    if (total_ == 0) return p;
    for (std::size_t i = 0; i < counts_.size(); ++i) p[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    return p;
}

KsResult ks_statistic(std::span<const double> samples, const Cdf& reference_cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = reference_cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / n - f;
        const double lower = f - static_cast<double>(i) / n;
        d = std::max({d, upper, lower});
    }
    return {std::clamp(d, 0.0, 1.0), sorted.size()};
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double tv_distance(const Histogram& h1, const Histogram& h2) {
    if (h1.edges() != h2.edges()) throw std::invalid_argument("tv_distance: histogram edges differ");
    if (h1.total() == 0 || h2.total() == 0) throw std::invalid_argument("tv_distance: empty histogram");
    const auto p1 = h1.probabilities();
    const auto p2 = h2.probabilities();
    return std::min(1.0, tv_distance(p1, p2));
}

double tv_distance_to_cdf(const Histogram& h, const Cdf& reference_cdf) {
    if (h.total() == 0) throw std::invalid_argument("tv_distance_to_cdf: empty histogram");
    const auto p = h.probabilities();
    const auto& e = h.edges();
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = reference_cdf(e[i + 1]) - reference_cdf(e[i]);
    return std::min(1.0, tv_distance(p, q));
}

void RunningStats::add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double delta = o.mean_ - mean_;
    mean_ += delta * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
}

double RunningStats::variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::stddev() const noexcept { return std::sqrt(variance()); }

double RunningStats::standard_error() const noexcept {
    return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("fit_line: need at least 3 points");
    const double nd = static_cast<double>(n);
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    const double s2 = sse / (nd - 2.0);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / nd + mx * mx / sxx));
    return f;
}

double log_linear_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("log_linear_slope: length mismatch");
    std::vector<double> xs, ls;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 0.0) {
            xs.push_back(x[i]);
            ls.push_back(std::log(y[i]));
        }
    }
    if (xs.size() < 3) throw std::invalid_argument("log_linear_slope: fewer than 3 positive values");
    return fit_line(xs, ls).slope;
}

double batch_means_se(std::span<const double> xs, std::size_t batches) {
    if (batches < 2) throw std::invalid_argument("batch_means_se: need at least 2 batches");
    const std::size_t len = xs.size() / batches;
    if (len == 0) throw std::invalid_argument("batch_means_se: fewer samples than batches");
    RunningStats means;
    for (std::size_t b = 0; b < batches; ++b) {
        const auto first = xs.begin() + static_cast<std::ptrdiff_t>(b * len);
        means.add(std::accumulate(first, first + static_cast<std::ptrdiff_t>(len), 0.0) / static_cast<double>(len));
    }
    return means.standard_error();
}

}  // namespace bt::stat
