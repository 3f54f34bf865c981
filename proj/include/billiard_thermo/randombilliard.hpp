#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "billiard_thermo/chamber.hpp"
#include "billiard_thermo/random_stream.hpp"

namespace bt::random_billiard {

struct SideAngle {
    int side = 0;
    double angle = 0.0;
};

/// One step of the scattering-line chain: draw r uniform on [0, 1] and apply
/// the cell map. Singular cell trajectories are redrawn up to kMaxRetries times.
class ScatteringLine {
public:
    static constexpr int kMaxRetries = 100;

    explicit ScatteringLine(const billiard::ChamberGeometry& g) : cell_(g) {}

    /// Returns the exit (k', θ'); throws std::runtime_error if every retry is singular.
    SideAngle step(stat::RandomStream& stream, int side, double angle);
    /// Same, but keeps the sampled offset and the full exit record.
    billiard::CellExit step_full(stat::RandomStream& stream, const billiard::ScreenEntry& entry);

    std::int64_t resamples() const noexcept { return resamples_; }
    const billiard::FundamentalCell& cell() const noexcept { return cell_; }

private:
    billiard::FundamentalCell cell_;
    std::int64_t resamples_ = 0;
};

SideAngle scattering_line_step(stat::RandomStream& stream, int side, double angle,
                               const billiard::ChamberGeometry& g = {});

/// Chamber-to-chamber chain. State 1 is the left chamber, state 2 the right;
/// p12 is the probability that an entry from the left is followed by an entry
/// from the right.
struct TwoStateChain {
    double p12 = 0.0;
    double p21 = 0.0;
    double tau = 0.0;  // mean time between successive entries
    std::int64_t from1 = 0;
    std::int64_t from2 = 0;

    /// Binomial standard errors of the two estimates.
    double p12_se() const;
    double p21_se() const;
    double stationary_right() const { return p12 / (p12 + p21); }
};

inline constexpr std::int64_t kMinChainEntries = 10000;

/// Throws std::invalid_argument for fewer than kMinChainEntries entries. A side
/// that never occurs gets probability 0 and count 0.
TwoStateChain estimate_two_state_chain(std::span<const billiard::ScreenEntry> entries);

/// f_{n+1} = f_n (1 - p21) + (1 - f_n) p12 for n = 0 .. steps; f is the
/// fraction in the right chamber, step n corresponds to time n·tau.
std::vector<double> two_state_evolution(const TwoStateChain& chain, double f0, std::int64_t steps);

}  // namespace bt::random_billiard
