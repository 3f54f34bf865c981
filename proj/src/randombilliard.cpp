#include "billiard_thermo/randombilliard.hpp"

#include <cmath>
#include <stdexcept>

#include "billiard_thermo/distributions.hpp"

namespace bt::random_billiard {

billiard::CellExit ScatteringLine::step_full(stat::RandomStream& stream, const billiard::ScreenEntry& entry) {
    billiard::ScreenEntry e = entry;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        e.offset = stat::draw_uniform(stream, 0.0, 1.0);
        if (auto ex = cell_.map(e)) return *ex;
        ++resamples_;
    }
    throw std::runtime_error("scattering_line_step: singular cell trajectory for every retry");
}

SideAngle ScatteringLine::step(stat::RandomStream& stream, int side, double angle) {
    const auto ex = step_full(stream, {side, 0.0, angle, 0.0});
    return {ex.exit.side, ex.exit.angle};
}

SideAngle scattering_line_step(stat::RandomStream& stream, int side, double angle, const billiard::ChamberGeometry& g) {
    ScatteringLine line(g);
    return line.step(stream, side, angle);
}

double TwoStateChain::p12_se() const {
    return from1 > 0 ? std::sqrt(p12 * (1.0 - p12) / static_cast<double>(from1)) : 0.0;
}

double TwoStateChain::p21_se() const {
    return from2 > 0 ? std::sqrt(p21 * (1.0 - p21) / static_cast<double>(from2)) : 0.0;
}

TwoStateChain estimate_two_state_chain(std::span<const billiard::ScreenEntry> entries) {
    if (static_cast<std::int64_t>(entries.size()) < kMinChainEntries)
        throw std::invalid_argument("estimate_two_state_chain: need at least 10000 entries");
    TwoStateChain c;
    std::int64_t to2 = 0, to1 = 0;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        const int a = entries[i].side, b = entries[i + 1].side;
        if (a == 0) {
            ++c.from1;
            to2 += b == 1;
        } else {
            ++c.from2;
            to1 += b == 0;
        }
    }
    // A side that never occurs leaves its row at 0 with a zero count.
    if (c.from1 > 0) c.p12 = static_cast<double>(to2) / static_cast<double>(c.from1);
    if (c.from2 > 0) c.p21 = static_cast<double>(to1) / static_cast<double>(c.from2);
    c.tau = (entries.back().time - entries.front().time) / static_cast<double>(entries.size() - 1);
    return c;
}

std::vector<double> two_state_evolution(const TwoStateChain& chain, double f0, std::int64_t steps) {
    if (!(chain.p12 >= 0.0 && chain.p12 <= 1.0 && chain.p21 >= 0.0 && chain.p21 <= 1.0))
        throw std::invalid_argument("two_state_evolution: probabilities outside [0, 1]");
    if (!(f0 >= 0.0 && f0 <= 1.0)) throw std::invalid_argument("two_state_evolution: f0 outside [0, 1]");
    if (steps < 0) throw std::invalid_argument("two_state_evolution: negative horizon");
    std::vector<double> f(static_cast<std::size_t>(steps) + 1);
    f[0] = f0;
    for (std::size_t n = 1; n < f.size(); ++n) f[n] = f[n - 1] * (1.0 - chain.p21) + (1.0 - f[n - 1]) * chain.p12;
    return f;
}

}  // namespace bt::random_billiard
