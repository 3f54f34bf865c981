#include "billiard_thermo/mechanics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bt::mech {

MassPair::MassPair(double mass_a, double mass_b) : ma_(mass_a), mb_(mass_b) {
    if (!(mass_a > 0.0) || !(mass_b > 0.0)) throw std::invalid_argument("MassPair: masses must be positive");
}

std::vector<double> mass_rescale(std::span<const double> positions, std::span<const double> masses) {
    if (positions.size() != masses.size()) throw std::invalid_argument("mass_rescale: length mismatch");
    for (double m : masses)
        if (!(m > 0.0)) throw std::invalid_argument("mass_rescale: masses must be positive");
    const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
    std::vector<double> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) out[i] = std::sqrt(masses[i] / total) * positions[i];
    return out;
}

}  // namespace bt::mech
