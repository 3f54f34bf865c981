#include "billiard_thermo/random_stream.hpp"

#include "billiard_thermo/errors.hpp"

namespace bt {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid configuration";
    for (const auto& s : v) {
        out += "\n  - ";
        out += s;
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace bt

namespace bt::stat {

RandomStream::RandomStream(std::uint64_t seed) noexcept : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RandomStream::derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    // Two rounds so that neighbouring (seed, index) pairs decorrelate fully.
    std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ULL * (index + 1));
    splitmix64(sm);
    return splitmix64(sm);
}

RandomStream RandomStream::substream(std::uint64_t index) const noexcept {
    return RandomStream(derive_seed(seed_, index));
}

}  // namespace bt::stat
