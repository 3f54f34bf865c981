#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bt {

// Raised when a simulation detects that one of its own invariants no longer
// holds (energy balance, positivity of the thermostat map, ...). The CLI maps
// it to exit code 3.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Aggregated configuration problems. Every violation found during validation
// is collected so the user can fix them in one pass.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace bt
