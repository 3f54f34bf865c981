#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "billiard_thermo/random_stream.hpp"
#include "billiard_thermo/thermostat.hpp"

namespace bt::engine {

/// Brownian engine on a circular track of length l.
///
/// The gas molecule lives on (0, l) between the two faces of one wall: face 0
/// sits at x = 0 with variance σ₁², face 1 at x = l with variance σ₂². The
/// Brownian particle has an unwrapped coordinate x_b; its pin meets the gas
/// whenever x_g ≡ x_b (mod l). The pin is closed on [0, τ₁) and open on
/// [τ₁, τ₁+τ₂) of each period, shifted by `phase`.
struct EngineConfig {
    double wall_mass = 10.0;       // m₀
    double brownian_mass = 100.0;  // m_b
    double gas_mass = 1.0;         // m_g
    double length = 1e-4;
    double sigma2_face0 = 1.0;
    double sigma2_face1 = 1.0;
    std::optional<double> tau_closed;  // default l/2
    std::optional<double> tau_open;    // default l/2
    double phase = 0.0;
    bool randomize_phase = false;
    double force = 0.0;
    std::int64_t events = 1000000;  // collisions, wall hits and pass-throughs; toggles not counted
    std::uint64_t seed = 1;
    std::int64_t sample_every = 0;  // trajectory sample stride in events; 0 = none
    bool check_balance = true;

    /// Throws std::invalid_argument on the first problem found.
    void validate() const;
    double closed_time() const noexcept { return tau_closed.value_or(0.5 * length); }
    double open_time() const noexcept { return tau_open.value_or(0.5 * length); }
    double period() const noexcept { return closed_time() + open_time(); }
    double temperature_face0() const noexcept { return wall_mass * sigma2_face0; }
    double temperature_face1() const noexcept { return wall_mass * sigma2_face1; }
    /// The hot face is the one with the larger variance; face 0 on a tie.
    int hot_face() const noexcept { return sigma2_face1 > sigma2_face0 ? 1 : 0; }
};

enum class EventType { pin_toggle, wall_face0, wall_face1, coincidence };

struct PinSchedule {
    std::int64_t cycle = 0;  // index of the current period
    bool closed = true;

    /// State at time t for a schedule offset by `phase`.
    static PinSchedule at(double t, double phase, double tau_closed, double tau_open);
    double next_toggle(double phase, double tau_closed, double tau_open) const noexcept;
};

struct EngineState {
    double t = 0.0;
    double x_gas = 0.0;
    double v_gas = 0.0;
    double x_b = 0.0;  // unwrapped
    double v_b = 0.0;
    PinSchedule pin;
    /// Image k of the coincidence just processed (x_g = x_b + k·l at that
    /// instant); its root at s = 0 is excluded until the next physical event.
    std::optional<std::int64_t> pending_image;
};

struct EngineEvent {
    EventType type = EventType::pin_toggle;
    double dt = 0.0;
    std::int64_t image = 0;  // coincidence only
};

/// Tie order at equal times (within 1e-15·t): toggle, wall, coincidence.
/// Throws InvariantViolation if no event exists.
EngineEvent next_engine_event(const EngineState& state, const EngineConfig& config);

/// Smallest s > 0 with x_g + v_g·s = x_b + v_b·s + ½(F/m_b)s² + k·l over
/// k ∈ {⌊(x_g - x_b)/l⌋ - 2, ..., ⌊(x_g - x_b)/l⌋ + 2}.
std::optional<std::pair<double, std::int64_t>> next_coincidence(const EngineState& state, double accel,
                                                                double length);

struct EventCounts {
    std::int64_t wall_hot = 0;
    std::int64_t wall_cold = 0;
    std::int64_t collisions = 0;
    std::int64_t pass_through = 0;
    std::int64_t pin_toggles = 0;

    std::int64_t physical() const noexcept { return wall_hot + wall_cold + collisions + pass_through; }
};

struct EngineSample {
    std::int64_t event = 0;
    double t = 0.0;
    EventType type = EventType::pin_toggle;
    bool collided = false;
    double x_b = 0.0;
    double v_b = 0.0;
    double v_gas = 0.0;
    double q_hot = 0.0;
    double q_cold = 0.0;
    double work = 0.0;
};

struct EngineLedger {
    double q_hot = 0.0;
    double q_cold = 0.0;
    double work = 0.0;
    double energy_gas = 0.0;
    double energy_b = 0.0;
    double energy_gas0 = 0.0;
    double energy_b0 = 0.0;
    double x_b0 = 0.0;
    EventCounts counts;
    double max_balance_residual = 0.0;  // relative, over all checked events

    /// Q_h + Q_c + W - ΔE_g - ΔE_b.
    double balance_residual() const noexcept;
    /// |Q_h| + |Q_c| + |W| + E_g + E_g(0) + E_b + E_b(0).
    double balance_scale() const noexcept;
};

class Engine {
public:
    /// Gas at l/2 moving in a random direction with speed drawn from the hot
    /// face's stationary law; Brownian particle at rest at a uniform point of
    /// (0, l).
    explicit Engine(const EngineConfig& config);
    Engine(const EngineConfig& config, const EngineState& initial);

    /// Processes the next event (toggles included). Returns its type.
    EventType step();
    /// Runs until `config.events` physical events have been processed.
    void run();
    /// Runs `n` more physical events.
    void run_events(std::int64_t n);

    const EngineState& state() const noexcept { return state_; }
    const EngineLedger& ledger() const noexcept { return ledger_; }
    const std::vector<EngineSample>& samples() const noexcept { return samples_; }
    const EngineConfig& config() const noexcept { return config_; }
    bool last_collided() const noexcept { return last_collided_; }

private:
    void advance(double dt);
    void check_balance(EventType type);
    void record(EventType type);

    EngineConfig config_;
    thermo::ThermostatParams face0_;
    thermo::ThermostatParams face1_;
    stat::RandomStream stream_;
    EngineState state_;
    EngineLedger ledger_;
    std::vector<EngineSample> samples_;
    double accel_ = 0.0;
    bool last_collided_ = false;
};

/// Convenience wrapper: construct, run, return.
struct EngineRun {
    EngineLedger ledger;
    std::vector<EngineSample> samples;
    EngineState final_state;
};
EngineRun run_engine(const EngineConfig& config);

struct Efficiency {
    double by_work = 0.0;   // -W/Q_h
    double by_heat = 0.0;   // 1 + Q_c/Q_h
    bool defined = false;   // false when Q_h == 0
};
Efficiency efficiency(const EngineLedger& ledger);

/// (x_b(t) - x_b(0)) / t for each sample with t > 0. Needs ≥ 2 samples.
std::vector<double> mean_velocity(const std::vector<EngineSample>& samples, double x_b0);

struct SweepRun {
    double force = 0.0;
    std::int64_t replicate = 0;
    std::int64_t events = 0;
    double q_hot = 0.0;
    double q_cold = 0.0;
    double work = 0.0;
    Efficiency eff;
};

struct SweepPoint {
    double force = 0.0;
    std::int64_t replicas = 0;
    std::int64_t undefined = 0;  // runs with Q_h == 0, excluded from the means
    double mean_by_heat = 0.0;
    double se_by_heat = 0.0;
    double ci99_low = 0.0;
    double ci99_high = 0.0;
    double mean_by_work = 0.0;
    double se_by_work = 0.0;
    double mean_q_hot = 0.0;
    double mean_q_cold = 0.0;
    double mean_work = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<SweepRun> runs;  // force-major, replicate-minor
};

/// For force i and replicate r the run uses seed derive_seed(seed, i·replicas + r)
/// and, when the template asks for it, a random pin phase from that stream.
SweepResult efficiency_sweep(const EngineConfig& base, const std::vector<double>& forces, std::int64_t replicas,
                             unsigned threads = 1);

}  // namespace bt::engine
