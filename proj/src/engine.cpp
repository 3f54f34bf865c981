#include "billiard_thermo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "billiard_thermo/errors.hpp"
#include "billiard_thermo/mechanics.hpp"
#include "billiard_thermo/parallel.hpp"
#include "billiard_thermo/stats.hpp"

namespace bt::engine {

namespace {

constexpr double kTieTolerance = 1e-15;
constexpr double kTangency = 1e-30;
constexpr double kBalanceTolerance = 1e-8;
constexpr std::int64_t kMaxIdleToggles = 100000000;
// Two-sided 99% normal quantile.
constexpr double kZ99 = 2.5758293035489004;

const char* event_name(EventType t) {
    switch (t) {
        case EventType::pin_toggle: return "pin_toggle";
        case EventType::wall_face0: return "wall_face0";
        case EventType::wall_face1: return "wall_face1";
        case EventType::coincidence: return "coincidence";
    }
    return "?";
}

int tie_rank(EventType t) {
    switch (t) {
        case EventType::pin_toggle: return 0;
        case EventType::wall_face0:
        case EventType::wall_face1: return 1;
        case EventType::coincidence: return 2;
    }
    return 3;
}

}  // namespace

void EngineConfig::validate() const {
    if (!(wall_mass > 0.0) || !(brownian_mass > 0.0) || !(gas_mass > 0.0))
        throw std::invalid_argument("engine: masses must be positive");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("engine: length must be positive");
    if (!(sigma2_face0 > 0.0) || !(sigma2_face1 > 0.0))
        throw std::invalid_argument("engine: face variances must be positive");
    if (!(closed_time() > 0.0) || !(open_time() > 0.0))
        throw std::invalid_argument("engine: pin closed/open durations must be positive");
    if (!(phase >= 0.0 && phase < period())) throw std::invalid_argument("engine: phase must lie in [0, tau1 + tau2)");
    if (!std::isfinite(force)) throw std::invalid_argument("engine: force must be finite");
    if (events < 0) throw std::invalid_argument("engine: events must be non-negative");
    if (sample_every < 0) throw std::invalid_argument("engine: sample_every must be non-negative");
    (void)thermo::coefficients(std::sqrt(gas_mass / wall_mass));
}

PinSchedule PinSchedule::at(double t, double phase, double tau_closed, double tau_open) {
    const double period = tau_closed + tau_open;
    const double s = t + phase;
    PinSchedule p;
    p.cycle = static_cast<std::int64_t>(std::floor(s / period));
    p.closed = s - static_cast<double>(p.cycle) * period < tau_closed;
    return p;
}

double PinSchedule::next_toggle(double phase, double tau_closed, double tau_open) const noexcept {
    const double period = tau_closed + tau_open;
    const double s = closed ? static_cast<double>(cycle) * period + tau_closed
                            : static_cast<double>(cycle + 1) * period;
    return s - phase;
}

std::optional<std::pair<double, std::int64_t>> next_coincidence(const EngineState& st, double accel,
                                                                double length) {
    const double a = 0.5 * accel;
    const double b = st.v_b - st.v_gas;
    const auto centre = static_cast<std::int64_t>(std::floor((st.x_gas - st.x_b) / length));
    std::optional<std::pair<double, std::int64_t>> best;
    const auto offer = [&](double s, std::int64_t k) {
        if (s > 0.0 && std::isfinite(s) && (!best || s < best->first)) best = std::make_pair(s, k);
    };
    for (std::int64_t k = centre - 2; k <= centre + 2; ++k) {
        if (st.pending_image && *st.pending_image == k) {
            // One root is the coincidence just processed; the other is -b/a.
            if (a != 0.0) offer(-b / a, k);
            continue;
        }
        const double c = st.x_b - st.x_gas + static_cast<double>(k) * length;
        if (a == 0.0) {
            if (b != 0.0) offer(-c / b, k);
            continue;
        }
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0 || std::abs(disc) < kTangency) continue;
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        offer(q / a, k);
        if (q != 0.0) offer(c / q, k);
    }
    return best;
}

EngineEvent next_engine_event(const EngineState& st, const EngineConfig& config) {
    struct Candidate {
        EngineEvent ev;
        bool valid = false;
    };
    Candidate cands[3];
    cands[0].ev = {EventType::pin_toggle,
                   st.pin.next_toggle(config.phase, config.closed_time(), config.open_time()) - st.t, 0};
    cands[0].valid = true;
    if (st.v_gas < 0.0) {
        cands[1].ev = {EventType::wall_face0, st.x_gas / -st.v_gas, 0};
        cands[1].valid = true;
    } else if (st.v_gas > 0.0) {
        cands[1].ev = {EventType::wall_face1, (config.length - st.x_gas) / st.v_gas, 0};
        cands[1].valid = true;
    }
    if (const auto c = next_coincidence(st, config.force / config.brownian_mass, config.length)) {
        cands[2].ev = {EventType::coincidence, c->first, c->second};
        cands[2].valid = true;
    }
    double earliest = std::numeric_limits<double>::infinity();
    for (const auto& c : cands)
        if (c.valid) earliest = std::min(earliest, c.ev.dt);
    if (!std::isfinite(earliest)) throw InvariantViolation("engine: no next event");
    const double tol = kTieTolerance * std::max(st.t + earliest, std::numeric_limits<double>::min());
    const Candidate* pick = nullptr;
    for (const auto& c : cands) {
        if (!c.valid || c.ev.dt > earliest + tol) continue;
        if (!pick || tie_rank(c.ev.type) < tie_rank(pick->ev.type)) pick = &c;
    }
    EngineEvent ev = pick->ev;
    ev.dt = std::max(ev.dt, 0.0);
    return ev;
}

double EngineLedger::balance_residual() const noexcept {
    return q_hot + q_cold + work - (energy_gas - energy_gas0) - (energy_b - energy_b0);
}

double EngineLedger::balance_scale() const noexcept {
    return std::abs(q_hot) + std::abs(q_cold) + std::abs(work) + energy_gas + energy_gas0 + energy_b + energy_b0;
}

Engine::Engine(const EngineConfig& config, const EngineState& initial)
    : config_((config.validate(), config)),
      face0_(config.wall_mass, config.gas_mass, config.sigma2_face0),
      face1_(config.wall_mass, config.gas_mass, config.sigma2_face1),
      stream_(config.seed),
      state_(initial),
      accel_(config.force / config.brownian_mass) {
    if (!(state_.x_gas > 0.0 && state_.x_gas < config_.length))
        throw std::invalid_argument("engine: gas must start strictly inside (0, l)");
    state_.pin = PinSchedule::at(state_.t, config_.phase, config_.closed_time(), config_.open_time());
    ledger_.energy_gas = ledger_.energy_gas0 = 0.5 * config_.gas_mass * state_.v_gas * state_.v_gas;
    ledger_.energy_b = ledger_.energy_b0 = 0.5 * config_.brownian_mass * state_.v_b * state_.v_b;
    ledger_.x_b0 = state_.x_b;
    if (config_.sample_every > 0) record(EventType::pin_toggle);
}

namespace {

EngineConfig with_random_phase(EngineConfig c, stat::RandomStream& s) {
    if (c.randomize_phase) c.phase = s.next_unit() * c.period();
    return c;
}

EngineState default_state(const EngineConfig& c, stat::RandomStream& s) {
    const thermo::ThermostatParams hot(c.wall_mass, c.gas_mass, c.hot_face() == 1 ? c.sigma2_face1 : c.sigma2_face0);
    const double v = hot.sigma() * std::sqrt(-2.0 * std::log(s.next_open_unit()));
    const double sign = (s.next_u64() >> 63) != 0 ? 1.0 : -1.0;
    EngineState st;
    st.x_gas = 0.5 * c.length;
    st.v_gas = sign * hot.to_gas_speed(v);
    // x_b ≡ 0 would park the pin on the wall, where the gas never reaches it.
    do st.x_b = s.next_unit() * c.length;
    while (st.x_b == 0.0);
    return st;
}

}  // namespace

Engine::Engine(const EngineConfig& config)
    : config_((config.validate(), config)),
      face0_(config.wall_mass, config.gas_mass, config.sigma2_face0),
      face1_(config.wall_mass, config.gas_mass, config.sigma2_face1),
      stream_(config.seed),
      accel_(config.force / config.brownian_mass) {
    config_ = with_random_phase(config_, stream_);
    state_ = default_state(config_, stream_);
    state_.pin = PinSchedule::at(0.0, config_.phase, config_.closed_time(), config_.open_time());
    ledger_.energy_gas = ledger_.energy_gas0 = 0.5 * config_.gas_mass * state_.v_gas * state_.v_gas;
    ledger_.x_b0 = state_.x_b;
    if (config_.sample_every > 0) record(EventType::pin_toggle);
}

void Engine::advance(double dt) {
    state_.x_gas += state_.v_gas * dt;
    state_.x_b += (state_.v_b + 0.5 * accel_ * dt) * dt;
    state_.v_b += accel_ * dt;
    state_.t += dt;
    ledger_.work = config_.force * (state_.x_b - ledger_.x_b0);
    ledger_.energy_b = 0.5 * config_.brownian_mass * state_.v_b * state_.v_b;
}

EventType Engine::step() {
    const EngineEvent ev = next_engine_event(state_, config_);
    last_collided_ = false;
    switch (ev.type) {
        case EventType::pin_toggle: {
            // Land exactly on the scheduled instant.
            const double t_next = state_.pin.next_toggle(config_.phase, config_.closed_time(), config_.open_time());
            advance(ev.dt);
            state_.t = t_next;
            if (!state_.pin.closed) ++state_.pin.cycle;
            state_.pin.closed = !state_.pin.closed;
            ++ledger_.counts.pin_toggles;
            break;
        }
        case EventType::wall_face0:
        case EventType::wall_face1: {
            advance(ev.dt);
            const bool at0 = ev.type == EventType::wall_face0;
            state_.x_gas = at0 ? 0.0 : config_.length;
            const thermo::ThermostatParams& face = at0 ? face0_ : face1_;
            const double v_in = face.to_reduced(std::abs(state_.v_gas));
            const double u_out = face.to_gas_speed(thermo::thermostat_step(stream_, v_in, face));
            const double e_old = ledger_.energy_gas;
            state_.v_gas = at0 ? u_out : -u_out;
            ledger_.energy_gas = 0.5 * config_.gas_mass * u_out * u_out;
            const double q = ledger_.energy_gas - e_old;
            if ((at0 ? 0 : 1) == config_.hot_face()) {
                ledger_.q_hot += q;
                ++ledger_.counts.wall_hot;
            } else {
                ledger_.q_cold += q;
                ++ledger_.counts.wall_cold;
            }
            state_.pending_image.reset();
            break;
        }
        case EventType::coincidence: {
            advance(ev.dt);
            if (state_.pin.closed) {
                const mech::MassPair pair(config_.brownian_mass, config_.gas_mass);
                const mech::VelocityPair out = mech::elastic_collide(pair, state_.v_b, state_.v_gas);
                state_.v_b = out.a;
                state_.v_gas = out.b;
                ledger_.energy_b = 0.5 * config_.brownian_mass * state_.v_b * state_.v_b;
                ledger_.energy_gas = 0.5 * config_.gas_mass * state_.v_gas * state_.v_gas;
                ++ledger_.counts.collisions;
                last_collided_ = true;
            } else {
                ++ledger_.counts.pass_through;
            }
            state_.pending_image = ev.image;
            break;
        }
    }
    if (config_.check_balance) check_balance(ev.type);
    if (ev.type != EventType::pin_toggle && config_.sample_every > 0 &&
        ledger_.counts.physical() % config_.sample_every == 0)
        record(ev.type);
    return ev.type;
}

void Engine::check_balance(EventType type) {
    const double res = std::abs(ledger_.balance_residual());
    const double scale = ledger_.balance_scale();
    const double rel = scale > 0.0 ? res / scale : res;
    ledger_.max_balance_residual = std::max(ledger_.max_balance_residual, rel);
    if (rel > kBalanceTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "engine: energy balance violated (relative residual " << rel << ") after " << event_name(type)
           << " at event " << ledger_.counts.physical() << ", t = " << state_.t << ", x_g = " << state_.x_gas
           << ", v_g = " << state_.v_gas << ", x_b = " << state_.x_b << ", v_b = " << state_.v_b
           << ", Q_h = " << ledger_.q_hot << ", Q_c = " << ledger_.q_cold << ", W = " << ledger_.work;
        throw InvariantViolation(os.str());
    }
}

void Engine::record(EventType type) {
    samples_.push_back({ledger_.counts.physical(), state_.t, type, last_collided_, state_.x_b, state_.v_b,
                        state_.v_gas, ledger_.q_hot, ledger_.q_cold, ledger_.work});
}

void Engine::run_events(std::int64_t n) {
    const std::int64_t target = ledger_.counts.physical() + n;
    std::int64_t idle = 0;
    while (ledger_.counts.physical() < target) {
        if (step() == EventType::pin_toggle) {
            if (++idle > kMaxIdleToggles) throw InvariantViolation("engine: only pin toggles remain");
        } else {
            idle = 0;
        }
    }
}

void Engine::run() { run_events(config_.events - ledger_.counts.physical()); }

EngineRun run_engine(const EngineConfig& config) {
    Engine e(config);
    e.run();
    return {e.ledger(), e.samples(), e.state()};
}

Efficiency efficiency(const EngineLedger& ledger) {
    Efficiency e;
    if (ledger.q_hot == 0.0) return e;
    e.defined = true;
    e.by_work = -ledger.work / ledger.q_hot;
    e.by_heat = 1.0 + ledger.q_cold / ledger.q_hot;
    return e;
}

std::vector<double> mean_velocity(const std::vector<EngineSample>& samples, double x_b0) {
    if (samples.size() < 2) throw std::invalid_argument("mean_velocity: need at least 2 samples");
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        if (s.t > 0.0) out.push_back((s.x_b - x_b0) / s.t);
    return out;
}

SweepResult efficiency_sweep(const EngineConfig& base, const std::vector<double>& forces, std::int64_t replicas,
                             unsigned threads) {
    if (forces.empty()) throw std::invalid_argument("efficiency_sweep: empty force grid");
    if (replicas < 2) throw std::invalid_argument("efficiency_sweep: need at least 2 replicas");
    base.validate();
    SweepResult out;
    const auto n_runs = static_cast<std::int64_t>(forces.size()) * replicas;
    out.runs.resize(static_cast<std::size_t>(n_runs));
    parallel_for(n_runs, threads, [&](std::int64_t i) {
        EngineConfig c = base;
        c.force = forces[static_cast<std::size_t>(i / replicas)];
        c.seed = stat::RandomStream::derive_seed(base.seed, static_cast<std::uint64_t>(i));
        c.sample_every = 0;
        const EngineRun r = run_engine(c);
        SweepRun& s = out.runs[static_cast<std::size_t>(i)];
        s.force = c.force;
        s.replicate = i % replicas;
        s.events = r.ledger.counts.physical();
        s.q_hot = r.ledger.q_hot;
        s.q_cold = r.ledger.q_cold;
        s.work = r.ledger.work;
        s.eff = efficiency(r.ledger);
    });
    for (std::size_t f = 0; f < forces.size(); ++f) {
        stat::RunningStats heat, work_eff, qh, qc, w;
        SweepPoint p;
        p.force = forces[f];
        p.replicas = replicas;
        for (std::int64_t r = 0; r < replicas; ++r) {
            const SweepRun& s = out.runs[f * static_cast<std::size_t>(replicas) + static_cast<std::size_t>(r)];
            qh.add(s.q_hot);
            qc.add(s.q_cold);
            w.add(s.work);
            if (!s.eff.defined) {
                ++p.undefined;
                continue;
            }
            heat.add(s.eff.by_heat);
            work_eff.add(s.eff.by_work);
        }
        p.mean_by_heat = heat.mean();
        p.se_by_heat = heat.count() > 1 ? heat.standard_error() : 0.0;
        p.ci99_low = p.mean_by_heat - kZ99 * p.se_by_heat;
        p.ci99_high = p.mean_by_heat + kZ99 * p.se_by_heat;
        p.mean_by_work = work_eff.mean();
        p.se_by_work = work_eff.count() > 1 ? work_eff.standard_error() : 0.0;
        p.mean_q_hot = qh.mean();
        p.mean_q_cold = qc.mean();
        p.mean_work = w.mean();
        out.points.push_back(p);
    }
    return out;
}

}  // namespace bt::engine
