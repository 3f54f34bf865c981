#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "billiard_thermo/billiard.hpp"
#include "billiard_thermo/random_stream.hpp"

namespace bt::billiard {

/// The container split by a column of circular scatterers.
///
/// Scatterers sit at (screen_x, (j + 1/2)·spacing) for j = 0 .. height/spacing − 1.
/// The entry lines are the vertical tangents x = screen_x ± radius.
struct ChamberGeometry {
    double width = 20.0;
    double height = 9.0;
    double screen_x = 10.0;
    double spacing = 1.0;
    double radius = 0.45;

    /// Throws std::invalid_argument listing the first broken constraint.
    void validate() const;
    int cells() const;
    double left_line() const noexcept { return screen_x - radius; }
    double right_line() const noexcept { return screen_x + radius; }
};

/// One point of the reduced phase space {0,1} × [0,1] × [−π/2, π/2].
struct ScreenEntry {
    int side = 0;        // 0: entered from the left chamber, 1: from the right
    double offset = 0.0;  // height inside the cell, in units of spacing
    double angle = 0.0;   // angle to the inward normal of the entry line
    double time = 0.0;
};

struct ChamberTable {
    BilliardTable table;
    std::size_t left_wall = 0;
    std::size_t left_port = 0;
    std::size_t right_port = 0;
};

ChamberTable build_chamber_table(const ChamberGeometry& g);

/// Uniform position in the left chamber, uniform direction.
ParticleState random_left_state(const ChamberGeometry& g, stat::RandomStream& stream);

struct ChamberRun {
    std::vector<ScreenEntry> entries;
    std::int64_t singular = 0;     // trajectories abandoned at a corner or tangency
    std::int64_t reflections = 0;
    double elapsed = 0.0;
};

/// Follows one particle until `n_entries` entries into the scatterer strip are
/// recorded. After a singular event the trajectory is dropped and a fresh
/// random state from `restart` continues the run.
ChamberRun run_divided_chamber(const ChamberGeometry& g, const ParticleState& initial, std::int64_t n_entries,
                               stat::RandomStream& restart);

struct CellExit {
    ScreenEntry exit;  // side is the chamber the particle leaves into
    double transit_time = 0.0;
};

/// The cell map T on one fundamental cell: a single scatterer between two
/// mirror walls, the entry lines as ports.
class FundamentalCell {
public:
    static constexpr std::int64_t kMaxEvents = 1000000;

    explicit FundamentalCell(const ChamberGeometry& g);

    /// std::nullopt for singular trajectories.
    std::optional<CellExit> map(const ScreenEntry& entry) const;

private:
    double radius_;
    double spacing_;
    BilliardTable table_;
    std::size_t port_left_ = 0;
    std::size_t port_right_ = 0;
};

std::optional<CellExit> cell_map_T(const ScreenEntry& entry, const ChamberGeometry& g);

struct ExpansionSeries {
    std::vector<double> times;
    std::vector<double> right_fraction;
    std::int64_t particles = 0;
    std::int64_t singular = 0;
};

enum class ExpansionModel { deterministic, scattering_line };

/// Non-interacting particles released from the middle of the left wall with
/// angles uniform in [−π/4, π/4]. A particle counts as right once x > screen_x.
/// Particle i uses stream.substream(i), so results do not depend on threading.
ExpansionSeries ensemble_expansion(const ChamberGeometry& g, std::int64_t n_particles, double t_max, double sample_dt,
                                   const stat::RandomStream& stream, ExpansionModel model = ExpansionModel::deterministic,
                                   unsigned threads = 1);

}  // namespace bt::billiard
