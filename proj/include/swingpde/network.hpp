#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "swingpde/errors.hpp"

namespace swingpde {

struct Bus {
    int id = 0;
    double x = 0.0;  ///< planar coordinate, km
    double y = 0.0;  ///< planar coordinate, km
    double m = 0.0;  ///< inertia, p.u. s^2 (0 for loads)
    double d = 0.0;  ///< damping / primary control, p.u. s (> 0)
    double p = 0.0;  ///< active power injection, p.u.
    double v = 1.0;  ///< voltage magnitude, p.u. (> 0)
};

struct Branch {
    int from = 0;
    int to = 0;
    double b = 0.0;      ///< coupling coefficient v_i v_j b_raw, p.u.
    double b_raw = 0.0;  ///< susceptance as read from file, kept for round-trips
};

struct FaultScenario {
    int target = 0;                ///< bus id (mapped to a cell for continuum runs)
    double dp = 0.0;               ///< injection step, p.u.; negative = generation loss
    double t_on = 0.0;             ///< s
    std::optional<double> t_off;   ///< s; absent = permanent

    bool permanent() const { return !t_off.has_value(); }
    void validate() const;
};

/// Immutable bus/branch model. The constructor validates structural
/// invariants (positive damping, simple connected branch graph); injection
/// balance is checked by loaders and generators, not here, so that
/// scenario-modified copies remain representable.
class PowerNetwork {
public:
    PowerNetwork(std::vector<Bus> buses, std::vector<Branch> branches);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    std::size_t size() const { return buses_.size(); }

    /// Dense index of a bus id; throws ValidationError for unknown ids.
    int index_of(int bus_id) const;
    bool has_bus(int bus_id) const { return id_to_index_.count(bus_id) > 0; }

    double total_injection() const;
    double total_damping() const;
    double total_inertia() const;

    /// |sum p| <= tol * sum |p| (zero-injection networks count as balanced).
    bool is_balanced(double rel_tol = 1e-9) const;
    void require_balanced() const;

private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::unordered_map<int, int> id_to_index_;
};

using Point = std::array<double, 2>;
using Polygon = std::vector<Point>;

enum class InjectionPattern { BalancedDipole, Zero };

/// Relative spreads applied to the synthetic generator's parameter draws.
/// 0 collapses every draw to its central value.
struct Heterogeneity {
    double inertia = 0.5;
    double damping = 0.5;
    double susceptance = 0.5;
    double injection = 0.5;
};

PowerNetwork load_network(const std::filesystem::path& path);
void save_network(const PowerNetwork& net, const std::filesystem::path& path,
                  const std::string& name = "network");

/// Rectangular nx-by-ny lattice with nearest-neighbour branches. Bus (i,j)
/// sits at (i*spacing, j*spacing) with id i*ny + j. BalancedDipole injects
/// +1 p.u. at bus 0 and -1 p.u. at the opposite corner.
PowerNetwork generate_lattice_network(int nx, int ny, double b, double m, double d,
                                      double spacing, InjectionPattern pattern);

/// Seeded planar network at continental scale: buses placed uniformly in the
/// polygon, Gabriel edges pruned to ~1.3 branches per bus, heterogeneous
/// parameters, injections balanced exactly.
PowerNetwork generate_synthetic_continental(std::uint64_t seed, int n_buses,
                                            const Polygon& region,
                                            const Heterogeneity& het = {});

/// Irregular test polygon (~3500 x 2400 km) with a narrow southern
/// peninsula, used as the default region for the synthetic generator.
Polygon default_continental_polygon();

bool point_in_polygon(const Polygon& poly, double x, double y);

}  // namespace swingpde
