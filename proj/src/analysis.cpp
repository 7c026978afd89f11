#include "swingpde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace swingpde {

int NodeCellMap::cell_of(const PowerNetwork& net, int bus_id) const {
    return cell[static_cast<std::size_t>(net.index_of(bus_id))];
}

NodeCellMap make_node_cell_map(const PowerNetwork& net, const RasterGrid& grid) {
    NodeCellMap map;
    map.cell.reserve(net.size());
    map.distance_km.reserve(net.size());
    for (const Bus& b : net.buses()) {
        int k = grid.nearest_masked_cell(b.x, b.y);
        Point c = grid.center(k);
        map.cell.push_back(k);
        map.distance_km.push_back(std::hypot(c[0] - b.x, c[1] - b.y));
    }
    return map;
}

Field wave_speed_map(const FieldSet& fields, const RasterGrid& grid) {
    fields.require_grid(grid);
    if (fields.m.values.minCoeff() <= 0.0)
        throw ValidationError("wave speed needs positive inertia; run finalize_fields first");
    Field c = make_field(grid, Quantity::Aux);
    c.values = (fields.bx.values.cwiseQuotient(fields.m.values)).cwiseSqrt();
    return c;
}

Field homogenized_speed(const FieldSet& fields, const RasterGrid& grid,
                        FrontAveraging averaging) {
    Field c = wave_speed_map(fields, grid);
    double value = averaging == FrontAveraging::MeanOfSpeed
                       ? c.values.mean()
                       : std::sqrt(fields.bx.values.mean() / fields.m.values.mean());
    c.values.setConstant(value);
    return c;
}

Eigen::VectorXd front_arrival(const Field& speed, const RasterGrid& grid, int source) {
    speed.require_grid(grid);
    if (source < 0 || source >= grid.cell_count())
        throw ValidationError("front source cell is not masked");
    if (speed.values.minCoeff() <= 0.0)
        throw ValidationError("front propagation needs positive wave speed");

    // Dijkstra over the masked 8-neighbour lattice; edge time is distance
    // over the mean speed of the two endpoint cells.
    const int n = grid.cell_count();
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd time = Eigen::VectorXd::Constant(n, inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    time[source] = 0.0;
    heap.emplace(0.0, source);

    const double straight = grid.delta();
    const double diagonal = grid.delta() * std::sqrt(2.0);

    while (!heap.empty()) {
        auto [t, k] = heap.top();
        heap.pop();
        if (t > time[k]) continue;
        auto [i, j] = grid.ij_of_rect(grid.rect_of_compact(k));
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (!grid.masked(i + di, j + dj)) continue;
                int l = grid.compact_of_rect(grid.rect_index(i + di, j + dj));
                double dist = (di != 0 && dj != 0) ? diagonal : straight;
                double mean_c = 0.5 * (speed.values[k] + speed.values[l]);
                double cand = t + dist / mean_c;
                if (cand < time[l]) {
                    time[l] = cand;
                    heap.emplace(cand, l);
                }
            }
    }
    return time;
}

SteadyComparison compare_steady(const PowerNetwork& net, const Eigen::VectorXd& theta_disc,
                                const Eigen::VectorXd& theta_cont, const NodeCellMap& map,
                                double outlier_mult) {
    if (theta_disc.size() != static_cast<long>(net.size()))
        throw ValidationError("discrete angles do not match the network");
    if (map.cell.size() != net.size())
        throw ValidationError("node-cell map does not match the network");

    const int n = static_cast<int>(net.size());
    SteadyComparison cmp;
    cmp.bus_ids.reserve(n);
    cmp.theta_disc.resize(n);
    cmp.theta_cont.resize(n);
    for (int i = 0; i < n; ++i) {
        int cell = map.cell[static_cast<std::size_t>(i)];
        if (cell < 0 || cell >= theta_cont.size())
            throw ValidationError("node-cell map points outside the continuum solution");
        cmp.bus_ids.push_back(net.buses()[static_cast<std::size_t>(i)].id);
        cmp.theta_disc[i] = theta_disc[i];
        cmp.theta_cont[i] = theta_cont[cell];
    }

    // Angles are defined up to a constant; align the means over mapped pairs.
    cmp.theta_disc.array() -= cmp.theta_disc.mean();
    cmp.theta_cont.array() -= cmp.theta_cont.mean();

    Eigen::VectorXd err = (cmp.theta_disc - cmp.theta_cont).cwiseAbs();
    cmp.rmse = std::sqrt(err.squaredNorm() / n);
    cmp.max_abs_error = err.maxCoeff();

    const double threshold = outlier_mult * cmp.rmse;
    for (int i = 0; i < n; ++i)
        if (err[i] > threshold && threshold > 0.0) {
            const Bus& b = net.buses()[static_cast<std::size_t>(i)];
            cmp.outliers.push_back({b.id, b.x, b.y, err[i]});
        }
    std::sort(cmp.outliers.begin(), cmp.outliers.end(),
              [](const SteadyOutlier& a, const SteadyOutlier& b) { return a.error > b.error; });
    return cmp;
}

namespace {

/// Index into `times` of the sample nearest to t.
std::size_t nearest_sample(const std::vector<double>& times, double t) {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    std::size_t hi = static_cast<std::size_t>(it - times.begin());
    return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

double first_crossing(const std::vector<double>& times, const Eigen::VectorXd& omega,
                      double threshold) {
    for (long s = 0; s < omega.size(); ++s)
        if (std::abs(omega[s]) > threshold) return times[static_cast<std::size_t>(s)];
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

DynamicComparison compare_dynamics(const Trajectory& a, const Trajectory& b,
                                   const DynamicCompareOptions& options) {
    a.validate();
    b.validate();
    const double t_lo = std::max(a.times.front(), b.times.front());
    const double t_hi = std::min(a.times.back(), b.times.back());
    if (!(t_hi > t_lo)) throw ValidationError("trajectories have disjoint time ranges");

    DynamicComparison cmp;
    cmp.terminal_global_difference =
        std::abs(a.terminal_global_omega() - b.terminal_global_omega());

    for (std::size_t pa = 0; pa < a.probes.size(); ++pa) {
        auto it = std::find(b.probes.begin(), b.probes.end(), a.probes[pa]);
        if (it == b.probes.end())
            throw ValidationError("probe " + std::to_string(a.probes[pa]) +
                                  " is missing from the second trajectory");
        const long pb = it - b.probes.begin();

        double sq_sum = 0.0;
        long count = 0;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t s = 0; s < a.times.size(); ++s) {
            double t = a.times[s];
            if (t < t_lo || t > t_hi) continue;
            double wa = a.omega(static_cast<long>(s), static_cast<long>(pa));
            double wb = b.omega(static_cast<long>(nearest_sample(b.times, t)), pb);
            sq_sum += (wa - wb) * (wa - wb);
            lo = std::min(lo, wa);
            hi = std::max(hi, wa);
            ++count;
        }

        ProbeTraceMetrics m;
        m.probe_id = a.probes[pa];
        m.rmse = count > 0 ? std::sqrt(sq_sum / count) : 0.0;
        m.deviation_range = count > 0 ? hi - lo : 0.0;
        m.terminal_difference =
            std::abs(a.omega(a.omega.rows() - 1, static_cast<long>(pa)) -
                     b.omega(b.omega.rows() - 1, pb));

        double threshold = options.arrival_threshold;
        if (threshold <= 0.0) threshold = 0.1 * std::abs(a.terminal_global_omega());
        if (threshold > 0.0) {
            double ta = first_crossing(a.times, a.omega.col(static_cast<long>(pa)), threshold);
            double tb = first_crossing(b.times, b.omega.col(pb), threshold);
            m.arrival_difference = (std::isnan(ta) || std::isnan(tb)) ? 0.0 : std::abs(ta - tb);
        }
        if (!options.probe_distance_km.empty() && pa < options.probe_distance_km.size())
            m.distance_to_fault_km = options.probe_distance_km[pa];
        cmp.probes.push_back(m);
    }

    // Bin probe errors by distance to the fault when distances are known, so
    // the far-field trend can be read off the report.
    if (!options.probe_distance_km.empty() && options.distance_bins > 0) {
        double dmax = 0.0;
        for (const ProbeTraceMetrics& m : cmp.probes)
            dmax = std::max(dmax, m.distance_to_fault_km);
        if (dmax > 0.0) {
            const int bins = options.distance_bins;
            cmp.distance_bin_edges_km.resize(static_cast<std::size_t>(bins) + 1);
            for (int e = 0; e <= bins; ++e)
                cmp.distance_bin_edges_km[static_cast<std::size_t>(e)] = dmax * e / bins;
            cmp.distance_bin_rmse.assign(static_cast<std::size_t>(bins), 0.0);
            std::vector<int> counts(static_cast<std::size_t>(bins), 0);
            for (const ProbeTraceMetrics& m : cmp.probes) {
                if (m.distance_to_fault_km < 0.0) continue;
                int bin = std::min(bins - 1,
                                   static_cast<int>(m.distance_to_fault_km / dmax * bins));
                cmp.distance_bin_rmse[static_cast<std::size_t>(bin)] += m.rmse;
                ++counts[static_cast<std::size_t>(bin)];
            }
            for (int e = 0; e < bins; ++e)
                if (counts[static_cast<std::size_t>(e)] > 0)
                    cmp.distance_bin_rmse[static_cast<std::size_t>(e)] /=
                        counts[static_cast<std::size_t>(e)];
        }
    }
    return cmp;
}

}  // namespace swingpde
