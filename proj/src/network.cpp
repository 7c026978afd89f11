#include "swingpde/network.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace swingpde {

namespace {

using nlohmann::json;

std::string bus_label(int id) { return "bus " + std::to_string(id); }

std::string branch_label(int from, int to) {
    return "branch " + std::to_string(from) + "-" + std::to_string(to);
}

// Deterministic helpers on top of mt19937_64; std::uniform_real_distribution
// is implementation-defined, these are not.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Central value 'c' spread multiplicatively by +-h (h in [0,1)).
double spread(std::mt19937_64& rng, double c, double h) {
    if (h <= 0.0) return c;
    return c * (1.0 + h * (2.0 * uniform01(rng) - 1.0));
}

}  // namespace

void FaultScenario::validate() const {
    if (t_on < 0.0) throw ValidationError("fault t_on must be nonnegative");
    if (t_off && *t_off <= t_on) throw ValidationError("fault t_off must exceed t_on");
}

PowerNetwork::PowerNetwork(std::vector<Bus> buses, std::vector<Branch> branches)
    : buses_(std::move(buses)), branches_(std::move(branches)) {
    if (buses_.empty()) throw ValidationError("network has no buses");

    id_to_index_.reserve(buses_.size());
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const Bus& b = buses_[i];
        if (!id_to_index_.emplace(b.id, static_cast<int>(i)).second)
            throw ValidationError(bus_label(b.id) + ": duplicate id");
        if (!(b.m >= 0.0)) throw ValidationError(bus_label(b.id) + ": inertia must be nonnegative");
        if (!(b.d > 0.0))
            throw ValidationError(bus_label(b.id) + ": damping must be positive (got " +
                                  std::to_string(b.d) + ")");
        if (!(b.v > 0.0)) throw ValidationError(bus_label(b.id) + ": voltage must be positive");
        if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.p))
            throw ValidationError(bus_label(b.id) + ": non-finite value");
    }

    std::set<std::pair<int, int>> seen;
    for (const Branch& br : branches_) {
        if (br.from == br.to) throw ValidationError(branch_label(br.from, br.to) + ": self loop");
        if (!id_to_index_.count(br.from) || !id_to_index_.count(br.to))
            throw ValidationError(branch_label(br.from, br.to) + ": unknown endpoint");
        if (!(br.b > 0.0))
            throw ValidationError(branch_label(br.from, br.to) + ": susceptance must be positive");
        auto key = std::minmax(br.from, br.to);
        if (!seen.insert(key).second)
            throw ValidationError(branch_label(br.from, br.to) + ": duplicate branch");
    }

    // Connectivity over the branch graph.
    std::vector<std::vector<int>> adj(buses_.size());
    for (const Branch& br : branches_) {
        int u = index_of(br.from), v = index_of(br.to);
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> component(buses_.size(), -1);
    std::vector<int> sizes;
    for (std::size_t start = 0; start < buses_.size(); ++start) {
        if (component[start] >= 0) continue;
        int c = static_cast<int>(sizes.size());
        sizes.push_back(0);
        std::vector<int> stack{static_cast<int>(start)};
        component[start] = c;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            ++sizes[c];
            for (int v : adj[u])
                if (component[v] < 0) {
                    component[v] = c;
                    stack.push_back(v);
                }
        }
    }
    if (sizes.size() > 1) {
        std::sort(sizes.rbegin(), sizes.rend());
        std::ostringstream msg;
        msg << "network is a disconnected graph: component sizes [";
        for (std::size_t i = 0; i < sizes.size(); ++i) msg << (i ? ", " : "") << sizes[i];
        msg << "]";
        throw ValidationError(msg.str());
    }
}

int PowerNetwork::index_of(int bus_id) const {
    auto it = id_to_index_.find(bus_id);
    if (it == id_to_index_.end())
        throw ValidationError("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

double PowerNetwork::total_injection() const {
    return std::accumulate(buses_.begin(), buses_.end(), 0.0,
                           [](double s, const Bus& b) { return s + b.p; });
}

double PowerNetwork::total_damping() const {
    return std::accumulate(buses_.begin(), buses_.end(), 0.0,
                           [](double s, const Bus& b) { return s + b.d; });
}

double PowerNetwork::total_inertia() const {
    return std::accumulate(buses_.begin(), buses_.end(), 0.0,
                           [](double s, const Bus& b) { return s + b.m; });
}

bool PowerNetwork::is_balanced(double rel_tol) const {
    double abs_sum = 0.0;
    for (const Bus& b : buses_) abs_sum += std::abs(b.p);
    return std::abs(total_injection()) <= rel_tol * std::max(abs_sum, 1.0);
}

void PowerNetwork::require_balanced() const {
    if (!is_balanced())
        throw ValidationError("network injections do not balance: sum p = " +
                              std::to_string(total_injection()));
}

// ---------------------------------------------------------------------------
// File format

PowerNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file: " + path.string());

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("malformed network file " + path.string() + ": " + e.what());
    }

    auto reject_unknown = [&](const json& obj, std::initializer_list<const char*> allowed,
                              const std::string& where) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (const char* k : allowed)
                if (it.key() == k) known = true;
            if (!known)
                throw ParseError(where + ": unknown field '" + it.key() + "'");
        }
    };

    if (!doc.is_object()) throw ParseError("network file must contain one object");
    reject_unknown(doc, {"meta", "buses", "branches"}, "network document");
    if (!doc.contains("buses") || !doc.contains("branches"))
        throw ParseError("network file needs 'buses' and 'branches' arrays");
    if (doc.contains("meta")) reject_unknown(doc.at("meta"), {"name", "units"}, "meta");

    std::vector<Bus> buses;
    for (const json& jb : doc.at("buses")) {
        reject_unknown(jb, {"id", "x", "y", "m", "d", "p", "v"}, "bus entry");
        Bus b;
        try {
            b.id = jb.at("id").get<int>();
            b.x = jb.at("x").get<double>();
            b.y = jb.at("y").get<double>();
            b.m = jb.at("m").get<double>();
            b.d = jb.at("d").get<double>();
            b.p = jb.at("p").get<double>();
            b.v = jb.at("v").get<double>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("bus entry: ") + e.what());
        }
        buses.push_back(b);
    }

    std::unordered_map<int, double> voltage;
    for (const Bus& b : buses) voltage[b.id] = b.v;

    std::vector<Branch> branches;
    for (const json& jb : doc.at("branches")) {
        reject_unknown(jb, {"from", "to", "b"}, "branch entry");
        Branch br;
        try {
            br.from = jb.at("from").get<int>();
            br.to = jb.at("to").get<int>();
            br.b_raw = jb.at("b").get<double>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("branch entry: ") + e.what());
        }
        auto vf = voltage.find(br.from);
        auto vt = voltage.find(br.to);
        if (vf == voltage.end() || vt == voltage.end())
            throw ValidationError(branch_label(br.from, br.to) + ": unknown endpoint");
        // Voltage magnitudes are folded into the coupling once, at load time.
        br.b = vf->second * vt->second * br.b_raw;
        branches.push_back(br);
    }

    PowerNetwork net(std::move(buses), std::move(branches));
    net.require_balanced();
    return net;
}

void save_network(const PowerNetwork& net, const std::filesystem::path& path,
                  const std::string& name) {
    json doc;
    doc["meta"] = {{"name", name}, {"units", "p.u., km, s"}};
    doc["buses"] = json::array();
    for (const Bus& b : net.buses())
        doc["buses"].push_back({{"id", b.id}, {"x", b.x}, {"y", b.y}, {"m", b.m},
                                {"d", b.d}, {"p", b.p}, {"v", b.v}});
    doc["branches"] = json::array();
    for (const Branch& br : net.branches())
        doc["branches"].push_back({{"from", br.from}, {"to", br.to}, {"b", br.b_raw}});

    std::ofstream out(path);
    if (!out) throw ParseError("cannot write network file: " + path.string());
    out << doc.dump(1) << "\n";
}

// ---------------------------------------------------------------------------
// Generators

PowerNetwork generate_lattice_network(int nx, int ny, double b, double m, double d,
                                      double spacing, InjectionPattern pattern) {
    if (nx < 1 || ny < 1 || nx * ny < 2)
        throw ValidationError("lattice needs at least 2 buses");
    if (!(b > 0.0) || !(d > 0.0) || !(m >= 0.0) || !(spacing > 0.0))
        throw ValidationError("lattice parameters out of range");

    std::vector<Bus> buses;
    buses.reserve(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            buses.push_back({i * ny + j, i * spacing, j * spacing, m, d, 0.0, 1.0});

    if (pattern == InjectionPattern::BalancedDipole) {
        buses.front().p = 1.0;
        buses.back().p = -1.0;
    }

    std::vector<Branch> branches;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            int id = i * ny + j;
            if (i + 1 < nx) branches.push_back({id, id + ny, b, b});
            if (j + 1 < ny) branches.push_back({id, id + 1, b, b});
        }

    return PowerNetwork(std::move(buses), std::move(branches));
}

bool point_in_polygon(const Polygon& poly, double x, double y) {
    bool inside = false;
    std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double xi = poly[i][0], yi = poly[i][1];
        double xj = poly[j][0], yj = poly[j][1];
        bool crosses = (yi > y) != (yj > y);
        if (crosses && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
    }
    return inside;
}

Polygon default_continental_polygon() {
    return {{0, 800},    {500, 100},  {1200, 0},    {1500, 600},  {1750, 150},
            {2050, -650}, {2350, -700}, {2250, 100},  {2150, 700},  {2900, 500},
            {3500, 900},  {3300, 1700}, {2500, 2400}, {1500, 2300}, {600, 1900}};
}

namespace {

double polygon_area(const Polygon& poly) {
    double a = 0.0;
    std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        a += poly[j][0] * poly[i][1] - poly[i][0] * poly[j][1];
    return 0.5 * std::abs(a);
}

struct Edge {
    int u, v;
    double len;
};

}  // namespace

PowerNetwork generate_synthetic_continental(std::uint64_t seed, int n_buses,
                                            const Polygon& region,
                                            const Heterogeneity& het) {
    if (n_buses < 10) throw ValidationError("synthetic network needs at least 10 buses");
    if (region.size() < 3 || polygon_area(region) <= 0.0)
        throw ValidationError("region polygon is degenerate");

    std::mt19937_64 rng(seed);

    double xlo = region[0][0], xhi = xlo, ylo = region[0][1], yhi = ylo;
    for (const Point& p : region) {
        xlo = std::min(xlo, p[0]);
        xhi = std::max(xhi, p[0]);
        ylo = std::min(ylo, p[1]);
        yhi = std::max(yhi, p[1]);
    }

    // Rejection-sample bus positions with a minimum spacing so the Gabriel
    // construction stays well conditioned.
    const double min_sep = 0.35 * std::sqrt(polygon_area(region) / n_buses);
    std::vector<Point> pts;
    pts.reserve(n_buses);
    long attempts = 0;
    const long attempt_cap = 4000L * n_buses;
    while (static_cast<int>(pts.size()) < n_buses) {
        if (++attempts > attempt_cap)
            throw ValidationError("could not place buses inside the region polygon");
        double x = uniform(rng, xlo, xhi);
        double y = uniform(rng, ylo, yhi);
        if (!point_in_polygon(region, x, y)) continue;
        bool ok = true;
        for (std::size_t i = pts.size(); i-- > 0;) {
            double dx = pts[i][0] - x, dy = pts[i][1] - y;
            if (dx * dx + dy * dy < min_sep * min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) pts.push_back({x, y});
    }

    // Gabriel graph on a uniform bucket grid: edge (u,v) iff no third point
    // lies in the disk with uv as diameter. Always contains the Euclidean
    // MST, hence connected; subgraph of the Delaunay triangulation, hence
    // planar.
    const int nb = n_buses;
    const double cell = std::max(min_sep * 2.0, 1e-9);
    const int gx = std::max(1, static_cast<int>((xhi - xlo) / cell) + 1);
    const int gy = std::max(1, static_cast<int>((yhi - ylo) / cell) + 1);
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(gx) * gy);
    auto bucket_of = [&](double x, double y) {
        int bx = std::clamp(static_cast<int>((x - xlo) / cell), 0, gx - 1);
        int by = std::clamp(static_cast<int>((y - ylo) / cell), 0, gy - 1);
        return static_cast<std::size_t>(bx) * gy + by;
    };
    for (int i = 0; i < nb; ++i) buckets[bucket_of(pts[i][0], pts[i][1])].push_back(i);

    auto near_points = [&](double x, double y, double radius, std::vector<int>& out) {
        out.clear();
        int bx0 = std::clamp(static_cast<int>((x - radius - xlo) / cell), 0, gx - 1);
        int bx1 = std::clamp(static_cast<int>((x + radius - xlo) / cell), 0, gx - 1);
        int by0 = std::clamp(static_cast<int>((y - radius - ylo) / cell), 0, gy - 1);
        int by1 = std::clamp(static_cast<int>((y + radius - ylo) / cell), 0, gy - 1);
        for (int bx = bx0; bx <= bx1; ++bx)
            for (int by = by0; by <= by1; ++by)
                for (int i : buckets[static_cast<std::size_t>(bx) * gy + by]) out.push_back(i);
    };

    std::vector<Edge> gabriel;
    std::vector<int> scratch;
    const double neighbor_radius = 8.0 * min_sep;
    auto gabriel_edge = [&](int u, int v) -> bool {
        double cx = 0.5 * (pts[u][0] + pts[v][0]);
        double cy = 0.5 * (pts[u][1] + pts[v][1]);
        double dx = pts[u][0] - pts[v][0], dy = pts[u][1] - pts[v][1];
        double r2 = 0.25 * (dx * dx + dy * dy);
        std::vector<int> inside;
        near_points(cx, cy, std::sqrt(r2) + 1e-12, inside);
        for (int w : inside) {
            if (w == u || w == v) continue;
            double ex = pts[w][0] - cx, ey = pts[w][1] - cy;
            if (ex * ex + ey * ey < r2 * (1.0 - 1e-12)) return false;
        }
        return true;
    };
    for (int u = 0; u < nb; ++u) {
        near_points(pts[u][0], pts[u][1], neighbor_radius, scratch);
        for (int v : scratch) {
            if (v <= u) continue;
            double dx = pts[u][0] - pts[v][0], dy = pts[u][1] - pts[v][1];
            if (gabriel_edge(u, v)) gabriel.push_back({u, v, std::hypot(dx, dy)});
        }
    }

    // MST first (guarantees connectivity), then the shortest remaining Gabriel
    // edges until ~1.3 branches per bus.
    std::sort(gabriel.begin(), gabriel.end(), [](const Edge& a, const Edge& b) {
        if (a.len != b.len) return a.len < b.len;
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    std::vector<int> parent(nb);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<char> in_tree(gabriel.size(), 0);
    std::vector<Edge> chosen;
    for (std::size_t e = 0; e < gabriel.size(); ++e) {
        int ru = find(gabriel[e].u), rv = find(gabriel[e].v);
        if (ru != rv) {
            parent[ru] = rv;
            in_tree[e] = 1;
            chosen.push_back(gabriel[e]);
        }
    }
    // The bucketed candidate search can miss long edges between sparse
    // regions; stitch remaining components with their closest cross pair
    // (always an empty-disk edge, so planarity is preserved).
    auto component_count = [&] {
        int roots = 0;
        for (int i = 0; i < nb; ++i)
            if (find(i) == i) ++roots;
        return roots;
    };
    for (int roots = component_count(); roots > 1; --roots) {
        int best_u = -1, best_v = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int u = 0; u < nb; ++u)
            for (int v = u + 1; v < nb; ++v) {
                if (find(u) == find(v)) continue;
                double dx = pts[u][0] - pts[v][0], dy = pts[u][1] - pts[v][1];
                double d2 = dx * dx + dy * dy;
                if (d2 < best) {
                    best = d2;
                    best_u = u;
                    best_v = v;
                }
            }
        parent[find(best_u)] = find(best_v);
        chosen.push_back({best_u, best_v, std::sqrt(best)});
    }
    const std::size_t target_edges =
        static_cast<std::size_t>(std::lround(1.3 * nb));
    for (std::size_t e = 0; e < gabriel.size() && chosen.size() < target_edges; ++e)
        if (!in_tree[e]) chosen.push_back(gabriel[e]);

    // Parameters: ~1/6 of the buses are generators (inertia and positive
    // injection), the rest are zero-inertia loads.
    const double gen_fraction = 618.0 / 3809.0 * 1.0;  // generator share of buses
    const int n_gen = std::max(1, static_cast<int>(std::lround(gen_fraction * nb)));
    std::vector<int> order(nb);
    std::iota(order.begin(), order.end(), 0);
    for (int i = nb - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<int>(rng() % (i + 1))]);

    std::vector<char> is_gen(nb, 0);
    for (int g = 0; g < n_gen; ++g) is_gen[order[g]] = 1;

    const double m_gen = 0.2, d_gen = 0.02, d_load = 0.005;
    const double p_total = 0.01 * nb;  // p.u. generation to dispatch

    std::vector<Bus> buses(nb);
    double gen_sum = 0.0, load_sum = 0.0;
    for (int i = 0; i < nb; ++i) {
        Bus& b = buses[i];
        b.id = i;
        b.x = pts[i][0];
        b.y = pts[i][1];
        b.v = 1.0;
        if (is_gen[i]) {
            b.m = spread(rng, m_gen, het.inertia);
            b.d = spread(rng, d_gen, het.damping);
            b.p = spread(rng, 1.0, het.injection);
            gen_sum += b.p;
        } else {
            b.m = 0.0;
            b.d = spread(rng, d_load, het.damping);
            b.p = -spread(rng, 1.0, het.injection);
            load_sum -= b.p;
        }
    }
    for (Bus& b : buses) {
        if (b.p > 0.0)
            b.p *= p_total / gen_sum;
        else
            b.p *= p_total / load_sum;
    }
    // Make the balance exact, not just to rounding.
    double resid = 0.0;
    for (const Bus& b : buses) resid += b.p;
    for (int i = nb - 1; i >= 0; --i)
        if (buses[i].p < 0.0) {
            buses[i].p -= resid;
            break;
        }

    const double b_ref_len = 60.0;  // km; susceptance scales with 1/length
    std::vector<Branch> branches;
    branches.reserve(chosen.size());
    for (const Edge& e : chosen) {
        double b = spread(rng, 8.0 * b_ref_len / std::max(e.len, 1.0), het.susceptance);
        branches.push_back({e.u, e.v, b, b});
    }

    PowerNetwork net(std::move(buses), std::move(branches));
    net.require_balanced();
    return net;
}

}  // namespace swingpde
