#include "swingpde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

namespace swingpde {

namespace {

std::uint64_t fnv1a_append(std::uint64_t h, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

double point_segment_distance(double px, double py, Point a, Point b) {
    double vx = b[0] - a[0], vy = b[1] - a[1];
    double wx = px - a[0], wy = py - a[1];
    double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    double dx = px - (a[0] + t * vx), dy = py - (a[1] + t * vy);
    return std::hypot(dx, dy);
}

}  // namespace

RasterGrid::RasterGrid(int nx, int ny, double delta, double x0, double y0,
                       std::vector<std::uint8_t> mask)
    : nx_(nx), ny_(ny), delta_(delta), x0_(x0), y0_(y0), mask_(std::move(mask)) {
    if (nx_ < 1 || ny_ < 1) throw ValidationError("grid dimensions must be positive");
    if (!(delta_ > 0.0)) throw ValidationError("grid spacing must be positive");
    if (mask_.size() != static_cast<std::size_t>(nx_) * ny_)
        throw ValidationError("grid mask size does not match dimensions");
    rebuild_tables();
}

RasterGrid RasterGrid::rectangle(int nx, int ny, double delta, double x0, double y0) {
    return RasterGrid(nx, ny, delta, x0, y0,
                      std::vector<std::uint8_t>(static_cast<std::size_t>(nx) * ny, 1));
}

void RasterGrid::rebuild_tables() {
    const int rects = nx_ * ny_;
    compact_of_.assign(rects, -1);
    rect_of_.clear();
    for (int r = 0; r < rects; ++r)
        if (mask_[static_cast<std::size_t>(r)]) {
            compact_of_[r] = static_cast<int>(rect_of_.size());
            rect_of_.push_back(r);
        }
    if (rect_of_.empty()) throw ValidationError("grid mask is empty");

    const int n = cell_count();
    neighbors_.assign(static_cast<std::size_t>(n) * 4, -1);
    normal_x_.assign(n, 0);
    normal_y_.assign(n, 0);
    degenerate_.clear();
    for (int k = 0; k < n; ++k) {
        auto [i, j] = ij_of_rect(rect_of_[k]);
        auto at = [&](int ii, int jj) {
            return masked(ii, jj) ? compact_of_[rect_index(ii, jj)] : -1;
        };
        int xm = at(i - 1, j), xp = at(i + 1, j);
        int ym = at(i, j - 1), yp = at(i, j + 1);
        neighbors_[static_cast<std::size_t>(k) * 4 + XMinus] = xm;
        neighbors_[static_cast<std::size_t>(k) * 4 + XPlus] = xp;
        neighbors_[static_cast<std::size_t>(k) * 4 + YMinus] = ym;
        neighbors_[static_cast<std::size_t>(k) * 4 + YPlus] = yp;

        // Inward normals; the eta selectors of the stencil read these.
        normal_x_[k] = static_cast<std::int8_t>((xm < 0 && xp >= 0)   ? 1
                                                : (xp < 0 && xm >= 0) ? -1
                                                                      : 0);
        normal_y_[k] = static_cast<std::int8_t>((ym < 0 && yp >= 0)   ? 1
                                                : (yp < 0 && ym >= 0) ? -1
                                                                      : 0);
        if ((xm < 0 && xp < 0) || (ym < 0 && yp < 0)) degenerate_.push_back(k);
    }

    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a_append(h, &delta_, sizeof delta_);
    h = fnv1a_append(h, &x0_, sizeof x0_);
    h = fnv1a_append(h, &y0_, sizeof y0_);
    h = fnv1a_append(h, &nx_, sizeof nx_);
    h = fnv1a_append(h, &ny_, sizeof ny_);
    h = fnv1a_append(h, mask_.data(), mask_.size());
    hash_ = h;
}

int RasterGrid::rect_of_point(double x, double y) const {
    int i = std::clamp(static_cast<int>(std::floor((x - x0_) / delta_)) + 1, 1, nx_);
    int j = std::clamp(static_cast<int>(std::floor((y - y0_) / delta_)) + 1, 1, ny_);
    return rect_index(i, j);
}

int RasterGrid::nearest_masked_cell(double x, double y) const {
    int r = rect_of_point(x, y);
    if (masked_rect(r)) return compact_of_rect(r);
    // Expanding ring search around the containing cell.
    auto [ci, cj] = ij_of_rect(r);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    int max_ring = std::max(nx_, ny_);
    for (int ring = 1; ring <= max_ring; ++ring) {
        for (int i = ci - ring; i <= ci + ring; ++i)
            for (int j = cj - ring; j <= cj + ring; ++j) {
                if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
                if (!masked(i, j)) continue;
                Point c = center_of_rect(rect_index(i, j));
                double d2 = (c[0] - x) * (c[0] - x) + (c[1] - y) * (c[1] - y);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = compact_of_rect(rect_index(i, j));
                }
            }
        // A hit this ring cannot be beaten once a full extra ring is scanned.
        if (best >= 0 && std::sqrt(best_d2) <= (ring - 1) * delta_) break;
    }
    if (best < 0) throw ValidationError("no masked cell found near point");
    return best;
}

std::vector<std::pair<int, double>> traverse_segment(const RasterGrid& grid, Point a,
                                                     Point b) {
    // Amanatides-Woo traversal with exact chord lengths per cell.
    std::vector<std::pair<int, double>> out;
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (len <= 0.0) {
        out.emplace_back(grid.rect_of_point(a[0], a[1]), 0.0);
        return out;
    }
    const double inv_len = 1.0 / len;
    const double dirx = (b[0] - a[0]) * inv_len, diry = (b[1] - a[1]) * inv_len;
    const double delta = grid.delta();

    int i = std::clamp(static_cast<int>(std::floor((a[0] - grid.x0()) / delta)) + 1, 1,
                       grid.nx());
    int j = std::clamp(static_cast<int>(std::floor((a[1] - grid.y0()) / delta)) + 1, 1,
                       grid.ny());
    const int step_i = dirx > 0 ? 1 : (dirx < 0 ? -1 : 0);
    const int step_j = diry > 0 ? 1 : (diry < 0 ? -1 : 0);

    auto boundary_t = [&](int idx, double origin, double pos, double dir, int step) {
        if (step == 0) return std::numeric_limits<double>::infinity();
        double edge = origin + (step > 0 ? idx : idx - 1) * delta;
        return (edge - pos) / dir;
    };
    double t_max_x = boundary_t(i, grid.x0(), a[0], dirx, step_i);
    double t_max_y = boundary_t(j, grid.y0(), a[1], diry, step_j);
    const double t_dx = step_i ? delta / std::abs(dirx) : std::numeric_limits<double>::infinity();
    const double t_dy = step_j ? delta / std::abs(diry) : std::numeric_limits<double>::infinity();

    double t = 0.0;
    while (true) {
        double t_next = std::min({t_max_x, t_max_y, len});
        if (t_next > t) out.emplace_back(grid.rect_index(i, j), t_next - t);
        if (t_next >= len) break;
        t = t_next;
        if (t_max_x <= t_max_y) {
            t_max_x += t_dx;
            i += step_i;
        } else {
            t_max_y += t_dy;
            j += step_j;
        }
        if (i < 1 || i > grid.nx() || j < 1 || j > grid.ny()) break;
    }
    return out;
}

RasterGrid drop_islands(RasterGrid grid, std::string* warning) {
    // Label 4-connected components of the mask, keep the largest.
    const int rects = grid.rect_count();
    std::vector<int> comp(rects, -1);
    std::vector<long> sizes;
    for (int r = 0; r < rects; ++r) {
        if (!grid.mask_[static_cast<std::size_t>(r)] || comp[r] >= 0) continue;
        int c = static_cast<int>(sizes.size());
        sizes.push_back(0);
        std::vector<int> stack{r};
        comp[r] = c;
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            ++sizes[c];
            auto [i, j] = grid.ij_of_rect(cur);
            const int di[4] = {-1, 1, 0, 0};
            const int dj[4] = {0, 0, -1, 1};
            for (int s = 0; s < 4; ++s) {
                int ii = i + di[s], jj = j + dj[s];
                if (!grid.masked(ii, jj)) continue;
                int rr = grid.rect_index(ii, jj);
                if (comp[rr] < 0) {
                    comp[rr] = c;
                    stack.push_back(rr);
                }
            }
        }
    }
    if (sizes.size() <= 1) return grid;

    int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    long dropped = 0;
    for (int r = 0; r < rects; ++r)
        if (grid.mask_[static_cast<std::size_t>(r)] && comp[r] != keep) {
            grid.mask_[static_cast<std::size_t>(r)] = 0;
            ++dropped;
        }
    if (warning) {
        std::ostringstream msg;
        msg << "dropped " << sizes.size() - 1 << " disconnected island(s), " << dropped
            << " cell(s)";
        *warning = msg.str();
    }
    grid.rebuild_tables();
    return grid;
}

RasterGrid thicken_protrusions(RasterGrid grid) {
    // A cell missing both neighbours along an axis cannot carry the stencil;
    // force its lateral neighbours into the mask until none remain.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int k : grid.degenerate_) {
            auto [i, j] = grid.ij_of_rect(grid.rect_of_[static_cast<std::size_t>(k)]);
            bool deg_x = grid.neighbor(k, XMinus) < 0 && grid.neighbor(k, XPlus) < 0;
            bool deg_y = grid.neighbor(k, YMinus) < 0 && grid.neighbor(k, YPlus) < 0;
            auto force = [&](int ii, int jj) {
                if (ii < 1 || ii > grid.nx_ || jj < 1 || jj > grid.ny_) return;
                std::size_t r = static_cast<std::size_t>(grid.rect_index(ii, jj));
                if (!grid.mask_[r]) {
                    grid.mask_[r] = 1;
                    changed = true;
                }
            };
            if (deg_x) {
                force(i - 1, j);
                force(i + 1, j);
            }
            if (deg_y) {
                force(i, j - 1);
                force(i, j + 1);
            }
        }
        if (changed) grid.rebuild_tables();
    }
    return grid;
}

RasterGrid build_grid(const PowerNetwork& net, double delta, double dilation,
                      const GridBuildOptions& options, std::string* warning) {
    if (!(delta > 0.0)) throw ValidationError("grid spacing must be positive");
    if (!options.tight && dilation < delta)
        throw ValidationError("dilation must be at least the grid spacing");
    if (net.buses().empty()) throw ValidationError("cannot rasterise an empty network");

    double xlo = net.buses()[0].x, xhi = xlo, ylo = net.buses()[0].y, yhi = ylo;
    for (const Bus& b : net.buses()) {
        xlo = std::min(xlo, b.x);
        xhi = std::max(xhi, b.x);
        ylo = std::min(ylo, b.y);
        yhi = std::max(yhi, b.y);
    }
    const double margin = options.tight ? 0.0 : dilation;
    // Snap the origin half a cell below the lowest bus so that a lattice
    // network with spacing delta lands exactly on cell centres.
    const double x0 = xlo - 0.5 * delta - std::ceil(margin / delta) * delta;
    const double y0 = ylo - 0.5 * delta - std::ceil(margin / delta) * delta;
    const int nx = static_cast<int>(std::ceil((xhi + margin - x0 + 0.5 * delta) / delta));
    const int ny = static_cast<int>(std::ceil((yhi + margin - y0 + 0.5 * delta) / delta));

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    RasterGrid probe(nx, ny, delta, x0, y0,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(nx) * ny, 1));

    if (options.tight) {
        for (const Bus& b : net.buses())
            mask[static_cast<std::size_t>(probe.rect_of_point(b.x, b.y))] = 1;
        for (const Branch& br : net.branches()) {
            const Bus& u = net.buses()[static_cast<std::size_t>(net.index_of(br.from))];
            const Bus& v = net.buses()[static_cast<std::size_t>(net.index_of(br.to))];
            for (auto [r, chord] : traverse_segment(probe, {u.x, u.y}, {v.x, v.y}))
                mask[static_cast<std::size_t>(r)] = 1;
        }
    } else {
        for (int i = 1; i <= nx; ++i)
            for (int j = 1; j <= ny; ++j) {
                Point c = probe.center_of_rect(probe.rect_index(i, j));
                bool in = false;
                for (const Bus& b : net.buses())
                    if (std::hypot(c[0] - b.x, c[1] - b.y) <= dilation) {
                        in = true;
                        break;
                    }
                if (!in)
                    for (const Branch& br : net.branches()) {
                        const Bus& u = net.buses()[static_cast<std::size_t>(net.index_of(br.from))];
                        const Bus& v = net.buses()[static_cast<std::size_t>(net.index_of(br.to))];
                        if (point_segment_distance(c[0], c[1], {u.x, u.y}, {v.x, v.y}) <=
                            dilation) {
                            in = true;
                            break;
                        }
                    }
                if (in) mask[static_cast<std::size_t>(probe.rect_index(i, j))] = 1;
            }
    }

    RasterGrid grid(nx, ny, delta, x0, y0, std::move(mask));
    if (grid.cell_count() < 2)
        throw ValidationError("grid spacing too coarse: mask has fewer than 2 cells");
    if (options.drop_islands) grid = drop_islands(std::move(grid), warning);
    if (options.thicken) grid = thicken_protrusions(std::move(grid));
    return grid;
}

void boundary_normals(const RasterGrid& grid, std::vector<int>& nx_out,
                      std::vector<int>& ny_out) {
    const int n = grid.cell_count();
    nx_out.resize(n);
    ny_out.resize(n);
    for (int k = 0; k < n; ++k) {
        nx_out[static_cast<std::size_t>(k)] = grid.normal_x(k);
        ny_out[static_cast<std::size_t>(k)] = grid.normal_y(k);
    }
}

}  // namespace swingpde
