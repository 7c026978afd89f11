// Independent reference implementations used to derive expected test values.
// Everything here recomputes results with a different algorithm than the
// library (dense LU, literal stencil loops, direct summation, exhaustive
// relaxation) so the two routes cross-check each other.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "swingpde/fields.hpp"
#include "swingpde/grid.hpp"
#include "swingpde/network.hpp"

namespace oracles {

/// Steady state through a dense full-pivot LU on the grounded system.
inline Eigen::VectorXd dense_steady_state(const swingpde::PowerNetwork& net, int ref_index) {
    const int n = static_cast<int>(net.size());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (const swingpde::Branch& br : net.branches()) {
        int u = net.index_of(br.from), v = net.index_of(br.to);
        lap(u, v) -= br.b;
        lap(v, u) -= br.b;
        lap(u, u) += br.b;
        lap(v, v) += br.b;
    }
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = net.buses()[static_cast<std::size_t>(i)].p;

    Eigen::MatrixXd red(n - 1, n - 1);
    Eigen::VectorXd rhs(n - 1);
    for (int r = 0, rr = 0; r < n; ++r) {
        if (r == ref_index) continue;
        rhs[rr] = p[r];
        for (int c = 0, cc = 0; c < n; ++c) {
            if (c == ref_index) continue;
            red(rr, cc++) = lap(r, c);
        }
        ++rr;
    }
    Eigen::VectorXd x_red = red.fullPivLu().solve(rhs);
    Eigen::VectorXd x(n);
    for (int i = 0, r = 0; i < n; ++i) x[i] = (i == ref_index) ? 0.0 : x_red[r++];
    return x;
}

/// Closed-form response of m x'' + d x' + b x = f with x(0) = x'(0) = 0,
/// underdamped case. Returns (x, x').
inline std::pair<double, double> damped_oscillator(double m, double d, double b, double f,
                                                   double t) {
    const double x_inf = f / b;
    const double zeta = d / (2.0 * m);
    const double wd2 = b / m - zeta * zeta;
    const double wd = std::sqrt(wd2);  // caller guarantees underdamping
    const double e = std::exp(-zeta * t);
    const double c = std::cos(wd * t), s = std::sin(wd * t);
    double x = x_inf * (1.0 - e * (c + zeta / wd * s));
    double v = x_inf * e * s * (zeta * zeta / wd + wd);
    return {x, v};
}

/// First-order response of m w' = -d w + f with w(0) = 0: (theta drift, w).
inline std::pair<double, double> relaxation_response(double m, double d, double f, double t) {
    const double w_inf = f / d;
    const double rate = d / m;
    const double w = w_inf * (1.0 - std::exp(-rate * t));
    const double theta = w_inf * t - w_inf / rate * (1.0 - std::exp(-rate * t));
    return {theta, w};
}

/// One explicit diffusion step on a full rectangle by direct convolution with
/// the 5-point kernel (reflecting boundaries).
inline Eigen::MatrixXd convolve_diffusion_step(const Eigen::MatrixXd& u, double kappa) {
    Eigen::MatrixXd out = u;
    const long nx = u.rows(), ny = u.cols();
    for (long i = 0; i < nx; ++i)
        for (long j = 0; j < ny; ++j) {
            double acc = 0.0;
            if (i > 0) acc += u(i - 1, j) - u(i, j);
            if (i + 1 < nx) acc += u(i + 1, j) - u(i, j);
            if (j > 0) acc += u(i, j - 1) - u(i, j);
            if (j + 1 < ny) acc += u(i, j + 1) - u(i, j);
            out(i, j) = u(i, j) + kappa * acc;
        }
    return out;
}

/// Direct-summation 2D DFT (no FFT, no separability shortcuts).
inline Eigen::MatrixXcd direct_dft2(const Eigen::MatrixXd& u) {
    const long nx = u.rows(), ny = u.cols();
    Eigen::MatrixXcd f(nx, ny);
    for (long a = 0; a < nx; ++a)
        for (long b = 0; b < ny; ++b) {
            std::complex<double> acc(0.0, 0.0);
            for (long i = 0; i < nx; ++i)
                for (long j = 0; j < ny; ++j) {
                    double phase = -2.0 * M_PI * (double(a * i) / nx + double(b * j) / ny);
                    acc += u(i, j) * std::polar(1.0, phase);
                }
            f(a, b) = acc;
        }
    return f;
}

/// Winding-number point-in-polygon (the library uses ray casting).
inline bool point_in_polygon_winding(const swingpde::Polygon& poly, double x, double y) {
    int winding = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        double cross = (b[0] - a[0]) * (y - a[1]) - (x - a[0]) * (b[1] - a[1]);
        if (a[1] <= y) {
            if (b[1] > y && cross > 0) ++winding;
        } else {
            if (b[1] <= y && cross < 0) --winding;
        }
    }
    return winding != 0;
}

/// Dense stencil matrix assembled by looping the boundary-selector formula
/// literally: the eta gates act on the inward normal field, edge values are
/// two-cell averages, and the diagonal collects the retained couplings.
inline Eigen::MatrixXd dense_xi_literal(const swingpde::FieldSet& fields,
                                        const swingpde::RasterGrid& grid) {
    using namespace swingpde;
    const int n = grid.cell_count();
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(n, n);
    auto eta_plus = [](int v) { return v >= 0 ? 1.0 : 0.0; };
    auto eta_minus = [](int v) { return -v >= 0 ? 1.0 : 0.0; };
    for (int k = 0; k < n; ++k) {
        const int nx = grid.normal_x(k), ny = grid.normal_y(k);
        double beta = 0.0;
        if (eta_minus(nx) > 0.0) {
            int l = grid.neighbor(k, XMinus);
            double edge = 0.5 * (fields.bx.values[k] + fields.bx.values[l]);
            xi(k, l) += edge;
            beta += edge;
        }
        if (eta_plus(nx) > 0.0) {
            int l = grid.neighbor(k, XPlus);
            double edge = 0.5 * (fields.bx.values[k] + fields.bx.values[l]);
            xi(k, l) += edge;
            beta += edge;
        }
        if (eta_minus(ny) > 0.0) {
            int l = grid.neighbor(k, YMinus);
            double edge = 0.5 * (fields.by.values[k] + fields.by.values[l]);
            xi(k, l) += edge;
            beta += edge;
        }
        if (eta_plus(ny) > 0.0) {
            int l = grid.neighbor(k, YPlus);
            double edge = 0.5 * (fields.by.values[k] + fields.by.values[l]);
            xi(k, l) += edge;
            beta += edge;
        }
        xi(k, k) = -beta;
    }
    return xi;
}

/// Exhaustive Bellman-Ford-style relaxation to a fixpoint over the masked
/// 8-neighbour lattice (the library runs Dijkstra with a heap).
inline Eigen::VectorXd arrival_by_relaxation(const Eigen::VectorXd& speed,
                                             const swingpde::RasterGrid& grid, int source) {
    using namespace swingpde;
    const int n = grid.cell_count();
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd t = Eigen::VectorXd::Constant(n, inf);
    t[source] = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int k = 0; k < n; ++k) {
            if (t[k] == inf) continue;
            auto [i, j] = grid.ij_of_rect(grid.rect_of_compact(k));
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (!grid.masked(i + di, j + dj)) continue;
                    int l = grid.compact_of_rect(grid.rect_index(i + di, j + dj));
                    double dist = (di != 0 && dj != 0) ? grid.delta() * std::sqrt(2.0)
                                                       : grid.delta();
                    double cand = t[k] + dist / (0.5 * (speed[k] + speed[l]));
                    if (cand < t[l] - 1e-15) {
                        t[l] = cand;
                        changed = true;
                    }
                }
        }
    }
    return t;
}

/// End-to-end coupling of a straight chain of cells (series circuit of the
/// two-cell-average edge couplings).
inline double series_susceptance_x(const swingpde::Field& bx, const swingpde::RasterGrid& grid,
                                   int first_cell, int n_edges) {
    double inv_total = 0.0;
    int k = first_cell;
    for (int e = 0; e < n_edges; ++e) {
        int next = grid.neighbor(k, swingpde::XPlus);
        double edge = 0.5 * (bx.values[k] + bx.values[next]);
        double g = edge / (grid.delta() * grid.delta());
        inv_total += 1.0 / g;
        k = next;
    }
    return 1.0 / inv_total;
}

/// Seeded connected blob mask, thickened for the stencil.
inline swingpde::RasterGrid random_blob_grid(std::mt19937_64& rng, int max_nx, int max_ny,
                                             double delta = 1.0) {
    using namespace swingpde;
    const int nx = 4 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_nx - 3));
    const int ny = 4 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_ny - 3));
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    int i = nx / 2, j = ny / 2;
    const int steps = nx * ny;
    for (int s = 0; s < steps; ++s) {
        mask[static_cast<std::size_t>(ny * (i - 1) + (j - 1))] = 1;
        switch (rng() % 4) {
            case 0: i = std::min(nx, i + 1); break;
            case 1: i = std::max(1, i - 1); break;
            case 2: j = std::min(ny, j + 1); break;
            default: j = std::max(1, j - 1); break;
        }
    }
    RasterGrid grid(nx, ny, delta, 0.0, 0.0, std::move(mask));
    grid = drop_islands(std::move(grid));
    grid = thicken_protrusions(std::move(grid));
    return grid;
}

inline swingpde::Field random_field(std::mt19937_64& rng, const swingpde::RasterGrid& grid,
                                    swingpde::Quantity q, double lo = 0.2, double hi = 2.0) {
    swingpde::Field f = swingpde::make_field(grid, q);
    for (int k = 0; k < grid.cell_count(); ++k)
        f.values[k] = lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    return f;
}

}  // namespace oracles
