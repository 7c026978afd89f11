#include "swingpde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "swingpde/linear_solver.hpp"

namespace swingpde {

std::string quantity_tag(Quantity q) {
    switch (q) {
        case Quantity::M: return "m";
        case Quantity::D: return "d";
        case Quantity::P: return "p";
        case Quantity::Bx: return "b_x";
        case Quantity::By: return "b_y";
        case Quantity::Aux: return "aux";
    }
    return "aux";
}

Quantity quantity_from_tag(const std::string& tag) {
    if (tag == "m") return Quantity::M;
    if (tag == "d") return Quantity::D;
    if (tag == "p") return Quantity::P;
    if (tag == "b_x") return Quantity::Bx;
    if (tag == "b_y") return Quantity::By;
    return Quantity::Aux;
}

void Field::require_grid(const RasterGrid& grid) const {
    if (grid_hash != grid.content_hash())
        throw ValidationError("field/grid hash mismatch: field was built for grid " +
                              std::to_string(grid_hash) + ", got " +
                              std::to_string(grid.content_hash()));
    if (values.size() != grid.cell_count())
        throw ValidationError("field length does not match grid cell count");
}

Field make_field(const RasterGrid& grid, Quantity q, double fill) {
    Field f;
    f.quantity = q;
    f.grid_hash = grid.content_hash();
    f.values = Eigen::VectorXd::Constant(grid.cell_count(), fill);
    return f;
}

void FieldSet::require_grid(const RasterGrid& grid) const {
    m.require_grid(grid);
    d.require_grid(grid);
    p.require_grid(grid);
    bx.require_grid(grid);
    by.require_grid(grid);
}

Field deposit_nodal(const PowerNetwork& net, const RasterGrid& grid, Quantity q) {
    if (q != Quantity::M && q != Quantity::D && q != Quantity::P)
        throw ValidationError("deposit_nodal handles m, d and p only");
    Field f = make_field(grid, q);
    for (const Bus& b : net.buses()) {
        int k = grid.nearest_masked_cell(b.x, b.y);
        double v = q == Quantity::M ? b.m : (q == Quantity::D ? b.d : b.p);
        f.values[k] += v;
    }
    return f;
}

std::pair<Field, Field> deposit_lines(const PowerNetwork& net, const RasterGrid& grid) {
    Field bx = make_field(grid, Quantity::Bx);
    Field by = make_field(grid, Quantity::By);
    Eigen::VectorXd wx = Eigen::VectorXd::Zero(grid.cell_count());
    Eigen::VectorXd wy = Eigen::VectorXd::Zero(grid.cell_count());
    const double delta = grid.delta();

    for (const Branch& br : net.branches()) {
        const Bus& u = net.buses()[static_cast<std::size_t>(net.index_of(br.from))];
        const Bus& v = net.buses()[static_cast<std::size_t>(net.index_of(br.to))];
        const double len = std::hypot(v.x - u.x, v.y - u.y);
        if (len <= 0.0)
            throw ValidationError("branch " + std::to_string(br.from) + "-" +
                                  std::to_string(br.to) + " has zero length");
        const double ex = (v.x - u.x) / len, ey = (v.y - u.y) / len;
        // Target cell value: a chain of (len/delta) inter-cell couplings with
        // this value reproduces the branch's end-to-end series susceptance.
        const double target = (len / delta) * br.b * delta * delta;
        const double ex2 = ex * ex, ey2 = ey * ey;

        for (auto [r, chord] : traverse_segment(grid, {u.x, u.y}, {v.x, v.y})) {
            int k = grid.compact_of_rect(r);
            if (k < 0)
                throw ValidationError("branch " + std::to_string(br.from) + "-" +
                                      std::to_string(br.to) +
                                      " crosses an unmasked cell; rebuild the grid with a"
                                      " larger dilation");
            if (chord <= 0.0) continue;
            if (ex2 > 0.0) {
                bx.values[k] += chord * ex2 * target;
                wx[k] += chord * ex2;
            }
            if (ey2 > 0.0) {
                by.values[k] += chord * ey2 * target;
                wy[k] += chord * ey2;
            }
        }
    }
    // Chord-weighted average of the per-branch targets; cells no branch
    // touches stay at zero.
    for (int k = 0; k < grid.cell_count(); ++k) {
        if (wx[k] > 0.0) bx.values[k] /= wx[k];
        if (wy[k] > 0.0) by.values[k] /= wy[k];
    }
    return {std::move(bx), std::move(by)};
}

DiffusionResult artificial_diffusion(const Field& field, const RasterGrid& grid,
                                     double kappa, const DiffusionOptions& options) {
    field.require_grid(grid);
    if (!(kappa > 0.0) || kappa > 0.25)
        throw ValidationError("diffusion number must lie in (0, 0.25]");

    DiffusionResult result;
    result.field = field;
    Eigen::VectorXd& u = result.field.values;
    const int n = grid.cell_count();

    const double norm0 = u.norm();
    if (norm0 == 0.0) {
        result.converged = true;
        return result;
    }

    // Flux form: each interior edge moves kappa*(u_b - u_a) between its two
    // cells, so the total is conserved to rounding and missing neighbours
    // reflect (zero flux).
    Eigen::VectorXd flux(n);
    for (long iter = 1; iter <= options.max_iterations; ++iter) {
        flux.setZero();
        for (int k = 0; k < n; ++k) {
            int xp = grid.neighbor(k, XPlus);
            if (xp >= 0) {
                double f = kappa * (u[xp] - u[k]);
                flux[k] += f;
                flux[xp] -= f;
            }
            int yp = grid.neighbor(k, YPlus);
            if (yp >= 0) {
                double f = kappa * (u[yp] - u[k]);
                flux[k] += f;
                flux[yp] -= f;
            }
        }
        u += flux;
        result.iterations = iter;
        // Smoothness metric against the frozen initial norm; monotone in
        // diffusion time, so once fired it stays fired.
        result.smoothness = flux.norm() / norm0;
        bool stop = options.stop ? options.stop(iter, result.smoothness)
                                 : result.smoothness < options.smooth_tol;
        if (stop) {
            result.converged = true;
            return result;
        }
    }
    if (options.throw_on_cap)
        throw SolverError("diffusion smoothness criterion never fired within " +
                          std::to_string(options.max_iterations) +
                          " iterations (last value " + std::to_string(result.smoothness) +
                          ")");
    return result;
}

namespace {

struct MaskBox {
    int i_lo, i_hi, j_lo, j_hi;  // 1-based, inclusive
    int rows() const { return i_hi - i_lo + 1; }
    int cols() const { return j_hi - j_lo + 1; }
};

MaskBox mask_bounding_box(const RasterGrid& grid) {
    MaskBox box{grid.nx(), 1, grid.ny(), 1};
    for (int k = 0; k < grid.cell_count(); ++k) {
        auto [i, j] = grid.ij_of_rect(grid.rect_of_compact(k));
        box.i_lo = std::min(box.i_lo, i);
        box.i_hi = std::max(box.i_hi, i);
        box.j_lo = std::min(box.j_lo, j);
        box.j_hi = std::max(box.j_hi, j);
    }
    return box;
}

/// Fill the mask's bounding rectangle from the masked values: nearest masked
/// cell (reflection across the mask boundary) or zero.
Eigen::MatrixXd embed_field(const Field& field, const RasterGrid& grid, const MaskBox& box,
                            PadMode pad) {
    Eigen::MatrixXd rect = Eigen::MatrixXd::Zero(box.rows(), box.cols());
    for (int k = 0; k < grid.cell_count(); ++k) {
        auto [i, j] = grid.ij_of_rect(grid.rect_of_compact(k));
        rect(i - box.i_lo, j - box.j_lo) = field.values[k];
    }
    if (pad == PadMode::Mirror) {
        for (int i = box.i_lo; i <= box.i_hi; ++i)
            for (int j = box.j_lo; j <= box.j_hi; ++j) {
                if (grid.masked(i, j)) continue;
                Point c = grid.center_of_rect(grid.rect_index(i, j));
                int k = grid.nearest_masked_cell(c[0], c[1]);
                rect(i - box.i_lo, j - box.j_lo) = field.values[k];
            }
    }
    return rect;
}

using Cplx = std::complex<double>;

Eigen::MatrixXcd dft_matrix(int n, bool inverse) {
    Eigen::MatrixXcd w(n, n);
    const double sign = inverse ? 2.0 * M_PI / n : -2.0 * M_PI / n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) w(a, b) = std::polar(1.0, sign * a * b);
    if (inverse) w /= static_cast<double>(n);
    return w;
}

int signed_frequency(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

}  // namespace

Field fourier_lowpass(const Field& field, const RasterGrid& grid, double cutoff,
                      const FilterOptions& options) {
    field.require_grid(grid);
    if (!(cutoff > 0.0) || cutoff > 1.0)
        throw ValidationError("cutoff must lie in (0, 1]");

    const MaskBox box = mask_bounding_box(grid);
    const int nx = box.rows(), ny = box.cols();
    Eigen::MatrixXd rect = embed_field(field, grid, box, options.pad);

    // Separable DFT via two dense transforms; grids here stay small enough
    // that an FFT brings nothing.
    Eigen::MatrixXcd spectrum =
        dft_matrix(nx, false) * rect.cast<Cplx>() * dft_matrix(ny, false).transpose();

    const double kx_max = std::max(nx / 2, 1);
    const double ky_max = std::max(ny / 2, 1);
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b) {
            double fx = std::abs(signed_frequency(a, nx)) / kx_max;
            double fy = std::abs(signed_frequency(b, ny)) / ky_max;
            double level = options.shape == CutoffShape::PerAxis ? std::max(fx, fy)
                                                                 : std::hypot(fx, fy);
            if (level > cutoff) spectrum(a, b) = Cplx(0.0, 0.0);
        }

    Eigen::MatrixXcd back =
        dft_matrix(nx, true) * spectrum * dft_matrix(ny, true).transpose();

    Field out = field;
    for (int k = 0; k < grid.cell_count(); ++k) {
        auto [i, j] = grid.ij_of_rect(grid.rect_of_compact(k));
        out.values[k] = back(i - box.i_lo, j - box.j_lo).real();
    }

    const double total_before = field.values.sum();
    if (options.apply_floor) {
        double floor = 0.0;
        if (field.quantity == Quantity::D)
            floor = options.d_floor_rel * field.values.mean();
        if (field.quantity != Quantity::P)
            out.values = out.values.cwiseMax(floor);
    }
    if (options.renormalize) {
        const int n = grid.cell_count();
        double shift = (total_before - out.values.sum()) / n;
        Eigen::VectorXd shifted = out.values.array() + shift;
        if (options.apply_floor && field.quantity != Quantity::P && shifted.minCoeff() < 0.0) {
            // The DC shift would undercut the floor; fall back to scaling.
            double total_after = out.values.sum();
            if (total_after > 0.0) out.values *= total_before / total_after;
        } else {
            out.values = std::move(shifted);
        }
    }
    return out;
}

Field region_scale(const Field& field, const RasterGrid& grid, const Polygon& region,
                   double factor) {
    field.require_grid(grid);
    if (!(factor > 0.0)) throw ValidationError("scale factor must be positive");
    if (region.size() < 3) throw ValidationError("region polygon is degenerate");
    Field out = field;
    for (int k = 0; k < grid.cell_count(); ++k) {
        Point c = grid.center(k);
        if (point_in_polygon(region, c[0], c[1])) out.values[k] *= factor;
    }
    return out;
}

IsotropyResult isotropy_reduce(const Field& bx, const Field& by, const RasterGrid& grid) {
    bx.require_grid(grid);
    by.require_grid(grid);
    IsotropyResult res;
    res.b = bx;
    res.b.quantity = Quantity::Bx;
    res.b.values = 0.5 * (bx.values + by.values);
    res.anisotropy = 0.0;
    for (int k = 0; k < grid.cell_count(); ++k) {
        double s = bx.values[k] + by.values[k];
        if (s > 0.0)
            res.anisotropy =
                std::max(res.anisotropy, std::abs(bx.values[k] - by.values[k]) / s);
    }
    return res;
}

FieldSet finalize_fields(const FieldSet& fields, const RasterGrid& grid,
                         const FloorOptions& options) {
    fields.require_grid(grid);
    FieldSet out = fields;
    const double mean_m = fields.m.values.mean();
    const double mean_d = fields.d.values.mean();
    if (!(mean_m > 0.0)) throw ValidationError("cannot finalize fields: no inertia anywhere");
    if (!(mean_d > 0.0)) throw ValidationError("cannot finalize fields: no damping anywhere");
    out.m.values = out.m.values.cwiseMax(options.m_rel * mean_m);
    out.d.values = out.d.values.cwiseMax(options.d_rel * mean_d);
    out.bx.values = out.bx.values.cwiseMax(0.0);
    out.by.values = out.by.values.cwiseMax(0.0);
    return out;
}

}  // namespace swingpde
