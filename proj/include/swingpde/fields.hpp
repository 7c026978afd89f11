#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "swingpde/grid.hpp"
#include "swingpde/network.hpp"

namespace swingpde {

enum class Quantity { M, D, P, Bx, By, Aux };

std::string quantity_tag(Quantity q);
Quantity quantity_from_tag(const std::string& tag);

/// Scalar per masked cell (compact indexing), tied to a grid by content hash.
struct Field {
    Quantity quantity = Quantity::Aux;
    std::uint64_t grid_hash = 0;
    Eigen::VectorXd values;

    double total() const { return values.sum(); }
    void require_grid(const RasterGrid& grid) const;
};

Field make_field(const RasterGrid& grid, Quantity q, double fill = 0.0);

/// The continuum model's coefficient fields on one shared grid. After
/// isotropy reduction bx and by hold the same values.
struct FieldSet {
    Field m, d, p, bx, by;

    void require_grid(const RasterGrid& grid) const;
};

/// Add each bus's m/d/p value to its nearest masked cell. Field total equals
/// the network total exactly.
Field deposit_nodal(const PowerNetwork& net, const RasterGrid& grid, Quantity q);

/// Map branch couplings onto directional cell fields b_x, b_y. Each branch
/// contributes a target cell value (l/delta) * b' * delta^2, split between the
/// axes by the squared direction cosines; overlapping branches are combined by
/// chord-length-weighted averaging, which reproduces the end-to-end series
/// susceptance of straight grid-aligned chains and maps a lattice network onto
/// uniform fields cell-for-cell.
std::pair<Field, Field> deposit_lines(const PowerNetwork& net, const RasterGrid& grid);

struct DiffusionResult {
    Field field;
    long iterations = 0;
    double smoothness = 0.0;  ///< |du|_2 / |u0|_2 at the final step
    bool converged = false;
};

struct DiffusionOptions {
    double smooth_tol = 1e-4;   ///< stop when |du|_2 / |u0|_2 falls below
    long max_iterations = 200000;
    bool throw_on_cap = true;   ///< error when the criterion never fires
    /// Optional replacement stopping rule: called with (iteration, smoothness),
    /// returns true to stop.
    std::function<bool(long, double)> stop;
};

/// Explicit lattice diffusion u <- u + kappa * L u with zero-flux boundaries.
/// Conserves the total and is monotone in max/min for 0 < kappa <= 0.25.
DiffusionResult artificial_diffusion(const Field& field, const RasterGrid& grid,
                                     double kappa, const DiffusionOptions& options = {});

enum class PadMode { Mirror, Zero };
enum class CutoffShape { PerAxis, Radial };

struct FilterOptions {
    PadMode pad = PadMode::Mirror;
    CutoffShape shape = CutoffShape::PerAxis;
    bool apply_floor = true;      ///< clamp negative values after filtering
    bool renormalize = true;      ///< restore the masked total through the DC mode
    double d_floor_rel = 1e-3;    ///< floor for d as a fraction of mean(d)
};

/// Spatial low-pass: embed the masked field in its bounding rectangle, zero
/// Fourier coefficients above `cutoff` (fraction of the per-axis Nyquist
/// frequency), transform back and restrict to the mask.
Field fourier_lowpass(const Field& field, const RasterGrid& grid, double cutoff,
                      const FilterOptions& options = {});

/// Multiply values of cells whose centres lie inside the polygon.
Field region_scale(const Field& field, const RasterGrid& grid, const Polygon& region,
                   double factor);

struct IsotropyResult {
    Field b;            ///< cell-wise mean of bx and by
    double anisotropy;  ///< max |bx-by| / (bx+by) over cells with bx+by > 0
};

IsotropyResult isotropy_reduce(const Field& bx, const Field& by, const RasterGrid& grid);

struct FloorOptions {
    double m_rel = 1e-3;  ///< inertia floor as a fraction of mean(m)
    double d_rel = 1e-3;  ///< damping floor as a fraction of mean(d)
};

/// Clamp m and d to strictly positive floors (relative to the input means)
/// so the continuum integrator is well posed; b fields are clamped at zero.
/// Reapplying moves values by at most O(rel^2) since the floor tracks the
/// slightly lifted mean.
FieldSet finalize_fields(const FieldSet& fields, const RasterGrid& grid,
                         const FloorOptions& options = {});

}  // namespace swingpde
