#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swingpde/network.hpp"

namespace swingpde {

/// Axis-neighbour directions of a cell, in rectangle coordinates.
enum Dir : int { XMinus = 0, XPlus = 1, YMinus = 2, YPlus = 3 };

/// Regular 2D raster with an interior mask. Cells are addressed either by
/// 1-based (i, j) with i along x and j along y, by the rectangle index
/// r = ny*(i-1) + (j-1), or by the compact index k that enumerates masked
/// cells in increasing r. The compact ordering realises the vectorised map
/// k = N_y (i-1) + j restricted to the mask.
class RasterGrid {
public:
    RasterGrid(int nx, int ny, double delta, double x0, double y0,
               std::vector<std::uint8_t> mask);

    /// Fully masked rectangle; cell (1,1) centre at (x0 + delta/2, y0 + delta/2).
    static RasterGrid rectangle(int nx, int ny, double delta, double x0 = 0.0,
                                double y0 = 0.0);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double delta() const { return delta_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }

    int cell_count() const { return static_cast<int>(rect_of_.size()); }
    int rect_count() const { return nx_ * ny_; }

    int rect_index(int i, int j) const { return ny_ * (i - 1) + (j - 1); }
    bool masked_rect(int r) const { return mask_[static_cast<std::size_t>(r)] != 0; }
    bool masked(int i, int j) const {
        return i >= 1 && i <= nx_ && j >= 1 && j <= ny_ && masked_rect(rect_index(i, j));
    }

    /// Compact index of rectangle cell r, or -1 when unmasked.
    int compact_of_rect(int r) const { return compact_of_[static_cast<std::size_t>(r)]; }
    int rect_of_compact(int k) const { return rect_of_[static_cast<std::size_t>(k)]; }
    std::pair<int, int> ij_of_rect(int r) const { return {r / ny_ + 1, r % ny_ + 1}; }

    Point center_of_rect(int r) const {
        auto [i, j] = ij_of_rect(r);
        return {x0_ + (i - 0.5) * delta_, y0_ + (j - 0.5) * delta_};
    }
    Point center(int k) const { return center_of_rect(rect_of_compact(k)); }

    /// Compact index of the axis neighbour of masked cell k, or -1.
    int neighbor(int k, Dir dir) const {
        return neighbors_[static_cast<std::size_t>(k) * 4 + static_cast<std::size_t>(dir)];
    }

    /// Inward-pointing normals: +1 when the -axis neighbour is unmasked and
    /// the +axis neighbour masked, -1 mirrored, 0 when both are masked.
    int normal_x(int k) const { return normal_x_[static_cast<std::size_t>(k)]; }
    int normal_y(int k) const { return normal_y_[static_cast<std::size_t>(k)]; }

    /// Cells with both axis neighbours unmasked in some axis; the finite
    /// volume stencil cannot represent them, see thicken_protrusions().
    const std::vector<int>& degenerate_cells() const { return degenerate_; }

    /// Rectangle cell containing a point (clamped to the rectangle bounds).
    int rect_of_point(double x, double y) const;
    /// Compact index of the masked cell whose centre is nearest to (x, y).
    int nearest_masked_cell(double x, double y) const;

    const std::vector<std::uint8_t>& mask() const { return mask_; }

    /// FNV-1a hash of (delta, origin, dimensions, mask); identifies the grid
    /// in field files.
    std::uint64_t content_hash() const { return hash_; }

private:
    void rebuild_tables();

    int nx_, ny_;
    double delta_, x0_, y0_;
    std::vector<std::uint8_t> mask_;       // rectangle, ny*(i-1)+(j-1)
    std::vector<int> compact_of_;          // rectangle -> compact or -1
    std::vector<int> rect_of_;             // compact -> rectangle
    std::vector<int> neighbors_;           // compact*4 + Dir -> compact or -1
    std::vector<std::int8_t> normal_x_, normal_y_;  // per compact cell
    std::vector<int> degenerate_;          // compact indices
    std::uint64_t hash_ = 0;

    friend RasterGrid thicken_protrusions(RasterGrid grid);
    friend RasterGrid drop_islands(RasterGrid grid, std::string* warning);
};

struct GridBuildOptions {
    bool drop_islands = true;    ///< keep only the largest 4-connected component
    bool thicken = true;         ///< widen one-cell protrusions for the stencil
    bool tight = false;          ///< mask = cells touched by buses/branches only
};

/// Rasterise the network's service territory: cells whose centre lies within
/// `dilation` of any bus or branch segment (or, in tight mode, cells overlapped
/// by the network itself, which reproduces a lattice network cell-for-cell).
/// When smaller disconnected islands get dropped, `warning` receives a note.
RasterGrid build_grid(const PowerNetwork& net, double delta, double dilation,
                      const GridBuildOptions& options = {}, std::string* warning = nullptr);

/// Recompute the inward normal field of a mask (already available on the
/// grid itself; exposed for direct inspection and testing).
void boundary_normals(const RasterGrid& grid, std::vector<int>& nx_out,
                      std::vector<int>& ny_out);

RasterGrid thicken_protrusions(RasterGrid grid);
RasterGrid drop_islands(RasterGrid grid, std::string* warning = nullptr);

/// Cells (as rectangle indices) crossed by the segment a-b together with the
/// chord length inside each. Cells are reported in traversal order.
std::vector<std::pair<int, double>> traverse_segment(const RasterGrid& grid, Point a,
                                                     Point b);

}  // namespace swingpde
