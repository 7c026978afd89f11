#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "swingpde/analysis.hpp"
#include "swingpde/fields.hpp"
#include "swingpde/grid.hpp"
#include "swingpde/trajectory.hpp"

namespace swingpde {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

/// Plain-text grid file: header (delta, origin, nx, ny, cell count) followed
/// by the mask and the two normal components as row-major integer arrays.
void save_grid(const RasterGrid& grid, const std::filesystem::path& path);
RasterGrid load_grid(const std::filesystem::path& path);

/// Plain-text field file: grid content hash, quantity tag and row-major
/// values (9 significant digits, unmasked cells written as 0).
void save_field(const Field& field, const RasterGrid& grid, const std::filesystem::path& path,
                const std::string& tag_override = "");
Field load_field(const std::filesystem::path& path, const RasterGrid& grid);

void save_field_set(const FieldSet& fields, const RasterGrid& grid,
                    const std::filesystem::path& dir, const std::string& prefix = "field");
FieldSet load_field_set(const std::filesystem::path& dir, const RasterGrid& grid,
                        const std::string& prefix = "field");

/// Comma-separated trajectory: t, probe_<id>_theta, probe_<id>_omega, ...,
/// global_omega with 9 significant digits.
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);
std::string trajectory_to_csv(const Trajectory& traj);

void save_steady_comparison(const SteadyComparison& cmp, const std::filesystem::path& summary,
                            const std::filesystem::path& scatter_csv);
void save_dynamic_comparison(const DynamicComparison& cmp, const std::filesystem::path& summary);

std::string format_sig9(double v);

}  // namespace swingpde
