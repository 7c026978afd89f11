#include "swingpde/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace swingpde {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Grid files

void save_grid(const RasterGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write grid file: " + path.string());
    out << "swingpde-grid 1\n";
    out << std::setprecision(17);
    out << "delta " << grid.delta() << "\n";
    out << "origin " << grid.x0() << " " << grid.y0() << "\n";
    out << "nx " << grid.nx() << "\n";
    out << "ny " << grid.ny() << "\n";
    out << "cells " << grid.cell_count() << "\n";
    out << "hash " << hash_hex(grid.content_hash()) << "\n";

    auto dump_int_rows = [&](const char* name, auto value_at) {
        out << name << "\n";
        for (int i = 1; i <= grid.nx(); ++i) {
            for (int j = 1; j <= grid.ny(); ++j)
                out << (j > 1 ? " " : "") << value_at(i, j);
            out << "\n";
        }
    };
    dump_int_rows("mask", [&](int i, int j) { return grid.masked(i, j) ? 1 : 0; });
    dump_int_rows("normals_x", [&](int i, int j) {
        return grid.masked(i, j) ? grid.normal_x(grid.compact_of_rect(grid.rect_index(i, j)))
                                 : 0;
    });
    dump_int_rows("normals_y", [&](int i, int j) {
        return grid.masked(i, j) ? grid.normal_y(grid.compact_of_rect(grid.rect_index(i, j)))
                                 : 0;
    });
}

namespace {

std::string expect_key(std::istream& in, const std::string& key) {
    std::string k, v;
    if (!(in >> k) || k != key)
        throw ParseError("grid/field file: expected '" + key + "', got '" + k + "'");
    if (!(in >> v)) throw ParseError("grid/field file: missing value for " + key);
    return v;
}

}  // namespace

RasterGrid load_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file: " + path.string());
    std::string magic, version;
    in >> magic >> version;
    if (magic != "swingpde-grid") throw ParseError("not a grid file: " + path.string());

    double delta = std::stod(expect_key(in, "delta"));
    std::string k;
    double x0, y0;
    if (!(in >> k >> x0 >> y0) || k != "origin") throw ParseError("grid file: bad origin");
    int nx = std::stoi(expect_key(in, "nx"));
    int ny = std::stoi(expect_key(in, "ny"));
    long cells = std::stol(expect_key(in, "cells"));
    std::string stored_hash = expect_key(in, "hash");

    if (!(in >> k) || k != "mask") throw ParseError("grid file: missing mask block");
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int i = 1; i <= nx; ++i)
        for (int j = 1; j <= ny; ++j) {
            int v;
            if (!(in >> v)) throw ParseError("grid file: truncated mask");
            mask[static_cast<std::size_t>(ny * (i - 1) + (j - 1))] =
                static_cast<std::uint8_t>(v != 0);
        }
    // The normal blocks are derived data; skip whatever follows.

    RasterGrid grid(nx, ny, delta, x0, y0, std::move(mask));
    if (grid.cell_count() != cells)
        throw ParseError("grid file: cell count does not match mask");
    if (hash_hex(grid.content_hash()) != stored_hash)
        throw ParseError("grid file: content hash mismatch (file corrupted?)");
    return grid;
}

// ---------------------------------------------------------------------------
// Field files

void save_field(const Field& field, const RasterGrid& grid, const std::filesystem::path& path,
                const std::string& tag_override) {
    field.require_grid(grid);
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write field file: " + path.string());
    out << "swingpde-field 1\n";
    out << "grid " << hash_hex(grid.content_hash()) << "\n";
    out << "quantity " << (tag_override.empty() ? quantity_tag(field.quantity) : tag_override)
        << "\n";
    out << "nx " << grid.nx() << "\n";
    out << "ny " << grid.ny() << "\n";
    for (int i = 1; i <= grid.nx(); ++i) {
        for (int j = 1; j <= grid.ny(); ++j) {
            int kc = grid.masked(i, j) ? grid.compact_of_rect(grid.rect_index(i, j)) : -1;
            out << (j > 1 ? " " : "") << format_sig9(kc >= 0 ? field.values[kc] : 0.0);
        }
        out << "\n";
    }
}

Field load_field(const std::filesystem::path& path, const RasterGrid& grid) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open field file: " + path.string());
    std::string magic, version;
    in >> magic >> version;
    if (magic != "swingpde-field") throw ParseError("not a field file: " + path.string());

    std::string grid_hash = expect_key(in, "grid");
    if (grid_hash != hash_hex(grid.content_hash()))
        throw ValidationError("field/grid hash mismatch: field file " + path.string() +
                              " was written for grid " + grid_hash + ", got " +
                              hash_hex(grid.content_hash()));
    std::string tag = expect_key(in, "quantity");
    int nx = std::stoi(expect_key(in, "nx"));
    int ny = std::stoi(expect_key(in, "ny"));
    if (nx != grid.nx() || ny != grid.ny())
        throw ParseError("field file dimensions do not match the grid");

    Field f = make_field(grid, quantity_from_tag(tag));
    for (int i = 1; i <= nx; ++i)
        for (int j = 1; j <= ny; ++j) {
            double v;
            if (!(in >> v)) throw ParseError("field file: truncated values");
            if (grid.masked(i, j)) f.values[grid.compact_of_rect(grid.rect_index(i, j))] = v;
        }
    return f;
}

void save_field_set(const FieldSet& fields, const RasterGrid& grid,
                    const std::filesystem::path& dir, const std::string& prefix) {
    std::filesystem::create_directories(dir);
    save_field(fields.m, grid, dir / (prefix + "_m.txt"));
    save_field(fields.d, grid, dir / (prefix + "_d.txt"));
    save_field(fields.p, grid, dir / (prefix + "_p.txt"));
    save_field(fields.bx, grid, dir / (prefix + "_b_x.txt"));
    save_field(fields.by, grid, dir / (prefix + "_b_y.txt"));
}

FieldSet load_field_set(const std::filesystem::path& dir, const RasterGrid& grid,
                        const std::string& prefix) {
    FieldSet fs;
    fs.m = load_field(dir / (prefix + "_m.txt"), grid);
    fs.d = load_field(dir / (prefix + "_d.txt"), grid);
    fs.p = load_field(dir / (prefix + "_p.txt"), grid);
    fs.bx = load_field(dir / (prefix + "_b_x.txt"), grid);
    fs.by = load_field(dir / (prefix + "_b_y.txt"), grid);
    fs.m.quantity = Quantity::M;
    fs.d.quantity = Quantity::D;
    fs.p.quantity = Quantity::P;
    fs.bx.quantity = Quantity::Bx;
    fs.by.quantity = Quantity::By;
    return fs;
}

// ---------------------------------------------------------------------------
// Trajectories

std::string trajectory_to_csv(const Trajectory& traj) {
    traj.validate();
    std::ostringstream out;
    out << "t";
    for (int id : traj.probes) out << ",probe_" << id << "_theta,probe_" << id << "_omega";
    out << ",global_omega\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        out << format_sig9(traj.times[s]);
        for (long c = 0; c < traj.theta.cols(); ++c)
            out << "," << format_sig9(traj.theta(static_cast<long>(s), c)) << ","
                << format_sig9(traj.omega(static_cast<long>(s), c));
        out << "," << format_sig9(traj.global_omega[s]) << "\n";
    }
    return out.str();
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trajectory file: " + path.string());
    out << trajectory_to_csv(traj);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trajectory file: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw ParseError("empty trajectory file");

    Trajectory traj;
    {
        std::stringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind("probe_", 0) == 0 && col.size() > 6 &&
                col.compare(col.size() - 6, 6, "_theta") == 0)
                traj.probes.push_back(std::stoi(col.substr(6)));
        }
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != 2 + 2 * traj.probes.size())
            throw ParseError("trajectory row has wrong column count");
        rows.push_back(std::move(row));
    }
    const long ns = static_cast<long>(rows.size());
    const long np = static_cast<long>(traj.probes.size());
    traj.theta.resize(ns, np);
    traj.omega.resize(ns, np);
    for (long s = 0; s < ns; ++s) {
        const auto& row = rows[static_cast<std::size_t>(s)];
        traj.times.push_back(row[0]);
        for (long c = 0; c < np; ++c) {
            traj.theta(s, c) = row[static_cast<std::size_t>(1 + 2 * c)];
            traj.omega(s, c) = row[static_cast<std::size_t>(2 + 2 * c)];
        }
        traj.global_omega.push_back(row.back());
    }
    traj.validate();
    return traj;
}

// ---------------------------------------------------------------------------
// Comparison reports

void save_steady_comparison(const SteadyComparison& cmp, const std::filesystem::path& summary,
                            const std::filesystem::path& scatter_csv) {
    {
        std::ofstream out(summary);
        if (!out) throw ParseError("cannot write report: " + summary.string());
        out << "steady-state comparison\n";
        out << "pairs " << cmp.bus_ids.size() << "\n";
        out << "rmse_rad " << format_sig9(cmp.rmse) << "\n";
        out << "max_abs_error_rad " << format_sig9(cmp.max_abs_error) << "\n";
        out << "outliers " << cmp.outliers.size() << "\n";
        for (const SteadyOutlier& o : cmp.outliers)
            out << "  bus " << o.bus_id << " at (" << format_sig9(o.x) << ", "
                << format_sig9(o.y) << ") error " << format_sig9(o.error) << "\n";
    }
    if (!scatter_csv.empty()) {
        std::ofstream out(scatter_csv);
        if (!out) throw ParseError("cannot write scatter file: " + scatter_csv.string());
        out << "bus,theta_disc,theta_cont,abs_error\n";
        for (std::size_t i = 0; i < cmp.bus_ids.size(); ++i)
            out << cmp.bus_ids[i] << "," << format_sig9(cmp.theta_disc[static_cast<long>(i)])
                << "," << format_sig9(cmp.theta_cont[static_cast<long>(i)]) << ","
                << format_sig9(std::abs(cmp.theta_disc[static_cast<long>(i)] -
                                        cmp.theta_cont[static_cast<long>(i)]))
                << "\n";
    }
}

void save_dynamic_comparison(const DynamicComparison& cmp,
                             const std::filesystem::path& summary) {
    std::ofstream out(summary);
    if (!out) throw ParseError("cannot write report: " + summary.string());
    out << "dynamic comparison\n";
    out << "terminal_global_difference " << format_sig9(cmp.terminal_global_difference)
        << "\n";
    out << "probe,rmse,deviation_range,terminal_difference,arrival_difference,distance_km\n";
    for (const ProbeTraceMetrics& m : cmp.probes)
        out << m.probe_id << "," << format_sig9(m.rmse) << ","
            << format_sig9(m.deviation_range) << "," << format_sig9(m.terminal_difference)
            << "," << format_sig9(m.arrival_difference) << ","
            << format_sig9(m.distance_to_fault_km) << "\n";
    if (!cmp.distance_bin_rmse.empty()) {
        out << "distance_bins_km";
        for (double e : cmp.distance_bin_edges_km) out << " " << format_sig9(e);
        out << "\nbin_mean_rmse";
        for (double v : cmp.distance_bin_rmse) out << " " << format_sig9(v);
        out << "\n";
    }
}

}  // namespace swingpde
