#pragma once

// File formats: CSV point sets (x,y,z for data, x,y for queries), per-query
// result CSV, ASCII-grid rasters, and the grid-index debug dump. All floats
// are decimal-dot, written with 17 significant digits so values survive a
// write/read round trip bit-exactly.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aidw/grid.hpp"
#include "aidw/interpolate.hpp"
#include "aidw/types.hpp"

namespace aidw {

namespace detail {

inline std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line,
                                    const std::string& message) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + message);
}

inline std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

inline double parse_double(std::string_view token, const std::string& path, std::size_t line) {
    token = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        parse_fail(path, line, "cannot parse number from '" + std::string(token) + "'");
    }
    return value;
}

/// Split one CSV line into exactly `expected` numeric fields.
inline std::vector<double> parse_row(const std::string& raw, std::size_t expected,
                                     const std::string& path, std::size_t line) {
    std::vector<double> fields;
    fields.reserve(expected);
    std::string_view rest(raw);
    while (true) {
        const std::size_t comma = rest.find(',');
        fields.push_back(parse_double(rest.substr(0, comma), path, line));
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    if (fields.size() != expected) {
        parse_fail(path, line, "expected " + std::to_string(expected) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    return fields;
}

inline std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path + ": cannot open for reading");
    }
    return in;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    return out;
}

inline void check_header(const std::string& found, const std::string& wanted,
                         const std::string& path) {
    if (std::string(trim(found)) != wanted) {
        parse_fail(path, 1, "expected header '" + wanted + "', found '" + found + "'");
    }
}

}  // namespace detail

/// Data points: header `x,y,z`, one point per line.
inline PointSet read_data_csv(const std::string& path) {
    auto in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) {
        detail::parse_fail(path, 1, "empty file, expected header 'x,y,z'");
    }
    detail::check_header(line, "x,y,z", path);
    PointSet set;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto row = detail::parse_row(line, 3, path, line_number);
        set.add(row[0], row[1], row[2]);
    }
    validate_finite(set, path);
    return set;
}

/// Query points: header `x,y`, one point per line.
inline PointSet read_query_csv(const std::string& path) {
    auto in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) {
        detail::parse_fail(path, 1, "empty file, expected header 'x,y'");
    }
    detail::check_header(line, "x,y", path);
    PointSet set;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto row = detail::parse_row(line, 2, path, line_number);
        set.add(row[0], row[1]);
    }
    validate_finite(set, path);
    return set;
}

inline void write_data_csv(const std::string& path, const PointSet& set) {
    auto out = detail::open_for_write(path);
    out << "x,y,z\n";
    for (std::size_t i = 0; i < set.count(); ++i) {
        out << detail::format_double(set.xs[i]) << ',' << detail::format_double(set.ys[i]) << ','
            << detail::format_double(set.zs[i]) << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

inline void write_query_csv(const std::string& path, const PointSet& set) {
    auto out = detail::open_for_write(path);
    out << "x,y\n";
    for (std::size_t i = 0; i < set.count(); ++i) {
        out << detail::format_double(set.xs[i]) << ',' << detail::format_double(set.ys[i]) << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

/// Per-query output: `x,y,alpha,z_pred`, input order.
inline void write_result_csv(const std::string& path, const PointSet& queries,
                             const InterpolationResult& result) {
    if (result.predicted.size() != queries.count() || result.alphas.size() != queries.count()) {
        throw std::invalid_argument("write_result_csv: result length does not match queries");
    }
    auto out = detail::open_for_write(path);
    out << "x,y,alpha,z_pred\n";
    for (std::size_t i = 0; i < queries.count(); ++i) {
        out << detail::format_double(queries.xs[i]) << ',' << detail::format_double(queries.ys[i])
            << ',' << detail::format_double(result.alphas[i]) << ','
            << detail::format_double(result.predicted[i]) << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

/// A regular lattice of interpolated values. `values` is row-major with the
/// NORTHERNMOST row first (the ASCII-grid convention); cellsize is the
/// lattice spacing along x.
struct Raster {
    std::size_t ncols = 0;
    std::size_t nrows = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 0.0;
    std::vector<double> values;
};

inline void write_raster_asc(const std::string& path, const Raster& raster) {
    if (raster.values.size() != raster.ncols * raster.nrows) {
        throw std::invalid_argument("write_raster_asc: value count does not match dimensions");
    }
    auto out = detail::open_for_write(path);
    out << "ncols " << raster.ncols << '\n';
    out << "nrows " << raster.nrows << '\n';
    out << "xllcorner " << detail::format_double(raster.xllcorner) << '\n';
    out << "yllcorner " << detail::format_double(raster.yllcorner) << '\n';
    out << "cellsize " << detail::format_double(raster.cellsize) << '\n';
    for (std::size_t r = 0; r < raster.nrows; ++r) {
        for (std::size_t c = 0; c < raster.ncols; ++c) {
            if (c != 0) {
                out << ' ';
            }
            out << detail::format_double(raster.values[r * raster.ncols + c]);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

inline Raster parse_raster_asc(const std::string& path) {
    auto in = detail::open_for_read(path);
    Raster raster;
    std::string key;
    std::size_t line = 0;
    auto read_header = [&](const std::string& wanted) -> double {
        ++line;
        double value = 0.0;
        if (!(in >> key >> value) || key != wanted) {
            detail::parse_fail(path, line, "expected header line '" + wanted + " <value>'");
        }
        return value;
    };
    raster.ncols = static_cast<std::size_t>(read_header("ncols"));
    raster.nrows = static_cast<std::size_t>(read_header("nrows"));
    raster.xllcorner = read_header("xllcorner");
    raster.yllcorner = read_header("yllcorner");
    raster.cellsize = read_header("cellsize");
    raster.values.reserve(raster.ncols * raster.nrows);
    double value = 0.0;
    while (in >> value) {
        raster.values.push_back(value);
    }
    if (raster.values.size() != raster.ncols * raster.nrows) {
        detail::parse_fail(path, line, "expected " + std::to_string(raster.ncols * raster.nrows) +
                                           " values, found " +
                                           std::to_string(raster.values.size()));
    }
    return raster;
}

/// Debug dump of the cell layout: `cellId,count,head` (head -1 for empty
/// cells). Inspection aid only.
inline void write_grid_debug_csv(const std::string& path, const GridIndex& index) {
    auto out = detail::open_for_write(path);
    out << "cellId,count,head\n";
    for (std::size_t c = 0; c < index.config.cell_total(); ++c) {
        const std::uint32_t count = index.cell_count(c);
        out << c << ',' << count << ',';
        if (count == 0) {
            out << -1;
        } else {
            out << index.cell_head(c);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

}  // namespace aidw
