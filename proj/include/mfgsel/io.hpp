#pragma once

// CSV and JSON output. Numbers are printed with %.17g so files round-trip.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfgsel/errors.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel::io {

using json = nlohmann::ordered_json;

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary), width_(header.size()) {
        if (!out_) throw Error("cannot open " + path.string());
        write_cells(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_number(v));
        write_cells(cells);
    }

    void row(const std::vector<std::string>& cells) { write_cells(cells); }

private:
    void write_cells(const std::vector<std::string>& cells) {
        if (cells.size() != width_) throw Error("csv row width does not match header");
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ',';
            out_ << cells[k];
        }
        out_ << '\n';
    }

    std::ofstream out_;
    std::size_t width_;
};

/// Columns x followed by the named fields, all on one grid.
inline void write_fields(const std::filesystem::path& path, const std::vector<std::string>& names,
                         const std::vector<const GridField*>& fields) {
    if (names.size() != fields.size() || fields.empty()) throw Error("write_fields: bad column list");
    std::vector<std::string> header{"x"};
    header.insert(header.end(), names.begin(), names.end());
    CsvWriter w(path, header);
    const TorusGrid& g = fields.front()->grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<double> r{g.coord(static_cast<int>(i))};
        for (const auto* f : fields) r.push_back((*f)[i]);
        w.row(r);
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

/// Non-finite values become null, which JSON can represent.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace mfgsel::io
