#pragma once

// Field files: a one-line ASCII header `n=<int>` followed by the n*n values
// in row-major order (row i = x1 index). `.csv` files hold one row per line
// in full-precision decimal; any other extension is read and written as raw
// IEEE-754 doubles in host byte order.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tdm/errors.hpp"
#include "tdm/grid.hpp"

namespace tdm {

namespace detail {

inline bool is_csv(const std::filesystem::path& p) { return p.extension() == ".csv"; }

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline int parse_header(std::istream& in, const std::filesystem::path& p)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
        throw ConfigError("field file " + p.string() + ": missing `n=<int>` header");
    try {
        return std::stoi(line.substr(2));
    } catch (const std::exception&) {
        throw ConfigError("field file " + p.string() + ": malformed header `" + line + "`");
    }
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const ScalarField& f)
{
    const Grid& g = f.grid();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FilesystemError("cannot open " + path.string() + " for writing");
    out << "n=" << g.n() << '\n';
    if (detail::is_csv(path)) {
        for (int i = 0; i < g.n(); ++i) {
            for (int j = 0; j < g.n(); ++j) {
                if (j) out << ',';
                out << detail::format_double(f(i, j));
            }
            out << '\n';
        }
    } else {
        const auto v = f.values();
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!out) throw FilesystemError("write failed: " + path.string());
}

inline ScalarField read_field(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FilesystemError("cannot open " + path.string());
    const Grid g = make_grid(detail::parse_header(in, path));
    std::vector<double> values(g.size());
    if (detail::is_csv(path)) {
        std::string line;
        std::size_t k = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream row(line);
            std::string cell;
            while (std::getline(row, cell, ',')) {
                if (k >= values.size()) throw ConfigError("field file " + path.string() + ": too many values");
                values[k++] = std::stod(cell);
            }
        }
        if (k != values.size()) throw ConfigError("field file " + path.string() + ": too few values");
    } else {
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
            throw ConfigError("field file " + path.string() + ": truncated payload");
    }
    return ScalarField(g, std::move(values));
}

}  // namespace tdm
