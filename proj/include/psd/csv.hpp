// CSV emission: fixed 9-significant-digit formatting, LF newlines.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace psd {

struct CsvSchema {
    std::vector<std::string> columns;
};

inline std::string format_csv_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void emit_csv(const std::vector<std::vector<double>>& rows, const CsvSchema& schema,
                     const std::string& path) {
    for (const auto& row : rows)
        if (row.size() != schema.columns.size())
            throw std::invalid_argument("emit_csv: row arity does not match schema");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("emit_csv: cannot open " + path);
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
        if (i) out << ',';
        out << schema.columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_csv_value(row[i]);
        }
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("emit_csv: write failed for " + path);
}

} // namespace psd
