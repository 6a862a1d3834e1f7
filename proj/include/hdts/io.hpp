#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdts/errors.hpp"
#include "hdts/matrix.hpp"

namespace hdts {

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_fixed(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << "\r\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

// Minimal RFC-4180 reader, sufficient for the files this tool emits.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',': row.push_back(field); field.clear(); any = true; break;
            case '\r': break;
            case '\n':
                if (any || !field.empty() || !row.empty()) {
                    row.push_back(field);
                    rows.push_back(std::move(row));
                }
                row.clear();
                field.clear();
                any = false;
                break;
            default: field += c; any = true; break;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Numeric matrix from CSV; a non-numeric first row is treated as a header.
inline Matrix read_csv_matrix(const std::filesystem::path& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw IoError("empty csv: " + path.string());

    auto parse_row = [](const std::vector<std::string>& fields, std::vector<double>& out) {
        out.clear();
        for (const auto& f : fields) {
            double v = 0.0;
            const char* begin = f.data();
            const char* end = begin + f.size();
            while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
            while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc{} || ptr != end) return false;
            out.push_back(v);
        }
        return true;
    };

    std::vector<double> parsed;
    std::size_t start = 0;
    if (!parse_row(rows[0], parsed)) start = 1;
    if (start >= rows.size()) throw IoError("csv has no numeric rows: " + path.string());

    std::vector<std::vector<double>> values;
    for (std::size_t r = start; r < rows.size(); ++r) {
        if (!parse_row(rows[r], parsed))
            throw IoError("csv: non-numeric row " + std::to_string(r + 1));
        if (!values.empty() && parsed.size() != values.front().size())
            throw IoError("csv: ragged row " + std::to_string(r + 1));
        values.push_back(parsed);
    }

    Matrix m(values.size(), values.front().size());
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = 0; j < values[i].size(); ++j) m(i, j) = values[i][j];
    return m;
}

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace hdts
