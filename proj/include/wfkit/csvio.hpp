#pragma once

// CSV reading/writing with deterministic number formatting, and the atomic
// all-or-nothing output set used by the CLI (stage in memory, write temp
// files, rename at the end).

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

// shortest decimal form that round-trips the exact double
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct CsvTable {
    std::vector<std::string> comments;  // leading '#' lines, without the '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open csv: " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            t.comments.push_back(line.substr(1));
            continue;
        }
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size())
                throw Error(path + ": row with " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw Error(path + ": no header row");
    return t;
}

inline double csv_number(const CsvTable& t, const std::vector<std::string>& row,
                         const std::string& col, const std::string& path) {
    int c = t.column(col);
    if (c < 0) throw Error(path + ": missing column '" + col + "'");
    const std::string& s = row[static_cast<std::size_t>(c)];
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(path + ": bad number '" + s + "' in column '" + col + "'");
    }
}

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// All-or-nothing output staging: contents collect in memory; commit() writes
// every file to <path>.tmp and then renames, so a failed run leaves nothing.
struct OutputSet {
    std::vector<std::pair<std::string, std::string>> files;  // (path, content)

    void add(const std::string& path, std::string content) {
        files.emplace_back(path, std::move(content));
    }

    void commit() {
        namespace fs = std::filesystem;
        std::vector<std::string> temps;
        try {
            for (const auto& [path, content] : files) {
                fs::path p(path);
                if (p.has_parent_path()) fs::create_directories(p.parent_path());
                std::string tmp = path + ".tmp";
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out) throw Error("cannot write " + tmp);
                out << content;
                out.close();
                if (!out) throw Error("write failed for " + tmp);
                temps.push_back(tmp);
            }
            for (const auto& [path, content] : files) {
                std::error_code ec;
                fs::rename(path + ".tmp", path, ec);
                if (ec) throw Error("cannot rename into place: " + path + ": " + ec.message());
            }
        } catch (...) {
            for (const std::string& tmp : temps) {
                std::error_code ec;
                fs::remove(tmp, ec);
            }
            throw;
        }
    }
};

}  // namespace wfkit
