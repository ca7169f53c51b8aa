#pragma once

// Output helpers: 17-significant-digit CSV and schema-versioned JSON reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fractel/error.hpp"

namespace fractel {

inline constexpr int kSchemaVersion = 1;

/// %.17g; every double round-trips.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma-separated table with a mandatory header row.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
        if (header.empty()) throw InvalidArgument("CsvWriter: empty header");
        append(header);
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_) throw InvalidArgument("CsvWriter: row width differs from header");
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_number(v));
        append(cells);
    }

    const std::string& str() const { return text_; }

    void save(const std::filesystem::path& path) const { write_file(path, text_); }

    static void write_file(const std::filesystem::path& path, const std::string& text) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw Error("write failed for '" + path.string() + "'");
    }

private:
    void append(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

/// One pass/fail entry of a report.
struct Check {
    std::string name;
    bool passed = true;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string note;
};

inline nlohmann::ordered_json to_json(const Check& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["verdict"] = c.passed ? "pass" : "fail";
    j["measured"] = c.measured;
    j["tolerance"] = c.tolerance;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

/// measured <= tolerance, with NaN failing.
inline Check make_check(std::string name, double measured, double tolerance, std::string note = {}) {
    return {std::move(name), measured <= tolerance, measured, tolerance, std::move(note)};
}

/// Report skeleton shared by all commands.
inline nlohmann::ordered_json report_header(const std::string& command) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    CsvWriter::write_file(path, j.dump(2) + "\n");
}

}  // namespace fractel
