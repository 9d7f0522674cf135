// report.hpp: flat report records, JSON-lines and CSV writers and readers.

#pragma once

#include "fockgs/config.hpp"
#include "fockgs/sweep.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fockgs::report {

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    std::string eigen;

    bool operator==(const Provenance&) const = default;
};

Provenance make_provenance(const std::string& config_hash, std::uint64_t seed);

// kind is one of build, solve, eigenvalue, cell, check, trend.
struct ReportRecord {
    std::string kind;
    long long cell = -1;  // -1 when not tied to a sweep cell
    std::vector<std::pair<std::string, double>> parameters;
    std::string check;
    std::string status;
    std::string note;
    std::map<std::string, double> values;
    Provenance provenance;

    // NaN compares equal to NaN; everything else exactly.
    bool operator==(const ReportRecord& o) const;
};

std::vector<ReportRecord> from_cell(const sweep::CellRecord& cell, const Provenance& p, bool timings);
std::vector<ReportRecord> from_sweep(const sweep::SweepResult& r, const Provenance& p, bool timings);

// %.17g; non-finite values as NaN, Infinity, -Infinity.
std::string format_number(double v);
double parse_number(const std::string& s);

std::string to_json_lines(const std::vector<ReportRecord>& records);
std::string to_csv(const std::vector<ReportRecord>& records);
std::vector<ReportRecord> read_json_lines(const std::string& text);
std::vector<ReportRecord> read_csv(const std::string& text);

std::string render(const std::vector<ReportRecord>& records, config::Format f);
// Throws std::runtime_error naming the path on any IO failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

// 0 all pass, 2 a check failed, 3 a cell failed outside the solver,
// 4 solver non-convergence.
int exit_status(const std::vector<ReportRecord>& records);

}  // namespace fockgs::report
