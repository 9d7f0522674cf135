// config.hpp: INI-style run configuration. The grammar is documented in
// README.md; every section and key is listed in config.cpp.

#pragma once

#include "fockgs/sweep.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fockgs::config {

enum class Format { json, csv };
const char* to_string(Format f);
Format parse_format(const std::string& s);

// All problems found in a configuration, one message per line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct RunConfig {
    sweep::ModelRecipe model;
    spectral::SpectralConfig solver;
    std::vector<std::string> checks;  // resolved names; empty until resolve_checks
    std::string checks_spec = "all";
    sweep::CheckOptions options;
    std::vector<sweep::SweepAxis> axes;
    std::size_t cell_cap = 10000;
    int threads = 1;
    std::string out_dir;
    Format format = Format::json;
    bool timings = false;
    std::string hash;  // FNV-1a of the source text, hex

    std::uint64_t seed() const { return solver.seed; }
    sweep::SweepPlan plan() const;
};

// Throws ConfigError listing every syntax and semantic problem.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// "all" expands to the checks applicable to the model (plus trend checks
// whose sweep axis is present); otherwise a comma-separated list of names.
std::vector<std::string> resolve_checks(const std::string& spec, const RunConfig& cfg);

// Re-applies the cross-field validation after command-line overrides.
void validate(RunConfig& cfg);

std::string fnv1a_hex(const std::string& text);

// Value parsers shared with the tests. All throw std::invalid_argument.
double parse_double(const std::string& s);
long long parse_int(const std::string& s);
bool parse_bool(const std::string& s);
cplx parse_complex(const std::string& s);
Matrix parse_matrix(const std::string& s);  // rows separated by '|', entries by ','
std::vector<double> parse_list(const std::string& s);

}  // namespace fockgs::config
