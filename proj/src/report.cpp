#include "fockgs/report.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fockgs::report {

namespace {

const std::vector<std::string> kFixed{"kind", "cell", "check", "status", "note"};
const std::vector<std::string> kProvenance{"config_hash", "seed", "version", "eigen"};
constexpr const char* kParam = "param.";

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (in_quotes) throw std::invalid_argument("csv: unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

ReportRecord base_record(const std::string& kind, const sweep::CellRecord& c, const Provenance& p) {
    ReportRecord r;
    r.kind = kind;
    r.cell = static_cast<long long>(c.index);
    r.parameters = c.parameters;
    r.provenance = p;
    return r;
}

double json_number(const nlohmann::ordered_json& v) {
    if (v.is_string()) return parse_number(v.get<std::string>());
    if (!v.is_number()) throw std::invalid_argument("json: expected a number");
    return v.get<double>();
}

}  // namespace

Provenance make_provenance(const std::string& config_hash, std::uint64_t seed) {
    return {config_hash, seed, FOCKGS_VERSION,
            std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                std::to_string(EIGEN_MINOR_VERSION)};
}

bool ReportRecord::operator==(const ReportRecord& o) const {
    if (kind != o.kind || cell != o.cell || check != o.check || status != o.status || note != o.note ||
        !(provenance == o.provenance) || parameters.size() != o.parameters.size() || values.size() != o.values.size())
        return false;
    for (std::size_t i = 0; i < parameters.size(); ++i)
        if (parameters[i].first != o.parameters[i].first || !same(parameters[i].second, o.parameters[i].second))
            return false;
    for (auto a = values.begin(), b = o.values.begin(); a != values.end(); ++a, ++b)
        if (a->first != b->first || !same(a->second, b->second)) return false;
    return true;
}

std::vector<ReportRecord> from_cell(const sweep::CellRecord& c, const Provenance& p, bool timings) {
    std::vector<ReportRecord> out;
    ReportRecord cell = base_record("cell", c, p);
    cell.status = c.ok ? "ok" : (c.solver_failure ? "solver_failure" : "failed");
    cell.note = c.reason;
    cell.values = {{"energy", c.energy},       {"multiplicity", c.multiplicity}, {"gap", c.gap},
                   {"mean_number", c.mean_number}, {"overlap", c.overlap},       {"delta", c.delta},
                   {"margin", c.margin},       {"top_weight", c.top_weight},   {"dimension", c.dimension}};
    if (timings) cell.values["wall_time"] = c.wall_time;
    out.push_back(std::move(cell));
    for (const auto& chk : c.checks) {
        ReportRecord r = base_record("check", c, p);
        r.check = chk.check;
        r.status = verify::to_string(chk.status);
        r.note = chk.note;
        r.values = chk.values;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ReportRecord> from_sweep(const sweep::SweepResult& res, const Provenance& p, bool timings) {
    std::vector<ReportRecord> out;
    for (const auto& c : res.cells) {
        auto part = from_cell(c, p, timings);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    for (const auto& t : res.trends) {
        ReportRecord r;
        r.kind = "trend";
        r.check = t.check;
        r.status = verify::to_string(t.status);
        r.note = t.note;
        r.provenance = p;
        for (const auto& [k, v] : t.values) {
            if (k.rfind(kParam, 0) == 0) r.parameters.emplace_back(k.substr(6), v);
            else r.values[k] = v;
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(const std::string& s) {
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
    return config::parse_double(s);
}

std::string to_json_lines(const std::vector<ReportRecord>& records) {
    std::string out;
    auto num = [](double v) { return std::isfinite(v) ? format_number(v) : quote(format_number(v)); };
    for (const auto& r : records) {
        std::string line = "{\"kind\":" + quote(r.kind) + ",\"cell\":" + std::to_string(r.cell) +
                           ",\"check\":" + quote(r.check) + ",\"status\":" + quote(r.status) +
                           ",\"note\":" + quote(r.note) + ",\"parameters\":{";
        for (std::size_t i = 0; i < r.parameters.size(); ++i)
            line += (i ? "," : "") + quote(r.parameters[i].first) + ":" + num(r.parameters[i].second);
        line += "},\"values\":{";
        bool first = true;
        for (const auto& [k, v] : r.values) {
            line += (first ? "" : ",") + quote(k) + ":" + num(v);
            first = false;
        }
        line += "},\"provenance\":{\"config_hash\":" + quote(r.provenance.config_hash) +
                ",\"seed\":" + std::to_string(r.provenance.seed) + ",\"version\":" + quote(r.provenance.version) +
                ",\"eigen\":" + quote(r.provenance.eigen) + "}}\n";
        out += line;
    }
    return out;
}

std::vector<ReportRecord> read_json_lines(const std::string& text) {
    std::vector<ReportRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::ordered_json::parse(line);
            ReportRecord r;
            r.kind = j.at("kind").get<std::string>();
            r.cell = j.at("cell").get<long long>();
            r.check = j.at("check").get<std::string>();
            r.status = j.at("status").get<std::string>();
            r.note = j.at("note").get<std::string>();
            for (const auto& [k, v] : j.at("parameters").items()) r.parameters.emplace_back(k, json_number(v));
            for (const auto& [k, v] : j.at("values").items()) r.values[k] = json_number(v);
            const auto& p = j.at("provenance");
            r.provenance = {p.at("config_hash").get<std::string>(), p.at("seed").get<std::uint64_t>(),
                            p.at("version").get<std::string>(), p.at("eigen").get<std::string>()};
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::invalid_argument("json-lines line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string to_csv(const std::vector<ReportRecord>& records) {
    std::vector<std::string> params;
    std::set<std::string> values;
    for (const auto& r : records) {
        for (const auto& [k, v] : r.parameters)
            if (std::find(params.begin(), params.end(), k) == params.end()) params.push_back(k);
        for (const auto& [k, v] : r.values) {
            const bool clash = std::find(kFixed.begin(), kFixed.end(), k) != kFixed.end() ||
                               std::find(kProvenance.begin(), kProvenance.end(), k) != kProvenance.end() ||
                               k.rfind(kParam, 0) == 0;
            if (clash) throw std::logic_error("to_csv: value name '" + k + "' collides with a fixed column");
            values.insert(k);
        }
    }
    std::vector<std::string> header = kFixed;
    for (const auto& p : params) header.push_back(kParam + p);
    header.insert(header.end(), values.begin(), values.end());
    header.insert(header.end(), kProvenance.begin(), kProvenance.end());

    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_field(header[i]);
    out += '\n';
    for (const auto& r : records) {
        std::vector<std::string> row{r.kind, std::to_string(r.cell), r.check, r.status, r.note};
        for (const auto& p : params) {
            const auto it = std::find_if(r.parameters.begin(), r.parameters.end(),
                                         [&p](const auto& kv) { return kv.first == p; });
            row.push_back(it == r.parameters.end() ? "" : format_number(it->second));
        }
        for (const auto& v : values) {
            const auto it = r.values.find(v);
            row.push_back(it == r.values.end() ? "" : format_number(it->second));
        }
        row.push_back(r.provenance.config_hash);
        row.push_back(std::to_string(r.provenance.seed));
        row.push_back(r.provenance.version);
        row.push_back(r.provenance.eigen);
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
        out += '\n';
    }
    return out;
}

std::vector<ReportRecord> read_csv(const std::string& text) {
    const auto rows = csv_rows(text);
    std::vector<ReportRecord> out;
    if (rows.empty()) return out;
    const auto& header = rows.front();
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto& row = rows[n];
        if (row.size() != header.size())
            throw std::invalid_argument("csv row " + std::to_string(n + 1) + ": expected " +
                                        std::to_string(header.size()) + " fields");
        ReportRecord r;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string& h = header[i];
            const std::string& f = row[i];
            if (h == "kind") r.kind = f;
            else if (h == "cell") r.cell = config::parse_int(f);
            else if (h == "check") r.check = f;
            else if (h == "status") r.status = f;
            else if (h == "note") r.note = f;
            else if (h == "config_hash") r.provenance.config_hash = f;
            else if (h == "seed") r.provenance.seed = static_cast<std::uint64_t>(std::stoull(f));
            else if (h == "version") r.provenance.version = f;
            else if (h == "eigen") r.provenance.eigen = f;
            else if (f.empty()) continue;
            else if (h.rfind(kParam, 0) == 0) r.parameters.emplace_back(h.substr(6), parse_number(f));
            else r.values[h] = parse_number(f);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string render(const std::vector<ReportRecord>& records, config::Format f) {
    return f == config::Format::json ? to_json_lines(records) : to_csv(records);
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

int exit_status(const std::vector<ReportRecord>& records) {
    int code = 0;
    for (const auto& r : records) {
        if (r.kind == "cell" && r.status == "solver_failure") return 4;
        if (r.kind == "cell" && r.status == "failed") code = 3;
        if ((r.kind == "check" || r.kind == "trend") && r.status == "fail" && code == 0) code = 2;
    }
    return code;
}

}  // namespace fockgs::report
