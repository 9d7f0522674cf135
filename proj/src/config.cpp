#include "fockgs/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fockgs::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

// Boost's INI reader only knows ';' comments.
std::string strip_hash_comments(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        out += (!t.empty() && t[0] == '#') ? std::string() : line;
        out += '\n';
    }
    return out;
}

std::string canonical_axis(const std::string& key) {
    if (key == "alpha" || key == "g" || key == "e") return "coupling";
    if (key == "n_max") return "cutoff";
    return key;
}

const std::vector<std::string> kToleranceKeys{"identity", "pull_through", "budget_factor", "budget_floor", "margin",
                                              "trend_slack", "final_ratio", "cauchy", "growth", "top_weight_limit",
                                              "binding", "commutator", "cluster_ratio"};

double& tolerance_field(verify::Tolerances& t, const std::string& k) {
    if (k == "identity") return t.identity;
    if (k == "pull_through") return t.pull_through;
    if (k == "budget_factor") return t.budget_factor;
    if (k == "budget_floor") return t.budget_floor;
    if (k == "margin") return t.margin;
    if (k == "trend_slack") return t.trend_slack;
    if (k == "final_ratio") return t.final_ratio;
    if (k == "cauchy") return t.cauchy;
    if (k == "growth") return t.growth;
    if (k == "top_weight_limit") return t.top_weight_limit;
    if (k == "binding") return t.binding;
    if (k == "commutator") return t.commutator;
    if (k == "cluster_ratio") return t.cluster_ratio;
    throw std::invalid_argument("unknown tolerance");
}

int to_int(const std::string& s) {
    const long long v = parse_int(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw std::invalid_argument("integer out of range");
    return static_cast<int>(v);
}

using Handler = std::function<void(const std::string&)>;

}  // namespace

const char* to_string(Format f) { return f == Format::json ? "json" : "csv"; }

Format parse_format(const std::string& s) {
    const std::string v = lower(trim(s));
    if (v == "json" || v == "jsonl" || v == "json-lines") return Format::json;
    if (v == "csv") return Format::csv;
    throw std::invalid_argument("expected json or csv, got '" + s + "'");
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("configuration error:\n  " + join(errors, "\n  ")), errors_(std::move(errors)) {}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------

double parse_double(const std::string& raw) {
    const std::string s = trim(raw);
    const std::string l = lower(s);
    if (l == "inf" || l == "+inf" || l == "infinity") return std::numeric_limits<double>::infinity();
    if (l == "-inf" || l == "-infinity") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    const auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

long long parse_int(const std::string& raw) {
    const std::string s = trim(raw);
    long long v = 0;
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    const auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& raw) {
    const std::string s = lower(trim(raw));
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + raw + "'");
}

// a, bi, a+bi, a-bi, i, -i; exponents allowed in either part.
cplx parse_complex(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("expected a complex number, got ''");
    if (s.back() != 'i' && s.back() != 'j') return parse_double(s);
    s.pop_back();
    std::size_t split_at = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split_at = i;
            break;
        }
    }
    const std::string re = split_at == std::string::npos ? "" : s.substr(0, split_at);
    std::string im = split_at == std::string::npos ? s : s.substr(split_at);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    try {
        return {re.empty() ? 0.0 : parse_double(re), parse_double(im)};
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("expected a complex number, got '" + raw + "'");
    }
}

Matrix parse_matrix(const std::string& s) {
    const auto rows = split(s, '|');
    if (rows.empty() || trim(s).empty()) throw std::invalid_argument("empty matrix");
    std::vector<std::vector<cplx>> entries;
    for (const auto& r : rows) {
        std::vector<cplx> row;
        for (const auto& e : split(r, ',')) row.push_back(parse_complex(e));
        if (!entries.empty() && row.size() != entries.front().size())
            throw std::invalid_argument("matrix rows have different lengths");
        entries.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(entries.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& e : split(s, ',')) out.push_back(parse_double(e));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

// ---------------------------------------------------------------------------

sweep::SweepPlan RunConfig::plan() const {
    sweep::SweepPlan p;
    p.base = model;
    p.axes = axes;
    p.checks = checks;
    p.solver = solver;
    p.options = options;
    p.seed = solver.seed;
    p.cell_cap = cell_cap;
    p.threads = threads;
    return p;
}

std::vector<std::string> resolve_checks(const std::string& spec, const RunConfig& cfg) {
    const std::string s = lower(trim(spec));
    auto has_axis = [&cfg](const std::string& n) {
        return std::any_of(cfg.axes.begin(), cfg.axes.end(), [&n](const sweep::SweepAxis& a) { return a.name == n; });
    };
    if (s == "all") {
        auto out = sweep::applicable_checks(cfg.model);
        if (has_axis("coupling")) {
            out.push_back("delta_trend");
            out.push_back("resolvent_convergence");
        }
        if (has_axis("k_min") && cfg.model.kind != sweep::ModelKind::pf_toy) out.push_back("ir_probe");
        return out;
    }
    if (s == "none") return {};
    std::vector<std::string> out;
    for (const auto& n : split(s, ',')) {
        if (n.empty()) continue;
        if (!sweep::is_cell_check(n) && !sweep::is_trend_check(n))
            throw std::invalid_argument("unknown check '" + n + "'");
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
    return out;
}

namespace {

void collect_semantic_errors(RunConfig& cfg, std::vector<std::string>& err) {
    for (auto& e : cfg.model.validate()) err.push_back(std::move(e));
    try {
        cfg.solver.validate();
    } catch (const std::exception& e) {
        err.push_back(std::string("solver: ") + e.what());
    }
    for (const auto& k : kToleranceKeys) {
        const double v = tolerance_field(cfg.options.tol, k);
        if (!(v >= 0.0) || !std::isfinite(v)) err.push_back("checks.tolerance." + k + ": must be finite and non-negative");
    }
    if (cfg.options.random_states < 0) err.push_back("checks.random_states: must be non-negative");
    if (cfg.options.unitaries < 0) err.push_back("checks.unitaries: must be non-negative");
    if (cfg.options.massive_states < 0) err.push_back("checks.massive_states: must be non-negative");
    if (cfg.options.z.imag() == 0.0) err.push_back("checks.z: imaginary part must be non-zero");
    if (cfg.threads < 1) err.push_back("sweep.threads: must be at least 1");
    if (cfg.cell_cap < 1) err.push_back("sweep.cap: must be at least 1");

    try {
        cfg.checks = resolve_checks(cfg.checks_spec, cfg);
    } catch (const std::exception& e) {
        err.push_back(std::string("checks.enabled: ") + e.what());
        cfg.checks.clear();
    }
    auto has_axis = [&cfg](const std::string& n) {
        return std::any_of(cfg.axes.begin(), cfg.axes.end(), [&n](const sweep::SweepAxis& a) { return a.name == n; });
    };
    for (const auto& c : cfg.checks) {
        if ((c == "delta_trend" || c == "resolvent_convergence") && !has_axis("coupling"))
            err.push_back("checks.enabled: " + c + " needs a [sweep] coupling axis");
        if (c == "ir_probe" && !has_axis("k_min")) err.push_back("checks.enabled: ir_probe needs a [sweep] k_min axis");
        if (c == "ir_probe" && cfg.model.kind == sweep::ModelKind::pf_toy)
            err.push_back("checks.enabled: ir_probe applies to spin-boson and GSB models only");
    }

    std::size_t cells = 1;
    for (const auto& a : cfg.axes) {
        for (double v : a.values) {
            sweep::ModelRecipe probe = cfg.model;
            try {
                probe.set(a.name, v);
            } catch (const std::exception& e) {
                err.push_back(e.what());
                continue;
            }
            for (const auto& e : probe.validate()) {
                std::ostringstream os;
                os << "sweep." << a.name << " = " << v << ": " << e;
                if (std::find(err.begin(), err.end(), e) == err.end()) err.push_back(os.str());
            }
        }
        cells *= a.values.size();
    }
    if (!cfg.axes.empty()) {
        const sweep::SweepPlan p = cfg.plan();
        if (p.cell_count() > cfg.cell_cap) {
            std::ostringstream os;
            os << "sweep.cap: plan has " << p.cell_count() << " cells, cap is " << cfg.cell_cap;
            err.push_back(os.str());
        }
    }
}

}  // namespace

void validate(RunConfig& cfg) {
    std::vector<std::string> err;
    collect_semantic_errors(cfg, err);
    if (!err.empty()) throw ConfigError(std::move(err));
}

RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(strip_hash_comments(text));
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream os;
        os << "line " << e.line() << ": " << e.message();
        throw ConfigError({os.str()});
    }

    RunConfig cfg;
    cfg.hash = fnv1a_hex(text);
    std::vector<std::string> err;
    auto& m = cfg.model;
    auto& s = cfg.solver;
    auto& o = cfg.options;

    std::string coupling_key;
    const std::map<std::string, Handler> model_keys{
        {"kind",
         [&](const std::string& v) {
             const std::string k = lower(v);
             if (k == "spin-boson" || k == "spin_boson") m.kind = sweep::ModelKind::spin_boson;
             else if (k == "gsb") m.kind = sweep::ModelKind::gsb;
             else if (k == "pf-toy" || k == "pf_toy") m.kind = sweep::ModelKind::pf_toy;
             else throw std::invalid_argument("expected spin-boson, gsb or pf-toy, got '" + v + "'");
         }},
        {"coupling", [&](const std::string& v) { m.coupling = parse_double(v); }},
        {"cutoff", [&](const std::string& v) { m.cutoff = to_int(v); }},
        {"dimension_cap",
         [&](const std::string& v) {
             const long long c = parse_int(v);
             if (c <= 0) throw std::invalid_argument("must be positive");
             m.dimension_cap = static_cast<std::size_t>(c);
         }},
        {"epsilon", [&](const std::string& v) { m.epsilon = parse_double(v); }},
        {"delta", [&](const std::string& v) { m.delta = parse_double(v); }},
        {"beta", [&](const std::string& v) { m.beta = parse_double(v); }},
        {"atom", [&](const std::string& v) { m.atom = parse_matrix(v); }},
        {"sites", [&](const std::string& v) { m.sites = to_int(v); }},
        {"length", [&](const std::string& v) { m.length = parse_double(v); }},
        {"electron_mass", [&](const std::string& v) { m.electron_mass = parse_double(v); }},
        {"well_depth", [&](const std::string& v) { m.well_depth = parse_double(v); }},
        {"well_half_width", [&](const std::string& v) { m.well_half_width = parse_double(v); }},
        {"uv_cutoff", [&](const std::string& v) { m.uv_cutoff = parse_double(v); }},
    };
    const std::map<std::string, Handler> grid_keys{
        {"k_min", [&](const std::string& v) { m.k_min = parse_double(v); }},
        {"k_max", [&](const std::string& v) { m.k_max = parse_double(v); }},
        {"modes", [&](const std::string& v) { m.modes = to_int(v); }},
        {"mass", [&](const std::string& v) { m.mass = parse_double(v); }},
        {"quadrature",
         [&](const std::string& v) {
             const std::string q = lower(v);
             if (q == "uniform") m.quadrature = model::Quadrature::uniform_midpoint;
             else if (q == "log") m.quadrature = model::Quadrature::log_midpoint;
             else throw std::invalid_argument("expected uniform or log, got '" + v + "'");
         }},
    };
    const std::map<std::string, Handler> solver_keys{
        {"dense_threshold", [&](const std::string& v) { s.dense_threshold = to_int(v); }},
        {"eigen_tolerance", [&](const std::string& v) { s.eigen_tolerance = parse_double(v); }},
        {"degeneracy_gap", [&](const std::string& v) { s.degeneracy_gap = parse_double(v); }},
        {"lanczos_max_iterations", [&](const std::string& v) { s.lanczos_max_iterations = to_int(v); }},
        {"lanczos_max_restarts", [&](const std::string& v) { s.lanczos_max_restarts = to_int(v); }},
        {"cg_tolerance", [&](const std::string& v) { s.cg_tolerance = parse_double(v); }},
        {"cg_max_iterations", [&](const std::string& v) { s.cg_max_iterations = to_int(v); }},
        {"seed",
         [&](const std::string& v) {
             const long long x = parse_int(v);
             if (x < 0) throw std::invalid_argument("must be non-negative");
             s.seed = static_cast<std::uint64_t>(x);
         }},
    };
    std::map<std::string, Handler> check_keys{
        {"enabled", [&](const std::string& v) { cfg.checks_spec = v; }},
        {"random_states", [&](const std::string& v) { o.random_states = to_int(v); }},
        {"unitaries", [&](const std::string& v) { o.unitaries = to_int(v); }},
        {"massive_states", [&](const std::string& v) { o.massive_states = to_int(v); }},
        {"z", [&](const std::string& v) { o.z = parse_complex(v); }},
        {"ir_regime",
         [&](const std::string& v) {
             const std::string r = lower(v);
             if (r == "regular") o.ir_regime = verify::IrRegime::regular;
             else if (r == "critical") o.ir_regime = verify::IrRegime::critical;
             else throw std::invalid_argument("expected regular or critical, got '" + v + "'");
         }},
    };
    for (const auto& k : kToleranceKeys)
        check_keys["tolerance." + k] = [&o, k](const std::string& v) { tolerance_field(o.tol, k) = parse_double(v); };
    const std::map<std::string, Handler> output_keys{
        {"dir", [&](const std::string& v) { cfg.out_dir = v; }},
        {"format", [&](const std::string& v) { cfg.format = parse_format(v); }},
        {"timings", [&](const std::string& v) { cfg.timings = parse_bool(v); }},
    };

    auto run = [&err](const std::map<std::string, Handler>& keys, const std::string& section, const pt::ptree& body) {
        for (const auto& [key, node] : body) {
            const auto it = keys.find(key);
            if (it == keys.end()) {
                err.push_back(section + "." + key + ": unknown key");
                continue;
            }
            try {
                it->second(trim(node.data()));
            } catch (const std::exception& e) {
                err.push_back(section + "." + key + ": " + e.what());
            }
        }
    };

    std::map<int, sweep::CouplingRecipe> couplings;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            static const std::vector<std::string> known{"model", "grid", "solver", "checks", "sweep", "output"};
            if (std::find(known.begin(), known.end(), section) == known.end() && section.rfind("coupling.", 0) != 0)
                err.push_back(section + ": unknown section, or a key outside any section");
            continue;
        }
        if (section == "model") {
            pt::ptree rest;
            for (const auto& [key, node] : body) {
                const std::string k = canonical_axis(key);
                if (k == "coupling") {
                    if (!coupling_key.empty()) {
                        err.push_back("model." + key + ": coupling already given as model." + coupling_key);
                        continue;
                    }
                    coupling_key = key;
                }
                rest.push_back({k, node});
            }
            run(model_keys, "model", rest);
        } else if (section == "grid") {
            run(grid_keys, "grid", body);
        } else if (section == "solver") {
            run(solver_keys, "solver", body);
        } else if (section == "checks") {
            run(check_keys, "checks", body);
        } else if (section == "output") {
            run(output_keys, "output", body);
        } else if (section == "sweep") {
            for (const auto& [key, node] : body) {
                const std::string k = canonical_axis(key);
                try {
                    if (k == "cap") {
                        const long long c = parse_int(node.data());
                        if (c < 1) throw std::invalid_argument("must be at least 1");
                        cfg.cell_cap = static_cast<std::size_t>(c);
                    } else if (k == "threads") {
                        cfg.threads = to_int(node.data());
                    } else if (sweep::ModelRecipe::is_axis(k)) {
                        if (std::any_of(cfg.axes.begin(), cfg.axes.end(),
                                        [&k](const sweep::SweepAxis& a) { return a.name == k; }))
                            throw std::invalid_argument("axis given twice");
                        cfg.axes.push_back({k, parse_list(node.data())});
                    } else {
                        err.push_back("sweep." + key + ": unknown key");
                    }
                } catch (const std::exception& e) {
                    err.push_back("sweep." + key + ": " + e.what());
                }
            }
        } else if (section.rfind("coupling.", 0) == 0) {
            int index = 0;
            try {
                index = to_int(section.substr(9));
                if (index < 1) throw std::invalid_argument("");
            } catch (const std::exception&) {
                err.push_back(section + ": coupling sections are numbered [coupling.1], [coupling.2], ...");
                continue;
            }
            auto& c = couplings[index];
            const std::map<std::string, Handler> keys{
                {"b", [&c](const std::string& v) { c.b = parse_matrix(v); }},
                {"beta", [&c](const std::string& v) { c.beta = parse_double(v); }},
                {"scale", [&c](const std::string& v) { c.scale = parse_double(v); }},
            };
            run(keys, section, body);
        } else {
            err.push_back("[" + section + "]: unknown section");
        }
    }
    int expect = 1;
    for (const auto& [i, c] : couplings) {
        if (i != expect) {
            err.push_back("coupling." + std::to_string(expect) + ": missing (sections must be numbered consecutively)");
            break;
        }
        if (c.b.size() == 0) err.push_back("coupling." + std::to_string(i) + ".b: required");
        ++expect;
    }
    for (const auto& [i, c] : couplings) m.couplings.push_back(c);
    if (m.kind != sweep::ModelKind::gsb && !couplings.empty())
        err.push_back("coupling: [coupling.N] sections apply to kind = gsb only");
    if (m.kind != sweep::ModelKind::gsb && m.atom.size() != 0) err.push_back("model.atom: applies to kind = gsb only");

    collect_semantic_errors(cfg, err);
    if (!err.empty()) throw ConfigError(std::move(err));
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path.string() + ": cannot open"});
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

}  // namespace fockgs::config
