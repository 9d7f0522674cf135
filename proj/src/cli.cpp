#include "fockgs/cli.hpp"

#include "fockgs/config.hpp"
#include "fockgs/report.hpp"
#include "fockgs/sweep.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

namespace fockgs::cli {

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> checks;
    std::optional<int> threads;
};

std::vector<report::ReportRecord> cmd_build(const config::RunConfig& cfg, const report::Provenance& p) {
    const model::AssembledModel m = cfg.model.assemble();
    report::ReportRecord r;
    r.kind = "build";
    r.status = "ok";
    r.note = m.source;
    r.provenance = p;
    r.values = {{"dimension", static_cast<double>(m.dim())},
                {"atom_dimension", m.atom_dim},
                {"fock_dimension", static_cast<double>(m.fock_dim())},
                {"modes", m.modes()},
                {"cutoff", m.cutoff()},
                {"nonzeros", static_cast<double>(m.h.nonZeros())},
                {"coupling", m.g},
                {"interaction_reach", m.interaction_reach},
                {"atom_energy", m.atom_energy},
                {"atom_multiplicity", m.atom_multiplicity},
                {"atom_gap", m.atom_gap}};
    return {r};
}

std::vector<report::ReportRecord> cmd_spectrum(const config::RunConfig& cfg, const report::Provenance& p) {
    const model::AssembledModel m = cfg.model.assemble();
    if (m.dim() > cfg.solver.dense_threshold)
        throw config::ConfigError({"solver.dense_threshold: spectrum needs dimension " + std::to_string(m.dim()) +
                                   " <= dense_threshold = " + std::to_string(cfg.solver.dense_threshold)});
    const RealVector ev = spectral::full_spectrum_small(m.h, cfg.solver);
    std::vector<report::ReportRecord> out;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        report::ReportRecord r;
        r.kind = "eigenvalue";
        r.status = "ok";
        r.provenance = p;
        r.values = {{"index", static_cast<double>(i)}, {"energy", ev[i]}};
        out.push_back(std::move(r));
    }
    return out;
}

int execute(const std::string& command, const Overrides& o, std::ostream& out, std::ostream& err) {
    config::RunConfig cfg;
    try {
        cfg = config::load_config(o.config);
        if (o.seed) cfg.solver.seed = *o.seed;
        if (o.out) cfg.out_dir = *o.out;
        if (o.format) cfg.format = config::parse_format(*o.format);
        if (o.checks) cfg.checks_spec = *o.checks;
        if (o.threads) cfg.threads = *o.threads;
        config::validate(cfg);
        if (command == "verify") {
            std::vector<std::string> trends;
            for (const auto& c : cfg.checks)
                if (sweep::is_trend_check(c)) trends.push_back(c);
            if (!trends.empty() && cfg.checks_spec != "all")
                throw config::ConfigError({"checks.enabled: " + trends.front() + " is a sweep-level check; use the sweep command"});
            std::erase_if(cfg.checks, [](const std::string& c) { return sweep::is_trend_check(c); });
        }
        if (command == "sweep" && cfg.axes.empty())
            throw config::ConfigError({"sweep: the sweep command needs at least one axis in [sweep]"});
    } catch (const config::ConfigError& e) {
        err << "fockgs: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        err << "fockgs: configuration error: " << e.what() << '\n';
        return config_error;
    }

    const report::Provenance prov = report::make_provenance(cfg.hash, cfg.seed());
    std::vector<report::ReportRecord> records;
    try {
        if (command == "build") {
            records = cmd_build(cfg, prov);
        } else if (command == "spectrum") {
            records = cmd_spectrum(cfg, prov);
        } else if (command == "solve") {
            records = report::from_cell(sweep::run_cell(cfg.model, {}, cfg.solver, cfg.options, cfg.seed()), prov,
                                        cfg.timings);
        } else if (command == "verify") {
            records = report::from_cell(sweep::run_cell(cfg.model, cfg.checks, cfg.solver, cfg.options, cfg.seed()),
                                        prov, cfg.timings);
        } else {
            records = report::from_sweep(sweep::run_sweep(cfg.plan()), prov, cfg.timings);
        }
    } catch (const config::ConfigError& e) {
        err << "fockgs: " << e.what() << '\n';
        return config_error;
    } catch (const SolverError& e) {
        err << "fockgs: solver did not converge: " << e.what() << '\n';
        return solver_failure;
    } catch (const std::exception& e) {
        err << "fockgs: " << e.what() << '\n';
        return config_error;
    }

    const std::string text = report::render(records, cfg.format);
    if (cfg.out_dir.empty()) {
        out << text;
        out.flush();
    } else {
        const auto path = std::filesystem::path(cfg.out_dir) /
                          (command + (cfg.format == config::Format::json ? ".jsonl" : ".csv"));
        try {
            report::write_file(path, text);
        } catch (const std::exception& e) {
            err << "fockgs: " << e.what() << '\n';
            return config_error;
        }
        err << "fockgs: wrote " << path.string() << '\n';
    }

    const int code = report::exit_status(records);
    std::size_t checks = 0, failed = 0, cells_failed = 0;
    for (const auto& r : records) {
        if (r.kind == "check" || r.kind == "trend") {
            ++checks;
            if (r.status == "fail") ++failed;
        }
        if (r.kind == "cell" && r.status != "ok") ++cells_failed;
    }
    err << "fockgs " << command << ": " << records.size() << " records, " << checks << " checks, " << failed
        << " failed, " << cells_failed << " failed cells (exit " << code << ")\n";
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ground-state verification for truncated Fock-space models", "fockgs"};
    app.set_version_flag("--version", FOCKGS_VERSION);
    app.require_subcommand(1);

    Overrides o;
    std::string command;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"build", "assemble the model and report dimensions"},
        {"solve", "compute the ground eigenspace"},
        {"verify", "run the selected checks on one model"},
        {"sweep", "run the [sweep] plan"},
        {"spectrum", "dump every eigenvalue (dense sizes only)"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed (overrides [solver] seed)");
        sub->add_option("--out", o.out, "output directory (default: stdout)");
        sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--checks", o.checks, "comma-separated check names, 'all' or 'none'");
        sub->add_option("--threads", o.threads, "sweep worker threads")->check(CLI::PositiveNumber);
        sub->callback([&command, name = name] { command = name; });
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }
    return execute(command, o, out, err);
}

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace fockgs::cli
