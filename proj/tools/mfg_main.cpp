// Command-line front end: solve / diagnose / probe / export.
//
// Exit codes: 0 success, 1 config or input error, 2 non-convergence
// (artifacts still written), 3 probe failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfg/assumptions.hpp"
#include "mfg/config.hpp"
#include "mfg/diagnostics.hpp"
#include "mfg/errors.hpp"
#include "mfg/fixedpoint.hpp"
#include "mfg/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string eps_list;
    bool quiet = false;
};

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw mfg::ConfigError("--eps: malformed entry `" + tok + "`");
        out.push_back(v);
    }
    if (out.empty()) throw mfg::ConfigError("--eps: empty list");
    return out;
}

// Precedence: --out flag, then MFG_OUT_DIR, then the config's output block.
std::string resolve_out_dir(const CommonArgs& args, const mfg::RunSetup& setup) {
    if (!args.out_dir.empty()) return args.out_dir;
    if (const char* env = std::getenv("MFG_OUT_DIR"); env && *env) return env;
    return setup.output_directory;
}

void apply_overrides(const CommonArgs& args, mfg::RunSetup& setup) {
    if (args.seed_set) setup.diagnostics.seed = args.seed;
    if (!args.eps_list.empty()) {
        setup.schedule = parse_eps_list(args.eps_list);
        for (double e : setup.schedule)
            if (!(e > 0.0 && e < 1.0)) throw mfg::ConfigError("--eps: entries must lie in (0,1)");
        for (size_t i = 1; i < setup.schedule.size(); ++i)
            if (!(setup.schedule[i] < setup.schedule[i - 1]))
                throw mfg::ConfigError("--eps: entries must decrease strictly");
        setup.reg.epsilon = setup.schedule.front();
    }
}

int cmd_solve(const CommonArgs& args) {
    mfg::RunConfig cfg = mfg::RunConfig::parse_file(args.config_path);
    mfg::RunSetup setup = cfg.build();
    apply_overrides(args, setup);

    mfg::WeakSolution sol =
        mfg::epsilon_continuation(setup.problem, setup.reg, setup.schedule, setup.solver);

    mfg::DiffPlan plan(setup.problem.grid, setup.reg.k);
    mfg::RegularizationConfig reg_final = setup.reg;
    reg_final.epsilon = sol.history.back().epsilon;
    mfg::DiagnosticsReport diag = mfg::run_diagnostics(
        sol.density, sol.fields.back().second, sol.value_tilde, setup.problem, reg_final, plan,
        setup.diagnostics);

    const fs::path run_dir = fs::path(resolve_out_dir(args, setup)) / cfg.content_hash_hex();
    fs::create_directories(run_dir);

    mfg::FieldBundle bundle{sol.density, sol.value, sol.value_tilde};
    mfg::write_fields_csv((run_dir / "fields.csv").string(), bundle);
    {
        std::ofstream rep(run_dir / "report.json", std::ios::binary);
        rep << mfg::report_json(sol, &diag, cfg.content_hash_hex());
    }
    {
        std::ofstream snap(run_dir / "config.snapshot", std::ios::binary);
        snap << cfg.raw_text();
    }
    {
        std::ofstream man(run_dir / "manifest.json", std::ios::binary);
        man << mfg::manifest_json(sol, cfg.content_hash_hex(),
                                  {"fields.csv", "report.json", "config.snapshot"});
    }

    if (!args.quiet) {
        std::cout << "run " << cfg.content_hash_hex() << " -> " << run_dir.string() << "\n";
        for (const auto& r : sol.history)
            std::cout << "  eps " << r.epsilon << ": " << (r.converged ? "converged" : "STALLED")
                      << " in " << r.iterations << " iterations, residual " << r.residual
                      << ", mass deviation " << r.mass_deviation << "\n";
    }
    return sol.converged ? 0 : 2;
}

int cmd_diagnose(const CommonArgs& args, const std::string& fields_path) {
    mfg::RunConfig cfg = mfg::RunConfig::parse_file(args.config_path);
    mfg::RunSetup setup = cfg.build();
    apply_overrides(args, setup);

    mfg::FieldBundle bundle{mfg::SpaceTimeField(), mfg::SpaceTimeField(), mfg::SpaceTimeField()};
    if (!fields_path.empty()) {
        bundle = mfg::read_fields_csv(fields_path, setup.problem.grid);
    } else {
        mfg::WeakSolution sol =
            mfg::epsilon_continuation(setup.problem, setup.reg, setup.schedule, setup.solver);
        bundle = mfg::FieldBundle{sol.density, sol.value, sol.value_tilde};
    }

    mfg::DiffPlan plan(setup.problem.grid, setup.reg.k);
    mfg::RegularizationConfig reg_final = setup.reg;
    reg_final.epsilon = setup.schedule.back();
    mfg::DiagnosticsReport diag =
        mfg::run_diagnostics(bundle.density, bundle.value, bundle.value_tilde, setup.problem,
                             reg_final, plan, setup.diagnostics);

    // Reuse the report writer with a single-record shell around the fields.
    mfg::WeakSolution shell;
    mfg::EpsilonRecord rec;
    rec.epsilon = reg_final.epsilon;
    rec.mass_deviation = diag.mass_deviation;
    rec.converged = true;
    shell.history.push_back(rec);
    shell.mu = diag.mu;
    shell.mu_deviation = Eigen::VectorXd::Constant(1, diag.mu_max_deviation);
    shell.converged = true;
    const std::string text = mfg::report_json(shell, &diag, cfg.content_hash_hex());

    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        std::ofstream rep(fs::path(args.out_dir) / "diagnose.json", std::ios::binary);
        rep << text;
    }
    if (!args.quiet) std::cout << text;
    return 0;
}

int cmd_probe(const CommonArgs& args) {
    mfg::RunConfig cfg = mfg::RunConfig::parse_file(args.config_path);
    mfg::RunSetup setup = cfg.build();
    apply_overrides(args, setup);

    mfg::AssumptionReport assumptions =
        mfg::probe_assumptions(setup.problem, 200, setup.diagnostics.seed);
    mfg::DiffPlan plan(setup.problem.grid, setup.reg.k);
    mfg::MonotonicityProbe mono =
        mfg::monotonicity_probe(setup.problem, plan, setup.reg.epsilon,
                                setup.diagnostics.monotonicity_samples, setup.diagnostics.seed);

    const std::string text = mfg::probe_json(assumptions, mono);
    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        std::ofstream rep(fs::path(args.out_dir) / "probe.json", std::ios::binary);
        rep << text;
    }
    if (!args.quiet) std::cout << text;
    const bool ok = assumptions.all_ok() && mono.base_ok && mono.regularized_ok;
    return ok ? 0 : 3;
}

int cmd_export(const CommonArgs& args, const std::string& run_dir_arg,
               const std::string& fields_path_arg) {
    mfg::RunConfig cfg = mfg::RunConfig::parse_file(args.config_path);
    mfg::RunSetup setup = cfg.build();

    std::string fields_path = fields_path_arg;
    if (fields_path.empty() && !run_dir_arg.empty())
        fields_path = (fs::path(run_dir_arg) / "fields.csv").string();
    if (fields_path.empty()) throw mfg::ConfigError("export: need --run or --fields");

    mfg::FieldBundle bundle = mfg::read_fields_csv(fields_path, setup.problem.grid);
    mfg::DiffPlan plan(setup.problem.grid, setup.reg.k);
    mfg::MultiplierSeries mult =
        mfg::recover_multiplier(bundle.density, bundle.value_tilde, setup.problem, plan);

    const fs::path out_dir = args.out_dir.empty()
                                 ? fs::path(fields_path).parent_path()
                                 : fs::path(args.out_dir);
    fs::create_directories(out_dir);
    mfg::write_series_csv((out_dir / "series.csv").string(), bundle, mult.mu);
    mfg::write_profiles_csv((out_dir / "profiles.csv").string(), bundle);
    if (!args.quiet)
        std::cout << "wrote " << (out_dir / "series.csv").string() << " and "
                  << (out_dir / "profiles.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monotone mean-field game solver on the space-time torus"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string fields_path;
    std::string run_dir;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        auto* opt = sub->add_option("--config", args.config_path, "config file path");
        if (needs_config) opt->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config and env)");
        sub->add_option("--seed", args.seed, "diagnostics seed override")
            ->each([&](const std::string&) { args.seed_set = true; });
        sub->add_option("--eps", args.eps_list, "comma-separated epsilon schedule override");
        sub->add_flag("--quiet", args.quiet, "suppress stdout");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the continuation solver");
    add_common(solve);
    CLI::App* diagnose = app.add_subcommand("diagnose", "verify estimates on fields");
    add_common(diagnose);
    diagnose->add_option("--fields", fields_path, "fields.csv produced by solve");
    CLI::App* probe = app.add_subcommand("probe", "check structural hypotheses");
    add_common(probe);
    CLI::App* exportc = app.add_subcommand("export", "emit plot-ready CSV series");
    add_common(exportc);
    exportc->add_option("--run", run_dir, "run directory produced by solve");
    exportc->add_option("--fields", fields_path, "fields.csv path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(args);
        if (diagnose->parsed()) return cmd_diagnose(args, fields_path);
        if (probe->parsed()) return cmd_probe(args);
        if (exportc->parsed()) return cmd_export(args, run_dir, fields_path);
    } catch (const mfg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
