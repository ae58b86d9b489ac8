#include "mfg/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json energy_json(const EnergyReport& e) {
    return json{{"coupling_integral", e.coupling_integral},
                {"weighted_gradient_integral", e.weighted_gradient_integral},
                {"initial_weighted_gradient_integral", e.initial_weighted_gradient_integral},
                {"eps_energy", e.eps_energy},
                {"gradient_l1", e.gradient_l1},
                {"gradient_lgamma", e.gradient_lgamma},
                {"rhs_driver", e.rhs_driver},
                {"lhs_over_rhs", e.lhs_over_rhs}};
}

}  // namespace

void write_fields_csv(const std::string& path, const FieldBundle& fields) {
    const SpaceTimeField& m = fields.density;
    const GridPtr& grid = m.grid();
    fields.value.require_same_grid(m, "write_fields_csv");
    fields.value_tilde.require_same_grid(m, "write_fields_csv");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    const int d = grid->torus.dim();
    out << (d == 1 ? "t,x,m,u,u_tilde\n" : "t,x1,x2,m,u,u_tilde\n");
    const int nx = grid->torus.points_per_dim();
    for (int i = 0; i < grid->rows(); ++i) {
        const double t = grid->time.node(i);
        for (int j = 0; j < grid->cols(); ++j) {
            out << fmt17(t) << ',';
            if (d == 1) {
                out << fmt17(grid->torus.coord(j));
            } else {
                out << fmt17(grid->torus.coord(j / nx)) << ',' << fmt17(grid->torus.coord(j % nx));
            }
            out << ',' << fmt17(fields.density(i, j)) << ',' << fmt17(fields.value(i, j)) << ','
                << fmt17(fields.value_tilde(i, j)) << '\n';
        }
    }
}

FieldBundle read_fields_csv(const std::string& path, const GridPtr& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open fields file: " + path);
    const int d = grid->torus.dim();
    const std::string expected_header = d == 1 ? "t,x,m,u,u_tilde" : "t,x1,x2,m,u,u_tilde";

    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw ConfigError(path + " row 1: header must be exactly `" + expected_header + "`");

    FieldBundle out{SpaceTimeField::zeros(grid), SpaceTimeField::zeros(grid),
                    SpaceTimeField::zeros(grid)};
    const int nx = grid->torus.points_per_dim();
    const int expected_cols = d == 1 ? 5 : 6;
    long expected_rows = static_cast<long>(grid->rows()) * grid->cols();
    long row = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= expected_rows)
            throw ConfigError(path + " row " + std::to_string(lineno) +
                              ": more rows than the declared grid holds");
        double cols[6];
        int got = 0;
        size_t start = 0;
        while (got < 6 && start <= line.size()) {
            size_t comma = line.find(',', start);
            const std::string tok =
                line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            char* end = nullptr;
            cols[got] = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw ConfigError(path + " row " + std::to_string(lineno) +
                                  ": malformed number `" + tok + "`");
            ++got;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (got != expected_cols)
            throw ConfigError(path + " row " + std::to_string(lineno) + ": expected " +
                              std::to_string(expected_cols) + " columns, got " +
                              std::to_string(got));

        const int i = static_cast<int>(row / grid->cols());
        const int j = static_cast<int>(row % grid->cols());
        const double t_expect = grid->time.node(i);
        double x1_expect, x2_expect = 0.0;
        if (d == 1) {
            x1_expect = grid->torus.coord(j);
        } else {
            x1_expect = grid->torus.coord(j / nx);
            x2_expect = grid->torus.coord(j % nx);
        }
        const double tol = 1e-9;
        const bool grid_ok = std::abs(cols[0] - t_expect) <= tol &&
                             std::abs(cols[1] - x1_expect) <= tol &&
                             (d == 1 || std::abs(cols[2] - x2_expect) <= tol);
        if (!grid_ok)
            throw ConfigError(path + " row " + std::to_string(lineno) +
                              ": coordinates do not match the declared grid");
        const int base = d == 1 ? 2 : 3;
        out.density(i, j) = cols[base];
        out.value(i, j) = cols[base + 1];
        out.value_tilde(i, j) = cols[base + 2];
        ++row;
    }
    if (row != expected_rows)
        throw ConfigError(path + ": expected " + std::to_string(expected_rows) + " data rows, got " +
                          std::to_string(row));
    return out;
}

std::string report_json(const WeakSolution& solution, const DiagnosticsReport* diagnostics,
                        const std::string& config_hash) {
    json per_eps = json::array();
    for (const auto& r : solution.history)
        per_eps.push_back({{"epsilon", r.epsilon},
                           {"iterations", r.iterations},
                           {"residual", r.residual},
                           {"converged", r.converged},
                           {"gradient_lgamma", r.gradient_lgamma},
                           {"sqrt_eps_energy_m", r.sqrt_eps_energy_m},
                           {"sqrt_eps_energy_u", r.sqrt_eps_energy_u},
                           {"mass_deviation", r.mass_deviation}});

    json j{{"schema", "mfg-report-v1"},
           {"config_hash", config_hash},
           {"converged", solution.converged},
           {"per_epsilon", per_eps},
           {"max_mass_deviation", solution.history.back().mass_deviation},
           {"mu", std::vector<double>(solution.mu.data(), solution.mu.data() + solution.mu.size())},
           {"mu_max_deviation",
            solution.mu_deviation.size() ? solution.mu_deviation.maxCoeff() : 0.0}};

    if (diagnostics) {
        const DiagnosticsReport& d = *diagnostics;
        j["energy"] = energy_json(d.energy);
        j["mass_deviation"] = d.mass_deviation;
        j["monotonicity"] = {{"base_min", d.monotonicity.base_min},
                             {"regularized_min", d.monotonicity.regularized_min},
                             {"gap_min", d.monotonicity.gap_min},
                             {"samples", d.monotonicity.samples},
                             {"passed", d.monotonicity.base_ok && d.monotonicity.regularized_ok}};
        j["minty"] = {{"minimum", d.minty.minimum},
                      {"samples", d.minty.samples},
                      {"note", "sampled check: corroborates, does not prove"}};
        j["weak_transport_residual"] = d.weak_transport_residual;
        j["hj_subsolution"] = {{"in_scope", d.hj_subsolution_in_scope},
                               {"max_value", d.hj_subsolution.max_value},
                               {"samples", d.hj_subsolution.samples}};
        j["pde_residuals"] = {{"hj_l2", d.pde.hj_l2},
                              {"hj_linf", d.pde.hj_linf},
                              {"active_fraction", d.pde.active_fraction},
                              {"transport_l2", d.pde.transport_l2},
                              {"transport_linf", d.pde.transport_linf}};
    }
    return j.dump(2) + "\n";
}

std::string manifest_json(const WeakSolution& solution, const std::string& config_hash,
                          const std::vector<std::string>& files) {
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));

    json per_eps = json::array();
    for (const auto& r : solution.history)
        per_eps.push_back({{"epsilon", r.epsilon},
                           {"iterations", r.iterations},
                           {"converged", r.converged}});
    json j{{"schema", "mfg-manifest-v1"},
           {"config_hash", config_hash},
           {"code_version", "0.1.0"},
           {"created", stamp},
           {"per_epsilon", per_eps},
           {"files", files}};
    return j.dump(2) + "\n";
}

std::string probe_json(const AssumptionReport& a, const MonotonicityProbe& m) {
    json j{{"schema", "mfg-probe-v1"},
           {"hamiltonian",
            {{"convexity_gap_min", a.convexity_gap_min},
             {"convexity_ok", a.convexity_ok},
             {"gradient_monotonicity_min", a.gradient_monotonicity_min},
             {"gradient_monotonicity_ok", a.gradient_monotonicity_ok},
             {"coercivity_constant", a.coercivity_constant},
             {"lower_growth_constant", a.lower_growth_constant},
             {"gradient_growth_constant", a.gradient_growth_constant},
             {"growth_ok", a.growth_ok},
             {"gradient_fd_error", a.gradient_fd_error},
             {"gradient_fd_ok", a.gradient_fd_ok}}},
           {"coupling",
            {{"monotonicity_min", a.coupling_monotonicity_min},
             {"monotonicity_ok", a.coupling_monotonicity_ok}}},
           {"joint_operator",
            {{"base_min", m.base_min},
             {"regularized_min", m.regularized_min},
             {"gap_min", m.gap_min},
             {"samples", m.samples},
             {"passed", m.base_ok && m.regularized_ok}}},
           {"note", "sampled checks at documented seeds; they corroborate, not prove"},
           {"all_passed", a.all_ok() && m.base_ok && m.regularized_ok}};
    return j.dump(2) + "\n";
}

void write_series_csv(const std::string& path, const FieldBundle& fields,
                      const Eigen::VectorXd& mu) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    const Eigen::VectorXd mass = mass_per_slice(fields.density);
    const Eigen::VectorXd mean_u = spatial_mean(fields.value);
    out << "t,mass,mean_u,mu,min_m,max_m\n";
    for (int i = 0; i < fields.density.rows(); ++i) {
        out << fmt17(fields.density.time().node(i)) << ',' << fmt17(mass[i]) << ','
            << fmt17(mean_u[i]) << ',' << fmt17(i < mu.size() ? mu[i] : 0.0) << ','
            << fmt17(fields.density.values().row(i).minCoeff()) << ','
            << fmt17(fields.density.values().row(i).maxCoeff()) << '\n';
    }
}

void write_profiles_csv(const std::string& path, const FieldBundle& fields) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    const int nt = fields.density.rows();
    const int slices[3] = {0, nt / 2, nt - 1};
    out << "slice,t,site,m,u,u_tilde\n";
    for (int s = 0; s < 3; ++s) {
        const int i = slices[s];
        for (int j = 0; j < fields.density.cols(); ++j)
            out << s << ',' << fmt17(fields.density.time().node(i)) << ',' << j << ','
                << fmt17(fields.density(i, j)) << ',' << fmt17(fields.value(i, j)) << ','
                << fmt17(fields.value_tilde(i, j)) << '\n';
    }
}

}  // namespace mfg
