#include "mfg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/expr.hpp"

namespace mfg {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_full_number(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != nullptr && *end == '\0' && !s.empty();
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& name) {
    RunConfig cfg;
    cfg.raw_ = text;
    cfg.name_ = name;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected `key = value`",
                              "", lineno);
        const std::string key = trim(line.substr(0, eq));
        std::string rhs = trim(line.substr(eq + 1));
        if (key.empty() || rhs.empty())
            throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key or value", key,
                              lineno);
        if (cfg.values_.count(key))
            throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`",
                              key, lineno);

        Value v;
        v.line = lineno;
        if (rhs.front() == '[') {
            if (rhs.back() != ']')
                throw ConfigError(name + ":" + std::to_string(lineno) + ": unterminated list", key,
                                  lineno);
            v.kind = Value::Kind::list;
            std::string body = rhs.substr(1, rhs.size() - 2);
            std::istringstream items(body);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                double num;
                if (!parse_full_number(item, num))
                    throw ConfigError(name + ":" + std::to_string(lineno) +
                                          ": list entries must be numbers, got `" + item + "`",
                                      key, lineno);
                v.list.push_back(num);
            }
        } else if (rhs.front() == '"') {
            if (rhs.size() < 2 || rhs.back() != '"')
                throw ConfigError(name + ":" + std::to_string(lineno) + ": unterminated string",
                                  key, lineno);
            v.kind = Value::Kind::string;
            v.str = rhs.substr(1, rhs.size() - 2);
        } else if (rhs == "true" || rhs == "false") {
            v.kind = Value::Kind::boolean;
            v.flag = rhs == "true";
        } else {
            double num;
            if (parse_full_number(rhs, num)) {
                v.kind = Value::Kind::number;
                v.num = num;
            } else {
                v.kind = Value::Kind::string;
                v.str = rhs;
            }
        }
        cfg.values_.emplace(key, std::move(v));
    }
    return cfg;
}

const RunConfig::Value* RunConfig::find(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

void RunConfig::fail(const std::string& key, const std::string& msg) const {
    const Value* v = nullptr;
    auto it = values_.find(key);
    if (it != values_.end()) v = &it->second;
    std::string where = name_;
    if (v) where += ":" + std::to_string(v->line);
    throw ConfigError(where + ": " + key + ": " + msg, key, v ? v->line : 0);
}

double RunConfig::number_or(const std::string& key, double fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::number) fail(key, "expected a number");
    return v->num;
}

int RunConfig::integer_or(const std::string& key, int fallback) const {
    const double d = number_or(key, fallback);
    const int i = static_cast<int>(d);
    if (d != i) fail(key, "expected an integer");
    return i;
}

bool RunConfig::flag_or(const std::string& key, bool fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::boolean) fail(key, "expected true or false");
    return v->flag;
}

std::string RunConfig::string_or(const std::string& key, const std::string& fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind == Value::Kind::string) return v->str;
    if (v->kind == Value::Kind::number) {
        std::ostringstream out;
        out.precision(17);
        out << v->num;
        return out.str();
    }
    fail(key, "expected a string");
}

std::vector<double> RunConfig::list_or(const std::string& key, std::vector<double> fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::list) fail(key, "expected a list like [1e-1, 1e-2]");
    return v->list;
}

std::uint64_t RunConfig::content_hash() const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : raw_) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string RunConfig::content_hash_hex() const {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = content_hash();
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

RunSetup RunConfig::build() const {
    RunSetup setup;

    const int dim = integer_or("problem.dim", 1);
    if (dim != 1 && dim != 2) fail("problem.dim", "dimension must be 1 or 2");
    const double horizon = number_or("problem.horizon", 1.0);
    if (!(horizon > 0.0)) fail("problem.horizon", "horizon must be positive");
    const int nt = integer_or("grid.time_nodes", 24);
    const int nx = integer_or("grid.space_nodes", 24);
    const int k = integer_or("grid.regularity", 3);

    GridPtr grid;
    try {
        grid = make_grid(horizon, nt, dim, nx);
    } catch (const std::exception& e) {
        fail("grid.time_nodes", std::string("invalid grid: ") + e.what());
    }

    auto expr_profile = [&](const std::string& key, const std::string& fallback) {
        const std::string text = string_or(key, fallback);
        try {
            Expression e = Expression::parse(text, dim);
            if (e.time_dependent()) fail(key, "must not depend on t");
            return e.profile(grid->torus);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            fail(key, ex.what());
        }
    };
    auto expr_field = [&](const std::string& key, const std::string& fallback) {
        const std::string text = string_or(key, fallback);
        try {
            return Expression::parse(text, dim).sample(grid);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            fail(key, ex.what());
        }
    };

    MFGProblem& prob = setup.problem;
    prob.grid = grid;

    const std::string variant = string_or("problem.hamiltonian.variant", "quadratic");
    if (variant == "quadratic")
        prob.hamiltonian.kind = HamiltonianKind::quadratic;
    else if (variant == "power")
        prob.hamiltonian.kind = HamiltonianKind::power;
    else if (variant == "congestion")
        prob.hamiltonian.kind = HamiltonianKind::congestion;
    else
        fail("problem.hamiltonian.variant", "unknown variant `" + variant +
                                                "` (quadratic | power | congestion)");

    prob.hamiltonian.gamma = number_or("problem.hamiltonian.gamma", 2.0);
    if (!(prob.hamiltonian.gamma > 1.0))
        fail("problem.hamiltonian.gamma",
             "the growth exponent gamma must exceed 1, got " +
                 std::to_string(prob.hamiltonian.gamma));
    prob.hamiltonian.tau = number_or("problem.hamiltonian.tau", 0.5);
    if (prob.hamiltonian.kind == HamiltonianKind::congestion &&
        !(prob.hamiltonian.tau > 0.0 && prob.hamiltonian.tau < 1.0))
        fail("problem.hamiltonian.tau", "congestion exponent tau must lie in (0,1)");

    if (prob.hamiltonian.kind != HamiltonianKind::quadratic) {
        prob.hamiltonian.coefficient = expr_profile("problem.hamiltonian.c", "1");
        if (prob.hamiltonian.coefficient.minCoeff() <= 0.0)
            fail("problem.hamiltonian.c", "coefficient c(x) must be strictly positive");
    }
    if (prob.hamiltonian.kind == HamiltonianKind::power) {
        if (dim == 1) {
            prob.hamiltonian.drift.push_back(expr_profile("problem.hamiltonian.b", "0"));
        } else {
            prob.hamiltonian.drift.push_back(expr_profile("problem.hamiltonian.b1", "0"));
            prob.hamiltonian.drift.push_back(expr_profile("problem.hamiltonian.b2", "0"));
        }
    }

    CouplingSpec& cpl = prob.coupling;
    cpl.local_exponent = number_or("problem.coupling.local_exponent", 1.0);
    if (!(cpl.local_exponent > 0.0))
        fail("problem.coupling.local_exponent", "local exponent r must be positive");
    cpl.local_scale = number_or("problem.coupling.local_scale", 1.0);
    const std::string nl = string_or("problem.coupling.nonlocal", "off");
    if (nl == "off")
        cpl.nonlocal = NonlocalKind::off;
    else if (nl == "linear")
        cpl.nonlocal = NonlocalKind::linear;
    else if (nl == "power")
        cpl.nonlocal = NonlocalKind::power_inside;
    else
        fail("problem.coupling.nonlocal", "unknown variant `" + nl + "` (off | linear | power)");
    cpl.nonlocal_scale = number_or("problem.coupling.nonlocal_scale", 1.0);
    cpl.nonlocal_exponent = number_or("problem.coupling.nonlocal_exponent", 0.5);

    if (cpl.nonlocal != NonlocalKind::off) {
        const Value* klist = find("problem.kernel");
        if (klist && klist->kind == Value::Kind::list) {
            Eigen::VectorXd samples(klist->list.size());
            for (size_t i = 0; i < klist->list.size(); ++i) samples[i] = klist->list[i];
            try {
                cpl.kernel = std::make_shared<PeriodicKernel>(grid->torus, samples);
            } catch (const std::exception& ex) {
                fail("problem.kernel", ex.what());
            }
        } else {
            const std::string spec = string_or("problem.kernel", "wrapped_gaussian(0.1)");
            const size_t open = spec.find('(');
            const size_t close = spec.rfind(')');
            if (open == std::string::npos || close == std::string::npos || close < open)
                fail("problem.kernel",
                     "expected wrapped_gaussian(width), bump(radius), or a sample list");
            const std::string fname = trim(spec.substr(0, open));
            double arg;
            if (!parse_full_number(trim(spec.substr(open + 1, close - open - 1)), arg))
                fail("problem.kernel", "kernel parameter must be a number");
            try {
                if (fname == "wrapped_gaussian")
                    cpl.kernel = std::make_shared<PeriodicKernel>(
                        PeriodicKernel::wrapped_gaussian(grid->torus, arg));
                else if (fname == "bump")
                    cpl.kernel =
                        std::make_shared<PeriodicKernel>(PeriodicKernel::bump(grid->torus, arg));
                else
                    fail("problem.kernel", "unknown kernel `" + fname + "`");
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& ex) {
                fail("problem.kernel", ex.what());
            }
        }
    }

    if (dim == 1) {
        prob.diffusion.push_back(expr_profile("problem.diffusion", "0"));
    } else {
        prob.diffusion.push_back(expr_profile("problem.diffusion.a11", "0"));
        prob.diffusion.push_back(expr_profile("problem.diffusion.a12", "0"));
        prob.diffusion.push_back(expr_profile("problem.diffusion.a22", "0"));
    }

    prob.potential = expr_field("problem.potential", "0");
    prob.initial_density = expr_profile("problem.initial_density", "1");
    if (prob.initial_density.minCoeff() <= 0.0)
        fail("problem.initial_density", "initial density must be strictly positive");
    const double mass = prob.initial_density.sum() * grid->torus.site_weight();
    if (std::abs(mass - 1.0) > 1e-10)
        fail("problem.initial_density",
             "initial density must have unit mass on the torus, got " + std::to_string(mass));
    prob.terminal_cost = expr_profile("problem.terminal_cost", "0");

    if (find("problem.density_cap")) {
        const double cap = number_or("problem.density_cap", 0.0);
        if (!(cap > 1.0)) fail("problem.density_cap", "density cap M must exceed 1");
        prob.density_cap = cap;
    }
    if (find("problem.congestion_floor")) {
        const double floor = number_or("problem.congestion_floor", 0.0);
        if (!(floor > 0.0 && floor < 1.0))
            fail("problem.congestion_floor", "congestion floor must lie in (0,1)");
        prob.congestion_floor = floor;
    }

    setup.schedule = list_or("regularization.eps_schedule", default_epsilon_schedule());
    if (setup.schedule.empty()) fail("regularization.eps_schedule", "schedule must be nonempty");
    for (double e : setup.schedule)
        if (!(e > 0.0 && e < 1.0))
            fail("regularization.eps_schedule", "entries must lie in (0,1)");
    for (size_t i = 1; i < setup.schedule.size(); ++i)
        if (!(setup.schedule[i] < setup.schedule[i - 1]))
            fail("regularization.eps_schedule", "entries must decrease strictly");

    setup.reg.epsilon = setup.schedule.front();
    setup.reg.k = k;
    const std::string sigma_text = string_or("regularization.sigma", "0");
    if (sigma_text != "0") setup.reg.sigma = expr_field("regularization.sigma", "0");
    const std::string xi_text = string_or("regularization.xi", "0");
    if (xi_text != "0") setup.reg.xi = expr_field("regularization.xi", "0");

    setup.solver.tolerance = number_or("solver.tolerance", 1e-6);
    setup.solver.damping = number_or("solver.damping", 0.5);
    if (!(setup.solver.damping > 0.0 && setup.solver.damping <= 1.0))
        fail("solver.damping", "damping must lie in (0,1]");
    setup.solver.anderson_depth = integer_or("solver.anderson_depth", 20);
    setup.solver.max_outer = integer_or("solver.max_outer", 500);
    setup.solver.subsolver.vi_tol = number_or("solver.vi_tolerance", 1e-7);
    setup.solver.subsolver.cg_tol = number_or("solver.cg_tolerance", 1e-8);

    setup.diagnostics.seed = static_cast<std::uint64_t>(number_or("diagnostics.seed", 1234));
    setup.diagnostics.monotonicity_samples = integer_or("diagnostics.monotonicity_samples", 200);
    setup.diagnostics.minty_samples = integer_or("diagnostics.minty_samples", 100);
    setup.diagnostics.weak_fp_samples = integer_or("diagnostics.weak_fp_samples", 50);
    setup.diagnostics.hj_samples = integer_or("diagnostics.hj_samples", 100);
    setup.diagnostics.hj_allow_power = flag_or("diagnostics.hj_allow_power", false);

    setup.output_directory = string_or("output.directory", "out");

    for (const auto& [key, value] : values_)
        if (!value.used)
            throw ConfigError(name_ + ":" + std::to_string(value.line) + ": unknown key `" + key +
                                  "`",
                              key, value.line);

    try {
        prob.validate();
        setup.reg.validate(grid);
    } catch (const std::exception& ex) {
        throw ConfigError(name_ + ": invalid problem data: " + ex.what());
    }
    return setup;
}

}  // namespace mfg
