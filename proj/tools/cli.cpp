#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "qsl/errors.hpp"
#include "qsl/models.hpp"

namespace qsl::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kConfigKeys = {
    "model", "kappa",   "q",       "d",    "n",     "k_split",   "gamma_re", "gamma_im", "e0",      "eperp",
    "hbar",  "dt",      "t_max",   "samples", "starts", "max_iters", "tol",     "seed",     "threads", "out",
    "format"};

template <class T>
void read_key(const json& j, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json ket_to_json(const std::vector<Complex>& v) {
    json out = json::array();
    for (const Complex z : v) out.push_back(complex_to_json(z));
    return out;
}

std::vector<Complex> ket_from_json(const json& j) {
    std::vector<Complex> out;
    for (const auto& z : j) out.push_back(complex_from_json(z));
    return out;
}

std::vector<Complex> to_std(const ComplexVector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::vector<Complex>> locals_to_std(const ProductState& s) {
    std::vector<std::vector<Complex>> out;
    for (const auto& a : s.locals()) out.push_back(to_std(a));
    return out;
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> optional_from_json(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

double product_fidelity(const std::pair<ComplexVector, ComplexVector>& oracle, const ProductState& s) {
    const double fa = std::norm(oracle.first.normalized().dot(s.local(0)));
    const double fb = std::norm(oracle.second.normalized().dot(s.local(1)));
    return fa * fb;
}

double default_dt(const ModelInstance& m, const ScenarioConfig& cfg) {
    if (cfg.dt > 0.0) return cfg.dt;
    const double norm = spectral_norm(m.h);
    if (norm == 0.0) return 1e-2;
    return 0.5 * kMaxStepFraction * cfg.hbar / norm;
}

std::vector<double> time_grid(const ModelInstance& m, const ScenarioConfig& cfg) {
    const double t_max = cfg.t_max > 0.0 ? cfg.t_max : m.default_t_max;
    return uniform_grid(t_max, static_cast<std::size_t>(cfg.samples));
}

SpeedReport solve(const HermitianOperator& h, const SpaceDescriptor& space, const ScenarioConfig& cfg) {
    return qsl_sep_bound(h, space, cfg.solver, cfg.hbar);
}

template <class F>
auto ordered_parallel(std::size_t count, F&& f) {
    using R = decltype(f(std::size_t{0}));
    std::vector<std::future<R>> jobs;
    jobs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) jobs.push_back(std::async(std::launch::async, f, k));
    std::vector<R> out;
    out.reserve(count);
    for (auto& job : jobs) out.push_back(job.get());
    return out;
}

} // namespace

ScenarioConfig config_from_json(const json& j, ScenarioConfig base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& item : j.items()) {
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), item.key()) == kConfigKeys.end()) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
    }
    ScenarioConfig c = std::move(base);
    read_key(j, "model", c.model);
    read_key(j, "kappa", c.kappa);
    read_key(j, "q", c.q);
    read_key(j, "d", c.d);
    read_key(j, "n", c.n);
    read_key(j, "k_split", c.k_split);
    read_key(j, "gamma_re", c.gamma_re);
    read_key(j, "gamma_im", c.gamma_im);
    read_key(j, "e0", c.e0);
    read_key(j, "eperp", c.eperp);
    read_key(j, "hbar", c.hbar);
    read_key(j, "dt", c.dt);
    read_key(j, "t_max", c.t_max);
    read_key(j, "samples", c.samples);
    read_key(j, "starts", c.solver.starts);
    read_key(j, "max_iters", c.solver.max_iters);
    read_key(j, "tol", c.solver.tol);
    read_key(j, "seed", c.solver.seed);
    read_key(j, "threads", c.solver.threads);
    read_key(j, "out", c.out);
    read_key(j, "format", c.format);
    return c;
}

json to_json(const ScenarioConfig& c) {
    return json{{"model", c.model},   {"kappa", c.kappa},
                {"q", c.q},           {"d", c.d},
                {"n", c.n},           {"k_split", c.k_split},
                {"gamma_re", c.gamma_re}, {"gamma_im", c.gamma_im},
                {"e0", c.e0},         {"eperp", c.eperp},
                {"hbar", c.hbar},     {"dt", c.dt},
                {"t_max", c.t_max},   {"samples", c.samples},
                {"starts", c.solver.starts}, {"max_iters", c.solver.max_iters},
                {"tol", c.solver.tol}, {"seed", c.solver.seed},
                {"threads", c.solver.threads}, {"out", c.out},
                {"format", c.format}};
}

void validate(const ScenarioConfig& c) {
    if (!(c.hbar > 0.0) || !std::isfinite(c.hbar)) throw ConfigError("hbar must be positive");
    if (c.dt < 0.0 || !std::isfinite(c.dt)) throw ConfigError("dt must be >= 0");
    if (c.t_max < 0.0 || !std::isfinite(c.t_max)) throw ConfigError("t_max must be >= 0");
    if (c.samples < 2) throw ConfigError("samples must be >= 2");
    if (!c.format.empty() && c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
    try {
        validate(c.solver);
        if (c.model == "swap") {
            validate(SwapModelParams{c.kappa, c.q, c.hbar});
        } else if (c.model == "qudit") {
            validate(QuditModelParams{c.d, c.e0, c.eperp});
        } else if (c.model == "nmode") {
            validate(NModeModelParams{c.n, c.k_split, Complex(c.gamma_re, c.gamma_im)});
        } else {
            throw ConfigError("unknown model '" + c.model + "' (expected swap, qudit or nmode)");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ModelInstance build_model(const ScenarioConfig& c) {
    validate(c);
    ModelInstance m;
    m.name = c.model;
    if (c.model == "swap") {
        const SwapModelParams p{c.kappa, c.q, c.hbar};
        SwapModel sw = build_swap(p);
        m.params = {{"kappa", c.kappa}, {"q", c.q}};
        m.h = std::move(sw.h);
        m.space = sw.space;
        m.initial = sw.initial;
        m.analytic_ratio = std::sqrt(2.0);
        const ComplexVector a0 = m.initial.local(0);
        const ComplexVector b0 = m.initial.local(1);
        m.oracle = [p, a0, b0](double t) { return closed_form_locals(1, a0, b0, swap_rescaled_time(p, t)); };
        m.time_map = "tau = kappa * t";
        m.default_t_max = 2.0 * M_PI / std::abs(c.kappa);
    } else if (c.model == "qudit") {
        const QuditModelParams p{c.d, c.e0, c.eperp};
        m.params = {{"d", c.d}, {"e0", c.e0}, {"eperp", c.eperp}, {"q", c.q}};
        m.h = build_qudit(p);
        m.space = SpaceDescriptor({c.d, c.d});
        m.initial = qudit_initial_state(c.d, c.q);
        m.analytic_ratio = AnalyticSpeedups::qudit(c.d);
        const ComplexVector a0 = m.initial.local(0);
        const ComplexVector b0 = m.initial.local(1);
        const double hbar = c.hbar;
        m.oracle = [p, a0, b0, hbar](double t) {
            return closed_form_locals(-1, a0, b0, qudit_rescaled_time(p, t, hbar));
        };
        m.time_map = "tau = -(eperp - e0) * t / (hbar * d)";
        m.default_t_max = 2.0 * M_PI * c.hbar * c.d / (c.eperp - c.e0);
    } else {
        const NModeModelParams p{c.n, c.k_split, Complex(c.gamma_re, c.gamma_im)};
        m.params = {{"n", c.n}, {"k_split", c.k_split}, {"gamma_re", c.gamma_re}, {"gamma_im", c.gamma_im}};
        m.h = build_nmode(p);
        m.space = SpaceDescriptor(std::vector<int>(static_cast<std::size_t>(c.n), 2));
        m.initial = random_product_state(m.space, c.solver.seed, 0);
        m.analytic_ratio = AnalyticSpeedups::nmode(c.n);
        m.time_map = "none";
        m.default_t_max = 2.0 * M_PI * c.hbar / std::abs(p.gamma);
    }
    return m;
}

json to_json(const ReportDocument& r) {
    json j;
    j["model"] = {{"name", r.model}, {"params", r.params}};
    j["parties"] = r.parties;
    j["hbar"] = r.hbar;
    j["qsl"] = r.qsl;
    j["qsl_sep_plus"] = r.qsl_sep_plus;
    j["ratio"] = optional_number(r.ratio);
    j["ratio_infinite"] = !r.ratio.has_value();
    j["analytic_ratio"] = optional_number(r.analytic_ratio);
    j["e_max"] = r.e_max;
    j["e_min"] = r.e_min;
    j["e_max_sep"] = r.e_max_sep;
    j["e_min_sep"] = r.e_min_sep;
    json max_state = json::array();
    for (const auto& a : r.max_sep_state) max_state.push_back(ket_to_json(a));
    json min_state = json::array();
    for (const auto& a : r.min_sep_state) min_state.push_back(ket_to_json(a));
    j["certificates"] = {{"extremal_state", ket_to_json(r.extremal_state)},
                         {"max_sep_state", max_state},
                         {"min_sep_state", min_state},
                         {"max_sep_residual", r.max_sep_residual},
                         {"min_sep_residual", r.min_sep_residual}};
    j["solver"] = {{"starts", r.solver.starts},
                   {"max_iters", r.solver.max_iters},
                   {"tol", r.solver.tol},
                   {"seed", r.solver.seed},
                   {"threads", r.solver.threads},
                   {"converged", r.converged},
                   {"max_iterations", r.max_iterations},
                   {"min_iterations", r.min_iterations},
                   {"max_start", r.max_start},
                   {"min_start", r.min_start}};
    j["time_map"] = r.time_map;
    if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
    return j;
}

ReportDocument report_from_json(const json& j) {
    ReportDocument r;
    try {
        r.model = j.at("model").at("name").get<std::string>();
        r.params = j.at("model").at("params");
        r.parties = j.at("parties").get<std::size_t>();
        r.hbar = j.at("hbar").get<double>();
        r.qsl = j.at("qsl").get<double>();
        r.qsl_sep_plus = j.at("qsl_sep_plus").get<double>();
        r.ratio = optional_from_json(j, "ratio");
        r.analytic_ratio = optional_from_json(j, "analytic_ratio");
        r.e_max = j.at("e_max").get<double>();
        r.e_min = j.at("e_min").get<double>();
        r.e_max_sep = j.at("e_max_sep").get<double>();
        r.e_min_sep = j.at("e_min_sep").get<double>();
        const json& cert = j.at("certificates");
        r.extremal_state = ket_from_json(cert.at("extremal_state"));
        for (const auto& a : cert.at("max_sep_state")) r.max_sep_state.push_back(ket_from_json(a));
        for (const auto& a : cert.at("min_sep_state")) r.min_sep_state.push_back(ket_from_json(a));
        r.max_sep_residual = cert.at("max_sep_residual").get<double>();
        r.min_sep_residual = cert.at("min_sep_residual").get<double>();
        const json& s = j.at("solver");
        r.solver.starts = s.at("starts").get<int>();
        r.solver.max_iters = s.at("max_iters").get<int>();
        r.solver.tol = s.at("tol").get<double>();
        r.solver.seed = s.at("seed").get<std::uint64_t>();
        r.solver.threads = s.at("threads").get<int>();
        r.converged = s.at("converged").get<bool>();
        r.max_iterations = s.at("max_iterations").get<int>();
        r.min_iterations = s.at("min_iterations").get<int>();
        r.max_start = s.at("max_start").get<int>();
        r.min_start = s.at("min_start").get<int>();
        r.time_map = j.at("time_map").get<std::string>();
        r.wall_time_s = optional_from_json(j, "wall_time_s");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
    return r;
}

ReportDocument cmd_compute(const ScenarioConfig& cfg) {
    const ModelInstance m = build_model(cfg);
    const SpeedReport s = solve(m.h, m.space, cfg);
    ReportDocument r;
    r.model = m.name;
    r.params = m.params;
    r.parties = s.parties;
    r.hbar = s.hbar;
    r.qsl = s.qsl;
    r.qsl_sep_plus = s.qsl_sep_plus;
    r.ratio = s.ratio;
    r.analytic_ratio = m.analytic_ratio;
    r.e_max = s.e_max;
    r.e_min = s.e_min;
    r.e_max_sep = s.e_max_sep;
    r.e_min_sep = s.e_min_sep;
    r.extremal_state = to_std(s.extremal_state);
    r.max_sep_state = locals_to_std(s.max_pair.state);
    r.min_sep_state = locals_to_std(s.min_pair.state);
    r.max_sep_residual = stationarity_residual(m.h, s.max_pair.state);
    r.min_sep_residual = stationarity_residual(m.h, s.min_pair.state);
    r.solver = cfg.solver;
    r.converged = s.converged();
    r.max_iterations = s.max_pair.iterations;
    r.min_iterations = s.min_pair.iterations;
    r.max_start = s.max_pair.start_index;
    r.min_start = s.min_pair.start_index;
    r.time_map = m.time_map;
    return r;
}

Table cmd_evolve(const ScenarioConfig& cfg) {
    const ModelInstance m = build_model(cfg);
    const std::vector<double> grid = time_grid(m, cfg);
    const FullTrajectory full = evolve_full(m.h, embed(m.initial), grid, cfg.hbar);
    const SeparableTrajectory sep = evolve_separable(m.h, m.initial, grid, default_dt(m, cfg), cfg.hbar);

    Table t;
    t.columns = {"t", "rate_full", "rate_sep", "energy_full", "energy_sep"};
    if (m.oracle) t.columns.emplace_back("fidelity_to_oracle");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{grid[k], full.rates[k], sep.rates[k], full.energies[k], sep.energies[k]};
        if (m.oracle) row.push_back(product_fidelity(m.oracle(grid[k]), sep.states[k]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table cmd_evolve_observable(const ScenarioConfig& cfg, const std::string& observable, bool separable) {
    const ModelInstance m = build_model(cfg);
    for (const int d : m.space.dims()) {
        if (d != 2) throw ConfigError("--observable needs qubit parties");
    }
    if (observable.size() != m.space.parties()) {
        throw ConfigError("--observable must have one Pauli letter per party");
    }
    ComplexMatrix l;
    try {
        l = pauli_observable(observable);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const std::vector<double> grid = time_grid(m, cfg);
    std::vector<SeriesPoint> series;
    if (separable) {
        series = expectation_series(evolve_separable(m.h, m.initial, grid, default_dt(m, cfg), cfg.hbar), l);
    } else {
        series = expectation_series(evolve_full(m.h, embed(m.initial), grid, cfg.hbar), l);
    }
    Table t;
    t.columns = {"t", "expectation"};
    for (const auto& p : series) t.rows.push_back({p.t, p.value});
    return t;
}

std::vector<SeriesPoint> read_series_csv(std::istream& in) {
    auto trim = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t start = 0;
        while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
        return s.substr(start);
    };
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<SeriesPoint> out;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (!have_header) {
            if (line != "t,expectation") {
                throw ConfigError("line " + std::to_string(line_no) + ": expected header \"t,expectation\"");
            }
            have_header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected two comma-separated values");
        }
        SeriesPoint p;
        try {
            std::size_t used = 0;
            const std::string a = trim(line.substr(0, comma));
            const std::string b = trim(line.substr(comma + 1));
            p.t = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument("trailing characters");
            p.value = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(line_no) + ": malformed number");
        }
        if (!std::isfinite(p.t) || !std::isfinite(p.value)) {
            throw ConfigError("line " + std::to_string(line_no) + ": non-finite value");
        }
        if (!out.empty() && !(p.t > out.back().t)) {
            throw ConfigError("line " + std::to_string(line_no) + ": times must be strictly increasing");
        }
        out.push_back(p);
    }
    if (!have_header) throw ConfigError("line 1: missing header \"t,expectation\"");
    if (out.size() < 2) throw ConfigError("series needs at least two data lines");
    return out;
}

WitnessDocument cmd_witness(std::span<const SeriesPoint> series, double qsl_sep_plus, double l_inf) {
    WitnessDocument w;
    w.verdict = witness_check(series, qsl_sep_plus, l_inf);
    w.qsl_sep_plus = qsl_sep_plus;
    w.l_inf = l_inf;
    w.points = series.size();
    return w;
}

json to_json(const WitnessDocument& w) {
    json j;
    j["violated"] = w.verdict.violated;
    j["max_excess"] = w.verdict.max_excess;
    if (w.verdict.violating_interval) {
        j["violating_interval"] = json::array({w.verdict.violating_interval->first, w.verdict.violating_interval->second});
    } else {
        j["violating_interval"] = nullptr;
    }
    j["qsl_sep_plus"] = w.qsl_sep_plus;
    j["l_inf"] = w.l_inf;
    j["points"] = w.points;
    return j;
}

std::vector<FigureFile> cmd_figures(int which, const ScenarioConfig& cfg, json& metadata) {
    if (which < 0 || which > 3) throw ConfigError("figure must be 1, 2, 3 or all");
    std::vector<FigureFile> files;
    metadata = json::object();
    metadata["solver"] = {{"starts", cfg.solver.starts},
                          {"max_iters", cfg.solver.max_iters},
                          {"tol", cfg.solver.tol},
                          {"seed", cfg.solver.seed}};
    bool converged = true;

    if (which == 0 || which == 1) {
        ScenarioConfig c = cfg;
        c.model = "swap";
        const double k = std::abs(c.kappa);
        const ModelInstance m = build_model(c);
        const SpeedReport s = solve(m.h, m.space, c);
        converged = converged && s.converged();
        FigureFile f{"fig1.csv", {}};
        f.table.columns = {"abs_q",           "rate_full_analytic", "rate_full_numeric",
                           "rate_sep_analytic", "rate_sep_numeric", "qsl_analytic",
                           "qsl_numeric",     "qsl_sep_plus_analytic", "qsl_sep_plus_numeric"};
        constexpr int kPoints = 101;
        for (int i = 0; i < kPoints; ++i) {
            const double q = static_cast<double>(i) / (kPoints - 1);
            const SwapModelParams p{c.kappa, q, c.hbar};
            const SwapModel sw = build_swap(p);
            const SwapRates a = analytic_rates(p);
            const double full = rate_full(sw.h, embed(sw.initial), c.hbar).rate;
            const double sep = rate_separable(sw.h, sw.initial, c.hbar).rate;
            f.table.rows.push_back({q, a.full / k, full / k, a.sep / k, sep / k, 2.0, s.qsl / k, std::sqrt(2.0),
                                    s.qsl_sep_plus / k});
        }
        metadata["fig1"] = {{"file", f.name},
                            {"x", "abs_q"},
                            {"y", "rate / |kappa|"},
                            {"y_scale", "linear"},
                            {"kappa", c.kappa},
                            {"reference_lines", json::array({2.0, std::sqrt(2.0)})},
                            {"crossing_abs_q", std::pow(2.0, -0.25)}};
        files.push_back(std::move(f));
    }

    auto ratio_table = [&](const std::string& name, const std::string& x, int lo, int hi, auto make) {
        std::vector<int> xs;
        for (int v = lo; v <= hi; ++v) xs.push_back(v);
        const auto results = ordered_parallel(xs.size(), [&](std::size_t i) { return make(xs[i]); });
        FigureFile f{name, {}};
        f.table.columns = {x, "ratio_analytic", "ratio_numeric", "qsl_numeric", "qsl_sep_plus_numeric"};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto& [analytic, s] = results[i];
            converged = converged && s.converged();
            const double ratio = s.ratio ? *s.ratio : std::numeric_limits<double>::infinity();
            f.table.rows.push_back({static_cast<double>(xs[i]), analytic, ratio, s.qsl, s.qsl_sep_plus});
        }
        return f;
    };

    if (which == 0 || which == 2) {
        ScenarioConfig c = cfg;
        c.model = "qudit";
        files.push_back(ratio_table("fig2.csv", "d", 2, 10, [&](int d) {
            ScenarioConfig cd = c;
            cd.d = d;
            const ModelInstance m = build_model(cd);
            return std::make_pair(AnalyticSpeedups::qudit(d), solve(m.h, m.space, cd));
        }));
        metadata["fig2"] = {{"file", "fig2.csv"}, {"x", "d"}, {"y", "QSL / QSL_sep+"}, {"y_scale", "linear"},
                            {"e0", c.e0}, {"eperp", c.eperp}};
    }

    if (which == 0 || which == 3) {
        ScenarioConfig c = cfg;
        c.model = "nmode";
        c.k_split = 0;
        files.push_back(ratio_table("fig3.csv", "n", 2, 10, [&](int n) {
            ScenarioConfig cn = c;
            cn.n = n;
            const ModelInstance m = build_model(cn);
            return std::make_pair(AnalyticSpeedups::nmode(n), solve(m.h, m.space, cn));
        }));
        metadata["fig3"] = {{"file", "fig3.csv"}, {"x", "n"}, {"y", "QSL / QSL_sep+"}, {"y_scale", "log"},
                            {"gamma_re", c.gamma_re}, {"gamma_im", c.gamma_im}};
    }
    metadata["converged"] = converged;
    return files;
}

Table cmd_sweep(const ScenarioConfig& cfg, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<ScenarioConfig> configs;
    for (const double v : values) {
        ScenarioConfig c = cfg;
        if (cfg.model == "swap") {
            c.q = v;
        } else {
            if (v != std::floor(v)) throw ConfigError("sweep values for " + cfg.model + " must be integers");
            (cfg.model == "qudit" ? c.d : c.n) = static_cast<int>(v);
        }
        validate(c);
        configs.push_back(std::move(c));
    }
    const auto reports = ordered_parallel(configs.size(), [&](std::size_t i) { return cmd_compute(configs[i]); });
    Table t;
    t.columns = {"value", "qsl", "qsl_sep_plus", "ratio", "ratio_analytic", "converged"};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const ReportDocument& r = reports[i];
        t.rows.push_back({values[i], r.qsl, r.qsl_sep_plus,
                          r.ratio ? *r.ratio : std::numeric_limits<double>::infinity(),
                          r.analytic_ratio.value_or(std::numeric_limits<double>::quiet_NaN()),
                          r.converged ? 1.0 : 0.0});
    }
    return t;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
}

json table_to_json(const Table& table) {
    json rows = json::array();
    for (const auto& row : table.rows) rows.push_back(row);
    return {{"columns", table.columns}, {"rows", rows}};
}

// Command line -------------------------------------------------------------------

namespace {

using Applier = std::function<void(ScenarioConfig&)>;

template <class T, class Set>
void bind_flag(CLI::App& app, std::vector<Applier>& appliers, const std::string& name, const std::string& help, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app.add_option(name, *value, help);
    appliers.push_back([opt, value, set](ScenarioConfig& c) {
        if (opt->count() > 0) set(c, *value);
    });
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
    if (path.empty() || path == "-") {
        body(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
    body(file);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--values: cannot parse '" + item + "'");
        }
    }
    return out;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement-assisted quantum speed limits: reports, trajectories, witnesses and figure data", "qsl-lab"};
    app.require_subcommand(1);
    std::vector<Applier> appliers;

    std::string config_path;
    bool timing = false;
    app.add_option("--config", config_path, "JSON config file; flags override its keys");
    app.add_flag("--timing", timing, "add wall time to the compute report");
    bind_flag<std::string>(app, appliers, "--model", "swap, qudit or nmode", [](auto& c, auto v) { c.model = v; });
    bind_flag<double>(app, appliers, "--kappa", "swap coupling", [](auto& c, auto v) { c.kappa = v; });
    bind_flag<double>(app, appliers, "--q", "initial overlap |q|", [](auto& c, auto v) { c.q = v; });
    bind_flag<int>(app, appliers, "--d", "qudit dimension", [](auto& c, auto v) { c.d = v; });
    bind_flag<int>(app, appliers, "--n", "number of modes", [](auto& c, auto v) { c.n = v; });
    bind_flag<int>(app, appliers, "--k-split", "creation factors K", [](auto& c, auto v) { c.k_split = v; });
    bind_flag<double>(app, appliers, "--gamma-re", "Re Gamma", [](auto& c, auto v) { c.gamma_re = v; });
    bind_flag<double>(app, appliers, "--gamma-im", "Im Gamma", [](auto& c, auto v) { c.gamma_im = v; });
    bind_flag<double>(app, appliers, "--e0", "qudit ground energy", [](auto& c, auto v) { c.e0 = v; });
    bind_flag<double>(app, appliers, "--eperp", "qudit excited energy", [](auto& c, auto v) { c.eperp = v; });
    bind_flag<double>(app, appliers, "--hbar", "reduced Planck constant", [](auto& c, auto v) { c.hbar = v; });
    bind_flag<double>(app, appliers, "--dt", "integrator step", [](auto& c, auto v) { c.dt = v; });
    bind_flag<double>(app, appliers, "--t-max", "final time", [](auto& c, auto v) { c.t_max = v; });
    bind_flag<int>(app, appliers, "--samples", "grid points", [](auto& c, auto v) { c.samples = v; });
    bind_flag<int>(app, appliers, "--starts", "solver starts", [](auto& c, auto v) { c.solver.starts = v; });
    bind_flag<int>(app, appliers, "--max-iters", "sweeps per start", [](auto& c, auto v) { c.solver.max_iters = v; });
    bind_flag<double>(app, appliers, "--tol", "solver tolerance", [](auto& c, auto v) { c.solver.tol = v; });
    bind_flag<std::uint64_t>(app, appliers, "--seed", "solver seed", [](auto& c, auto v) { c.solver.seed = v; });
    bind_flag<int>(app, appliers, "--threads", "solver threads (0: all cores)", [](auto& c, auto v) { c.solver.threads = v; });
    bind_flag<std::string>(app, appliers, "--out", "output file or directory", [](auto& c, auto v) { c.out = v; });
    bind_flag<std::string>(app, appliers, "--format", "json or csv", [](auto& c, auto v) { c.format = v; });

    CLI::App* compute = app.add_subcommand("compute", "QSL, QSL_sep+ and their ratio");
    CLI::App* evolve = app.add_subcommand("evolve", "full and separable trajectories");
    std::string observable;
    std::string series = "full";
    evolve->add_option("--observable", observable, "Pauli label; export its t,expectation series instead");
    evolve->add_option("--series", series, "full or sep")->check(CLI::IsMember({"full", "sep"}));
    CLI::App* witness = app.add_subcommand("witness", "two-time separability witness on a t,expectation CSV");
    std::string input;
    double l_inf = 1.0;
    double qsl_override = -1.0;
    std::string cone_path;
    witness->add_option("--input", input, "series CSV")->required();
    witness->add_option("--l-inf", l_inf, "operator norm of the observable");
    witness->add_option("--qsl-sep-plus", qsl_override, "use this bound instead of computing it");
    witness->add_option("--cone", cone_path, "write the cone envelope CSV here");
    CLI::App* figures = app.add_subcommand("figures", "figure data files");
    std::string which = "all";
    figures->add_option("--which", which, "1, 2, 3 or all")->check(CLI::IsMember({"1", "2", "3", "all"}));
    CLI::App* sweep = app.add_subcommand("sweep", "ratio over a list of parameter values");
    std::string values;
    sweep->add_option("--values", values, "comma-separated q (swap), d (qudit) or N (nmode)")->required();
    for (CLI::App* sub : {compute, evolve, witness, figures, sweep}) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        ScenarioConfig cfg;
        cfg.solver.threads = 0;
        if (!config_path.empty()) {
            std::ifstream file(config_path);
            if (!file) throw ConfigError("cannot open config '" + config_path + "'");
            json j;
            try {
                j = json::parse(file);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            cfg = config_from_json(j, cfg);
        }
        for (const auto& apply : appliers) apply(cfg);
        validate(cfg);

        if (compute->parsed()) {
            const auto start = std::chrono::steady_clock::now();
            ReportDocument r = cmd_compute(cfg);
            if (timing) r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            emit(cfg.out, out, [&](std::ostream& os) {
                if (cfg.format == "csv") {
                    Table t{{"qsl", "qsl_sep_plus", "ratio", "e_max", "e_min", "e_max_sep", "e_min_sep", "converged"},
                            {{r.qsl, r.qsl_sep_plus, r.ratio.value_or(std::numeric_limits<double>::infinity()),
                              r.e_max, r.e_min, r.e_max_sep, r.e_min_sep, r.converged ? 1.0 : 0.0}}};
                    write_csv(os, t);
                } else {
                    os << to_json(r).dump(2) << '\n';
                }
            });
            if (!r.converged) {
                err << "warning: separability solver did not converge\n";
                return kExitNonConvergence;
            }
            return kExitOk;
        }

        if (evolve->parsed()) {
            const Table t = observable.empty() ? cmd_evolve(cfg) : cmd_evolve_observable(cfg, observable, series == "sep");
            emit(cfg.out, out, [&](std::ostream& os) {
                if (cfg.format == "json") {
                    os << table_to_json(t).dump(2) << '\n';
                } else {
                    write_csv(os, t);
                }
            });
            return kExitOk;
        }

        if (witness->parsed()) {
            std::ifstream file(input);
            if (!file) throw ConfigError("cannot open input '" + input + "'");
            const std::vector<SeriesPoint> points = read_series_csv(file);
            double bound = qsl_override;
            bool converged = true;
            if (bound < 0.0) {
                const ReportDocument r = cmd_compute(cfg);
                bound = r.qsl_sep_plus;
                converged = r.converged;
            }
            if (!(l_inf > 0.0)) throw ConfigError("--l-inf must be positive");
            const WitnessDocument w = cmd_witness(points, bound, l_inf);
            if (!cone_path.empty()) {
                std::vector<double> times;
                for (const auto& p : points) times.push_back(p.t);
                const ConeEnvelope env = cone_bounds(points.front().value, bound, l_inf, times);
                Table t{{"t", "lower", "upper", "expectation"}, {}};
                for (std::size_t k = 0; k < times.size(); ++k) {
                    t.rows.push_back({times[k], env.lower[k], env.upper[k], points[k].value});
                }
                emit(cone_path, out, [&](std::ostream& os) { write_csv(os, t); });
            }
            emit(cfg.out, out, [&](std::ostream& os) { os << to_json(w).dump(2) << '\n'; });
            return converged ? kExitOk : kExitNonConvergence;
        }

        if (figures->parsed()) {
            const int fig = which == "all" ? 0 : std::stoi(which);
            json metadata;
            const auto files = cmd_figures(fig, cfg, metadata);
            const std::filesystem::path dir = cfg.out.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg.out);
            std::filesystem::create_directories(dir);
            for (const auto& f : files) {
                emit((dir / f.name).string(), out, [&](std::ostream& os) { write_csv(os, f.table); });
            }
            emit((dir / "figures.json").string(), out, [&](std::ostream& os) { os << metadata.dump(2) << '\n'; });
            return metadata.at("converged").get<bool>() ? kExitOk : kExitNonConvergence;
        }

        if (sweep->parsed()) {
            const Table t = cmd_sweep(cfg, parse_values(values));
            emit(cfg.out, out, [&](std::ostream& os) {
                if (cfg.format == "json") {
                    os << table_to_json(t).dump(2) << '\n';
                } else {
                    write_csv(os, t);
                }
            });
            for (const auto& row : t.rows) {
                if (row.back() == 0.0) return kExitNonConvergence;
            }
            return kExitOk;
        }
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

} // namespace qsl::cli
