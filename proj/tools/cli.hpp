#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsl/dynamics.hpp"
#include "qsl/speedlimits.hpp"

namespace qsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct ScenarioConfig {
    std::string model = "swap";
    double kappa = 1.0;
    double q = 0.5;
    int d = 2;
    int n = 2;
    int k_split = 0;
    double gamma_re = 1.0;
    double gamma_im = 0.0;
    double e0 = 0.0;
    double eperp = 1.0;
    double hbar = 1.0;
    double dt = 0.0;    // 0: half of the largest admissible step
    double t_max = 0.0; // 0: model default
    int samples = 101;
    SolverConfig solver;
    std::string out;
    std::string format; // empty: subcommand default
};

/// Reads the flat JSON config format. Unknown keys and wrong types are errors.
ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig base = {});
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Checks every parameter the chosen model uses.
void validate(const ScenarioConfig& cfg);

struct ModelInstance {
    std::string name;
    nlohmann::json params;
    HermitianOperator h;
    SpaceDescriptor space;
    ProductState initial;
    std::optional<double> analytic_ratio;
    /// Closed-form local kets at physical time t, when the model has one.
    std::function<std::pair<ComplexVector, ComplexVector>(double)> oracle;
    std::string time_map;
    double default_t_max = 1.0;
};

ModelInstance build_model(const ScenarioConfig& cfg);

struct ReportDocument {
    std::string model;
    nlohmann::json params;
    std::size_t parties = 0;
    double hbar = 1.0;
    double qsl = 0.0;
    double qsl_sep_plus = 0.0;
    std::optional<double> ratio;
    std::optional<double> analytic_ratio;
    double e_max = 0.0;
    double e_min = 0.0;
    double e_max_sep = 0.0;
    double e_min_sep = 0.0;
    std::vector<Complex> extremal_state;
    std::vector<std::vector<Complex>> max_sep_state;
    std::vector<std::vector<Complex>> min_sep_state;
    double max_sep_residual = 0.0;
    double min_sep_residual = 0.0;
    SolverConfig solver;
    bool converged = false;
    int max_iterations = 0;
    int min_iterations = 0;
    int max_start = -1;
    int min_start = -1;
    std::string time_map;
    std::optional<double> wall_time_s;

    bool operator==(const ReportDocument&) const = default;
};

nlohmann::json to_json(const ReportDocument& r);
ReportDocument report_from_json(const nlohmann::json& j);

ReportDocument cmd_compute(const ScenarioConfig& cfg);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Full and separable trajectories from the model's initial product state.
Table cmd_evolve(const ScenarioConfig& cfg);

/// "t,expectation" series of a Pauli-product observable along the full or
/// separable trajectory.
Table cmd_evolve_observable(const ScenarioConfig& cfg, const std::string& observable, bool separable);

/// Parses "t,expectation" CSV. Throws ConfigError naming the offending line.
std::vector<SeriesPoint> read_series_csv(std::istream& in);

struct WitnessDocument {
    WitnessVerdict verdict;
    double qsl_sep_plus = 0.0;
    double l_inf = 1.0;
    std::size_t points = 0;
};

WitnessDocument cmd_witness(std::span<const SeriesPoint> series, double qsl_sep_plus, double l_inf);
nlohmann::json to_json(const WitnessDocument& w);

struct FigureFile {
    std::string name;
    Table table;
};

/// Data behind the three figures (which = 1, 2, 3 or 0 for all) plus a
/// metadata document.
std::vector<FigureFile> cmd_figures(int which, const ScenarioConfig& cfg, nlohmann::json& metadata);

/// QSL, QSL_sep^+ and ratio for each value of the model's scan parameter
/// (swap: q, qudit: d, nmode: N), in the given order.
Table cmd_sweep(const ScenarioConfig& cfg, const std::vector<double>& values);

/// 17 significant digits ("%.17g"), which round-trips every double.
std::string format_number(double x);
void write_csv(std::ostream& out, const Table& table);
nlohmann::json table_to_json(const Table& table);

/// Entry point; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qsl::cli
