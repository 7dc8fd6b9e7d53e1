#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qsl/linalg.hpp"
#include "qsl/spaces.hpp"

namespace qsl {

/// Exact speed limit of closed dynamics: (E_max - E_min) / hbar.
struct ExactSpeedLimit {
    double qsl = 0.0;
    double e_min = 0.0;
    double e_max = 0.0;
    /// (|E_min> + |E_max>)/sqrt(2), which attains the maximal energy variance.
    ComplexVector extremal_state;
};

ExactSpeedLimit qsl_exact(const HermitianOperator& h, double hbar = 1.0);

struct SolverConfig {
    int starts = 32;
    int max_iters = 10000; // sweeps per start
    double tol = 1e-12;    // on |Delta E_sep| between sweeps
    std::uint64_t seed = 0x5eed;
    int threads = 1;       // starts are independent; output does not depend on this

    bool operator==(const SolverConfig&) const = default;
};

void validate(const SolverConfig& cfg);

/// Solution of the coupled separability eigenvalue equations
///   H_{a_1..a_{j-1},a_{j+1}..a_N} |a_j> = value |a_j>  for all j.
struct SeparabilityEigenpair {
    double value = 0.0;
    ProductState state;
    bool converged = false;
    int iterations = 0;   // sweeps used by the winning start
    int start_index = -1; // which start produced it
};

enum class Extremum { Max, Min };

/// Per-sweep record of one alternating run, for diagnostics and tests.
struct AlternatingTrace {
    std::vector<double> sweep_values;
    SeparabilityEigenpair result;
    int perturbations = 0;
};

/// Runs the cyclic alternating update from one starting product state: for
/// each party, replace |a_j> by the extreme eigenvector of the partially
/// reduced operator. Stops once a full sweep changes the value by less than
/// tol and every party is stationary to 1e-8 ||H||_inf.
AlternatingTrace alternating_solve(const HermitianOperator& h, ProductState start, Extremum mode,
                                   const SolverConfig& cfg);

/// max_j || H_{..}|a_j> - <H>|a_j> ||_2 over all parties.
double stationarity_residual(const HermitianOperator& h, const ProductState& state);

/// Haar-random local kets from a deterministic stream keyed by (seed, index).
ProductState random_product_state(const SpaceDescriptor& space, std::uint64_t seed, std::uint64_t index);

struct SeparabilityExtremes {
    SeparabilityEigenpair max_pair;
    SeparabilityEigenpair min_pair;
};

/// Extreme separability eigenvalues by seeded multistart alternating
/// optimization. Requires at least two parties.
SeparabilityExtremes separability_extremes(const HermitianOperator& h, const SpaceDescriptor& space,
                                           const SolverConfig& cfg = {});

struct SpeedReport {
    std::size_t parties = 0;
    double hbar = 1.0;
    double qsl = 0.0;
    double qsl_sep_plus = 0.0;
    /// Empty when qsl_sep_plus is zero (infinite speedup ratio).
    std::optional<double> ratio;
    double e_max = 0.0;
    double e_min = 0.0;
    double e_max_sep = 0.0;
    double e_min_sep = 0.0;
    ComplexVector extremal_state;
    SeparabilityEigenpair max_pair;
    SeparabilityEigenpair min_pair;

    bool converged() const { return max_pair.converged && min_pair.converged; }
    bool ratio_is_infinite() const { return !ratio.has_value(); }
};

/// QSL, sqrt(N) (E_max_sep - E_min_sep)/hbar and their ratio.
SpeedReport qsl_sep_bound(const HermitianOperator& h, const SpaceDescriptor& space, const SolverConfig& cfg = {},
                          double hbar = 1.0);

} // namespace qsl
