#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsl/linalg.hpp"
#include "qsl/spaces.hpp"
#include "qsl/speedlimits.hpp"

namespace qsl {

/// Largest dt * ||H||_inf / hbar accepted by the fixed-step integrators.
inline constexpr double kMaxStepFraction = 0.01;

/// `samples` equally spaced times from 0 to t_max inclusive.
std::vector<double> uniform_grid(double t_max, std::size_t samples);

template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> rates;    // ||d rho / dt||_1 at each time
    std::vector<double> energies; // mean energy at each time
    /// Largest |<a|a> - 1| seen before renormalization (separable runs only).
    double max_norm_drift = 0.0;
};

using FullTrajectory = Trajectory<PureState>;
using SeparableTrajectory = Trajectory<ProductState>;
using DensityTrajectory = Trajectory<ComplexMatrix>;

struct RateRecord {
    double gamma = 0.0; // extreme eigenvalue of the commutator, 1/time
    double rate = 0.0;  // 2 |gamma|
};

/// Trace-norm rate of i hbar d_t rho = [H, rho] for a pure state:
/// 2 sqrt(<(Delta H)^2>) / hbar.
RateRecord rate_full(const HermitianOperator& h, const PureState& psi, double hbar = 1.0);

/// Rate of the product-state flow: gamma^2 is the sum of the local variances
/// of the partially reduced operators.
RateRecord rate_separable(const HermitianOperator& h, const ProductState& prod, double hbar = 1.0);

/// sum_j 1 (x) .. (x) H_{a_1..a_{j-1},a_{j+1}..a_N} (x) .. (x) 1, the generator
/// of the product-state flow at this state.
HermitianOperator separable_generator(const HermitianOperator& h, const ProductState& prod);

/// |psi(t)> = exp(-i H t / hbar) |psi_0> at each grid time.
FullTrajectory evolve_full(const HermitianOperator& h, const PureState& psi0, std::span<const double> grid,
                           double hbar = 1.0);

using HamiltonianFn = std::function<HermitianOperator(double)>;

/// Product-state flow i hbar d_t|a_j> = H_{..}|a_j> integrated by classical
/// RK4 with per-step renormalization of each local ket. The state at grid
/// time t is reached from t = 0 with steps no larger than dt.
/// Throws StepSizeError when dt ||H||_inf / hbar > 0.01.
SeparableTrajectory evolve_separable(const HermitianOperator& h, const ProductState& prod0,
                                     std::span<const double> grid, double dt, double hbar = 1.0);

/// Time-dependent variant. `norm_bound` bounds ||H(t)||_inf over the run and
/// enters the step-size rule. Rates and energies use H(t).
SeparableTrajectory evolve_separable(const HamiltonianFn& h, double norm_bound, const ProductState& prod0,
                                     std::span<const double> grid, double dt, double hbar = 1.0);

/// One RK4 step of the product-state flow followed by renormalization,
/// without the step-size rule. Returns the largest pre-renormalization
/// norm deviation.
double separable_rk4_step(const HamiltonianFn& h, const SpaceDescriptor& space, std::vector<ComplexVector>& locals,
                          double t, double dt, double hbar = 1.0);

struct EnsembleTrajectory {
    std::vector<double> weights;
    std::vector<SeparableTrajectory> members;
};

/// Evolves each member independently; the weights are copied unchanged.
EnsembleTrajectory evolve_ensemble(const HermitianOperator& h, const SeparableEnsemble& ensemble,
                                   std::span<const double> grid, double dt, double hbar = 1.0);

// Two-time witness ---------------------------------------------------------

struct SeriesPoint {
    double t = 0.0;
    double value = 0.0;
};

struct WitnessVerdict {
    bool violated = false;
    /// max over pairs of |<L>_f - <L>_i| - (t_f - t_i) QSL_sep^+ ||L||_inf
    double max_excess = 0.0;
    std::optional<std::pair<double, double>> violating_interval;
};

/// Checks every pair of points against the separable two-time bound.
WitnessVerdict witness_check(std::span<const SeriesPoint> series, double qsl_sep_plus, double l_inf);

struct ConeEnvelope {
    std::vector<double> times;
    std::vector<double> upper;
    std::vector<double> lower;
};

/// <L>_0 +- (t - t_0) QSL_sep^+ ||L||_inf, anchored at the first grid time.
ConeEnvelope cone_bounds(double l0, double qsl_sep_plus, double l_inf, std::span<const double> grid);

/// Tensor product of Pauli matrices from a label such as "ZI" or "XYZ".
ComplexMatrix pauli_observable(const std::string& label);

std::vector<SeriesPoint> expectation_series(const FullTrajectory& traj, const ComplexMatrix& observable);
std::vector<SeriesPoint> expectation_series(const SeparableTrajectory& traj, const ComplexMatrix& observable);

struct WitnessSearchResult {
    std::string observable;
    double l_inf = 1.0;
    WitnessVerdict verdict;
};

/// Scans all non-identity Pauli-product observables over the stored grid and
/// returns the one with the largest excess.
WitnessSearchResult witness_search(const FullTrajectory& traj, double qsl_sep_plus);

// Interaction picture -------------------------------------------------------

/// sum_k 1 (x) .. (x) H_k (x) .. (x) 1
HermitianOperator local_sum(const std::vector<HermitianOperator>& h_locals);

/// [U_1 (x) .. (x) U_N]^dagger H_int [U_1 (x) .. (x) U_N], U_j = exp(-i H_j t / hbar).
HermitianOperator interaction_picture(const std::vector<HermitianOperator>& h_locals, const HermitianOperator& h_int,
                                      double t, double hbar = 1.0);

// Open systems ---------------------------------------------------------------

class LindbladModel {
  public:
    LindbladModel(HermitianOperator h, std::vector<ComplexMatrix> jumps);

    const HermitianOperator& hamiltonian() const noexcept { return h_; }
    const std::vector<ComplexMatrix>& jumps() const noexcept { return jumps_; }

    /// sum_k h_k rho h_k^dagger - {h_k^dagger h_k, rho}/2
    ComplexMatrix dissipator(const ComplexMatrix& rho) const;
    /// (1/i hbar)[H, rho] + D(rho)
    ComplexMatrix generator(const ComplexMatrix& rho, double hbar = 1.0) const;

    /// ||H||_inf / hbar + sum_k ||h_k||_inf^2, the scale used by the step rule.
    double rate_scale(double hbar = 1.0) const;

  private:
    HermitianOperator h_;
    std::vector<ComplexMatrix> jumps_;
    std::vector<ComplexMatrix> decay_; // h_k^dagger h_k
};

/// RK4 integration of the Lindblad equation. Trace and Hermiticity are
/// preserved to integrator accuracy; positivity is checked every 100 steps.
/// Throws StepSizeError when dt * rate_scale > 0.01.
DensityTrajectory evolve_lindblad(const LindbladModel& model, const ComplexMatrix& rho0, std::span<const double> grid,
                                  double dt, double hbar = 1.0);

struct LindbladSpeedBounds {
    double qsl_d = 0.0;        // best ||D(|psi><psi|)||_1 found by search (a lower bound on the supremum)
    double qsl_d_upper = 0.0;  // 2 sum_k ||h_k||_inf^2
    double qsl_closed = 0.0;   // QSL(H)
    double qsl_sep_plus = 0.0; // QSL_sep^+(H)
    double total_closed = 0.0; // qsl_closed + qsl_d
    double total_sep = 0.0;    // qsl_sep_plus + qsl_d
    bool converged = true;
};

/// Trace norm of D(|psi><psi|).
double dissipative_rate(const LindbladModel& model, const ComplexVector& psi);

LindbladSpeedBounds lindblad_speed_bounds(const LindbladModel& model, const SpaceDescriptor& space,
                                          const SolverConfig& cfg = {}, double hbar = 1.0);

} // namespace qsl
