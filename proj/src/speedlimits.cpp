#include "qsl/speedlimits.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>
#include <random>
#include <stdexcept>
#include <string>

#include "qsl/errors.hpp"

namespace qsl {

namespace {

constexpr double kStationarityRelTol = 1e-8;
// Reduced operators whose spectral spread is below this (relative to ||H||)
// are treated as proportional to the identity.
constexpr double kDegenerateRelTol = 1e-13;
constexpr double kPerturbationAngle = 1e-3;

double operator_scale(const HermitianOperator& h) {
    const auto eig = hermitian_eig(h);
    return std::max(std::abs(eig.min()), std::abs(eig.max()));
}

// Rotates |a> by a fixed small angle towards the first computational basis
// direction that is not parallel to it.
ComplexVector perturb_local(const ComplexVector& a) {
    const Eigen::Index d = a.size();
    for (Eigen::Index k = 0; k < d; ++k) {
        ComplexVector axis = basis_ket(d, k);
        axis -= a.dot(axis) * a;
        const double n = axis.norm();
        if (n > 1e-6) {
            axis /= n;
            ComplexVector out = std::cos(kPerturbationAngle) * a + std::sin(kPerturbationAngle) * axis;
            return out / out.norm();
        }
    }
    return a;
}

std::mt19937_64 start_engine(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

bool better(const SeparabilityEigenpair& a, const SeparabilityEigenpair& b, Extremum mode, double tie_tol) {
    const double diff = mode == Extremum::Max ? a.value - b.value : b.value - a.value;
    if (diff > tie_tol) return true;
    if (diff < -tie_tol) return false;
    if (a.converged != b.converged) return a.converged;
    return a.start_index < b.start_index;
}

} // namespace

ExactSpeedLimit qsl_exact(const HermitianOperator& h, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("qsl_exact: hbar must be positive");
    const auto eig = hermitian_eig(h);
    const Eigen::Index n = h.dim();
    ExactSpeedLimit out;
    out.e_min = eig.min();
    out.e_max = eig.max();
    out.qsl = (out.e_max - out.e_min) / hbar;
    if (n == 1) {
        out.extremal_state = eig.vectors.col(0);
    } else {
        out.extremal_state = (eig.vectors.col(0) + eig.vectors.col(n - 1)) / std::sqrt(2.0);
    }
    return out;
}

void validate(const SolverConfig& cfg) {
    if (cfg.starts < 1) throw std::invalid_argument("SolverConfig: starts must be >= 1");
    if (cfg.max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (cfg.threads < 0) throw std::invalid_argument("SolverConfig: threads must be >= 0");
}

double stationarity_residual(const HermitianOperator& h, const ProductState& state) {
    const double energy = energy_stats(h, embed(state)).mean;
    double worst = 0.0;
    for (std::size_t j = 0; j < state.space().parties(); ++j) {
        const HermitianOperator reduced = partial_reduction(h, state, j);
        const ComplexVector& a = state.local(j);
        worst = std::max(worst, (reduced.matrix() * a - energy * a).norm());
    }
    return worst;
}

ProductState random_product_state(const SpaceDescriptor& space, std::uint64_t seed, std::uint64_t index) {
    auto engine = start_engine(seed, index);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<ComplexVector> locals;
    locals.reserve(space.parties());
    for (std::size_t j = 0; j < space.parties(); ++j) {
        ComplexVector a(space.local_dim(j));
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            const double re = gauss(engine);
            const double im = gauss(engine);
            a(k) = Complex(re, im);
        }
        locals.push_back(std::move(a));
    }
    return ProductState::normalized(space, std::move(locals));
}

AlternatingTrace alternating_solve(const HermitianOperator& h, ProductState start, Extremum mode,
                                   const SolverConfig& cfg) {
    require_same_space(h, start.space(), "alternating_solve");
    const SpaceDescriptor space = start.space();
    const std::size_t parties = space.parties();
    const double scale = std::max(operator_scale(h), 1e-300);

    std::vector<ComplexVector> locals = start.locals();
    AlternatingTrace trace;
    double value = energy_stats(h, embed(start)).mean;
    trace.sweep_values.push_back(value);

    bool converged = false;
    int sweep = 0;
    for (; sweep < cfg.max_iters && !converged; ++sweep) {
        for (std::size_t j = 0; j < parties; ++j) {
            const ProductState current(space, locals);
            const HermitianOperator reduced = partial_reduction(h, current, j);
            const auto eig = hermitian_eig(reduced);
            if (eig.max() - eig.min() <= kDegenerateRelTol * scale) {
                // Every local ket is stationary here; nudge this party off
                // the plateau without changing the objective.
                locals[j] = perturb_local(locals[j]);
                ++trace.perturbations;
                continue;
            }
            const Eigen::Index pick = mode == Extremum::Max ? reduced.dim() - 1 : 0;
            locals[j] = eig.vectors.col(pick);
            value = eig.values(pick);
        }
        const ProductState current(space, locals);
        value = energy_stats(h, embed(current)).mean;
        const double change = std::abs(value - trace.sweep_values.back());
        trace.sweep_values.push_back(value);
        if (change < cfg.tol && stationarity_residual(h, current) <= kStationarityRelTol * scale) {
            converged = true;
        }
    }

    trace.result.value = value;
    trace.result.state = ProductState(space, locals);
    trace.result.converged = converged;
    trace.result.iterations = sweep;
    return trace;
}

SeparabilityExtremes separability_extremes(const HermitianOperator& h, const SpaceDescriptor& space,
                                           const SolverConfig& cfg) {
    validate(cfg);
    require_same_space(h, space, "separability_extremes");
    if (space.parties() < 2) throw std::invalid_argument("separability_extremes: need at least two parties");

    const auto starts = static_cast<std::size_t>(cfg.starts);
    std::vector<SeparabilityEigenpair> maxima(starts);
    std::vector<SeparabilityEigenpair> minima(starts);

    auto run_start = [&](std::size_t s) {
        const ProductState start = random_product_state(space, cfg.seed, s);
        maxima[s] = alternating_solve(h, start, Extremum::Max, cfg).result;
        minima[s] = alternating_solve(h, start, Extremum::Min, cfg).result;
        maxima[s].start_index = minima[s].start_index = static_cast<int>(s);
    };

    const std::size_t threads =
        cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<std::size_t>(cfg.threads);
    if (threads <= 1) {
        for (std::size_t s = 0; s < starts; ++s) run_start(s);
    } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < threads; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t s = w; s < starts; s += threads) run_start(s);
            }));
        }
        for (auto& job : jobs) job.get();
    }

    const double tie_tol = 1e-12 * std::max(1.0, operator_scale(h));
    SeparabilityExtremes out{maxima.front(), minima.front()};
    for (std::size_t s = 1; s < starts; ++s) {
        if (better(maxima[s], out.max_pair, Extremum::Max, tie_tol)) out.max_pair = maxima[s];
        if (better(minima[s], out.min_pair, Extremum::Min, tie_tol)) out.min_pair = minima[s];
    }
    return out;
}

SpeedReport qsl_sep_bound(const HermitianOperator& h, const SpaceDescriptor& space, const SolverConfig& cfg,
                          double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("qsl_sep_bound: hbar must be positive");
    const ExactSpeedLimit exact = qsl_exact(h, hbar);
    const SeparabilityExtremes sep = separability_extremes(h, space, cfg);

    SpeedReport r;
    r.parties = space.parties();
    r.hbar = hbar;
    r.qsl = exact.qsl;
    r.e_max = exact.e_max;
    r.e_min = exact.e_min;
    r.extremal_state = exact.extremal_state;
    r.max_pair = sep.max_pair;
    r.min_pair = sep.min_pair;
    r.e_max_sep = sep.max_pair.value;
    r.e_min_sep = sep.min_pair.value;
    double spread = std::max(0.0, r.e_max_sep - r.e_min_sep);
    if (spread <= kDegenerateRelTol * std::max(1.0, operator_scale(h))) spread = 0.0;
    r.qsl_sep_plus = std::sqrt(static_cast<double>(r.parties)) * spread / hbar;
    if (r.qsl_sep_plus > 0.0) r.ratio = r.qsl / r.qsl_sep_plus;
    return r;
}

} // namespace qsl
