#include "qsl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qsl/errors.hpp"

namespace qsl {

namespace {

void require_grid(std::span<const double> grid, const char* what) {
    if (grid.empty()) throw std::invalid_argument(std::string(what) + ": empty time grid");
    if (!(grid.front() >= 0.0)) throw std::invalid_argument(std::string(what) + ": grid must start at t >= 0");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k])) throw std::invalid_argument(std::string(what) + ": non-finite grid time");
        if (k > 0 && !(grid[k] > grid[k - 1])) {
            throw std::invalid_argument(std::string(what) + ": grid must be strictly increasing");
        }
    }
}

void require_step(double dt, double scale, const char* what) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw StepSizeError(std::string(what) + ": dt must be positive");
    if (dt * scale > kMaxStepFraction * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << what << ": dt = " << dt << " violates dt * ||H||/hbar <= " << kMaxStepFraction
           << " (limit dt <= " << kMaxStepFraction / scale << ")";
        throw StepSizeError(os.str());
    }
}

// d|a_j>/dt = (1 / i hbar) H_{..}|a_j> for all parties, with reductions
// evaluated from the given (possibly unnormalized) kets.
std::vector<ComplexVector> separable_velocity(const ComplexMatrix& h, const SpaceDescriptor& space,
                                              const std::vector<ComplexVector>& locals, double hbar) {
    std::vector<ComplexVector> out(locals.size());
    const Complex factor = -kI / hbar;
    for (std::size_t j = 0; j < locals.size(); ++j) {
        out[j] = factor * (partial_reduction(h, space, locals, j) * locals[j]);
    }
    return out;
}

std::vector<ComplexVector> shifted(const std::vector<ComplexVector>& base, const std::vector<ComplexVector>& dir,
                                   double step) {
    std::vector<ComplexVector> out(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) out[j] = base[j] + step * dir[j];
    return out;
}

template <class GetH>
double rk4_step_impl(GetH&& get_h, const SpaceDescriptor& space, std::vector<ComplexVector>& locals, double t,
                     double dt, double hbar) {
    const auto k1 = separable_velocity(get_h(t).matrix(), space, locals, hbar);
    const auto k2 = separable_velocity(get_h(t + 0.5 * dt).matrix(), space, shifted(locals, k1, 0.5 * dt), hbar);
    const auto k3 = separable_velocity(get_h(t + 0.5 * dt).matrix(), space, shifted(locals, k2, 0.5 * dt), hbar);
    const auto k4 = separable_velocity(get_h(t + dt).matrix(), space, shifted(locals, k3, dt), hbar);
    double drift = 0.0;
    for (std::size_t j = 0; j < locals.size(); ++j) {
        locals[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        const double n = locals[j].norm();
        drift = std::max(drift, std::abs(n - 1.0));
        locals[j] /= n;
    }
    return drift;
}

template <class GetH>
SeparableTrajectory integrate_separable(GetH&& get_h, double norm_bound, const ProductState& prod0,
                                        std::span<const double> grid, double dt, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("evolve_separable: hbar must be positive");
    require_grid(grid, "evolve_separable");
    require_step(dt, norm_bound / hbar, "evolve_separable");

    const SpaceDescriptor& space = prod0.space();
    std::vector<ComplexVector> locals = prod0.locals();
    SeparableTrajectory traj;
    double t = 0.0;
    for (const double target : grid) {
        const double span = target - t;
        if (span > 0.0) {
            const auto steps = static_cast<long>(std::ceil(span / dt - 1e-9));
            const double h = span / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) {
                const double drift = rk4_step_impl(get_h, space, locals, t + static_cast<double>(s) * h, h, hbar);
                traj.max_norm_drift = std::max(traj.max_norm_drift, drift);
            }
            t = target;
        }
        ProductState state(space, locals);
        const HermitianOperator& h_now = get_h(target);
        traj.times.push_back(target);
        traj.rates.push_back(rate_separable(h_now, state, hbar).rate);
        traj.energies.push_back(energy_stats(h_now, embed(state)).mean);
        traj.states.push_back(std::move(state));
    }
    return traj;
}

} // namespace

std::vector<double> uniform_grid(double t_max, std::size_t samples) {
    if (samples == 0) throw std::invalid_argument("uniform_grid: need at least one sample");
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("uniform_grid: t_max must be >= 0");
    if (samples == 1) return {0.0};
    if (t_max == 0.0) throw std::invalid_argument("uniform_grid: t_max must be positive for more than one sample");
    std::vector<double> grid(samples);
    const double denom = static_cast<double>(samples - 1);
    for (std::size_t k = 0; k < samples; ++k) grid[k] = t_max * static_cast<double>(k) / denom;
    return grid;
}

RateRecord rate_full(const HermitianOperator& h, const PureState& psi, double hbar) {
    require_same_space(h, psi.space(), "rate_full");
    const EnergyStats s = energy_stats(h, psi);
    RateRecord r;
    r.gamma = std::sqrt(s.variance) / hbar;
    r.rate = 2.0 * std::abs(r.gamma);
    return r;
}

RateRecord rate_separable(const HermitianOperator& h, const ProductState& prod, double hbar) {
    require_same_space(h, prod.space(), "rate_separable");
    double total = 0.0;
    for (std::size_t j = 0; j < prod.space().parties(); ++j) {
        const HermitianOperator reduced = partial_reduction(h, prod, j);
        const ComplexVector& a = prod.local(j);
        const ComplexVector ra = reduced.matrix() * a;
        const double local_mean = a.dot(ra).real();
        total += (ra - local_mean * a).squaredNorm();
    }
    RateRecord r;
    r.gamma = std::sqrt(total) / hbar;
    r.rate = 2.0 * std::abs(r.gamma);
    return r;
}

HermitianOperator separable_generator(const HermitianOperator& h, const ProductState& prod) {
    require_same_space(h, prod.space(), "separable_generator");
    const SpaceDescriptor& space = prod.space();
    ComplexMatrix g = ComplexMatrix::Zero(space.total_dim(), space.total_dim());
    for (std::size_t j = 0; j < space.parties(); ++j) {
        g += embed_local(partial_reduction(h, prod, j).matrix(), space, j);
    }
    return HermitianOperator(std::move(g), 1e-10);
}

FullTrajectory evolve_full(const HermitianOperator& h, const PureState& psi0, std::span<const double> grid,
                           double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("evolve_full: hbar must be positive");
    require_same_space(h, psi0.space(), "evolve_full");
    require_grid(grid, "evolve_full");
    const auto eig = hermitian_eig(h);
    const ComplexVector coeffs = eig.vectors.adjoint() * psi0.vector();

    FullTrajectory traj;
    for (const double t : grid) {
        ComplexVector phased(coeffs.size());
        for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
            phased(k) = std::exp(-kI * eig.values(k) * t / hbar) * coeffs(k);
        }
        PureState psi = PureState::normalized(psi0.space(), eig.vectors * phased);
        traj.times.push_back(t);
        traj.rates.push_back(rate_full(h, psi, hbar).rate);
        traj.energies.push_back(energy_stats(h, psi).mean);
        traj.states.push_back(std::move(psi));
    }
    return traj;
}

SeparableTrajectory evolve_separable(const HermitianOperator& h, const ProductState& prod0,
                                     std::span<const double> grid, double dt, double hbar) {
    require_same_space(h, prod0.space(), "evolve_separable");
    const double norm = spectral_norm(h);
    return integrate_separable([&h](double) -> const HermitianOperator& { return h; }, norm, prod0, grid, dt, hbar);
}

SeparableTrajectory evolve_separable(const HamiltonianFn& h, double norm_bound, const ProductState& prod0,
                                     std::span<const double> grid, double dt, double hbar) {
    HermitianOperator cache;
    double cached_t = std::numeric_limits<double>::quiet_NaN();
    auto get_h = [&](double t) -> const HermitianOperator& {
        if (!(t == cached_t)) {
            cache = h(t);
            require_same_space(cache, prod0.space(), "evolve_separable");
            cached_t = t;
        }
        return cache;
    };
    return integrate_separable(get_h, norm_bound, prod0, grid, dt, hbar);
}

double separable_rk4_step(const HamiltonianFn& h, const SpaceDescriptor& space, std::vector<ComplexVector>& locals,
                          double t, double dt, double hbar) {
    HermitianOperator cache;
    auto get_h = [&](double s) -> const HermitianOperator& {
        cache = h(s);
        return cache;
    };
    return rk4_step_impl(get_h, space, locals, t, dt, hbar);
}

EnsembleTrajectory evolve_ensemble(const HermitianOperator& h, const SeparableEnsemble& ensemble,
                                   std::span<const double> grid, double dt, double hbar) {
    EnsembleTrajectory out;
    out.weights = ensemble.weights();
    out.members.reserve(ensemble.members().size());
    for (const auto& member : ensemble.members()) out.members.push_back(evolve_separable(h, member, grid, dt, hbar));
    return out;
}

WitnessVerdict witness_check(std::span<const SeriesPoint> series, double qsl_sep_plus, double l_inf) {
    if (series.size() < 2) throw std::invalid_argument("witness_check: need at least two points");
    if (!(l_inf > 0.0) || !std::isfinite(l_inf)) throw std::invalid_argument("witness_check: l_inf must be positive");
    if (!(qsl_sep_plus >= 0.0) || !std::isfinite(qsl_sep_plus)) {
        throw std::invalid_argument("witness_check: qsl_sep_plus must be finite and >= 0");
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!std::isfinite(series[k].t) || !std::isfinite(series[k].value)) {
            throw std::invalid_argument("witness_check: non-finite entry at index " + std::to_string(k));
        }
        if (k > 0 && !(series[k].t > series[k - 1].t)) {
            throw std::invalid_argument("witness_check: times must be strictly increasing (index " +
                                        std::to_string(k) + ")");
        }
    }

    const double slope = qsl_sep_plus * l_inf;
    WitnessVerdict v;
    v.max_excess = -std::numeric_limits<double>::infinity();
    std::pair<double, double> best{series[0].t, series[1].t};
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        for (std::size_t f = i + 1; f < series.size(); ++f) {
            const double excess =
                std::abs(series[f].value - series[i].value) - (series[f].t - series[i].t) * slope;
            if (excess > v.max_excess) {
                v.max_excess = excess;
                best = {series[i].t, series[f].t};
            }
        }
    }
    v.violated = v.max_excess > 0.0;
    if (v.violated) v.violating_interval = best;
    return v;
}

ConeEnvelope cone_bounds(double l0, double qsl_sep_plus, double l_inf, std::span<const double> grid) {
    ConeEnvelope env;
    if (grid.empty()) return env;
    const double slope = qsl_sep_plus * l_inf;
    for (const double t : grid) {
        const double width = (t - grid.front()) * slope;
        env.times.push_back(t);
        env.upper.push_back(l0 + width);
        env.lower.push_back(l0 - width);
    }
    return env;
}

ComplexMatrix pauli_observable(const std::string& label) {
    if (label.empty()) throw std::invalid_argument("pauli_observable: empty label");
    std::vector<ComplexMatrix> factors;
    for (const char c : label) {
        switch (c) {
        case 'I': factors.push_back(pauli::identity()); break;
        case 'X': factors.push_back(pauli::x()); break;
        case 'Y': factors.push_back(pauli::y()); break;
        case 'Z': factors.push_back(pauli::z()); break;
        default: throw std::invalid_argument(std::string("pauli_observable: unknown factor '") + c + "'");
        }
    }
    return tensor_product(factors);
}

std::vector<SeriesPoint> expectation_series(const FullTrajectory& traj, const ComplexMatrix& observable) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const ComplexVector& psi = traj.states[k].vector();
        if (observable.rows() != psi.size()) throw DimensionError("expectation_series: observable dimension mismatch");
        out.push_back({traj.times[k], psi.dot(observable * psi).real()});
    }
    return out;
}

std::vector<SeriesPoint> expectation_series(const SeparableTrajectory& traj, const ComplexMatrix& observable) {
    std::vector<SeriesPoint> out;
    out.reserve(traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const ComplexVector psi = embed(traj.states[k]).vector();
        if (observable.rows() != psi.size()) throw DimensionError("expectation_series: observable dimension mismatch");
        out.push_back({traj.times[k], psi.dot(observable * psi).real()});
    }
    return out;
}

WitnessSearchResult witness_search(const FullTrajectory& traj, double qsl_sep_plus) {
    if (traj.states.empty()) throw std::invalid_argument("witness_search: empty trajectory");
    const SpaceDescriptor& space = traj.states.front().space();
    for (const int d : space.dims()) {
        if (d != 2) throw std::invalid_argument("witness_search: Pauli search requires qubit parties");
    }
    const std::size_t n = space.parties();
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    std::size_t combos = 1;
    for (std::size_t k = 0; k < n; ++k) combos *= 4;

    WitnessSearchResult best;
    bool have = false;
    for (std::size_t code = 1; code < combos; ++code) {
        std::string label(n, 'I');
        std::size_t rest = code;
        for (std::size_t k = n; k-- > 0;) {
            label[k] = letters[rest % 4];
            rest /= 4;
        }
        const auto series = expectation_series(traj, pauli_observable(label));
        const WitnessVerdict v = witness_check(series, qsl_sep_plus, 1.0);
        if (!have || v.max_excess > best.verdict.max_excess) {
            best = {label, 1.0, v};
            have = true;
        }
    }
    return best;
}

HermitianOperator local_sum(const std::vector<HermitianOperator>& h_locals) {
    if (h_locals.empty()) throw std::invalid_argument("local_sum: no local Hamiltonians");
    std::vector<int> dims;
    for (const auto& hk : h_locals) dims.push_back(static_cast<int>(hk.dim()));
    const SpaceDescriptor space(dims);
    ComplexMatrix sum = ComplexMatrix::Zero(space.total_dim(), space.total_dim());
    for (std::size_t k = 0; k < h_locals.size(); ++k) sum += embed_local(h_locals[k].matrix(), space, k);
    return HermitianOperator(std::move(sum));
}

HermitianOperator interaction_picture(const std::vector<HermitianOperator>& h_locals, const HermitianOperator& h_int,
                                      double t, double hbar) {
    if (h_locals.empty()) throw std::invalid_argument("interaction_picture: no local Hamiltonians");
    std::vector<ComplexMatrix> unitaries;
    Eigen::Index dim = 1;
    for (const auto& hk : h_locals) {
        unitaries.push_back(unitary_exp(hk, t, hbar));
        dim *= hk.dim();
    }
    if (dim != h_int.dim()) throw DimensionError("interaction_picture: local dimensions do not match H_int");
    const ComplexMatrix u = tensor_product(unitaries);
    return HermitianOperator(u.adjoint() * h_int.matrix() * u, 1e-10);
}

} // namespace qsl
