#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qsl/dynamics.hpp"
#include "qsl/errors.hpp"

namespace qsl {

namespace {

constexpr int kPositivityCheckInterval = 100;
constexpr double kPositivityTol = 1e-7;
constexpr double kTraceTol = 1e-7;
constexpr int kPolishBudget = 4000;

HermitianOperator as_hermitian(const ComplexMatrix& m) { return HermitianOperator(m, 1e-9); }

void require_density(const ComplexMatrix& rho, Eigen::Index dim) {
    if (rho.rows() != dim || rho.cols() != dim) throw DimensionError("evolve_lindblad: rho0 dimension mismatch");
    require_finite(rho, "evolve_lindblad");
    const double asym = hermitian_asymmetry(rho);
    if (asym > 1e-10) throw NonHermitianError("evolve_lindblad: rho0 is not Hermitian", asym);
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) throw std::invalid_argument("evolve_lindblad: rho0 must have unit trace");
    if (hermitian_eig(as_hermitian(rho)).min() < -1e-10) {
        throw std::invalid_argument("evolve_lindblad: rho0 must be positive semidefinite");
    }
}

ComplexVector random_ket(Eigen::Index dim, std::mt19937_64& engine) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double re = gauss(engine);
        const double im = gauss(engine);
        v(k) = Complex(re, im);
    }
    return v / v.norm();
}

// Random-direction hill climbing on the unit sphere with an adaptive radius.
double polish(const LindbladModel& model, ComplexVector psi, std::mt19937_64& engine) {
    double best = dissipative_rate(model, psi);
    double step = 0.3;
    int stall = 0;
    const int patience = 2 * static_cast<int>(psi.size()) + 4;
    for (int evals = 0; evals < kPolishBudget && step > 1e-7; ++evals) {
        ComplexVector dir = random_ket(psi.size(), engine);
        ComplexVector trial = psi + step * dir;
        trial /= trial.norm();
        const double value = dissipative_rate(model, trial);
        if (value > best) {
            best = value;
            psi = std::move(trial);
            step = std::min(1.0, 1.5 * step);
            stall = 0;
        } else if (++stall >= patience) {
            step *= 0.5;
            stall = 0;
        }
    }
    return best;
}

} // namespace

LindbladModel::LindbladModel(HermitianOperator h, std::vector<ComplexMatrix> jumps)
    : h_(std::move(h)), jumps_(std::move(jumps)) {
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        if (jumps_[k].rows() != h_.dim() || jumps_[k].cols() != h_.dim()) {
            throw DimensionError("LindbladModel: jump operator " + std::to_string(k) + " has wrong dimension");
        }
        require_finite(jumps_[k], "LindbladModel");
        decay_.push_back(jumps_[k].adjoint() * jumps_[k]);
    }
}

ComplexMatrix LindbladModel::dissipator(const ComplexMatrix& rho) const {
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        out += jumps_[k] * rho * jumps_[k].adjoint();
        out -= 0.5 * (decay_[k] * rho + rho * decay_[k]);
    }
    return out;
}

ComplexMatrix LindbladModel::generator(const ComplexMatrix& rho, double hbar) const {
    const ComplexMatrix& h = h_.matrix();
    return (-kI / hbar) * (h * rho - rho * h) + dissipator(rho);
}

double LindbladModel::rate_scale(double hbar) const {
    double scale = spectral_norm(h_) / hbar;
    for (const auto& jump : jumps_) {
        const double n = operator_norm(jump);
        scale += n * n;
    }
    return scale;
}

DensityTrajectory evolve_lindblad(const LindbladModel& model, const ComplexMatrix& rho0, std::span<const double> grid,
                                  double dt, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("evolve_lindblad: hbar must be positive");
    require_density(rho0, model.hamiltonian().dim());
    if (grid.empty() || !(grid.front() >= 0.0)) throw std::invalid_argument("evolve_lindblad: invalid grid");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("evolve_lindblad: grid must be strictly increasing");
    }
    const double scale = model.rate_scale(hbar);
    if (!(dt > 0.0)) throw StepSizeError("evolve_lindblad: dt must be positive");
    if (dt * scale > kMaxStepFraction * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "evolve_lindblad: dt = " << dt << " violates dt * (||H||/hbar + sum ||h_k||^2) <= " << kMaxStepFraction;
        throw StepSizeError(os.str());
    }

    ComplexMatrix rho = rho0;
    DensityTrajectory traj;
    double t = 0.0;
    long step_count = 0;
    auto check = [&]() {
        const double tr = rho.trace().real();
        const double min_eig = hermitian_eig(as_hermitian(rho)).min();
        if (std::abs(tr - 1.0) > kTraceTol || min_eig < -kPositivityTol) {
            std::ostringstream os;
            os << "evolve_lindblad: state left the density-operator set at t = " << t << " (trace " << tr
               << ", min eigenvalue " << min_eig << ")";
            throw NumericalError(os.str());
        }
    };

    for (const double target : grid) {
        const double span = target - t;
        if (span > 0.0) {
            const auto steps = static_cast<long>(std::ceil(span / dt - 1e-9));
            const double h = span / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) {
                const ComplexMatrix k1 = model.generator(rho, hbar);
                const ComplexMatrix k2 = model.generator(rho + 0.5 * h * k1, hbar);
                const ComplexMatrix k3 = model.generator(rho + 0.5 * h * k2, hbar);
                const ComplexMatrix k4 = model.generator(rho + h * k3, hbar);
                rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                rho = (0.5 * (rho + rho.adjoint())).eval();
                if (++step_count % kPositivityCheckInterval == 0) check();
            }
            t = target;
        }
        traj.times.push_back(target);
        traj.rates.push_back(trace_norm(as_hermitian(model.generator(rho, hbar))));
        traj.energies.push_back((rho * model.hamiltonian().matrix()).trace().real());
        traj.states.push_back(rho);
    }
    check();
    return traj;
}

double dissipative_rate(const LindbladModel& model, const ComplexVector& psi) {
    if (model.jumps().empty()) return 0.0;
    return trace_norm(as_hermitian(model.dissipator(psi * psi.adjoint())));
}

LindbladSpeedBounds lindblad_speed_bounds(const LindbladModel& model, const SpaceDescriptor& space,
                                          const SolverConfig& cfg, double hbar) {
    validate(cfg);
    require_same_space(model.hamiltonian(), space, "lindblad_speed_bounds");

    LindbladSpeedBounds out;
    out.qsl_closed = qsl_exact(model.hamiltonian(), hbar).qsl;
    if (space.parties() >= 2) {
        const SpeedReport report = qsl_sep_bound(model.hamiltonian(), space, cfg, hbar);
        out.qsl_sep_plus = report.qsl_sep_plus;
        out.converged = report.converged();
    } else {
        out.qsl_sep_plus = out.qsl_closed;
    }

    for (const auto& jump : model.jumps()) {
        const double n = operator_norm(jump);
        out.qsl_d_upper += 2.0 * n * n;
    }

    if (!model.jumps().empty()) {
        const Eigen::Index dim = space.total_dim();
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0xd155u};
        std::mt19937_64 engine(seq);
        double best = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) best = std::max(best, polish(model, basis_ket(dim, k), engine));
        for (int s = 0; s < cfg.starts; ++s) best = std::max(best, polish(model, random_ket(dim, engine), engine));
        out.qsl_d = std::min(best, out.qsl_d_upper);
    }
    out.total_closed = out.qsl_closed + out.qsl_d;
    out.total_sep = out.qsl_sep_plus + out.qsl_d;
    return out;
}

} // namespace qsl
