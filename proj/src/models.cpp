#include "qsl/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qsl/errors.hpp"

namespace qsl {

namespace {

constexpr double kOverlapSlack = 1e-12;

void require_overlap(Complex q, const char* what) {
    if (!std::isfinite(q.real()) || !std::isfinite(q.imag()) || std::abs(q) > 1.0 + kOverlapSlack) {
        throw std::invalid_argument(std::string(what) + ": |q| must not exceed 1");
    }
}

double complement(Complex q) { return std::sqrt(std::max(0.0, 1.0 - std::norm(q))); }

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

} // namespace

void validate(const SwapModelParams& p) {
    if (!std::isfinite(p.kappa) || p.kappa == 0.0) throw std::invalid_argument("swap: kappa must be nonzero");
    if (!(p.hbar > 0.0)) throw std::invalid_argument("swap: hbar must be positive");
    require_overlap(p.q, "swap");
}

ComplexMatrix swap_operator() {
    ComplexMatrix v = ComplexMatrix::Zero(4, 4);
    v(0, 0) = v(3, 3) = 1.0;
    v(1, 2) = v(2, 1) = 1.0;
    return v;
}

SwapModel build_swap(const SwapModelParams& p) {
    validate(p);
    ComplexMatrix m = kron(pauli::x(), pauli::x()) + kron(pauli::y(), pauli::y()) + kron(pauli::z(), pauli::z());
    m *= 0.5 * p.hbar * p.kappa;
    SpaceDescriptor space({2, 2});
    ComplexVector a0 = basis_ket(2, 0);
    ComplexVector b0(2);
    b0 << p.q, complement(p.q);
    return {HermitianOperator(std::move(m)), space, ProductState::normalized(space, {a0, b0})};
}

double swap_rescaled_time(const SwapModelParams& p, double t) { return p.kappa * t; }

void validate(const QuditModelParams& p) {
    if (p.d < 2) throw DimensionError("qudit: d must be >= 2");
    if (static_cast<std::size_t>(p.d) * static_cast<std::size_t>(p.d) > kDefaultDimCap) {
        throw DimensionError("qudit: d^2 exceeds dimension cap " + std::to_string(kDefaultDimCap));
    }
    if (!std::isfinite(p.e0) || !std::isfinite(p.e_perp) || !(p.e_perp > p.e0)) {
        throw std::invalid_argument("qudit: need finite e_perp > e0");
    }
}

ComplexVector qudit_ground_state(int d) {
    if (d < 2) throw DimensionError("qudit: d must be >= 2");
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(d) * d);
    for (int n = 0; n < d; ++n) psi(static_cast<Eigen::Index>(n) * d + n) = 1.0 / std::sqrt(static_cast<double>(d));
    return psi;
}

HermitianOperator build_qudit(const QuditModelParams& p) {
    validate(p);
    const ComplexVector psi0 = qudit_ground_state(p.d);
    const Eigen::Index dim = psi0.size();
    ComplexMatrix m = -(p.e_perp - p.e0) * (psi0 * psi0.adjoint());
    m += p.e_perp * ComplexMatrix::Identity(dim, dim);
    return HermitianOperator(std::move(m));
}

ProductState qudit_initial_state(int d, Complex q) {
    if (d < 2) throw DimensionError("qudit: d must be >= 2");
    require_overlap(q, "qudit");
    ComplexVector a0 = basis_ket(d, 0);
    ComplexVector b0 = ComplexVector::Zero(d);
    b0(0) = std::conj(q);
    b0(1) = complement(q);
    return ProductState::normalized(SpaceDescriptor({d, d}), {a0, b0});
}

double qudit_rescaled_time(const QuditModelParams& p, double t, double hbar) {
    return -(p.e_perp - p.e0) * t / (hbar * p.d);
}

ModelExtremes qudit_extremes(const QuditModelParams& p) {
    validate(p);
    ModelExtremes e;
    e.e_min = p.e0;
    e.e_max = p.e_perp;
    e.e_min_sep = -(p.e_perp - p.e0) / p.d + p.e_perp;
    e.e_max_sep = p.e_perp;
    return e;
}

void validate(const NModeModelParams& p) {
    if (p.n_parties < 2) throw DimensionError("nmode: need at least two parties");
    if (p.n_parties > kMaxNModeParties) {
        throw DimensionError("nmode: N = " + std::to_string(p.n_parties) + " exceeds cap " +
                             std::to_string(kMaxNModeParties));
    }
    if (p.k_split < 0 || p.k_split > p.n_parties) throw std::invalid_argument("nmode: need 0 <= K <= N");
    if (!std::isfinite(p.gamma.real()) || !std::isfinite(p.gamma.imag()) || p.gamma == 0.0) {
        throw std::invalid_argument("nmode: gamma must be nonzero");
    }
}

namespace {

// Basis indices (image, source) of the Gamma term: the first K modes go
// 0 -> 1, the remaining N - K go 1 -> 0.
std::pair<Eigen::Index, Eigen::Index> nmode_indices(const NModeModelParams& p) {
    Eigen::Index image = 0;
    Eigen::Index source = 0;
    for (int j = 0; j < p.n_parties; ++j) {
        image <<= 1;
        source <<= 1;
        if (j < p.k_split) {
            image |= 1;
        } else {
            source |= 1;
        }
    }
    return {image, source};
}

} // namespace

HermitianOperator build_nmode(const NModeModelParams& p) {
    validate(p);
    const Eigen::Index dim = Eigen::Index{1} << p.n_parties;
    const auto [x, y] = nmode_indices(p);
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(x, y) = p.gamma;
    m(y, x) = std::conj(p.gamma);
    return HermitianOperator(std::move(m));
}

ComplexVector nmode_ghz_state(const NModeModelParams& p, int sign) {
    validate(p);
    if (sign != 1 && sign != -1) throw std::invalid_argument("nmode_ghz_state: sign must be +1 or -1");
    const Eigen::Index dim = Eigen::Index{1} << p.n_parties;
    const auto [x, y] = nmode_indices(p);
    ComplexVector v = ComplexVector::Zero(dim);
    v(x) = 1.0 / std::sqrt(2.0);
    v(y) = static_cast<double>(sign) * std::conj(p.gamma) / std::abs(p.gamma) / std::sqrt(2.0);
    return v;
}

ModelExtremes nmode_extremes(const NModeModelParams& p) {
    validate(p);
    const double g = std::abs(p.gamma);
    const double sep = g / std::ldexp(1.0, p.n_parties - 1);
    return {-g, g, -sep, sep};
}

double closed_form_delta(int lambda, Complex q) {
    if (lambda != 1 && lambda != -1) throw std::invalid_argument("closed form: lambda must be +1 or -1");
    const double half = (1.0 - lambda) / 2.0;
    return std::sqrt(std::max(0.0, half * half + lambda * std::norm(q)));
}

ClosedFormSC closed_form_sc(const ClosedFormParams& p) {
    require_overlap(p.q, "closed_form_sc");
    if (!std::isfinite(p.tau)) throw std::invalid_argument("closed_form_sc: tau must be finite");
    const double delta = closed_form_delta(p.lambda, p.q);
    const double half = (1.0 - p.lambda) / 2.0;
    const double sn = p.tau * sinc(p.tau * delta);
    ClosedFormSC out;
    out.s = -kI * std::conj(p.q) * sn;
    out.c = std::cos(p.tau * delta) + kI * half * sn;
    return out;
}

std::pair<ComplexVector, ComplexVector> closed_form_locals(int lambda, const ComplexVector& a0, const ComplexVector& b0,
                                                        double tau) {
    if (a0.size() != b0.size()) throw DimensionError("closed_form_locals: kets must have equal dimension");
    if (lambda == 1) {
        const Complex q = a0.dot(b0);
        const ClosedFormSC sa = closed_form_sc({1, q, tau});
        const ClosedFormSC sb = closed_form_sc({1, std::conj(q), tau});
        return {sa.c * a0 + sa.s * b0, sb.c * b0 + sb.s * a0};
    }
    if (lambda == -1) {
        const ComplexVector a0c = a0.conjugate();
        const ComplexVector b0c = b0.conjugate();
        const Complex q = a0.dot(b0c);
        const ClosedFormSC sc = closed_form_sc({-1, q, tau});
        return {sc.c * a0 + sc.s * b0c, sc.c * b0 + sc.s * a0c};
    }
    throw std::invalid_argument("closed_form_locals: lambda must be +1 or -1");
}

SwapRates analytic_rates(const SwapModelParams& p) {
    validate(p);
    const double k = std::abs(p.kappa);
    const double q2 = std::min(1.0, std::norm(p.q));
    const double aq = std::sqrt(q2);
    return {2.0 * k * std::sqrt(std::max(0.0, 1.0 - q2 * q2)), 2.0 * std::sqrt(2.0) * aq * k * std::sqrt(1.0 - q2)};
}

double AnalyticSpeedups::qudit(int d) {
    if (d < 2) throw std::invalid_argument("analytic speedup: d must be >= 2");
    return d / std::sqrt(2.0);
}

double AnalyticSpeedups::nmode(int n) {
    if (n < 2) throw std::invalid_argument("analytic speedup: N must be >= 2");
    return std::ldexp(1.0, n - 1) / std::sqrt(static_cast<double>(n));
}

AnalyticSpeedups analytic_speedups() { return {}; }

} // namespace qsl
