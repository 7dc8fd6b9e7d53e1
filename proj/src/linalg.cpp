#include "qsl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "qsl/errors.hpp"

namespace qsl {

namespace {

constexpr double kHermitianRelTol = 1e-12;
constexpr double kJacobiRelTol = 1e-14;
constexpr int kJacobiMaxSweeps = 100;

double offdiag_norm(const ComplexMatrix& a) {
    double sum = 0.0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < c; ++r) sum += std::norm(a(r, c));
    }
    return std::sqrt(2.0 * sum);
}

// Applies the unitary J with J_pp = J_qq = c, J_pq = s e, J_qp = -s conj(e)
// from the right to the columns p, q of m.
void rotate_columns(ComplexMatrix& m, Eigen::Index p, Eigen::Index q, double c, double s, Complex e) {
    const ComplexVector colp = m.col(p);
    m.col(p) = c * colp - (s * std::conj(e)) * m.col(q);
    m.col(q) = (s * e) * colp + c * m.col(q);
}

// Applies J^dagger from the left to the rows p, q of m.
void rotate_rows(ComplexMatrix& m, Eigen::Index p, Eigen::Index q, double c, double s, Complex e) {
    const Eigen::RowVectorXcd rowp = m.row(p);
    m.row(p) = c * rowp - (s * e) * m.row(q);
    m.row(q) = (s * std::conj(e)) * rowp + c * m.row(q);
}

void fix_phase(Eigen::Ref<ComplexVector> v) {
    Eigen::Index best = 0;
    double best_mod = -1.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double mod = std::abs(v(k));
        if (mod > best_mod) {
            best_mod = mod;
            best = k;
        }
    }
    if (best_mod > 0.0) v *= std::conj(v(best)) / best_mod;
}

} // namespace

void require_finite(const ComplexMatrix& m, const char* what) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const Complex z = m(r, c);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                std::ostringstream os;
                os << what << ": non-finite entry at (" << r << ", " << c << ")";
                throw NumericalError(os.str());
            }
        }
    }
}

double hermitian_asymmetry(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r <= c; ++r) {
            worst = std::max(worst, std::abs(m(r, c) - std::conj(m(c, r))));
        }
    }
    return worst;
}

HermitianOperator::HermitianOperator(ComplexMatrix m) : HermitianOperator(std::move(m), kHermitianRelTol) {}

HermitianOperator::HermitianOperator(ComplexMatrix m, double rel_tol) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw DimensionError("HermitianOperator: matrix must be square and non-empty, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    require_finite(m, "HermitianOperator");
    const double asym = hermitian_asymmetry(m);
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    if (asym > rel_tol * scale) {
        std::ostringstream os;
        os << "HermitianOperator: matrix is not Hermitian (max asymmetry " << asym << ")";
        throw NonHermitianError(os.str(), asym);
    }
    m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Zero(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Identity(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::projector(const ComplexVector& v) {
    ComplexMatrix p = v * v.adjoint();
    p = 0.5 * (p + p.adjoint()).eval();
    return HermitianOperator(std::move(p), Trusted{});
}

double HermitianOperator::max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw DimensionError("HermitianOperator +: dimension mismatch");
    return HermitianOperator(a.m_ + b.m_, HermitianOperator::Trusted{});
}

HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw DimensionError("HermitianOperator -: dimension mismatch");
    return HermitianOperator(a.m_ - b.m_, HermitianOperator::Trusted{});
}

HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(s * a.m_, HermitianOperator::Trusted{});
}

EigenDecomposition hermitian_eig(const HermitianOperator& op) {
    const Eigen::Index n = op.dim();
    ComplexMatrix a = op.matrix();
    ComplexMatrix v = ComplexMatrix::Identity(n, n);

    const double target = kJacobiRelTol * a.norm();
    bool converged = false;
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        if (offdiag_norm(a) <= target) {
            converged = true;
            break;
        }
        for (Eigen::Index q = 1; q < n; ++q) {
            for (Eigen::Index p = 0; p < q; ++p) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                // Negligible against both diagonal entries: drop it.
                if (sweep > 3 && std::abs(app) + 100.0 * mag == std::abs(app) &&
                    std::abs(aqq) + 100.0 * mag == std::abs(aqq)) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * mag);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex e = apq / mag;

                rotate_columns(a, p, q, c, s, e);
                rotate_rows(a, p, q, c, s, e);
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                rotate_columns(v, p, q, c, s, e);
            }
        }
    }
    if (!converged && offdiag_norm(a) > target) {
        throw NumericalError("hermitian_eig: Jacobi iteration did not converge");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return a(l, l).real() < a(r, r).real(); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src).real();
        out.vectors.col(k) = v.col(src);
        fix_phase(out.vectors.col(k));
    }
    return out;
}

double trace_norm(const HermitianOperator& op) { return hermitian_eig(op).values.cwiseAbs().sum(); }

double spectral_norm(const HermitianOperator& op) {
    const auto eig = hermitian_eig(op);
    return std::max(std::abs(eig.min()), std::abs(eig.max()));
}

double operator_norm(const ComplexMatrix& m) {
    const HermitianOperator gram(m.adjoint() * m, 1e-10);
    return std::sqrt(std::max(0.0, hermitian_eig(gram).max()));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t dim_cap) {
    const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (rows > dim_cap || cols > dim_cap) {
        throw DimensionError("kron: result dimension " + std::to_string(std::max(rows, cols)) +
                             " exceeds cap " + std::to_string(dim_cap));
    }
    ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
    ComplexVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

ComplexMatrix unitary_exp(const EigenDecomposition& eig, double t, double hbar) {
    ComplexVector phases(eig.values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(-kI * eig.values(k) * t / hbar);
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix unitary_exp(const HermitianOperator& op, double t, double hbar) {
    if (t == 0.0) return ComplexMatrix::Identity(op.dim(), op.dim());
    return unitary_exp(hermitian_eig(op), t, hbar);
}

namespace pauli {

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0.0, -kI, kI, 0.0;
    return m;
}

ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

ComplexMatrix by_index(int k) {
    switch (k) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw std::out_of_range("pauli::by_index: index must be 0..3");
    }
}

} // namespace pauli

} // namespace qsl
