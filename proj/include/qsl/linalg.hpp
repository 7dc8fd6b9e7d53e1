#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qsl {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Largest operator dimension accepted by kron and the model builders.
inline constexpr std::size_t kDefaultDimCap = 4096;

/// Throws if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

/// Dense Hermitian matrix. Construction checks
/// max |M_jk - conj(M_kj)| <= 1e-12 (1 + max |M|) and stores the exactly
/// Hermitian part (M + M^dagger)/2.
class HermitianOperator {
  public:
    HermitianOperator() = default;
    explicit HermitianOperator(ComplexMatrix m);
    /// Same check with a caller-supplied relative tolerance.
    HermitianOperator(ComplexMatrix m, double rel_tol);

    static HermitianOperator zero(Eigen::Index dim);
    static HermitianOperator identity(Eigen::Index dim);
    /// |v><v|
    static HermitianOperator projector(const ComplexVector& v);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return m_; }

    Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

    /// Largest |M_jk| entry.
    double max_abs() const;

    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b);
    friend HermitianOperator operator*(double s, const HermitianOperator& a);

  private:
    struct Trusted {};
    HermitianOperator(ComplexMatrix m, Trusted) : m_(std::move(m)) {}

    ComplexMatrix m_;
};

/// Maximum entrywise deviation from Hermiticity.
double hermitian_asymmetry(const ComplexMatrix& m);

struct EigenDecomposition {
    RealVector values;     // ascending
    ComplexMatrix vectors; // columns are orthonormal eigenvectors

    double min() const { return values(0); }
    double max() const { return values(values.size() - 1); }
};

/// Full spectrum by cyclic complex Jacobi rotations. Each eigenvector is
/// phase-fixed so that its first component of largest modulus is real and
/// positive.
EigenDecomposition hermitian_eig(const HermitianOperator& op);

/// Sum of absolute eigenvalues.
double trace_norm(const HermitianOperator& op);

/// Largest absolute eigenvalue.
double spectral_norm(const HermitianOperator& op);

/// Largest singular value of a general square matrix (via the spectrum of M^dagger M).
double operator_norm(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t dim_cap = kDefaultDimCap);
ComplexVector kron(const ComplexVector& a, const ComplexVector& b);

/// exp(-i t H / hbar) from the spectral decomposition.
ComplexMatrix unitary_exp(const HermitianOperator& op, double t, double hbar = 1.0);
/// Same propagator from a precomputed decomposition.
ComplexMatrix unitary_exp(const EigenDecomposition& eig, double t, double hbar = 1.0);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
/// 0 -> identity, 1 -> x, 2 -> y, 3 -> z
ComplexMatrix by_index(int k);
} // namespace pauli

} // namespace qsl
