#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qsl/linalg.hpp"
#include "qsl/spaces.hpp"

namespace support {

using qsl::Complex;
using qsl::ComplexMatrix;
using qsl::ComplexVector;

inline ComplexMatrix random_matrix(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double re = g(rng);
            const double im = g(rng);
            m(r, c) = Complex(re, im);
        }
    }
    return m;
}

inline qsl::HermitianOperator random_hermitian(Eigen::Index dim, std::mt19937_64& rng, double scale = 1.0) {
    const ComplexMatrix m = random_matrix(dim, rng);
    return qsl::HermitianOperator(scale * 0.5 * (m + m.adjoint()));
}

inline ComplexVector random_ket(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double re = g(rng);
        const double im = g(rng);
        v(k) = Complex(re, im);
    }
    return v / v.norm();
}

inline qsl::ProductState random_product(const qsl::SpaceDescriptor& space, std::mt19937_64& rng) {
    std::vector<ComplexVector> locals;
    for (std::size_t j = 0; j < space.parties(); ++j) locals.push_back(random_ket(space.local_dim(j), rng));
    return qsl::ProductState(space, locals);
}

/// Spectrum from Eigen's self-adjoint solver, independent of the library's Jacobi code.
inline Eigen::VectorXd reference_spectrum(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

inline double reference_trace_norm(const ComplexMatrix& m) { return reference_spectrum(m).cwiseAbs().sum(); }

inline double fidelity(const ComplexVector& a, const ComplexVector& b) {
    return std::norm(a.normalized().dot(b.normalized()));
}

inline double product_fidelity(const qsl::ProductState& a, const qsl::ProductState& b) {
    double f = 1.0;
    for (std::size_t j = 0; j < a.space().parties(); ++j) f *= fidelity(a.local(j), b.local(j));
    return f;
}

inline ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint() / v.squaredNorm(); }

struct GridExtremes {
    double min = 0.0;
    double max = 0.0;
};

namespace detail {

inline ComplexVector bloch(double theta, double phi) {
    ComplexVector a(2);
    a << std::cos(theta / 2), std::exp(Complex(0.0, phi)) * std::sin(theta / 2);
    return a;
}

// Extreme eigenvalues of the 2x2 operator on qubit 2 obtained by fixing qubit 1.
inline std::pair<double, double> inner_extremes(const ComplexMatrix& h, const ComplexVector& a) {
    Complex r[2][2] = {};
    for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
            for (int m = 0; m < 2; ++m) {
                for (int n = 0; n < 2; ++n) r[k][l] += std::conj(a(m)) * h(2 * m + k, 2 * n + l) * a(n);
            }
        }
    }
    const double mean = 0.5 * (r[0][0].real() + r[1][1].real());
    const double half = 0.5 * (r[0][0].real() - r[1][1].real());
    const double radius = std::sqrt(half * half + std::norm(r[0][1]));
    return {mean - radius, mean + radius};
}

template <class F>
double grid_then_polish(F&& f) {
    constexpr int kTheta = 200;
    constexpr int kPhi = 400;
    double best = -std::numeric_limits<double>::infinity();
    double bt = 0.0;
    double bp = 0.0;
    for (int i = 0; i <= kTheta; ++i) {
        const double theta = M_PI * i / kTheta;
        for (int k = 0; k < kPhi; ++k) {
            const double phi = 2.0 * M_PI * k / kPhi;
            const double v = f(theta, phi);
            if (v > best) {
                best = v;
                bt = theta;
                bp = phi;
            }
        }
    }
    // Compass search around the best grid point.
    double step = 2.0 * M_PI / kPhi;
    while (step > 1e-12) {
        bool moved = false;
        for (const auto& [dt, dp] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const double v = f(bt + dt * step, bp + dp * step);
            if (v > best) {
                best = v;
                bt += dt * step;
                bp += dp * step;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return best;
}

} // namespace detail

/// Product-state expectation range of a two-qubit Hamiltonian by exhaustive
/// Bloch-angle grid over qubit 1 (exact 2x2 extremes for qubit 2), refined by
/// compass search.
inline GridExtremes bloch_grid_extremes(const qsl::HermitianOperator& h) {
    const ComplexMatrix& m = h.matrix();
    GridExtremes out;
    out.max = detail::grid_then_polish(
        [&](double t, double p) { return detail::inner_extremes(m, detail::bloch(t, p)).second; });
    out.min = -detail::grid_then_polish(
        [&](double t, double p) { return -detail::inner_extremes(m, detail::bloch(t, p)).first; });
    return out;
}

} // namespace support
