#pragma once

#include <utility>

#include "qsl/linalg.hpp"
#include "qsl/spaces.hpp"

namespace qsl {

// Two-qubit swap model -------------------------------------------------------

struct SwapModelParams {
    double kappa = 1.0; // coupling, 1/time, nonzero
    Complex q = 0.0;    // <a_0|b_0>, |q| <= 1
    double hbar = 1.0;
};

void validate(const SwapModelParams& p);

struct SwapModel {
    HermitianOperator h;  // (hbar kappa / 2)(XX + YY + ZZ)
    SpaceDescriptor space;
    ProductState initial; // |a_0> = |0>, |b_0> = q|0> + sqrt(1 - |q|^2)|1>
};

SwapModel build_swap(const SwapModelParams& p);

/// V|x, y> = |y, x> on C^2 (x) C^2.
ComplexMatrix swap_operator();

/// tau = kappa t
double swap_rescaled_time(const SwapModelParams& p, double t);

// Qudit ground-state model -----------------------------------------------------

struct QuditModelParams {
    int d = 2;
    double e0 = 0.0;
    double e_perp = 1.0; // must exceed e0
};

void validate(const QuditModelParams& p);

/// -(E_perp - E_0)|psi_0><psi_0| + E_perp 1 on C^d (x) C^d.
HermitianOperator build_qudit(const QuditModelParams& p);

/// (1/sqrt d) sum_n |n, n>
ComplexVector qudit_ground_state(int d);

/// |a_0> = |0>, |b_0> = q*|0> + sqrt(1 - |q|^2)|1>, so that <a_0|b_0*> = q.
ProductState qudit_initial_state(int d, Complex q);

/// tau = -(E_perp - E_0) t / (hbar d)
double qudit_rescaled_time(const QuditModelParams& p, double t, double hbar = 1.0);

struct ModelExtremes {
    double e_min = 0.0;
    double e_max = 0.0;
    double e_min_sep = 0.0;
    double e_max_sep = 0.0;
};

ModelExtremes qudit_extremes(const QuditModelParams& p);

// N-mode optical model ---------------------------------------------------------

inline constexpr int kMaxNModeParties = 12;

struct NModeModelParams {
    int n_parties = 2;
    int k_split = 0;      // number of creation factors, 0 <= K <= N
    Complex gamma = 1.0;  // nonzero
};

void validate(const NModeModelParams& p);

/// Gamma (A^dagger)^{(x)K} (x) A^{(x)(N-K)} + h.c. with A = |0><1|.
HermitianOperator build_nmode(const NModeModelParams& p);

/// (|x> + sign (Gamma*/|Gamma|)|y>)/sqrt 2 where Gamma|x><y| is the coupling
/// term; eigenvalue sign * |Gamma|.
ComplexVector nmode_ghz_state(const NModeModelParams& p, int sign = +1);

ModelExtremes nmode_extremes(const NModeModelParams& p);

// Closed-form separable solutions -------------------------------------------------

struct ClosedFormParams {
    int lambda = 1;    // +1 or -1
    Complex q = 0.0;
    double tau = 0.0;  // rescaled time
};

/// sqrt(((1 - lambda)/2)^2 + lambda |q|^2)
double closed_form_delta(int lambda, Complex q);

struct ClosedFormSC {
    Complex c;
    Complex s;
};

/// Coefficients with |a(tau)> = c|a_0> + s|b_0> (lambda = 1) or
/// c|a_0> + s|b_0*> (lambda = -1), global phase dropped.
ClosedFormSC closed_form_sc(const ClosedFormParams& p);

/// Local kets of the closed-form product trajectory at rescaled time tau.
/// lambda = 1 solves i d_tau|a> = |b><b|a>, i d_tau|b> = |a><a|b>;
/// lambda = -1 solves i d_tau|a> = |b*><b*|a>, i d_tau|b> = |a*><a*|b>.
std::pair<ComplexVector, ComplexVector> closed_form_locals(int lambda, const ComplexVector& a0, const ComplexVector& b0,
                                                        double tau);

// Analytic rates and speedups ------------------------------------------------------

struct SwapRates {
    double full = 0.0; // 2|kappa| sqrt(1 - |q|^4)
    double sep = 0.0;  // 2 sqrt 2 |q| |kappa| sqrt(1 - |q|^2)
};

SwapRates analytic_rates(const SwapModelParams& p);

struct AnalyticSpeedups {
    /// d / sqrt 2
    static double qudit(int d);
    /// 2^{N-1} / sqrt N
    static double nmode(int n);
};

AnalyticSpeedups analytic_speedups();

} // namespace qsl
