#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qsl/dynamics.hpp"
#include "qsl/errors.hpp"
#include "qsl/models.hpp"
#include "support.hpp"

using namespace qsl;

namespace {

ComplexMatrix lowering(double gamma) {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 1) = std::sqrt(gamma);
    return a;
}

ComplexMatrix random_density(Eigen::Index dim, std::mt19937_64& rng) {
    const ComplexMatrix g = support::random_matrix(dim, rng);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

} // namespace

TEST_CASE("without jumps the Lindblad flow is the unitary flow") {
    std::mt19937_64 rng(41);
    const SpaceDescriptor space({2, 2});
    for (int trial = 0; trial < 5; ++trial) {
        const HermitianOperator h = support::random_hermitian(4, rng);
        const ComplexVector psi = support::random_ket(4, rng);
        const auto grid = uniform_grid(2.0, 9);
        const LindbladModel model(h, {});
        const double dt = 0.5 * kMaxStepFraction / model.rate_scale();
        const DensityTrajectory open = evolve_lindblad(model, psi * psi.adjoint(), grid, dt);
        const FullTrajectory closed = evolve_full(h, PureState(space, psi), grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const ComplexVector& v = closed.states[k].vector();
            CHECK((open.states[k] - v * v.adjoint()).cwiseAbs().maxCoeff() <= 1e-7);
            CHECK(std::abs(open.rates[k] - closed.rates[k]) <= 1e-7);
        }
    }
}

TEST_CASE("amplitude damping decays the excited population exponentially") {
    const double gamma = 0.8;
    const LindbladModel model(HermitianOperator::zero(2), {lowering(gamma)});
    ComplexMatrix rho0 = ComplexMatrix::Zero(2, 2);
    rho0(1, 1) = 1.0;
    const auto grid = uniform_grid(3.0, 7);
    const auto traj = evolve_lindblad(model, rho0, grid, 0.005);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(traj.states[k](1, 1).real() == doctest::Approx(std::exp(-gamma * grid[k])).epsilon(1e-8));
        CHECK(traj.states[k].trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("the maximally mixed state is stationary under a unital dissipator") {
    const LindbladModel model(HermitianOperator(pauli::x()), {0.7 * pauli::z(), 0.3 * pauli::y()});
    const ComplexMatrix mixed = 0.5 * ComplexMatrix::Identity(2, 2);
    const auto traj = evolve_lindblad(model, mixed, uniform_grid(1.0, 3), 0.005);
    for (const auto& rho : traj.states) CHECK((rho - mixed).cwiseAbs().maxCoeff() <= 1e-12);
    for (double r : traj.rates) CHECK(r <= 1e-12);
}

TEST_CASE("evolve_lindblad input checks") {
    const LindbladModel model(HermitianOperator(pauli::z()), {lowering(1.0)});
    ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    const std::vector<double> grid = {0.0, 0.1};
    // rate_scale = 1 + 1 = 2
    CHECK(model.rate_scale() == doctest::Approx(2.0));
    CHECK_THROWS_AS(evolve_lindblad(model, rho, grid, 0.01), StepSizeError);
    CHECK_NOTHROW(evolve_lindblad(model, rho, grid, 0.005));

    ComplexMatrix half = 0.5 * rho;
    CHECK_THROWS(evolve_lindblad(model, half, grid, 0.005));
    ComplexMatrix negative = ComplexMatrix::Zero(2, 2);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    CHECK_THROWS(evolve_lindblad(model, negative, grid, 0.005));
    ComplexMatrix skew = rho;
    skew(0, 1) = 0.1;
    CHECK_THROWS_AS(evolve_lindblad(model, skew, grid, 0.005), NonHermitianError);
    CHECK_THROWS_AS(evolve_lindblad(model, ComplexMatrix::Identity(4, 4) / 4.0, grid, 0.005), DimensionError);
    CHECK_THROWS_AS(LindbladModel(HermitianOperator(pauli::z()), {ComplexMatrix::Identity(3, 3)}), DimensionError);
}

TEST_CASE("dissipator of amplitude damping on the excited state") {
    const double gamma = 0.6;
    const LindbladModel model(HermitianOperator::zero(2), {lowering(gamma)});
    ComplexMatrix excited = ComplexMatrix::Zero(2, 2);
    excited(1, 1) = 1.0;
    ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
    expected(0, 0) = gamma;
    expected(1, 1) = -gamma;
    CHECK((model.dissipator(excited) - expected).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(dissipative_rate(model, basis_ket(2, 1)) == doctest::Approx(2.0 * gamma));
}

TEST_CASE("lindblad_speed_bounds") {
    const SpaceDescriptor space({2, 2});
    const SwapModel swap = build_swap({1.0, 0.0});

    const LindbladSpeedBounds closed = lindblad_speed_bounds(LindbladModel(swap.h, {}), space);
    CHECK(closed.qsl_d == 0.0);
    CHECK(closed.qsl_d_upper == 0.0);
    CHECK(closed.qsl_closed == doctest::Approx(2.0));
    CHECK(closed.qsl_sep_plus == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK(closed.total_closed == doctest::Approx(2.0));

    const double gamma = 0.5;
    const ComplexMatrix damp = embed_local(lowering(gamma), space, 0);
    const LindbladSpeedBounds open = lindblad_speed_bounds(LindbladModel(swap.h, {damp}), space);
    CHECK(open.qsl_d >= 2.0 * gamma - 1e-12);
    CHECK(open.qsl_d <= open.qsl_d_upper + 1e-12);
    CHECK(open.qsl_d_upper == doctest::Approx(2.0 * gamma));
    CHECK(open.total_sep == doctest::Approx(open.qsl_sep_plus + open.qsl_d));
}

TEST_CASE("measured open-system rates stay below QSL(H) + qsl_d") {
    std::mt19937_64 rng(42);
    const SpaceDescriptor space({2, 2});
    SolverConfig cfg;
    cfg.starts = 8;
    for (int trial = 0; trial < 10; ++trial) {
        const HermitianOperator h = support::random_hermitian(4, rng);
        std::vector<ComplexMatrix> jumps;
        for (int k = 0; k < 2; ++k) jumps.push_back(0.4 * support::random_matrix(4, rng) / std::sqrt(4.0));
        const LindbladModel model(h, jumps);
        const LindbladSpeedBounds b = lindblad_speed_bounds(model, space, cfg);
        const double dt = 0.5 * kMaxStepFraction / model.rate_scale();
        const auto traj = evolve_lindblad(model, random_density(4, rng), uniform_grid(2.0, 21), dt);
        for (double r : traj.rates) CHECK(r <= b.total_closed + 1e-6);
    }
}
