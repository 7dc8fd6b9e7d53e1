#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "cli.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "support.hpp"

using namespace qsl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double sep_dt(const HermitianOperator& h) { return 0.5 * kMaxStepFraction / spectral_norm(h); }

Outcome criterion1() {
    Outcome o;
    const auto start = Clock::now();
    cli::ScenarioConfig cfg;
    const cli::ReportDocument r = cli::cmd_compute(cfg);
    const double elapsed = seconds_since(start);
    o.require(std::abs(r.qsl - 2.0) <= 1e-6, "QSL = " + fmt(r.qsl));
    o.require(std::abs(r.qsl_sep_plus - std::sqrt(2.0)) <= 1e-6, "QSL_sep+ = " + fmt(r.qsl_sep_plus));
    o.require(r.ratio && std::abs(*r.ratio - 1.414214) <= 1e-6, "ratio off");
    o.require(r.converged, "solver did not converge");
    o.require(elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
    if (o.pass) o.detail = fmt(elapsed) + " s";
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto start = Clock::now();
    for (int d = 2; d <= 8; ++d) {
        cli::ScenarioConfig cfg;
        cfg.model = "qudit";
        cfg.d = d;
        cfg.solver.threads = 0;
        const cli::ReportDocument r = cli::cmd_compute(cfg);
        o.require(r.converged, "d = " + std::to_string(d) + " not converged");
        o.require(r.ratio && std::abs(*r.ratio - d / std::sqrt(2.0)) <= 1e-6, "d = " + std::to_string(d) + " ratio off");
        if (d == 3 && r.ratio) o.require(std::round(*r.ratio * 100.0) / 100.0 == 2.12, "d = 3 does not give 2.12");
    }
    const double elapsed = seconds_since(start);
    o.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
    if (o.pass) o.detail = fmt(elapsed) + " s";
    return o;
}

Outcome criterion3() {
    Outcome o;
    const auto start = Clock::now();
    double n8 = 0.0;
    for (int n = 2; n <= 8; ++n) {
        const auto t0 = Clock::now();
        cli::ScenarioConfig cfg;
        cfg.model = "nmode";
        cfg.n = n;
        cfg.solver.threads = 0;
        const cli::ReportDocument r = cli::cmd_compute(cfg);
        if (n == 8) n8 = seconds_since(t0);
        const double expected = std::pow(2.0, n - 1) / std::sqrt(double(n));
        const double sep = 1.0 / std::pow(2.0, n - 1);
        const std::string tag = "N = " + std::to_string(n);
        o.require(r.converged, tag + " not converged");
        o.require(r.ratio && std::abs(*r.ratio - expected) <= 1e-5, tag + " ratio off");
        o.require(std::abs(r.e_max_sep - sep) <= 1e-8 && std::abs(r.e_min_sep + sep) <= 1e-8, tag + " extremes off");
        if (n == 4) o.require(r.ratio && std::abs(*r.ratio - 4.0) <= 1e-5, "N = 4 ratio is not 4");
    }
    o.require(n8 < 60.0, "N = 8 runtime " + fmt(n8) + " s");
    if (o.pass) o.detail = "N = 8 in " + fmt(n8) + " s, total " + fmt(seconds_since(start)) + " s";
    return o;
}

Outcome criterion4() {
    Outcome o;
    double worst = 0.0;
    for (int k = 0; k <= 20; ++k) {
        const SwapModelParams p{1.0, std::polar(k / 20.0, 0.7)};
        const SwapModel m = build_swap(p);
        const SwapRates ref = analytic_rates(p);
        const auto grid = uniform_grid(2.0 * M_PI, 11);
        const auto full = evolve_full(m.h, embed(m.initial), grid);
        const auto sep = evolve_separable(m.h, m.initial, grid, sep_dt(m.h));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            worst = std::max(worst, std::abs(full.rates[i] - ref.full));
            worst = std::max(worst, std::abs(sep.rates[i] - ref.sep));
        }
    }
    o.require(worst <= 1e-6, "rate deviation " + fmt(worst));
    const SwapModel tight = build_swap({1.0, std::sqrt(0.5)});
    const double peak = rate_separable(tight.h, tight.initial).rate;
    o.require(std::abs(peak - std::sqrt(2.0)) <= 1e-6, "peak separable rate " + fmt(peak));
    if (o.pass) o.detail = "max deviation " + fmt(worst);
    return o;
}

Outcome criterion5() {
    Outcome o;
    double worst = 1.0;
    for (double mag : {0.25, 0.5, 0.75}) {
        const SwapModel m = build_swap({1.0, mag});
        const ProductState swapped(m.space, {m.initial.local(1), m.initial.local(0)});
        const std::vector<double> full_grid = {0.0, M_PI / 2.0};
        const auto full = evolve_full(m.h, embed(m.initial), full_grid);
        worst = std::min(worst, support::fidelity(full.states.back().vector(), embed(swapped).vector()));
        const std::vector<double> sep_grid = {0.0, M_PI / (2.0 * mag)};
        const auto sep = evolve_separable(m.h, m.initial, sep_grid, sep_dt(m.h));
        worst = std::min(worst, support::product_fidelity(sep.states.back(), swapped));
    }
    o.require(worst >= 1.0 - 1e-6, "fidelity " + fmt(worst));
    if (o.pass) o.detail = "min fidelity 1 - " + fmt(1.0 - worst);
    return o;
}

Outcome criterion6() {
    Outcome o;
    double worst_fid = 1.0;
    double worst_drift = 0.0;
    const Complex q(0.4, -0.3);
    {
        const SwapModel m = build_swap({1.0, q});
        const auto traj = evolve_separable(m.h, m.initial, uniform_grid(4.0 * M_PI, 101), sep_dt(m.h));
        const ComplexMatrix c0 = support::projector(m.initial.local(0)) + support::projector(m.initial.local(1));
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const auto [a, b] = closed_form_locals(1, m.initial.local(0), m.initial.local(1), traj.times[k]);
            worst_fid = std::min({worst_fid, support::fidelity(traj.states[k].local(0), a),
                                  support::fidelity(traj.states[k].local(1), b)});
            const ComplexMatrix c =
                support::projector(traj.states[k].local(0)) + support::projector(traj.states[k].local(1));
            worst_drift = std::max(worst_drift, (c - c0).cwiseAbs().maxCoeff());
        }
    }
    {
        const QuditModelParams p{3, 0.0, 1.0};
        const HermitianOperator h = build_qudit(p);
        const ProductState init = qudit_initial_state(3, q);
        // tau = -t/3, so |tau| covers [0, 4 pi]
        const auto traj = evolve_separable(h, init, uniform_grid(12.0 * M_PI, 101), sep_dt(h));
        auto cmotion = [](const ProductState& s) {
            return ComplexMatrix(support::projector(s.local(1).conjugate()) - support::projector(s.local(0)));
        };
        const ComplexMatrix c0 = cmotion(init);
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const auto [a, b] = closed_form_locals(-1, init.local(0), init.local(1), qudit_rescaled_time(p, traj.times[k]));
            worst_fid = std::min({worst_fid, support::fidelity(traj.states[k].local(0), a),
                                  support::fidelity(traj.states[k].local(1), b)});
            worst_drift = std::max(worst_drift, (cmotion(traj.states[k]) - c0).cwiseAbs().maxCoeff());
        }
    }
    o.require(worst_fid >= 1.0 - 1e-6, "fidelity " + fmt(worst_fid));
    o.require(worst_drift <= 1e-7, "C drift " + fmt(worst_drift));
    if (o.pass) o.detail = "min fidelity 1 - " + fmt(1.0 - worst_fid) + ", C drift " + fmt(worst_drift);
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 rng(0xacce97);
    const SpaceDescriptor space({2, 2});
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const HermitianOperator h = support::random_hermitian(4, rng);
        const SpeedReport r = qsl_sep_bound(h, space);
        const auto grid = support::bloch_grid_extremes(h);
        worst = std::max({worst, std::abs(r.e_max_sep - grid.max), std::abs(r.e_min_sep - grid.min)});
        const double slack = 1e-10;
        o.require(r.e_min <= r.e_min_sep + slack && r.e_min_sep <= r.e_max_sep + slack && r.e_max_sep <= r.e_max + slack,
                  "sandwich violated on instance " + std::to_string(trial));
        o.require(r.converged(), "instance " + std::to_string(trial) + " not converged");
    }
    o.require(worst <= 1e-4, "oracle gap " + fmt(worst));
    if (o.pass) o.detail = "max oracle gap " + fmt(worst);
    return o;
}

Outcome criterion8() {
    Outcome o;
    std::mt19937_64 rng(0xacce98);
    const SpaceDescriptor space({2, 2});
    const std::string factors = "IXYZ";
    std::vector<ComplexMatrix> observables;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            if (a || b) observables.push_back(pauli_observable(std::string{factors[a], factors[b]}));
        }
    }
    int false_positives = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const HermitianOperator h = support::random_hermitian(4, rng);
        const double bound = qsl_sep_bound(h, space).qsl_sep_plus;
        const auto traj = evolve_separable(h, support::random_product(space, rng), uniform_grid(2.0, 41), sep_dt(h));
        for (const auto& l : observables) {
            if (witness_check(expectation_series(traj, l), bound, 1.0).violated) ++false_positives;
        }
    }
    o.require(false_positives == 0, std::to_string(false_positives) + " false positives");

    const SwapModel m = build_swap({1.0, 0.2});
    const double bound = qsl_sep_bound(m.h, m.space).qsl_sep_plus;
    const auto full = evolve_full(m.h, embed(m.initial), uniform_grid(M_PI, 101));
    const WitnessSearchResult w = witness_search(full, bound);
    o.require(w.verdict.violated, "no violation found for |q| = 0.2");
    if (o.pass) o.detail = "certified by " + w.observable + " with excess " + fmt(w.verdict.max_excess);
    return o;
}

Outcome criterion9() {
    Outcome o;
    std::mt19937_64 rng(0xacce99);
    const SpaceDescriptor space({2, 2});
    double worst = 1.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<HermitianOperator> locals = {support::random_hermitian(2, rng),
                                                       support::random_hermitian(2, rng)};
        const HermitianOperator h_int = support::random_hermitian(4, rng);
        const HermitianOperator h = local_sum(locals) + h_int;
        const ProductState p0 = support::random_product(space, rng);
        const auto grid = uniform_grid(2.0, 5);
        const double dt = sep_dt(h);
        const auto lab = evolve_separable(h, p0, grid, dt);
        const HamiltonianFn eff = [&](double t) { return interaction_picture(locals, h_int, t); };
        const auto rot = evolve_separable(eff, spectral_norm(h_int), p0, grid, dt);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            for (std::size_t j = 0; j < 2; ++j) {
                const ComplexVector back = unitary_exp(locals[j], grid[k]).adjoint() * lab.states[k].local(j);
                worst = std::min(worst, support::fidelity(back, rot.states[k].local(j)));
            }
        }
    }
    o.require(worst >= 1.0 - 1e-6, "fidelity " + fmt(worst));
    if (o.pass) o.detail = "min fidelity 1 - " + fmt(1.0 - worst);
    return o;
}

Outcome criterion10() {
    Outcome o;
    std::mt19937_64 rng(0xacce10);
    const SpaceDescriptor space({2, 2});
    SolverConfig cfg;
    cfg.starts = 8;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 20; ++trial) {
        const HermitianOperator h = support::random_hermitian(4, rng);
        std::vector<ComplexMatrix> jumps;
        for (int k = 0; k < 2; ++k) jumps.push_back(0.2 * support::random_matrix(4, rng));
        const LindbladModel model(h, jumps);
        const LindbladSpeedBounds b = lindblad_speed_bounds(model, space, cfg);
        const ComplexMatrix g = support::random_matrix(4, rng);
        ComplexMatrix rho0 = g * g.adjoint();
        rho0 /= rho0.trace().real();
        rho0 = 0.5 * (rho0 + rho0.adjoint()).eval();
        const double dt = 0.5 * kMaxStepFraction / model.rate_scale();
        const auto traj = evolve_lindblad(model, rho0, uniform_grid(2.0, 21), dt);
        for (double r : traj.rates) worst_excess = std::max(worst_excess, r - b.total_closed);
    }
    o.require(worst_excess <= 1e-6, "rate exceeds bound by " + fmt(worst_excess));

    double closed_gap = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const HermitianOperator h = support::random_hermitian(4, rng);
        const ComplexVector psi = support::random_ket(4, rng);
        const LindbladModel model(h, {});
        const auto grid = uniform_grid(2.0, 9);
        const auto open = evolve_lindblad(model, psi * psi.adjoint(), grid, 0.5 * kMaxStepFraction / model.rate_scale());
        const auto closed = evolve_full(h, PureState(space, psi), grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const ComplexVector& v = closed.states[k].vector();
            closed_gap = std::max(closed_gap, (open.states[k] - v * v.adjoint()).cwiseAbs().maxCoeff());
        }
    }
    o.require(closed_gap <= 1e-7, "closed-limit gap " + fmt(closed_gap));
    if (o.pass) o.detail = "max rate - bound " + fmt(worst_excess) + ", closed-limit gap " + fmt(closed_gap);
    return o;
}

Outcome criterion11() {
    Outcome o;
    cli::ScenarioConfig cfg;
    cfg.solver.threads = 0;
    nlohmann::json meta;
    const auto files = cli::cmd_figures(0, cfg, meta);
    o.require(files.size() == 3, "expected three figure files");
    o.require(meta.at("converged").get<bool>(), "solver did not converge");
    double worst = 0.0;
    for (const auto& f : files) {
        const auto& cols = f.table.columns;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::string& name = cols[c];
            const auto pos = name.rfind("_analytic");
            if (pos == std::string::npos || pos + 9 != name.size()) continue;
            const std::string numeric = name.substr(0, pos) + "_numeric";
            const auto it = std::find(cols.begin(), cols.end(), numeric);
            if (it == cols.end()) continue;
            const std::size_t n = static_cast<std::size_t>(it - cols.begin());
            for (const auto& row : f.table.rows) {
                const double gap = std::abs(row[c] - row[n]) / std::max(1.0, std::abs(row[c]));
                worst = std::max(worst, gap);
            }
        }
        o.require(!f.table.rows.empty(), f.name + " is empty");
    }
    o.require(worst <= 1e-6, "figure deviation " + fmt(worst));
    if (o.pass) o.detail = "max deviation " + fmt(worst);
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"swap-model ratio", criterion1},
        {"qudit scaling", criterion2},
        {"multipartite exponential speedup", criterion3},
        {"rate formulas", criterion4},
        {"swap timing", criterion5},
        {"closed-form oracle equivalence", criterion6},
        {"separability-eigenvalue oracle", criterion7},
        {"witness suite", criterion8},
        {"interaction-picture equivalence", criterion9},
        {"open-system bound", criterion10},
        {"figure data reproduction", criterion11},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("[%s] criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
