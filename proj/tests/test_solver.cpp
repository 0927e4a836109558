#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thyp/errors.hpp"
#include "thyp/models.hpp"
#include "thyp/solver.hpp"

#include <cmath>
#include <numbers>

using namespace thyp;

namespace {

constexpr double kPi = std::numbers::pi;

TorusField sine(const TorusGrid& g, double amp, double phase = 0.0) {
    TorusField f(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) f(0, p) = amp * std::sin(g.point(p)[0] - phase);
    return f;
}

double max_abs_diff(const TorusField& a, const TorusField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    }
    return m;
}

// Burgers with u0 = a sin x before breaking: u(t, x) = a sin(x0) where
// x = x0 + t a sin(x0). Newton on x0 from the characteristic foot.
double burgers_characteristics(double a, double t, double x) {
    double x0 = x;
    for (int it = 0; it < 100; ++it) {
        const double f = x0 + t * a * std::sin(x0) - x;
        const double df = 1.0 + t * a * std::cos(x0);
        const double step = f / df;
        x0 -= step;
        if (std::abs(step) < 1e-16) break;
    }
    return a * std::sin(x0);
}

TorusField burgers_oracle(const TorusGrid& g, double a, double t) {
    TorusField f(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) f(0, p) = burgers_characteristics(a, t, g.point(p)[0]);
    return f;
}

SolveConfig base_config(double T) {
    SolveConfig cfg;
    cfg.T_request = T;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    SolveConfig cfg;
    cfg.s = 1.5;
    CHECK_THROWS_AS(cfg.validate(1), ConfigError);
    cfg.s = 1.6;
    CHECK_NOTHROW(cfg.validate(1));
    CHECK_THROWS_AS(cfg.validate(2), ConfigError);
    cfg.s = 3.0;
    cfg.picard_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(3), ConfigError);
}

TEST_CASE("linear right-hand side") {
    const TorusGrid g(1, 32);
    const SystemDef adv = models::make_advection({2.0});
    const TorusField u = sine(g, 1.0);
    TorusField expected(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) expected(0, p) = -2.0 * std::cos(g.point(p)[0]);
    CHECK(max_abs_diff(linear_rhs(adv, u, u, 0.0), expected) < 1e-12);

    TorusField c(g, 1);
    for (double& v : c.values()) v = 0.3;
    CHECK(max_abs_diff(linear_rhs(adv, c, c, 0.0), TorusField(g, 1)) < 1e-14);

    const SystemDef burgers = models::make_burgers();
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.point(p)[0];
        expected(0, p) = -std::sin(x) * std::cos(x);
    }
    CHECK(max_abs_diff(linear_rhs(burgers, u, u, 0.0), expected) < 1e-12);

    const SystemDef drift = models::make_drift(1.0, 1.0);
    TorusField bad(g, 1);
    CHECK_THROWS_AS(linear_rhs(drift, bad, bad, 0.0), StateOutsideDomain);
}

TEST_CASE("time grid ends exactly at the endpoint") {
    const auto fwd = time_grid(0.0, 1.0, 0.3);
    REQUIRE(fwd.size() == 5);
    CHECK(fwd.back() == 1.0);
    CHECK(fwd[3] == doctest::Approx(0.9));
    const auto bwd = time_grid(1.0, 0.0, 0.25);
    REQUIRE(bwd.size() == 5);
    CHECK(bwd.back() == 0.0);
    CHECK(bwd[1] == doctest::Approx(0.75));
}

TEST_CASE("Hermite interpolation is exact for cubics in time") {
    const TorusGrid g(1, 8);
    Trajectory tr;
    auto value = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t * t; };
    auto rate = [](double t) { return -2.0 + 1.5 * t * t; };
    for (double t : {0.0, 0.4, 1.0}) {
        TorusField u(g, 1), r(g, 1);
        for (double& v : u.values()) v = value(t);
        for (double& v : r.values()) v = rate(t);
        tr.times.push_back(t);
        tr.states.push_back(u);
        tr.rates.push_back(r);
    }
    for (double t : {0.1, 0.4, 0.77, 1.0}) CHECK(tr.at(t)(0, 3) == doctest::Approx(value(t)).epsilon(1e-14));
}

TEST_CASE("advection is reproduced to round-off and preserves the L2 norm") {
    const TorusGrid g(1, 64);
    const SystemDef adv = models::make_advection({1.0});
    const TorusField u0 = sine(g, 1.0);
    const Trajectory tr = evolve_linear(adv, Trajectory::constant(0.0, u0), u0, 0.0, 1.0, base_config(1.0));
    CHECK(tr.times.back() == 1.0);
    CHECK(max_abs_diff(tr.back(), sine(g, 1.0, 1.0)) < 1e-8);
    double drift = 0.0;
    for (const auto& s : tr.states) drift = std::max(drift, std::abs(l2_norm(s) - l2_norm(u0)));
    CHECK(drift < 1e-10);
}

TEST_CASE("zero system leaves data unchanged") {
    const TorusGrid g(1, 32);
    const SystemDef zero = models::make_constant_coefficient(Mat::Zero(2, 2));
    TorusField u0(g, 2);
    for (std::size_t p = 0; p < g.size(); ++p) {
        u0(0, p) = std::cos(g.point(p)[0]);
        u0(1, p) = 0.5;
    }
    const Trajectory tr = evolve_linear(zero, Trajectory::constant(0.0, u0), u0, 0.0, 0.7, base_config(0.7));
    CHECK(max_abs_diff(tr.back(), u0) == 0.0);
}

TEST_CASE("symmetric constant-coefficient evolution is unitary") {
    const TorusGrid g(1, 64);
    Mat A(2, 2);
    A << 0.3, 1.0, 1.0, -0.5;
    const SystemDef sys = models::make_constant_coefficient(A);
    TorusField u0(g, 2);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.point(p)[0];
        u0(0, p) = std::sin(x) + 0.2 * std::cos(3 * x);
        u0(1, p) = 0.5 * std::cos(2 * x);
    }
    // RK4 amplitude error on the k = 3 mode is O((k c dt)^6) per step
    SolveConfig cfg = base_config(2.0);
    cfg.fixed_dt = 0.005;
    const Trajectory tr = evolve_linear(sys, Trajectory::constant(0.0, u0), u0, 0.0, 2.0, cfg);
    for (const auto& s : tr.states) CHECK(std::abs(l2_norm(s) - l2_norm(u0)) < 1e-10);
}

TEST_CASE("linear systems converge in two Picard iterates") {
    const TorusGrid g(1, 64);
    const SystemDef adv = models::make_advection({1.0, -0.5});
    TorusField u0(g, 2);
    for (std::size_t p = 0; p < g.size(); ++p) {
        u0(0, p) = std::sin(g.point(p)[0]);
        u0(1, p) = std::cos(2 * g.point(p)[0]);
    }
    const SolveOutcome out = picard_solve(adv, u0, base_config(1.0));
    CHECK(out.converged);
    CHECK(out.status.kind == ContinuationKind::ReachedHorizon);
    REQUIRE(out.history.records.size() == 2);
    CHECK(out.history.records[1].diff_prev <= 1e-10);
    CHECK(out.T_actual == doctest::Approx(1.0));
}

TEST_CASE("small-amplitude Burgers matches the characteristics oracle") {
    const TorusGrid g(1, 64);
    const SystemDef burgers = models::make_burgers();
    const SolveOutcome out = picard_solve(burgers, sine(g, 0.1), base_config(1.0));
    REQUIRE(out.converged);
    double err = 0.0;
    for (std::size_t k = 0; k < out.trajectory.size(); ++k) {
        err = std::max(err, l2_norm(out.trajectory.states[k] -
                                    burgers_oracle(g, 0.1, out.trajectory.times[k])));
    }
    CHECK(err < 1e-6);
    // measured contraction once the iteration settles
    const auto& rec = out.history.records;
    for (std::size_t n = 2; n < rec.size(); ++n) {
        if (rec[n].window == rec[n - 1].window) CHECK(rec[n].diff_prev <= 0.5 * rec[n - 1].diff_prev);
    }
}

TEST_CASE("solving backward in time recovers the data") {
    const TorusGrid g(1, 64);
    const SystemDef burgers = models::make_burgers();
    const TorusField u0 = sine(g, 0.2);
    const SolveOutcome fwd = picard_solve(burgers, u0, base_config(0.5));
    REQUIRE(fwd.converged);
    const SolveOutcome bwd = picard_solve(burgers, fwd.trajectory.back(), base_config(-0.5), 0.5);
    REQUIRE(bwd.converged);
    CHECK(bwd.trajectory.times.back() == doctest::Approx(0.0));
    CHECK(l2_norm(bwd.trajectory.back() - u0) < 1e-8);
}

TEST_CASE("halving the CFL factor changes the solution only at the time-stepping error level") {
    const TorusGrid g(1, 64);
    const SystemDef burgers = models::make_burgers();
    SolveConfig a = base_config(0.5);
    a.dt_max = 0.05;
    SolveConfig b = a;
    b.dt_cfl = 0.2;
    b.dt_max = 0.025;
    const SolveOutcome ra = picard_solve(burgers, sine(g, 0.3), a);
    const SolveOutcome rb = picard_solve(burgers, sine(g, 0.3), b);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    CHECK(l2_norm(ra.trajectory.back() - rb.trajectory.back()) < 1e-7);
    CHECK(difference_norm(rb.trajectory, ra.trajectory) < 1e-7);
}

TEST_CASE("final-state error decreases monotonically as the step is halved") {
    const TorusGrid g(1, 64);
    const SystemDef burgers = models::make_burgers();
    auto final_state = [&](double dt) {
        SolveConfig cfg = base_config(0.5);
        cfg.fixed_dt = dt;
        const SolveOutcome out = picard_solve(burgers, sine(g, 0.3), cfg);
        REQUIRE(out.converged);
        return out.trajectory.back();
    };
    const TorusField ref = final_state(0.003125);
    double prev = 1e300;
    for (double dt : {0.05, 0.025, 0.0125}) {
        const double err = l2_norm(final_state(dt) - ref);
        CHECK(err < prev);
        CHECK(err < 1e-6);
        prev = err;
    }
}

TEST_CASE("the Picard limit does not depend on the seed") {
    const TorusGrid g(1, 64);
    const SystemDef burgers = models::make_burgers();
    SolveConfig cfg = base_config(0.5);
    const SolveOutcome plain = picard_solve(burgers, sine(g, 0.2), cfg);
    cfg.seed_perturbation = 0.05;
    const SolveOutcome seeded = picard_solve(burgers, sine(g, 0.2), cfg);
    REQUIRE(plain.converged);
    REQUIRE(seeded.converged);
    CHECK(difference_norm(plain.trajectory, seeded.trajectory) < 1e-9);
}

TEST_CASE("difference norm") {
    const TorusGrid g(1, 16);
    const TorusField u = sine(g, 1.0);
    Trajectory a = Trajectory::constant(0.0, u);
    CHECK(difference_norm(a, a) == 0.0);
    TorusField shifted = u;
    for (double& v : shifted.values()) v += 0.25;
    const Trajectory b = Trajectory::constant(0.0, shifted);
    CHECK(difference_norm(a, b) == doctest::Approx(0.25 * std::sqrt(2.0 * kPi)).epsilon(1e-12));
    const Trajectory c = Trajectory::constant(0.0, TorusField(TorusGrid(1, 32), 1));
    CHECK_THROWS_AS(difference_norm(a, c), GridMismatch);
}

TEST_CASE("continuation: advection reaches the horizon") {
    const TorusGrid g(1, 32);
    const SolveOutcome out = picard_solve(models::make_advection({1.0}), sine(g, 1.0), base_config(3.0));
    CHECK(out.status.kind == ContinuationKind::ReachedHorizon);
    CHECK(out.status.t == doctest::Approx(3.0));
    CHECK_FALSE(out.halted());
}

TEST_CASE("continuation: Burgers past breaking halts with norm blow-up near t = 1") {
    const TorusGrid g(1, 128);
    const SolveOutcome out = picard_solve(models::make_burgers(), sine(g, -1.0), base_config(2.0));
    CHECK(out.status.kind == ContinuationKind::NormBlowup);
    CHECK(std::abs(out.status.t - 1.0) < 0.05);
    CHECK(out.halted());
    CHECK_FALSE(out.converged);
}

TEST_CASE("continuation: drift toward the boundary halts with vanishing margin near t = 0.1") {
    const TorusGrid g(1, 16);
    TorusField u0(g, 1);
    for (double& v : u0.values()) v = 0.1;
    const SolveOutcome out = picard_solve(models::make_drift(1.0, 1.0), u0, base_config(1.0));
    CHECK(out.status.kind == ContinuationKind::MarginVanishing);
    CHECK(std::abs(out.status.t - 0.1) < 0.002);
}

TEST_CASE("inadmissible or marginal data is rejected before solving") {
    const TorusGrid g(1, 16);
    TorusField u0(g, 1);
    for (double& v : u0.values()) v = 0.1;
    u0(0, 4) = -0.1;
    CHECK_THROWS_AS(picard_solve(models::make_drift(1.0, 1.0), u0, base_config(1.0)), AdmissibilityViolation);
    for (double& v : u0.values()) v = 5e-4;
    CHECK_THROWS_AS(picard_solve(models::make_drift(1.0, 1.0), u0, base_config(1.0)), StateOutsideDomain);
}

TEST_CASE("energy envelope: conserved energies fit with zero growth") {
    const TorusGrid g(1, 64);
    Mat A(2, 2);
    A << 0.0, 1.0, 1.0, 0.0;
    TorusField u0(g, 2);
    for (std::size_t p = 0; p < g.size(); ++p) {
        u0(0, p) = std::sin(g.point(p)[0]);
        u0(1, p) = 0.3 * std::cos(2 * g.point(p)[0]);
    }
    SolveConfig cfg = base_config(1.0);
    cfg.s = 1.6;
    const SolveOutcome out = picard_solve(models::make_constant_coefficient(A), u0, cfg);
    const EnergyReport rep = verify_energy_growth(out);
    CHECK(std::abs(rep.b) < 1e-8);
    CHECK(rep.samples == out.energies.size());

    const SolveOutcome adv = picard_solve(models::make_advection({1.0}), sine(g, 1.0), base_config(1.0));
    CHECK(std::abs(verify_energy_growth(adv).b) < 1e-8);
}

TEST_CASE("energy envelope: Burgers before breaking") {
    const TorusGrid g(1, 64);
    const SolveOutcome out = picard_solve(models::make_burgers(), sine(g, 0.5), base_config(0.8));
    REQUIRE(out.converged);
    const EnergyReport rep = verify_energy_growth(out);
    CHECK(std::isfinite(rep.a));
    CHECK(std::isfinite(rep.b));
    CHECK(rep.b >= 0.0);
    const double E0 = std::pow(out.energies.front().sobolev, 2);
    for (const auto& e : out.energies) {
        const double tau = std::abs(e.t - out.energies.front().t);
        const double env = rep.a * std::exp(rep.b * tau) * (E0 + rep.b * tau);
        CHECK(env >= std::pow(e.sobolev, 2) * (1.0 - 1e-12));
    }
    CHECK(rep.max_slack >= 0.0);

    SolveOutcome few = out;
    few.energies.resize(2);
    CHECK_THROWS_AS(verify_energy_growth(few), InsufficientSamples);
}

TEST_CASE("energy samples respect the symmetrizer sandwich for scalar systems") {
    const TorusGrid g(1, 64);
    const SolveOutcome out = picard_solve(models::make_burgers(), sine(g, 0.5), base_config(0.5));
    for (const auto& e : out.energies) {
        CHECK(e.energy == doctest::Approx(e.sobolev * e.sobolev).epsilon(1e-9));
    }
}

TEST_CASE("dependence probe: linear system has order one") {
    const TorusGrid g(1, 64);
    const SystemDef adv = models::make_advection({1.0, -1.0});
    TorusField u0(g, 2);
    for (std::size_t p = 0; p < g.size(); ++p) u0(0, p) = std::sin(g.point(p)[0]);
    const DependenceTable t = continuous_dependence_probe(adv, u0, {1e-2, 1e-3, 1e-4}, base_config(1.0));
    CHECK(std::abs(t.order - 1.0) < 1e-6);
    const DependenceTable zero = continuous_dependence_probe(adv, u0, {0.0, 1e-3}, base_config(1.0));
    CHECK(zero.rows[0].difference == 0.0);
}

TEST_CASE("dependence probe: small-amplitude Burgers is Lipschitz") {
    const TorusGrid g(1, 64);
    const DependenceTable t = continuous_dependence_probe(models::make_burgers(), sine(g, 0.1),
                                                          {1e-2, 1e-3, 1e-4}, base_config(1.0));
    CHECK(t.order >= 0.9);
    CHECK(t.order <= 1.1);
}

TEST_CASE("smooth unit profile has unit Sobolev norm") {
    const TorusGrid g(2, 16);
    const TorusField w = smooth_unit_profile(g, 3, 2.5);
    CHECK(sobolev_norm(w, 2.5) == doctest::Approx(1.0).epsilon(1e-12));
}
