#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>

#include "fepinn/pde.hpp"

using namespace fepinn;

namespace {

// Field u = x^2, v = -2xy, p = x + y with stresses taken from the constitutive
// relations, so f0 and f3..f5 vanish identically and f1, f2 have closed forms.
std::array<JetD, 6> manufactured_field(double xv, double yv, double mu, int order = 1) {
    const JetD x = lift_coordinate(xv, 0, 2, order);
    const JetD y = lift_coordinate(yv, 1, 2, order);
    const JetD u = square(x);
    const JetD v = -2.0 * x * y;
    const JetD p = x + y;
    const JetD sxx = 4.0 * mu * x - p;
    const JetD sxy = -2.0 * mu * y;
    const JetD syy = -4.0 * mu * x - p;
    return {u, v, p, sxx, sxy, syy};
}

} // namespace

TEST_CASE("manufactured field leaves only the convective residuals") {
    FluidConstants consts;
    consts.rho = 1.0;
    consts.mu = 0.02;
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (int trial = 0; trial < 10; ++trial) {
        const double x = dist(gen);
        const double y = dist(gen);
        const auto field = manufactured_field(x, y, consts.mu);
        const auto r = ns_residuals<double>(std::span<const JetD>(field.data(), 6), consts);
        REQUIRE(r.n == 6);
        CHECK(std::fabs(r.f[0]) <= 1e-12);
        CHECK(r.f[1] == doctest::Approx(2.0 * consts.rho * x * x * x + 1.0 - 2.0 * consts.mu).epsilon(1e-12));
        CHECK(r.f[2] == doctest::Approx(2.0 * consts.rho * x * x * y + 1.0).epsilon(1e-12));
        CHECK(std::fabs(r.f[3]) <= 1e-12);
        CHECK(std::fabs(r.f[4]) <= 1e-12);
        CHECK(std::fabs(r.f[5]) <= 1e-12);
    }
}

TEST_CASE("mixed-form residuals never read second derivatives") {
    FluidConstants consts;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto field = manufactured_field(0.7, -0.3, consts.mu, 2);
    for (auto& j : field)
        for (auto& h : j.h) h = nan;
    const auto r = ns_residuals<double>(std::span<const JetD>(field.data(), 6), consts);
    for (int i = 0; i < r.n; ++i) CHECK(std::isfinite(r.f[i]));

    const auto clean = manufactured_field(0.7, -0.3, consts.mu, 1);
    const auto rc = ns_residuals<double>(std::span<const JetD>(clean.data(), 6), consts);
    for (int i = 0; i < r.n; ++i) CHECK(r.f[i] == rc.f[i]);
}

TEST_CASE("constant field with matching stresses is an exact solution") {
    FluidConstants consts;
    const double pv = 0.37;
    std::array<JetD, 6> field = {
        lift_constant(1.4, 2, 1),   // u
        lift_constant(-0.6, 2, 1),  // v
        lift_constant(pv, 2, 1),    // p
        lift_constant(-pv, 2, 1),   // sxx = -p
        lift_constant(0.0, 2, 1),   // sxy
        lift_constant(-pv, 2, 1),   // syy = -p
    };
    const auto r = ns_residuals<double>(std::span<const JetD>(field.data(), 6), consts);
    for (int i = 0; i < r.n; ++i) CHECK(r.f[i] == 0.0);
}

TEST_CASE("divergence component tracks a linear velocity field") {
    FluidConstants consts;
    const JetD x = lift_coordinate(2.0, 0, 2, 1);
    std::array<JetD, 6> field = {
        x,                         // u = x, so du/dx = 1
        lift_constant(0.0, 2, 1),
        lift_constant(0.0, 2, 1),
        lift_constant(0.0, 2, 1),
        lift_constant(0.0, 2, 1),
        lift_constant(0.0, 2, 1),
    };
    const auto r = ns_residuals<double>(std::span<const JetD>(field.data(), 6), consts);
    CHECK(r.f[0] == 1.0);
    CHECK(r.f[3] == doctest::Approx(-2.0 * consts.mu).epsilon(1e-15));
}

TEST_CASE("mixed-form residual validates its inputs") {
    FluidConstants consts;
    auto field = manufactured_field(0.1, 0.2, consts.mu);

    CHECK_THROWS_AS(ns_residuals<double>(std::span<const JetD>(field.data(), 5), consts),
                    std::invalid_argument);

    std::array<JetD, 6> value_only;
    for (auto& j : value_only) j = lift_constant(1.0, 2, 0);
    CHECK_THROWS_AS(ns_residuals<double>(std::span<const JetD>(value_only.data(), 6), consts),
                    std::invalid_argument);

    std::array<JetD, 6> wrong_dim;
    for (auto& j : wrong_dim) j = lift_constant(1.0, 1, 1);
    CHECK_THROWS_AS(ns_residuals<double>(std::span<const JetD>(wrong_dim.data(), 6), consts),
                    std::invalid_argument);

    FluidConstants bad;
    bad.mu = 0.0;
    CHECK_THROWS_AS(ns_residuals<double>(std::span<const JetD>(field.data(), 6), bad),
                    std::invalid_argument);
}

TEST_CASE("burgers residual on elementary fields") {
    FluidConstants consts;
    consts.mu = 0.01;

    const JetD flat = lift_constant(3.0, 2, 2);
    CHECK(burgers_residual(flat, consts).f[0] == 0.0);

    // u(x, t) = x gives u_t = 0, u_x = 1, u_xx = 0, so f0 = x.
    for (double xv : {0.0, 0.5, 2.0, 3.7}) {
        const JetD u = lift_coordinate(xv, 0, 2, 2);
        CHECK(burgers_residual(u, consts).f[0] == doctest::Approx(xv).epsilon(1e-15));
    }

    // u(x, t) = x^2 gives f0 = x^2 * 2x - mu * 2.
    const JetD u2 = square(lift_coordinate(1.5, 0, 2, 2));
    CHECK(burgers_residual(u2, consts).f[0] ==
          doctest::Approx(1.5 * 1.5 * 3.0 - consts.mu * 2.0).epsilon(1e-14));

    CHECK_THROWS_AS(burgers_residual(lift_constant(1.0, 2, 1), consts), std::invalid_argument);
    CHECK_THROWS_AS(burgers_residual(lift_constant(1.0, 1, 2), consts), std::invalid_argument);
}

TEST_CASE("analytic burgers profile satisfies its own equation") {
    FluidConstants consts;
    consts.mu = 0.01;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dx(0.0, 4.0);
    std::uniform_real_distribution<double> dt(0.0, 5.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const JetD u = burgers_exact_jet(dx(gen), dt(gen));
        const double res = std::fabs(burgers_residual(u, consts).f[0]);
        worst = std::max(worst, res);
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("analytic burgers values at pinned points") {
    CHECK(burgers_exact(0.0, 2.0) == 0.0);
    CHECK(std::fabs(burgers_exact(4.0, 1.0)) <= 1e-15);
    CHECK(burgers_exact(0.5, 5.0) == doctest::Approx(0.01 * std::numbers::pi).epsilon(1e-14));
    for (double x : {0.3, 1.1, 2.6, 3.9})
        CHECK(burgers_initial(x) == burgers_exact(x, 0.0));
    CHECK_THROWS_AS(burgers_exact(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(burgers_exact(1.0, 5.1), std::invalid_argument);
    CHECK_THROWS_AS(burgers_exact_jet(4.5, 1.0), std::invalid_argument);
}

TEST_CASE("analytic jet derivatives agree with finite differences") {
    const double x = 1.3, t = 2.2, h = 1e-6;
    const JetD j = burgers_exact_jet(x, t);
    const double fd_x = (burgers_exact(x + h, t) - burgers_exact(x - h, t)) / (2.0 * h);
    const double fd_t = (burgers_exact(x, t + h) - burgers_exact(x, t - h)) / (2.0 * h);
    const double fd_xx =
        (burgers_exact(x + h, t) - 2.0 * burgers_exact(x, t) + burgers_exact(x - h, t)) / (h * h);
    CHECK(j.v == burgers_exact(x, t));
    CHECK(j.g[0] == doctest::Approx(fd_x).epsilon(1e-8));
    CHECK(j.g[1] == doctest::Approx(fd_t).epsilon(1e-8));
    CHECK(j.hess(0, 0) == doctest::Approx(fd_xx).epsilon(1e-4));
}

TEST_CASE("inlet profile hits its pinned values") {
    CHECK(inlet_velocity(0.0) == 0.0);
    CHECK(inlet_velocity(0.4) == 0.0);
    CHECK(inlet_velocity(0.2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(inlet_velocity(0.1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(inlet_velocity(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(inlet_velocity(0.41), std::invalid_argument);
}

TEST_CASE("residual norm accumulates the active components only") {
    ResidualVector<double> r;
    r.n = 3;
    r.f = {1.0, -2.0, 3.0, 99.0, 99.0, 99.0};
    CHECK(r.norm_sq() == 14.0);
}
