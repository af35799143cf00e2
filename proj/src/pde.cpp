#include "fepinn/pde.hpp"

#include <cmath>
#include <numbers>

namespace fepinn {

namespace {

constexpr double kBurgersMu = 0.01;
constexpr double kDenomGuard = 1e-12;

void check_burgers_domain(double x, double t) {
    if (x < 0.0 || x > 4.0 || t < 0.0 || t > 5.0)
        throw std::invalid_argument("point outside the Burgers domain [0,4] x [0,5]");
}

} // namespace

double burgers_exact(double x, double t) {
    check_burgers_domain(x, t);
    const double pi = std::numbers::pi;
    const double E = std::exp(-kBurgersMu * pi * pi * (t - 5.0));
    const double denom = 2.0 + std::cos(pi * x) * E;
    if (std::fabs(denom) < kDenomGuard)
        throw std::runtime_error("analytic Burgers denominator vanished");
    return 2.0 * kBurgersMu * pi * std::sin(pi * x) * E / denom;
}

JetD burgers_exact_jet(double x, double t) {
    check_burgers_domain(x, t);
    const double pi = std::numbers::pi;
    const JetD jx = lift_coordinate(x, 0, 2);
    const JetD jt = lift_coordinate(t, 1, 2);
    const JetD E = exp((-kBurgersMu * pi * pi) * (jt - 5.0));
    const JetD denom = 2.0 + cos(pi * jx) * E;
    if (std::fabs(denom.v) < kDenomGuard)
        throw std::runtime_error("analytic Burgers denominator vanished");
    return (2.0 * kBurgersMu * pi) * sin(pi * jx) * E / denom;
}

double inlet_velocity(double y) {
    if (y < 0.0 || y > 0.4)
        throw std::invalid_argument("inlet coordinate outside the channel height [0, 0.4]");
    return 4.0 * y * (0.4 - y) / (0.4 * 0.4);
}

double burgers_initial(double x) {
    return burgers_exact(x, 0.0);
}

} // namespace fepinn
