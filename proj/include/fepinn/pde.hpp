#ifndef FEPINN_PDE_HPP
#define FEPINN_PDE_HPP

#include <array>
#include <span>
#include <stdexcept>

#include "fepinn/jet.hpp"

namespace fepinn {

struct FluidConstants {
    double rho = 1.0;
    double mu = 0.02;

    void validate() const {
        if (!(rho > 0.0) || !(mu > 0.0))
            throw std::invalid_argument("fluid constants must be positive");
    }
};

/// Up to six residual components of one PDE system at one point.
template <class S>
struct ResidualVector {
    int n = 0;
    std::array<S, 6> f{};

    S norm_sq() const {
        S acc = f[0] * f[0];
        for (int i = 1; i < n; ++i) acc = acc + f[i] * f[i];
        return acc;
    }
};

/// Steady incompressible Navier-Stokes in mixed form. The network outputs are
/// ordered (u, v, p, sxx, sxy, syy); inputs are (x, y). Components:
///   f0 = du/dx + dv/dy
///   f1 = rho (u du/dx + v du/dy) - dsxx/dx - dsxy/dy
///   f2 = rho (u dv/dx + v dv/dy) - dsxy/dx - dsyy/dy
///   f3 = sxx + p - 2 mu du/dx
///   f4 = syy + p - 2 mu dv/dy
///   f5 = sxy - mu (du/dy + dv/dx)
/// Only first derivatives are read; Hessian blocks are never touched.
template <class S>
ResidualVector<S> ns_residuals(std::span<const Jet2<S>> out, const FluidConstants& consts) {
    consts.validate();
    if (out.size() != 6)
        throw std::invalid_argument("mixed-form residual expects 6 output jets");
    for (const auto& j : out) {
        if (j.dim != 2) throw std::invalid_argument("mixed-form residual expects 2 input dimensions");
        if (j.order < 1) throw std::invalid_argument("mixed-form residual needs first derivatives");
    }
    const auto& u = out[0];
    const auto& v = out[1];
    const auto& p = out[2];
    const auto& sxx = out[3];
    const auto& sxy = out[4];
    const auto& syy = out[5];
    const double rho = consts.rho;
    const double mu = consts.mu;

    ResidualVector<S> r;
    r.n = 6;
    r.f[0] = u.g[0] + v.g[1];
    r.f[1] = rho * (u.v * u.g[0] + v.v * u.g[1]) - sxx.g[0] - sxy.g[1];
    r.f[2] = rho * (u.v * v.g[0] + v.v * v.g[1]) - sxy.g[0] - syy.g[1];
    r.f[3] = sxx.v + p.v - 2.0 * mu * u.g[0];
    r.f[4] = syy.v + p.v - 2.0 * mu * v.g[1];
    r.f[5] = sxy.v - mu * (u.g[1] + v.g[0]);
    return r;
}

/// Viscous Burgers residual, inputs (x, t), single output u:
///   f0 = du/dt + u du/dx - mu d2u/dx2
template <class S>
ResidualVector<S> burgers_residual(const Jet2<S>& u, const FluidConstants& consts) {
    consts.validate();
    if (u.dim != 2) throw std::invalid_argument("burgers residual expects 2 input dimensions");
    if (u.order < 2) throw std::invalid_argument("burgers residual needs second derivatives");
    ResidualVector<S> r;
    r.n = 1;
    r.f[0] = u.g[1] + u.v * u.g[0] - consts.mu * u.hess(0, 0);
    return r;
}

/// Analytic Burgers solution on [0, 4] x [0, 5] for mu = 0.01:
///   u(x, t) = 2 mu pi sin(pi x) E / (2 + cos(pi x) E),  E = exp(-mu pi^2 (t - 5))
double burgers_exact(double x, double t);

/// Exact jet of the analytic solution, built through jet arithmetic from the
/// coordinate lifts (so its derivatives are exact, not finite differences).
JetD burgers_exact_jet(double x, double t);

/// Parabolic inlet profile u(y) = 4 y (0.4 - y) / 0.4^2 on the channel inlet.
double inlet_velocity(double y);

/// Burgers initial state u(x, 0), the exact solution at t = 0.
double burgers_initial(double x);

} // namespace fepinn

#endif
