#include "fepinn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace fepinn {

const char* opt_status_name(OptStatus s) {
    switch (s) {
        case OptStatus::threshold_reached: return "threshold_reached";
        case OptStatus::max_iterations: return "max_iterations";
        case OptStatus::line_search_failed: return "line_search_failed";
        case OptStatus::stationary: return "stationary";
        case OptStatus::diverged: return "diverged";
    }
    throw std::invalid_argument("unknown optimizer status");
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad) {
    const size_t n = params.size();
    if (grad.size() != n)
        throw std::invalid_argument("gradient size does not match parameter size");
    if (state.m.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    } else if (state.m.size() != n) {
        throw std::invalid_argument("adam state was sized for a different parameter count");
    }
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(grad[i]))
            throw std::runtime_error("non-finite gradient component at index " + std::to_string(i));

    const AdamConfig& c = state.cfg;
    ++state.t;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < n; ++i) {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct HistoryPair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// Strong-Wolfe line search state shared between bracketing and zoom.
struct LineSearch {
    const Objective& obj;
    std::span<const double> x0;
    std::span<const double> d;
    double f0;
    double dphi0;
    double c1, c2;
    int evals_left;
    std::vector<double>& x_trial;
    std::vector<double>& g_trial;

    double last_f = 0.0;
    double last_dphi = 0.0;

    // Evaluates phi(a) = f(x0 + a d); stores f and directional derivative.
    bool eval(double a) {
        if (evals_left <= 0) return false;
        --evals_left;
        force_eval(a);
        return true;
    }

    void force_eval(double a) {
        for (size_t i = 0; i < x0.size(); ++i) x_trial[i] = x0[i] + a * d[i];
        last_f = obj(x_trial, g_trial);
        last_dphi = dot(g_trial, d);
    }

    bool armijo(double a, double f) const { return f <= f0 + c1 * a * dphi0; }
    bool curvature(double dphi) const { return std::fabs(dphi) <= -c2 * dphi0; }
};

struct LsOutcome {
    bool ok = false;
    double alpha = 0.0;
    double f = 0.0;
};

LsOutcome zoom(LineSearch& ls, double a_lo, double f_lo, double dphi_lo, double a_hi,
               double f_hi) {
    (void)f_hi;
    while (ls.evals_left > 0) {
        if (std::fabs(a_hi - a_lo) < 1e-18 * std::max(1.0, std::fabs(a_lo))) break;
        const double a_j = 0.5 * (a_lo + a_hi);  // bisection: robust, budget-bounded
        if (!ls.eval(a_j)) break;
        const double f_j = ls.last_f;
        const double dphi_j = ls.last_dphi;
        if (!std::isfinite(f_j) || !ls.armijo(a_j, f_j) || f_j >= f_lo) {
            a_hi = a_j;
        } else {
            if (ls.curvature(dphi_j)) return {true, a_j, f_j};
            if (dphi_j * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
            a_lo = a_j;
            f_lo = f_j;
            dphi_lo = dphi_j;
        }
    }
    // Budget exhausted: fall back to the best sufficient-decrease point so a
    // converging run is not aborted; the curvature guard upstream will simply
    // skip the resulting history pair. The extra evaluation restores the
    // trial buffers to the accepted point.
    if (a_lo > 0.0 && std::isfinite(f_lo) && f_lo < ls.f0) {
        ls.force_eval(a_lo);
        return {true, a_lo, ls.last_f};
    }
    (void)dphi_lo;
    return {};
}

LsOutcome wolfe_search(LineSearch& ls, double alpha_init) {
    double a_prev = 0.0;
    double f_prev = ls.f0;
    double dphi_prev = ls.dphi0;
    double a = alpha_init;
    bool first = true;
    while (ls.evals_left > 0) {
        if (!ls.eval(a)) break;
        const double f_a = ls.last_f;
        const double dphi_a = ls.last_dphi;
        if (!std::isfinite(f_a) || !ls.armijo(a, f_a) || (!first && f_a >= f_prev))
            return zoom(ls, a_prev, f_prev, dphi_prev, a, f_a);
        if (ls.curvature(dphi_a)) return {true, a, f_a};
        if (dphi_a >= 0.0) return zoom(ls, a, f_a, dphi_a, a_prev, f_prev);
        a_prev = a;
        f_prev = f_a;
        dphi_prev = dphi_a;
        a = std::min(2.0 * a, 1e10);
        first = false;
    }
    return {};
}

} // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double>& x,
                           const LbfgsConfig& cfg, const StopRule& stop,
                           const IterObserver& observer) {
    if (cfg.history < 1) throw std::invalid_argument("lbfgs history must be at least 1");
    if (!(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0))
        throw std::invalid_argument("wolfe constants need 0 < c1 < c2 < 1");
    if (cfg.max_line_evals < 2)
        throw std::invalid_argument("line search needs at least 2 evaluations");
    if (stop.max_iterations < 0)
        throw std::invalid_argument("iteration budget must be non-negative");

    const size_t n = x.size();
    std::vector<double> g(n), d(n), x_trial(n), g_trial(n), q(n);
    std::deque<HistoryPair> history;

    LbfgsResult res;
    double f = objective(x, g);
    double gnorm = norm2(g);
    if (observer) observer(0, f, gnorm, x);

    std::vector<double> best_x = x;
    double best_f = f;

    auto diverging = [&](double value) {
        return !std::isfinite(value) || value > stop.divergence_guard;
    };

    if (diverging(f)) {
        res.status = OptStatus::diverged;
        res.final_loss = f;
        return res;
    }
    if (f <= stop.loss_threshold) {
        res.status = OptStatus::threshold_reached;
        res.final_loss = f;
        return res;
    }
    if (gnorm <= cfg.grad_eps) {
        res.status = OptStatus::stationary;
        res.final_loss = f;
        return res;
    }

    res.status = OptStatus::max_iterations;
    int iter = 1;
    while (iter <= stop.max_iterations) {
        // Two-loop recursion for d = -H g.
        if (history.empty()) {
            for (size_t i = 0; i < n; ++i) d[i] = -g[i];
        } else {
            q.assign(g.begin(), g.end());
            std::vector<double> alpha(history.size());
            for (size_t h = history.size(); h-- > 0;) {
                const auto& p = history[h];
                alpha[h] = p.rho * dot(p.s, q);
                for (size_t i = 0; i < n; ++i) q[i] -= alpha[h] * p.y[i];
            }
            const auto& last = history.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (size_t i = 0; i < n; ++i) q[i] *= gamma;
            for (size_t h = 0; h < history.size(); ++h) {
                const auto& p = history[h];
                const double beta = p.rho * dot(p.y, q);
                for (size_t i = 0; i < n; ++i) q[i] += (alpha[h] - beta) * p.s[i];
            }
            for (size_t i = 0; i < n; ++i) d[i] = -q[i];
        }

        double dphi0 = dot(g, d);
        if (dphi0 >= 0.0) {
            // Not a descent direction; drop the history and fall back.
            history.clear();
            for (size_t i = 0; i < n; ++i) d[i] = -g[i];
            dphi0 = -dot(g, g);
            if (dphi0 == 0.0) {
                res.status = OptStatus::stationary;
                break;
            }
        }

        LineSearch ls{objective, x,  d,       f,      dphi0, cfg.c1, cfg.c2,
                      cfg.max_line_evals, x_trial, g_trial};
        const double alpha_init = history.empty() ? std::min(1.0, 1.0 / std::max(gnorm, 1e-30)) : 1.0;
        const LsOutcome out = wolfe_search(ls, alpha_init);

        if (!out.ok) {
            if (!history.empty()) {
                history.clear();  // retry this iteration along -g
                continue;
            }
            res.status = OptStatus::line_search_failed;
            break;
        }

        // ls.g_trial / x_trial hold the state at the accepted alpha.
        std::vector<double>& g_new = g_trial;
        std::vector<double>& x_new = x_trial;

        HistoryPair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        for (size_t i = 0; i < n; ++i) {
            pair.s[i] = x_new[i] - x[i];
            pair.y[i] = g_new[i] - g[i];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > cfg.curvature_eps) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (static_cast<int>(history.size()) > cfg.history) history.pop_front();
        } else {
            ++res.skipped_pairs;
        }

        x.assign(x_new.begin(), x_new.end());
        g.assign(g_new.begin(), g_new.end());
        f = out.f;
        gnorm = norm2(g);
        res.iterations = iter;
        if (observer) observer(iter, f, gnorm, x);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }

        if (diverging(f)) {
            res.status = OptStatus::diverged;
            break;
        }
        if (f <= stop.loss_threshold) {
            res.status = OptStatus::threshold_reached;
            break;
        }
        if (gnorm <= cfg.grad_eps) {
            res.status = OptStatus::stationary;
            break;
        }
        ++iter;
    }

    x = best_x;
    res.final_loss = best_f;
    return res;
}

} // namespace fepinn
