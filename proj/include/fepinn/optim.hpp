#ifndef FEPINN_OPTIM_HPP
#define FEPINN_OPTIM_HPP

#include <functional>
#include <span>
#include <vector>

namespace fepinn {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates; sized lazily on the first step.
struct AdamState {
    AdamConfig cfg;
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
};

/// One bias-corrected Adam update in place. Rejects non-finite gradients.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

/// Objective evaluation: writes the gradient into `grad_out` (same size as x)
/// and returns the loss.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad_out)>;

enum class OptStatus {
    threshold_reached,
    max_iterations,
    line_search_failed,
    stationary,
    diverged,
};

const char* opt_status_name(OptStatus s);

struct LbfgsConfig {
    int history = 20;          // stored (s, y) pairs
    double c1 = 1e-4;          // Armijo sufficient-decrease constant
    double c2 = 0.9;           // strong Wolfe curvature constant
    int max_line_evals = 25;   // objective evaluations per line search
    double curvature_eps = 1e-10;  // pairs with s.y below this are skipped
    double grad_eps = 0.0;     // stationary when the gradient norm reaches this
};

struct StopRule {
    double loss_threshold = 0.0;   // stop once loss <= threshold
    int max_iterations = 1000;
    double divergence_guard = 1e6; // non-finite loss or above this aborts
};

/// Called after the initial evaluation (iteration 0) and after every accepted
/// step with the current loss, gradient norm and iterate.
using IterObserver =
    std::function<void(int iteration, double loss, double grad_norm, std::span<const double> x)>;

struct LbfgsResult {
    OptStatus status = OptStatus::max_iterations;
    int iterations = 0;    // accepted steps
    double final_loss = 0.0;
    int skipped_pairs = 0; // curvature-guard rejections
};

/// Limited-memory BFGS with a strong-Wolfe line search. Accepted steps never
/// increase the objective; on exit `x` holds the best iterate seen.
LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double>& x,
                           const LbfgsConfig& cfg, const StopRule& stop,
                           const IterObserver& observer = {});

} // namespace fepinn

#endif
