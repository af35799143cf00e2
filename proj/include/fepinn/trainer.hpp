#ifndef FEPINN_TRAINER_HPP
#define FEPINN_TRAINER_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fepinn/loss.hpp"
#include "fepinn/network.hpp"
#include "fepinn/optim.hpp"
#include "fepinn/sampling.hpp"

namespace fepinn {

enum class TraceStatus { converged, budget_exhausted, diverged, line_search_failed };

const char* trace_status_name(TraceStatus s);

struct TraceRow {
    int iteration = 0;
    LossBreakdown breakdown;
    double grad_norm = 0.0;
    double seconds = 0.0;      // wall time since run start; kept out of the CSV
    double heldout_msr = std::numeric_limits<double>::quiet_NaN();
};

struct TrainingTrace {
    std::vector<TraceRow> rows;
    TraceStatus status = TraceStatus::budget_exhausted;

    static const char* csv_header();
    /// Deterministic serialization: fixed column set, %.17g values, blanks
    /// for terms a run does not have. Reruns are byte-identical.
    void write_csv(std::ostream& os) const;
};

struct ConvergenceReport {
    TraceStatus status = TraceStatus::budget_exhausted;
    int at_iteration = -1;  // first qualifying row, -1 when the budget ran out
};

/// Re-derives the outcome from a trace alone: the first non-finite or
/// guard-crossing total marks divergence, otherwise the first total at or
/// under the threshold marks convergence.
ConvergenceReport monitor_convergence(const TrainingTrace& trace, double threshold,
                                      double guard = 1e6);

/// Everything a single training run depends on. Two runs with equal configs
/// produce identical traces and parameters.
struct RunConfig {
    Benchmark benchmark = Benchmark::burgers;
    Architecture phase1_arch;
    GraftPlan graft;
    FluidConstants consts;
    Geometry geometry;

    uint64_t init_seed = 1;
    uint64_t sampling_seed = 1;
    std::vector<uint64_t> ensemble_seeds{101, 102, 103, 104, 105};

    int domain_points = 100;
    std::map<Segment, int> boundary_counts;
    double densify = 0.0;
    int heldout_points = 0;
    uint64_t heldout_seed = 7777;
    std::string data_labels_path;  // inverse-benchmark supervision CSV

    double variance_factor = 1.0;
    double quantile = 0.7;
    double lambda = 1.0;

    int phase1_iterations = 100;
    double phase1_threshold = 0.0;  // 0 disables early stop in phase 1
    double adam_lr = 3e-4;

    int phase2_iterations = 100;
    double threshold = 0.0;
    LbfgsConfig lbfgs;
    double divergence_guard = 1e6;

    void validate() const;
};

/// All point sets of a run, reconstructed deterministically from the config.
struct RunPoints {
    PointSet domain;         // full LHS set: phase-2 and vanilla collocation
    PointSet phase1_domain;  // ensemble-selected subset of `domain`
    PointSet boundary;
    PointSet heldout;
    PointSet data;
};

RunPoints build_points(const RunConfig& cfg);

struct PhaseResult {
    Parameters params;
    Architecture arch;
    TrainingTrace trace;
};

/// Phase 1: reduced-variance network trained with Adam on the primary loss
/// over the ensemble-selected points. The result's layers are all tagged
/// smart: they are the graft donor.
PhaseResult run_phase1(const RunConfig& cfg);

/// Phase 2: grafts the donor into the deeper network and runs the
/// quasi-Newton stage on the complete loss.
PhaseResult run_phase2(const RunConfig& cfg, const Parameters& donor,
                       const Architecture& donor_arch);

/// Baseline: the same deeper network from a plain Xavier draw (bit-identical
/// to the graft's inserted layers), trained like phase 2.
PhaseResult run_vanilla(const RunConfig& cfg);

/// Named ready-made configurations. Desk-scale presets fit a laptop-class
/// budget; full-scale presets reproduce the reference problem sizes and are
/// far too slow for routine runs.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

} // namespace fepinn

#endif
