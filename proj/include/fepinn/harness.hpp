#ifndef FEPINN_HARNESS_HPP
#define FEPINN_HARNESS_HPP

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fepinn/checkpoint.hpp"
#include "fepinn/trainer.hpp"

namespace fepinn {

enum class PlanKind { single_run, lambda_sweep, ratio_sweep, variance_check, inverse_eval };

const char* plan_kind_name(PlanKind k);

struct PlanEntry {
    std::string id;
    bool feature_enforcing = true;  // false: vanilla baseline
    RunConfig config;
    double ratio = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentPlan {
    PlanKind kind = PlanKind::single_run;
    std::string preset;
    std::string out_dir = "out";
    int jobs = 1;
    bool save_checkpoints = false;
    std::vector<PlanEntry> entries;

    // variance_check only: initialization comparison on these seeds.
    std::vector<uint64_t> variance_seeds;
    RunConfig base;
};

/// Parses the INI-style plan grammar (see README): top-level keys select the
/// kind and preset, [grid] holds sweep axes, [run] holds per-run overrides.
/// Unknown keys and malformed values fail with the offending name.
ExperimentPlan parse_config(std::istream& is);
ExperimentPlan parse_config_file(const std::string& path);

struct SummaryRow {
    std::string id;
    PlanKind kind = PlanKind::single_run;
    Benchmark benchmark = Benchmark::burgers;
    bool feature_enforcing = true;
    double lambda = 1.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    uint64_t init_seed = 0;
    uint64_t sampling_seed = 0;
    std::string status = "failed";
    int phase1_iterations = 0;
    int total_iterations = 0;
    int iterations_to_threshold = -1;  // phase-1 iterations included for FE runs
    double wall_seconds = 0.0;
    double final_total = std::numeric_limits<double>::quiet_NaN();
    double final_pde = std::numeric_limits<double>::quiet_NaN();
    double final_boundary_sum = std::numeric_limits<double>::quiet_NaN();
    double final_data = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

const char* summary_csv_header();
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// First iteration whose total is at or under the threshold, counting
/// phase-1 iterations before phase-2 ones; -1 when never reached.
int iterations_to_threshold(const TrainingTrace& phase1, const TrainingTrace& phase2,
                            double threshold);
int iterations_to_threshold(const TrainingTrace& trace, double threshold);

/// Executes every entry (failures become status=failed rows, they do not
/// abort the plan), writes per-run trace CSVs plus summary.csv (and
/// variance.csv for variance checks) under plan.out_dir.
std::vector<SummaryRow> run_plan(const ExperimentPlan& plan);

struct VarianceRow {
    uint64_t seed = 0;
    int domain_points = 0;
    double pde_loss_xavier = 0.0;
    double pde_loss_reduced = 0.0;
    double ratio = 0.0;
};

/// Untrained-network residual loss under Xavier vs reduced-variance draws of
/// the same seed, on the run's full network and domain sample.
std::vector<VarianceRow> variance_check(const RunConfig& base, const std::vector<uint64_t>& seeds);
void write_variance_csv(std::ostream& os, const std::vector<VarianceRow>& rows);

// --- solution quality ------------------------------------------------------

using Predictor = std::function<std::vector<double>(const std::array<double, 2>&)>;

/// Relative L2 error of `predict` against the analytic Burgers solution on an
/// nx-by-nt grid spanning the domain; optionally reports the max |error|.
double burgers_grid_error(const Predictor& predict, int nx, int nt,
                          double* max_abs_err = nullptr);

/// Coefficient of determination of predictions against references.
double r_squared(std::span<const double> truth, std::span<const double> pred);

struct EvalReport {
    Benchmark benchmark = Benchmark::burgers;
    double rel_l2 = std::numeric_limits<double>::quiet_NaN();
    double max_abs_err = std::numeric_limits<double>::quiet_NaN();
    double inlet_r2 = std::numeric_limits<double>::quiet_NaN();
    std::map<Segment, double> boundary_mse;
    double mean_residual_norm = std::numeric_limits<double>::quiet_NaN();

    void write(std::ostream& os) const;
};

/// Benchmark-appropriate quality metrics for a trained network: grid error
/// for Burgers, recovered-inlet R^2 for the inverse problem, held-out
/// residuals and boundary MSEs for the forward problem.
EvalReport evaluate_solution(const Parameters& params, const Architecture& arch,
                             Benchmark benchmark, const FluidConstants& consts);

/// Supervision labels for the inverse benchmark: interior points labeled with
/// the (u, v) a trained forward network predicts there.
PointSet make_inverse_labels(const Parameters& params, const Architecture& arch,
                             const Geometry& geom, int n, uint64_t seed);

struct FdCheckReport {
    double max_rel_first = 0.0;   // worst first-derivative disagreement
    double max_rel_second = 0.0;  // worst second-derivative disagreement
    double max_rel_param = 0.0;   // worst parameter-gradient disagreement
    int draws = 0;
    bool pass = false;
};

/// Finite-difference agreement self-test over randomly drawn networks and
/// points (relative tolerances 1e-6 first order / parameters, 1e-4 second).
FdCheckReport fd_selfcheck(uint64_t seed, int draws);

} // namespace fepinn

#endif
