#include "fepinn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "fepinn/util.hpp"

namespace fepinn {

namespace {

// Stream tags so no two purposes ever share an RNG sequence.
constexpr uint64_t kTagPhase1Init = 1;
constexpr uint64_t kTagGraftBase = 2;  // also the vanilla baseline's draw
constexpr uint64_t kTagDomain = 11;
constexpr uint64_t kTagBoundary = 12;
constexpr uint64_t kTagHeldout = 13;

double now_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TraceStatus from_opt_status(OptStatus s) {
    switch (s) {
        case OptStatus::threshold_reached: return TraceStatus::converged;
        case OptStatus::max_iterations: return TraceStatus::budget_exhausted;
        case OptStatus::diverged: return TraceStatus::diverged;
        case OptStatus::line_search_failed:
        case OptStatus::stationary: return TraceStatus::line_search_failed;
    }
    throw std::invalid_argument("unknown optimizer status");
}

} // namespace

const char* trace_status_name(TraceStatus s) {
    switch (s) {
        case TraceStatus::converged: return "converged";
        case TraceStatus::budget_exhausted: return "budget_exhausted";
        case TraceStatus::diverged: return "diverged";
        case TraceStatus::line_search_failed: return "line_search_failed";
    }
    throw std::invalid_argument("unknown trace status");
}

const char* TrainingTrace::csv_header() {
    return "iter,total,pde,inlet,outlet,wall,cylinder,initial,data,grad_norm,heldout_msr";
}

void TrainingTrace::write_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    for (const TraceRow& row : rows) {
        os << row.iteration << ',' << fmt_double(row.breakdown.total) << ','
           << fmt_double(row.breakdown.pde);
        for (Segment seg : {Segment::inlet, Segment::outlet, Segment::wall, Segment::cylinder,
                            Segment::initial}) {
            os << ',';
            const auto it = row.breakdown.boundary.find(seg);
            if (it != row.breakdown.boundary.end()) os << fmt_double(it->second);
        }
        os << ',';
        if (row.breakdown.data) os << fmt_double(*row.breakdown.data);
        os << ',' << fmt_double(row.grad_norm) << ',';
        if (!std::isnan(row.heldout_msr)) os << fmt_double(row.heldout_msr);
        os << '\n';
    }
}

ConvergenceReport monitor_convergence(const TrainingTrace& trace, double threshold,
                                      double guard) {
    for (const TraceRow& row : trace.rows) {
        if (!std::isfinite(row.breakdown.total) || row.breakdown.total > guard)
            return {TraceStatus::diverged, row.iteration};
        if (row.breakdown.total <= threshold)
            return {TraceStatus::converged, row.iteration};
    }
    return {TraceStatus::budget_exhausted, -1};
}

void RunConfig::validate() const {
    phase1_arch.validate();
    consts.validate();
    geometry.validate();
    grafted_architecture(phase1_arch, graft);  // throws on inconsistent plans
    if (phase1_arch.n_outputs != kernel_outputs(benchmark_kernel(benchmark)))
        throw std::invalid_argument("network outputs do not match the benchmark's residual");
    if (phase1_arch.n_inputs != 2)
        throw std::invalid_argument("benchmarks sample 2D points");
    if (domain_points < 1) throw std::invalid_argument("need at least one domain point");
    if (heldout_points < 0) throw std::invalid_argument("held-out point count must be non-negative");
    if (phase1_iterations < 0 || phase2_iterations < 0)
        throw std::invalid_argument("iteration budgets must be non-negative");
    if (!(lambda > 0.0)) throw std::invalid_argument("boundary weight lambda must be positive");
    if (!(variance_factor >= 1.0))
        throw std::invalid_argument("variance reduction factor must be >= 1");
    if (quantile < 0.0 || quantile > 1.0)
        throw std::invalid_argument("quantile must be in [0, 1]");
    if (ensemble_seeds.empty())
        throw std::invalid_argument("the selection ensemble needs at least one seed");
    if (threshold < 0.0 || phase1_threshold < 0.0)
        throw std::invalid_argument("loss thresholds must be non-negative");
    if (benchmark == Benchmark::cylinder_inverse && data_labels_path.empty())
        throw std::invalid_argument("inverse benchmark needs a supervision label file");
}

RunPoints build_points(const RunConfig& cfg) {
    cfg.validate();
    RunPoints pts;
    pts.domain = lhs_sample(cfg.geometry, cfg.domain_points,
                            seed_stream(cfg.sampling_seed, kTagDomain), cfg.densify);
    pts.boundary = sample_boundary(cfg.geometry, cfg.boundary_counts,
                                   seed_stream(cfg.sampling_seed, kTagBoundary));
    pts.phase1_domain = residual_ensemble_select(pts.domain, cfg.phase1_arch, cfg.consts,
                                                 benchmark_kernel(cfg.benchmark),
                                                 cfg.ensemble_seeds, cfg.quantile);
    if (cfg.heldout_points > 0)
        pts.heldout = lhs_sample(cfg.geometry, cfg.heldout_points,
                                 seed_stream(cfg.heldout_seed, kTagHeldout), 0.0);
    if (has_data_term(cfg.benchmark)) {
        std::ifstream in(cfg.data_labels_path);
        if (!in) throw std::runtime_error("cannot open supervision labels: " + cfg.data_labels_path);
        pts.data = load_points_csv(in);
    }
    return pts;
}

namespace {

struct LiveObjective {
    const RunConfig& cfg;
    const RunPoints& pts;
    LossSpec spec;
    const Architecture& arch;
    LossBreakdown last_breakdown;

    double eval(std::span<const double> x, std::span<double> grad_out) {
        Parameters p;
        p.values.assign(x.begin(), x.end());
        p.tags.assign(ParamLayout(arch).layers.size(), Provenance::xavier);
        const PointSet& domain =
            spec.phase == Phase::primary ? pts.phase1_domain : pts.domain;
        LossEval ev = compose_loss(spec, p, arch, cfg.consts, domain, pts.boundary,
                                   pts.data.empty() ? nullptr : &pts.data, true);
        if (!grad_out.empty()) {
            if (grad_out.size() != ev.grad.size())
                throw std::invalid_argument("gradient buffer size mismatch");
            for (size_t i = 0; i < grad_out.size(); ++i) grad_out[i] = ev.grad[i];
        }
        last_breakdown = ev.breakdown;
        return ev.breakdown.total;
    }

    double heldout_msr(std::span<const double> x) {
        if (pts.heldout.empty()) return std::numeric_limits<double>::quiet_NaN();
        Parameters p;
        p.values.assign(x.begin(), x.end());
        p.tags.assign(ParamLayout(arch).layers.size(), Provenance::xavier);
        return pde_loss(p, arch, pts.heldout, benchmark_kernel(cfg.benchmark), cfg.consts,
                        false)
            .value;
    }
};

} // namespace

PhaseResult run_phase1(const RunConfig& cfg) {
    cfg.validate();
    const RunPoints pts = build_points(cfg);
    const auto start = std::chrono::steady_clock::now();

    PhaseResult res;
    res.arch = cfg.phase1_arch;
    res.params = init_reduced_variance(cfg.phase1_arch,
                                       seed_stream(cfg.init_seed, kTagPhase1Init),
                                       cfg.variance_factor);

    LiveObjective obj{cfg, pts, LossSpec{cfg.benchmark, Phase::primary, cfg.lambda},
                      res.arch, {}};
    std::vector<double> grad(res.params.size());

    AdamState adam;
    adam.cfg.lr = cfg.adam_lr;

    res.trace.status = TraceStatus::budget_exhausted;
    for (int iter = 0; iter <= cfg.phase1_iterations; ++iter) {
        if (iter > 0) adam_step(adam, res.params.values, grad);
        const double total = obj.eval(res.params.values, grad);
        double gn = 0.0;
        for (double g : grad) gn += g * g;
        TraceRow row;
        row.iteration = iter;
        row.breakdown = obj.last_breakdown;
        row.grad_norm = std::sqrt(gn);
        row.seconds = now_seconds(start);
        row.heldout_msr = obj.heldout_msr(res.params.values);
        res.trace.rows.push_back(row);
        if (!std::isfinite(total) || total > cfg.divergence_guard) {
            res.trace.status = TraceStatus::diverged;
            break;
        }
        if (cfg.phase1_threshold > 0.0 && total <= cfg.phase1_threshold) {
            res.trace.status = TraceStatus::converged;
            break;
        }
    }
    // The trained layers are the graft donor from here on.
    for (auto& tag : res.params.tags) tag = Provenance::smart;
    return res;
}

namespace {

PhaseResult run_quasi_newton(const RunConfig& cfg, Parameters params, const Architecture& arch) {
    const RunPoints pts = build_points(cfg);
    const auto start = std::chrono::steady_clock::now();

    PhaseResult res;
    res.arch = arch;
    res.params = std::move(params);

    LiveObjective obj{cfg, pts, LossSpec{cfg.benchmark, Phase::complete, cfg.lambda},
                      res.arch, {}};

    const IterObserver observer = [&](int iteration, double loss, double grad_norm,
                                      std::span<const double> x) {
        (void)loss;
        TraceRow row;
        row.iteration = iteration;
        row.breakdown = obj.last_breakdown;
        row.grad_norm = grad_norm;
        row.seconds = now_seconds(start);
        row.heldout_msr = obj.heldout_msr(x);
        res.trace.rows.push_back(row);
    };

    std::vector<double> x = res.params.values;
    const StopRule stop{cfg.threshold, cfg.phase2_iterations, cfg.divergence_guard};
    const LbfgsResult opt = lbfgs_minimize(
        [&](std::span<const double> xv, std::span<double> gv) { return obj.eval(xv, gv); }, x,
        cfg.lbfgs, stop, observer);

    res.params.values = std::move(x);
    res.trace.status = from_opt_status(opt.status);
    return res;
}

} // namespace

PhaseResult run_phase2(const RunConfig& cfg, const Parameters& donor,
                       const Architecture& donor_arch) {
    cfg.validate();
    GraftResult graft =
        graft_smart_weights(donor, donor_arch, cfg.graft, seed_stream(cfg.init_seed, kTagGraftBase));
    return run_quasi_newton(cfg, std::move(graft.params), graft.arch);
}

PhaseResult run_vanilla(const RunConfig& cfg) {
    cfg.validate();
    const Architecture arch = grafted_architecture(cfg.phase1_arch, cfg.graft);
    Parameters params = init_xavier(arch, seed_stream(cfg.init_seed, kTagGraftBase));
    return run_quasi_newton(cfg, std::move(params), arch);
}

} // namespace fepinn
