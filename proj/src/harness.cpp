#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "fepinn/harness.hpp"
#include "fepinn/util.hpp"

namespace fepinn {

namespace {

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::string opt_num(double v) { return std::isnan(v) ? std::string() : fmt_double(v); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void write_trace_file(const std::filesystem::path& path, const TrainingTrace& trace) {
    auto os = open_out(path);
    trace.write_csv(os);
}

} // namespace

const char* summary_csv_header() {
    return "id,kind,benchmark,mode,lambda,ratio,init_seed,sampling_seed,status,"
           "phase1_iters,total_iters,iters_to_threshold,wall_s,final_total,final_pde,"
           "final_boundary_sum,final_data,message";
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << summary_csv_header() << '\n';
    for (const SummaryRow& r : rows) {
        char wall[32];
        std::snprintf(wall, sizeof wall, "%.3f", r.wall_seconds);
        os << csv_safe(r.id) << ',' << plan_kind_name(r.kind) << ','
           << benchmark_name(r.benchmark) << ',' << (r.feature_enforcing ? "fe" : "vanilla") << ','
           << fmt_double(r.lambda) << ',' << opt_num(r.ratio) << ',' << r.init_seed << ','
           << r.sampling_seed << ',' << r.status << ',' << r.phase1_iterations << ','
           << r.total_iterations << ',' << r.iterations_to_threshold << ',' << wall << ','
           << opt_num(r.final_total) << ',' << opt_num(r.final_pde) << ','
           << opt_num(r.final_boundary_sum) << ',' << opt_num(r.final_data) << ','
           << csv_safe(r.message) << '\n';
    }
}

int iterations_to_threshold(const TrainingTrace& trace, double threshold) {
    for (const TraceRow& r : trace.rows)
        if (r.breakdown.total <= threshold) return r.iteration;
    return -1;
}

int iterations_to_threshold(const TrainingTrace& phase1, const TrainingTrace& phase2,
                            double threshold) {
    // Phase-1 rows track the primary objective, which is not comparable to a
    // complete-loss threshold; those iterations only count as spent budget.
    const int spent = phase1.rows.empty() ? 0 : phase1.rows.back().iteration;
    const int at = iterations_to_threshold(phase2, threshold);
    return at < 0 ? -1 : spent + at;
}

namespace {

void fill_final(SummaryRow& row, const TraceRow& last) {
    row.final_total = last.breakdown.total;
    row.final_pde = last.breakdown.pde;
    row.final_boundary_sum = last.breakdown.boundary_sum();
    if (last.breakdown.data) row.final_data = *last.breakdown.data;
}

SummaryRow run_entry(const ExperimentPlan& plan, const PlanEntry& entry) {
    const RunConfig& cfg = entry.config;
    const std::filesystem::path out(plan.out_dir);

    SummaryRow row;
    row.id = entry.id;
    row.kind = plan.kind;
    row.benchmark = cfg.benchmark;
    row.feature_enforcing = entry.feature_enforcing;
    row.lambda = cfg.lambda;
    row.ratio = entry.ratio;
    row.init_seed = cfg.init_seed;
    row.sampling_seed = cfg.sampling_seed;

    try {
        if (entry.feature_enforcing) {
            const PhaseResult p1 = run_phase1(cfg);
            write_trace_file(out / (entry.id + "_phase1_trace.csv"), p1.trace);
            const PhaseResult p2 = run_phase2(cfg, p1.params, p1.arch);
            write_trace_file(out / (entry.id + "_trace.csv"), p2.trace);
            row.status = trace_status_name(p2.trace.status);
            row.phase1_iterations = p1.trace.rows.back().iteration;
            row.total_iterations = row.phase1_iterations + p2.trace.rows.back().iteration;
            row.iterations_to_threshold = iterations_to_threshold(p1.trace, p2.trace, cfg.threshold);
            row.wall_seconds = p1.trace.rows.back().seconds + p2.trace.rows.back().seconds;
            fill_final(row, p2.trace.rows.back());
            if (plan.save_checkpoints) {
                save_checkpoint((out / (entry.id + "_phase1.ckpt")).string(),
                                Checkpoint{p1.arch, p1.params});
                save_checkpoint((out / (entry.id + ".ckpt")).string(),
                                Checkpoint{p2.arch, p2.params});
            }
        } else {
            const PhaseResult v = run_vanilla(cfg);
            write_trace_file(out / (entry.id + "_trace.csv"), v.trace);
            row.status = trace_status_name(v.trace.status);
            row.phase1_iterations = 0;
            row.total_iterations = v.trace.rows.back().iteration;
            row.iterations_to_threshold = iterations_to_threshold(v.trace, cfg.threshold);
            row.wall_seconds = v.trace.rows.back().seconds;
            fill_final(row, v.trace.rows.back());
            if (plan.save_checkpoints)
                save_checkpoint((out / (entry.id + ".ckpt")).string(),
                                Checkpoint{v.arch, v.params});
        }
    } catch (const std::exception& ex) {
        row.status = "failed";
        row.message = ex.what();
    }
    return row;
}

} // namespace

std::vector<SummaryRow> run_plan(const ExperimentPlan& plan) {
    std::filesystem::create_directories(plan.out_dir);
    const std::filesystem::path out(plan.out_dir);

    std::vector<SummaryRow> rows;
    if (plan.kind == PlanKind::variance_check) {
        const std::vector<VarianceRow> vrows = variance_check(plan.base, plan.variance_seeds);
        auto os = open_out(out / "variance.csv");
        write_variance_csv(os, vrows);
    } else if (plan.entries.empty()) {
        throw std::invalid_argument("experiment plan has no runs");
    } else {
        rows.resize(plan.entries.size());
        const int jobs = std::max(1, std::min<int>(plan.jobs,
                                                   static_cast<int>(plan.entries.size())));
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next.fetch_add(1); i < plan.entries.size(); i = next.fetch_add(1))
                rows[i] = run_entry(plan, plan.entries[i]);
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
    }

    auto os = open_out(out / "summary.csv");
    write_summary_csv(os, rows);
    return rows;
}

std::vector<VarianceRow> variance_check(const RunConfig& base, const std::vector<uint64_t>& seeds) {
    base.validate();
    if (seeds.empty()) throw std::invalid_argument("variance check needs at least one seed");
    const Architecture arch = grafted_architecture(base.phase1_arch, base.graft);
    const ResidualKernel kernel = benchmark_kernel(base.benchmark);
    // Stream tag 11 matches the trainer's interior draw, so the comparison
    // runs on exactly the collocation points a training run would see.
    const PointSet domain = lhs_sample(base.geometry, base.domain_points,
                                       seed_stream(base.sampling_seed, 11), base.densify);

    std::vector<VarianceRow> rows;
    rows.reserve(seeds.size());
    for (uint64_t seed : seeds) {
        const Parameters px = init_xavier(arch, seed);
        const Parameters pr = init_reduced_variance(arch, seed, base.variance_factor);
        VarianceRow r;
        r.seed = seed;
        r.domain_points = static_cast<int>(domain.size());
        r.pde_loss_xavier = pde_loss(px, arch, domain, kernel, base.consts, false).value;
        r.pde_loss_reduced = pde_loss(pr, arch, domain, kernel, base.consts, false).value;
        r.ratio = r.pde_loss_xavier / r.pde_loss_reduced;
        rows.push_back(r);
    }
    return rows;
}

void write_variance_csv(std::ostream& os, const std::vector<VarianceRow>& rows) {
    os << "seed,domain_points,pde_loss_xavier,pde_loss_reduced,ratio\n";
    for (const VarianceRow& r : rows)
        os << r.seed << ',' << r.domain_points << ',' << fmt_double(r.pde_loss_xavier) << ','
           << fmt_double(r.pde_loss_reduced) << ',' << fmt_double(r.ratio) << '\n';
}

} // namespace fepinn
