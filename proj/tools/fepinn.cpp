// Command-line front end: training runs, sweeps, derivative self-checks,
// solution evaluation, and point-set utilities.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fepinn/harness.hpp"

namespace {

using namespace fepinn;

std::vector<std::string> output_names(Benchmark b) {
    if (b == Benchmark::burgers) return {"u"};
    return {"u", "v", "p", "sxx", "sxy", "syy"};
}

std::array<std::string, 2> axis_names(Benchmark b) {
    if (b == Benchmark::burgers) return {"x", "t"};
    return {"x", "y"};
}

void print_summary(const std::vector<SummaryRow>& rows) {
    for (const SummaryRow& r : rows) {
        std::cout << r.id << ": " << r.status;
        if (r.status == "failed")
            std::cout << " (" << r.message << ")";
        else
            std::cout << " total=" << r.final_total << " iters=" << r.total_iterations
                      << " to_threshold=" << r.iterations_to_threshold;
        std::cout << "\n";
    }
}

ExperimentPlan single_plan(const std::string& preset, uint64_t seed, const std::string& out,
                           bool fe, bool save) {
    ExperimentPlan plan;
    plan.kind = PlanKind::single_run;
    plan.preset = preset;
    plan.out_dir = out;
    plan.save_checkpoints = save;
    plan.base = preset_config(preset);
    plan.base.init_seed = seed;
    PlanEntry e;
    e.id = fe ? "fe" : "van";
    e.feature_enforcing = fe;
    e.config = plan.base;
    plan.entries.push_back(std::move(e));
    return plan;
}

int exit_code(const std::vector<SummaryRow>& rows) {
    for (const SummaryRow& r : rows)
        if (r.status == "failed" || r.status == "diverged") return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-enforcing PINN trainer"};
    app.require_subcommand(1);

    std::string preset = "burgers-desk", config_path, out_dir = "out", ckpt_path, report_path;
    std::string set_name = "domain", benchmark_name_arg;
    uint64_t seed = 1;
    int draws = 100, count = 60, jobs = 1;
    bool save_ckpts = false;

    const std::string preset_help = [] {
        std::string h = "preset name (";
        const auto names = preset_names();
        for (size_t i = 0; i < names.size(); ++i) h += (i ? ", " : "") + names[i];
        return h + ")";
    }();

    auto add_run_opts = [&](CLI::App* cmd) {
        cmd->add_option("--preset", preset, preset_help);
        cmd->add_option("--seed", seed, "initialization seed");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_flag("--save-checkpoints", save_ckpts, "write parameter checkpoints");
    };

    CLI::App* train = app.add_subcommand("train", "two-phase feature-enforcing run");
    add_run_opts(train);
    CLI::App* vanilla = app.add_subcommand("vanilla", "single-phase baseline run");
    add_run_opts(vanilla);
    CLI::App* phase1 = app.add_subcommand("phase1", "feature-capturing phase only");
    add_run_opts(phase1);

    CLI::App* sweep = app.add_subcommand("sweep", "run every entry of a plan file");
    sweep->add_option("--config", config_path, "plan file (INI grammar, see README)")->required();
    sweep->add_option("--out", out_dir, "override the plan's output directory");
    sweep->add_option("--jobs", jobs, "override the plan's worker count")->check(CLI::PositiveNumber);

    CLI::App* check = app.add_subcommand("check", "derivative self-test against finite differences");
    check->add_option("--seed", seed, "RNG seed for the drawn networks");
    check->add_option("--draws", draws, "number of random networks")->check(CLI::PositiveNumber);

    CLI::App* eval = app.add_subcommand("eval", "quality metrics for a trained checkpoint");
    eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval->add_option("--benchmark", benchmark_name_arg,
                     "benchmark (cylinder-forward, cylinder-inverse, burgers)")
        ->required();
    eval->add_option("--out", report_path, "report CSV path (default: stdout)");

    CLI::App* expts = app.add_subcommand("export-points", "write a run's point sets as CSV");
    expts->add_option("--preset", preset, preset_help);
    expts->add_option("--seed", seed, "sampling seed override");
    expts->add_option("--set", set_name, "domain, phase1, boundary or heldout");
    expts->add_option("--out", report_path, "CSV path (default: stdout)");

    CLI::App* labels = app.add_subcommand("gen-inverse-labels",
                                          "label interior points with a trained network");
    labels->add_option("--checkpoint", ckpt_path, "trained forward checkpoint")->required();
    labels->add_option("--count", count, "number of labeled points")->check(CLI::PositiveNumber);
    labels->add_option("--seed", seed, "sampling seed");
    labels->add_option("--out", report_path, "CSV path (default: stdout)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed() || vanilla->parsed()) {
            const auto plan = single_plan(preset, seed, out_dir, train->parsed(), save_ckpts);
            const auto rows = run_plan(plan);
            print_summary(rows);
            return exit_code(rows);
        }
        if (phase1->parsed()) {
            RunConfig cfg = preset_config(preset);
            cfg.init_seed = seed;
            const PhaseResult res = run_phase1(cfg);
            std::filesystem::create_directories(out_dir);
            const auto trace_path = std::filesystem::path(out_dir) / "phase1_trace.csv";
            std::ofstream os(trace_path, std::ios::binary);
            res.trace.write_csv(os);
            if (save_ckpts)
                save_checkpoint((std::filesystem::path(out_dir) / "phase1.ckpt").string(),
                                Checkpoint{res.arch, res.params});
            std::cout << "phase1: " << trace_status_name(res.trace.status)
                      << " final=" << res.trace.rows.back().breakdown.total << "\n";
            return res.trace.status == TraceStatus::diverged ? 1 : 0;
        }
        if (sweep->parsed()) {
            ExperimentPlan plan = parse_config_file(config_path);
            if (sweep->count("--out")) plan.out_dir = out_dir;
            if (sweep->count("--jobs")) plan.jobs = jobs;
            const auto rows = run_plan(plan);
            print_summary(rows);
            std::cout << "wrote " << (std::filesystem::path(plan.out_dir) / "summary.csv").string()
                      << "\n";
            return exit_code(rows);
        }
        if (check->parsed()) {
            const FdCheckReport rep = fd_selfcheck(seed, draws);
            std::cout << "draws=" << rep.draws << " max_rel_first=" << rep.max_rel_first
                      << " max_rel_second=" << rep.max_rel_second
                      << " max_rel_param=" << rep.max_rel_param << " "
                      << (rep.pass ? "PASS" : "FAIL") << "\n";
            return rep.pass ? 0 : 1;
        }
        if (eval->parsed()) {
            const Checkpoint ckpt = load_checkpoint(ckpt_path);
            const Benchmark b = benchmark_from_name(benchmark_name_arg);
            FluidConstants consts;
            consts.mu = b == Benchmark::burgers ? 0.01 : 0.02;
            const EvalReport rep = evaluate_solution(ckpt.params, ckpt.arch, b, consts);
            if (report_path.empty()) {
                rep.write(std::cout);
            } else {
                std::ofstream os(report_path, std::ios::binary);
                if (!os) throw std::runtime_error("cannot write " + report_path);
                rep.write(os);
            }
            return 0;
        }
        if (expts->parsed()) {
            RunConfig cfg = preset_config(preset);
            if (expts->count("--seed")) cfg.sampling_seed = seed;
            const RunPoints pts = build_points(cfg);
            const PointSet* set = nullptr;
            if (set_name == "domain") set = &pts.domain;
            else if (set_name == "phase1") set = &pts.phase1_domain;
            else if (set_name == "boundary") set = &pts.boundary;
            else if (set_name == "heldout") set = &pts.heldout;
            else throw std::invalid_argument("unknown point set: " + set_name);
            if (report_path.empty()) {
                export_points_csv(std::cout, *set, axis_names(cfg.benchmark),
                                  output_names(cfg.benchmark));
            } else {
                std::ofstream os(report_path, std::ios::binary);
                if (!os) throw std::runtime_error("cannot write " + report_path);
                export_points_csv(os, *set, axis_names(cfg.benchmark),
                                  output_names(cfg.benchmark));
            }
            return 0;
        }
        if (labels->parsed()) {
            const Checkpoint ckpt = load_checkpoint(ckpt_path);
            const PointSet set =
                make_inverse_labels(ckpt.params, ckpt.arch, Geometry::channel(), count, seed);
            std::ofstream os(report_path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + report_path);
            export_points_csv(os, set, {"x", "y"},
                              output_names(Benchmark::cylinder_forward));
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
