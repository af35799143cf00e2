// Acceptance gate: each numbered check exercises one end-to-end guarantee of
// the library and prints a single [PASS]/[FAIL] line. Run with the check
// number as the only argument, or with no arguments to run all ten.
// Exit status is nonzero when any executed check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fepinn/harness.hpp"
#include "fepinn/util.hpp"

using namespace fepinn;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

void note(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    std::printf("       ");
    std::vprintf(fmt, args);
    std::printf("\n");
    va_end(args);
}

// --- C1: derivatives agree with finite differences ------------------------

bool criterion1(std::string& detail) {
    const FdCheckReport rep = fd_selfcheck(20260823, 100);
    note("draws=%d first=%.3g (tol 1e-6) second=%.3g (tol 1e-4) param=%.3g (tol 1e-6)",
         rep.draws, rep.max_rel_first, rep.max_rel_second, rep.max_rel_param);
    std::ostringstream os;
    os << "derivatives vs central differences over " << rep.draws
       << " random network/point draws, worst first=" << rep.max_rel_first
       << " second=" << rep.max_rel_second << " param=" << rep.max_rel_param;
    detail = os.str();
    return rep.pass && rep.draws == 100;
}

// --- C2: the analytic profile satisfies its own equation ------------------

bool criterion2(std::string& detail) {
    const FluidConstants consts{1.0, 0.01};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ux(0.0, 4.0), ut(0.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const JetD u = burgers_exact_jet(ux(rng), ut(rng));
        const auto r = burgers_residual(u, consts);
        worst = std::max(worst, std::fabs(r.f[0]));
    }
    note("max |residual| over 50 exact jets = %.3g (tol 1e-9)", worst);
    std::ostringstream os;
    os << "analytic solution residual at 50 random points, max " << worst << " <= 1e-9";
    detail = os.str();
    return worst <= 1e-9;
}

// --- C3: the reduced-variance draw starts an order flatter ----------------

bool criterion3(std::string& detail) {
    RunConfig cfg = preset_config("cylinder-full");  // trained shape: 8 hidden x 40
    cfg.domain_points = 2100;  // >= 2000 even after infeasible-stratum skips
    const std::vector<uint64_t> seeds{1, 2, 3, 4};
    const std::vector<VarianceRow> rows = variance_check(cfg, seeds);
    bool ok = true;
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (const VarianceRow& r : rows) {
        note("seed %llu: xavier=%.4g reduced=%.4g ratio=%.3g over %d points",
             static_cast<unsigned long long>(r.seed), r.pde_loss_xavier, r.pde_loss_reduced,
             r.ratio, r.domain_points);
        worst_ratio = std::min(worst_ratio, r.ratio);
        ok = ok && r.pde_loss_reduced <= 0.1 * r.pde_loss_xavier && r.domain_points >= 2000;
    }
    std::ostringstream os;
    os << "untrained interior loss, reduced draw <= 0.1 x plain draw on " << rows.size()
       << " seeds (8x40 network, " << rows.front().domain_points
       << " points), worst ratio " << worst_ratio;
    detail = os.str();
    return ok;
}

// --- C4: the Burgers desk preset converges and matches the solution -------

bool criterion4(std::string& detail) {
    const RunConfig cfg = preset_config("burgers-desk");
    const PhaseResult p1 = run_phase1(cfg);
    note("phase 1: %s after %d iterations, total %.4g [%.0fs]",
         trace_status_name(p1.trace.status), p1.trace.rows.back().iteration,
         p1.trace.rows.back().breakdown.total, now_seconds());
    const PhaseResult p2 = run_phase2(cfg, p1.params, p1.arch);
    const double total = p2.trace.rows.back().breakdown.total;
    note("phase 2: %s after %d iterations, total %.4g [%.0fs]",
         trace_status_name(p2.trace.status), p2.trace.rows.back().iteration, total,
         now_seconds());
    const EvalReport rep = evaluate_solution(p2.params, p2.arch, cfg.benchmark, cfg.consts);
    note("grid error: rel_l2=%.4g (tol 2e-2) max=%.4g", rep.rel_l2, rep.max_abs_err);
    std::ostringstream os;
    os << "Burgers desk run: final total " << total << " <= 1e-4 and grid rel L2 "
       << rep.rel_l2 << " <= 2e-2";
    detail = os.str();
    return total <= 1e-4 && rep.rel_l2 <= 2e-2;
}

// --- C5: two-phase runs reach the threshold in fewer iterations -----------

long long median_ll(std::vector<long long> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

bool criterion5(std::string& detail) {
    const auto out = std::filesystem::temp_directory_path() / "fepinn_acceptance_c5";
    std::filesystem::remove_all(out);
    std::istringstream config(
        "kind = ratio_sweep\n"
        "preset = burgers-desk\n"
        "out = " + out.string() + "\n" +
        "[grid]\n"
        "ratios = 10 20 40\n"
        "seeds = 1 2 3\n");
    const ExperimentPlan plan = parse_config(config);
    const std::vector<SummaryRow> rows = run_plan(plan);

    // Runs that never reach the threshold count as worst possible.
    const long long kNever = std::numeric_limits<long long>::max();
    std::vector<long long> fe, van;
    bool any_failed = false;
    for (const SummaryRow& r : rows) {
        const long long iters = r.iterations_to_threshold < 0
                                    ? kNever
                                    : static_cast<long long>(r.iterations_to_threshold);
        (r.feature_enforcing ? fe : van).push_back(iters);
        any_failed = any_failed || r.status == "failed";
        if (iters == kNever)
            note("%s: threshold not reached (%s, %d iters) [%.0fs]", r.id.c_str(),
                 r.status.c_str(), r.total_iterations, now_seconds());
        else
            note("%s: %lld iterations to threshold [%.0fs]", r.id.c_str(), iters,
                 now_seconds());
    }
    std::filesystem::remove_all(out);
    if (fe.size() != 9 || van.size() != 9 || any_failed) {
        detail = "ratio sweep did not produce 9 clean runs per mode";
        return false;
    }
    const long long med_fe = median_ll(fe);
    const long long med_van = median_ll(van);
    std::ostringstream os;
    os << "3 seeds x 3 interior/boundary ratios: median iterations to threshold, two-phase ";
    if (med_fe == std::numeric_limits<long long>::max())
        os << "(never)";
    else
        os << med_fe;
    os << " < single-phase ";
    if (med_van == std::numeric_limits<long long>::max())
        os << "(never)";
    else
        os << med_van;
    detail = os.str();
    return med_fe < med_van;
}

// --- C6: grafted layers drift less than freshly inserted ones -------------

bool criterion6(std::string& detail) {
    int favorable = 0;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        RunConfig cfg = preset_config("burgers-desk");
        cfg.init_seed = seed;
        cfg.phase2_iterations = 100;
        cfg.threshold = 0.0;  // no early stop inside the window
        const PhaseResult p1 = run_phase1(cfg);
        const GraftResult start = graft_smart_weights(p1.params, p1.arch, cfg.graft,
                                                      seed_stream(cfg.init_seed, 2));
        const PhaseResult p2 = run_phase2(cfg, p1.params, p1.arch);

        const ParamLayout layout(start.arch);
        double smart_sum = 0.0, inserted_sum = 0.0;
        size_t smart_n = 0, inserted_n = 0;
        for (size_t l = 0; l < layout.layers.size(); ++l) {
            const auto& lay = layout.layers[l];
            const size_t count = static_cast<size_t>(lay.fan_in) * lay.fan_out + lay.fan_out;
            const bool smart = start.params.tags[l] == Provenance::smart;
            for (size_t i = lay.w_off; i < lay.w_off + count; ++i) {
                const double d = std::fabs(p2.params.values[i] - start.params.values[i]);
                if (smart) {
                    smart_sum += d;
                    ++smart_n;
                } else {
                    inserted_sum += d;
                    ++inserted_n;
                }
            }
        }
        const double smart_mean = smart_sum / smart_n;
        const double inserted_mean = inserted_sum / inserted_n;
        if (smart_mean < inserted_mean) ++favorable;
        note("seed %llu: mean |delta| smart=%.4g inserted=%.4g over %d iterations [%.0fs]",
             static_cast<unsigned long long>(seed), smart_mean, inserted_mean,
             p2.trace.rows.back().iteration, now_seconds());
    }
    std::ostringstream os;
    os << "first 100 refinement iterations move grafted layers less than inserted ones in "
       << favorable << "/3 seeds (need >= 2)";
    detail = os.str();
    return favorable >= 2;
}

// --- C7: stratified sampling and hole geometry ----------------------------

bool criterion7(std::string& detail) {
    const Geometry rect = Geometry::burgers_rectangle();
    bool ok = true;
    for (int n : {4, 16, 100}) {
        const PointSet pts = lhs_sample(rect, n, 31 + n, 0.0);
        ok = ok && static_cast<int>(pts.size()) == n;
        for (int d = 0; d < 2; ++d) {
            std::vector<int> counts(n, 0);
            for (const auto& p : pts.points) {
                const double u = (p[d] - rect.lo[d]) / (rect.hi[d] - rect.lo[d]);
                int s = static_cast<int>(u * n);
                s = std::clamp(s, 0, n - 1);
                ++counts[s];
            }
            for (int c : counts) ok = ok && c == 1;
        }
        note("n=%d: one point per stratum in both dimensions %s", n, ok ? "yes" : "NO");
    }

    const Geometry chan = Geometry::channel();
    const PointSet pts = lhs_sample(chan, 400, 77, 0.0);
    int inside = 0;
    for (const auto& p : pts.points)
        if (chan.cylinder->contains(p[0], p[1])) ++inside;
    note("channel: %zu points sampled, %d inside the hole", pts.size(), inside);
    ok = ok && inside == 0 && pts.size() >= 390;

    detail = "one point per stratum for n in {4,16,100}; no channel point inside the cylinder";
    return ok;
}

// --- C8: optimizer behavior on closed-form problems -----------------------

bool criterion8(std::string& detail) {
    // 0.5 x'Ax - b'x with A=[[3,1],[1,2]], b=(1,1): minimum -0.3 at (0.2, 0.4).
    const Objective quadratic = [](std::span<const double> x, std::span<double> g) {
        g[0] = 3.0 * x[0] + x[1] - 1.0;
        g[1] = x[0] + 2.0 * x[1] - 1.0;
        return 0.5 * (3.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 2.0 * x[1] * x[1]) - x[0] - x[1];
    };
    std::vector<double> xq{0.0, 0.0};
    StopRule quad_stop;
    quad_stop.loss_threshold = -0.3 + 1e-10;
    quad_stop.max_iterations = 10;
    const LbfgsResult rq = lbfgs_minimize(quadratic, xq, LbfgsConfig{}, quad_stop);
    const bool quad_ok = rq.status == OptStatus::threshold_reached && rq.iterations <= 10;
    note("quadratic: %s in %d iterations, gap %.3g", opt_status_name(rq.status), rq.iterations,
         rq.final_loss + 0.3);

    const Objective rosenbrock = [](std::span<const double> x, std::span<double> g) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
    std::vector<double> xr{-1.2, 1.0};
    StopRule rosen_stop;
    rosen_stop.loss_threshold = 1e-5;
    rosen_stop.max_iterations = 200;
    const LbfgsResult rr = lbfgs_minimize(rosenbrock, xr, LbfgsConfig{}, rosen_stop);
    const bool rosen_ok = rr.status == OptStatus::threshold_reached && rr.iterations <= 200;
    note("rosenbrock: %s in %d iterations, final %.3g", opt_status_name(rr.status),
         rr.iterations, rr.final_loss);

    // First Adam step: magnitude lr * |g| / (|g| + eps), i.e. lr * sign(g).
    AdamState state;
    state.cfg.lr = 1e-3;
    std::vector<double> params{0.0, 0.0, 0.0};
    const std::vector<double> grad{3.0, -0.5, 0.0};
    adam_step(state, params, grad);
    bool adam_ok = params[2] == 0.0;
    for (int i = 0; i < 2; ++i) {
        const double expect = -state.cfg.lr * (grad[i] > 0 ? 1.0 : -1.0);
        adam_ok = adam_ok && std::fabs(params[i] - expect) <= state.cfg.lr * 1e-6;
    }
    note("adam first step: (%.7g, %.7g, %.7g) vs +-lr=%.7g", params[0], params[1], params[2],
         state.cfg.lr);

    detail = "quadratic to 1e-10 in <= 10 iterations, Rosenbrock to 1e-5 in <= 200, "
             "first Adam step = lr * sign(gradient)";
    return quad_ok && rosen_ok && adam_ok;
}

// --- C9: reruns produce byte-identical traces -----------------------------

bool criterion9(std::string& detail) {
    auto trace_bytes = [](const TrainingTrace& t) {
        std::ostringstream os;
        t.write_csv(os);
        return os.str();
    };
    auto run_all = [&](const RunConfig& cfg) {
        const PhaseResult p1 = run_phase1(cfg);
        const PhaseResult p2 = run_phase2(cfg, p1.params, p1.arch);
        const PhaseResult v = run_vanilla(cfg);
        return std::array<std::string, 3>{trace_bytes(p1.trace), trace_bytes(p2.trace),
                                          trace_bytes(v.trace)};
    };

    bool ok = true;
    for (const char* preset : {"burgers-desk", "cylinder-desk"}) {
        RunConfig cfg = preset_config(preset);
        const bool burgers = cfg.benchmark == Benchmark::burgers;
        cfg.phase1_iterations = burgers ? 40 : 8;
        cfg.phase2_iterations = burgers ? 40 : 8;
        const auto first = run_all(cfg);
        const auto second = run_all(cfg);
        const bool same = first == second;
        note("%s: phase1 %zu bytes, phase2 %zu, vanilla %zu; rerun identical %s [%.0fs]",
             preset, first[0].size(), first[1].size(), first[2].size(), same ? "yes" : "NO",
             now_seconds());
        ok = ok && same;
    }
    detail = "shortened desk runs of both benchmarks rerun to byte-identical trace CSVs";
    return ok;
}

// --- C10: flow benchmark training improves boundaries and held-out points --

bool criterion10(std::string& detail) {
    const RunConfig cfg = preset_config("cylinder-desk");
    const PhaseResult p1 = run_phase1(cfg);
    note("phase 1: %s after %d iterations [%.0fs]", trace_status_name(p1.trace.status),
         p1.trace.rows.back().iteration, now_seconds());
    const PhaseResult p2 = run_phase2(cfg, p1.params, p1.arch);
    const auto& rows = p2.trace.rows;
    note("phase 2: %s after %d iterations [%.0fs]", trace_status_name(p2.trace.status),
         rows.back().iteration, now_seconds());

    bool boundary_ok = true;
    for (const auto& [seg, first] : rows.front().breakdown.boundary) {
        const double last = rows.back().breakdown.boundary.at(seg);
        const bool seg_ok = last <= 0.1 * first;
        note("boundary %s: %.4g -> %.4g (%.1fx)%s", segment_name(seg), first, last,
             last > 0 ? first / last : std::numeric_limits<double>::infinity(),
             seg_ok ? "" : " INSUFFICIENT");
        boundary_ok = boundary_ok && seg_ok;
    }

    // Mean held-out residual per consecutive 100-iteration window must not
    // increase (tiny relative slack for rounding).
    std::vector<double> window_means;
    for (size_t begin = 0; begin + 100 <= rows.size(); begin += 100) {
        double sum = 0.0;
        for (size_t j = begin; j < begin + 100; ++j) sum += rows[j].heldout_msr;
        window_means.push_back(sum / 100.0);
    }
    bool heldout_ok = window_means.size() >= 2;
    for (size_t k = 0; k + 1 < window_means.size(); ++k) {
        if (!(window_means[k + 1] <= window_means[k] * (1.0 + 1e-12))) {
            heldout_ok = false;
            note("held-out window %zu rose: %.6g -> %.6g", k, window_means[k],
                 window_means[k + 1]);
        }
    }
    if (!window_means.empty())
        note("held-out residual windows: %zu, first %.4g last %.4g", window_means.size(),
             window_means.front(), window_means.back());

    std::ostringstream os;
    os << "flow desk run: every boundary segment improved >= 10x from the grafted start and "
       << window_means.size() << " held-out residual windows decrease monotonically";
    detail = os.str();
    return boundary_ok && heldout_ok;
}

using Criterion = bool (*)(std::string&);

struct Entry {
    Criterion fn;
    const char* label;
};

const Entry kCriteria[] = {
    {criterion1, "derivative cross-check"},
    {criterion2, "analytic residual"},
    {criterion3, "reduced-variance start"},
    {criterion4, "Burgers convergence"},
    {criterion5, "iterations-to-threshold ordering"},
    {criterion6, "graft drift"},
    {criterion7, "stratified sampling"},
    {criterion8, "optimizer oracles"},
    {criterion9, "trace determinism"},
    {criterion10, "flow training quality"},
};

int run_one(int idx) {
    std::string detail;
    const bool ok = kCriteria[idx - 1].fn(detail);
    std::printf("[%s] C%d: %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
    std::fflush(stdout);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 2) {
        std::fprintf(stderr, "usage: %s [criterion 1..10]\n", argv[0]);
        return 2;
    }
    if (argc == 2) {
        const int idx = std::atoi(argv[1]);
        if (idx < 1 || idx > 10) {
            std::fprintf(stderr, "criterion must be between 1 and 10\n");
            return 2;
        }
        return run_one(idx);
    }
    int failures = 0;
    for (int idx = 1; idx <= 10; ++idx) failures += run_one(idx);
    return failures == 0 ? 0 : 1;
}
