#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "fepinn/harness.hpp"
#include "fepinn/util.hpp"

namespace fepinn {

double burgers_grid_error(const Predictor& predict, int nx, int nt, double* max_abs_err) {
    if (nx < 2 || nt < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
    const Geometry geom = Geometry::burgers_rectangle();
    double err_sq = 0.0, ref_sq = 0.0, max_abs = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double x = geom.lo[0] + (geom.hi[0] - geom.lo[0]) * i / (nx - 1);
        for (int j = 0; j < nt; ++j) {
            const double t = geom.lo[1] + (geom.hi[1] - geom.lo[1]) * j / (nt - 1);
            const double truth = burgers_exact(x, t);
            const double pred = predict({x, t}).at(0);
            const double e = pred - truth;
            err_sq += e * e;
            ref_sq += truth * truth;
            max_abs = std::max(max_abs, std::abs(e));
        }
    }
    if (max_abs_err) *max_abs_err = max_abs;
    if (!(ref_sq > 0.0)) throw std::runtime_error("reference field is identically zero");
    return std::sqrt(err_sq / ref_sq);
}

double r_squared(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw std::invalid_argument("r_squared needs equal-length non-empty inputs");
    double mean = 0.0;
    for (double t : truth) mean += t;
    mean /= static_cast<double>(truth.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        const double r = truth[i] - pred[i];
        const double d = truth[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (!(ss_tot > 0.0)) throw std::invalid_argument("r_squared is undefined for constant truth");
    return 1.0 - ss_res / ss_tot;
}

void EvalReport::write(std::ostream& os) const {
    os << "metric,value\n";
    auto row = [&](const char* name, double v) {
        if (!std::isnan(v)) os << name << "," << fmt_double(v) << "\n";
    };
    os << "benchmark," << benchmark_name(benchmark) << "\n";
    row("rel_l2", rel_l2);
    row("max_abs_err", max_abs_err);
    row("inlet_r2", inlet_r2);
    for (const auto& [seg, v] : boundary_mse)
        os << "boundary_mse_" << segment_name(seg) << "," << fmt_double(v) << "\n";
    row("mean_residual_norm", mean_residual_norm);
}

namespace {

double mean_residual_norm_of(const Parameters& params, const Architecture& arch,
                             const PointSet& pts, ResidualKernel kernel,
                             const FluidConstants& consts) {
    double acc = 0.0;
    for (const auto& p : pts.points)
        acc += std::sqrt(residual_score(kernel, params, arch, p, consts));
    return acc / static_cast<double>(pts.size());
}

} // namespace

EvalReport evaluate_solution(const Parameters& params, const Architecture& arch,
                             Benchmark benchmark, const FluidConstants& consts) {
    // Evaluation sampling is fixed so reports are comparable across runs.
    constexpr uint64_t kBoundarySeed = 90001;
    constexpr uint64_t kHeldoutSeed = 90002;

    EvalReport rep;
    rep.benchmark = benchmark;
    const ResidualKernel kernel = benchmark_kernel(benchmark);
    if (arch.n_outputs != kernel_outputs(kernel))
        throw std::invalid_argument("network architecture does not match the benchmark");

    switch (benchmark) {
        case Benchmark::burgers: {
            const Predictor predict = [&](const std::array<double, 2>& p) {
                return forward(params, arch, p);
            };
            rep.rel_l2 = burgers_grid_error(predict, 200, 200, &rep.max_abs_err);
            const PointSet heldout =
                lhs_sample(Geometry::burgers_rectangle(), 500, kHeldoutSeed, 0.0);
            rep.mean_residual_norm = mean_residual_norm_of(params, arch, heldout, kernel, consts);
            break;
        }
        case Benchmark::cylinder_inverse: {
            constexpr int n = 100;
            std::vector<double> truth(n), pred(n);
            for (int i = 0; i < n; ++i) {
                const double y = 0.4 * i / (n - 1);
                truth[i] = inlet_velocity(y);
                pred[i] = forward(params, arch, std::array<double, 2>{0.0, y}).at(0);
            }
            rep.inlet_r2 = r_squared(truth, pred);
            const PointSet heldout = lhs_sample(Geometry::channel(), 500, kHeldoutSeed, 0.3);
            rep.mean_residual_norm = mean_residual_norm_of(params, arch, heldout, kernel, consts);
            break;
        }
        case Benchmark::cylinder_forward: {
            const Geometry geom = Geometry::channel();
            const std::map<Segment, int> counts{{Segment::inlet, 100},
                                                {Segment::outlet, 100},
                                                {Segment::wall, 200},
                                                {Segment::cylinder, 100}};
            const PointSet boundary = sample_boundary(geom, counts, kBoundarySeed);
            for (const auto& [seg, cnt] : counts)
                rep.boundary_mse[seg] = boundary_mse(params, arch, boundary.filter(seg), false).value;
            const PointSet heldout = lhs_sample(geom, 500, kHeldoutSeed, 0.3);
            rep.mean_residual_norm = mean_residual_norm_of(params, arch, heldout, kernel, consts);
            break;
        }
    }
    return rep;
}

PointSet make_inverse_labels(const Parameters& params, const Architecture& arch,
                             const Geometry& geom, int n, uint64_t seed) {
    if (arch.n_outputs < 2)
        throw std::invalid_argument("label source network must predict at least (u, v)");
    PointSet set = lhs_sample(geom, n, seed, 0.0);
    set.labels.resize(set.points.size());
    for (size_t i = 0; i < set.points.size(); ++i) {
        const std::vector<double> out = forward(params, arch, set.points[i]);
        set.labels[i] = {{0, out[0]}, {1, out[1]}};
    }
    return set;
}

namespace {

/// Relative above 1, absolute below: |a - b| / max(1, |a|, |b|). The floor
/// keeps finite-difference noise on near-zero derivatives from dominating.
double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double output_at(const Parameters& params, const Architecture& arch, std::array<double, 2> p,
                 int comp) {
    return forward(params, arch, p)[comp];
}

double sq_loss_at(const Parameters& params, const Architecture& arch,
                  const std::array<double, 2>& p) {
    double acc = 0.0;
    for (double v : forward(params, arch, p)) acc += v * v;
    return acc;
}

} // namespace

FdCheckReport fd_selfcheck(uint64_t seed, int draws) {
    if (draws < 1) throw std::invalid_argument("fd_selfcheck needs at least one draw");
    FdCheckReport rep;
    rep.draws = draws;
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_int_distribution<int> depth_dist(1, 3), width_dist(3, 10), out_dist(1, 3);
    std::uniform_real_distribution<double> coord(-0.8, 0.8);

    Tape tape;
    for (int d = 0; d < draws; ++d) {
        Architecture arch;
        arch.n_inputs = 2;
        arch.hidden.resize(depth_dist(rng));
        for (int& w : arch.hidden) w = width_dist(rng);
        arch.n_outputs = out_dist(rng);
        const Parameters params = init_xavier(arch, seed_stream(seed, 1000 + d));
        const std::array<double, 2> p{coord(rng), coord(rng)};

        const std::vector<JetD> jets = forward_jets_plain(params, arch, p, 2);

        const double h1 = 1e-5;
        const double h2 = 1e-3;
        for (int r = 0; r < arch.n_outputs; ++r) {
            for (int i = 0; i < 2; ++i) {
                auto pp = p, pm = p;
                pp[i] += h1;
                pm[i] -= h1;
                const double fd =
                    (output_at(params, arch, pp, r) - output_at(params, arch, pm, r)) / (2.0 * h1);
                rep.max_rel_first = std::max(rep.max_rel_first, rel_err(jets[r].g[i], fd));
            }
            for (int i = 0; i < 2; ++i) {
                auto pp = p, pm = p;
                pp[i] += h2;
                pm[i] -= h2;
                const double fd = (output_at(params, arch, pp, r) -
                                   2.0 * output_at(params, arch, p, r) +
                                   output_at(params, arch, pm, r)) /
                                  (h2 * h2);
                rep.max_rel_second = std::max(rep.max_rel_second, rel_err(jets[r].hess(i, i), fd));
            }
            {
                auto ppp = p, ppm = p, pmp = p, pmm = p;
                ppp[0] += h2; ppp[1] += h2;
                ppm[0] += h2; ppm[1] -= h2;
                pmp[0] -= h2; pmp[1] += h2;
                pmm[0] -= h2; pmm[1] -= h2;
                const double fd =
                    (output_at(params, arch, ppp, r) - output_at(params, arch, ppm, r) -
                     output_at(params, arch, pmp, r) + output_at(params, arch, pmm, r)) /
                    (4.0 * h2 * h2);
                rep.max_rel_second = std::max(rep.max_rel_second, rel_err(jets[r].hess(0, 1), fd));
            }
        }

        // Parameter gradient of the squared-output loss against central FD on
        // a random subset of the parameters.
        const std::vector<JetV> vjets = forward_jets(tape, params, arch, p, 0);
        Var loss = square(vjets[0].v);
        for (int r = 1; r < arch.n_outputs; ++r) loss = loss + square(vjets[r].v);
        const std::vector<double> grad = parameter_gradient(tape, loss, params.size());

        std::uniform_int_distribution<size_t> pick(0, params.size() - 1);
        const double hp = 1e-6;
        Parameters probe = params;
        for (int k = 0; k < 20; ++k) {
            const size_t j = pick(rng);
            const double saved = probe.values[j];
            probe.values[j] = saved + hp;
            const double fp = sq_loss_at(probe, arch, p);
            probe.values[j] = saved - hp;
            const double fm = sq_loss_at(probe, arch, p);
            probe.values[j] = saved;
            rep.max_rel_param = std::max(rep.max_rel_param, rel_err(grad[j], (fp - fm) / (2.0 * hp)));
        }
    }
    rep.pass = rep.max_rel_first <= 1e-6 && rep.max_rel_second <= 1e-4 && rep.max_rel_param <= 1e-6;
    return rep;
}

} // namespace fepinn
