#include "fepinn/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace fepinn {

const char* benchmark_name(Benchmark b) {
    switch (b) {
        case Benchmark::cylinder_forward: return "cylinder-forward";
        case Benchmark::cylinder_inverse: return "cylinder-inverse";
        case Benchmark::burgers: return "burgers";
    }
    throw std::invalid_argument("unknown benchmark");
}

Benchmark benchmark_from_name(const std::string& name) {
    for (Benchmark b : {Benchmark::cylinder_forward, Benchmark::cylinder_inverse, Benchmark::burgers})
        if (name == benchmark_name(b)) return b;
    throw std::invalid_argument("unknown benchmark: " + name);
}

ResidualKernel benchmark_kernel(Benchmark b) {
    return b == Benchmark::burgers ? ResidualKernel::burgers : ResidualKernel::navier_stokes;
}

void LossSpec::validate() const {
    if (!(lambda > 0.0))
        throw std::invalid_argument("boundary weight lambda must be positive");
}

std::vector<Segment> boundary_terms(Benchmark b, Phase p) {
    switch (b) {
        case Benchmark::cylinder_forward:
            return p == Phase::primary
                       ? std::vector<Segment>{Segment::inlet, Segment::wall}
                       : std::vector<Segment>{Segment::inlet, Segment::outlet, Segment::wall,
                                              Segment::cylinder};
        case Benchmark::cylinder_inverse:
            return p == Phase::primary
                       ? std::vector<Segment>{Segment::wall}
                       : std::vector<Segment>{Segment::outlet, Segment::wall, Segment::cylinder};
        case Benchmark::burgers:
            return p == Phase::primary
                       ? std::vector<Segment>{Segment::inlet}
                       : std::vector<Segment>{Segment::inlet, Segment::outlet, Segment::initial};
    }
    throw std::invalid_argument("unknown benchmark");
}

bool has_data_term(Benchmark b) { return b == Benchmark::cylinder_inverse; }

double LossBreakdown::boundary_sum() const {
    double s = 0.0;
    for (const auto& [seg, v] : boundary) s += v;
    return s;
}

namespace {

void check_network(const Parameters& params, const Architecture& arch) {
    arch.validate();
    if (params.values.size() != ParamLayout(arch).total)
        throw std::invalid_argument("parameter vector does not match architecture");
}

// Shared per-point tape loop: leaves once, rewind between points, reduce in
// point order. `eval` returns the point's tape-tracked contribution.
template <class PerPoint>
void accumulate_grad(const Parameters& params, const PointSet& pts, std::vector<double>& grad,
                     double& value, PerPoint&& eval) {
    Tape tape;
    for (size_t i = 0; i < params.values.size(); ++i) tape.leaf();
    const Tape::Mark mark = tape.mark();
    std::vector<double> point_grad(params.values.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        tape.rewind(mark);
        Var contribution = eval(tape, i);
        if (!contribution.tracked()) continue;  // constant contribution, zero gradient
        value += contribution.v;
        tape.gradient(contribution.id, point_grad);
        for (size_t k = 0; k < grad.size(); ++k) grad[k] += point_grad[k];
    }
}

} // namespace

TermEval pde_loss(const Parameters& params, const Architecture& arch, const PointSet& domain,
                  ResidualKernel kernel, const FluidConstants& consts, bool with_grad) {
    check_network(params, arch);
    consts.validate();
    if (domain.empty()) throw std::invalid_argument("domain point set is empty");
    if (static_cast<int>(arch.n_outputs) != kernel_outputs(kernel))
        throw std::invalid_argument("network output count does not match the residual kernel");

    const int order = kernel_order(kernel);
    const double n = static_cast<double>(domain.size());
    TermEval out;

    if (!with_grad) {
        for (size_t i = 0; i < domain.size(); ++i)
            out.value += residual_score(kernel, params, arch, domain.points[i], consts);
        out.value /= n;
        return out;
    }

    out.grad.assign(params.values.size(), 0.0);
    const int hess = kernel_hessian_comps(kernel);
    accumulate_grad(params, domain, out.grad, out.value, [&](Tape& tape, size_t i) {
        const auto jets =
            forward_jets_with_leaves(tape, params, arch, domain.points[i], order, hess);
        if (kernel == ResidualKernel::burgers)
            return burgers_residual(jets[0], consts).norm_sq();
        return ns_residuals<Var>(jets, consts).norm_sq();
    });
    out.value /= n;
    for (double& g : out.grad) g /= n;
    return out;
}

TermEval boundary_mse(const Parameters& params, const Architecture& arch, const PointSet& pts,
                      bool with_grad) {
    check_network(params, arch);
    if (pts.empty()) throw std::invalid_argument("boundary point set is empty");

    size_t n_labeled = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto& labels = i < pts.labels.size() ? pts.labels[i] : std::vector<std::pair<int, double>>{};
        for (const auto& [comp, target] : labels) {
            (void)target;
            if (comp < 0 || comp >= arch.n_outputs)
                throw std::invalid_argument("boundary label component outside network outputs");
            ++n_labeled;
        }
    }
    if (n_labeled == 0) throw std::invalid_argument("boundary set carries no labels");

    const double n = static_cast<double>(n_labeled);
    TermEval out;

    if (!with_grad) {
        for (size_t i = 0; i < pts.size(); ++i) {
            if (i >= pts.labels.size() || pts.labels[i].empty()) continue;
            const auto vals = forward(params, arch, pts.points[i]);
            double point_acc = 0.0;
            for (const auto& [comp, target] : pts.labels[i]) {
                const double e = vals[static_cast<size_t>(comp)] - target;
                point_acc = point_acc + e * e;
            }
            out.value += point_acc;
        }
        out.value /= n;
        return out;
    }

    out.grad.assign(params.values.size(), 0.0);
    accumulate_grad(params, pts, out.grad, out.value, [&](Tape& tape, size_t i) {
        if (i >= pts.labels.size() || pts.labels[i].empty()) return Var(0.0);
        const auto jets = forward_jets_with_leaves(tape, params, arch, pts.points[i], 0);
        Var acc(0.0);
        for (const auto& [comp, target] : pts.labels[i]) {
            const Var e = jets[static_cast<size_t>(comp)].v - target;
            acc = acc + square(e);
        }
        return acc;
    });
    out.value /= n;
    for (double& g : out.grad) g /= n;
    return out;
}

TermEval inverse_data_loss(const Parameters& params, const Architecture& arch,
                           const PointSet& data, bool with_grad) {
    check_network(params, arch);
    if (data.empty()) throw std::invalid_argument("data point set is empty");
    if (arch.n_outputs < 2)
        throw std::invalid_argument("data loss needs at least the (u, v) outputs");

    auto targets = [&](size_t i) {
        double tu = 0.0, tv = 0.0;
        bool has_u = false, has_v = false;
        if (i < data.labels.size()) {
            for (const auto& [comp, target] : data.labels[i]) {
                if (comp == 0) { tu = target; has_u = true; }
                if (comp == 1) { tv = target; has_v = true; }
            }
        }
        if (!has_u || !has_v)
            throw std::invalid_argument("data point is missing a (u, v) label");
        return std::pair<double, double>{tu, tv};
    };

    const double n = static_cast<double>(data.size());
    TermEval out;

    if (!with_grad) {
        for (size_t i = 0; i < data.size(); ++i) {
            const auto [tu, tv] = targets(i);
            const auto vals = forward(params, arch, data.points[i]);
            const double eu = vals[0] - tu;
            const double ev = vals[1] - tv;
            out.value += eu * eu + ev * ev;
        }
        out.value /= n;
        return out;
    }

    out.grad.assign(params.values.size(), 0.0);
    accumulate_grad(params, data, out.grad, out.value, [&](Tape& tape, size_t i) {
        const auto [tu, tv] = targets(i);
        const auto jets = forward_jets_with_leaves(tape, params, arch, data.points[i], 0);
        return square(jets[0].v - tu) + square(jets[1].v - tv);
    });
    out.value /= n;
    for (double& g : out.grad) g /= n;
    return out;
}

LossEval compose_loss(const LossSpec& spec, const Parameters& params, const Architecture& arch,
                      const FluidConstants& consts, const PointSet& domain,
                      const PointSet& boundary, const PointSet* data, bool with_grad) {
    spec.validate();
    const ResidualKernel kernel = benchmark_kernel(spec.benchmark);
    const double weight = spec.phase == Phase::primary ? 1.0 : spec.lambda;

    LossEval out;
    out.breakdown.weight = weight;
    if (with_grad) out.grad.assign(params.values.size(), 0.0);

    auto add_term = [&](const TermEval& term, double w) {
        out.breakdown.total += w * term.value;
        if (with_grad)
            for (size_t k = 0; k < out.grad.size(); ++k) out.grad[k] += w * term.grad[k];
    };

    const TermEval pde = pde_loss(params, arch, domain, kernel, consts, with_grad);
    out.breakdown.pde = pde.value;
    add_term(pde, 1.0);

    for (Segment seg : boundary_terms(spec.benchmark, spec.phase)) {
        const PointSet sub = boundary.filter(seg);
        if (sub.empty())
            throw std::runtime_error(std::string("missing boundary points for segment: ") +
                                     segment_name(seg));
        const TermEval term = boundary_mse(params, arch, sub, with_grad);
        out.breakdown.boundary[seg] = term.value;
        add_term(term, weight);
    }

    if (has_data_term(spec.benchmark)) {
        if (!data || data->empty())
            throw std::runtime_error("benchmark requires supervision data points");
        const TermEval term = inverse_data_loss(params, arch, *data, with_grad);
        out.breakdown.data = term.value;
        add_term(term, weight);
    }
    return out;
}

} // namespace fepinn
