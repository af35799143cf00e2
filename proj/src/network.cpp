#include "fepinn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fepinn {

void Architecture::validate() const {
    if (n_inputs < 1 || n_inputs > Jet2<double>::max_dim)
        throw std::invalid_argument("architecture needs 1 to 3 inputs");
    if (n_outputs < 1)
        throw std::invalid_argument("architecture needs at least one output");
    for (int w : hidden)
        if (w < 1) throw std::invalid_argument("hidden layer width must be positive");
}

ParamLayout::ParamLayout(const Architecture& arch) {
    layers.reserve(static_cast<size_t>(arch.n_layers()));
    size_t off = 0;
    for (int l = 0; l < arch.n_layers(); ++l) {
        Layer lay;
        lay.fan_in = arch.fan_in(l);
        lay.fan_out = arch.fan_out(l);
        lay.w_off = off;
        off += static_cast<size_t>(lay.fan_in) * static_cast<size_t>(lay.fan_out);
        lay.b_off = off;
        off += static_cast<size_t>(lay.fan_out);
        layers.push_back(lay);
    }
    total = off;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::xavier: return "xavier";
        case Provenance::reduced_variance: return "reduced_variance";
        case Provenance::smart: return "smart";
    }
    throw std::invalid_argument("unknown provenance tag");
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "xavier") return Provenance::xavier;
    if (name == "reduced_variance") return Provenance::reduced_variance;
    if (name == "smart") return Provenance::smart;
    throw std::invalid_argument("unknown provenance tag: " + name);
}

Parameters init_xavier(const Architecture& arch, uint64_t seed) {
    arch.validate();
    ParamLayout layout(arch);
    Parameters p;
    p.values.assign(layout.total, 0.0);
    p.tags.assign(layout.layers.size(), Provenance::xavier);
    std::mt19937_64 gen(seed);
    for (const auto& lay : layout.layers) {
        const double stddev = std::sqrt(2.0 / (lay.fan_in + lay.fan_out));
        std::normal_distribution<double> dist(0.0, stddev);
        const size_t nw = static_cast<size_t>(lay.fan_in) * static_cast<size_t>(lay.fan_out);
        for (size_t k = 0; k < nw; ++k) p.values[lay.w_off + k] = dist(gen);
        // biases stay zero and consume no draws
    }
    return p;
}

Parameters init_reduced_variance(const Architecture& arch, uint64_t seed, double factor) {
    if (!(factor >= 1.0))
        throw std::invalid_argument("variance reduction factor must be >= 1");
    Parameters p = init_xavier(arch, seed);
    ParamLayout layout(arch);
    for (const auto& lay : layout.layers) {
        const size_t nw = static_cast<size_t>(lay.fan_in) * static_cast<size_t>(lay.fan_out);
        for (size_t k = 0; k < nw; ++k) p.values[lay.w_off + k] /= factor;
    }
    for (auto& t : p.tags) t = Provenance::reduced_variance;
    return p;
}

Architecture grafted_architecture(const Architecture& donor, const GraftPlan& plan) {
    donor.validate();
    const int donor_hidden = static_cast<int>(donor.hidden.size());
    if (plan.smart_prefix < 0 || plan.smart_prefix > donor_hidden)
        throw std::invalid_argument("smart prefix exceeds donor hidden layer count");
    if (plan.inserted < 0)
        throw std::invalid_argument("inserted layer count must be non-negative");
    if (plan.inserted > 0 && donor.hidden.empty())
        throw std::invalid_argument("cannot insert hidden layers into a network without any");

    Architecture out;
    out.n_inputs = donor.n_inputs;
    out.n_outputs = donor.n_outputs;
    out.activation = donor.activation;
    out.hidden.assign(donor.hidden.begin(), donor.hidden.begin() + plan.smart_prefix);
    const int w = donor.hidden.empty() ? 0 : donor.hidden.back();
    for (int k = 0; k < plan.inserted; ++k) out.hidden.push_back(w);

    if (plan.inserted > 0 && plan.smart_prefix > 0 &&
        donor.hidden[plan.smart_prefix - 1] != w)
        throw std::invalid_argument("graft width mismatch between smart prefix and inserted layers");
    if (plan.output_smart) {
        const int donor_in = donor.hidden.empty() ? donor.n_inputs : donor.hidden.back();
        const int out_in = out.hidden.empty() ? out.n_inputs : out.hidden.back();
        if (donor_in != out_in)
            throw std::invalid_argument("graft width mismatch at the output layer");
    }
    return out;
}

GraftResult graft_smart_weights(const Parameters& donor, const Architecture& donor_arch,
                                const GraftPlan& plan, uint64_t seed) {
    ParamLayout donor_layout(donor_arch);
    if (donor.values.size() != donor_layout.total)
        throw std::invalid_argument("donor parameter vector does not match its architecture");

    GraftResult res;
    res.arch = grafted_architecture(donor_arch, plan);
    res.params = init_xavier(res.arch, seed);
    ParamLayout layout(res.arch);

    auto copy_layer = [&](int from, int to) {
        const auto& src = donor_layout.layers[static_cast<size_t>(from)];
        const auto& dst = layout.layers[static_cast<size_t>(to)];
        const size_t nw = static_cast<size_t>(src.fan_in) * static_cast<size_t>(src.fan_out);
        for (size_t k = 0; k < nw; ++k) res.params.values[dst.w_off + k] = donor.values[src.w_off + k];
        for (size_t k = 0; k < static_cast<size_t>(src.fan_out); ++k)
            res.params.values[dst.b_off + k] = donor.values[src.b_off + k];
        res.params.tags[static_cast<size_t>(to)] = Provenance::smart;
    };

    for (int l = 0; l < plan.smart_prefix; ++l) copy_layer(l, l);
    if (plan.output_smart)
        copy_layer(donor_arch.n_layers() - 1, res.arch.n_layers() - 1);
    return res;
}

namespace {

struct HessPair {
    int i, j;
};

// Upper-triangle (i, j) pairs in the row-major order Jet2 stores them.
std::vector<HessPair> hess_pairs(int dim) {
    std::vector<HessPair> out;
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) out.push_back({i, j});
    return out;
}

void check_point(const Architecture& arch, std::span<const double> point) {
    if (static_cast<int>(point.size()) != arch.n_inputs)
        throw std::invalid_argument("point dimension does not match architecture inputs");
}

} // namespace

std::vector<double> forward(const Parameters& params, const Architecture& arch,
                            std::span<const double> point) {
    arch.validate();
    check_point(arch, point);
    ParamLayout layout(arch);
    if (params.values.size() != layout.total)
        throw std::invalid_argument("parameter vector does not match architecture");

    std::vector<double> a(point.begin(), point.end());
    std::vector<double> z;
    const double* p = params.values.data();
    for (int l = 0; l < arch.n_layers(); ++l) {
        const auto& lay = layout.layers[static_cast<size_t>(l)];
        z.assign(static_cast<size_t>(lay.fan_out), 0.0);
        for (int r = 0; r < lay.fan_out; ++r) {
            double acc = p[lay.b_off + static_cast<size_t>(r)];
            const double* w = p + lay.w_off + static_cast<size_t>(r) * static_cast<size_t>(lay.fan_in);
            for (int i = 0; i < lay.fan_in; ++i) acc += w[i] * a[static_cast<size_t>(i)];
            z[static_cast<size_t>(r)] = acc;
        }
        if (l + 1 < arch.n_layers())
            for (auto& x : z) x = std::tanh(x);
        a.swap(z);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Jet forward passes. Component layout is comp-major: buf[c * width + neuron],
// comp 0 the value, comps 1..dim the gradient, then Hessian upper triangle.
// The plain and tape paths accumulate in identical order so their values are
// bit-equal; the tape path additionally pushes one fused node per component
// with hand-derived local partials.
// ---------------------------------------------------------------------------

std::vector<JetD> forward_jets_plain(const Parameters& params, const Architecture& arch,
                                     std::span<const double> point, int order, int hess_comps) {
    arch.validate();
    check_point(arch, point);
    if (order < 0 || order > 2) throw std::invalid_argument("jet order must be 0, 1 or 2");
    ParamLayout layout(arch);
    if (params.values.size() != layout.total)
        throw std::invalid_argument("parameter vector does not match architecture");

    const int dim = arch.n_inputs;
    const auto hp = hess_pairs(dim);
    const int nh_full = order >= 2 ? static_cast<int>(hp.size()) : 0;
    const int nh = hess_comps < 0 ? nh_full : std::min(nh_full, hess_comps);
    const int ng = order >= 1 ? dim : 0;
    const int C = 1 + ng + nh;

    std::vector<double> a(static_cast<size_t>(C) * static_cast<size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i) {
        a[static_cast<size_t>(i)] = point[static_cast<size_t>(i)];
        if (order >= 1) a[static_cast<size_t>((1 + i) * dim + i)] = 1.0;
    }

    std::vector<double> z;
    const double* p = params.values.data();
    int width_in = dim;
    for (int l = 0; l < arch.n_layers(); ++l) {
        const auto& lay = layout.layers[static_cast<size_t>(l)];
        const int width_out = lay.fan_out;
        z.assign(static_cast<size_t>(C) * static_cast<size_t>(width_out), 0.0);
        for (int r = 0; r < width_out; ++r) {
            const double* w = p + lay.w_off + static_cast<size_t>(r) * static_cast<size_t>(lay.fan_in);
            for (int c = 0; c < C; ++c) {
                const double* in = a.data() + static_cast<size_t>(c) * static_cast<size_t>(width_in);
                double acc = c == 0 ? p[lay.b_off + static_cast<size_t>(r)] : 0.0;
                for (int i = 0; i < lay.fan_in; ++i) acc += w[i] * in[i];
                z[static_cast<size_t>(c) * static_cast<size_t>(width_out) + static_cast<size_t>(r)] = acc;
            }
        }
        if (l + 1 < arch.n_layers()) {
            for (int r = 0; r < width_out; ++r) {
                const size_t rr = static_cast<size_t>(r);
                const size_t W = static_cast<size_t>(width_out);
                const double t = std::tanh(z[rr]);
                const double tp = 1.0 - t * t;
                const double tpp = -2.0 * t * tp;
                // Hessian comps read the raw gradients, so update them first.
                for (int k = 0; k < nh; ++k) {
                    const size_t idx = static_cast<size_t>(1 + ng + k) * W + rr;
                    const double gi = z[static_cast<size_t>(1 + hp[static_cast<size_t>(k)].i) * W + rr];
                    const double gj = z[static_cast<size_t>(1 + hp[static_cast<size_t>(k)].j) * W + rr];
                    z[idx] = tpp * gi * gj + tp * z[idx];
                }
                z[rr] = t;
                for (int i = 0; i < ng; ++i)
                    z[static_cast<size_t>(1 + i) * W + rr] *= tp;
            }
        }
        a.swap(z);
        width_in = width_out;
    }

    std::vector<JetD> out(static_cast<size_t>(arch.n_outputs));
    for (int r = 0; r < arch.n_outputs; ++r) {
        JetD& j = out[static_cast<size_t>(r)];
        j.dim = dim;
        j.order = order;
        const size_t W = static_cast<size_t>(arch.n_outputs);
        j.v = a[static_cast<size_t>(r)];
        for (int i = 0; i < ng; ++i) j.g[static_cast<size_t>(i)] = a[static_cast<size_t>(1 + i) * W + static_cast<size_t>(r)];
        for (int k = 0; k < nh; ++k) j.h[static_cast<size_t>(k)] = a[static_cast<size_t>(1 + ng + k) * W + static_cast<size_t>(r)];
    }
    return out;
}

std::vector<JetV> forward_jets_with_leaves(Tape& tape, const Parameters& params,
                                           const Architecture& arch,
                                           std::span<const double> point, int order,
                                           int hess_comps) {
    arch.validate();
    check_point(arch, point);
    if (order < 0 || order > 2) throw std::invalid_argument("jet order must be 0, 1 or 2");
    ParamLayout layout(arch);
    if (params.values.size() != layout.total)
        throw std::invalid_argument("parameter vector does not match architecture");
    if (tape.size() < layout.total)
        throw std::invalid_argument("tape does not hold the parameter leaves");

    const int dim = arch.n_inputs;
    const auto hp = hess_pairs(dim);
    const int nh_full = order >= 2 ? static_cast<int>(hp.size()) : 0;
    const int nh = hess_comps < 0 ? nh_full : std::min(nh_full, hess_comps);
    const int ng = order >= 1 ? dim : 0;
    const int C = 1 + ng + nh;
    const double* p = params.values.data();

    std::vector<Var> a(static_cast<size_t>(C) * static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        a[static_cast<size_t>(i)] = Var(point[static_cast<size_t>(i)]);
        if (order >= 1) a[static_cast<size_t>((1 + i) * dim + i)] = Var(1.0);
    }

    std::vector<Var> z;
    int width_in = dim;
    for (int l = 0; l < arch.n_layers(); ++l) {
        const auto& lay = layout.layers[static_cast<size_t>(l)];
        const int width_out = lay.fan_out;
        z.assign(static_cast<size_t>(C) * static_cast<size_t>(width_out), Var());

        for (int r = 0; r < width_out; ++r) {
            const size_t wrow = lay.w_off + static_cast<size_t>(r) * static_cast<size_t>(lay.fan_in);
            for (int c = 0; c < C; ++c) {
                const Var* in = a.data() + static_cast<size_t>(c) * static_cast<size_t>(width_in);
                double acc = c == 0 ? p[lay.b_off + static_cast<size_t>(r)] : 0.0;
                auto nb = tape.begin_node();
                if (c == 0) nb.pair(static_cast<int32_t>(lay.b_off + static_cast<size_t>(r)), 1.0);
                for (int i = 0; i < lay.fan_in; ++i) {
                    const double wv = p[wrow + static_cast<size_t>(i)];
                    const Var& av = in[i];
                    acc += wv * av.v;
                    if (av.v != 0.0) nb.pair(static_cast<int32_t>(wrow + static_cast<size_t>(i)), av.v);
                    if (av.tracked() && wv != 0.0) nb.pair(av.id, wv);
                }
                Var& dst = z[static_cast<size_t>(c) * static_cast<size_t>(width_out) + static_cast<size_t>(r)];
                dst = nb.empty() ? Var(acc) : Var(acc, nb.finish(), &tape);
            }
        }

        if (l + 1 < arch.n_layers()) {
            const size_t W = static_cast<size_t>(width_out);
            for (int r = 0; r < width_out; ++r) {
                const size_t rr = static_cast<size_t>(r);
                const Var zv = z[rr];
                const double t = std::tanh(zv.v);
                const double tp = 1.0 - t * t;
                const double tpp = -2.0 * t * tp;
                // Hessian comps depend on the raw pre-activation gradients, so
                // they are rewritten before the gradient comps get scaled.
                if (nh > 0) {
                    const double tppp = -2.0 * (tp * tp + t * tpp);
                    for (int k = 0; k < nh; ++k) {
                        const int i = hp[static_cast<size_t>(k)].i;
                        const int j = hp[static_cast<size_t>(k)].j;
                        const Var& gvi = z[static_cast<size_t>(1 + i) * W + rr];
                        const Var& gvj = z[static_cast<size_t>(1 + j) * W + rr];
                        const double gi = gvi.v;
                        const double gj = gvj.v;
                        Var& hz = z[static_cast<size_t>(1 + ng + k) * W + rr];
                        const double hval = tpp * gi * gj + tp * hz.v;
                        auto nb = tape.begin_node();
                        const double dzv = tppp * gi * gj + tpp * hz.v;
                        if (zv.tracked() && dzv != 0.0) nb.pair(zv.id, dzv);
                        if (i == j) {
                            const double d = 2.0 * tpp * gi;
                            if (gvi.tracked() && d != 0.0) nb.pair(gvi.id, d);
                        } else {
                            if (gvi.tracked() && tpp * gj != 0.0) nb.pair(gvi.id, tpp * gj);
                            if (gvj.tracked() && tpp * gi != 0.0) nb.pair(gvj.id, tpp * gi);
                        }
                        if (hz.tracked()) nb.pair(hz.id, tp);
                        hz = nb.empty() ? Var(hval) : Var(hval, nb.finish(), &tape);
                    }
                }
                z[rr] = detail::unary_node(t, zv, tp);
                for (int i = 0; i < ng; ++i) {
                    Var& gz = z[static_cast<size_t>(1 + i) * W + rr];
                    gz = detail::binary_node(tp * gz.v, zv, tpp * gz.v, gz, tp);
                }
            }
        }
        a.swap(z);
        width_in = width_out;
    }

    std::vector<JetV> out(static_cast<size_t>(arch.n_outputs));
    const size_t W = static_cast<size_t>(arch.n_outputs);
    for (int r = 0; r < arch.n_outputs; ++r) {
        JetV& j = out[static_cast<size_t>(r)];
        j.dim = dim;
        j.order = order;
        j.v = a[static_cast<size_t>(r)];
        for (int i = 0; i < ng; ++i) j.g[static_cast<size_t>(i)] = a[static_cast<size_t>(1 + i) * W + static_cast<size_t>(r)];
        for (int k = 0; k < nh; ++k) j.h[static_cast<size_t>(k)] = a[static_cast<size_t>(1 + ng + k) * W + static_cast<size_t>(r)];
    }
    return out;
}

std::vector<JetV> forward_jets(Tape& tape, const Parameters& params, const Architecture& arch,
                               std::span<const double> point, int order, int hess_comps) {
    tape.clear();
    for (size_t i = 0; i < params.values.size(); ++i) tape.leaf();
    return forward_jets_with_leaves(tape, params, arch, point, order, hess_comps);
}

std::vector<double> parameter_gradient(Tape& tape, const Var& loss, size_t n_params) {
    if (!loss.tracked())
        throw std::invalid_argument("loss is a constant; nothing reaches the tape");
    if (loss.tape != &tape)
        throw std::invalid_argument("loss was recorded on a different tape");
    std::vector<double> grad(n_params, 0.0);
    tape.gradient(loss.id, grad);
    return grad;
}

} // namespace fepinn
