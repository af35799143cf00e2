#ifndef FEPINN_NETWORK_HPP
#define FEPINN_NETWORK_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fepinn/jet.hpp"
#include "fepinn/tape.hpp"

namespace fepinn {

enum class Activation { tanh };

/// Dense feed-forward shape: n_inputs -> hidden[0] -> ... -> n_outputs.
/// Hidden layers use the activation; the output layer is linear.
struct Architecture {
    int n_inputs = 0;
    std::vector<int> hidden;
    int n_outputs = 0;
    Activation activation = Activation::tanh;

    int n_layers() const { return static_cast<int>(hidden.size()) + 1; }
    int fan_in(int layer) const { return layer == 0 ? n_inputs : hidden[layer - 1]; }
    int fan_out(int layer) const {
        return layer == static_cast<int>(hidden.size()) ? n_outputs : hidden[layer];
    }
    void validate() const;
    bool operator==(const Architecture&) const = default;
};

/// Offsets of each layer's weight block and bias block inside the flat
/// parameter vector. Layer l stores W (fan_out x fan_in, row-major) then b.
struct ParamLayout {
    struct Layer {
        size_t w_off;
        size_t b_off;
        int fan_in;
        int fan_out;
    };
    std::vector<Layer> layers;
    size_t total = 0;

    explicit ParamLayout(const Architecture& arch);
};

enum class Provenance { xavier, reduced_variance, smart };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

/// Flat parameter vector plus a per-layer record of how each layer's values
/// were produced. Exactly one tag per layer (hidden layers then output).
struct Parameters {
    std::vector<double> values;
    std::vector<Provenance> tags;

    size_t size() const { return values.size(); }
};

/// Glorot-normal weights (std = sqrt(2 / (fan_in + fan_out))), zero biases.
/// Biases consume no draws, so two architectures differing only in bias
/// count see identical weight streams.
Parameters init_xavier(const Architecture& arch, uint64_t seed);

/// Same draws as init_xavier with every weight divided by `factor` (> 1).
Parameters init_reduced_variance(const Architecture& arch, uint64_t seed, double factor);

/// How a trained smaller network's layers carry over into a deeper one:
/// the first `smart_prefix` hidden layers and (optionally) the output layer
/// are copied; `inserted` fresh hidden layers go between them.
struct GraftPlan {
    int smart_prefix = 0;
    int inserted = 0;
    bool output_smart = true;
};

struct GraftResult {
    Parameters params;
    Architecture arch;
};

/// Architecture that graft_smart_weights produces, derivable without the
/// donor parameters (used to build the paired randomly-initialized network).
Architecture grafted_architecture(const Architecture& donor, const GraftPlan& plan);

/// Builds the deeper network by overwriting layers of a fresh Xavier draw
/// (seeded with `seed`) with the donor's layers per `plan`. Copied layers are
/// bit-identical to the donor and tagged smart; inserted layers are
/// bit-identical to init_xavier(grafted_architecture(...), seed) at the same
/// positions.
GraftResult graft_smart_weights(const Parameters& donor, const Architecture& donor_arch,
                                const GraftPlan& plan, uint64_t seed);

/// Plain forward pass, values only.
std::vector<double> forward(const Parameters& params, const Architecture& arch,
                            std::span<const double> point);

/// Forward pass carrying value/gradient/Hessian with respect to the inputs,
/// all in plain doubles (no parameter gradients).
///
/// `hess_comps` caps how many leading upper-triangle Hessian components are
/// propagated (-1 for all); the rest stay zero in the result. A component is
/// never computed from a dropped one, so the carried components are
/// bit-identical to a full pass.
std::vector<JetD> forward_jets_plain(const Parameters& params, const Architecture& arch,
                                     std::span<const double> point, int order = 2,
                                     int hess_comps = -1);

/// Forward pass whose jet components are tape nodes: input derivatives are
/// propagated forward while every component stays differentiable with
/// respect to the parameters. Resets the tape and registers the parameters
/// as leaves 0..params.size()-1.
std::vector<JetV> forward_jets(Tape& tape, const Parameters& params, const Architecture& arch,
                               std::span<const double> point, int order = 2,
                               int hess_comps = -1);

/// Same, but assumes the parameters are already registered as the first
/// params.size() leaves of the tape (callers rewind between points).
std::vector<JetV> forward_jets_with_leaves(Tape& tape, const Parameters& params,
                                           const Architecture& arch,
                                           std::span<const double> point, int order = 2,
                                           int hess_comps = -1);

/// Adjoints of the first n_params leaves for the scalar `loss`.
std::vector<double> parameter_gradient(Tape& tape, const Var& loss, size_t n_params);

} // namespace fepinn

#endif
