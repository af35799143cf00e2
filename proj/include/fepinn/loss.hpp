#ifndef FEPINN_LOSS_HPP
#define FEPINN_LOSS_HPP

#include <map>
#include <optional>
#include <vector>

#include "fepinn/network.hpp"
#include "fepinn/pde.hpp"
#include "fepinn/sampling.hpp"

namespace fepinn {

enum class Benchmark { cylinder_forward, cylinder_inverse, burgers };

const char* benchmark_name(Benchmark b);
Benchmark benchmark_from_name(const std::string& name);
ResidualKernel benchmark_kernel(Benchmark b);

/// The primary phase trains the small network on an unweighted subset of the
/// terms; the complete phase applies the boundary weight to every boundary
/// term of the benchmark.
enum class Phase { primary, complete };

struct LossSpec {
    Benchmark benchmark = Benchmark::burgers;
    Phase phase = Phase::complete;
    double lambda = 1.0;

    void validate() const;
};

/// Boundary segments whose MSE terms participate in the given loss.
std::vector<Segment> boundary_terms(Benchmark b, Phase p);
bool has_data_term(Benchmark b);

/// Per-term values are stored unweighted; `weight` is the factor applied to
/// the boundary and data terms inside `total`, so
///   total = pde + weight * (sum(boundary) + data).
struct LossBreakdown {
    double total = 0.0;
    double pde = 0.0;
    std::map<Segment, double> boundary;
    std::optional<double> data;
    double weight = 1.0;

    double boundary_sum() const;
};

struct TermEval {
    double value = 0.0;
    std::vector<double> grad;  // empty when gradients were not requested
};

struct LossEval {
    LossBreakdown breakdown;
    std::vector<double> grad;
};

/// Mean squared residual norm over the domain points.
TermEval pde_loss(const Parameters& params, const Architecture& arch, const PointSet& domain,
                  ResidualKernel kernel, const FluidConstants& consts, bool with_grad);

/// Mean squared error over every labeled (point, component) pair in the set.
TermEval boundary_mse(const Parameters& params, const Architecture& arch, const PointSet& pts,
                      bool with_grad);

/// Mean over points of the summed squared (u, v) errors against the labels.
TermEval inverse_data_loss(const Parameters& params, const Architecture& arch,
                           const PointSet& data, bool with_grad);

/// Assembles the full objective for one benchmark and phase. Boundary points
/// are filtered by segment; segments the spec of the loss does not mention
/// are ignored, missing required segments raise. `data` may be null unless
/// the benchmark has a data term.
LossEval compose_loss(const LossSpec& spec, const Parameters& params, const Architecture& arch,
                      const FluidConstants& consts, const PointSet& domain,
                      const PointSet& boundary, const PointSet* data, bool with_grad);

} // namespace fepinn

#endif
