#include <cmath>
#include <stdexcept>

#include "fepinn/trainer.hpp"

namespace fepinn {

namespace {

RunConfig burgers_base() {
    RunConfig cfg;
    cfg.benchmark = Benchmark::burgers;
    cfg.phase1_arch = Architecture{2, {20, 20}, 1, Activation::tanh};
    cfg.graft = GraftPlan{2, 2, true};
    cfg.consts = FluidConstants{1.0, 0.01};
    cfg.geometry = Geometry::burgers_rectangle();
    cfg.variance_factor = std::sqrt(5.0);
    cfg.domain_points = 2000;
    cfg.boundary_counts = {{Segment::initial, 100}, {Segment::inlet, 60}, {Segment::outlet, 60}};
    cfg.densify = 0.0;
    return cfg;
}

RunConfig cylinder_base(Benchmark benchmark) {
    RunConfig cfg;
    cfg.benchmark = benchmark;
    cfg.consts = FluidConstants{1.0, 0.02};
    cfg.geometry = Geometry::channel();
    cfg.variance_factor = std::sqrt(10.0);
    cfg.densify = 0.3;
    return cfg;
}

} // namespace

RunConfig preset_config(const std::string& name) {
    if (name == "burgers-desk") {
        RunConfig cfg = burgers_base();
        cfg.phase1_iterations = 400;
        cfg.phase2_iterations = 4000;
        cfg.threshold = 1e-6;
        return cfg;
    }
    if (name == "burgers-full") {
        RunConfig cfg = burgers_base();
        cfg.phase1_iterations = 2000;
        cfg.phase2_iterations = 50000;
        cfg.threshold = 1e-6;
        return cfg;
    }
    if (name == "cylinder-desk") {
        RunConfig cfg = cylinder_base(Benchmark::cylinder_forward);
        cfg.phase1_arch = Architecture{2, {16, 16, 16, 16}, 6, Activation::tanh};
        cfg.graft = GraftPlan{4, 4, true};
        cfg.domain_points = 1200;
        cfg.boundary_counts = {{Segment::inlet, 40},
                               {Segment::outlet, 40},
                               {Segment::wall, 80},
                               {Segment::cylinder, 40}};
        cfg.heldout_points = 200;
        cfg.phase1_iterations = 1500;
        cfg.phase2_iterations = 2500;
        cfg.threshold = 1e-4;
        return cfg;
    }
    if (name == "cylinder-full") {
        RunConfig cfg = cylinder_base(Benchmark::cylinder_forward);
        cfg.phase1_arch = Architecture{2, {40, 40, 40, 40}, 6, Activation::tanh};
        cfg.graft = GraftPlan{4, 4, true};
        cfg.domain_points = 371760;
        cfg.boundary_counts = {{Segment::inlet, 500},
                               {Segment::outlet, 500},
                               {Segment::wall, 1000},
                               {Segment::cylinder, 500}};
        cfg.phase1_iterations = 2000;
        cfg.phase2_iterations = 30000;
        cfg.threshold = 1e-4;
        return cfg;
    }
    if (name == "inverse-desk") {
        RunConfig cfg = cylinder_base(Benchmark::cylinder_inverse);
        cfg.phase1_arch = Architecture{2, {16, 16, 16, 16}, 6, Activation::tanh};
        cfg.graft = GraftPlan{4, 4, true};
        cfg.domain_points = 1200;
        cfg.boundary_counts = {{Segment::outlet, 40},
                               {Segment::wall, 80},
                               {Segment::cylinder, 40}};
        cfg.data_labels_path = "data/inverse_labels_desk.csv";
        cfg.phase1_iterations = 1500;
        cfg.phase2_iterations = 2500;
        cfg.threshold = 1e-4;
        return cfg;
    }
    if (name == "inverse-full") {
        RunConfig cfg = cylinder_base(Benchmark::cylinder_inverse);
        cfg.phase1_arch = Architecture{2, {40, 40, 40, 40}, 6, Activation::tanh};
        cfg.graft = GraftPlan{4, 4, true};
        cfg.domain_points = 371760;
        cfg.boundary_counts = {{Segment::outlet, 500},
                               {Segment::wall, 1000},
                               {Segment::cylinder, 500}};
        cfg.data_labels_path = "data/inverse_labels_desk.csv";
        cfg.phase1_iterations = 2000;
        cfg.phase2_iterations = 30000;
        cfg.threshold = 1e-4;
        return cfg;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
    return {"burgers-desk",  "burgers-full", "cylinder-desk",
            "cylinder-full", "inverse-desk", "inverse-full"};
}

} // namespace fepinn
