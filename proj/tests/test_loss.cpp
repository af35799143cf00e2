#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fepinn/loss.hpp"

using namespace fepinn;

namespace {

Parameters zero_params(const Architecture& arch) {
    Parameters p;
    p.values.assign(ParamLayout(arch).total, 0.0);
    p.tags.assign(static_cast<size_t>(arch.n_layers()), Provenance::xavier);
    return p;
}

PointSet labeled_points(std::vector<std::array<double, 2>> pts,
                        std::vector<std::vector<std::pair<int, double>>> labels,
                        Segment seg = Segment::interior) {
    PointSet s;
    s.points = std::move(pts);
    s.labels = std::move(labels);
    s.segments.assign(s.points.size(), seg);
    return s;
}

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

} // namespace

TEST_CASE("boundary mse averages over labeled pairs, not points") {
    Architecture arch{2, {3}, 2, Activation::tanh};
    const Parameters zero = zero_params(arch);

    // A zero network matches zero labels exactly.
    auto exact = labeled_points({{0.1, 0.2}}, {{{0, 0.0}}});
    CHECK(boundary_mse(zero, arch, exact, false).value == 0.0);

    // One label of 1 against output 0.
    auto one = labeled_points({{0.1, 0.2}}, {{{0, 1.0}}});
    CHECK(boundary_mse(zero, arch, one, false).value == 1.0);

    // Two labels on the same point: (1^2 + 2^2) / 2.
    auto two = labeled_points({{0.1, 0.2}}, {{{0, 1.0}, {1, 2.0}}});
    CHECK(boundary_mse(zero, arch, two, false).value == 2.5);

    // Three labeled pairs across two points: (1 + 0 + 4) / 3.
    auto mixed = labeled_points({{0.1, 0.2}, {0.3, 0.1}}, {{{0, 1.0}}, {{0, 0.0}, {1, 2.0}}});
    CHECK(boundary_mse(zero, arch, mixed, false).value == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

    // An unlabeled point changes neither numerator nor denominator.
    auto padded = mixed;
    padded.points.push_back({0.9, 0.9});
    padded.segments.push_back(Segment::interior);
    padded.labels.push_back({});
    CHECK(boundary_mse(zero, arch, padded, false).value == boundary_mse(zero, arch, mixed, false).value);

    auto bad_comp = labeled_points({{0.1, 0.2}}, {{{5, 1.0}}});
    CHECK_THROWS_AS(boundary_mse(zero, arch, bad_comp, false), std::invalid_argument);
    CHECK_THROWS_AS(boundary_mse(zero, arch, PointSet{}, false), std::invalid_argument);
    auto unlabeled = labeled_points({{0.1, 0.2}}, {{}});
    CHECK_THROWS_AS(boundary_mse(zero, arch, unlabeled, false), std::invalid_argument);
}

TEST_CASE("data loss is the mean summed (u, v) error") {
    Architecture arch{2, {3}, 6, Activation::tanh};
    const Parameters zero = zero_params(arch);

    auto one = labeled_points({{0.5, 0.2}}, {{{0, 1.0}, {1, 2.0}}});
    CHECK(inverse_data_loss(zero, arch, one, false).value == 5.0);

    auto two = labeled_points({{0.5, 0.2}, {0.6, 0.1}},
                              {{{0, 1.0}, {1, 0.0}}, {{0, 0.0}, {1, 0.0}}});
    CHECK(inverse_data_loss(zero, arch, two, false).value == 0.5);

    // Duplicating every point leaves the mean unchanged.
    auto doubled = two;
    doubled.append(two);
    CHECK(inverse_data_loss(zero, arch, doubled, false).value ==
          inverse_data_loss(zero, arch, two, false).value);

    auto missing_v = labeled_points({{0.5, 0.2}}, {{{0, 1.0}}});
    CHECK_THROWS_AS(inverse_data_loss(zero, arch, missing_v, false), std::invalid_argument);
    Architecture narrow{2, {3}, 1, Activation::tanh};
    CHECK_THROWS_AS(inverse_data_loss(zero_params(narrow), narrow, one, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(inverse_data_loss(zero, arch, PointSet{}, false), std::invalid_argument);
}

TEST_CASE("a zero network has zero residual loss and zero gradient") {
    Architecture arch{2, {4}, 1, Activation::tanh};
    const Parameters zero = zero_params(arch);
    FluidConstants consts;
    consts.mu = 0.01;
    const PointSet domain = lhs_sample(Geometry::burgers_rectangle(), 8, 4);

    const TermEval value = pde_loss(zero, arch, domain, ResidualKernel::burgers, consts, false);
    CHECK(value.value == 0.0);
    CHECK(value.grad.empty());

    const TermEval grad = pde_loss(zero, arch, domain, ResidualKernel::burgers, consts, true);
    CHECK(grad.value == 0.0);
    REQUIRE(grad.grad.size() == zero.size());

    CHECK_THROWS_AS(pde_loss(zero, arch, PointSet{}, ResidualKernel::burgers, consts, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(pde_loss(zero, arch, domain, ResidualKernel::navier_stokes, consts, false),
                    std::invalid_argument);
}

TEST_CASE("value mode and gradient mode agree bit for bit on the value") {
    FluidConstants consts;
    consts.mu = 0.01;
    Architecture arch{2, {5, 5}, 1, Activation::tanh};
    const Parameters params = init_xavier(arch, 321);
    const PointSet domain = lhs_sample(Geometry::burgers_rectangle(), 10, 8);
    CHECK(pde_loss(params, arch, domain, ResidualKernel::burgers, consts, false).value ==
          pde_loss(params, arch, domain, ResidualKernel::burgers, consts, true).value);

    const PointSet bnd = sample_boundary(Geometry::burgers_rectangle(),
                                         {{Segment::inlet, 4}, {Segment::initial, 5}}, 13);
    CHECK(boundary_mse(params, arch, bnd, false).value ==
          boundary_mse(params, arch, bnd, true).value);

    Architecture wide{2, {4}, 6, Activation::tanh};
    const Parameters wparams = init_xavier(wide, 9);
    auto data = labeled_points({{0.5, 0.2}, {0.8, 0.3}},
                               {{{0, 0.7}, {1, -0.1}}, {{0, 0.2}, {1, 0.4}}});
    CHECK(inverse_data_loss(wparams, wide, data, false).value ==
          inverse_data_loss(wparams, wide, data, true).value);
}

TEST_CASE("composed total equals the weighted sum of its parts") {
    FluidConstants consts;
    consts.mu = 0.01;
    Architecture arch{2, {5}, 1, Activation::tanh};
    const Parameters params = init_xavier(arch, 77);
    const Geometry geom = Geometry::burgers_rectangle();
    const PointSet domain = lhs_sample(geom, 12, 21);
    const PointSet boundary = sample_boundary(
        geom, {{Segment::inlet, 4}, {Segment::outlet, 4}, {Segment::initial, 6}}, 31);

    LossSpec spec;
    spec.benchmark = Benchmark::burgers;
    spec.phase = Phase::complete;
    spec.lambda = 2.5;
    const LossEval eval = compose_loss(spec, params, arch, consts, domain, boundary, nullptr, false);
    const LossBreakdown& b = eval.breakdown;
    CHECK(b.weight == 2.5);
    CHECK(b.boundary.size() == 3);
    CHECK_FALSE(b.data.has_value());
    CHECK(rel_err(b.total, b.pde + b.weight * b.boundary_sum()) <= 1e-12);

    // The per-term values match the standalone evaluations.
    CHECK(b.pde == pde_loss(params, arch, domain, ResidualKernel::burgers, consts, false).value);
    CHECK(b.boundary.at(Segment::inlet) ==
          boundary_mse(params, arch, boundary.filter(Segment::inlet), false).value);
}

TEST_CASE("lambda scales exactly the boundary and data terms") {
    FluidConstants consts;
    Architecture arch{2, {4}, 6, Activation::tanh};
    const Parameters params = init_xavier(arch, 15);
    const Geometry geom = Geometry::channel();
    const PointSet domain = lhs_sample(geom, 10, 41);
    const PointSet boundary = sample_boundary(
        geom, {{Segment::outlet, 3}, {Segment::wall, 5}, {Segment::cylinder, 3}}, 51);
    auto data = labeled_points({{0.5, 0.2}, {0.7, 0.1}},
                               {{{0, 0.5}, {1, 0.0}}, {{0, 0.3}, {1, 0.1}}});

    LossSpec s1{Benchmark::cylinder_inverse, Phase::complete, 1.0};
    LossSpec s2{Benchmark::cylinder_inverse, Phase::complete, 4.0};
    const LossBreakdown b1 = compose_loss(s1, params, arch, consts, domain, boundary, &data, false).breakdown;
    const LossBreakdown b2 = compose_loss(s2, params, arch, consts, domain, boundary, &data, false).breakdown;

    REQUIRE(b1.data.has_value());
    CHECK(b1.pde == b2.pde);
    CHECK(b1.boundary_sum() == b2.boundary_sum());
    CHECK(*b1.data == *b2.data);
    const double group = b1.boundary_sum() + *b1.data;
    CHECK(rel_err(b2.total - b1.total, 3.0 * group) <= 1e-12);

    // The primary phase ignores lambda entirely.
    LossSpec prim{Benchmark::cylinder_inverse, Phase::primary, 4.0};
    const LossBreakdown bp = compose_loss(prim, params, arch, consts, domain, boundary, &data, false).breakdown;
    CHECK(bp.weight == 1.0);
    CHECK(bp.boundary.size() == 1);
    CHECK(bp.boundary.count(Segment::wall) == 1);
    REQUIRE(bp.data.has_value());
    CHECK(rel_err(bp.total, bp.pde + bp.boundary_sum() + *bp.data) <= 1e-12);
}

TEST_CASE("term registry: primary terms are a subset of the complete terms") {
    for (Benchmark b : {Benchmark::cylinder_forward, Benchmark::cylinder_inverse, Benchmark::burgers}) {
        const auto prim = boundary_terms(b, Phase::primary);
        const auto full = boundary_terms(b, Phase::complete);
        CHECK(prim.size() < full.size());
        for (Segment s : prim)
            CHECK(std::find(full.begin(), full.end(), s) != full.end());
    }
    const auto fwd = boundary_terms(Benchmark::cylinder_forward, Phase::complete);
    CHECK(fwd == std::vector<Segment>{Segment::inlet, Segment::outlet, Segment::wall, Segment::cylinder});
    CHECK(boundary_terms(Benchmark::cylinder_forward, Phase::primary) ==
          std::vector<Segment>{Segment::inlet, Segment::wall});
    CHECK(boundary_terms(Benchmark::cylinder_inverse, Phase::complete) ==
          std::vector<Segment>{Segment::outlet, Segment::wall, Segment::cylinder});
    CHECK(boundary_terms(Benchmark::cylinder_inverse, Phase::primary) ==
          std::vector<Segment>{Segment::wall});
    CHECK(boundary_terms(Benchmark::burgers, Phase::complete) ==
          std::vector<Segment>{Segment::inlet, Segment::outlet, Segment::initial});
    CHECK(boundary_terms(Benchmark::burgers, Phase::primary) ==
          std::vector<Segment>{Segment::inlet});
    CHECK(has_data_term(Benchmark::cylinder_inverse));
    CHECK_FALSE(has_data_term(Benchmark::cylinder_forward));
    CHECK_FALSE(has_data_term(Benchmark::burgers));
}

TEST_CASE("composition ignores extra segments and names the missing ones") {
    FluidConstants consts;
    consts.mu = 0.01;
    Architecture arch{2, {4}, 1, Activation::tanh};
    const Parameters params = init_xavier(arch, 3);
    const Geometry geom = Geometry::burgers_rectangle();
    const PointSet domain = lhs_sample(geom, 6, 61);
    const PointSet all = sample_boundary(
        geom, {{Segment::inlet, 3}, {Segment::outlet, 3}, {Segment::initial, 3}}, 71);

    LossSpec prim{Benchmark::burgers, Phase::primary, 1.0};
    const LossBreakdown with_extras =
        compose_loss(prim, params, arch, consts, domain, all, nullptr, false).breakdown;
    const LossBreakdown inlet_only =
        compose_loss(prim, params, arch, consts, domain, all.filter(Segment::inlet), nullptr, false)
            .breakdown;
    CHECK(with_extras.total == inlet_only.total);
    CHECK(with_extras.boundary.size() == 1);

    LossSpec full{Benchmark::burgers, Phase::complete, 1.0};
    CHECK_THROWS_WITH_AS(
        compose_loss(full, params, arch, consts, domain, all.filter(Segment::inlet), nullptr, false),
        "missing boundary points for segment: outlet", std::runtime_error);

    LossSpec inv{Benchmark::cylinder_inverse, Phase::primary, 1.0};
    Architecture wide{2, {4}, 6, Activation::tanh};
    const PointSet wall = sample_boundary(Geometry::channel(), {{Segment::wall, 4}}, 81);
    const PointSet chan_dom = lhs_sample(Geometry::channel(), 6, 91);
    CHECK_THROWS_WITH_AS(compose_loss(inv, init_xavier(wide, 1), wide, consts, chan_dom, wall,
                                      nullptr, false),
                         "benchmark requires supervision data points", std::runtime_error);

    LossSpec bad{Benchmark::burgers, Phase::complete, 0.0};
    CHECK_THROWS_AS(compose_loss(bad, params, arch, consts, domain, all, nullptr, false),
                    std::invalid_argument);
}

TEST_CASE("composed gradient matches central finite differences") {
    FluidConstants consts;
    consts.mu = 0.01;
    Architecture arch{2, {4}, 1, Activation::tanh};
    Parameters params = init_xavier(arch, 2024);
    const Geometry geom = Geometry::burgers_rectangle();
    const PointSet domain = lhs_sample(geom, 6, 5);
    const PointSet boundary = sample_boundary(
        geom, {{Segment::inlet, 3}, {Segment::outlet, 2}, {Segment::initial, 3}}, 6);
    LossSpec spec{Benchmark::burgers, Phase::complete, 2.5};

    const LossEval eval = compose_loss(spec, params, arch, consts, domain, boundary, nullptr, true);
    REQUIRE(eval.grad.size() == params.size());

    const double h = 1e-6;
    for (size_t k = 0; k < params.size(); ++k) {
        const double saved = params.values[k];
        params.values[k] = saved + h;
        const double up = compose_loss(spec, params, arch, consts, domain, boundary, nullptr, false)
                              .breakdown.total;
        params.values[k] = saved - h;
        const double dn = compose_loss(spec, params, arch, consts, domain, boundary, nullptr, false)
                              .breakdown.total;
        params.values[k] = saved;
        CHECK(rel_err(eval.grad[k], (up - dn) / (2.0 * h)) <= 1e-6);
    }
}

TEST_CASE("data-term gradient matches central finite differences") {
    Architecture arch{2, {3}, 6, Activation::tanh};
    Parameters params = init_xavier(arch, 88);
    auto data = labeled_points({{0.4, 0.2}, {0.7, 0.35}},
                               {{{0, 0.9}, {1, -0.2}}, {{0, 0.1}, {1, 0.3}}});
    const TermEval eval = inverse_data_loss(params, arch, data, true);
    const double h = 1e-6;
    for (size_t k = 0; k < params.size(); ++k) {
        const double saved = params.values[k];
        params.values[k] = saved + h;
        const double up = inverse_data_loss(params, arch, data, false).value;
        params.values[k] = saved - h;
        const double dn = inverse_data_loss(params, arch, data, false).value;
        params.values[k] = saved;
        CHECK(rel_err(eval.grad[k], (up - dn) / (2.0 * h)) <= 1e-6);
    }
}

TEST_CASE("benchmark names and kernels round-trip") {
    for (Benchmark b : {Benchmark::cylinder_forward, Benchmark::cylinder_inverse, Benchmark::burgers})
        CHECK(benchmark_from_name(benchmark_name(b)) == b);
    CHECK_THROWS_AS(benchmark_from_name("poisson"), std::invalid_argument);
    CHECK(benchmark_kernel(Benchmark::burgers) == ResidualKernel::burgers);
    CHECK(benchmark_kernel(Benchmark::cylinder_forward) == ResidualKernel::navier_stokes);
    CHECK(benchmark_kernel(Benchmark::cylinder_inverse) == ResidualKernel::navier_stokes);
    LossSpec negative{Benchmark::burgers, Phase::complete, -1.0};
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}
