#include "fepinn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "fepinn/util.hpp"

namespace fepinn {

const char* segment_name(Segment s) {
    switch (s) {
        case Segment::inlet: return "inlet";
        case Segment::outlet: return "outlet";
        case Segment::wall: return "wall";
        case Segment::cylinder: return "cylinder";
        case Segment::initial: return "initial";
        case Segment::interior: return "interior";
    }
    throw std::invalid_argument("unknown segment");
}

Segment segment_from_name(const std::string& name) {
    for (Segment s : {Segment::inlet, Segment::outlet, Segment::wall, Segment::cylinder,
                      Segment::initial, Segment::interior})
        if (name == segment_name(s)) return s;
    throw std::invalid_argument("unknown segment: " + name);
}

void Geometry::validate() const {
    if (!(lo[0] < hi[0]) || !(lo[1] < hi[1]))
        throw std::invalid_argument("geometry bounds are empty");
    if (cylinder) {
        if (!(cylinder->r > 0.0))
            throw std::invalid_argument("cylinder radius must be positive");
        if (cylinder->cx - cylinder->r <= lo[0] || cylinder->cx + cylinder->r >= hi[0] ||
            cylinder->cy - cylinder->r <= lo[1] || cylinder->cy + cylinder->r >= hi[1])
            throw std::invalid_argument("cylinder must lie strictly inside the bounds");
    }
    if (kind == Kind::channel_with_cylinder && !cylinder)
        throw std::invalid_argument("channel geometry requires a cylinder");
}

Geometry Geometry::channel() {
    Geometry g;
    g.kind = Kind::channel_with_cylinder;
    g.lo = {0.0, 0.0};
    g.hi = {1.0, 0.4};
    g.cylinder = Cylinder{0.2, 0.2, 0.05};
    g.validate();
    return g;
}

Geometry Geometry::burgers_rectangle() {
    Geometry g;
    g.kind = Kind::rectangle;
    g.lo = {0.0, 0.0};
    g.hi = {4.0, 5.0};
    g.validate();
    return g;
}

void PointSet::append(const PointSet& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

PointSet PointSet::filter(Segment s) const {
    PointSet out;
    for (size_t i = 0; i < points.size(); ++i) {
        if (i < segments.size() && segments[i] == s) {
            out.points.push_back(points[i]);
            out.segments.push_back(segments[i]);
            out.labels.push_back(i < labels.size() ? labels[i] : std::vector<std::pair<int, double>>{});
        }
    }
    return out;
}

PointSet PointSet::subset(const std::vector<size_t>& indices) const {
    PointSet out;
    for (size_t i : indices) {
        if (i >= points.size()) throw std::out_of_range("point subset index out of range");
        out.points.push_back(points[i]);
        if (i < segments.size()) out.segments.push_back(segments[i]);
        if (i < labels.size()) out.labels.push_back(labels[i]);
    }
    return out;
}

namespace {

// A disc covers a rectangle iff it contains all four corners.
bool disc_covers_rect(const Cylinder& c, double x0, double y0, double x1, double y1) {
    return c.contains(x0, y0) && c.contains(x0, y1) && c.contains(x1, y0) && c.contains(x1, y1);
}

} // namespace

PointSet lhs_sample(const Geometry& geom, int n, uint64_t seed, double densify) {
    geom.validate();
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    if (densify < 0.0 || densify >= 1.0)
        throw std::invalid_argument("densify fraction must be in [0, 1)");
    if (densify > 0.0 && !geom.cylinder)
        throw std::invalid_argument("densify requires a cylinder to densify around");

    const int n_dense = static_cast<int>(std::llround(densify * n));
    const int n_lhs = n - n_dense;
    const double wx = geom.hi[0] - geom.lo[0];
    const double wy = geom.hi[1] - geom.lo[1];

    if (geom.cylinder && n_lhs > 0) {
        // A stratum row spans the full extent of the other dimension; if the
        // cylinder covers one, no point can be placed in that stratum at all.
        const double sx = wx / n_lhs, sy = wy / n_lhs;
        for (int k = 0; k < n_lhs; ++k) {
            if (disc_covers_rect(*geom.cylinder, geom.lo[0] + k * sx, geom.lo[1],
                                 geom.lo[0] + (k + 1) * sx, geom.hi[1]) ||
                disc_covers_rect(*geom.cylinder, geom.lo[0], geom.lo[1] + k * sy,
                                 geom.hi[0], geom.lo[1] + (k + 1) * sy))
                throw std::runtime_error(
                    "latin hypercube stratification infeasible: hole covers a full stratum row");
        }
    }

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> perm_x(static_cast<size_t>(n_lhs)), perm_y(static_cast<size_t>(n_lhs));
    std::iota(perm_x.begin(), perm_x.end(), 0);
    std::iota(perm_y.begin(), perm_y.end(), 0);
    std::shuffle(perm_x.begin(), perm_x.end(), gen);
    std::shuffle(perm_y.begin(), perm_y.end(), gen);

    PointSet out;
    out.points.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n_lhs; ++k) {
        const double cell_x = geom.lo[0] + perm_x[static_cast<size_t>(k)] * wx / n_lhs;
        const double cell_y = geom.lo[1] + perm_y[static_cast<size_t>(k)] * wy / n_lhs;
        bool placed = false;
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double x = cell_x + unit(gen) * wx / n_lhs;
            const double y = cell_y + unit(gen) * wy / n_lhs;
            if (geom.cylinder && geom.cylinder->contains(x, y)) continue;
            out.points.push_back({x, y});
            placed = true;
            break;
        }
        if (!placed)
            std::cerr << "warning: stratum (" << perm_x[static_cast<size_t>(k)] << ", "
                      << perm_y[static_cast<size_t>(k)]
                      << ") lies inside the hole; skipping its point\n";
    }

    if (n_dense > 0) {
        const Cylinder& c = *geom.cylinder;
        const double r2_in = c.r * c.r;
        const double r2_out = 4.0 * c.r * c.r;
        for (int k = 0; k < n_dense; ++k) {
            bool placed = false;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                const double theta = unit(gen) * 2.0 * std::numbers::pi;
                const double rad = std::sqrt(r2_in + unit(gen) * (r2_out - r2_in));
                const double x = c.cx + rad * std::cos(theta);
                const double y = c.cy + rad * std::sin(theta);
                if (x <= geom.lo[0] || x >= geom.hi[0] || y <= geom.lo[1] || y >= geom.hi[1])
                    continue;
                if (c.contains(x, y)) continue;
                out.points.push_back({x, y});
                placed = true;
                break;
            }
            if (!placed)
                throw std::runtime_error("failed to place a densified point near the cylinder");
        }
    }

    out.segments.assign(out.points.size(), Segment::interior);
    out.labels.assign(out.points.size(), {});
    return out;
}

PointSet sample_boundary(const Geometry& geom, const std::map<Segment, int>& counts,
                         uint64_t seed) {
    geom.validate();
    const bool channel = geom.kind == Geometry::Kind::channel_with_cylinder;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointSet out;

    for (const auto& [seg, count] : counts) {
        if (count < 0) throw std::invalid_argument("boundary point count must be non-negative");
        if (count == 0) continue;
        for (int k = 0; k < count; ++k) {
            std::array<double, 2> pt{};
            std::vector<std::pair<int, double>> label;
            switch (seg) {
                case Segment::inlet:
                    if (channel) {
                        pt = {geom.lo[0], geom.lo[1] + unit(gen) * (geom.hi[1] - geom.lo[1])};
                        label = {{0, inlet_velocity(pt[1])}, {1, 0.0}};
                    } else {
                        pt = {geom.lo[0], geom.lo[1] + unit(gen) * (geom.hi[1] - geom.lo[1])};
                        label = {{0, 0.0}};
                    }
                    break;
                case Segment::outlet:
                    if (channel) {
                        pt = {geom.hi[0], geom.lo[1] + unit(gen) * (geom.hi[1] - geom.lo[1])};
                        label = {{2, 0.0}};
                    } else {
                        pt = {geom.hi[0], geom.lo[1] + unit(gen) * (geom.hi[1] - geom.lo[1])};
                        label = {{0, 0.0}};
                    }
                    break;
                case Segment::wall: {
                    if (!channel)
                        throw std::invalid_argument("wall segment is not defined for this geometry");
                    const bool top = unit(gen) >= 0.5;
                    pt = {geom.lo[0] + unit(gen) * (geom.hi[0] - geom.lo[0]),
                          top ? geom.hi[1] : geom.lo[1]};
                    label = {{0, 0.0}, {1, 0.0}};
                    break;
                }
                case Segment::cylinder: {
                    if (!channel || !geom.cylinder)
                        throw std::invalid_argument("cylinder segment is not defined for this geometry");
                    const double theta = unit(gen) * 2.0 * std::numbers::pi;
                    pt = {geom.cylinder->cx + geom.cylinder->r * std::cos(theta),
                          geom.cylinder->cy + geom.cylinder->r * std::sin(theta)};
                    label = {{0, 0.0}, {1, 0.0}};
                    break;
                }
                case Segment::initial: {
                    if (channel)
                        throw std::invalid_argument("initial segment is not defined for this geometry");
                    const double x = geom.lo[0] + unit(gen) * (geom.hi[0] - geom.lo[0]);
                    pt = {x, 0.0};
                    label = {{0, burgers_initial(x)}};
                    break;
                }
                case Segment::interior:
                    throw std::invalid_argument("interior is not a boundary segment");
            }
            out.points.push_back(pt);
            out.segments.push_back(seg);
            out.labels.push_back(std::move(label));
        }
    }
    return out;
}

int kernel_order(ResidualKernel k) {
    return k == ResidualKernel::burgers ? 2 : 1;
}

int kernel_outputs(ResidualKernel k) {
    return k == ResidualKernel::burgers ? 1 : 6;
}

int kernel_hessian_comps(ResidualKernel k) {
    return k == ResidualKernel::burgers ? 1 : 0;
}

double residual_score(ResidualKernel kernel, const Parameters& params, const Architecture& arch,
                      std::span<const double> point, const FluidConstants& consts) {
    const auto jets = forward_jets_plain(params, arch, point, kernel_order(kernel),
                                         kernel_hessian_comps(kernel));
    if (static_cast<int>(jets.size()) != kernel_outputs(kernel))
        throw std::invalid_argument("network output count does not match the residual kernel");
    if (kernel == ResidualKernel::burgers)
        return burgers_residual(jets[0], consts).norm_sq();
    return ns_residuals<double>(jets, consts).norm_sq();
}

std::vector<size_t> ensemble_select_single(const PointSet& candidates, const Architecture& arch,
                                           const FluidConstants& consts, ResidualKernel kernel,
                                           uint64_t seed, double quantile) {
    if (candidates.empty()) throw std::invalid_argument("candidate point set is empty");
    if (quantile < 0.0 || quantile > 1.0)
        throw std::invalid_argument("quantile must be in [0, 1]");
    const size_t m = candidates.size();
    const Parameters params = init_xavier(arch, seed);
    std::vector<double> score(m);
    for (size_t i = 0; i < m; ++i)
        score[i] = residual_score(kernel, params, arch, candidates.points[i], consts);

    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    size_t keep = static_cast<size_t>(std::llround((1.0 - quantile) * static_cast<double>(m)));
    keep = std::clamp<size_t>(keep, 1, m);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

PointSet residual_ensemble_select(const PointSet& candidates, const Architecture& arch,
                                  const FluidConstants& consts, ResidualKernel kernel,
                                  const std::vector<uint64_t>& seeds, double quantile) {
    if (seeds.empty()) throw std::invalid_argument("ensemble needs at least one seed");
    if (seeds.size() < 5 || seeds.size() > 10)
        std::cerr << "warning: ensemble size " << seeds.size()
                  << " is outside the recommended 5..10 range\n";
    std::vector<char> chosen(candidates.size(), 0);
    for (uint64_t s : seeds)
        for (size_t i : ensemble_select_single(candidates, arch, consts, kernel, s, quantile))
            chosen[i] = 1;
    std::vector<size_t> indices;
    for (size_t i = 0; i < chosen.size(); ++i)
        if (chosen[i]) indices.push_back(i);
    return candidates.subset(indices);
}

PointSet load_points_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("point CSV is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        size_t start = 0;
        while (true) {
            const size_t pos = s.find(',', start);
            if (pos == std::string::npos) {
                cells.push_back(s.substr(start));
                break;
            }
            cells.push_back(s.substr(start, pos - start));
            start = pos + 1;
        }
        return cells;
    };

    const auto header = split(line);
    if (header.size() < 3 || header[2] != "segment")
        throw std::runtime_error("point CSV header is not in the expected format");

    PointSet out;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw std::runtime_error("point CSV row " + std::to_string(lineno) +
                                     " has the wrong number of cells");
        out.points.push_back({std::stod(cells[0]), std::stod(cells[1])});
        out.segments.push_back(segment_from_name(cells[2]));
        std::vector<std::pair<int, double>> labels;
        for (size_t c = 3; c < cells.size(); ++c)
            if (!cells[c].empty())
                labels.emplace_back(static_cast<int>(c - 3), std::stod(cells[c]));
        out.labels.push_back(std::move(labels));
    }
    return out;
}

void export_points_csv(std::ostream& os, const PointSet& set,
                       const std::array<std::string, 2>& axis_names,
                       const std::vector<std::string>& label_names) {
    os << axis_names[0] << ',' << axis_names[1] << ",segment";
    for (const auto& name : label_names) os << ",label_" << name;
    os << '\n';
    for (size_t i = 0; i < set.size(); ++i) {
        os << fmt_double(set.points[i][0]) << ',' << fmt_double(set.points[i][1]) << ','
           << (i < set.segments.size() ? segment_name(set.segments[i]) : "");
        for (size_t c = 0; c < label_names.size(); ++c) {
            os << ',';
            if (i < set.labels.size())
                for (const auto& [comp, value] : set.labels[i])
                    if (comp == static_cast<int>(c)) os << fmt_double(value);
        }
        os << '\n';
    }
}

} // namespace fepinn
