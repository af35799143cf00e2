#ifndef FEPINN_SAMPLING_HPP
#define FEPINN_SAMPLING_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fepinn/network.hpp"
#include "fepinn/pde.hpp"

namespace fepinn {

enum class Segment { inlet, outlet, wall, cylinder, initial, interior };

const char* segment_name(Segment s);
Segment segment_from_name(const std::string& name);

struct Cylinder {
    double cx = 0.0, cy = 0.0, r = 0.0;

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return dx * dx + dy * dy <= r * r;
    }
};

/// Axis-aligned 2D sampling domain, optionally with a circular hole.
/// For the channel the axes are (x, y); for the space-time rectangle (x, t).
struct Geometry {
    enum class Kind { channel_with_cylinder, rectangle };

    Kind kind = Kind::rectangle;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::optional<Cylinder> cylinder;

    void validate() const;

    /// [0,1] x [0,0.4] channel with the cylinder at (0.2, 0.2), radius 0.05.
    static Geometry channel();
    /// [0,4] x [0,5] space-time rectangle.
    static Geometry burgers_rectangle();
};

/// Points with optional per-point segment tags and supervision labels.
/// A label is (output component index, target value).
struct PointSet {
    std::vector<std::array<double, 2>> points;
    std::vector<Segment> segments;
    std::vector<std::vector<std::pair<int, double>>> labels;

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    void append(const PointSet& other);
    PointSet filter(Segment s) const;
    PointSet subset(const std::vector<size_t>& indices) const;
};

/// Latin hypercube sample of the interior: one point per stratum and
/// dimension, points inside the cylinder re-drawn within their cell (a
/// stratum that cannot be satisfied is skipped with a warning). A
/// `densify` fraction of the points is instead drawn area-uniformly from
/// the annulus (r, 2r] around the cylinder.
PointSet lhs_sample(const Geometry& geom, int n, uint64_t seed, double densify = 0.0);

/// Uniform samples on the requested boundary segments with their boundary
/// labels attached. Segments are processed in enum order regardless of the
/// map's insertion order.
PointSet sample_boundary(const Geometry& geom, const std::map<Segment, int>& counts,
                         uint64_t seed);

enum class ResidualKernel { navier_stokes, burgers };

/// Derivative order the kernel consumes (1 for the mixed form, 2 for Burgers).
int kernel_order(ResidualKernel k);
int kernel_outputs(ResidualKernel k);

/// Leading upper-triangle Hessian components the kernel reads; the forward
/// pass need not carry the rest (1 for Burgers, which only reads d2u/dx2).
int kernel_hessian_comps(ResidualKernel k);

/// Squared residual norm of one network at one point, plain doubles.
double residual_score(ResidualKernel kernel, const Parameters& params, const Architecture& arch,
                      std::span<const double> point, const FluidConstants& consts);

/// Candidate indices one Xavier-initialized network keeps: the top
/// (1 - quantile) fraction by squared residual norm, ties broken by index.
std::vector<size_t> ensemble_select_single(const PointSet& candidates, const Architecture& arch,
                                           const FluidConstants& consts, ResidualKernel kernel,
                                           uint64_t seed, double quantile);

/// Union of ensemble_select_single over all seeds, kept in ascending
/// candidate order. Warns (does not fail) when the ensemble size is outside
/// the recommended 5..10 range.
PointSet residual_ensemble_select(const PointSet& candidates, const Architecture& arch,
                                  const FluidConstants& consts, ResidualKernel kernel,
                                  const std::vector<uint64_t>& seeds, double quantile);

/// Writes points as CSV: coordinate columns, segment, then one label column
/// per named output component (blank when a point carries no such label).
void export_points_csv(std::ostream& os, const PointSet& set,
                       const std::array<std::string, 2>& axis_names,
                       const std::vector<std::string>& label_names);

/// Reads the export_points_csv format back. The i-th label column maps to
/// output component i; blank cells carry no label.
PointSet load_points_csv(std::istream& is);

} // namespace fepinn

#endif
