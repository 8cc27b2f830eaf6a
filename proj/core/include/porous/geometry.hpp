#pragma once

#include "porous/vec2.hpp"

#include <optional>
#include <vector>

namespace porous {

enum class ShapeKind { disk, ellipse, superdisk, stadium };

struct ShapeParams {
    double ellipse_b = 0.5;   // minor semi-axis, major is fixed to 1
    double gamma = 2.0;       // superdisk tangency exponent
    double rho0 = 0.5;        // stadium flat-segment half height
};

// Inclusion template K: a closed C^1 curve inside [-1,1]^2 with the lateral
// extreme points (+-1, 0) on the boundary. All shapes here are symmetric in
// both axes and horizontally convex, so a slice half-width function fully
// describes membership.
class InclusionShape {
public:
    ShapeKind kind = ShapeKind::disk;
    double gamma = 1.0;                 // tangency exponent; infinity() for flat sides
    double rho0 = 0.0, rho1 = 0.0, rho2 = 0.0; // fitted flatness envelope constants

    // Boundary parametrization, s in [0,1), counterclockwise, s=0 at (1,0).
    Vec2 boundary(double s) const;
    Vec2 boundary_tangent(double s) const; // unit tangent

    bool inside(Vec2 p) const;             // closed template inclusion
    double half_width(double y) const;     // horizontal half width of slice at height y
    double y_extent() const;               // max |y| over the template
    double max_radius() const;             // max |p| over the boundary

    // Boundary point in polar direction phi (all templates are star shaped
    // about the origin).
    Vec2 point_at_angle(double phi) const;

private:
    friend InclusionShape make_shape(ShapeKind, const ShapeParams&);
    double b_ = 1.0;      // ellipse minor axis
    double q_ = 2.0;      // superdisk exponent gamma + 1
    double flat_ = 0.5;   // stadium flat half height
    double seg_len_[4] = {0, 0, 0, 0}; // stadium piece parameter spans
};

InclusionShape make_shape(ShapeKind kind, const ShapeParams& params = {});

enum class LayoutKind { segment, square, thin_layer };

// Family of scaled translates z_{i,j} + (eps/2) K covering the unit segment,
// square, or a thin layer of rows.
struct PorousLayout {
    InclusionShape shape;
    double eps = 0.0;
    double dist = 0.0;
    LayoutKind kind = LayoutKind::segment;
    double mu = 0.0;       // thin layer row-count exponent
    int n_cols = 0;
    int n_rows = 0;
    std::vector<Vec2> centers;

    double half_scale() const { return 0.5 * eps; }
    double col_pitch() const { return eps + dist; }
    double row_pitch() const { return kind == LayoutKind::thin_layer ? 2.0 * eps : eps + dist; }

    bool in_fluid(Vec2 x) const;
    // Index of the inclusion containing x, or nullopt.
    std::optional<int> inclusion_containing(Vec2 x) const;
    // Lower bound for the distance from x to the porous region.
    double clearance(Vec2 x) const;
};

PorousLayout make_layout(const InclusionShape& shape, double eps, double dist,
                         LayoutKind kind, double mu = 0.0);

// Fluid area inside the strip connecting adjacent inclusions of a segment
// row at strip half-height parameter s (physical half height eps*s/2),
// summed over the N-1 neighbor pairs.
double gap_area(const InclusionShape& shape, double eps, double dist, double s);

// Strip parameter minimizing the gap-area bound: (d/(gamma*eps))^(1/(gamma+1))
// clamped to (0, rho0]; rho0 itself for flat-sided shapes.
double optimal_strip(double gamma, double eps, double dist, double rho0);
double optimal_strip(const InclusionShape& shape, double eps, double dist);

} // namespace porous
