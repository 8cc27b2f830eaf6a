#pragma once

#include "porous/conformal.hpp"
#include "porous/fields.hpp"
#include "porous/geometry.hpp"

#include <vector>

namespace porous {

enum class CutoffKind { square_case, segment_case };

// Per-cell cutoff: 1 on the scaled inclusion boundary, 0 on and outside the
// cell boundary, with analytic gradient. The profile is the 7th-order
// polynomial smoothstep, so lateral profiles are exact polynomials in the
// mapped band coordinate.
class CutoffFamily {
public:
    CutoffKind kind = CutoffKind::segment_case;
    double eps = 0.0, dist = 0.0;
    double gamma = 1.0;  // segment case, infinity() for flat-sided shapes
    double rho2 = 0.0;   // effective envelope constant of the lateral gap

    double value(Vec2 local) const;   // local = x - cell center
    Vec2 gradient(Vec2 local) const;

    double cell_half_width() const { return 0.5 * (eps + dist); }
    double cell_half_height() const {
        return kind == CutoffKind::square_case ? 0.5 * (eps + dist) : eps;
    }
    // support of the cutoff (inside the cell)
    double support_half_width() const {
        return kind == CutoffKind::square_case ? eps : cell_half_width();
    }
    double support_half_height() const {
        return kind == CutoffKind::square_case ? eps : eps;
    }

    // lateral gap profile d(x2) between the scaled inclusion and the cell wall
    double lateral_gap(double x2) const;
    double lateral_gap_deriv(double x2) const;
};

CutoffFamily build_cutoff(CutoffKind kind, double eps, double dist,
                          const InclusionShape& shape);

struct CutoffNorms {
    double l2 = 0.0;       // ||phi||_L2 over the cell
    double grad_l2 = 0.0;  // ||grad phi||_L2 over the cell
};

CutoffNorms cutoff_norms(const CutoffFamily& cf);

// Corrected velocity field v[f] built from per-cell cutoffs and the scaled
// single-obstacle exterior law. Immutable after construction; evaluations
// are pure.
class CorrectionField {
public:
    CorrectionField(PorousLayout layout, ConformalMap map, CutoffFamily cutoff,
                    SourceVorticity source, int src_radial = 12, int src_angular = 32);

    const PorousLayout& layout() const { return layout_; }
    const CutoffFamily& cutoff() const { return cutoff_; }
    const SourceVorticity& source() const { return source_; }

    // Index of the cell whose cutoff support contains x, or -1.
    int locate_cell(Vec2 x) const;

    // v[f](x); equals the whole-plane Biot-Savart velocity outside every
    // cutoff support. Throws if x lies inside an inclusion.
    Vec2 velocity(Vec2 x) const;

    struct WTerms {
        double w1 = 0.0, w2 = 0.0;
        Vec2 w3{}, w4{};
    };
    // The four decomposition integrals of cell (i, j), 0-based. Always
    // evaluates the full quadrature, including the terms that vanish
    // identically for the disk.
    WTerms w_terms(int i, int j, Vec2 x) const;

    // K[f] - v[f] at x inside cell c, assembled from the w-terms.
    Vec2 defect(int cell, Vec2 x) const;

    // || K[f] - v[f] ||_L2 over the fluid domain. The integrand vanishes
    // outside the cutoff supports, so only cells are integrated; cells are
    // independent and may be integrated by several workers.
    double discrepancy_l2(int threads = 1) const;

    int n_cells() const { return static_cast<int>(layout_.centers.size()); }

private:
    struct CellNode {
        Complex t;       // scaled-map image of the source node
        Complex t_star;  // its reflection
    };

    WTerms w_terms_cell(int cell, Vec2 x, bool skip_vanishing) const;
    double cell_l2sq(int cell) const;
    double plane_stream(Vec2 x) const;
    Vec2 plane_velocity_nodes(Vec2 x) const;

    PorousLayout layout_;
    ConformalMap map_;
    CutoffFamily cutoff_;
    SourceVorticity source_;
    std::vector<SourceVorticity::Node> nodes_;
    std::vector<std::vector<CellNode>> cell_nodes_;
    double mass_ = 0.0;
};

} // namespace porous
