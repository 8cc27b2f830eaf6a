#pragma once

#include "porous/fields.hpp"
#include "porous/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace porous {

// Vorticity carriers: Lamb-Oseen regularized point vortices.
struct VortexState {
    std::vector<Blob> blobs;
    double time = 0.0;
    long push_events = 0; // wall-contact projections so far
};

struct PanelOptions {
    int panels_per_obstacle = 64;
    // Geometric clustering of panel endpoints toward the lateral gap points
    // (boundary parameters 0 and 1/2); 0 keeps a uniform split.
    double min_param_spacing = 0.0;
};

// Constant-strength vortex panels on every inclusion boundary plus one
// compensating point source per obstacle. Per-obstacle net sheet circulation
// is eliminated exactly, so the solved field carries zero circulation around
// each inclusion by construction.
class PanelSystem {
public:
    PanelSystem() = default; // no obstacles
    PanelSystem(const PorousLayout& layout, const PanelOptions& opt);

    bool empty() const { return panels_.empty(); }
    int n_obstacles() const { return static_cast<int>(obstacle_center_.size()); }
    int n_panels() const { return static_cast<int>(panels_.size()); }
    const PorousLayout& layout() const { return layout_; }

    // Solve sheet strengths against a background velocity field. Relative
    // residual of the collocation equations is returned.
    double solve(const std::function<Vec2(Vec2)>& background) const;
    double last_residual() const { return residual_; }

    // Velocity induced by the currently solved strengths.
    Vec2 induced_velocity(Vec2 x) const;
    // Sum of solved sheet strengths around one obstacle (zero by construction).
    double obstacle_circulation(int k) const;
    const std::vector<double>& sheet_strengths() const { return sheet_; }
    Vec2 collocation_point(int j) const { return panels_[j].colloc; }
    Vec2 collocation_normal(int j) const { return panels_[j].normal; }

    // Re-solve only when the blob configuration changed.
    void ensure_solved(const VortexState& state) const;

    double min_panel_length() const { return min_len_; }

private:
    struct Panel {
        Vec2 a, b, mid;     // chord ends and chord midpoint
        Vec2 colloc;        // collocation point on the true boundary
        Vec2 normal;        // outward boundary normal at colloc
        Complex dir;        // unit chord tangent as a complex number
        double len = 0.0;
        int obstacle = 0;
    };

    std::vector<Panel> panels_;
    std::vector<Vec2> obstacle_center_;
    std::vector<std::pair<int, int>> obstacle_range_; // [first, last) panel index
    PorousLayout layout_;
    double min_len_ = 0.0;

    Eigen::MatrixXd A_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;

    mutable std::vector<double> sheet_;   // per panel
    mutable std::vector<double> source_;  // per obstacle
    mutable double residual_ = 0.0;
    mutable std::vector<Blob> solved_for_;
    mutable bool solved_ = false;
};

PanelSystem assemble_panels(const PorousLayout& layout, int panels_per_obstacle);
PanelSystem assemble_panels(const PorousLayout& layout, const PanelOptions& opt);

// Velocity of blobs plus boundary panels at x; panels are re-solved for the
// given state when needed.
Vec2 velocity_total(const VortexState& state, const PanelSystem& panels, Vec2 x);

// Blob-advection velocity (self-induction excluded) at blob i.
Vec2 blob_velocity(const VortexState& state, const PanelSystem& panels, size_t i);

// One classical RK4 step with a per-stage panel re-solve. Blobs that end up
// inside an inclusion are pushed radially to a delta/2 exterior offset and
// counted in push_events. Throws when dt violates the step-size guard.
VortexState step_rk4(const VortexState& state, const PanelSystem& panels, double dt);

// Flux of the total field through the oriented gate a -> b (normal is the
// left normal, so a horizontal gate counts upward flow as positive).
double flux_gate(const VortexState& state, const PanelSystem& panels, Vec2 a, Vec2 b,
                 int n_quad = 128);

// Circulation of the total field along a closed polyline.
double circulation_loop(const VortexState& state, const PanelSystem& panels,
                        const std::vector<Vec2>& loop, int n_quad = 128);

} // namespace porous
