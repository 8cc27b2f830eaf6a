#pragma once

#include "porous/conformal.hpp"
#include "porous/vec2.hpp"

#include <vector>

namespace porous {

enum class SourceKind { circular_patch, gaussian_bump, blob_sum };

struct Blob {
    Vec2 pos;
    double gamma = 0.0; // circulation
    double delta = 0.0; // core radius
};

// Compactly supported bounded vorticity density.
class SourceVorticity {
public:
    static SourceVorticity circular_patch(Vec2 center, double radius, double amplitude);
    static SourceVorticity gaussian_bump(Vec2 center, double width, double amplitude,
                                         double trunc_radius);
    static SourceVorticity blob_sum(std::vector<Blob> blobs);

    SourceKind kind = SourceKind::circular_patch;

    double density(Vec2 y) const;
    double total_mass() const;
    double sup_norm() const;
    double l1_norm() const;

    Vec2 support_center() const { return support_center_; }
    double support_radius() const { return support_radius_; }

    // Quadrature of integrals against the density: node weights carry w*f(y).
    struct Node {
        Vec2 pos;
        double wf;
    };
    std::vector<Node> quadrature_nodes(int n_radial = 12, int n_angular = 32) const;

    // Intervals where the ray x + r*(cos a, sin a), r > 0, meets the support.
    void ray_support(Vec2 x, double angle, std::vector<std::pair<double, double>>& out) const;

    // Closed-form stream function and velocity, available for circular_patch.
    bool has_closed_form() const { return kind == SourceKind::circular_patch; }
    Vec2 closed_form_velocity(Vec2 x) const;
    double closed_form_stream(Vec2 x) const;

    Vec2 patch_center{};
    double patch_radius = 0.0, amplitude = 0.0;
    double width = 0.0, trunc_radius = 0.0;
    std::vector<Blob> blobs;

private:
    Vec2 support_center_{};
    double support_radius_ = 0.0;
};

// Whole-plane Biot-Savart velocity of f at x. Closed form for the circular
// patch, singularity-split polar quadrature otherwise.
Vec2 biot_savart_plane(const SourceVorticity& f, Vec2 x, double rel_tol = 1e-6);

// Quadrature path regardless of available closed forms (oracle hook).
Vec2 biot_savart_plane_quadrature(const SourceVorticity& f, Vec2 x, double rel_tol = 1e-6);

// Velocity in the exterior of the template obstacle: curl = f, tangent to
// the boundary, zero circulation around the obstacle, decaying at infinity.
// The stream gradient goes through the map derivative, never through finite
// differences.
Vec2 biot_savart_exterior(const ConformalMap& map, const SourceVorticity& f, Vec2 x);

struct SupBoundReport {
    double empirical_sup = 0.0;
    double norm_product = 0.0; // ||f||_1^(1/2) ||f||_inf^(1/2)
    double ratio = 0.0;
};

// Empirical constant of ||K[f]||_inf <= C ||f||_1^(1/2) ||f||_inf^(1/2).
SupBoundReport check_sup_bound(const SourceVorticity& f);

} // namespace porous
