#pragma once

#include "porous/geometry.hpp"
#include "porous/vec2.hpp"

#include <vector>

namespace porous {

enum class MapMode { identity, ellipse_joukowski, laurent_fit };

// Biholomorphism T from the exterior of the inclusion template to the
// exterior of the unit disk, normalized so that T(z) = beta*z + h(z) with
// beta real positive and h bounded.
class ConformalMap {
public:
    MapMode mode = MapMode::identity;
    double beta = 1.0;
    double h_bound = 0.0;
    double fit_residual = 0.0; // boundary misfit of a Laurent fit
    int n_modes = 0;

    Complex forward(Complex z) const;
    Complex inverse(Complex w) const;
    Complex derivative(Complex z) const; // T'(z)

    Vec2 forward(Vec2 z) const { return to_vec(forward(to_complex(z))); }
    Vec2 inverse_pt(Vec2 w) const { return to_vec(inverse(to_complex(w))); }

    // S(w) = w/beta + c0 + sum_k c_k w^-k and its w-derivative.
    Complex series(Complex w) const;
    Complex series_derivative(Complex w) const;

private:
    friend ConformalMap build_map(const InclusionShape&, int);
    friend struct LaurentFitter;
    double ellipse_b_ = 1.0;
    double ellipse_c2_ = 0.0;        // squared focal distance 1 - b^2
    std::vector<Complex> coef_;      // [c0, c1, ..., cn]
};

// Exterior map for a template shape. Identity for the disk, closed-form
// Joukowski for the ellipse, truncated Laurent boundary fit otherwise.
// Throws if the fit residual exceeds 1e-6 in template units.
ConformalMap build_map(const InclusionShape& shape, int n_modes = 64);

// Reflection across the unit circle, y / |y|^2.
Vec2 reflect(Vec2 y);

// Exterior Green function of the template obstacle.
double green(const ConformalMap& map, Vec2 x, Vec2 y);

// Empirical constants of the scaled-map Lipschitz and annulus-inclusion
// estimates at inclusion scale eps.
struct MapEstimateReport {
    double eps = 0.0;
    double c_lip_forward = 0.0;  // Lip(T_eps) <= C/eps
    double c_lip_inverse = 0.0;  // Lip(T_eps^-1) <= C*eps
    double c1 = 0.0, c2 = 0.0;   // image annulus of circles around the inclusion
    double c3 = 0.0, c4 = 0.0;   // preimage annulus of circles around the disk
};

MapEstimateReport verify_map_estimates(const ConformalMap& map, double eps);

} // namespace porous
