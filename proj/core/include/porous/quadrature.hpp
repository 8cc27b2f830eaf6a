#pragma once

#include "porous/vec2.hpp"

#include <functional>
#include <span>
#include <vector>

namespace porous {

// Gauss-Legendre rule on [-1,1]. Nodes/weights are computed once per order
// and cached; safe to call from several threads.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_rule(int order);

// Integrate f over [a,b] with a single Gauss panel of the given order.
double integrate_gauss(const std::function<double(double)>& f, double a, double b,
                       int order = 16);

// Adaptive 1D quadrature by panel bisection. Per-panel error is estimated
// from the difference between one Gauss panel and its two halves. `splits`
// lists interior abscissae where the integrand is known to be non-smooth.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_floor = 0.0,
                          std::span<const double> splits = {});

// Same, for vector-valued integrands (component-wise error control).
Vec2 integrate_adaptive_vec(const std::function<Vec2(double)>& f, double a, double b,
                            double rel_tol, double abs_floor = 0.0,
                            std::span<const double> splits = {});

// Adaptive tensor-product quadrature over an axis-aligned rectangle with
// recursive quad subdivision.
double integrate_adaptive_2d(const std::function<double(double, double)>& f,
                             double x0, double x1, double y0, double y1,
                             double rel_tol, double abs_floor = 0.0);

// Nodes of a quadrature over a disk: radial Gauss panels times a uniform
// (trapezoidal, spectrally accurate) angular grid. Weight includes the
// polar Jacobian r.
struct DiskNode {
    Vec2 pos;
    double w;
};
std::vector<DiskNode> disk_rule(Vec2 center, double radius, int n_radial, int n_angular);

} // namespace porous
