#include "porous/geometry.hpp"

#include "porous/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace porous {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_unit(double s) {
    s -= std::floor(s);
    return s;
}

// floor with a guard against 8.999999999 style representations of integers
int robust_floor(double x) {
    return static_cast<int>(std::floor(x * (1.0 + 1e-13) + 1e-13));
}

} // namespace

Vec2 InclusionShape::boundary(double s) const {
    s = wrap_unit(s);
    switch (kind) {
    case ShapeKind::disk: {
        double t = 2.0 * pi * s;
        return {std::cos(t), std::sin(t)};
    }
    case ShapeKind::ellipse: {
        double t = 2.0 * pi * s;
        return {std::cos(t), b_ * std::sin(t)};
    }
    case ShapeKind::superdisk: {
        double t = 2.0 * pi * s;
        double c = std::cos(t), sn = std::sin(t);
        double u = std::pow(std::abs(c), q_) + std::pow(std::abs(sn), q_);
        double r = std::pow(u, -1.0 / q_);
        return {r * c, r * sn};
    }
    case ShapeKind::stadium: {
        // pieces: right vertical up, top cap, left vertical down, bottom cap,
        // right vertical from (1,-flat) back to (1,0)
        double a0 = seg_len_[0], a1 = seg_len_[1], a2 = seg_len_[2], a3 = seg_len_[3];
        if (s < a0) { // (1,0) -> (1,flat)
            return {1.0, flat_ * (s / a0)};
        } else if (s < a1) { // top cap, ellipse arc from (1,flat) to (-1,flat)
            double t = pi * (s - a0) / (a1 - a0);
            return {std::cos(t), flat_ + (1.0 - flat_) * std::sin(t)};
        } else if (s < a2) { // (-1,flat) -> (-1,-flat)
            double t = (s - a1) / (a2 - a1);
            return {-1.0, flat_ - 2.0 * flat_ * t};
        } else if (s < a3) { // bottom cap from (-1,-flat) to (1,-flat)
            double t = pi * (s - a2) / (a3 - a2);
            return {-std::cos(t), -flat_ - (1.0 - flat_) * std::sin(t)};
        }
        return {1.0, -flat_ * (1.0 - s) / a0};
    }
    }
    return {};
}

Vec2 InclusionShape::boundary_tangent(double s) const {
    s = wrap_unit(s);
    switch (kind) {
    case ShapeKind::disk: {
        double t = 2.0 * pi * s;
        return {-std::sin(t), std::cos(t)};
    }
    case ShapeKind::ellipse: {
        double t = 2.0 * pi * s;
        Vec2 d{-std::sin(t), b_ * std::cos(t)};
        return d / d.norm();
    }
    case ShapeKind::superdisk: {
        double t = 2.0 * pi * s;
        double c = std::cos(t), sn = std::sin(t);
        double ac = std::abs(c), as = std::abs(sn);
        double u = std::pow(ac, q_) + std::pow(as, q_);
        double du = q_ * (std::pow(as, q_ - 1.0) * (sn >= 0 ? 1.0 : -1.0) * c -
                          std::pow(ac, q_ - 1.0) * (c >= 0 ? 1.0 : -1.0) * sn);
        double r = std::pow(u, -1.0 / q_);
        double dr = -r / q_ * du / u;
        Vec2 d{dr * c - r * sn, dr * sn + r * c};
        return d / d.norm();
    }
    case ShapeKind::stadium: {
        double a0 = seg_len_[0], a1 = seg_len_[1], a2 = seg_len_[2], a3 = seg_len_[3];
        if (s < a0) return {0.0, 1.0};
        if (s < a1) {
            double t = pi * (s - a0) / (a1 - a0);
            Vec2 d{-std::sin(t), (1.0 - flat_) * std::cos(t)};
            return d / d.norm();
        }
        if (s < a2) return {0.0, -1.0};
        if (s < a3) {
            double t = pi * (s - a2) / (a3 - a2);
            Vec2 d{std::sin(t), -(1.0 - flat_) * std::cos(t)};
            return d / d.norm();
        }
        return {0.0, 1.0};
    }
    }
    return {};
}

double InclusionShape::half_width(double y) const {
    double ay = std::abs(y);
    switch (kind) {
    case ShapeKind::disk:
        return ay <= 1.0 ? std::sqrt(std::max(0.0, 1.0 - ay * ay)) : 0.0;
    case ShapeKind::ellipse:
        return ay <= b_ ? std::sqrt(std::max(0.0, 1.0 - (ay / b_) * (ay / b_))) : 0.0;
    case ShapeKind::superdisk:
        return ay <= 1.0 ? std::pow(std::max(0.0, 1.0 - std::pow(ay, q_)), 1.0 / q_) : 0.0;
    case ShapeKind::stadium:
        if (ay <= flat_) return 1.0;
        if (ay <= 1.0) {
            double v = (ay - flat_) / (1.0 - flat_);
            return std::sqrt(std::max(0.0, 1.0 - v * v));
        }
        return 0.0;
    }
    return 0.0;
}

double InclusionShape::y_extent() const {
    return kind == ShapeKind::ellipse ? b_ : 1.0;
}

double InclusionShape::max_radius() const {
    switch (kind) {
    case ShapeKind::disk:
    case ShapeKind::ellipse:
        return 1.0;
    case ShapeKind::superdisk:
        // corner point of |x|^q + |y|^q = 1 on the diagonal
        return std::sqrt(2.0) * std::pow(0.5, 1.0 / q_);
    case ShapeKind::stadium: {
        // cap point maximizing |p|^2 = cos^2 t + (f + (1-f) sin t)^2
        double e = 1.0 - flat_;
        double st = std::clamp(flat_ * e / (1.0 - e * e), 0.0, 1.0);
        double best = std::max(1.0, std::hypot(flat_, 1.0));
        double ct2 = 1.0 - st * st;
        best = std::max(best, std::sqrt(ct2 + (flat_ + e * st) * (flat_ + e * st)));
        return best;
    }
    }
    return std::sqrt(2.0);
}

bool InclusionShape::inside(Vec2 p) const {
    if (std::abs(p.y) > y_extent()) return false;
    return std::abs(p.x) <= half_width(p.y);
}

Vec2 InclusionShape::point_at_angle(double phi) const {
    double c = std::cos(phi), s = std::sin(phi);
    switch (kind) {
    case ShapeKind::disk:
        return {c, s};
    case ShapeKind::ellipse: {
        double r = 1.0 / std::sqrt(c * c + (s / b_) * (s / b_));
        return {r * c, r * s};
    }
    case ShapeKind::superdisk: {
        double u = std::pow(std::abs(c), q_) + std::pow(std::abs(s), q_);
        double r = std::pow(u, -1.0 / q_);
        return {r * c, r * s};
    }
    case ShapeKind::stadium: {
        // the ray meets either a flat side or a cap arc
        if (std::abs(s) <= flat_ * std::abs(c)) {
            double r = 1.0 / std::abs(c);
            return {r * c, r * s};
        }
        double f = s > 0.0 ? flat_ : -flat_;
        double e = 1.0 - flat_;
        // r^2 c^2 + ((r s - f)/e)^2 = 1
        double A = c * c + (s / e) * (s / e);
        double B = -2.0 * f * s / (e * e);
        double C = (f / e) * (f / e) - 1.0;
        double r = (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
        return {r * c, r * s};
    }
    }
    return {c, s};
}

InclusionShape make_shape(ShapeKind kind, const ShapeParams& params) {
    InclusionShape sh;
    sh.kind = kind;
    switch (kind) {
    case ShapeKind::disk:
        sh.gamma = 1.0;
        break;
    case ShapeKind::ellipse:
        if (!(params.ellipse_b > 0.0 && params.ellipse_b <= 1.0))
            throw std::invalid_argument("make_shape: ellipse requires 0 < b <= a = 1");
        sh.b_ = params.ellipse_b;
        sh.gamma = 1.0;
        break;
    case ShapeKind::superdisk:
        if (!(params.gamma > 0.0) || !std::isfinite(params.gamma))
            throw std::invalid_argument("make_shape: superdisk requires finite gamma > 0");
        sh.gamma = params.gamma;
        sh.q_ = params.gamma + 1.0;
        break;
    case ShapeKind::stadium:
        if (!(params.rho0 > 0.0 && params.rho0 < 1.0))
            throw std::invalid_argument("make_shape: stadium requires rho0 in (0,1)");
        sh.flat_ = params.rho0;
        sh.gamma = kInf;
        // parameter spans proportional to approximate piece lengths
        {
            double cap = 0.5 * pi * (1.0 + (1.0 - sh.flat_)); // ellipse arc estimate
            double total = 2.0 * (2.0 * sh.flat_) + 2.0 * cap;
            double v = sh.flat_ / total, c = cap / total;
            sh.seg_len_[0] = v;
            sh.seg_len_[1] = v + c;
            sh.seg_len_[2] = v + c + 2.0 * v;
            sh.seg_len_[3] = v + c + 2.0 * v + c;
        }
        break;
    }

    // lateral extreme points must sit on the boundary
    if ((sh.boundary(0.0) - Vec2{1.0, 0.0}).norm() > 1e-12 ||
        (sh.boundary(0.5) - Vec2{-1.0, 0.0}).norm() > 1e-12)
        throw std::invalid_argument("make_shape: (+-1,0) not on the boundary");

    // Fit the flatness envelope constants from the slice half-width.
    if (kind == ShapeKind::stadium) {
        sh.rho0 = sh.flat_;
        sh.rho1 = 1.0;
        sh.rho2 = 1.0;
    } else {
        sh.rho0 = 0.6 * sh.y_extent();
        const int n = 4000;
        double r1 = 0.0, r2 = kInf;
        for (int i = 1; i <= n; ++i) {
            double s = sh.y_extent() * i / n;
            double defect = 1.0 - sh.half_width(s);
            double p = std::pow(s, 1.0 + sh.gamma);
            if (s <= sh.rho0) r1 = std::max(r1, defect / p);
            r2 = std::min(r2, defect / p);
        }
        // small margins: the envelope extrema may sit between samples
        sh.rho1 = r1 * (1.0 + 1e-6);
        sh.rho2 = r2 * (1.0 - 1e-6);
    }
    return sh;
}

PorousLayout make_layout(const InclusionShape& shape, double eps, double dist,
                         LayoutKind kind, double mu) {
    if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("make_layout: need 0 < eps <= 1/2");
    if (!(dist > 0.0)) throw std::invalid_argument("make_layout: need dist > 0");
    if (kind == LayoutKind::thin_layer && !(mu >= 0.0 && mu < 1.0))
        throw std::invalid_argument("make_layout: thin layer needs mu in [0,1)");

    PorousLayout lay;
    lay.shape = shape;
    lay.eps = eps;
    lay.dist = dist;
    lay.kind = kind;
    lay.mu = mu;
    lay.n_cols = robust_floor((1.0 + dist) / (eps + dist));
    if (lay.n_cols < 1) throw std::invalid_argument("make_layout: no inclusion fits (N = 0)");
    switch (kind) {
    case LayoutKind::segment: lay.n_rows = 1; break;
    case LayoutKind::square: lay.n_rows = lay.n_cols; break;
    case LayoutKind::thin_layer: lay.n_rows = std::max(1, robust_floor(std::pow(1.0 / eps, mu))); break;
    }

    lay.centers.reserve(static_cast<size_t>(lay.n_cols) * lay.n_rows);
    const double pitch = eps + dist;
    const double vpitch = lay.row_pitch();
    for (int j = 0; j < lay.n_rows; ++j)
        for (int i = 0; i < lay.n_cols; ++i)
            lay.centers.push_back({0.5 * eps + i * pitch, j * vpitch});
    return lay;
}

std::optional<int> PorousLayout::inclusion_containing(Vec2 x) const {
    const double h = half_scale();
    const double pitch = col_pitch(), vpitch = row_pitch();
    int i0 = robust_floor((x.x - 0.5 * eps) / pitch + 0.5);
    int j0 = robust_floor(x.y / vpitch + 0.5);
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            int i = i0 + di, j = j0 + dj;
            if (i < 0 || i >= n_cols || j < 0 || j >= n_rows) continue;
            Vec2 z = centers[static_cast<size_t>(j) * n_cols + i];
            if (shape.inside((x - z) / h)) return static_cast<int>(j) * n_cols + i;
        }
    return std::nullopt;
}

bool PorousLayout::in_fluid(Vec2 x) const {
    return !inclusion_containing(x).has_value();
}

double PorousLayout::clearance(Vec2 x) const {
    const double rmax = half_scale() * shape.max_radius();
    double best = kInf;
    const double pitch = col_pitch(), vpitch = row_pitch();
    int i0 = robust_floor((x.x - 0.5 * eps) / pitch + 0.5);
    int j0 = robust_floor(x.y / vpitch + 0.5);
    // nearby inclusions exactly, the rest through the row/column bound
    for (int dj = -2; dj <= 2; ++dj)
        for (int di = -2; di <= 2; ++di) {
            int i = std::clamp(i0 + di, 0, n_cols - 1);
            int j = std::clamp(j0 + dj, 0, n_rows - 1);
            Vec2 z = centers[static_cast<size_t>(j) * n_cols + i];
            best = std::min(best, (x - z).norm() - rmax);
        }
    return std::max(best, 0.0);
}

double gap_area(const InclusionShape& shape, double eps, double dist, double s) {
    if (!(s >= 0.0 && s <= shape.rho0 + 1e-12))
        throw std::invalid_argument("gap_area: need 0 <= s <= rho0");
    if (s == 0.0) return 0.0;
    const int n_pairs = robust_floor((1.0 + dist) / (eps + dist)) - 1;
    if (n_pairs <= 0) return 0.0;

    // One neighbor pair in local coordinates: centers at 0 and eps+dist.
    const double h = 0.5 * eps;
    const double pitch = eps + dist;

    // Fluid length of the horizontal slice at height y, found by bisecting
    // the membership predicate from the gap midline toward each inclusion.
    auto fluid_len = [&](double y) {
        auto boundary_x = [&](Vec2 center_local, double dir) {
            // dir = +1 marches from the center outward toward the midline
            auto inside_at = [&](double x) {
                return shape.inside({(x - center_local.x) / h, y / h});
            };
            double mid = 0.5 * pitch;
            double lo = center_local.x, hi = center_local.x + dir * mid;
            if (!inside_at(lo)) return lo; // slice misses the inclusion
            for (int it = 0; it < 60; ++it) {
                double m = 0.5 * (lo + hi);
                if (inside_at(m))
                    lo = m;
                else
                    hi = m;
            }
            return 0.5 * (lo + hi);
        };
        double right_of_left = boundary_x({0.0, 0.0}, +1.0);
        double left_of_right = boundary_x({pitch, 0.0}, -1.0);
        return std::max(0.0, left_of_right - right_of_left);
    };

    const double strip_h = h * s;
    double pair = integrate_adaptive([&](double y) { return fluid_len(y); },
                                     -strip_h, strip_h, 1e-8);
    return n_pairs * pair;
}

double optimal_strip(double gamma, double eps, double dist, double rho0) {
    if (!(eps > 0.0 && dist > 0.0)) throw std::invalid_argument("optimal_strip: need eps, dist > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("optimal_strip: need gamma > 0");
    if (!std::isfinite(gamma)) return rho0;
    double s = std::pow(dist / (gamma * eps), 1.0 / (gamma + 1.0));
    return std::min(s, rho0);
}

double optimal_strip(const InclusionShape& shape, double eps, double dist) {
    return optimal_strip(shape.gamma, eps, dist, shape.rho0);
}

} // namespace porous
