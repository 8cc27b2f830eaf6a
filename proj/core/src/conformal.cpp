#include "porous/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace porous {

namespace {

// branch of sqrt(z^2 - c2) that behaves like +z at infinity
Complex exterior_sqrt(Complex z, double c2) {
    Complex s = std::sqrt(z * z - c2);
    if (s.real() * z.real() + s.imag() * z.imag() < 0.0) s = -s;
    return s;
}

} // namespace

Complex ConformalMap::series(Complex w) const {
    Complex s = w / beta;
    if (coef_.empty()) return s;
    Complex invw = 1.0 / w;
    Complex p{1.0, 0.0};
    s += coef_[0];
    for (size_t k = 1; k < coef_.size(); ++k) {
        p *= invw;
        s += coef_[k] * p;
    }
    return s;
}

Complex ConformalMap::series_derivative(Complex w) const {
    Complex s{1.0 / beta, 0.0};
    if (coef_.size() < 2) return s;
    Complex invw = 1.0 / w;
    Complex p = invw;
    for (size_t k = 1; k < coef_.size(); ++k) {
        p *= invw;
        s -= static_cast<double>(k) * coef_[k] * p;
    }
    return s;
}

Complex ConformalMap::inverse(Complex w) const {
    switch (mode) {
    case MapMode::identity:
        return w;
    case MapMode::ellipse_joukowski:
        return 0.5 * ((1.0 + ellipse_b_) * w + (1.0 - ellipse_b_) / w);
    case MapMode::laurent_fit:
        return series(w);
    }
    return w;
}

Complex ConformalMap::forward(Complex z) const {
    switch (mode) {
    case MapMode::identity:
        return z;
    case MapMode::ellipse_joukowski:
        return (z + exterior_sqrt(z, ellipse_c2_)) / (1.0 + ellipse_b_);
    case MapMode::laurent_fit: {
        // Newton on the truncated series; the far-field w = beta*(z - c0)
        // starter is already accurate away from the obstacle.
        Complex w = beta * (z - (coef_.empty() ? Complex{0, 0} : coef_[0]));
        if (std::abs(w) < 1.0) w /= std::abs(w);
        for (int it = 0; it < 60; ++it) {
            Complex f = series(w) - z;
            Complex d = series_derivative(w);
            Complex dw = f / d;
            w -= dw;
            double aw = std::abs(w);
            if (aw < 1.0) w /= aw; // stay on the closed exterior
            if (std::abs(dw) < 1e-15 * std::max(1.0, std::abs(w))) break;
        }
        return w;
    }
    }
    return z;
}

Complex ConformalMap::derivative(Complex z) const {
    switch (mode) {
    case MapMode::identity:
        return {1.0, 0.0};
    case MapMode::ellipse_joukowski:
        return (1.0 + z / exterior_sqrt(z, ellipse_c2_)) / (1.0 + ellipse_b_);
    case MapMode::laurent_fit:
        return 1.0 / series_derivative(forward(z));
    }
    return {1.0, 0.0};
}

struct LaurentFitter {
    static ConformalMap fit(const InclusionShape& shape, int n_modes);
};

namespace {

double boundary_h_bound(const ConformalMap& m) {
    // h = w - beta*S(w) on |w| = 1 attains the sup of |h| by the maximum
    // modulus principle.
    double hmax = 0.0;
    const int n = 2048;
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * pi * (i + 0.5) / n;
        Complex w{std::cos(th), std::sin(th)};
        hmax = std::max(hmax, std::abs(w - m.beta * m.inverse(w)));
    }
    return hmax;
}

} // namespace

ConformalMap LaurentFitter::fit(const InclusionShape& shape, int n_modes) {
    ConformalMap m;
    m.mode = MapMode::laurent_fit;
    m.n_modes = n_modes;
    const int M = std::max(512, 8 * n_modes);

    // Sample directions, offset so no sample sits exactly on a symmetry axis.
    std::vector<double> theta(M);
    std::vector<Complex> w(M), target(M);
    for (int i = 0; i < M; ++i) {
        theta[i] = 2.0 * pi * (i + 0.5) / M;
        w[i] = {std::cos(theta[i]), std::sin(theta[i])};
        target[i] = to_complex(shape.point_at_angle(theta[i]));
    }

    // Alternate Fourier projection (the least-squares solution on a uniform
    // circle grid) with reprojection of the targets onto the curve.
    double best_residual = 1e30;
    std::vector<Complex> best_coef;
    double best_beta = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        Complex b0{0, 0};
        std::vector<Complex> coef(static_cast<size_t>(n_modes) + 1, Complex{0, 0});
        for (int i = 0; i < M; ++i) {
            Complex e{std::cos(theta[i]), -std::sin(theta[i])};
            b0 += target[i] * e; // projection on w
            Complex p{1.0, 0.0};
            coef[0] += target[i];
            for (int k = 1; k <= n_modes; ++k) {
                p *= std::conj(e); // e^{+ik theta}
                coef[k] += target[i] * p;
            }
        }
        double inv_beta = b0.real() / M; // beta is fixed real positive
        if (!(inv_beta > 0.0)) throw std::runtime_error("build_map: fit lost orientation");
        for (auto& c : coef) c /= static_cast<double>(M);

        m.beta = 1.0 / inv_beta;
        m.coef_ = coef;

        double residual = 0.0;
        for (int i = 0; i < M; ++i) {
            Complex s = m.series(w[i]);
            Complex proj = to_complex(shape.point_at_angle(std::arg(s)));
            residual = std::max(residual, std::abs(s - proj));
            target[i] = proj;
        }
        bool improved = residual < best_residual * (1.0 - 1e-3);
        if (residual < best_residual) {
            best_residual = residual;
            best_coef = m.coef_;
            best_beta = m.beta;
        }
        if (residual < 1e-13 || (iter > 8 && !improved)) break;
    }
    m.coef_ = best_coef;
    m.beta = best_beta;
    m.fit_residual = best_residual;
    if (m.fit_residual > 1e-6)
        throw std::runtime_error("build_map: Laurent fit residual " +
                                 std::to_string(m.fit_residual) +
                                 " above 1e-6; increase n_modes");
    return m;
}

ConformalMap build_map(const InclusionShape& shape, int n_modes) {
    ConformalMap m;
    switch (shape.kind) {
    case ShapeKind::disk:
        m.mode = MapMode::identity;
        m.beta = 1.0;
        m.h_bound = 0.0;
        return m;
    case ShapeKind::ellipse: {
        double b = shape.y_extent();
        if (b >= 1.0 - 1e-15) { // degenerate circle
            m.mode = MapMode::identity;
            m.beta = 1.0;
            return m;
        }
        m.mode = MapMode::ellipse_joukowski;
        m.ellipse_b_ = b;
        m.ellipse_c2_ = 1.0 - b * b;
        m.beta = 2.0 / (1.0 + b);
        m.h_bound = boundary_h_bound(m);
        return m;
    }
    default: {
        ConformalMap fit = LaurentFitter::fit(shape, n_modes);
        fit.h_bound = boundary_h_bound(fit);
        return fit;
    }
    }
}

Vec2 reflect(Vec2 y) {
    double n2 = y.norm2();
    if (n2 == 0.0) throw std::invalid_argument("reflect: y = 0 has no conjugate point");
    return y / n2;
}

double green(const ConformalMap& map, Vec2 x, Vec2 y) {
    if ((x - y).norm2() == 0.0)
        throw std::domain_error("green: singular at x = y");
    Complex tx = map.forward(to_complex(x));
    Complex ty = map.forward(to_complex(y));
    double aty = std::abs(ty);
    Complex ty_star = ty / (aty * aty);
    return std::log(std::abs(tx - ty) / (std::abs(tx - ty_star) * aty)) / (2.0 * pi);
}

MapEstimateReport verify_map_estimates(const ConformalMap& map, double eps) {
    MapEstimateReport rep;
    rep.eps = eps;

    // Lip(T_eps) = (2/eps) sup|T'|, so the constant in C/eps is 2 sup|T'|;
    // likewise Lip(T_eps^-1) = (eps/2) sup|S'|.
    double sup_dT = 0.0, sup_dS = 0.0;
    const int n_r = 24, n_t = 96;
    for (int i = 0; i < n_r; ++i) {
        double rw = 1.0 + 1e-6 + 4.0 * i / (n_r - 1);
        for (int j = 0; j < n_t; ++j) {
            double th = 2.0 * pi * (j + 0.5) / n_t;
            Complex w = rw * Complex{std::cos(th), std::sin(th)};
            Complex dS = map.mode == MapMode::laurent_fit
                             ? map.series_derivative(w)
                             : (map.inverse(w * (1.0 + 1e-7)) - map.inverse(w)) / (w * 1e-7);
            sup_dS = std::max(sup_dS, std::abs(dS));
            Complex z = map.inverse(w);
            sup_dT = std::max(sup_dT, std::abs(map.derivative(z)));
        }
    }
    rep.c_lip_forward = 2.0 * sup_dT;
    rep.c_lip_inverse = 0.5 * sup_dS;

    // Image of circles around the obstacle: T_eps(dB(z,r)) within an annulus
    // C2 r/eps <= |T_eps| <= C1 r/eps. In template coordinates |x - z| = r
    // corresponds to |zeta| = 2r/eps, so the constant is 2 |T(zeta)| / |zeta|.
    double c1 = 0.0, c2 = 1e30;
    for (double r : {1.5, 2.0, 3.0, 5.0, 10.0, 30.0}) {
        for (int j = 0; j < 128; ++j) {
            double th = 2.0 * pi * (j + 0.5) / 128;
            Complex z = r * Complex{std::cos(th), std::sin(th)};
            double ratio = 2.0 * std::abs(map.forward(z)) / r;
            c1 = std::max(c1, ratio);
            c2 = std::min(c2, ratio);
        }
    }
    rep.c1 = c1;
    rep.c2 = c2;

    // Preimage of circles |w| = r+1 within eps C4 (r+1) <= |x-z| <= eps C3 (r+1).
    double c3 = 0.0, c4 = 1e30;
    for (double r : {0.2, 0.5, 1.0, 2.0, 5.0, 19.0}) {
        for (int j = 0; j < 128; ++j) {
            double th = 2.0 * pi * (j + 0.5) / 128;
            Complex w = (r + 1.0) * Complex{std::cos(th), std::sin(th)};
            double ratio = std::abs(map.inverse(w)) * 0.5 / (r + 1.0);
            c3 = std::max(c3, ratio);
            c4 = std::min(c4, ratio);
        }
    }
    rep.c3 = c3;
    rep.c4 = c4;
    return rep;
}

} // namespace porous
