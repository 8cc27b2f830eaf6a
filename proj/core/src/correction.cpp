#include "porous/correction.hpp"

#include "porous/parallel.hpp"
#include "porous/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace porous {

namespace {

// 7th-order smoothstep: S(0)=0, S(1)=1, three vanishing derivatives at both ends.
double smoothstep7(double t) {
    return t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}
double smoothstep7_deriv(double t) {
    double a = t * (1.0 - t);
    return 140.0 * a * a * a;
}

// non-increasing profile: 1 for s <= 0, 0 for s >= 1
double profile(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 - smoothstep7(s);
}
double profile_deriv(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return -smoothstep7_deriv(s);
}

} // namespace

double CutoffFamily::lateral_gap(double x2) const {
    if (!std::isfinite(gamma)) return 0.5 * dist;
    return 0.5 * dist + 0.5 * eps * rho2 * std::pow(std::abs(2.0 * x2 / eps), gamma + 1.0);
}

double CutoffFamily::lateral_gap_deriv(double x2) const {
    if (!std::isfinite(gamma)) return 0.0;
    double t = std::abs(2.0 * x2 / eps);
    double s = x2 >= 0.0 ? 1.0 : -1.0;
    return rho2 * (gamma + 1.0) * std::pow(t, gamma) * s;
}

double CutoffFamily::value(Vec2 p) const {
    if (kind == CutoffKind::square_case) {
        auto g = [&](double t) { return profile(2.0 * std::abs(t) / eps - 1.0); };
        return g(p.x) * g(p.y);
    }
    double v = profile((2.0 * std::abs(p.y) - eps) / eps);
    if (v == 0.0) return 0.0;
    double w = cell_half_width();
    double d = lateral_gap(p.y);
    double b = 1.0 - profile((w - p.x) / d) - profile((p.x + w) / d);
    return v * b;
}

Vec2 CutoffFamily::gradient(Vec2 p) const {
    if (kind == CutoffKind::square_case) {
        auto g = [&](double t) { return profile(2.0 * std::abs(t) / eps - 1.0); };
        auto dg = [&](double t) {
            double s = t >= 0.0 ? 1.0 : -1.0;
            return profile_deriv(2.0 * std::abs(t) / eps - 1.0) * 2.0 * s / eps;
        };
        return {dg(p.x) * g(p.y), g(p.x) * dg(p.y)};
    }
    double sv = (2.0 * std::abs(p.y) - eps) / eps;
    double v = profile(sv);
    if (v == 0.0) return {0.0, 0.0};
    double dv = profile_deriv(sv) * 2.0 * (p.y >= 0.0 ? 1.0 : -1.0) / eps;
    double w = cell_half_width();
    double d = lateral_gap(p.y);
    double dd = lateral_gap_deriv(p.y);
    double ar = (w - p.x) / d, al = (p.x + w) / d;
    double b = 1.0 - profile(ar) - profile(al);
    double pr = profile_deriv(ar), pl = profile_deriv(al);
    double bx = (pr - pl) / d;
    double by = (pr * ar + pl * al) * dd / d;
    return {v * bx, dv * b + v * by};
}

CutoffFamily build_cutoff(CutoffKind kind, double eps, double dist,
                          const InclusionShape& shape) {
    if (!(eps > 0.0 && dist > 0.0))
        throw std::invalid_argument("build_cutoff: need eps, dist > 0");
    if (kind == CutoffKind::square_case && dist < eps)
        throw std::invalid_argument("build_cutoff: square case requires dist >= eps");
    CutoffFamily cf;
    cf.kind = kind;
    cf.eps = eps;
    cf.dist = dist;
    cf.gamma = shape.gamma;
    if (std::isfinite(shape.gamma)) {
        // keep the lateral gap profile below the cell half width everywhere
        double cap = 0.99 * std::pow(2.0, -(shape.gamma + 1.0));
        cf.rho2 = std::min(shape.rho2, cap);
    } else {
        cf.rho2 = shape.rho2;
    }
    return cf;
}

CutoffNorms cutoff_norms(const CutoffFamily& cf) {
    CutoffNorms out;
    const double eps = cf.eps;
    if (cf.kind == CutoffKind::square_case) {
        // separable: phi = g(x) g(y)
        auto g = [&](double t) { return profile(2.0 * t / eps - 1.0); };
        auto dg = [&](double t) { return profile_deriv(2.0 * t / eps - 1.0) * 2.0 / eps; };
        double ig2 = 2.0 * (0.5 * eps + integrate_gauss([&](double t) { double v = g(t); return v * v; },
                                                        0.5 * eps, eps, 24));
        double idg2 = 2.0 * integrate_gauss([&](double t) { double v = dg(t); return v * v; },
                                            0.5 * eps, eps, 24);
        out.l2 = std::sqrt(ig2 * ig2);
        out.grad_l2 = std::sqrt(2.0 * idg2 * ig2);
        return out;
    }

    const double w = cf.cell_half_width();
    auto vert = [&](double y) { return profile((2.0 * std::abs(y) - eps) / eps); };
    auto dvert = [&](double y) {
        return profile_deriv((2.0 * std::abs(y) - eps) / eps) * 2.0 *
               (y >= 0.0 ? 1.0 : -1.0) / eps;
    };

    // u-profiles of the lateral band are fixed polynomials
    static const int kU = 10;
    const GaussRule& gu = gauss_rule(kU);

    std::vector<double> seams{0.5 * eps};
    // resolve the scale where the lateral gap departs from dist/2
    if (std::isfinite(cf.gamma)) {
        double t = std::pow(cf.dist / (cf.rho2 * eps), 1.0 / (1.0 + cf.gamma));
        for (double m : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            double y = 0.5 * eps * t * m;
            if (y > 0.0 && y < eps) seams.push_back(y);
        }
    }

    auto half_l2 = integrate_adaptive(
        [&](double y) {
            double v = vert(y);
            double d = cf.lateral_gap(y);
            double middle = v * v * 2.0 * (w - d);
            double band = 0.0;
            for (int i = 0; i < kU; ++i) {
                double u = 0.5 * (1.0 + gu.nodes[i]);
                double s3 = 1.0 - profile(u);
                band += 0.5 * gu.weights[i] * s3 * s3;
            }
            return middle + v * v * 2.0 * d * band;
        },
        0.0, eps, 1e-7, 0.0, seams);

    auto half_grad = integrate_adaptive(
        [&](double y) {
            double v = vert(y), dv = dvert(y);
            double d = cf.lateral_gap(y), dd = cf.lateral_gap_deriv(y);
            double middle = dv * dv * 2.0 * (w - d);
            double band = 0.0;
            for (int i = 0; i < kU; ++i) {
                double u = 0.5 * (1.0 + gu.nodes[i]);
                double s3 = 1.0 - profile(u);
                double s3p = -profile_deriv(u);
                double gx = v * s3p / d;
                double gy = dv * s3 - v * s3p * u * dd / d;
                band += 0.5 * gu.weights[i] * (gx * gx + gy * gy);
            }
            return middle + 2.0 * d * band;
        },
        0.0, eps, 1e-7, 0.0, seams);

    out.l2 = std::sqrt(2.0 * half_l2);
    out.grad_l2 = std::sqrt(2.0 * half_grad);
    return out;
}

CorrectionField::CorrectionField(PorousLayout layout, ConformalMap map, CutoffFamily cutoff,
                                 SourceVorticity source, int src_radial, int src_angular)
    : layout_(std::move(layout)), map_(std::move(map)), cutoff_(std::move(cutoff)),
      source_(std::move(source)) {
    if (cutoff_.eps != layout_.eps || cutoff_.dist != layout_.dist)
        throw std::invalid_argument("CorrectionField: cutoff scales do not match the layout");
    if (layout_.kind == LayoutKind::square && cutoff_.kind != CutoffKind::square_case)
        throw std::invalid_argument("CorrectionField: square layout needs the square cutoff");

    nodes_ = source_.quadrature_nodes(src_radial, src_angular);
    mass_ = source_.total_mass();

    const double hw = cutoff_.cell_half_width();
    const double hh = cutoff_.cell_half_height();
    const double sc = source_.support_radius();
    Vec2 c = source_.support_center();
    for (Vec2 z : layout_.centers) {
        double dx = std::max(std::abs(c.x - z.x) - hw, 0.0);
        double dy = std::max(std::abs(c.y - z.y) - hh, 0.0);
        if (std::hypot(dx, dy) <= sc)
            throw std::invalid_argument("CorrectionField: source support touches a cell");
    }

    const double h = layout_.half_scale();
    cell_nodes_.resize(layout_.centers.size());
    for (size_t ci = 0; ci < layout_.centers.size(); ++ci) {
        Vec2 z = layout_.centers[ci];
        auto& tab = cell_nodes_[ci];
        tab.resize(nodes_.size());
        for (size_t q = 0; q < nodes_.size(); ++q) {
            Complex t = map_.forward(to_complex((nodes_[q].pos - z) / h));
            tab[q].t = t;
            tab[q].t_star = t / std::norm(t);
        }
    }
}

int CorrectionField::locate_cell(Vec2 x) const {
    const double shw = cutoff_.support_half_width();
    const double shh = cutoff_.support_half_height();
    const double pitch = layout_.col_pitch(), vpitch = layout_.row_pitch();
    int i0 = static_cast<int>(std::floor((x.x - 0.5 * layout_.eps) / pitch + 0.5));
    int j0 = static_cast<int>(std::floor(x.y / vpitch + 0.5));
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            int i = i0 + di, j = j0 + dj;
            if (i < 0 || i >= layout_.n_cols || j < 0 || j >= layout_.n_rows) continue;
            Vec2 z = layout_.centers[static_cast<size_t>(j) * layout_.n_cols + i];
            if (std::abs(x.x - z.x) < shw && std::abs(x.y - z.y) < shh)
                return j * layout_.n_cols + i;
        }
    return -1;
}

double CorrectionField::plane_stream(Vec2 x) const {
    if (source_.has_closed_form()) return source_.closed_form_stream(x);
    double s = 0.0;
    for (const auto& n : nodes_) s += n.wf * std::log((x - n.pos).norm());
    return s / (2.0 * pi);
}

Vec2 CorrectionField::plane_velocity_nodes(Vec2 x) const {
    Complex acc{0.0, 0.0};
    for (const auto& n : nodes_) {
        Complex d = to_complex(x - n.pos);
        acc += n.wf * d / std::norm(d);
    }
    return to_vec(Complex{0, 1} * acc) / (2.0 * pi);
}

CorrectionField::WTerms CorrectionField::w_terms_cell(int cell, Vec2 x, bool skip_vanishing) const {
    const double h = layout_.half_scale();
    const Vec2 z = layout_.centers[cell];
    const Complex tx = map_.forward(to_complex((x - z) / h));
    const Complex dT = map_.derivative(to_complex((x - z) / h)) / h; // scaled-map Jacobian
    const double atx2 = std::norm(tx);
    const auto& tab = cell_nodes_[cell];
    const bool trivial = skip_vanishing && map_.mode == MapMode::identity;

    WTerms wt;
    Complex acc3{0.0, 0.0}, acc4{0.0, 0.0};
    const double eps = layout_.eps;
    const double beta2 = 2.0 * map_.beta;
    for (size_t q = 0; q < nodes_.size(); ++q) {
        const double wq = nodes_[q].wf;
        const Complex dy = to_complex(x - nodes_[q].pos);
        const Complex dt = tx - tab[q].t;
        const Complex ds = tx - tab[q].t_star;
        if (!trivial) {
            wt.w1 += wq * std::log(beta2 * std::abs(dy) / (eps * std::abs(dt)));
            acc3 += wq * (dy / std::norm(dy) - std::conj(dT) * dt / std::norm(dt));
        }
        wt.w2 += wq * (std::log(std::abs(ds)) - 0.5 * std::log(atx2));
        acc4 += wq * (ds / std::norm(ds) - tx / atx2);
    }
    wt.w3 = to_vec(Complex{0, 1} * acc3);
    wt.w4 = to_vec(Complex{0, 1} * std::conj(dT) * acc4);
    return wt;
}

CorrectionField::WTerms CorrectionField::w_terms(int i, int j, Vec2 x) const {
    if (i < 0 || i >= layout_.n_cols || j < 0 || j >= layout_.n_rows)
        throw std::invalid_argument("w_terms: cell index out of range");
    int cell = j * layout_.n_cols + i;
    Vec2 local = x - layout_.centers[cell];
    if (std::abs(local.x) > cutoff_.support_half_width() ||
        std::abs(local.y) > cutoff_.support_half_height())
        throw std::invalid_argument("w_terms: x outside the cell support");
    return w_terms_cell(cell, x, false);
}

Vec2 CorrectionField::defect(int cell, Vec2 x) const {
    WTerms wt = w_terms_cell(cell, x, true);
    Vec2 local = x - layout_.centers[cell];
    double phi = cutoff_.value(local);
    Vec2 grad = cutoff_.gradient(local);
    Vec2 gperp{-grad.y, grad.x};
    return (gperp * (wt.w1 + wt.w2) + (wt.w3 + wt.w4) * phi) / (2.0 * pi);
}

Vec2 CorrectionField::velocity(Vec2 x) const {
    // reject strict-interior points; boundary evaluations are legitimate
    if (auto hit = layout_.inclusion_containing(x)) {
        Vec2 q = (x - layout_.centers[*hit]) / layout_.half_scale();
        if (layout_.shape.half_width(q.y) - std::abs(q.x) > 1e-12)
            throw std::domain_error("correction velocity: x inside an inclusion");
    }
    int cell = locate_cell(x);
    if (cell < 0) return biot_savart_plane(source_, x);

    const double h = layout_.half_scale();
    const Vec2 z = layout_.centers[cell];
    Vec2 local = x - z;
    double phi = cutoff_.value(local);
    Vec2 grad = cutoff_.gradient(local);

    Vec2 u_plane = biot_savart_plane(source_, x);
    if (phi == 0.0 && grad.x == 0.0 && grad.y == 0.0) return u_plane;

    const Complex tx = map_.forward(to_complex(local / h));
    const Complex dT = map_.derivative(to_complex(local / h)) / h;
    const double atx = std::abs(tx);
    const auto& tab = cell_nodes_[cell];

    // exterior-law velocity and the two stream functions, from the same nodes
    Complex acc{0.0, 0.0};
    double psi_cell = 0.0;
    const double eps = layout_.eps;
    const double beta2 = 2.0 * map_.beta;
    for (size_t q = 0; q < nodes_.size(); ++q) {
        const double wq = nodes_[q].wf;
        const Complex dt = tx - tab[q].t;
        const Complex ds = tx - tab[q].t_star;
        acc += wq * (dt / std::norm(dt) - ds / std::norm(ds));
        psi_cell += wq * std::log(eps * std::abs(dt) * atx / (beta2 * std::abs(ds)));
    }
    acc += mass_ * tx / (atx * atx);
    Vec2 u_cell = to_vec(Complex{0, 1} * std::conj(dT) * acc) / (2.0 * pi);
    psi_cell /= 2.0 * pi;
    double psi_diff = psi_cell - plane_stream(x);

    Vec2 gperp{-grad.y, grad.x};
    return u_plane * (1.0 - phi) + u_cell * phi + gperp * psi_diff;
}

double CorrectionField::cell_l2sq(int cell) const {
    const Vec2 z = layout_.centers[cell];
    const double eps = layout_.eps;
    auto f2 = [&](double lx, double ly) {
        Vec2 v = defect(cell, {z.x + lx, z.y + ly});
        return v.norm2();
    };
    const GaussRule& g12 = gauss_rule(12);
    auto gauss_box = [&](double x0, double x1, double y0, double y1) {
        if (x1 <= x0 || y1 <= y0) return 0.0;
        double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
        double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
        double s = 0.0;
        for (int i = 0; i < 12; ++i) {
            double xx = cx + hx * g12.nodes[i];
            double row = 0.0;
            for (int j = 0; j < 12; ++j) row += g12.weights[j] * f2(xx, cy + hy * g12.nodes[j]);
            s += g12.weights[i] * row;
        }
        return s * hx * hy;
    };

    double total = 0.0;
    const double hs = layout_.half_scale();

    if (cutoff_.kind == CutoffKind::square_case) {
        // interior rows between the inclusion and the flat part of the cutoff
        auto row_term = [&](double ly) {
            double hw = hs * layout_.shape.half_width(ly / hs);
            double s = 0.0;
            for (double side : {-1.0, 1.0}) {
                double a = hw, b = 0.5 * eps;
                if (b <= a) continue;
                for (int i = 0; i < 12; ++i) {
                    double lx = 0.5 * (a + b) + 0.5 * (b - a) * g12.nodes[i];
                    s += 0.5 * (b - a) * g12.weights[i] * f2(side * lx, ly);
                }
            }
            return s;
        };
        total += integrate_adaptive(row_term, -0.5 * eps, 0.5 * eps, 1e-6,
                                    0.0, std::vector<double>{0.0});
        // edge bands and corners of the cutoff plateau
        for (double s0 : {-1.0, 1.0}) {
            total += gauss_box(s0 > 0 ? 0.5 * eps : -eps, s0 > 0 ? eps : -0.5 * eps,
                               -0.5 * eps, 0.5 * eps);
            total += gauss_box(-0.5 * eps, 0.5 * eps, s0 > 0 ? 0.5 * eps : -eps,
                               s0 > 0 ? eps : -0.5 * eps);
        }
        for (double sx : {-1.0, 1.0})
            for (double sy : {-1.0, 1.0})
                total += gauss_box(sx > 0 ? 0.5 * eps : -eps, sx > 0 ? eps : -0.5 * eps,
                                   sy > 0 ? 0.5 * eps : -eps, sy > 0 ? eps : -0.5 * eps);
        return total;
    }

    // segment case: lateral bands under the mapped coordinate, middle rows
    const double w = cutoff_.cell_half_width();
    std::vector<double> ypanels{0.0};
    if (std::isfinite(cutoff_.gamma)) {
        double t = std::pow(cutoff_.dist / (cutoff_.rho2 * eps), 1.0 / (1.0 + cutoff_.gamma));
        for (double y = 0.5 * eps * std::min(t, 1.0); y < 0.5 * eps; y *= 2.0)
            ypanels.push_back(y);
    }
    ypanels.push_back(0.5 * eps);
    ypanels.push_back(0.75 * eps);
    ypanels.push_back(eps);
    std::sort(ypanels.begin(), ypanels.end());

    const GaussRule& g10 = gauss_rule(10);
    auto band_strip = [&](double y0, double y1) {
        double s = 0.0;
        for (int iy = 0; iy < 12; ++iy) {
            double ly = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * g12.nodes[iy];
            double wy = 0.5 * (y1 - y0) * g12.weights[iy];
            double d = cutoff_.lateral_gap(ly);
            double rowsum = 0.0;
            for (int iu = 0; iu < 10; ++iu) {
                double u = 0.5 * (1.0 + g10.nodes[iu]);
                double wu = 0.5 * g10.weights[iu] * d;
                rowsum += wu * (f2(w - u * d, ly) + f2(-(w - u * d), ly));
            }
            s += wy * rowsum;
        }
        return s;
    };
    auto middle_strip = [&](double y0, double y1) {
        double s = 0.0;
        for (int iy = 0; iy < 12; ++iy) {
            double ly = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * g12.nodes[iy];
            double wy = 0.5 * (y1 - y0) * g12.weights[iy];
            double d = cutoff_.lateral_gap(ly);
            double hw = std::abs(ly) <= hs * layout_.shape.y_extent()
                            ? hs * layout_.shape.half_width(ly / hs)
                            : 0.0;
            double a = hw, b = w - d;
            if (b <= a) continue;
            double rowsum = 0.0;
            for (int iu = 0; iu < 12; ++iu) {
                double lx = 0.5 * (a + b) + 0.5 * (b - a) * g12.nodes[iu];
                double wu = 0.5 * (b - a) * g12.weights[iu];
                rowsum += wu * (f2(lx, ly) + f2(-lx, ly));
            }
            s += wy * rowsum;
        }
        return s;
    };

    for (size_t k = 0; k + 1 < ypanels.size(); ++k) {
        for (double sgn : {-1.0, 1.0}) {
            double y0 = sgn > 0 ? ypanels[k] : -ypanels[k + 1];
            double y1 = sgn > 0 ? ypanels[k + 1] : -ypanels[k];
            total += band_strip(y0, y1);
            total += middle_strip(y0, y1);
        }
    }
    return total;
}

double CorrectionField::discrepancy_l2(int threads) const {
    std::vector<double> partial(n_cells(), 0.0);
    parallel_for(n_cells(), threads, [&](int c) { partial[c] = cell_l2sq(c); });
    double sum = 0.0;
    for (double v : partial) sum += v; // index order keeps the sum deterministic
    return std::sqrt(sum);
}

} // namespace porous
