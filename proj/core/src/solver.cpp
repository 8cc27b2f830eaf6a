#include "porous/solver.hpp"

#include "porous/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace porous {

namespace {

Vec2 blob_kernel(Vec2 x, const Blob& b) {
    Vec2 d = x - b.pos;
    double r2 = d.norm2();
    if (r2 < 1e-300) return {0.0, 0.0};
    double cut = b.delta > 0.0 ? -std::expm1(-r2 / (b.delta * b.delta)) : 1.0;
    return b.gamma / (2.0 * pi * r2) * cut * d.perp();
}

// velocity of a unit-density straight vortex panel
Vec2 panel_kernel(Vec2 x, Vec2 a, Vec2 b, Complex dir) {
    Complex z = to_complex(x);
    Complex ratio = (z - to_complex(b)) / (z - to_complex(a));
    Complex w = Complex{0, 1} * std::conj(dir) * std::log(ratio) / (2.0 * pi);
    return {w.real(), -w.imag()}; // w is the conjugate velocity
}

} // namespace

PanelSystem::PanelSystem(const PorousLayout& layout, const PanelOptions& opt)
    : layout_(layout) {
    int P = opt.panels_per_obstacle;
    if (P < 16) throw std::invalid_argument("assemble_panels: need at least 16 panels");
    // An even midpoint-collocated ring aliases the checkerboard sheet into an
    // exact null mode; an odd count keeps the system invertible.
    if (P % 2 == 0) ++P;

    // Panel endpoints in boundary parameter, optionally clustered toward the
    // lateral gap points s = 0 and s = 1/2. Odd panel counts keep the
    // midpoint-collocated system away from its checkerboard alias.
    std::vector<double> s(P);
    double kappa = 0.0;
    if (opt.min_param_spacing > 0.0)
        kappa = std::clamp(1.0 - opt.min_param_spacing * P, 0.0, 0.999);
    for (int m = 0; m < P; ++m) {
        double t = static_cast<double>(m) / P;
        s[m] = t - kappa * std::sin(4.0 * pi * t) / (4.0 * pi);
    }

    const double h = layout_.half_scale();
    min_len_ = 1e30;
    for (size_t k = 0; k < layout_.centers.size(); ++k) {
        Vec2 z = layout_.centers[k];
        obstacle_center_.push_back(z);
        int first = static_cast<int>(panels_.size());
        for (int m = 0; m < P; ++m) {
            Vec2 pa = z + h * layout_.shape.boundary(s[m]);
            double s1 = m + 1 < P ? s[m + 1] : 1.0;
            Vec2 pb = z + h * layout_.shape.boundary(s1);
            Panel p;
            p.a = pa;
            p.b = pb;
            p.mid = 0.5 * (pa + pb);
            Vec2 t = pb - pa;
            p.len = t.norm();
            if (p.len <= 0.0) throw std::runtime_error("assemble_panels: degenerate panel");
            t = t / p.len;
            p.dir = to_complex(t);
            // collocate on the true boundary with the true outward normal;
            // chord-midpoint collocation is only first-order accurate
            double smid = 0.5 * (s[m] + s1);
            p.colloc = z + h * layout_.shape.boundary(smid);
            Vec2 bt = layout_.shape.boundary_tangent(smid);
            p.normal = {bt.y, -bt.x};
            p.obstacle = static_cast<int>(k);
            min_len_ = std::min(min_len_, p.len);
            panels_.push_back(p);
        }
        obstacle_range_.emplace_back(first, static_cast<int>(panels_.size()));
    }

    // Square system: per obstacle the last sheet strength is eliminated by
    // the zero-circulation constraint and one point source at the center
    // absorbs the discrete net-flux mode.
    const int n = static_cast<int>(panels_.size());
    A_.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const Vec2 xi = panels_[i].colloc;
        const Vec2 ni = panels_[i].normal;
        int col = 0;
        for (size_t k = 0; k < obstacle_range_.size(); ++k) {
            auto [f, l] = obstacle_range_[k];
            const int last = l - 1;
            double last_infl = ni.dot(
                panel_kernel(xi, panels_[last].a, panels_[last].b, panels_[last].dir));
            for (int j = f; j < last; ++j) {
                double infl = ni.dot(
                    panel_kernel(xi, panels_[j].a, panels_[j].b, panels_[j].dir));
                A_(i, col++) = infl - panels_[j].len / panels_[last].len * last_infl;
            }
            Vec2 d = xi - obstacle_center_[k];
            A_(i, col++) = ni.dot(d / (2.0 * pi * d.norm2()));
        }
    }
    lu_.compute(A_);
    sheet_.assign(panels_.size(), 0.0);
    source_.assign(obstacle_center_.size(), 0.0);
}

PanelSystem assemble_panels(const PorousLayout& layout, int panels_per_obstacle) {
    PanelOptions opt;
    opt.panels_per_obstacle = panels_per_obstacle;
    return PanelSystem(layout, opt);
}

PanelSystem assemble_panels(const PorousLayout& layout, const PanelOptions& opt) {
    return PanelSystem(layout, opt);
}

double PanelSystem::solve(const std::function<Vec2(Vec2)>& background) const {
    const int n = static_cast<int>(panels_.size());
    if (n == 0) return 0.0;
    Eigen::VectorXd b(n);
    double bg_scale = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec2 u = background(panels_[i].colloc);
        bg_scale = std::max(bg_scale, u.norm());
        b(i) = -u.dot(panels_[i].normal);
    }
    Eigen::VectorXd x = lu_.solve(b);
    residual_ = (A_ * x - b).lpNorm<Eigen::Infinity>() / std::max(bg_scale, 1e-30);

    int col = 0;
    for (size_t k = 0; k < obstacle_range_.size(); ++k) {
        auto [f, l] = obstacle_range_[k];
        const int last = l - 1;
        double acc = 0.0;
        for (int j = f; j < last; ++j) {
            sheet_[j] = x(col++);
            acc += sheet_[j] * panels_[j].len;
        }
        sheet_[last] = -acc / panels_[last].len;
        source_[k] = x(col++);
    }
    solved_ = true;
    return residual_;
}

Vec2 PanelSystem::induced_velocity(Vec2 x) const {
    Vec2 u{0.0, 0.0};
    for (size_t j = 0; j < panels_.size(); ++j) {
        const Panel& p = panels_[j];
        if ((x - p.mid).norm2() < 1e-24 * p.len * p.len) {
            // on-panel evaluation: exterior-side limit
            u += 0.5 * sheet_[j] * Vec2{p.dir.real(), p.dir.imag()};
            continue;
        }
        u += sheet_[j] * panel_kernel(x, p.a, p.b, p.dir);
    }
    for (size_t k = 0; k < obstacle_center_.size(); ++k) {
        Vec2 d = x - obstacle_center_[k];
        u += source_[k] / (2.0 * pi * d.norm2()) * d;
    }
    return u;
}

double PanelSystem::obstacle_circulation(int k) const {
    auto [f, l] = obstacle_range_[k];
    double c = 0.0;
    for (int j = f; j < l; ++j) c += sheet_[j] * panels_[j].len;
    return c;
}

void PanelSystem::ensure_solved(const VortexState& state) const {
    if (empty()) return;
    if (solved_ && solved_for_.size() == state.blobs.size()) {
        bool same = true;
        for (size_t i = 0; i < state.blobs.size(); ++i) {
            if (solved_for_[i].pos.x != state.blobs[i].pos.x ||
                solved_for_[i].pos.y != state.blobs[i].pos.y ||
                solved_for_[i].gamma != state.blobs[i].gamma ||
                solved_for_[i].delta != state.blobs[i].delta) {
                same = false;
                break;
            }
        }
        if (same) return;
    }
    solve([&](Vec2 x) {
        Vec2 u{0.0, 0.0};
        for (const Blob& b : state.blobs) u += blob_kernel(x, b);
        return u;
    });
    solved_for_ = state.blobs;
}

Vec2 velocity_total(const VortexState& state, const PanelSystem& panels, Vec2 x) {
    panels.ensure_solved(state);
    Vec2 u{0.0, 0.0};
    for (const Blob& b : state.blobs) u += blob_kernel(x, b);
    if (!panels.empty()) u += panels.induced_velocity(x);
    return u;
}

Vec2 blob_velocity(const VortexState& state, const PanelSystem& panels, size_t i) {
    panels.ensure_solved(state);
    Vec2 u{0.0, 0.0};
    for (size_t j = 0; j < state.blobs.size(); ++j)
        if (j != i) u += blob_kernel(state.blobs[i].pos, state.blobs[j]);
    if (!panels.empty()) u += panels.induced_velocity(state.blobs[i].pos);
    return u;
}

VortexState step_rk4(const VortexState& state, const PanelSystem& panels, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
    const size_t n = state.blobs.size();

    auto stage_velocities = [&](const std::vector<Vec2>& pos) {
        VortexState tmp = state;
        for (size_t i = 0; i < n; ++i) tmp.blobs[i].pos = pos[i];
        std::vector<Vec2> vel(n);
        for (size_t i = 0; i < n; ++i) vel[i] = blob_velocity(tmp, panels, i);
        return vel;
    };

    std::vector<Vec2> p0(n);
    for (size_t i = 0; i < n; ++i) p0[i] = state.blobs[i].pos;
    std::vector<Vec2> k1 = stage_velocities(p0);

    // Step-size guard: a step may not cross the resolution scale, which is
    // the gap/core scale near the porous region and the obstacle clearance
    // away from it.
    double umax = 0.0, dmin = 1e30;
    for (size_t i = 0; i < n; ++i) {
        umax = std::max(umax, k1[i].norm());
        dmin = std::min(dmin, state.blobs[i].delta);
    }
    double clearance = 1.0;
    if (!panels.empty())
        for (size_t i = 0; i < n; ++i)
            clearance = std::min(clearance, panels.layout().clearance(state.blobs[i].pos));
    double scale = std::max(panels.empty() ? dmin : std::min(panels.layout().dist, dmin),
                            std::min(clearance, 1.0));
    if (dt * umax > 0.2 * scale * (1.0 + 1e-12))
        throw std::runtime_error("step_rk4: dt * max|u| exceeds 0.2 * resolution scale; "
                                 "reduce dt");

    auto shift = [&](const std::vector<Vec2>& base, const std::vector<Vec2>& k, double a) {
        std::vector<Vec2> out(n);
        for (size_t i = 0; i < n; ++i) out[i] = base[i] + a * k[i];
        return out;
    };
    std::vector<Vec2> k2 = stage_velocities(shift(p0, k1, 0.5 * dt));
    std::vector<Vec2> k3 = stage_velocities(shift(p0, k2, 0.5 * dt));
    std::vector<Vec2> k4 = stage_velocities(shift(p0, k3, dt));

    VortexState out = state;
    out.time += dt;
    for (size_t i = 0; i < n; ++i)
        out.blobs[i].pos = p0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    // wall contact: project intruding blobs radially to a delta/2 offset
    if (!panels.empty()) {
        const PorousLayout& lay = panels.layout();
        for (size_t i = 0; i < n; ++i) {
            auto hit = lay.inclusion_containing(out.blobs[i].pos);
            if (!hit) continue;
            Vec2 z = lay.centers[*hit];
            Vec2 d = out.blobs[i].pos - z;
            if (d.norm() < 1e-14) d = {1.0, 0.0};
            double phiang = std::atan2(d.y, d.x);
            double rb = lay.shape.point_at_angle(phiang).norm();
            double target = lay.half_scale() * rb + 0.5 * out.blobs[i].delta;
            out.blobs[i].pos = z + d / d.norm() * target;
            ++out.push_events;
        }
    }
    return out;
}

namespace {

double line_integral(const VortexState& state, const PanelSystem& panels, Vec2 a, Vec2 b,
                     int n_quad, bool normal_component) {
    panels.ensure_solved(state);
    Vec2 t = b - a;
    double len = t.norm();
    if (len == 0.0) return 0.0;
    t = t / len;
    Vec2 dir = normal_component ? t.perp() : t;

    auto f = [&](double s) {
        Vec2 x = a + s * (b - a);
        return velocity_total(state, panels, x).dot(dir) * len;
    };
    double scale = 0.0;
    for (int i = 0; i <= 8; ++i) scale = std::max(scale, std::abs(f(i / 8.0)));
    std::vector<double> splits;
    int base = std::max(1, n_quad / 15);
    for (int i = 1; i < base; ++i) splits.push_back(static_cast<double>(i) / base);
    return integrate_adaptive(f, 0.0, 1.0, 1e-9, 1e-11 * scale + 1e-16, splits);
}

void require_in_fluid(const PanelSystem& panels, Vec2 a, Vec2 b, const char* who) {
    if (panels.empty()) return;
    for (int i = 0; i <= 512; ++i) {
        Vec2 x = a + (static_cast<double>(i) / 512.0) * (b - a);
        if (!panels.layout().in_fluid(x))
            throw std::invalid_argument(std::string(who) + ": path touches an inclusion");
    }
}

} // namespace

double flux_gate(const VortexState& state, const PanelSystem& panels, Vec2 a, Vec2 b,
                 int n_quad) {
    require_in_fluid(panels, a, b, "flux_gate");
    return line_integral(state, panels, a, b, n_quad, true);
}

double circulation_loop(const VortexState& state, const PanelSystem& panels,
                        const std::vector<Vec2>& loop, int n_quad) {
    if (loop.size() < 3) throw std::invalid_argument("circulation_loop: need a closed polyline");
    double c = 0.0;
    for (size_t i = 0; i < loop.size(); ++i) {
        Vec2 a = loop[i], b = loop[(i + 1) % loop.size()];
        require_in_fluid(panels, a, b, "circulation_loop");
        c += line_integral(state, panels, a, b, n_quad, false);
    }
    return c;
}

} // namespace porous
