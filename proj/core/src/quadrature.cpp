#include "porous/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace porous {

namespace {

GaussRule compute_gauss(int n) {
    // Newton iteration on Legendre polynomials, symmetric nodes.
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

std::map<int, GaussRule> g_rules;
std::mutex g_rules_mutex;

} // namespace

const GaussRule& gauss_rule(int order) {
    if (order < 1) throw std::invalid_argument("gauss_rule: order must be >= 1");
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto it = g_rules.find(order);
    if (it == g_rules.end()) it = g_rules.emplace(order, compute_gauss(order)).first;
    return it->second;
}

double integrate_gauss(const std::function<double(double)>& f, double a, double b,
                       int order) {
    const GaussRule& r = gauss_rule(order);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
    return s * h;
}

namespace {

template <class T, class Abs>
T adaptive_impl(const std::function<T(double)>& f, double a, double b, double rel_tol,
                double abs_floor, std::span<const double> splits, Abs absval) {
    struct Panel {
        double a, b;
        T coarse;
    };
    constexpr int kOrder = 15;
    auto panel_value = [&](double x0, double x1) {
        const GaussRule& r = gauss_rule(kOrder);
        const double c = 0.5 * (x0 + x1), h = 0.5 * (x1 - x0);
        T s{};
        for (int i = 0; i < kOrder; ++i) s += f(c + h * r.nodes[i]) * r.weights[i];
        return s * h;
    };

    // Seed panels at the supplied split points.
    std::vector<double> edges{a, b};
    for (double s : splits)
        if (s > a && s < b) edges.push_back(s);
    std::sort(edges.begin(), edges.end());

    std::vector<Panel> stack;
    T total{};
    double total_abs = 0.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        T v = panel_value(edges[i], edges[i + 1]);
        stack.push_back({edges[i], edges[i + 1], v});
        total += v;
        total_abs += absval(v);
    }

    T result{};
    int depth_budget = 2000;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        double m = 0.5 * (p.a + p.b);
        T left = panel_value(p.a, m);
        T right = panel_value(m, p.b);
        T refined = left + right;
        double err = absval(refined - p.coarse);
        double scale = std::max(total_abs * rel_tol, abs_floor);
        if (err < std::max(scale, 1e-300) || (p.b - p.a) < 1e-14 * (b - a) ||
            --depth_budget < 0) {
            result += refined;
        } else {
            stack.push_back({p.a, m, left});
            stack.push_back({m, p.b, right});
        }
    }
    return result;
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_floor,
                          std::span<const double> splits) {
    return adaptive_impl<double>(f, a, b, rel_tol, abs_floor, splits,
                                 [](double v) { return std::abs(v); });
}

Vec2 integrate_adaptive_vec(const std::function<Vec2(double)>& f, double a, double b,
                            double rel_tol, double abs_floor,
                            std::span<const double> splits) {
    return adaptive_impl<Vec2>(f, a, b, rel_tol, abs_floor, splits,
                               [](Vec2 v) { return std::abs(v.x) + std::abs(v.y); });
}

double integrate_adaptive_2d(const std::function<double(double, double)>& f,
                             double x0, double x1, double y0, double y1,
                             double rel_tol, double abs_floor) {
    constexpr int kOrder = 7;
    auto cell_value = [&](double a, double b, double c, double d) {
        const GaussRule& r = gauss_rule(kOrder);
        const double cx = 0.5 * (a + b), hx = 0.5 * (b - a);
        const double cy = 0.5 * (c + d), hy = 0.5 * (d - c);
        double s = 0.0;
        for (int i = 0; i < kOrder; ++i) {
            double xi = cx + hx * r.nodes[i];
            double row = 0.0;
            for (int j = 0; j < kOrder; ++j)
                row += r.weights[j] * f(xi, cy + hy * r.nodes[j]);
            s += r.weights[i] * row;
        }
        return s * hx * hy;
    };

    struct Cell {
        double a, b, c, d;
        double coarse;
    };
    std::vector<Cell> stack{{x0, x1, y0, y1, cell_value(x0, x1, y0, y1)}};
    double total_abs = std::abs(stack[0].coarse);
    double result = 0.0;
    int budget = 40000;
    while (!stack.empty()) {
        Cell cell = stack.back();
        stack.pop_back();
        double mx = 0.5 * (cell.a + cell.b), my = 0.5 * (cell.c + cell.d);
        double v00 = cell_value(cell.a, mx, cell.c, my);
        double v10 = cell_value(mx, cell.b, cell.c, my);
        double v01 = cell_value(cell.a, mx, my, cell.d);
        double v11 = cell_value(mx, cell.b, my, cell.d);
        double refined = v00 + v10 + v01 + v11;
        total_abs = std::max(total_abs, std::abs(refined));
        double err = std::abs(refined - cell.coarse);
        double scale = std::max(total_abs * rel_tol, abs_floor);
        if (err < std::max(scale, 1e-300) ||
            (cell.b - cell.a) < 1e-13 * (x1 - x0) || --budget < 0) {
            result += refined;
        } else {
            stack.push_back({cell.a, mx, cell.c, my, v00});
            stack.push_back({mx, cell.b, cell.c, my, v10});
            stack.push_back({cell.a, mx, my, cell.d, v01});
            stack.push_back({mx, cell.b, my, cell.d, v11});
        }
    }
    return result;
}

std::vector<DiskNode> disk_rule(Vec2 center, double radius, int n_radial, int n_angular) {
    const GaussRule& gr = gauss_rule(n_radial);
    std::vector<DiskNode> nodes;
    nodes.reserve(static_cast<size_t>(n_radial) * n_angular);
    const double dtheta = 2.0 * pi / n_angular;
    for (int i = 0; i < n_radial; ++i) {
        double r = 0.5 * radius * (1.0 + gr.nodes[i]);
        double wr = 0.5 * radius * gr.weights[i] * r; // polar Jacobian
        for (int j = 0; j < n_angular; ++j) {
            double th = dtheta * j;
            nodes.push_back({{center.x + r * std::cos(th), center.y + r * std::sin(th)},
                             wr * dtheta});
        }
    }
    return nodes;
}

} // namespace porous
