#include "porous/harness.hpp"

#include "porous/conformal.hpp"
#include "porous/correction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace porous {

double ExperimentConfig::dist_for(double eps, size_t index) const {
    if (!dist_list.empty()) {
        if (index >= dist_list.size())
            throw std::invalid_argument("config: dist list shorter than eps grid");
        return dist_list[index];
    }
    if (!alpha) throw std::invalid_argument("config: missing key 'alpha' (or 'dist')");
    return std::pow(eps, *alpha);
}

namespace {

struct KeyValue {
    std::string value;
    int line = 0;
    bool used = false;
};

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double to_number(const KeyValue& kv, const std::string& key) {
    try {
        size_t pos = 0;
        double v = std::stod(kv.value, &pos);
        while (pos < kv.value.size() && std::isspace(static_cast<unsigned char>(kv.value[pos])))
            ++pos;
        if (pos != kv.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        fail(kv.line, "malformed number for '" + key + "': " + kv.value);
    }
}

std::vector<double> to_list(const KeyValue& kv, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(kv.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        KeyValue one{item, kv.line, false};
        out.push_back(to_number(one, key));
    }
    if (out.empty()) fail(kv.line, "empty list for '" + key + "'");
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, KeyValue> kv;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        if (!section.empty()) key = section + "." + key;
        kv[key] = {value, lineno, false};
    }

    ExperimentConfig cfg;
    auto take = [&](const std::string& key) -> KeyValue* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    };
    auto number = [&](const std::string& key, double dflt) {
        KeyValue* p = take(key);
        return p ? to_number(*p, key) : dflt;
    };

    KeyValue* exp = take("experiment");
    if (!exp) throw std::invalid_argument("config: missing required key 'experiment'");
    static const std::map<std::string, Experiment> exp_names{
        {"discrepancy_sweep", Experiment::discrepancy_sweep},
        {"cutoff_sweep", Experiment::cutoff_sweep},
        {"gap_area_sweep", Experiment::gap_area_sweep},
        {"flux_contrast", Experiment::flux_contrast},
        {"flow_run", Experiment::flow_run},
        {"verify_all", Experiment::verify_all},
    };
    auto eit = exp_names.find(exp->value);
    if (eit == exp_names.end()) fail(exp->line, "unknown experiment '" + exp->value + "'");
    cfg.experiment = eit->second;

    if (KeyValue* p = take("shape")) {
        static const std::map<std::string, ShapeKind> names{
            {"disk", ShapeKind::disk},
            {"ellipse", ShapeKind::ellipse},
            {"superdisk", ShapeKind::superdisk},
            {"stadium", ShapeKind::stadium},
        };
        auto it = names.find(p->value);
        if (it == names.end()) fail(p->line, "unknown shape '" + p->value + "'");
        cfg.shape_kind = it->second;
    }
    cfg.shape_params.ellipse_b = number("ellipse_b", cfg.shape_params.ellipse_b);
    cfg.shape_params.gamma = number("gamma", cfg.shape_params.gamma);
    cfg.shape_params.rho0 = number("rho0", cfg.shape_params.rho0);

    if (KeyValue* p = take("layout")) {
        static const std::map<std::string, LayoutKind> names{
            {"segment", LayoutKind::segment},
            {"square", LayoutKind::square},
            {"thin_layer", LayoutKind::thin_layer},
        };
        auto it = names.find(p->value);
        if (it == names.end()) fail(p->line, "unknown layout '" + p->value + "'");
        cfg.layout = it->second;
    }
    cfg.mu = number("mu", cfg.mu);

    if (KeyValue* p = take("eps")) cfg.eps_grid = to_list(*p, "eps");
    if (KeyValue* p = take("alpha")) {
        cfg.alpha = to_number(*p, "alpha");
        if (!(*cfg.alpha > 0.0)) fail(p->line, "alpha must be positive");
    }
    if (KeyValue* p = take("dist")) cfg.dist_list = to_list(*p, "dist");
    cfg.n_modes = static_cast<int>(number("n_modes", cfg.n_modes));

    cfg.source_center.x = number("source.x", cfg.source_center.x);
    cfg.source_center.y = number("source.y", cfg.source_center.y);
    cfg.source_radius = number("source.radius", cfg.source_radius);
    cfg.source_amplitude = number("source.amplitude", cfg.source_amplitude);

    cfg.panels = static_cast<int>(number("solver.panels", cfg.panels));
    cfg.min_panel_arc = number("solver.min_panel_arc", cfg.min_panel_arc);
    cfg.delta = number("solver.delta", cfg.delta);
    cfg.dt = number("solver.dt", cfg.dt);
    cfg.steps = static_cast<int>(number("solver.steps", cfg.steps));
    cfg.circulation_every = static_cast<int>(number("solver.circulation_every",
                                                    cfg.circulation_every));
    cfg.pair_gamma = number("flow.pair_gamma", cfg.pair_gamma);
    cfg.pair_half_gap = number("flow.pair_half_gap", cfg.pair_half_gap);
    cfg.pair_height = number("flow.pair_height", cfg.pair_height);
    cfg.gate_y = number("flow.gate_y", cfg.gate_y);
    cfg.gate_x0 = number("flow.gate_x0", cfg.gate_x0);
    cfg.gate_x1 = number("flow.gate_x1", cfg.gate_x1);
    cfg.gate_quad = static_cast<int>(number("flow.gate_quad", cfg.gate_quad));
    cfg.center_on_wall = number("flow.center_on_wall", cfg.center_on_wall ? 1.0 : 0.0) != 0.0;
    cfg.imp_alpha = number("flow.imp_alpha", cfg.imp_alpha);
    cfg.perm_alpha = number("flow.perm_alpha", cfg.perm_alpha);

    if (KeyValue* p = take("out")) cfg.out_dir = p->value;
    cfg.seed = static_cast<std::uint64_t>(number("seed", 1.0));
    cfg.threads = static_cast<int>(number("threads", 1.0));

    for (const auto& [key, val] : kv)
        if (!val.used) fail(val.line, "unknown key '" + key + "'");

    // cross-field validation
    const bool needs_grid = cfg.experiment == Experiment::discrepancy_sweep ||
                            cfg.experiment == Experiment::cutoff_sweep ||
                            cfg.experiment == Experiment::gap_area_sweep;
    if (needs_grid) {
        if (cfg.eps_grid.empty())
            throw std::invalid_argument("config: missing required key 'eps'");
        for (size_t i = 0; i + 1 < cfg.eps_grid.size(); ++i)
            if (!(cfg.eps_grid[i] > cfg.eps_grid[i + 1]))
                throw std::invalid_argument("config: eps grid must be strictly decreasing");
        if (!cfg.alpha && cfg.dist_list.empty())
            throw std::invalid_argument("config: missing required key 'alpha' (or 'dist')");
    }
    if ((cfg.experiment == Experiment::flux_contrast ||
         cfg.experiment == Experiment::flow_run) &&
        cfg.eps_grid.empty())
        throw std::invalid_argument("config: missing required key 'eps'");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string csv_string(const Table& table) {
    std::string out;
    for (size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    char buf[64];
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    out << csv_string(table);
    if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

SlopeFit fit_slope(const Table& table, int x_col, int y_col) {
    std::vector<double> lx, ly;
    for (const auto& row : table.rows) {
        double x = row.at(x_col), y = row.at(y_col);
        if (!(x > 0.0) || !(y > 0.0))
            throw std::invalid_argument("fit_slope: nonpositive data in log-log fit");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    if (lx.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 rows");
    double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    SlopeFit fit;
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, mean = sy / n;
    for (size_t i = 0; i < lx.size(); ++i) {
        double pred = fit.intercept + fit.slope * lx[i];
        ss_res += (ly[i] - pred) * (ly[i] - pred);
        ss_tot += (ly[i] - mean) * (ly[i] - mean);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

double predicted_rate(LayoutKind kind, double gamma, double eps, double dist, double mu) {
    if (kind == LayoutKind::square) return eps / dist;
    double expo = std::isfinite(gamma) ? gamma / (2.0 * (gamma + 1.0)) : 0.5;
    double rows = kind == LayoutKind::thin_layer ? std::pow(eps, -0.5 * mu) : 1.0;
    return rows * std::sqrt(eps) * (1.0 + std::pow(eps / dist, expo));
}

double predicted_grad_norm(double gamma, double eps, double dist) {
    double expo = std::isfinite(gamma) ? gamma / (2.0 * (gamma + 1.0)) : 0.5;
    return 1.0 + std::pow(eps / dist, expo);
}

namespace {

SourceVorticity config_source(const ExperimentConfig& cfg) {
    return SourceVorticity::circular_patch(cfg.source_center, cfg.source_radius,
                                           cfg.source_amplitude);
}

Table sweep_discrepancy(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"eps", "dist", "n_incl", "discrepancy", "predicted_rate", "ratio"};
    InclusionShape shape = make_shape(cfg.shape_kind, cfg.shape_params);
    ConformalMap map = build_map(shape, cfg.n_modes);
    SourceVorticity src = config_source(cfg);

    t.rows.push_back({cfg.eps_grid.front(), cfg.dist_for(cfg.eps_grid.front(), 0), 0.0,
                      0.0, 0.0, 0.0}); // zero-inclusion control
    for (size_t i = 0; i < cfg.eps_grid.size(); ++i) {
        double eps = cfg.eps_grid[i];
        double d = cfg.dist_for(eps, i);
        PorousLayout lay = make_layout(shape, eps, d, cfg.layout, cfg.mu);
        CutoffKind ck = cfg.layout == LayoutKind::square ? CutoffKind::square_case
                                                         : CutoffKind::segment_case;
        CutoffFamily cf = build_cutoff(ck, eps, d, shape);
        CorrectionField field(lay, map, cf, src);
        double disc = field.discrepancy_l2(cfg.threads);
        double rate = predicted_rate(cfg.layout, shape.gamma, eps, d, cfg.mu);
        t.rows.push_back({eps, d, static_cast<double>(lay.centers.size()), disc, rate,
                          disc / rate});
    }
    return t;
}

Table sweep_cutoff(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"eps", "dist", "l2_norm", "l2_bound", "grad_l2", "grad_pred", "grad_ratio"};
    InclusionShape shape = make_shape(cfg.shape_kind, cfg.shape_params);
    for (size_t i = 0; i < cfg.eps_grid.size(); ++i) {
        double eps = cfg.eps_grid[i];
        double d = cfg.dist_for(eps, i);
        CutoffFamily cf = build_cutoff(CutoffKind::segment_case, eps, d, shape);
        CutoffNorms norms = cutoff_norms(cf);
        double bound = std::sqrt(2.0 * eps * (eps + d));
        double pred = predicted_grad_norm(shape.gamma, eps, d);
        t.rows.push_back({eps, d, norms.l2, bound, norms.grad_l2, pred,
                          norms.grad_l2 / pred});
    }
    return t;
}

Table sweep_gap_area(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"eps", "dist", "s_opt", "area", "area_per_ds", "bound"};
    InclusionShape shape = make_shape(cfg.shape_kind, cfg.shape_params);
    for (size_t i = 0; i < cfg.eps_grid.size(); ++i) {
        double eps = cfg.eps_grid[i];
        double d = cfg.dist_for(eps, i);
        double s = optimal_strip(shape, eps, d);
        double area = gap_area(shape, eps, d, s);
        double bound = eps * std::pow(s, (std::isfinite(shape.gamma) ? shape.gamma : 1.0) + 2.0) +
                       d * s;
        t.rows.push_back({eps, d, s, area, area / (d * s), bound});
    }
    return t;
}

} // namespace

Table run_sweep(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case Experiment::discrepancy_sweep: return sweep_discrepancy(cfg);
    case Experiment::cutoff_sweep: return sweep_cutoff(cfg);
    case Experiment::gap_area_sweep: return sweep_gap_area(cfg);
    default:
        throw std::invalid_argument("run_sweep: config does not describe a sweep experiment");
    }
}

FlowResult run_flow(const ExperimentConfig& cfg) {
    if (cfg.eps_grid.empty()) throw std::invalid_argument("run_flow: missing eps");
    const double eps = cfg.eps_grid.front();

    PanelSystem panels;
    double dist = 0.0;
    bool has_wall = cfg.alpha.has_value() || !cfg.dist_list.empty();
    if (has_wall) {
        dist = cfg.dist_for(eps, 0);
        InclusionShape shape = make_shape(cfg.shape_kind, cfg.shape_params);
        PorousLayout lay = make_layout(shape, eps, dist, cfg.layout, cfg.mu);
        PanelOptions opt;
        opt.panels_per_obstacle = cfg.panels;
        if (cfg.min_panel_arc > 0.0) {
            // translate the physical arc floor into boundary parameter units
            double speed = 2.0 * pi * lay.half_scale(); // roughly |dx/ds|
            opt.min_param_spacing = cfg.min_panel_arc / speed;
        }
        panels = PanelSystem(lay, opt);
    }

    double delta = cfg.delta > 0.0 ? cfg.delta : (has_wall ? 0.5 * dist : 0.05);
    double xc = 0.5 * (cfg.gate_x0 + cfg.gate_x1);
    double gate_half = 0.5 * (cfg.gate_x1 - cfg.gate_x0);
    if (cfg.center_on_wall && !panels.empty()) {
        const auto& centers = panels.layout().centers;
        xc = 0.5 * (centers.front().x + centers.back().x);
    }
    VortexState state;
    state.blobs.push_back({{xc + cfg.pair_half_gap, cfg.pair_height}, cfg.pair_gamma, delta});
    state.blobs.push_back({{xc - cfg.pair_half_gap, cfg.pair_height}, -cfg.pair_gamma, delta});

    FlowResult res;
    res.series.header = {"step", "time", "gate_flux", "centroid_x", "centroid_y"};
    int n_circ = 0;
    if (cfg.circulation_every > 0 && !panels.empty()) {
        n_circ = panels.n_obstacles();
        for (int k = 0; k < n_circ; ++k)
            res.series.header.push_back("circ_" + std::to_string(k));
    }

    Vec2 ga{xc - gate_half, cfg.gate_y}, gb{xc + gate_half, cfg.gate_y};
    double abs_flux_sum = 0.0;

    auto record = [&](int step) {
        std::vector<double> row;
        row.push_back(step);
        row.push_back(state.time);
        double flux = flux_gate(state, panels, ga, gb, cfg.gate_quad);
        abs_flux_sum += std::abs(flux);
        row.push_back(flux);
        Vec2 centroid{0, 0};
        for (const Blob& b : state.blobs) centroid += b.pos;
        centroid = centroid / static_cast<double>(state.blobs.size());
        row.push_back(centroid.x);
        row.push_back(centroid.y);
        if (n_circ > 0 && (cfg.circulation_every == 0 || step % cfg.circulation_every == 0)) {
            const PorousLayout& lay = panels.layout();
            panels.ensure_solved(state);
            for (int k = 0; k < n_circ; ++k) {
                double r = 0.5 * (lay.eps + lay.dist);
                std::vector<Vec2> loop;
                for (int m = 0; m < 16; ++m) {
                    double th = 2.0 * pi * m / 16;
                    loop.push_back(lay.centers[k] + r * Vec2{std::cos(th), std::sin(th)});
                }
                row.push_back(circulation_loop(state, panels, loop, 96));
            }
        } else {
            for (int k = 0; k < n_circ; ++k) row.push_back(0.0);
        }
        res.series.rows.push_back(std::move(row));
    };

    record(0);
    for (int s = 1; s <= cfg.steps; ++s) {
        state = step_rk4(state, panels, cfg.dt);
        record(s);
    }
    res.mean_abs_flux = abs_flux_sum / (cfg.steps + 1);
    res.push_events = state.push_events;
    return res;
}

} // namespace porous
