#include "porous/verify.hpp"

#include "porous/conformal.hpp"
#include "porous/correction.hpp"
#include "porous/fields.hpp"
#include "porous/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

namespace porous {

namespace {

struct Bundle {
    std::map<std::string, Table> tables;
    // headline numbers shared between the table pass and the criteria
    double kelvin_drift = 0.0;
    double kelvin_gamma_sum = 0.0;
    double flux_control = 0.0, flux_perm = 0.0, flux_imp = 0.0;
    long push_events = 0;
};

double maxmin_ratio(const std::vector<double>& v) {
    double lo = 1e300, hi = 0.0;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return lo > 0.0 ? hi / lo : 1e300;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

ExperimentConfig base_flow_config() {
    // Desk-scale regime-contrast experiment: a vortex pair bearing down on
    // the unit-segment wall, flux measured on a wall-centered gate below it.
    // The compact pair keeps the around-the-tips flow out of the gate; panel
    // grading resolves the near-gap channels.
    ExperimentConfig cfg;
    cfg.experiment = Experiment::flow_run;
    cfg.shape_kind = ShapeKind::disk;
    cfg.layout = LayoutKind::segment;
    cfg.eps_grid = {0.02};
    cfg.panels = 96;
    cfg.min_panel_arc = 2e-5;
    cfg.pair_gamma = 1.0;
    cfg.pair_half_gap = 0.15;
    cfg.pair_height = 0.35;
    cfg.delta = 0.02;
    cfg.dt = 4e-3;
    cfg.steps = 50;
    cfg.gate_y = -0.1;
    cfg.gate_x0 = 0.3;
    cfg.gate_x1 = 0.7;
    cfg.gate_quad = 256;
    cfg.center_on_wall = true;
    return cfg;
}

ExperimentConfig kelvin_config() {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::flow_run;
    cfg.shape_kind = ShapeKind::disk;
    cfg.layout = LayoutKind::segment;
    cfg.eps_grid = {0.1};
    cfg.dist_list = {0.0125};
    cfg.panels = 96;
    cfg.pair_gamma = 1.0;
    cfg.pair_half_gap = 0.1;
    cfg.pair_height = 0.4;
    cfg.delta = 0.00625;
    cfg.dt = 2e-3;
    cfg.steps = 100;
    cfg.circulation_every = 100; // endpoints are what the drift check needs
    cfg.gate_y = -0.08;
    cfg.gate_quad = 128;
    return cfg;
}

// The CSV-producing computations, reused verbatim by the determinism check.
Bundle compute_tables(std::uint64_t seed) {
    (void)seed; // the emitters below are deterministic by construction
    Bundle b;

    // cutoff hard bound sweep, 3x3 in (eps, alpha)
    {
        Table t;
        t.header = {"eps", "alpha", "dist", "l2_norm", "l2_bound"};
        InclusionShape disk = make_shape(ShapeKind::disk);
        for (double eps : {0.1, 0.05, 0.025})
            for (double alpha : {1.5, 2.0, 2.5}) {
                double d = std::pow(eps, alpha);
                CutoffNorms n =
                    cutoff_norms(build_cutoff(CutoffKind::segment_case, eps, d, disk));
                t.rows.push_back({eps, alpha, d, n.l2, std::sqrt(2.0 * eps * (eps + d))});
            }
        b.tables["cutoff_bound"] = t;
    }

    // cutoff gradient scaling sweep
    {
        ExperimentConfig cfg;
        cfg.experiment = Experiment::cutoff_sweep;
        cfg.shape_kind = ShapeKind::disk;
        cfg.eps_grid = {0.1, 0.05, 0.025};
        cfg.alpha = 2.5;
        b.tables["cutoff_grad"] = run_sweep(cfg);
    }

    // discrepancy sweeps, square and segment
    {
        ExperimentConfig cfg;
        cfg.experiment = Experiment::discrepancy_sweep;
        cfg.shape_kind = ShapeKind::disk;
        cfg.layout = LayoutKind::square;
        cfg.eps_grid = {0.08, 0.04, 0.02};
        cfg.alpha = 0.5;
        b.tables["discrepancy_square"] = run_sweep(cfg);
        cfg.layout = LayoutKind::segment;
        cfg.alpha = 2.5;
        b.tables["discrepancy_segment"] = run_sweep(cfg);
    }

    // gap areas at the optimal strip, disks at d = eps^3
    {
        ExperimentConfig cfg;
        cfg.experiment = Experiment::gap_area_sweep;
        cfg.shape_kind = ShapeKind::disk;
        cfg.eps_grid = {0.08, 0.04, 0.02};
        cfg.alpha = 3.0;
        b.tables["gap_area"] = run_sweep(cfg);
    }

    // Kelvin run over a 9-inclusion wall
    {
        ExperimentConfig cfg = kelvin_config();
        FlowResult res = run_flow(cfg);
        b.tables["kelvin_flow"] = res.series;
        const Table& t = res.series;
        size_t ncols = t.header.size();
        double drift = 0.0;
        for (size_t c = 5; c < ncols; ++c)
            drift = std::max(drift, std::abs(t.rows.back().at(c) - t.rows.front().at(c)));
        b.kelvin_drift = drift;
        b.kelvin_gamma_sum = 2.0 * cfg.pair_gamma;
    }

    // regime contrast: control, permeable, impermeable
    {
        ExperimentConfig cfg = base_flow_config();
        FlowResult control = run_flow(cfg); // no alpha: no obstacles
        cfg.alpha = cfg.perm_alpha;
        FlowResult perm = run_flow(cfg);
        cfg.alpha = cfg.imp_alpha;
        FlowResult imp = run_flow(cfg);
        b.tables["flux_control"] = control.series;
        b.tables["flux_permeable"] = perm.series;
        b.tables["flux_impermeable"] = imp.series;
        b.flux_control = control.mean_abs_flux;
        b.flux_perm = perm.mean_abs_flux;
        b.flux_imp = imp.mean_abs_flux;
        b.push_events = control.push_events + perm.push_events + imp.push_events;
    }
    return b;
}

} // namespace

AcceptanceReport run_acceptance_report(const VerifyOptions& opt) {
    AcceptanceReport report;
    std::vector<CriterionResult>& out = report.criteria;
    std::mt19937_64 rng(opt.seed);
    auto push = [&](int id, std::string name, double measured, double threshold, bool pass,
                    std::string detail = "") {
        out.push_back({id, std::move(name), pass, measured, threshold, std::move(detail)});
    };
    // a crashing criterion is reported as failed, not fatal
    auto guarded = [&](int id, const char* name, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            push(id, name, 1e300, 0.0, false, std::string("exception: ") + e.what());
        }
    };

    guarded(1, "green boundary-zero", [&] {
        auto boundary_green_max = [&](const InclusionShape& sh, const ConformalMap& map) {
            std::uniform_real_distribution<double> rad(1.5, 4.0), ang(0.0, 2.0 * pi);
            std::vector<Vec2> sources;
            for (int k = 0; k < 64; ++k) {
                double r = rad(rng), a = ang(rng);
                sources.push_back({r * std::cos(a), r * std::sin(a)});
            }
            double worst = 0.0;
            for (int i = 0; i < 512; ++i) {
                Vec2 x = sh.boundary((i + 0.5) / 512.0);
                for (const Vec2& y : sources)
                    worst = std::max(worst, std::abs(green(map, x, y)));
            }
            return worst;
        };
        InclusionShape disk = make_shape(ShapeKind::disk);
        InclusionShape ell = make_shape(ShapeKind::ellipse, {.ellipse_b = 0.5});
        double analytic = std::max(boundary_green_max(disk, build_map(disk)),
                                   boundary_green_max(ell, build_map(ell)));
        InclusionShape sup = make_shape(ShapeKind::superdisk, {.gamma = 2.0});
        ConformalMap sup_map = build_map(sup, 512);
        double laurent = boundary_green_max(sup, sup_map);
        bool pass = analytic <= 1e-12 && laurent <= 1e-8;
        push(1, "green boundary-zero", std::max(analytic, laurent), 1e-8, pass,
             "analytic=" + fmt(analytic) + " laurent=" + fmt(laurent) +
                 " fit_residual=" + fmt(sup_map.fit_residual));
    });

    guarded(2, "exterior tangency + zero circulation", [&] {
        InclusionShape disk = make_shape(ShapeKind::disk);
        ConformalMap map = build_map(disk);
        SourceVorticity f = SourceVorticity::circular_patch({3.0, 0.0}, 0.25, 1.0);
        double tang = 0.0;
        for (int i = 0; i < 256; ++i) {
            double th = 2.0 * pi * (i + 0.5) / 256.0;
            Vec2 n{std::cos(th), std::sin(th)};
            tang = std::max(tang, std::abs(biot_savart_exterior(map, f, n).dot(n)));
        }
        double circ = integrate_adaptive(
            [&](double th) {
                Vec2 x{1.5 * std::cos(th), 1.5 * std::sin(th)};
                Vec2 t{-std::sin(th), std::cos(th)};
                return biot_savart_exterior(map, f, x).dot(t) * 1.5;
            },
            0.0, 2.0 * pi, 1e-10, 1e-12);
        bool pass = tang <= 1e-8 && std::abs(circ) <= 1e-8;
        push(2, "exterior tangency + zero circulation", std::max(tang, std::abs(circ)),
             1e-8, pass, "max|u.n|=" + fmt(tang) + " circ=" + fmt(circ));
    });

    guarded(3, "image-system equivalence (disk)", [&] {
        InclusionShape disk = make_shape(ShapeKind::disk);
        ConformalMap map = build_map(disk);
        SourceVorticity f = SourceVorticity::circular_patch({3.0, 0.0}, 0.25, 1.0);
        auto oracle_nodes = disk_rule({3.0, 0.0}, 0.25, 20, 64);
        auto oracle = [&](Vec2 x) {
            Vec2 u{0, 0};
            for (const auto& n : oracle_nodes) {
                Vec2 d1 = x - n.pos;
                Vec2 ystar = reflect(n.pos);
                Vec2 d2 = x - ystar;
                u += n.w * (d1.perp() / d1.norm2() - d2.perp() / d2.norm2() +
                            x.perp() / x.norm2());
            }
            return u / (2.0 * pi);
        };
        double worst = 0.0;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                Vec2 x{-2.2 + 4.4 * i / 19.0, -2.2 + 4.4 * j / 19.0};
                if (x.norm() < 1.1) continue;
                Vec2 a = biot_savart_exterior(map, f, x);
                Vec2 b = oracle(x);
                worst = std::max(worst, (a - b).norm() / std::max(b.norm(), 1e-12));
            }
        push(3, "image-system equivalence (disk)", worst, 1e-6, worst <= 1e-6);
    });

    guarded(4, "circular-patch velocity vs closed form", [&] {
        SourceVorticity f = SourceVorticity::circular_patch({0.3, -0.2}, 0.8, 1.3);
        std::uniform_real_distribution<double> rad(0.0, 1.6), ang(0.0, 2.0 * pi);
        double worst = 0.0;
        double scale = 0.5 * 1.3 * 0.8; // peak speed of the patch
        for (int k = 0; k < 100; ++k) {
            double r = rad(rng), a = ang(rng);
            Vec2 x = Vec2{0.3, -0.2} + r * Vec2{std::cos(a), std::sin(a)};
            Vec2 u = biot_savart_plane_quadrature(f, x);
            Vec2 v = f.closed_form_velocity(x);
            worst = std::max(worst, (u - v).norm() / std::max(v.norm(), 0.05 * scale));
        }
        push(4, "circular-patch velocity vs closed form", worst, 1e-3, worst <= 1e-3);
    });

    guarded(5, "disk degeneracy w1 = w3 = 0", [&] {
        InclusionShape disk = make_shape(ShapeKind::disk);
        ConformalMap map = build_map(disk);
        SourceVorticity f = SourceVorticity::circular_patch({0.5, 1.5}, 0.25, 1.0);
        double eps = 0.1, d = 0.01;
        PorousLayout lay = make_layout(disk, eps, d, LayoutKind::segment);
        CorrectionField field(lay, map,
                              build_cutoff(CutoffKind::segment_case, eps, d, disk), f);
        std::uniform_real_distribution<double> ui(0.0, 1.0);
        double worst = 0.0;
        int found = 0;
        while (found < 100) {
            Vec2 x{ui(rng), (ui(rng) - 0.5) * 2.0 * eps};
            if (!lay.in_fluid(x)) continue;
            int cell = field.locate_cell(x);
            if (cell < 0) continue;
            auto wt = field.w_terms(cell % lay.n_cols, cell / lay.n_cols, x);
            worst = std::max({worst, std::abs(wt.w1), wt.w3.norm()});
            ++found;
        }
        push(5, "disk degeneracy w1 = w3 = 0", worst, 1e-12, worst <= 1e-12);
    });

    guarded(6, "reconstruction identity (ellipse)", [&] {
        InclusionShape ell = make_shape(ShapeKind::ellipse, {.ellipse_b = 0.5});
        ConformalMap map = build_map(ell);
        SourceVorticity f = SourceVorticity::circular_patch({0.5, 1.5}, 0.25, 1.0);
        double eps = 0.1, d = 0.005;
        PorousLayout lay = make_layout(ell, eps, d, LayoutKind::segment);
        CorrectionField field(lay, map, build_cutoff(CutoffKind::segment_case, eps, d, ell),
                              f);
        std::uniform_real_distribution<double> ui(0.0, 1.0);
        double worst = 0.0;
        int found = 0;
        while (found < 100) {
            Vec2 x{ui(rng), (ui(rng) - 0.5) * 2.0 * eps};
            if (!lay.in_fluid(x)) continue;
            int cell = field.locate_cell(x);
            if (cell < 0) continue;
            Vec2 z = lay.centers[cell];
            Vec2 lhs = biot_savart_plane(f, x) - field.velocity(x);
            auto wt = field.w_terms(cell % lay.n_cols, cell / lay.n_cols, x);
            Vec2 grad = field.cutoff().gradient(x - z);
            double phi = field.cutoff().value(x - z);
            Vec2 rhs = (Vec2{-grad.y, grad.x} * (wt.w1 + wt.w2) + (wt.w3 + wt.w4) * phi) /
                       (2.0 * pi);
            worst = std::max(worst, (lhs - rhs).norm());
            ++found;
        }
        push(6, "reconstruction identity (ellipse)", worst, 1e-5, worst <= 1e-5);
    });

    Bundle bundle;
    bool have_bundle = false;
    try {
        bundle = compute_tables(opt.seed);
        have_bundle = true;
    } catch (const std::exception& e) {
        for (int id = 7; id <= 14; ++id)
            push(id, "sweep/flow bundle", 1e300, 0.0, false,
                 std::string("exception: ") + e.what());
    }

    if (have_bundle) {
        guarded(7, "cutoff L2 hard bound", [&] {
            double worst = 0.0;
            for (const auto& row : bundle.tables.at("cutoff_bound").rows)
                worst = std::max(worst, row[3] / row[4]);
            push(7, "cutoff L2 hard bound", worst, 1.0, worst <= 1.0);
        });

        guarded(8, "cutoff gradient scaling", [&] {
            std::vector<double> ratios;
            for (const auto& row : bundle.tables.at("cutoff_grad").rows)
                ratios.push_back(row[6]);
            double mm = maxmin_ratio(ratios);
            push(8, "cutoff gradient scaling", mm, 2.0, mm <= 2.0);
        });

        for (auto [id, key, name] :
             {std::tuple<int, const char*, const char*>{9, "discrepancy_square",
                                                        "discrepancy rate, square layout"},
              std::tuple<int, const char*, const char*>{
                  10, "discrepancy_segment", "discrepancy rate, segment layout"}}) {
            guarded(id, name, [&, id = id, key = key, name = name] {
                const Table& t = bundle.tables.at(key);
                std::vector<double> ratios;
                double control = -1.0;
                for (const auto& row : t.rows) {
                    if (row[2] == 0.0)
                        control = row[3];
                    else
                        ratios.push_back(row[5]);
                }
                double mm = maxmin_ratio(ratios);
                bool pass = mm <= 3.0 && control == 0.0;
                push(id, name, mm, 3.0, pass, "control=" + fmt(control));
            });
        }

        guarded(11, "gap-area scaling + stadium rectangle", [&] {
            const Table& t = bundle.tables.at("gap_area");
            std::vector<double> ratios;
            for (const auto& row : t.rows) ratios.push_back(row[4]);
            double mm = maxmin_ratio(ratios);

            InclusionShape stad = make_shape(ShapeKind::stadium, {.rho0 = 0.5});
            double eps = 0.1, d = 0.01, s = 0.3;
            double area = gap_area(stad, eps, d, s);
            double exact = 8.0 * d * eps * s; // (N-1) d (eps s) with N = 9
            double stadium_err = std::abs(area - exact) / exact;
            bool pass = mm <= 2.0 && stadium_err <= 1e-10;
            push(11, "gap-area scaling + stadium rectangle", mm, 2.0, pass,
                 "stadium_rel_err=" + fmt(stadium_err));
        });

        guarded(12, "Kelvin circulation drift", [&] {
            double thr = 1e-6 * bundle.kelvin_gamma_sum;
            push(12, "Kelvin circulation drift", bundle.kelvin_drift, thr,
                 bundle.kelvin_drift <= thr);
        });

        guarded(13, "regime contrast (flux)", [&] {
            double ratio = bundle.flux_imp / std::max(bundle.flux_perm, 1e-300);
            double control_gap = std::abs(bundle.flux_perm - bundle.flux_control) /
                                 std::max(bundle.flux_control, 1e-300);
            bool ratio_ok = ratio <= 0.2;
            bool gap_ok = control_gap <= 0.25;
            bool pass = ratio_ok && gap_ok && bundle.push_events == 0;
            push(13, "regime contrast (flux)", ratio, 0.2, pass,
                 std::string("imp/perm clause ") + (ratio_ok ? "PASS" : "FAIL") +
                     " (" + fmt(ratio) + " vs 0.2); perm-vs-control clause " +
                     (gap_ok ? "PASS" : "FAIL") + " (" + fmt(control_gap) +
                     " vs 0.25); imp=" + fmt(bundle.flux_imp) +
                     " perm=" + fmt(bundle.flux_perm) +
                     " control=" + fmt(bundle.flux_control) +
                     " pushes=" + std::to_string(bundle.push_events));
        });

        guarded(14, "determinism of emitted CSVs", [&] {
            Bundle again = compute_tables(opt.seed);
            bool same = bundle.tables.size() == again.tables.size();
            std::string first_diff;
            if (same)
                for (const auto& [key, table] : bundle.tables)
                    if (csv_string(table) != csv_string(again.tables.at(key))) {
                        same = false;
                        first_diff = key;
                        break;
                    }
            push(14, "determinism of emitted CSVs", same ? 0.0 : 1.0, 0.0, same,
                 same ? "" : "first diff: " + first_diff);
        });

        if (!opt.out_dir.empty()) {
            std::filesystem::create_directories(opt.out_dir);
            for (const auto& [key, table] : bundle.tables)
                write_csv(table, opt.out_dir + "/" + key + ".csv");
        }

        // fitted log-log slopes against eps as secondary evidence
        auto add_slope = [&](const char* key, int x_col, int y_col) {
            try {
                Table t = bundle.tables.at(key);
                Table positive;
                positive.header = t.header;
                for (const auto& row : t.rows)
                    if (row[2] != 0.0 && row[y_col] > 0.0) // skips the control row
                        positive.rows.push_back(row);
                report.slopes.emplace_back(key, fit_slope(positive, x_col, y_col));
            } catch (const std::exception&) {
                // slope evidence is informational only
            }
        };
        add_slope("discrepancy_segment", 0, 3);
        add_slope("discrepancy_square", 0, 3);
        add_slope("cutoff_grad", 0, 4);
        add_slope("gap_area", 0, 3);
    }

    std::sort(out.begin(), out.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    return report;
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt) {
    return run_acceptance_report(opt).criteria;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

std::string summary_text(const AcceptanceReport& report) {
    std::ostringstream ss;
    for (const auto& r : report.criteria) {
        ss << "criterion " << r.id << " [" << (r.passed ? "PASS" : "FAIL") << "] " << r.name
           << ": measured " << fmt(r.measured) << " vs threshold " << fmt(r.threshold);
        if (!r.detail.empty()) ss << " (" << r.detail << ")";
        ss << "\n";
    }
    if (!report.slopes.empty()) {
        ss << "fitted log-log slopes vs eps (secondary evidence):\n";
        for (const auto& [name, fit] : report.slopes)
            ss << "  " << name << ": slope " << fmt(fit.slope) << ", intercept "
               << fmt(fit.intercept) << ", r2 " << fmt(fit.r2) << "\n";
    }
    ss << (all_passed(report.criteria) ? "all criteria passed\n" : "ACCEPTANCE VIOLATION\n");
    return ss.str();
}

} // namespace porous
