#include "porous/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

using namespace porous;

TEST_CASE("parse_config accepts the canonical sweep") {
    ExperimentConfig cfg = parse_config(
        "experiment = discrepancy_sweep\n"
        "shape = disk\n"
        "layout = segment\n"
        "eps = 0.1,0.05,0.025\n"
        "alpha = 2.5\n");
    CHECK(cfg.experiment == Experiment::discrepancy_sweep);
    CHECK(cfg.shape_kind == ShapeKind::disk);
    CHECK(cfg.layout == LayoutKind::segment);
    CHECK(cfg.eps_grid.size() == 3);
    CHECK(*cfg.alpha == doctest::Approx(2.5));
}

TEST_CASE("parse_config rejects bad input with line numbers") {
    CHECK_THROWS_WITH_AS(parse_config("experiment = discrepancy_sweep\n"
                                      "eps = 0.1,0.05\n"),
                         doctest::Contains("alpha"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = discrepancy_sweep\n"
                                      "eps = 0.1,0.05\n"
                                      "alpha = -1\n"),
                         doctest::Contains("line 3"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = discrepancy_sweep\n"
                                      "bogus_key = 2\n"
                                      "eps = 0.1,0.05\nalpha = 1\n"),
                         doctest::Contains("bogus_key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = discrepancy_sweep\n"
                                      "eps = 0.05,0.1\nalpha = 1\n"),
                         doctest::Contains("decreasing"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = discrepancy_sweep\n"
                                      "eps = 0.1,zebra\nalpha = 1\n"),
                         doctest::Contains("malformed"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("shape = disk\n"), std::invalid_argument);
}

TEST_CASE("parse_config reads sectioned solver keys") {
    ExperimentConfig cfg = parse_config(
        "experiment = flow_run\n"
        "eps = 0.1\n"
        "[solver]\n"
        "panels = 48\n"
        "dt = 0.002\n"
        "steps = 7\n"
        "[flow]\n"
        "pair_gamma = 2.0\n"
        "gate_y = -0.1\n");
    CHECK(cfg.panels == 48);
    CHECK(cfg.dt == doctest::Approx(0.002));
    CHECK(cfg.steps == 7);
    CHECK(cfg.pair_gamma == doctest::Approx(2.0));
    CHECK(cfg.gate_y == doctest::Approx(-0.1));
}

TEST_CASE("fit_slope recovers exact power laws") {
    Table t;
    t.header = {"x", "y"};
    for (double x : {0.5, 1.0, 2.0, 4.0}) t.rows.push_back({x, x});
    SlopeFit f = fit_slope(t, 0, 1);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

    Table t2;
    t2.header = {"x", "y"};
    for (double x : {0.5, 1.0, 2.0, 4.0}) t2.rows.push_back({x, 7.0 * x * x});
    SlopeFit f2 = fit_slope(t2, 0, 1);
    CHECK(f2.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f2.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));

    Table bad;
    bad.header = {"x", "y"};
    bad.rows = {{1.0, 1.0}, {2.0, -1.0}, {3.0, 2.0}};
    CHECK_THROWS_AS(fit_slope(bad, 0, 1), std::invalid_argument);
}

TEST_CASE("fit_slope tolerates multiplicative noise") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    Table t;
    t.header = {"x", "y"};
    for (int i = 0; i < 12; ++i) {
        double x = std::pow(2.0, -i / 2.0);
        t.rows.push_back({x, std::pow(x, 1.5) * (1.0 + noise(rng))});
    }
    SlopeFit f = fit_slope(t, 0, 1);
    CHECK(f.slope > 1.35);
    CHECK(f.slope < 1.65);
}

TEST_CASE("csv writer format") {
    Table t;
    t.header = {"eps", "dist", "n_incl", "discrepancy", "predicted_rate", "ratio"};
    CHECK(csv_string(t) == "eps,dist,n_incl,discrepancy,predicted_rate,ratio\n");
    t.rows.push_back({0.1, 0.25, 9, 1.0 / 3.0, 2.0, 0.5});
    std::string s = csv_string(t);
    CHECK(s.find("0.33333333333333331") != std::string::npos);
    CHECK_THROWS_AS(write_csv(t, "/nonexistent_dir_zz/x.csv"), std::runtime_error);
}

TEST_CASE("cutoff sweep emits stable ratios and is deterministic") {
    ExperimentConfig cfg = parse_config(
        "experiment = cutoff_sweep\n"
        "shape = disk\n"
        "eps = 0.1,0.05\n"
        "alpha = 2.5\n");
    Table a = run_sweep(cfg);
    Table b = run_sweep(cfg);
    CHECK(csv_string(a) == csv_string(b));
    REQUIRE(a.rows.size() == 2);
    for (const auto& row : a.rows) CHECK(row[2] <= row[3]); // hard bound column
}

TEST_CASE("discrepancy sweep leads with the zero-inclusion control row") {
    ExperimentConfig cfg = parse_config(
        "experiment = discrepancy_sweep\n"
        "shape = disk\n"
        "layout = segment\n"
        "eps = 0.1\n"
        "alpha = 2.0\n");
    Table t = run_sweep(cfg);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][2] == 0.0);
    CHECK(t.rows[0][3] == 0.0);
    CHECK(t.rows[1][3] > 0.0);
}

TEST_CASE("gamma = infinity rate exponent becomes 1/2") {
    double r = predicted_rate(LayoutKind::segment,
                              std::numeric_limits<double>::infinity(), 0.01, 1e-3);
    CHECK(r == doctest::Approx(std::sqrt(0.01) * (1.0 + std::sqrt(10.0))));
    CHECK(predicted_grad_norm(std::numeric_limits<double>::infinity(), 0.01, 1e-3) ==
          doctest::Approx(1.0 + std::sqrt(10.0)));
}

TEST_CASE("short flow run is deterministic and conserves blob count") {
    ExperimentConfig cfg = parse_config(
        "experiment = flow_run\n"
        "eps = 0.1\n"
        "[solver]\n"
        "dt = 0.002\n"
        "steps = 5\n"
        "delta = 0.05\n");
    FlowResult a = run_flow(cfg);
    FlowResult b = run_flow(cfg);
    CHECK(csv_string(a.series) == csv_string(b.series));
    CHECK(a.series.rows.size() == 6);
    CHECK(a.push_events == 0);
    CHECK(a.mean_abs_flux > 0.0); // the control pair drives flux through the gate
}

TEST_CASE("discrepancy ratios stay bounded across the alpha variants") {
    for (auto [layout, alpha] :
         {std::pair{LayoutKind::square, 0.75}, std::pair{LayoutKind::segment, 2.0}}) {
        ExperimentConfig cfg;
        cfg.experiment = Experiment::discrepancy_sweep;
        cfg.shape_kind = ShapeKind::disk;
        cfg.layout = layout;
        cfg.eps_grid = {0.08, 0.04};
        cfg.alpha = alpha;
        Table t = run_sweep(cfg);
        double lo = 1e300, hi = 0.0;
        for (const auto& row : t.rows) {
            if (row[2] == 0.0) continue;
            lo = std::min(lo, row[5]);
            hi = std::max(hi, row[5]);
        }
        CHECK(hi / lo <= 3.0);
    }
}

TEST_CASE("thin layer discrepancy tracks the mixed-rate prediction") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::discrepancy_sweep;
    cfg.shape_kind = ShapeKind::disk;
    cfg.layout = LayoutKind::thin_layer;
    cfg.mu = 0.5;
    cfg.eps_grid = {0.08, 0.04};
    cfg.alpha = 2.5;
    Table t = run_sweep(cfg);
    double lo = 1e300, hi = 0.0;
    for (const auto& row : t.rows) {
        if (row[2] == 0.0) continue;
        CHECK(row[3] > 0.0);
        lo = std::min(lo, row[5]);
        hi = std::max(hi, row[5]);
    }
    CHECK(hi / lo <= 3.0);
    // the predicted rate carries the extra row factor eps^(-mu/2)
    CHECK(predicted_rate(LayoutKind::thin_layer, 1.0, 0.04, 1e-3, 0.5) ==
          doctest::Approx(std::pow(0.04, -0.25) * predicted_rate(LayoutKind::segment, 1.0,
                                                                 0.04, 1e-3)));
}
