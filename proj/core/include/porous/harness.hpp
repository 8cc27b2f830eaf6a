#pragma once

#include "porous/geometry.hpp"
#include "porous/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace porous {

enum class Experiment {
    discrepancy_sweep,
    cutoff_sweep,
    gap_area_sweep,
    flux_contrast,
    flow_run,
    verify_all,
};

// Parsed and validated experiment description. The config text is
// line-oriented `key = value` with optional `[section]` headers; sectioned
// keys are addressed as `section.key`.
struct ExperimentConfig {
    Experiment experiment = Experiment::verify_all;

    ShapeKind shape_kind = ShapeKind::disk;
    ShapeParams shape_params{};
    LayoutKind layout = LayoutKind::segment;
    double mu = 0.0;

    std::vector<double> eps_grid;
    std::optional<double> alpha;          // d = eps^alpha
    std::vector<double> dist_list;        // explicit alternative to alpha
    int n_modes = 64;

    // source used by field experiments
    Vec2 source_center{0.5, 1.5};
    double source_radius = 0.25;
    double source_amplitude = 1.0;

    // solver parameters
    int panels = 64;
    double min_panel_arc = 0.0;           // physical clustering floor, 0 = uniform
    double delta = 0.0;                   // blob core; 0 = 0.5 * dist default
    double dt = 1e-3;
    int steps = 100;
    int circulation_every = 0;            // 0 = skip circulation columns
    double pair_gamma = 1.0;
    double pair_half_gap = 0.1;
    double pair_height = 0.3;
    double gate_y = -0.05;
    double gate_x0 = 0.0, gate_x1 = 1.0;
    int gate_quad = 256;
    bool center_on_wall = false; // recenter pair and gate on the wall midpoint
    double imp_alpha = 4.0;               // flux_contrast impermeable exponent
    double perm_alpha = 2.0;              // flux_contrast permeable exponent

    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;

    double dist_for(double eps, size_t index) const;
};

// Throws std::invalid_argument with a line-numbered message on bad input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// RFC-4180-style CSV, '.' decimal separator, 17 significant digits.
void write_csv(const Table& table, const std::string& path);
std::string csv_string(const Table& table);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares on (ln x, ln y); rejects nonpositive data.
SlopeFit fit_slope(const Table& table, int x_col, int y_col);

// One row per epsilon: measured quantity, predicted rate, ratio. A zero
// inclusion control row leads the table for discrepancy sweeps.
Table run_sweep(const ExperimentConfig& cfg);

struct FlowResult {
    Table series;
    double mean_abs_flux = 0.0;
    long push_events = 0;
};

FlowResult run_flow(const ExperimentConfig& cfg);

// Predicted discrepancy rate of the correction for the given layout; mu is
// the thin-layer row exponent.
double predicted_rate(LayoutKind kind, double gamma, double eps, double dist,
                      double mu = 0.0);
// Predicted cutoff gradient norm growth 1 + (eps/d)^(gamma/(2(gamma+1))).
double predicted_grad_norm(double gamma, double eps, double dist);

} // namespace porous
