#include "porous/harness.hpp"
#include "porous/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitAcceptance = 3;

porous::ExperimentConfig load(const std::string& path, const std::string& out_dir,
                              std::uint64_t seed, int threads, bool seed_set,
                              bool threads_set) {
    porous::ExperimentConfig cfg = porous::parse_config_file(path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed;
    if (threads_set) cfg.threads = threads;
    return cfg;
}

int do_sweep(const porous::ExperimentConfig& cfg) {
    porous::Table t = porous::run_sweep(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::string path = cfg.out_dir + "/sweep.csv";
    porous::write_csv(t, path);
    std::cout << porous::csv_string(t);
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int do_flow(const porous::ExperimentConfig& cfg) {
    if (cfg.experiment == porous::Experiment::flux_contrast) {
        porous::ExperimentConfig run = cfg;
        run.experiment = porous::Experiment::flow_run;
        run.alpha.reset();
        porous::FlowResult control = porous::run_flow(run);
        run.alpha = cfg.perm_alpha;
        porous::FlowResult perm = porous::run_flow(run);
        run.alpha = cfg.imp_alpha;
        porous::FlowResult imp = porous::run_flow(run);

        std::filesystem::create_directories(cfg.out_dir);
        porous::write_csv(control.series, cfg.out_dir + "/flux_control.csv");
        porous::write_csv(perm.series, cfg.out_dir + "/flux_permeable.csv");
        porous::write_csv(imp.series, cfg.out_dir + "/flux_impermeable.csv");

        porous::Table summary;
        summary.header = {"mean_abs_flux_control", "mean_abs_flux_permeable",
                          "mean_abs_flux_impermeable", "imp_over_perm",
                          "perm_over_control", "push_events"};
        summary.rows.push_back(
            {control.mean_abs_flux, perm.mean_abs_flux, imp.mean_abs_flux,
             imp.mean_abs_flux / std::max(perm.mean_abs_flux, 1e-300),
             perm.mean_abs_flux / std::max(control.mean_abs_flux, 1e-300),
             static_cast<double>(control.push_events + perm.push_events + imp.push_events)});
        porous::write_csv(summary, cfg.out_dir + "/flux_summary.csv");
        std::cout << porous::csv_string(summary);
        return kExitOk;
    }
    porous::FlowResult res = porous::run_flow(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::string path = cfg.out_dir + "/flow.csv";
    porous::write_csv(res.series, path);
    std::cout << "mean |gate flux| " << res.mean_abs_flux << ", push events "
              << res.push_events << "\n";
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int do_verify(const std::string& out_dir, std::uint64_t seed) {
    porous::VerifyOptions opt;
    opt.seed = seed;
    opt.out_dir = out_dir;
    porous::AcceptanceReport report = porous::run_acceptance_report(opt);
    std::string summary = porous::summary_text(report);
    std::cout << summary;

    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir + "/summary.txt", std::ios::binary);
    f << summary;
    return porous::all_passed(report.criteria) ? kExitOk : kExitAcceptance;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"porous-euler: 2D Euler flow in perforated domains"};
    app.require_subcommand(1);
    app.fallthrough(); // accept global options after the subcommand

    std::string config_path, out_dir;
    std::uint64_t seed = 1;
    int threads = 1;
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads");

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("config", config_path, "config file")->required();
    CLI::App* flow = app.add_subcommand("flow", "run a time-dependent flow");
    flow->add_option("config", config_path, "config file")->required();
    CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (app.got_subcommand(verify))
            return do_verify(out_dir.empty() ? "verify_out" : out_dir, seed);

        porous::ExperimentConfig cfg;
        try {
            cfg = load(config_path, out_dir, seed, threads, seed_opt->count() > 0,
                       threads_opt->count() > 0);
        } catch (const std::invalid_argument& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }

        if (app.got_subcommand(sweep)) {
            if (cfg.experiment == porous::Experiment::flux_contrast ||
                cfg.experiment == porous::Experiment::flow_run) {
                std::cerr << "config error: flow experiments belong to the 'flow' command\n";
                return kExitConfig;
            }
            if (cfg.experiment == porous::Experiment::verify_all)
                return do_verify(cfg.out_dir, cfg.seed);
            return do_sweep(cfg);
        }
        if (app.got_subcommand(flow)) {
            if (cfg.experiment != porous::Experiment::flux_contrast &&
                cfg.experiment != porous::Experiment::flow_run) {
                std::cerr << "config error: not a flow experiment\n";
                return kExitConfig;
            }
            return do_flow(cfg);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
