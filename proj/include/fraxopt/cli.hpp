#pragma once

// Command-line front end. Subcommands:
//   solve              one nominal or robust solve, JSON report
//   sweep              price-of-robustness grid, CSV
//   forced-n           nominal vs robust at fixed session counts, CSV
//   infeasibility      violation study (inside / outside the intervals)
//   tumor-uncertainty  robust solves under scaled tumor sensitivity, CSV
//
// Exit codes: 0 success, 1 solver failure, 2 bad configuration or usage.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraxopt/config.hpp"
#include "fraxopt/experiments.hpp"
#include "fraxopt/io.hpp"

namespace fraxopt {

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file '" + path + "'");
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("failed while writing '" + path + "'");
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << text;
    else
        write_text_file(out_path, text);
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args,
                   std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"optimal and robust fractionation schedules under "
                 "dose-response uncertainty"};
    app.require_subcommand(1);

    std::string config_path, out_path, mode = "robust", infeas_mode;
    double delta = 0.0, theta = 0.0, t_double = 0.0;
    int t_lag = 0, forced_n = 0, samples = 5;
    std::size_t random_samples = 0;
    std::uint64_t seed = 0;
    bool paper_rounding = false, joint = false;
    std::vector<double> deltas, gammas = {0.1, 0.2, 0.3, 0.4, 0.5};

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "problem configuration (json)")
            ->required();
        cmd->add_option("--out", out_path, "output file (default: stdout)");
        cmd->add_option("--tlag", t_lag, "override proliferation lag, sessions");
        cmd->add_option("--tdouble", t_double, "override tumor doubling time, days");
        return cmd;
    };

    CLI::App* solve = add_common(app.add_subcommand("solve", "solve one instance"));
    solve->add_option("--mode", mode, "nominal or robust")
        ->check(CLI::IsMember({"nominal", "robust"}));
    solve->add_option("--delta", delta, "relative half-width of the rho intervals")
        ->check(CLI::Range(0.0, 1.0));
    solve->add_option("--theta", theta, "tumor sensitivity pessimism")
        ->check(CLI::Range(0.0, 1.0));
    solve->add_flag("--paper-rounding", paper_rounding, "round doses and prices to 2 decimals");

    CLI::App* sweep = add_common(app.add_subcommand("sweep", "price-of-robustness grid"));
    sweep->add_flag("--paper-rounding", paper_rounding);

    CLI::App* forced = add_common(
        app.add_subcommand("forced-n", "nominal vs robust at fixed session counts"));
    forced->add_option("--n", forced_n, "session count (omit for the full 1..n_max curve)");
    forced->add_option("--delta", delta)->check(CLI::Range(0.0, 1.0));

    CLI::App* infeas = add_common(app.add_subcommand("infeasibility", "violation study"));
    infeas->add_option("--mode", infeas_mode, "inside or outside")
        ->required()
        ->check(CLI::IsMember({"inside", "outside"}));
    infeas->add_option("--deltas", deltas, "uncertainty levels (default: config grid)");
    infeas->add_option("--samples", samples, "grid points per oar (inside mode)");
    infeas->add_option("--random-samples", random_samples,
                       "sample the box instead of gridding it (inside mode)");
    infeas->add_option("--seed", seed, "rng seed for --random-samples");
    infeas->add_option("--gammas", gammas, "overshoot margins (outside mode)");
    infeas->add_flag("--joint", joint, "perturb all oars together (outside mode)");

    CLI::App* tumor = add_common(
        app.add_subcommand("tumor-uncertainty", "robust solves with scaled tumor sensitivity"));
    tumor->add_flag("--paper-rounding", paper_rounding);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("fraxopt");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        ProblemInstance inst = cfg.instance;
        auto apply_overrides = [&](CLI::App* cmd) {
            if (cmd->count("--tlag")) inst.proliferation.t_lag = t_lag;
            if (cmd->count("--tdouble")) inst.proliferation.t_double = t_double;
            inst.proliferation.validate();
        };

        if (app.got_subcommand(solve)) {
            apply_overrides(solve);
            if (theta > 0.0) inst = with_tumor_scaling(inst, theta);
            inst = with_symmetric_uncertainty(inst, delta);
            const SolveReport rep = mode == "robust" ? solve_robust(inst) : solve_nominal(inst);
            const auto j = solve_report_to_json(inst, rep, mode, delta, theta, paper_rounding);
            detail::emit(j.dump(2) + "\n", out_path, out);
            if (!out_path.empty())
                out << "n_star=" << rep.schedule.fractions
                    << " dose_q=" << format_significant(schedule_q(rep.schedule))
                    << " dose_p=" << format_significant(schedule_p(rep.schedule))
                    << " objective=" << format_significant(rep.objective) << '\n';
        } else if (app.got_subcommand(sweep)) {
            apply_overrides(sweep);
            const auto cells = run_price_sweep(inst, cfg.grid);
            detail::emit(write_sweep_csv(cells, paper_rounding), out_path, out);
        } else if (app.got_subcommand(forced)) {
            apply_overrides(forced);
            inst = with_symmetric_uncertainty(inst, delta);
            std::vector<ForcedNResult> rows;
            if (forced->count("--n")) {
                rows.push_back(run_forced_n(inst, forced_n));
            } else {
                for (int n = 1; n <= inst.n_max; ++n) rows.push_back(run_forced_n(inst, n));
            }
            detail::emit(write_forced_n_csv(rows), out_path, out);
        } else if (app.got_subcommand(infeas)) {
            apply_overrides(infeas);
            if (deltas.empty()) deltas = cfg.grid.delta_values;
            const InfeasibilityStudy study =
                infeas_mode == "inside"
                    ? run_infeasibility_inside(inst, deltas, samples, 1000000,
                                               random_samples, seed)
                    : run_infeasibility_outside(inst, deltas, gammas, joint);
            if (!out_path.empty())
                detail::write_text_file(out_path, write_infeasibility_csv(study));
            out << summary_to_json(study).dump(2) << '\n';
        } else if (app.got_subcommand(tumor)) {
            apply_overrides(tumor);
            const auto cells = run_tumor_uncertainty(inst, cfg.grid);
            detail::emit(write_sweep_csv(cells, paper_rounding), out_path, out);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace fraxopt
