#pragma once

// Experiment drivers: the price-of-robustness sweep over proliferation and
// uncertainty settings, forced-N comparisons, tumor-parameter pessimism, and
// the two violation studies (realized ratios inside the assumed intervals,
// and outside them).

#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fraxopt/model.hpp"
#include "fraxopt/nominal.hpp"
#include "fraxopt/robust.hpp"
#include "fraxopt/stats.hpp"

namespace fraxopt {

inline ProblemInstance with_proliferation(ProblemInstance inst, int t_lag, double t_double) {
    inst.proliferation = {t_lag, t_double};
    inst.proliferation.validate();
    return inst;
}

// Symmetric relative intervals [(1-delta)*rho, (1+delta)*rho] on every OAR.
inline ProblemInstance with_symmetric_uncertainty(ProblemInstance inst, double delta) {
    if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("delta must lie in [0, 1]");
    for (auto& o : inst.oars) {
        o.rho_min = (1.0 - delta) * o.rho_nominal;
        o.rho_max = (1.0 + delta) * o.rho_nominal;
    }
    return inst;
}

// Pessimistic tumor sensitivity: both parameters shrunk by the factor
// (1 - theta), which also covers proportional doubling-time pessimism.
inline ProblemInstance with_tumor_scaling(ProblemInstance inst, double theta) {
    if (theta < 0.0 || theta >= 1.0) throw std::invalid_argument("theta must lie in [0, 1)");
    inst.tumor.alpha0 *= (1.0 - theta);
    inst.tumor.beta0 *= (1.0 - theta);
    return inst;
}

inline int thread_budget(std::size_t work_items) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("FRAXOPT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) n = static_cast<int>(v);
    }
    if (work_items < 1) work_items = 1;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), work_items));
}

// Runs fn(0..count-1), possibly on several threads. Results must be written
// to per-index slots so the outcome is independent of scheduling.
template <typename Fn>
inline void parallel_for_indexed(std::size_t count, Fn&& fn) {
    const int workers = thread_budget(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

struct SweepGrid {
    std::vector<int> t_lag_values;
    std::vector<double> t_double_values;
    std::vector<double> delta_values;
    std::vector<double> theta_values;  // only the tumor-uncertainty study reads these

    void validate() const {
        if (t_lag_values.empty() || t_double_values.empty() || delta_values.empty())
            throw std::invalid_argument("sweep grid axes must be nonempty");
        for (int l : t_lag_values)
            if (l < 0) throw std::invalid_argument("grid t_lag must be nonnegative");
        for (double t : t_double_values)
            if (!(t > 0.0)) throw std::invalid_argument("grid t_double must be positive");
        for (double d : delta_values)
            if (d < 0.0 || d > 1.0) throw std::invalid_argument("grid delta must lie in [0, 1]");
        for (double th : theta_values)
            if (th < 0.0 || th >= 1.0) throw std::invalid_argument("grid theta must lie in [0, 1)");
    }

    static SweepGrid defaults() {
        SweepGrid g;
        g.t_lag_values = {7, 14, 21, 28, 35};
        g.t_double_values = {2, 8, 10, 20, 40, 50, 80, 100};
        for (int i = 1; i <= 10; ++i) g.delta_values.push_back(i / 10.0);
        for (int i = 1; i <= 9; ++i) g.theta_values.push_back(i / 10.0);
        return g;
    }
};

struct SweepCell {
    int t_lag = 0;
    double t_double = 0.0;
    double delta = 0.0;
    double theta = 0.0;
    SolveReport nominal_report;
    SolveReport robust_report;
    double price_pct = 0.0;
};

inline double price_of_robustness_pct(double nominal_obj, double robust_obj) {
    if (!(nominal_obj > 0.0)) return 0.0;
    const double p = (nominal_obj - robust_obj) / nominal_obj * 100.0;
    // Differences below the solver's tie tolerance are noise, not price.
    return std::fabs(p) < 1e-9 ? 0.0 : p;
}

// One cell per (t_lag, t_double, delta), iterated in that nesting order.
// The nominal solve does not depend on delta, so it is shared down each
// (t_lag, t_double) column.
inline std::vector<SweepCell> run_price_sweep(const ProblemInstance& base, const SweepGrid& grid) {
    grid.validate();
    const std::size_t nl = grid.t_lag_values.size();
    const std::size_t nt = grid.t_double_values.size();
    const std::size_t nd = grid.delta_values.size();
    std::vector<SweepCell> cells(nl * nt * nd);

    parallel_for_indexed(nl * nt, [&](std::size_t item) {
        const std::size_t il = item / nt, it = item % nt;
        const ProblemInstance column = with_proliferation(
            base, grid.t_lag_values[il], grid.t_double_values[it]);
        const SolveReport nominal = solve_nominal(column);
        for (std::size_t id = 0; id < nd; ++id) {
            const double delta = grid.delta_values[id];
            SweepCell& cell = cells[(il * nt + it) * nd + id];
            cell.t_lag = grid.t_lag_values[il];
            cell.t_double = grid.t_double_values[it];
            cell.delta = delta;
            cell.nominal_report = nominal;
            cell.robust_report = solve_robust(with_symmetric_uncertainty(column, delta));
            cell.price_pct = price_of_robustness_pct(nominal.objective,
                                                     cell.robust_report.objective);
        }
    });
    return cells;
}

// Same layout with theta innermost; both solves use the scaled tumor
// parameters so the price column still isolates the cost of rho-uncertainty.
inline std::vector<SweepCell> run_tumor_uncertainty(const ProblemInstance& base,
                                                    const SweepGrid& grid) {
    grid.validate();
    if (grid.theta_values.empty())
        throw std::invalid_argument("tumor uncertainty study needs theta values");
    const std::size_t nl = grid.t_lag_values.size();
    const std::size_t nt = grid.t_double_values.size();
    const std::size_t nd = grid.delta_values.size();
    const std::size_t nth = grid.theta_values.size();
    std::vector<SweepCell> cells(nl * nt * nd * nth);

    parallel_for_indexed(nl * nt * nth, [&](std::size_t item) {
        const std::size_t ith = item % nth;
        const std::size_t it = (item / nth) % nt;
        const std::size_t il = item / (nth * nt);
        const double theta = grid.theta_values[ith];
        const ProblemInstance scaled = with_tumor_scaling(
            with_proliferation(base, grid.t_lag_values[il], grid.t_double_values[it]), theta);
        const SolveReport nominal = solve_nominal(scaled);
        for (std::size_t id = 0; id < nd; ++id) {
            SweepCell& cell = cells[((il * nt + it) * nd + id) * nth + ith];
            cell.t_lag = grid.t_lag_values[il];
            cell.t_double = grid.t_double_values[it];
            cell.delta = grid.delta_values[id];
            cell.theta = theta;
            cell.nominal_report = nominal;
            cell.robust_report =
                solve_robust(with_symmetric_uncertainty(scaled, grid.delta_values[id]));
            cell.price_pct = price_of_robustness_pct(nominal.objective,
                                                     cell.robust_report.objective);
        }
    });
    return cells;
}

struct ForcedNResult {
    int fractions = 0;
    SolveReport nominal_report;
    SolveReport robust_report;
    double price_pct = 0.0;
};

// Compares nominal and robust at one prescribed session count. The instance
// must already carry its uncertainty intervals.
inline ForcedNResult run_forced_n(const ProblemInstance& inst, int fractions) {
    ForcedNResult r;
    r.fractions = fractions;
    r.nominal_report = solve_nominal_fixed_n(inst, fractions);
    r.robust_report = solve_robust_fixed_n(inst, fractions);
    r.price_pct = price_of_robustness_pct(r.nominal_report.objective,
                                          r.robust_report.objective);
    return r;
}

enum class InfeasibilityMode { InsideInterval, OutsideInterval };

struct InfeasibilityScenario {
    double delta = 0.0;
    double gamma = 0.0;          // outside mode: how far past the interval
    std::string perturbed;       // outside mode: OAR name or "all"
    std::vector<double> realized_rhos;
    double nominal_violation_pct = 0.0;
    double robust_violation_pct = 0.0;
};

struct ViolationSummary {
    std::size_t scenario_count = 0;
    double fraction_infeasible_nominal = 0.0;
    double fraction_infeasible_robust = 0.0;
    double mean_nominal = 0.0;           // over all scenarios
    double mean_robust = 0.0;
    double mean_positive_nominal = 0.0;  // over violating scenarios only
    double mean_positive_robust = 0.0;
    std::array<double, 3> quartiles_nominal{0.0, 0.0, 0.0};  // positive violations
    std::array<double, 3> quartiles_robust{0.0, 0.0, 0.0};
    PairedTResult t_test;  // H1: nominal violations exceed robust
};

struct InfeasibilityStudy {
    InfeasibilityMode mode = InfeasibilityMode::InsideInterval;
    std::vector<InfeasibilityScenario> scenarios;
    ViolationSummary summary;
    std::vector<std::string> skipped;  // outside mode: dropped nonpositive-rho cases
};

// A violation counts as infeasible above the feasibility tolerance,
// expressed in percent.
inline constexpr double kViolationThresholdPct = 100.0 * kFeasibilityTolerance;

namespace detail {

inline ViolationSummary summarize_violations(const std::vector<InfeasibilityScenario>& sc) {
    ViolationSummary s;
    s.scenario_count = sc.size();
    if (sc.empty()) return s;
    std::vector<double> vn, vr, pn, pr;
    vn.reserve(sc.size());
    vr.reserve(sc.size());
    std::size_t bad_n = 0, bad_r = 0;
    for (const auto& x : sc) {
        vn.push_back(x.nominal_violation_pct);
        vr.push_back(x.robust_violation_pct);
        if (x.nominal_violation_pct > kViolationThresholdPct) {
            ++bad_n;
            pn.push_back(x.nominal_violation_pct);
        }
        if (x.robust_violation_pct > kViolationThresholdPct) {
            ++bad_r;
            pr.push_back(x.robust_violation_pct);
        }
    }
    const double cnt = static_cast<double>(sc.size());
    s.fraction_infeasible_nominal = bad_n / cnt;
    s.fraction_infeasible_robust = bad_r / cnt;
    s.mean_nominal = mean(vn);
    s.mean_robust = mean(vr);
    s.mean_positive_nominal = mean(pn);
    s.mean_positive_robust = mean(pr);
    s.quartiles_nominal = quartiles(pn);
    s.quartiles_robust = quartiles(pr);
    s.t_test = paired_t_test(vn, vr);
    return s;
}

inline double unit_uniform(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Realized ratios drawn from inside the assumed intervals. The default is a
// full grid with samples_per_oar evenly spaced points (endpoints included)
// per OAR, taken as a Cartesian product; random_samples > 0 switches to that
// many uniform box samples per delta instead.
inline InfeasibilityStudy run_infeasibility_inside(const ProblemInstance& base,
                                                   const std::vector<double>& delta_values,
                                                   int samples_per_oar,
                                                   std::size_t max_scenarios = 1000000,
                                                   std::size_t random_samples = 0,
                                                   std::uint64_t seed = 0) {
    base.validate();
    if (samples_per_oar < 2) throw std::invalid_argument("samples_per_oar must be >= 2");
    const std::size_t n_oars = base.oars.size();

    InfeasibilityStudy study;
    study.mode = InfeasibilityMode::InsideInterval;
    const SolveReport nominal = solve_nominal(base);

    if (random_samples == 0) {
        double total = static_cast<double>(delta_values.size());
        for (std::size_t m = 0; m < n_oars; ++m) total *= samples_per_oar;
        if (total > static_cast<double>(max_scenarios))
            throw std::invalid_argument("scenario grid exceeds the configured cap");
    }

    std::mt19937_64 gen(seed);
    for (const double delta : delta_values) {
        const ProblemInstance inst = with_symmetric_uncertainty(base, delta);
        const SolveReport robust = solve_robust(inst);

        auto add_scenario = [&](std::vector<double> rhos) {
            InfeasibilityScenario sc;
            sc.delta = delta;
            sc.nominal_violation_pct =
                check_feasibility(inst, nominal.schedule, rhos).max_violation_pct;
            sc.robust_violation_pct =
                check_feasibility(inst, robust.schedule, rhos).max_violation_pct;
            sc.realized_rhos = std::move(rhos);
            study.scenarios.push_back(std::move(sc));
        };

        if (random_samples > 0) {
            for (std::size_t s = 0; s < random_samples; ++s) {
                std::vector<double> rhos(n_oars);
                for (std::size_t m = 0; m < n_oars; ++m) {
                    const auto& o = inst.oars[m];
                    rhos[m] = o.rho_min + detail::unit_uniform(gen) * (o.rho_max - o.rho_min);
                }
                add_scenario(std::move(rhos));
            }
        } else {
            std::vector<int> idx(n_oars, 0);
            for (;;) {
                std::vector<double> rhos(n_oars);
                for (std::size_t m = 0; m < n_oars; ++m) {
                    const auto& o = inst.oars[m];
                    const double t = idx[m] / static_cast<double>(samples_per_oar - 1);
                    rhos[m] = o.rho_min + t * (o.rho_max - o.rho_min);
                }
                add_scenario(std::move(rhos));
                std::size_t m = 0;
                while (m < n_oars && ++idx[m] == samples_per_oar) idx[m++] = 0;
                if (m == n_oars) break;
            }
        }
    }
    study.summary = detail::summarize_violations(study.scenarios);
    return study;
}

// Realized ratio beyond the assumed interval by a further relative margin
// gamma: one OAR at a time (or all at once with joint = true), on both sides.
// Perturbations that would push rho to zero or below are skipped and logged.
inline InfeasibilityStudy run_infeasibility_outside(const ProblemInstance& base,
                                                    const std::vector<double>& delta_values,
                                                    const std::vector<double>& gamma_values,
                                                    bool joint = false) {
    base.validate();
    for (const double gamma : gamma_values)
        if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    InfeasibilityStudy study;
    study.mode = InfeasibilityMode::OutsideInterval;
    const SolveReport nominal = solve_nominal(base);

    for (const double delta : delta_values) {
        const ProblemInstance inst = with_symmetric_uncertainty(base, delta);
        const SolveReport robust = solve_robust(inst);

        for (const double gamma : gamma_values) {
            for (const double side : {+1.0, -1.0}) {
                const double factor = 1.0 + side * (delta + gamma);

                auto run_case = [&](const std::string& label, std::vector<double> rhos) {
                    for (double r : rhos) {
                        if (r <= 0.0) {
                            study.skipped.push_back(
                                "delta=" + std::to_string(delta) +
                                " gamma=" + std::to_string(gamma) +
                                " oar=" + label + (side > 0 ? " side=+" : " side=-") +
                                " skipped: realized rho <= 0");
                            return;
                        }
                    }
                    InfeasibilityScenario sc;
                    sc.delta = delta;
                    sc.gamma = side * gamma;
                    sc.perturbed = label;
                    sc.nominal_violation_pct =
                        check_feasibility(inst, nominal.schedule, rhos).max_violation_pct;
                    sc.robust_violation_pct =
                        check_feasibility(inst, robust.schedule, rhos).max_violation_pct;
                    sc.realized_rhos = std::move(rhos);
                    study.scenarios.push_back(std::move(sc));
                };

                if (joint) {
                    std::vector<double> rhos;
                    for (const auto& o : inst.oars) rhos.push_back(factor * o.rho_nominal);
                    run_case("all", std::move(rhos));
                } else {
                    for (std::size_t m = 0; m < inst.oars.size(); ++m) {
                        std::vector<double> rhos;
                        for (const auto& o : inst.oars) rhos.push_back(o.rho_nominal);
                        rhos[m] = factor * inst.oars[m].rho_nominal;
                        run_case(inst.oars[m].name, std::move(rhos));
                    }
                }
            }
        }
    }
    study.summary = detail::summarize_violations(study.scenarios);
    return study;
}

}  // namespace fraxopt
