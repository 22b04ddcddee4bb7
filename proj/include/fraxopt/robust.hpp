#pragma once

// Robust counterpart. Each OAR's dose-response ratio is only known to lie in
// [rho_min, rho_max]; a schedule is robust-feasible when it satisfies the
// limit rewritten against the interval midpoint,
//   |sum(d^2) - D_m^2/N_m| * range_m/2 + sum(d) + mean_m*sum(d^2) <= RC_m,
// which is the worst case over the box. The absolute value splits on the sign
// of sum(d^2) - D_m^2/N_m, so order the OARs by their squared-dose budgets
// D_m^2/N_m and cut the y axis into n+1 bands. Inside band k the first k
// sorted OARs sit at rho_max (budget below y, worst case up) and the rest at
// rho_min: a plain planar LP per band, with band edges appended as extra
// half-planes. The overall fixed-N optimum is the best band optimum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fraxopt/lp2.hpp"
#include "fraxopt/model.hpp"
#include "fraxopt/nominal.hpp"

namespace fraxopt {

struct OarOrder {
    // order[i] = original index of the i-th OAR after sorting ascending by
    // squared-dose budget (stable, so equal budgets keep instance order).
    std::vector<std::size_t> order;
};

inline OarOrder sort_oars(const ProblemInstance& inst) {
    OarOrder o;
    o.order.resize(inst.oars.size());
    std::iota(o.order.begin(), o.order.end(), std::size_t{0});
    std::stable_sort(o.order.begin(), o.order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return inst.oars[a].squared_dose_budget() <
                                inst.oars[b].squared_dose_budget();
                     });
    return o;
}

struct SubproblemSpec {
    int k = 0;                    // sorted OARs [0, k) pessimistic high, [k, n) low
    std::vector<double> rho;      // effective ratio per sorted OAR
    std::vector<double> rc;       // effective BED limit per sorted OAR
    std::optional<double> y_lower;
    std::optional<double> y_upper;
    double gamma_k = 0.0;
    double c_k = 0.0;
};

inline SubproblemSpec build_subproblem(const ProblemInstance& inst, const OarOrder& order,
                                       int fractions, int k) {
    const int n = static_cast<int>(inst.oars.size());
    if (k < 0 || k > n) throw std::invalid_argument("subproblem index outside [0, n]");
    if (fractions < 1) throw std::invalid_argument("fractions must be >= 1");

    SubproblemSpec sp;
    sp.k = k;
    sp.rho.reserve(n);
    sp.rc.reserve(n);
    for (int i = 0; i < n; ++i) {
        const OarSpec& o = inst.oars[order.order[i]];
        if (i < k) {
            sp.rho.push_back(o.rho_max);
            sp.rc.push_back(o.rc_upper());
        } else {
            sp.rho.push_back(o.rho_min);
            sp.rc.push_back(o.rc_lower());
        }
    }
    if (k >= 1) sp.y_lower = inst.oars[order.order[k - 1]].squared_dose_budget();
    if (k < n) sp.y_upper = inst.oars[order.order[k]].squared_dose_budget();

    bool first = true;
    for (int i = 0; i < n; ++i) {
        const double g = b_value(sp.rho[i], sp.rc[i], 1);
        const double c = b_value(sp.rho[i], sp.rc[i], fractions);
        if (first) {
            sp.gamma_k = g;
            sp.c_k = c;
            first = false;
        } else {
            sp.gamma_k = std::min(sp.gamma_k, g);
            sp.c_k = std::min(sp.c_k, c);
        }
    }
    return sp;
}

struct SubproblemSolution {
    double x = 0.0;
    double y = 0.0;
    double objective = 0.0;  // alpha*x + beta*y - tau(N)
};

inline std::optional<SubproblemSolution> solve_subproblem(const SubproblemSpec& sp,
                                                          const TumorParams& tumor,
                                                          const ProliferationParams& prolif,
                                                          int fractions) {
    PlanarLp lp;
    lp.objective_x = tumor.alpha0;
    lp.objective_y = tumor.beta0;
    for (std::size_t m = 0; m < sp.rho.size(); ++m)
        lp.constraints.push_back({1.0, sp.rho[m], sp.rc[m]});
    lp.constraints.push_back({-sp.gamma_k, 1.0, 0.0});
    lp.constraints.push_back({sp.c_k, -1.0, 0.0});
    lp.constraints.push_back({-1.0, 0.0, 0.0});
    lp.constraints.push_back({0.0, -1.0, 0.0});
    if (sp.y_lower) lp.constraints.push_back({0.0, -1.0, -*sp.y_lower});
    if (sp.y_upper) lp.constraints.push_back({0.0, 1.0, *sp.y_upper});

    const LpOutcome out = solve_planar_lp(lp);
    if (out.status == LpStatus::Unbounded)
        throw std::runtime_error("robust subproblem is unbounded");
    if (out.status == LpStatus::Infeasible) return std::nullopt;
    return SubproblemSolution{out.x, out.y,
                              out.objective_value - proliferation_penalty(prolif, fractions)};
}

inline SolveReport solve_robust_fixed_n(const ProblemInstance& inst, int fractions) {
    inst.validate();
    if (fractions < 1 || fractions > inst.n_max)
        throw std::invalid_argument("fractions outside [1, n_max]");
    const OarOrder order = sort_oars(inst);
    const int n = static_cast<int>(inst.oars.size());

    SolveReport best;
    bool have = false;
    for (int k = 0; k <= n; ++k) {
        const SubproblemSpec sp = build_subproblem(inst, order, fractions, k);
        const auto sol = solve_subproblem(sp, inst.tumor, inst.proliferation, fractions);
        if (!sol) {
            best.infeasible_subproblems.push_back(k);
            continue;
        }
        // Ties across bands keep the smallest k.
        const double tol = kObjectiveTieTolerance *
            std::max({1.0, std::fabs(sol->objective), std::fabs(best.objective)});
        if (!have || sol->objective > best.objective + tol) {
            best.x_star = sol->x;
            best.y_star = sol->y;
            best.objective = sol->objective;
            best.subproblem_k = k;
            have = true;
        }
    }
    if (!have) throw std::runtime_error("every robust subproblem is infeasible");
    best.schedule = recover_schedule(best.x_star, best.y_star, fractions);
    return best;
}

inline SolveReport solve_robust(const ProblemInstance& inst) {
    inst.validate();
    SolveReport best;
    double best_obj = 0.0;
    bool have = false;
    for (int nf = 1; nf <= inst.n_max; ++nf) {
        SolveReport rep = solve_robust_fixed_n(inst, nf);
        if (detail::accept_candidate(rep.objective, best_obj, have)) {
            best = std::move(rep);
            have = true;
        }
    }
    return best;
}

}  // namespace fraxopt
