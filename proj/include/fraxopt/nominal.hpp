#pragma once

// Fixed-N fractionation reduces to a planar LP in the aggregate variables
// x = sum(d) and y = sum(d^2). A dose vector with N entries realizes (x, y)
// iff sqrt(y) <= x <= sqrt(N*y); combined with the OAR limits this envelope
// can be replaced by two linear cuts, so the feasible aggregates are exactly
//   x + rho_m*y <= BED_m          (one per OAR)
//   y <= gamma*x,  c*x <= y       (representability envelope)
// where gamma = min_m b_m(1) and c = min_m b_m(N); b_m(N) is the equal dosage
// per session that exactly exhausts OAR m's budget in N sessions. Afterwards
// any optimal (x, y) is realized by a schedule (q, p, p, ..., p).

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fraxopt/lp2.hpp"
#include "fraxopt/model.hpp"

namespace fraxopt {

// Relative window inside which two candidate objectives count as tied.
inline constexpr double kObjectiveTieTolerance = 1e-11;

// Equal dosage per session that meets rho*b^2 + b = bed/N with equality.
// Written without subtractive cancellation so rho = 0 gives the exact
// limit bed/N.
inline double b_value(double rho, double bed, int fractions) {
    if (fractions < 1) throw std::invalid_argument("fractions must be >= 1");
    if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
    if (bed < 0.0) throw std::invalid_argument("bed must be nonnegative");
    const double per_session = bed / fractions;
    return 2.0 * per_session / (1.0 + std::sqrt(1.0 + 4.0 * rho * per_session));
}

struct NominalLpParams {
    double gamma_star = 0.0;   // slope of the single-dosage envelope y <= gamma*x
    double c_star = 0.0;       // slope of the equal-dosage envelope y >= c*x
    std::vector<double> bed;   // per-oar BED limits at nominal rho
    std::vector<double> rho;   // per-oar nominal ratios
};

inline NominalLpParams nominal_lp_params(const ProblemInstance& inst, int fractions) {
    NominalLpParams p;
    p.bed.reserve(inst.oars.size());
    p.rho.reserve(inst.oars.size());
    bool first = true;
    for (const auto& o : inst.oars) {
        const double bed = o.bed_limit(o.rho_nominal);
        p.bed.push_back(bed);
        p.rho.push_back(o.rho_nominal);
        const double g = b_value(o.rho_nominal, bed, 1);
        const double c = b_value(o.rho_nominal, bed, fractions);
        if (first) {
            p.gamma_star = g;
            p.c_star = c;
            first = false;
        } else {
            p.gamma_star = std::min(p.gamma_star, g);
            p.c_star = std::min(p.c_star, c);
        }
    }
    return p;
}

inline PlanarLp build_nominal_lp(const ProblemInstance& inst, int fractions) {
    const NominalLpParams p = nominal_lp_params(inst, fractions);
    PlanarLp lp;
    lp.objective_x = inst.tumor.alpha0;
    lp.objective_y = inst.tumor.beta0;
    for (std::size_t m = 0; m < p.bed.size(); ++m)
        lp.constraints.push_back({1.0, p.rho[m], p.bed[m]});
    lp.constraints.push_back({-p.gamma_star, 1.0, 0.0});  // y <= gamma* x
    lp.constraints.push_back({p.c_star, -1.0, 0.0});      // c* x <= y
    lp.constraints.push_back({-1.0, 0.0, 0.0});           // x >= 0
    lp.constraints.push_back({0.0, -1.0, 0.0});           // y >= 0
    return lp;
}

// Turns optimal aggregates back into doses (q, p, ..., p).
inline DoseSchedule recover_schedule(double x, double y, int fractions) {
    if (fractions < 1) throw std::invalid_argument("fractions must be >= 1");
    if (x < -kReconstructionTolerance || y < -kReconstructionTolerance)
        throw std::invalid_argument("aggregates must be nonnegative");
    x = std::max(0.0, x);
    y = std::max(0.0, y);

    DoseSchedule s;
    s.fractions = fractions;
    s.doses.assign(fractions, 0.0);

    if (x <= kReconstructionTolerance && y <= kReconstructionTolerance) {
        s.regime = Regime::Zero;
        return s;
    }
    if (std::sqrt(y) > x + kReconstructionTolerance ||
        x > std::sqrt(fractions * y) + kReconstructionTolerance)
        throw std::runtime_error("aggregates not realizable by any schedule");

    if (fractions == 1) {
        s.doses[0] = x;
        s.regime = Regime::SingleDosage;
    } else if (std::fabs(std::sqrt(y) - x) <= kReconstructionTolerance) {
        s.doses[0] = x;
        s.regime = Regime::SingleDosage;
    } else if (std::fabs(std::sqrt(fractions * y) - x) <= kReconstructionTolerance) {
        const double p = x / fractions;
        s.doses.assign(fractions, p);
        s.regime = Regime::EqualDosage;
    } else {
        const double n = fractions;
        double radicand = 1.0 - (1.0 - y / (x * x)) * n / (n - 1.0);
        if (radicand < 0.0) {
            if (radicand < -1e-9)
                throw std::runtime_error("schedule recovery radicand is negative");
            radicand = 0.0;
        }
        const double p = (x / n) * (1.0 - std::sqrt(radicand));
        const double q = x - (n - 1.0) * p;
        s.doses[0] = q;
        for (int i = 1; i < fractions; ++i) s.doses[i] = p;
        s.regime = Regime::UnequalDosage;
    }

    if (std::fabs(s.total_dose() - x) > kReconstructionTolerance ||
        std::fabs(s.total_squared_dose() - y) > kReconstructionTolerance)
        throw std::runtime_error("recovered schedule does not reproduce aggregates");
    return s;
}

struct SolveReport {
    DoseSchedule schedule;
    double objective = 0.0;  // tumor biological effect of the schedule
    double x_star = 0.0;
    double y_star = 0.0;
    std::optional<int> subproblem_k;         // robust solves only
    std::vector<int> infeasible_subproblems; // robust solves only
};

namespace detail {

// Candidate comparison shared by the per-N searches. Objectives within the
// tie window count as equal and the later (larger N) candidate wins; the
// recorded best objective never decreases, so a long chain of near-ties
// cannot drift downward.
inline bool accept_candidate(double candidate, double& best, bool have_best) {
    if (!have_best) {
        best = candidate;
        return true;
    }
    const double tol = kObjectiveTieTolerance *
        std::max({1.0, std::fabs(candidate), std::fabs(best)});
    if (candidate >= best - tol) {
        best = std::max(best, candidate);
        return true;
    }
    return false;
}

}  // namespace detail

inline SolveReport solve_nominal_fixed_n(const ProblemInstance& inst, int fractions) {
    inst.validate();
    if (fractions < 1 || fractions > inst.n_max)
        throw std::invalid_argument("fractions outside [1, n_max]");
    const LpOutcome out = solve_planar_lp(build_nominal_lp(inst, fractions));
    if (out.status == LpStatus::Unbounded)
        throw std::runtime_error("fixed-N dose program is unbounded");
    if (out.status == LpStatus::Infeasible)
        throw std::runtime_error("fixed-N dose program is infeasible");
    SolveReport rep;
    rep.x_star = out.x;
    rep.y_star = out.y;
    rep.schedule = recover_schedule(out.x, out.y, fractions);
    rep.objective = out.objective_value - proliferation_penalty(inst.proliferation, fractions);
    return rep;
}

inline SolveReport solve_nominal(const ProblemInstance& inst) {
    inst.validate();
    SolveReport best;
    double best_obj = 0.0;
    bool have = false;
    for (int n = 1; n <= inst.n_max; ++n) {
        SolveReport rep = solve_nominal_fixed_n(inst, n);
        if (detail::accept_candidate(rep.objective, best_obj, have)) {
            best = std::move(rep);
            have = true;
        }
    }
    return best;
}

}  // namespace fraxopt
