#pragma once

// Linear-quadratic dose-response model for fractionated radiotherapy.
// A treatment course delivers doses d_1..d_N, one per session. The tumor
// gains biological effect alpha0*sum(d) + beta0*sum(d^2) minus a repopulation
// penalty that kicks in once the course outlasts the lag period. Each
// organ-at-risk (OAR) m constrains the generalized dose sum(d) + rho_m*sum(d^2)
// against the BED of its conventional reference regimen.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraxopt {

// Relative slack allowed when classifying a BED constraint as satisfied.
inline constexpr double kFeasibilityTolerance = 1e-9;

// Absolute tolerance (Gy, Gy^2) for schedule reconstruction identities.
inline constexpr double kReconstructionTolerance = 1e-6;

struct TumorParams {
    double alpha0 = 0.0;  // linear sensitivity, 1/Gy
    double beta0 = 0.0;   // quadratic sensitivity, 1/Gy^2

    void validate() const {
        if (!(alpha0 > 0.0) || !std::isfinite(alpha0))
            throw std::invalid_argument("tumor alpha0 must be positive");
        if (!(beta0 > 0.0) || !std::isfinite(beta0))
            throw std::invalid_argument("tumor beta0 must be positive");
    }
};

struct ProliferationParams {
    int t_lag = 0;         // sessions of grace before repopulation starts
    double t_double = std::numeric_limits<double>::infinity();  // doubling time, days

    void validate() const {
        if (t_lag < 0) throw std::invalid_argument("t_lag must be nonnegative");
        if (!(t_double > 0.0)) throw std::invalid_argument("t_double must be positive");
    }
};

struct OarSpec {
    std::string name;
    double rho_nominal = 0.0;        // nominal dose-response ratio (= 1/(alpha/beta))
    double rho_min = 0.0;            // lower end of the uncertainty interval
    double rho_max = 0.0;            // upper end
    double tolerance_dose = 0.0;     // total dose D_m of the conventional regimen, Gy
    int conventional_fractions = 0;  // N_m sessions of that regimen

    double rho_mean() const { return 0.5 * (rho_min + rho_max); }
    double rho_range() const { return rho_max - rho_min; }

    // D_m^2 / N_m, the squared-dose budget the conventional regimen uses up.
    double squared_dose_budget() const {
        return tolerance_dose * tolerance_dose / conventional_fractions;
    }

    // BED of the conventional regimen when the true ratio is rho.
    double bed_limit(double rho) const {
        return tolerance_dose + rho * squared_dose_budget();
    }

    double rc_mean() const { return bed_limit(rho_mean()); }
    double rc_upper() const { return bed_limit(rho_max); }
    double rc_lower() const { return bed_limit(rho_min); }

    void validate() const {
        if (name.empty()) throw std::invalid_argument("oar name must be nonempty");
        if (!(rho_nominal > 0.0)) throw std::invalid_argument("oar '" + name + "': rho must be positive");
        if (rho_min < 0.0) throw std::invalid_argument("oar '" + name + "': rho_min must be nonnegative");
        if (rho_min > rho_max) throw std::invalid_argument("oar '" + name + "': rho_min exceeds rho_max");
        if (!(tolerance_dose > 0.0)) throw std::invalid_argument("oar '" + name + "': tolerance dose must be positive");
        if (conventional_fractions < 1) throw std::invalid_argument("oar '" + name + "': conventional fractions must be >= 1");
    }
};

struct ProblemInstance {
    TumorParams tumor;
    ProliferationParams proliferation;
    std::vector<OarSpec> oars;
    int n_max = 100;

    void validate() const {
        tumor.validate();
        proliferation.validate();
        if (oars.empty()) throw std::invalid_argument("instance needs at least one oar");
        for (const auto& o : oars) o.validate();
        if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    }
};

enum class Regime { Zero, SingleDosage, EqualDosage, UnequalDosage };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Zero: return "zero";
        case Regime::SingleDosage: return "single";
        case Regime::EqualDosage: return "equal";
        case Regime::UnequalDosage: return "unequal";
    }
    return "?";
}

struct DoseSchedule {
    int fractions = 0;
    std::vector<double> doses;  // size == fractions
    Regime regime = Regime::Zero;

    double total_dose() const {
        return std::accumulate(doses.begin(), doses.end(), 0.0);
    }
    double total_squared_dose() const {
        double s = 0.0;
        for (double d : doses) s += d * d;
        return s;
    }
};

// Repopulation penalty tau(N): zero through the lag, then ln2/t_double per
// extra session. N counts sessions, so the course spans N-1 inter-session days.
inline double proliferation_penalty(const ProliferationParams& p, int fractions) {
    if (fractions < 1) throw std::invalid_argument("fractions must be >= 1");
    const double days_beyond_lag = static_cast<double>(fractions - 1) - p.t_lag;
    if (days_beyond_lag <= 0.0) return 0.0;
    return days_beyond_lag * std::log(2.0) / p.t_double;
}

inline double tumor_be(const TumorParams& t, const ProliferationParams& p,
                       const DoseSchedule& s) {
    if (s.fractions < 1) throw std::invalid_argument("schedule has no fractions");
    return t.alpha0 * s.total_dose() + t.beta0 * s.total_squared_dose()
         - proliferation_penalty(p, s.fractions);
}

inline double bed_delivered(double rho, const DoseSchedule& s) {
    if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
    return s.total_dose() + rho * s.total_squared_dose();
}

struct FeasibilityReport {
    std::vector<double> violation_pct;  // per oar, instance order
    double max_violation_pct = 0.0;
    bool feasible = true;
};

// Checks the schedule against every OAR limit at the given realized ratios.
// Violations are relative BED excess in percent; anything within
// kFeasibilityTolerance counts as feasible.
inline FeasibilityReport check_feasibility(const ProblemInstance& inst,
                                           const DoseSchedule& s,
                                           const std::vector<double>& realized_rhos) {
    if (realized_rhos.size() != inst.oars.size())
        throw std::invalid_argument("realized_rhos size does not match oar count");
    FeasibilityReport rep;
    rep.violation_pct.reserve(inst.oars.size());
    for (std::size_t m = 0; m < inst.oars.size(); ++m) {
        const double rho = realized_rhos[m];
        if (rho < 0.0) throw std::invalid_argument("realized rho must be nonnegative");
        const double limit = inst.oars[m].bed_limit(rho);
        const double delivered = bed_delivered(rho, s);
        const double excess = (delivered - limit) / limit;
        const double v = std::max(0.0, excess) * 100.0;
        rep.violation_pct.push_back(v);
        rep.max_violation_pct = std::max(rep.max_violation_pct, v);
        if (excess > kFeasibilityTolerance) rep.feasible = false;
    }
    return rep;
}

}  // namespace fraxopt
