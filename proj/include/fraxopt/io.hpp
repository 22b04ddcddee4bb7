#pragma once

// Output formatting: CSV for the sweep-style studies, JSON for single solves
// and violation summaries. Numbers are printed with six significant digits
// (or two decimals under paper rounding) so files are byte-stable across
// runs; a writer/parser pair keeps the CSV round-trippable.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraxopt/experiments.hpp"
#include "fraxopt/model.hpp"
#include "fraxopt/nominal.hpp"

namespace fraxopt {

inline constexpr const char* kSweepCsvHeader =
    "t_lag,t_double,delta,theta,n_star,dose_q,dose_p,regime,"
    "objective_nominal,objective_robust,price_pct";

inline constexpr const char* kForcedNCsvHeader =
    "n,objective_nominal,objective_robust,price_pct";

inline constexpr const char* kInfeasibilityCsvHeader =
    "mode,delta,gamma,perturbed,realized_rhos,"
    "nominal_violation_pct,robust_violation_pct";

inline std::string format_significant(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// First and repeated dosage of a (q, p, ..., p) schedule.
inline double schedule_q(const DoseSchedule& s) {
    return s.doses.empty() ? 0.0 : s.doses[0];
}
inline double schedule_p(const DoseSchedule& s) {
    return s.fractions > 1 ? s.doses[1] : 0.0;
}

inline std::string write_sweep_csv(const std::vector<SweepCell>& cells,
                                   bool paper_rounding = false) {
    std::ostringstream out;
    out << kSweepCsvHeader << '\n';
    for (const auto& c : cells) {
        const DoseSchedule& s = c.robust_report.schedule;
        const double q = schedule_q(s), p = schedule_p(s);
        out << c.t_lag << ',' << format_significant(c.t_double) << ','
            << format_significant(c.delta) << ',' << format_significant(c.theta) << ','
            << s.fractions << ',';
        if (paper_rounding)
            out << format_fixed(q, 2) << ',' << format_fixed(p, 2) << ',';
        else
            out << format_significant(q) << ',' << format_significant(p) << ',';
        out << regime_name(s.regime) << ','
            << format_significant(c.nominal_report.objective) << ','
            << format_significant(c.robust_report.objective) << ',';
        out << (paper_rounding ? format_fixed(c.price_pct, 2)
                               : format_significant(c.price_pct));
        out << '\n';
    }
    return out.str();
}

struct SweepCsvRow {
    int t_lag = 0;
    double t_double = 0.0, delta = 0.0, theta = 0.0;
    int n_star = 0;
    double dose_q = 0.0, dose_p = 0.0;
    std::string regime;
    double objective_nominal = 0.0, objective_robust = 0.0, price_pct = 0.0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("csv: malformed number '" + s + "'");
    return v;
}

}  // namespace detail

inline std::vector<SweepCsvRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader)
        throw std::invalid_argument("csv: missing or unexpected sweep header");
    std::vector<SweepCsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 11) throw std::invalid_argument("csv: expected 11 fields per row");
        SweepCsvRow r;
        r.t_lag = std::stoi(f[0]);
        r.t_double = detail::parse_double(f[1]);
        r.delta = detail::parse_double(f[2]);
        r.theta = detail::parse_double(f[3]);
        r.n_star = std::stoi(f[4]);
        r.dose_q = detail::parse_double(f[5]);
        r.dose_p = detail::parse_double(f[6]);
        r.regime = f[7];
        r.objective_nominal = detail::parse_double(f[8]);
        r.objective_robust = detail::parse_double(f[9]);
        r.price_pct = detail::parse_double(f[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string write_forced_n_csv(const std::vector<ForcedNResult>& rows) {
    std::ostringstream out;
    out << kForcedNCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.fractions << ','
            << format_significant(r.nominal_report.objective) << ','
            << format_significant(r.robust_report.objective) << ','
            << format_significant(r.price_pct) << '\n';
    }
    return out.str();
}

inline std::string write_infeasibility_csv(const InfeasibilityStudy& study) {
    std::ostringstream out;
    out << kInfeasibilityCsvHeader << '\n';
    const char* mode =
        study.mode == InfeasibilityMode::InsideInterval ? "inside" : "outside";
    for (const auto& sc : study.scenarios) {
        out << mode << ',' << format_significant(sc.delta) << ','
            << format_significant(sc.gamma) << ','
            << (sc.perturbed.empty() ? "-" : sc.perturbed) << ',';
        for (std::size_t i = 0; i < sc.realized_rhos.size(); ++i) {
            if (i) out << ';';
            out << format_significant(sc.realized_rhos[i]);
        }
        out << ',' << format_significant(sc.nominal_violation_pct) << ','
            << format_significant(sc.robust_violation_pct) << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json summary_to_json(const InfeasibilityStudy& study) {
    nlohmann::ordered_json j;
    j["mode"] = study.mode == InfeasibilityMode::InsideInterval ? "inside" : "outside";
    j["scenario_count"] = study.summary.scenario_count;
    j["fraction_infeasible_nominal"] = study.summary.fraction_infeasible_nominal;
    j["fraction_infeasible_robust"] = study.summary.fraction_infeasible_robust;
    j["mean_violation_nominal_pct"] = study.summary.mean_nominal;
    j["mean_violation_robust_pct"] = study.summary.mean_robust;
    j["mean_positive_violation_nominal_pct"] = study.summary.mean_positive_nominal;
    j["mean_positive_violation_robust_pct"] = study.summary.mean_positive_robust;
    j["quartiles_nominal_pct"] = study.summary.quartiles_nominal;
    j["quartiles_robust_pct"] = study.summary.quartiles_robust;
    j["t_statistic"] = study.summary.t_test.t_statistic;
    j["p_value"] = study.summary.t_test.p_value;
    j["nominal_exceeds_robust"] = study.summary.t_test.significant;
    j["skipped"] = study.skipped;
    return j;
}

inline nlohmann::ordered_json solve_report_to_json(const ProblemInstance& inst,
                                                   const SolveReport& rep,
                                                   const std::string& mode,
                                                   double delta = 0.0, double theta = 0.0,
                                                   bool paper_rounding = false) {
    auto shown = [&](double v) {
        return paper_rounding ? std::round(v * 100.0) / 100.0 : v;
    };
    nlohmann::ordered_json j;
    j["mode"] = mode;
    j["t_lag"] = inst.proliferation.t_lag;
    j["t_double"] = std::isfinite(inst.proliferation.t_double)
                        ? nlohmann::ordered_json(inst.proliferation.t_double)
                        : nlohmann::ordered_json(nullptr);
    j["delta"] = delta;
    j["theta"] = theta;
    j["n_star"] = rep.schedule.fractions;
    j["dose_q"] = shown(schedule_q(rep.schedule));
    j["dose_p"] = shown(schedule_p(rep.schedule));
    j["regime"] = regime_name(rep.schedule.regime);
    j["objective"] = rep.objective;
    j["x_star"] = rep.x_star;
    j["y_star"] = rep.y_star;
    if (rep.subproblem_k) j["subproblem_k"] = *rep.subproblem_k;
    if (!rep.infeasible_subproblems.empty())
        j["infeasible_subproblems"] = rep.infeasible_subproblems;

    nlohmann::ordered_json oars = nlohmann::ordered_json::array();
    for (const auto& o : inst.oars) {
        nlohmann::ordered_json jo;
        jo["name"] = o.name;
        jo["rho_nominal"] = o.rho_nominal;
        jo["rho_min"] = o.rho_min;
        jo["rho_max"] = o.rho_max;
        const double x = rep.schedule.total_dose();
        const double y = rep.schedule.total_squared_dose();
        jo["bed_limit_nominal"] = o.bed_limit(o.rho_nominal);
        jo["bed_delivered_nominal"] = x + o.rho_nominal * y;
        double worst_slack = o.bed_limit(o.rho_min) - (x + o.rho_min * y);
        worst_slack = std::min(worst_slack, o.bed_limit(o.rho_max) - (x + o.rho_max * y));
        jo["worst_case_slack"] = worst_slack;
        oars.push_back(std::move(jo));
    }
    j["oars"] = std::move(oars);
    return j;
}

}  // namespace fraxopt
