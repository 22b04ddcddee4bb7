#pragma once

// Small summary-statistics helpers for the violation studies.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fraxopt {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Quartiles by linear interpolation between closest ranks (the common
// spreadsheet convention): quantile h = (n-1)*p, value = v[floor(h)] +
// frac(h)*(v[floor(h)+1] - v[floor(h)]).
inline std::array<double, 3> quartiles(std::vector<double> v) {
    if (v.empty()) return {0.0, 0.0, 0.0};
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double h = (static_cast<double>(v.size()) - 1.0) * p;
        const std::size_t lo = static_cast<std::size_t>(h);
        if (lo + 1 >= v.size()) return v.back();
        return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

struct PairedTResult {
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;  // one-sided, H1: mean(a - b) > 0
};

// Paired one-sided t test with a normal approximation for the tail
// probability (sample sizes here are in the hundreds, so the distinction
// from the exact t tail is immaterial). Zero-variance differences are
// resolved by the sign of the mean difference.
inline PairedTResult paired_t_test(const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   double alpha = 0.05) {
    if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in size");
    const std::size_t n = a.size();
    PairedTResult r;
    if (n < 2) return r;

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double md = mean(d);
    double ss = 0.0;
    for (double x : d) ss += (x - md) * (x - md);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    if (sd == 0.0) {
        if (md > 0.0) {
            r.t_statistic = std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        } else if (md < 0.0) {
            r.t_statistic = -std::numeric_limits<double>::infinity();
            r.p_value = 1.0;
        } else {
            r.t_statistic = 0.0;
            r.p_value = 0.5;
        }
    } else {
        r.t_statistic = md / (sd / std::sqrt(static_cast<double>(n)));
        r.p_value = 0.5 * std::erfc(r.t_statistic / std::sqrt(2.0));
    }
    r.significant = r.p_value < alpha;
    return r;
}

}  // namespace fraxopt
