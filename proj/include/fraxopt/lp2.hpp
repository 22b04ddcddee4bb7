#pragma once

// Exact maximizer for linear programs in two variables:
//
//   max  px*x + py*y   s.t.   a_i*x + b_i*y <= c_i  for every half-plane i.
//
// With only two variables there is no need for a simplex tableau. Every basic
// feasible point is the intersection of two constraint boundaries, so we
// enumerate all O(m^2) pairwise intersections, keep the feasible ones, and take
// the best. Unboundedness is a recession-direction test: a feasible direction
// with positive objective growth exists iff some candidate direction (the
// objective itself, or a boundary direction of some constraint) satisfies all
// constraint normals. Regions without vertices (slabs, half-planes, the whole
// plane) are caught by a fallback candidate set: the feet of the perpendicular
// from the origin onto each boundary line, plus the origin itself.
//
// Ties between equal-objective points are broken toward the lexicographically
// smallest (x, y), which keeps every caller deterministic.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fraxopt {

inline constexpr double kLpFeasibilityEps = 1e-9;
inline constexpr double kLpDirectionEps = 1e-12;

struct HalfPlane {
    double a = 0.0, b = 0.0, c = 0.0;  // a*x + b*y <= c
};

struct PlanarLp {
    double objective_x = 0.0;
    double objective_y = 0.0;
    std::vector<HalfPlane> constraints;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    double x = 0.0;
    double y = 0.0;
    double objective_value = 0.0;
};

namespace detail {

inline bool lp_point_feasible(const PlanarLp& lp, double x, double y) {
    for (const auto& h : lp.constraints) {
        const double lhs = h.a * x + h.b * y;
        const double tol = kLpFeasibilityEps *
            std::max({1.0, std::fabs(h.c), std::fabs(h.a * x), std::fabs(h.b * y)});
        if (lhs > h.c + tol) return false;
    }
    return true;
}

// True if moving along (dx, dy) never leaves the feasible set.
inline bool lp_recession_direction(const PlanarLp& lp, double dx, double dy) {
    const double norm = std::hypot(dx, dy);
    if (!(norm > 0.0)) return false;
    dx /= norm;
    dy /= norm;
    for (const auto& h : lp.constraints) {
        const double growth = h.a * dx + h.b * dy;
        if (growth > kLpDirectionEps * std::max(1.0, std::hypot(h.a, h.b))) return false;
    }
    return true;
}

}  // namespace detail

inline LpOutcome solve_planar_lp(const PlanarLp& lp) {
    if (lp.constraints.empty())
        throw std::invalid_argument("planar lp needs at least one constraint");
    for (const auto& h : lp.constraints) {
        if (!std::isfinite(h.a) || !std::isfinite(h.b) || !std::isfinite(h.c))
            throw std::invalid_argument("planar lp constraint has non-finite coefficient");
    }

    const double px = lp.objective_x, py = lp.objective_y;
    const bool null_objective =
        std::fabs(px) <= kLpDirectionEps && std::fabs(py) <= kLpDirectionEps;

    struct Candidate { double x, y; };
    std::vector<Candidate> candidates;
    const std::size_t m = lp.constraints.size();
    candidates.reserve(m * (m - 1) / 2 + m + 1);

    for (std::size_t i = 0; i < m; ++i) {
        const auto& hi = lp.constraints[i];
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& hj = lp.constraints[j];
            const double det = hi.a * hj.b - hj.a * hi.b;
            const double scale = std::max(std::fabs(hi.a * hj.b), std::fabs(hj.a * hi.b));
            if (std::fabs(det) <= 1e-12 * std::max(1.0, scale)) continue;  // near parallel
            candidates.push_back({(hi.c * hj.b - hj.c * hi.b) / det,
                                  (hi.a * hj.c - hj.a * hi.c) / det});
        }
    }

    auto pick_best = [&](const std::vector<Candidate>& pool, LpOutcome& out) {
        bool found = false;
        for (const auto& cand : pool) {
            if (!std::isfinite(cand.x) || !std::isfinite(cand.y)) continue;
            if (!detail::lp_point_feasible(lp, cand.x, cand.y)) continue;
            const double val = px * cand.x + py * cand.y;
            if (!found || val > out.objective_value ||
                (val == out.objective_value &&
                 (cand.x < out.x || (cand.x == out.x && cand.y < out.y)))) {
                out.x = cand.x;
                out.y = cand.y;
                out.objective_value = val;
                found = true;
            }
        }
        return found;
    };

    LpOutcome best;
    bool feasible = pick_best(candidates, best);

    if (!feasible) {
        // No feasible vertex. The region may still be nonempty but vertex-free;
        // probe the feet of the perpendiculars and the origin.
        std::vector<Candidate> fallback;
        fallback.push_back({0.0, 0.0});
        for (const auto& h : lp.constraints) {
            const double nn = h.a * h.a + h.b * h.b;
            if (nn > 0.0) fallback.push_back({h.c * h.a / nn, h.c * h.b / nn});
        }
        feasible = pick_best(fallback, best);
        if (!feasible) return {LpStatus::Infeasible, 0.0, 0.0, 0.0};
    }

    if (null_objective) {
        best.status = LpStatus::Optimal;
        best.objective_value = 0.0;
        return best;
    }

    // Feasible and a real objective: unbounded iff some recession direction
    // improves it. Directions worth testing: the objective itself and each
    // constraint boundary direction.
    auto improves = [&](double dx, double dy) {
        const double norm = std::hypot(dx, dy);
        return norm > 0.0 && px * dx + py * dy > kLpDirectionEps * norm;
    };
    if (detail::lp_recession_direction(lp, px, py))
        return {LpStatus::Unbounded, 0.0, 0.0, 0.0};
    for (const auto& h : lp.constraints) {
        for (const double sgn : {1.0, -1.0}) {
            const double dx = -h.b * sgn, dy = h.a * sgn;
            if (improves(dx, dy) && detail::lp_recession_direction(lp, dx, dy))
                return {LpStatus::Unbounded, 0.0, 0.0, 0.0};
        }
    }

    best.status = LpStatus::Optimal;
    return best;
}

}  // namespace fraxopt
