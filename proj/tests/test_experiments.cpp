#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <vector>

#include "fraxopt/experiments.hpp"
#include "fraxopt/io.hpp"
#include "oracles.hpp"

using namespace fraxopt;
using Catch::Matchers::WithinAbs;

namespace {

ProblemInstance headneck(int t_lag, double t_double, double delta = 0.0) {
    auto inst = testing::headneck_instance();
    inst.proliferation = {t_lag, t_double};
    return with_symmetric_uncertainty(inst, delta);
}

}  // namespace

TEST_CASE("instance transforms") {
    SECTION("symmetric uncertainty sets both interval ends") {
        const auto inst = headneck(7, 2.0, 0.4);
        CHECK_THAT(inst.oars[2].rho_min, WithinAbs(0.12, 1e-12));
        CHECK_THAT(inst.oars[2].rho_max, WithinAbs(0.28, 1e-12));
        CHECK_THROWS_AS(with_symmetric_uncertainty(inst, 1.2), std::invalid_argument);
        CHECK_THROWS_AS(with_symmetric_uncertainty(inst, -0.1), std::invalid_argument);
    }
    SECTION("full uncertainty reaches rho = 0") {
        const auto inst = headneck(7, 2.0, 1.0);
        CHECK(inst.oars[0].rho_min == 0.0);
        CHECK_NOTHROW(inst.validate());
    }
    SECTION("tumor scaling shrinks both sensitivities") {
        const auto inst = with_tumor_scaling(headneck(7, 2.0), 0.3);
        CHECK_THAT(inst.tumor.alpha0, WithinAbs(0.245, 1e-12));
        CHECK_THAT(inst.tumor.beta0, WithinAbs(0.0245, 1e-12));
        CHECK_THROWS_AS(with_tumor_scaling(inst, 1.0), std::invalid_argument);
    }
}

TEST_CASE("price sweep") {
    SweepGrid grid;
    grid.t_lag_values = {7};
    grid.t_double_values = {2.0, 50.0};
    grid.delta_values = {0.0, 0.1, 0.5, 1.0};
    const auto cells = run_price_sweep(testing::headneck_instance(), grid);
    REQUIRE(cells.size() == 8);

    SECTION("cells iterate t_lag, then t_double, then delta") {
        CHECK(cells[0].t_double == 2.0);
        CHECK(cells[0].delta == 0.0);
        CHECK(cells[3].t_double == 2.0);
        CHECK(cells[3].delta == 1.0);
        CHECK(cells[4].t_double == 50.0);
        CHECK(cells[4].delta == 0.0);
    }
    SECTION("no uncertainty, no price") {
        CHECK(cells[0].price_pct == 0.0);
        CHECK(cells[4].price_pct == 0.0);
    }
    SECTION("reference prices are reproduced to two-decimal precision") {
        CHECK_THAT(cells[1].price_pct, WithinAbs(1.74, 0.02));   // t_double 2, delta 0.1
        CHECK_THAT(cells[2].price_pct, WithinAbs(7.38, 0.02));   // t_double 2, delta 0.5
        CHECK_THAT(cells[3].price_pct, WithinAbs(12.42, 0.02));  // t_double 2, delta 1
        CHECK_THAT(cells[6].price_pct, WithinAbs(0.01, 0.02));   // t_double 50, delta 0.5
    }
    SECTION("price grows with uncertainty") {
        for (int i = 1; i < 4; ++i) CHECK(cells[i].price_pct >= cells[i - 1].price_pct - 1e-9);
    }
    SECTION("the nominal leg is shared down a column") {
        CHECK(cells[0].nominal_report.objective == cells[3].nominal_report.objective);
        CHECK(cells[0].nominal_report.schedule.fractions == 8);
    }
    SECTION("price is never negative when the nominal ratio is the midpoint") {
        for (const auto& c : cells) CHECK(c.price_pct >= 0.0);
    }
}

TEST_CASE("forced session count") {
    SECTION("the conventional count is free of charge") {
        for (double delta : {0.3, 0.7, 1.0}) {
            const auto r = run_forced_n(headneck(7, 2.0, delta), 35);
            CHECK_THAT(r.price_pct, WithinAbs(0.0, 1e-9));
        }
    }
    SECTION("zero uncertainty is free at any count") {
        for (int n : {1, 8, 20}) {
            const auto r = run_forced_n(headneck(7, 2.0, 0.0), n);
            CHECK_THAT(r.price_pct, WithinAbs(0.0, 1e-9));
        }
    }
    SECTION("the curve's best entry equals the full robust solve") {
        const auto inst = headneck(7, 10.0, 0.5);
        const auto full = solve_robust(inst);
        double best = -1e300;
        for (int n = 1; n <= inst.n_max; ++n)
            best = std::max(best, run_forced_n(inst, n).robust_report.objective);
        CHECK_THAT(best, WithinAbs(full.objective, 1e-9));
        CHECK(full.schedule.fractions == 17);
    }
}

TEST_CASE("tumor uncertainty study") {
    SweepGrid grid;
    grid.t_lag_values = {7};
    grid.t_double_values = {8.0, 10.0};
    grid.delta_values = {0.0, 0.6, 1.0};
    grid.theta_values = {0.1, 0.5};
    const auto cells = run_tumor_uncertainty(testing::headneck_instance(), grid);
    REQUIRE(cells.size() == 12);

    auto cell = [&](double t_double, double delta, double theta) -> const SweepCell& {
        for (const auto& c : cells)
            if (c.t_double == t_double && c.delta == delta && c.theta == theta) return c;
        FAIL("cell not found");
        return cells[0];
    };

    SECTION("reference robust solutions under scaled tumor parameters") {
        const auto& a = cell(8.0, 0.0, 0.1);
        CHECK(a.robust_report.schedule.fractions == 9);
        CHECK_THAT(schedule_q(a.robust_report.schedule), WithinAbs(2.28, 5e-3));

        const auto& b = cell(8.0, 1.0, 0.1);
        CHECK(b.robust_report.schedule.fractions == 16);
        CHECK_THAT(schedule_q(b.robust_report.schedule), WithinAbs(1.36, 5e-3));

        const auto& c = cell(10.0, 0.6, 0.5);
        CHECK(c.robust_report.schedule.fractions == 10);
        CHECK_THAT(schedule_q(c.robust_report.schedule), WithinAbs(1.97, 5e-3));
    }
    SECTION("theta ordering is innermost") {
        CHECK(cells[0].theta == 0.1);
        CHECK(cells[1].theta == 0.5);
        CHECK(cells[0].delta == 0.0);
        CHECK(cells[2].delta == 0.6);
    }
}

TEST_CASE("more tumor pessimism, fewer sessions") {
    SweepGrid grid;
    grid.t_lag_values = {7};
    grid.t_double_values = {8.0};
    grid.delta_values = {0.1};
    grid.theta_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const auto cells = run_tumor_uncertainty(testing::headneck_instance(), grid);
    REQUIRE(cells.size() == 9);
    for (std::size_t i = 1; i < cells.size(); ++i) {
        CHECK(cells[i].robust_report.schedule.fractions <=
              cells[i - 1].robust_report.schedule.fractions);
        CHECK(schedule_q(cells[i].robust_report.schedule) >=
              schedule_q(cells[i - 1].robust_report.schedule) - 1e-9);
    }
}

TEST_CASE("inside-interval violations") {
    SECTION("no uncertainty, no violations") {
        const auto study = run_infeasibility_inside(headneck(7, 2.0), {0.0}, 3);
        CHECK(study.scenarios.size() == 81);
        CHECK(study.summary.fraction_infeasible_nominal == 0.0);
        CHECK(study.summary.fraction_infeasible_robust == 0.0);
    }
    SECTION("the nominal schedule violates somewhere, the robust one nowhere") {
        const auto study = run_infeasibility_inside(headneck(7, 2.0), {0.5}, 3);
        REQUIRE(study.scenarios.size() == 81);
        CHECK(study.summary.fraction_infeasible_nominal > 0.0);
        CHECK(study.summary.fraction_infeasible_robust == 0.0);
        for (const auto& sc : study.scenarios)
            CHECK(sc.robust_violation_pct <= kViolationThresholdPct);
        CHECK(study.summary.t_test.t_statistic > 0.0);
        CHECK(study.summary.quartiles_robust[1] == 0.0);

        bool found_nominal_point = false;
        for (const auto& sc : study.scenarios) {
            bool at_nominal = true;
            for (std::size_t m = 0; m < sc.realized_rhos.size(); ++m)
                at_nominal = at_nominal &&
                             std::fabs(sc.realized_rhos[m] -
                                       testing::headneck_instance().oars[m].rho_nominal) < 1e-12;
            if (at_nominal) {
                found_nominal_point = true;
                CHECK(sc.nominal_violation_pct <= kViolationThresholdPct);
            }
        }
        CHECK(found_nominal_point);
    }
    SECTION("the scenario cap is enforced") {
        CHECK_THROWS_AS(run_infeasibility_inside(headneck(7, 2.0), {0.5}, 5, 100),
                        std::invalid_argument);
    }
    SECTION("box sampling is seeded and reproducible") {
        const auto a = run_infeasibility_inside(headneck(7, 2.0), {0.5}, 2, 1000000, 40, 9);
        const auto b = run_infeasibility_inside(headneck(7, 2.0), {0.5}, 2, 1000000, 40, 9);
        REQUIRE(a.scenarios.size() == 40);
        REQUIRE(b.scenarios.size() == 40);
        for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
            CHECK(a.scenarios[i].realized_rhos == b.scenarios[i].realized_rhos);
            CHECK(a.scenarios[i].robust_violation_pct <= kViolationThresholdPct);
        }
    }
    SECTION("sample count is validated") {
        CHECK_THROWS_AS(run_infeasibility_inside(headneck(7, 2.0), {0.5}, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("outside-interval violations") {
    SECTION("per-oar perturbations, both sides") {
        const auto study = run_infeasibility_outside(headneck(7, 2.0), {0.2}, {0.1, 0.3});
        REQUIRE(study.scenarios.size() == 16);  // 2 gammas x 2 sides x 4 oars
        CHECK(study.skipped.empty());
        CHECK(study.summary.mean_robust <= study.summary.mean_nominal + 1e-12);
        CHECK(study.summary.t_test.t_statistic >= 0.0);
    }
    SECTION("perturbations below zero are skipped and logged") {
        const auto study = run_infeasibility_outside(headneck(7, 2.0), {0.9}, {0.2});
        CHECK(study.scenarios.size() == 4);  // only the + side survives
        CHECK(study.skipped.size() == 4);
        for (const auto& msg : study.skipped) CHECK(msg.find("skipped") != std::string::npos);
    }
    SECTION("joint perturbation moves every ratio at once") {
        const auto study = run_infeasibility_outside(headneck(7, 2.0), {0.2}, {0.1}, true);
        REQUIRE(study.scenarios.size() == 2);
        CHECK(study.scenarios[0].perturbed == "all");
        REQUIRE(study.scenarios[0].realized_rhos.size() == 4);
    }
    SECTION("which side hurts depends on the schedule's squared dose") {
        // Hypofractionated nominal course: sum d^2 above the parotid budgets,
        // so only upward rho surprises violate.
        const auto hypo = run_infeasibility_outside(headneck(7, 2.0), {0.1}, {0.2}, true);
        REQUIRE(hypo.scenarios.size() == 2);
        CHECK(hypo.scenarios[0].gamma > 0.0);
        CHECK(hypo.scenarios[0].nominal_violation_pct > 0.0);
        CHECK(hypo.scenarios[1].gamma < 0.0);
        CHECK(hypo.scenarios[1].nominal_violation_pct == 0.0);

        // Near-conventional nominal course: sum d^2 below the binding budget,
        // so a drop in rho violates too.
        const auto conv = run_infeasibility_outside(headneck(7, 100.0), {0.1}, {0.2});
        bool found = false;
        for (const auto& sc : conv.scenarios) {
            if (sc.perturbed == "parotid_left" && sc.gamma < 0.0) {
                found = true;
                CHECK(sc.nominal_violation_pct > 0.0);
            }
        }
        CHECK(found);
    }
    SECTION("gamma must be positive") {
        CHECK_THROWS_AS(run_infeasibility_outside(headneck(7, 2.0), {0.2}, {0.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("sweeps are deterministic, independent of threading") {
    SweepGrid grid;
    grid.t_lag_values = {7};
    grid.t_double_values = {10.0};
    grid.delta_values = {0.0, 0.5, 1.0};

    setenv("FRAXOPT_THREADS", "1", 1);
    const auto serial = write_sweep_csv(run_price_sweep(testing::headneck_instance(), grid));
    setenv("FRAXOPT_THREADS", "3", 1);
    const auto threaded = write_sweep_csv(run_price_sweep(testing::headneck_instance(), grid));
    unsetenv("FRAXOPT_THREADS");
    const auto defaulted = write_sweep_csv(run_price_sweep(testing::headneck_instance(), grid));

    CHECK(serial == threaded);
    CHECK(serial == defaulted);
}

TEST_CASE("thread budget honors the environment") {
    setenv("FRAXOPT_THREADS", "8", 1);
    CHECK(thread_budget(100) == 8);
    CHECK(thread_budget(3) == 3);
    setenv("FRAXOPT_THREADS", "not-a-number", 1);
    CHECK(thread_budget(100) >= 1);
    unsetenv("FRAXOPT_THREADS");
    CHECK(thread_budget(0) == 1);
}
