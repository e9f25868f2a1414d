#include <doctest.h>

#include <random>

#include "dosage/identification.hpp"
#include "dosage/illustration.hpp"
#include "bfs_oracle.hpp"
#include "helpers.hpp"

using namespace dosage;

namespace {

ConstraintSystem example_system(Restrictions r = {}) {
    return build_constraints(illustration::evidence(), r, illustration::grid());
}

}  // namespace

TEST_CASE("worked-example system: shape, rank, feasibility") {
    const ConstraintSystem cs = example_system();
    CHECK(cs.num_columns() == 16);
    CHECK(cs.num_rows() == 9);  // total probability + 2 arms x 4 cells
    CHECK(cs.equality_rank() == 7);  // 3K+1 with K=2
    CHECK(cs.feasible());
    CHECK(cs.row_labels().front() == "total-probability");

    // The generating q satisfies every row.
    const ThresholdDistribution q = illustration::threshold_distribution();
    for (int i = 0; i < cs.num_rows(); ++i) {
        double dot = 0.0;
        for (int j = 0; j < cs.num_columns(); ++j)
            dot += cs.matrix()[static_cast<std::size_t>(i) * cs.num_columns() + j] *
                   q.mass()[static_cast<std::size_t>(j)];
        CHECK(dot == doctest::Approx(cs.rhs()[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
}

TEST_CASE("no_ae_at_zero adds rows and stays feasible on the worked example") {
    Restrictions r;
    r.no_ae_at_zero = true;
    const ConstraintSystem cs = example_system(r);
    CHECK(cs.num_rows() == 13);
    CHECK(cs.feasible());
}

TEST_CASE("independence flag is rejected at build time") {
    Restrictions r;
    r.independence = true;
    CHECK_THROWS_AS(example_system(r), UnsupportedRestrictionError);
    r.concurrent_thresholds = true;
    CHECK_THROWS_AS(example_system(r), ArgumentError);
}

TEST_CASE("quadrant mass bound matches the reference value 0.667") {
    const ConstraintSystem cs = example_system();
    // Indicator of (t_d > 1, t_e <= 1), the cell (1,1) quadrant at t = 1.
    const Interval iv = bound_linear(cs, quadrant_indicator(cs.grid(), 1,
                                                            OutcomeCell::DiseaseAe));
    CHECK(iv.lo == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(iv.hi == doctest::Approx(2.0 / 3).epsilon(1e-9).scale(1.0));
}

TEST_CASE("all-ones coefficients give the degenerate interval [1, 1]") {
    const ConstraintSystem cs = example_system();
    const std::vector<double> ones(static_cast<std::size_t>(cs.num_columns()), 1.0);
    const Interval iv = bound_linear(cs, ones);
    CHECK(iv.lo == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(iv.hi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("outcome-cell bounds at the untested dose match reference values") {
    const ConstraintSystem cs = example_system();
    const Interval i00 = bound_outcome_prob(cs, 1, OutcomeCell::NoDiseaseNoAe);
    const Interval i10 = bound_outcome_prob(cs, 1, OutcomeCell::DiseaseNoAe);
    const Interval i01 = bound_outcome_prob(cs, 1, OutcomeCell::NoDiseaseAe);
    const Interval i11 = bound_outcome_prob(cs, 1, OutcomeCell::DiseaseAe);
    CHECK(i00.lo == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(i00.hi == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(i10.lo == doctest::Approx(1.0 / 12).epsilon(1e-9));
    CHECK(i10.hi == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(i01.lo == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(i01.hi == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(i11.lo == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(i11.hi == doctest::Approx(2.0 / 3).epsilon(1e-9));
}

TEST_CASE("net welfare bounds at the untested dose and at trial doses") {
    const ConstraintSystem cs = example_system();
    const WelfareSpec w = illustration::welfare();
    const CostSpec zero = CostSpec::zero(cs.grid());

    const Interval w1 = bound_net_welfare(cs, 1, w, zero);
    CHECK(w1.lo == doctest::Approx(13.0 / 48).epsilon(1e-9));  // 0.270833
    CHECK(w1.hi == doctest::Approx(0.8125).epsilon(1e-9));

    const Interval w0 = bound_net_welfare(cs, 0, w, zero);
    CHECK(w0.lo == doctest::Approx(0.4375).epsilon(1e-8));
    CHECK(w0.width() <= 1e-8);

    // Cost enters additively.
    const Interval w1c = bound_net_welfare(cs, 1, w, CostSpec::linear(cs.grid(), 0.05));
    CHECK(w1c.lo == doctest::Approx(w1.lo - 0.05).epsilon(1e-9));
    CHECK(w1c.hi == doctest::Approx(w1.hi - 0.05).epsilon(1e-9));
}

TEST_CASE("check_consistency verdicts") {
    SUBCASE("worked example is consistent with a valid witness") {
        const ConsistencyReport rep =
            check_consistency(illustration::evidence(), {}, illustration::grid());
        REQUIRE(rep.consistent);
        REQUIRE(rep.witness.has_value());
        const OutcomeDistribution back = push_forward(*rep.witness, 0);
        CHECK(back.at(OutcomeCell::NoDiseaseNoAe) == doctest::Approx(0.25).epsilon(1e-7));
    }
    SUBCASE("monotone-response violation is flagged and LP-infeasible") {
        DoseGrid g2(2);
        const TrialEvidence bad({{0, OutcomeDistribution({0.5, 0.0, 0.5, 0.0}), {}},
                                 {2, OutcomeDistribution({1.0, 0.0, 0.0, 0.0}), {}}},
                                g2);
        const ConsistencyReport rep = check_consistency(bad, {}, g2);
        REQUIRE_FALSE(rep.consistent);
        CHECK_FALSE(rep.violated_necessary_conditions.empty());
        CHECK_FALSE(rep.certificate.empty());

        const ConstraintSystem cs = build_constraints(bad, {}, g2);
        CHECK_THROWS_AS(bound_outcome_prob(cs, 1, OutcomeCell::NoDiseaseNoAe),
                        InconsistentEvidenceError);
    }
    SUBCASE("single-arm evidence is always consistent") {
        std::mt19937_64 rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            const DoseGrid grid(3);
            const ThresholdDistribution q = testutil::random_q(grid, rng);
            std::uniform_int_distribution<int> pick(0, 3);
            const int dose = pick(rng);
            const TrialEvidence one({{dose, push_forward(q, dose), {}}}, grid);
            CHECK(check_consistency(one, {}, grid).consistent);
        }
    }
}

TEST_CASE("T=1 single-arm welfare bound matches the enumeration oracle") {
    const DoseGrid g1(1);
    const TrialEvidence ev({{0, OutcomeDistribution({0.25, 0.75, 0.0, 0.0}), {}}}, g1);
    const ConstraintSystem cs = build_constraints(ev, {}, g1);
    const WelfareSpec w{{1.0, 0.25, 0.75, 0.0}};
    const WelfareCoefficients c = net_welfare_coefficients(g1, 1, w, CostSpec::zero(g1));

    const Interval iv = bound_linear(cs, c.cell);
    CHECK(iv.lo == doctest::Approx(0.1875).epsilon(1e-9));
    CHECK(iv.hi == doctest::Approx(1.0).epsilon(1e-9));

    const testutil::BfsExtremes oracle =
        testutil::bfs_extremes(c.cell, cs.matrix(), cs.rhs());
    REQUIRE(oracle.feasible);
    CHECK(iv.lo == doctest::Approx(oracle.min).epsilon(1e-9).scale(1.0));
    CHECK(iv.hi == doctest::Approx(oracle.max).epsilon(1e-9).scale(1.0));
}

TEST_CASE("rank is 3K+1 on random consistent instances") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> pick_t(2, 5);
    for (int rep = 0; rep < 20; ++rep) {
        const DoseGrid grid(pick_t(rng));
        std::uniform_int_distribution<int> pick_k(1, grid.max_dose());
        const int k = pick_k(rng);
        const ThresholdDistribution q = testutil::random_q(grid, rng);
        const TrialEvidence ev =
            testutil::evidence_from_q(q, testutil::random_doses(grid, k, rng));
        const ConstraintSystem cs = build_constraints(ev, {}, grid);
        CHECK(cs.equality_rank() == 3 * k + 1);
        CHECK(cs.feasible());
    }
}

TEST_CASE("bounds contain the generating distribution and shrink monotonically") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 15; ++rep) {
        const DoseGrid grid(3);
        const ThresholdDistribution q = testutil::random_q(grid, rng);
        const WelfareSpec w = testutil::random_welfare(rng);
        const CostSpec g = testutil::random_cost(grid, rng);

        const TrialEvidence ev1 = testutil::evidence_from_q(q, {0, 3});
        const TrialEvidence ev2 = testutil::evidence_from_q(q, {0, 2, 3});
        const ConstraintSystem cs1 = build_constraints(ev1, {}, grid);
        const ConstraintSystem cs2 = build_constraints(ev2, {}, grid);

        for (int t = 0; t <= 3; ++t) {
            const Interval a = bound_net_welfare(cs1, t, w, g);
            const Interval b = bound_net_welfare(cs2, t, w, g);
            const double truth = net_welfare(q, t, w, g);
            CHECK(a.contains(truth, 1e-7));
            CHECK(b.contains(truth, 1e-7));
            // Extra arm never widens.
            CHECK(b.lo >= a.lo - 1e-9);
            CHECK(b.hi <= a.hi + 1e-9);

            // Collapse at trial doses.
            if (t == 0 || t == 3) CHECK(a.width() <= 1e-8);

            // Quadrant consistency at every dose.
            double lo_sum = 0.0;
            double hi_sum = 0.0;
            for (OutcomeCell cell : kOutcomeCells) {
                const Interval ci = bound_outcome_prob(cs1, t, cell);
                lo_sum += ci.lo;
                hi_sum += ci.hi;
            }
            CHECK(lo_sum <= 1.0 + 1e-8);
            CHECK(hi_sum >= 1.0 - 1e-8);
        }
    }
}

TEST_CASE("restriction rows never widen bounds when the truth satisfies them") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        const DoseGrid grid(2);
        const int n = grid.threshold_count();
        // Truth with no mass at t_e = 0, so no_ae_at_zero holds.
        std::vector<double> mass(static_cast<std::size_t>(n) * n, 0.0);
        std::exponential_distribution<double> exp1(1.0);
        double sum = 0.0;
        for (int h = 0; h < n; ++h)
            for (int i = 1; i < n; ++i) {
                const double v = exp1(rng);
                mass[static_cast<std::size_t>(h) * n + i] = v;
                sum += v;
            }
        for (double& v : mass) v /= sum;
        const ThresholdDistribution q(grid, std::move(mass));
        const WelfareSpec w = testutil::random_welfare(rng);
        const CostSpec g = CostSpec::zero(grid);

        const TrialEvidence ev = testutil::evidence_from_q(q, {0, 2});
        Restrictions r;
        r.no_ae_at_zero = true;
        const ConstraintSystem plain = build_constraints(ev, {}, grid);
        const ConstraintSystem restricted = build_constraints(ev, r, grid);
        REQUIRE(restricted.feasible());

        for (int t = 0; t <= 2; ++t) {
            const Interval a = bound_net_welfare(plain, t, w, g);
            const Interval b = bound_net_welfare(restricted, t, w, g);
            CHECK(b.lo >= a.lo - 1e-9);
            CHECK(b.hi <= a.hi + 1e-9);
            CHECK(b.contains(net_welfare(q, t, w, g), 1e-7));
        }
    }
}

TEST_CASE("independence bounds") {
    const DoseGrid g2(2);
    const WelfareSpec w{{1.0, 0.25, 0.75, 0.0}};
    const CostSpec zero = CostSpec::zero(g2);

    SUBCASE("rectangle-corner case matches hand values and a grid scan") {
        // Arm 0: pd=0.75, pe=0; arm 2: pd=0.25, pe=0.6; both factorized.
        auto product_joint = [](double pd, double pe) {
            return OutcomeDistribution({(1 - pd) * (1 - pe), pd * (1 - pe),
                                        (1 - pd) * pe, pd * pe});
        };
        const TrialEvidence ev({{0, product_joint(0.75, 0.0), {}},
                                {2, product_joint(0.25, 0.6), {}}},
                               g2);
        const IndependenceBounds b = independence_bounds(ev, g2, 1, w, zero);
        CHECK(b.p_disease.lo == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(b.p_disease.hi == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(b.p_ae.lo == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
        CHECK(b.p_ae.hi == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(b.net_welfare.lo == doctest::Approx(0.2875).epsilon(1e-9));
        CHECK(b.net_welfare.hi == doctest::Approx(0.8125).epsilon(1e-9));

        // 100x100 scan over the marginal rectangle.
        double scan_lo = 1e9;
        double scan_hi = -1e9;
        for (int a = 0; a <= 100; ++a) {
            for (int c = 0; c <= 100; ++c) {
                const double pd = 0.25 + 0.5 * a / 100.0;
                const double pe = 0.6 * c / 100.0;
                const double v = (1 - pd) * (1 - pe) * w.values[0] +
                                 pd * (1 - pe) * w.values[1] +
                                 (1 - pd) * pe * w.values[2] + pd * pe * w.values[3];
                scan_lo = std::min(scan_lo, v);
                scan_hi = std::max(scan_hi, v);
            }
        }
        CHECK(b.net_welfare.lo == doctest::Approx(scan_lo).epsilon(1e-6));
        CHECK(b.net_welfare.hi == doctest::Approx(scan_hi).epsilon(1e-6));
    }

    SUBCASE("at a trial dose all three intervals are degenerate") {
        const OutcomeDistribution joint({0.25 * 0.4, 0.75 * 0.4, 0.25 * 0.6, 0.75 * 0.6});
        const TrialEvidence ev({{1, joint, {}}}, g2);
        const IndependenceBounds b = independence_bounds(ev, g2, 1, w, zero);
        CHECK(b.p_disease.width() <= 1e-12);
        CHECK(b.p_ae.width() <= 1e-12);
        CHECK(b.net_welfare.width() <= 1e-12);
        CHECK(b.p_disease.lo == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(b.p_ae.lo == doctest::Approx(0.6).epsilon(1e-12));
    }

    SUBCASE("extrapolation outside the trial range uses the outer endpoints") {
        const OutcomeDistribution joint({0.25 * 0.4, 0.75 * 0.4, 0.25 * 0.6, 0.75 * 0.6});
        const TrialEvidence ev({{1, joint, {}}}, g2);
        const IndependenceBounds below = independence_bounds(ev, g2, 0, w, zero);
        CHECK(below.p_disease.lo == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(below.p_disease.hi == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(below.p_ae.lo == doctest::Approx(0.0).scale(1.0));
        CHECK(below.p_ae.hi == doctest::Approx(0.6).epsilon(1e-12));
        const IndependenceBounds above = independence_bounds(ev, g2, 2, w, zero);
        CHECK(above.p_disease.lo == doctest::Approx(0.0).scale(1.0));
        CHECK(above.p_disease.hi == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(above.p_ae.hi == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("non-factorizing arm refutes the restriction") {
        // The worked-example arm at t = 2 as printed at 3 decimals: the joint
        // deviates from the product of its marginals by about 2.5e-4.
        const TrialEvidence ev(
            {{2, OutcomeDistribution({0.25, 0.083, 0.5, 0.167}), {}}}, g2);
        CHECK_THROWS_AS(independence_bounds(ev, g2, 1, w, zero),
                        RestrictionRefutedError);
        try {
            independence_bounds(ev, g2, 1, w, zero);
        } catch (const RestrictionRefutedError& e) {
            CHECK(e.arm_dose() == 2);
            CHECK(e.deviation() > 1e-6);
            CHECK(e.deviation() < 1e-3);
        }
    }
}
