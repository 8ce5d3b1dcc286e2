#include "confsel/parallel.hpp"
#include "confsel/pvalues.hpp"
#include "confsel/reference.hpp"

#include "fuzz.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace confsel;
using confsel::testing::random_instance;

namespace {

WeightedCalibration calib_of(std::vector<double> v, std::vector<double> w) {
    return WeightedCalibration(std::move(v), std::move(w));
}

WeightedTest test_of(std::vector<double> v, std::vector<double> w) {
    return WeightedTest(std::move(v), std::move(w));
}

} // namespace

TEST(NonRandomized, Examples) {
    EXPECT_EQ(wcp_nonrandomized(calib_of({5}, {1}), test_of({10}, {1})).values[0], 1.0);
    EXPECT_EQ(wcp_nonrandomized(calib_of({5}, {1}), test_of({0}, {1})).values[0], 0.5);
    EXPECT_EQ(wcp_nonrandomized(calib_of({1, 4}, {2, 3}), test_of({2.5}, {5})).values[0], 0.7);
}

TEST(NonRandomized, EmptyCalibrationGivesOne) {
    const auto p = wcp_nonrandomized(WeightedCalibration(), test_of({1, -3}, {1, 2}));
    EXPECT_EQ(p.values, (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(p.kind, PValueKind::nonrandomized);
}

TEST(Randomized, Examples) {
    const auto calib = calib_of({1, 4}, {2, 3});
    const auto test = test_of({2.5}, {5});
    const std::vector<double> u0{0.0}, u1{1.0}, half{0.5};
    EXPECT_EQ(wcp_randomized(calib, test, u0).values[0], 0.2);
    EXPECT_EQ(wcp_randomized(calib, test, u1).values[0], 0.7);
    EXPECT_EQ(wcp_randomized(calib_of({2.5}, {1}), test_of({2.5}, {1}), half).values[0], 0.5);
}

TEST(Randomized, RejectsBadTieBreakers) {
    const auto calib = calib_of({1}, {1});
    const auto test = test_of({2}, {1});
    const std::vector<double> bad{1.5}, short_u{};
    EXPECT_THROW(wcp_randomized(calib, test, bad), std::invalid_argument);
    EXPECT_THROW(wcp_randomized(calib, test, short_u), std::invalid_argument);
}

TEST(Randomized, SeededRecordsSeedAndMatchesExplicitU) {
    const auto inst = random_instance(1, 30, 20);
    const auto seeded = wcp_randomized(inst.calib, inst.test, std::uint64_t{77});
    const auto u = tie_break_uniforms(77, inst.test.size());
    EXPECT_EQ(seeded.seed_used, std::uint64_t{77});
    EXPECT_EQ(seeded.values, wcp_randomized(inst.calib, inst.test, u).values);
}

TEST(Randomized, UOneEqualsNonRandomizedWithoutTies) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = random_instance(seed, 40, 20);
        const std::vector<double> ones(inst.test.size(), 1.0);
        EXPECT_EQ(wcp_randomized(inst.calib, inst.test, ones).values,
                  wcp_nonrandomized(inst.calib, inst.test).values);
    }
}

TEST(Aux, Examples) {
    const auto calib = calib_of({1, 4}, {2, 3});
    const auto test = test_of({2.5, 0.5}, {5, 7});
    EXPECT_EQ(aux_pvalues(calib, test, 0), (std::vector<double>{0.0}));
    EXPECT_EQ(aux_pvalues(calib, test, 1), (std::vector<double>{0.75}));
    EXPECT_TRUE(aux_pvalues(calib, test_of({1}, {1}), 0).empty());
    EXPECT_THROW(aux_pvalues(calib, test, 2), std::out_of_range);
}

TEST(Unweighted, Examples) {
    const std::vector<double> calib{1, 2, 3}, test{2.5}, u{0.25};
    EXPECT_EQ(unweighted_pvalues(calib, test, u).values[0], 0.5625);
    EXPECT_EQ(wcp_randomized(calib_of({1, 2, 3}, {1, 1, 1}), test_of({2.5}, {1}), u).values[0], 0.5625);
    const std::vector<double> none{}, u3{0.3};
    EXPECT_EQ(unweighted_pvalues(none, test, u3).values[0], 0.3);
}

TEST(Oracle, Examples) {
    const auto calib = calib_of({0, 1}, {1, 1});
    const std::vector<double> oracle{-0.5}, w{1};
    EXPECT_EQ(oracle_pvalues(calib, oracle, w).values[0], 1.0 / 3.0);
    EXPECT_EQ(oracle_pvalues(calib, oracle, w).kind, PValueKind::oracle);
}

TEST(Oracle, CoincidesWithObservedWhenThresholdIsOutcome) {
    const auto inst = random_instance(9, 30, 15);
    const auto observed = wcp_nonrandomized(inst.calib, inst.test);
    const auto oracle = oracle_pvalues(inst.calib, inst.test.scores(), inst.test.weights());
    EXPECT_EQ(observed.values, oracle.values);
}

TEST(Oracle, NullUnitsHaveSmallerOraclePValue) {
    rng::KeyedStream s(4, rng::Stream::trial_data, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto inst = random_instance(1000 + rep, 30, 15);
        // Oracle scores below the observed ones mimic the null event V <= V_hat.
        std::vector<double> oracle(inst.test.scores().begin(), inst.test.scores().end());
        for (double& v : oracle) v -= std::abs(s.normal());
        const auto obs = wcp_nonrandomized(inst.calib, inst.test);
        const auto orc = oracle_pvalues(inst.calib, oracle, inst.test.weights());
        for (std::size_t j = 0; j < oracle.size(); ++j) EXPECT_LE(orc.values[j], obs.values[j]);
    }
}

// Properties ---------------------------------------------------------------------

TEST(PValueProperties, InUnitIntervalAndMatchReferenceBitwise) {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const bool discrete = seed % 2 == 1;
        const auto inst = random_instance(seed, 60, 25, discrete);
        const auto u = tie_break_uniforms(seed, inst.test.size());
        const auto fast_nr = wcp_nonrandomized(inst.calib, inst.test).values;
        const auto fast_r = wcp_randomized(inst.calib, inst.test, u).values;
        EXPECT_EQ(fast_nr, reference::pvalues_nonrandomized(inst.calib, inst.test)) << seed;
        EXPECT_EQ(fast_r, reference::pvalues_randomized(inst.calib, inst.test, u)) << seed;
        for (double p : fast_nr) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
        for (double p : fast_r) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
}

TEST(PValueProperties, TieToleranceMatchesReference) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = random_instance(seed, 40, 20);
        const auto u = tie_break_uniforms(seed, inst.test.size());
        EXPECT_EQ(wcp_randomized(inst.calib, inst.test, u, 0.3).values,
                  reference::pvalues_randomized(inst.calib, inst.test, u, 0.3));
        EXPECT_EQ(wcp_nonrandomized(inst.calib, inst.test, 0.3).values,
                  reference::pvalues_nonrandomized(inst.calib, inst.test, 0.3));
    }
}

TEST(PValueProperties, AuxRowsMatchReferenceBitwise) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = random_instance(seed, 40, 15, seed % 3 == 0);
        const auto matrix = aux_pvalue_matrix(inst.calib, inst.test);
        for (std::size_t j = 0; j < inst.test.size(); ++j) {
            const auto row = reference::aux_row(inst.calib, inst.test, j);
            const auto fast = matrix.row(j);
            ASSERT_EQ(std::vector<double>(fast.begin(), fast.end()), row) << seed;
            std::vector<double> without_anchor;
            for (std::size_t l = 0; l < row.size(); ++l) {
                if (l != j) without_anchor.push_back(row[l]);
            }
            EXPECT_EQ(aux_pvalues(inst.calib, inst.test, j), without_anchor);
        }
    }
}

TEST(PValueProperties, ScaleInvariance) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = random_instance(seed, 40, 20, seed % 2 == 0);
        const double lambda = std::exp(3.0 * rng::KeyedStream(seed, rng::Stream::study, 0).normal());
        std::vector<double> cw(inst.calib.weights().begin(), inst.calib.weights().end());
        std::vector<double> tw(inst.test.weights().begin(), inst.test.weights().end());
        for (double& w : cw) w *= lambda;
        for (double& w : tw) w *= lambda;
        const WeightedCalibration calib2(
            std::vector<double>(inst.calib.scores().begin(), inst.calib.scores().end()), cw);
        const auto test2 = confsel::testing::with_weights(inst.test, tw);
        const auto u = tie_break_uniforms(seed, inst.test.size());
        const auto a = wcp_randomized(inst.calib, inst.test, u).values;
        const auto b = wcp_randomized(calib2, test2, u).values;
        for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
    }
}

TEST(PValueProperties, UnweightedReductionIsExact) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto inst = random_instance(seed, 50, 30, seed % 2 == 0);
        const std::vector<double> cw(inst.calib.size(), 1.0), tw(inst.test.size(), 1.0);
        const WeightedCalibration calib(
            std::vector<double>(inst.calib.scores().begin(), inst.calib.scores().end()), cw);
        const auto test = confsel::testing::with_weights(inst.test, tw);
        const auto u = tie_break_uniforms(seed, test.size());
        EXPECT_EQ(wcp_randomized(calib, test, u).values,
                  unweighted_pvalues(calib.scores(), test.scores(), u).values);
    }
}

TEST(PValueProperties, NondecreasingInTestScore) {
    const auto calib = random_instance(5, 50, 1).calib;
    const std::vector<double> u{0.4};
    double prev = -1.0;
    for (double v = -4.0; v <= 4.0; v += 0.01) {
        const double p = wcp_randomized(calib, test_of({v}, {1.3}), u).values[0];
        EXPECT_GE(p, prev);
        prev = p;
    }
}

TEST(PValueProperties, ThreadCountDoesNotChangeOutput) {
    const auto inst = random_instance(3, 3000, 400, false, 300);
    std::vector<double> serial, parallel;
    {
        ScopedWorkerLimit one(1);
        serial = wcp_randomized(inst.calib, inst.test, std::uint64_t{5}).values;
    }
    parallel = wcp_randomized(inst.calib, inst.test, std::uint64_t{5}).values;
    EXPECT_EQ(serial, parallel);
}

TEST(PValueProperties, DirectScalarMatchesVectorised) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = random_instance(seed, 30, 10, true);
        const auto u = tie_break_uniforms(seed, inst.test.size());
        const auto p = wcp_randomized(inst.calib, inst.test, u).values;
        for (std::size_t j = 0; j < p.size(); ++j) {
            EXPECT_NEAR(weighted_pvalue(inst.calib.scores(), inst.calib.weights(),
                                        inst.test.scores()[j], inst.test.weights()[j], u[j]),
                        p[j], 1e-12);
        }
    }
}
