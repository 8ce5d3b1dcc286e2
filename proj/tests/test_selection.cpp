#include "confsel/exact_sum.hpp"
#include "confsel/parallel.hpp"
#include "confsel/pvalues.hpp"
#include "confsel/reference.hpp"
#include "confsel/selection.hpp"

#include "fuzz.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace confsel;
using confsel::testing::random_instance;
using Indices = std::vector<std::size_t>;

namespace {

SelectionConfig config_for(Method method, double q, std::uint64_t seed = 0) {
    SelectionConfig c;
    c.method = method;
    c.q = q;
    c.seed = seed;
    return c;
}

bool subset(const Indices& a, const Indices& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

const WeightedCalibration kTwoPoint({0.0, 1.0}, {1.0, 1.0});

} // namespace

TEST(Bh, Examples) {
    const std::vector<double> p1{0.01, 0.02, 0.30, 0.90};
    const auto r1 = bh(p1, 0.1);
    EXPECT_EQ(r1.selected, (Indices{0, 1}));
    EXPECT_EQ(r1.bh_kstar, 2u);
    const std::vector<double> ones{1, 1, 1};
    EXPECT_TRUE(bh(ones, 0.3).selected.empty());
    const std::vector<double> single{0.05};
    EXPECT_EQ(bh(single, 0.1).selected, (Indices{0}));
}

TEST(Bh, RejectsInvalidInput) {
    const std::vector<double> p{0.5};
    EXPECT_THROW(bh(p, 0.0), std::invalid_argument);
    EXPECT_THROW(bh(p, 1.0), std::invalid_argument);
    const std::vector<double> bad{1.2};
    EXPECT_THROW(bh(bad, 0.1), std::invalid_argument);
}

TEST(Bh, MatchesDirectCountAndFdpThresholdRepresentation) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        rng::KeyedStream s(seed, rng::Stream::trial_data, 0);
        const std::size_t m = 1 + s.below(40);
        std::vector<double> p(m);
        // Mix of small, moderate and exactly tied p-values.
        for (double& v : p) v = s.below(4) == 0 ? 0.05 * s.uniform() : (s.below(3) == 0 ? 0.25 : s.uniform());
        const double q = 0.05 + 0.4 * s.uniform();
        const auto r = bh(p, q);
        EXPECT_EQ(r.selected, reference::bh_rejections(p, q)) << seed;
        EXPECT_EQ(r.bh_kstar, reference::bh_kstar(p, q));
        EXPECT_EQ(r.selected, reference::bh_by_fdp_threshold(p, q)) << seed;
    }
}

TEST(Bh, LoweringOnePValueNeverRemovesRejections) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        rng::KeyedStream s(seed, rng::Stream::trial_data, 1);
        const std::size_t m = 1 + s.below(30);
        std::vector<double> p(m);
        for (double& v : p) v = s.uniform() * s.uniform();
        const auto before = bh(p, 0.2).selected;
        const std::size_t j = s.below(m);
        p[j] *= s.uniform();
        EXPECT_TRUE(subset(before, bh(p, 0.2).selected)) << seed;
    }
}

TEST(Wcs, HandTracedInstanceSelectsBoth) {
    const WeightedTest test({-0.5, -0.2}, {1.0, 1.0});
    for (Method m : {Method::wcs_hete, Method::wcs_homo, Method::wcs_dtm}) {
        const auto r = wcs(kTwoPoint, test, config_for(m, 0.5, 3));
        EXPECT_NEAR(r.pvalues[0], 1.0 / 3.0, 1e-15);
        EXPECT_NEAR(r.pvalues[1], 1.0 / 3.0, 1e-15);
        EXPECT_EQ(r.rhat_sizes, (Indices{2, 2}));
        EXPECT_EQ(r.s, (std::vector<double>{0.5, 0.5}));
        EXPECT_EQ(r.first_step, (Indices{0, 1}));
        EXPECT_EQ(r.selected, (Indices{0, 1}));
        EXPECT_EQ(r.r_star, 2u);
    }
    // The naive path must agree on the same instance.
    EXPECT_EQ(reference::wcs(kTwoPoint, test, config_for(Method::wcs_dtm, 0.5)).selected,
              (Indices{0, 1}));
}

TEST(Wcs, HandTracedInstanceSelectsNothing) {
    const WeightedTest test({-0.5, 2.0}, {1.0, 1.0});
    for (Method m : {Method::wcs_hete, Method::wcs_homo, Method::wcs_dtm}) {
        const auto r = wcs(kTwoPoint, test, config_for(m, 0.5, 3));
        EXPECT_NEAR(r.pvalues[0], 1.0 / 3.0, 1e-15);
        EXPECT_EQ(r.pvalues[1], 1.0);
        EXPECT_EQ(r.s, (std::vector<double>{0.25, 0.5}));
        EXPECT_TRUE(r.first_step.empty());
        EXPECT_TRUE(r.selected.empty());
    }
}

TEST(Wcs, EmptyTestSet) {
    const auto r = wcs(kTwoPoint, WeightedTest(), config_for(Method::wcs_hete, 0.1));
    EXPECT_TRUE(r.selected.empty());
    EXPECT_EQ(r.r_star, 0u);
    EXPECT_TRUE(hc_wcs(kTwoPoint, WeightedTest(), config_for(Method::hc_wcs, 0.1)).selected.empty());
}

TEST(Wcs, RejectsNonWcsMethod) {
    const WeightedTest test({0.0}, {1.0});
    EXPECT_THROW(wcs(kTwoPoint, test, config_for(Method::wbh, 0.1)), std::invalid_argument);
}

TEST(EValues, Examples) {
    const std::vector<double> p{1.0 / 3.0};
    const Indices two{2};
    EXPECT_EQ(evalues_from_wcs(p, two, 0.5, 2).values[0], 2.0);
    const std::vector<double> p1{1.0};
    const Indices one{1};
    EXPECT_EQ(evalues_from_wcs(p1, one, 0.1, 10).values[0], 0.0);
    const std::vector<double> p0{0.0};
    const Indices all{10};
    EXPECT_DOUBLE_EQ(evalues_from_wcs(p0, all, 0.25, 10).values[0], 4.0);
    const Indices zero{0};
    EXPECT_THROW(evalues_from_wcs(p0, zero, 0.1, 1), std::invalid_argument);
}

TEST(EBh, Examples) {
    EXPECT_EQ(ebh({{10, 0, 0, 0}}, 0.5), (Indices{0}));
    EXPECT_TRUE(ebh({{0, 0}}, 0.3).empty());
    const WeightedTest test({-0.5, -0.2}, {1.0, 1.0});
    const auto r = wcs(kTwoPoint, test, config_for(Method::wcs_dtm, 0.5));
    EXPECT_EQ(ebh(evalues_from_wcs(r.pvalues, r.rhat_sizes, 0.5, 2), 0.5), r.selected);
}

TEST(HcWcs, NumericallyIdenticalToWcs) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = random_instance(seed, 40, 20);
        for (Pruning pr : {Pruning::hete, Pruning::homo, Pruning::dtm}) {
            auto hc = config_for(Method::hc_wcs, 0.2, seed);
            hc.hc_pruning = pr;
            const Method m = pr == Pruning::hete ? Method::wcs_hete
                           : pr == Pruning::homo ? Method::wcs_homo
                                                 : Method::wcs_dtm;
            const auto a = hc_wcs(inst.calib, inst.test, hc);
            const auto b = wcs(inst.calib, inst.test, config_for(m, 0.2, seed));
            EXPECT_EQ(a.selected, b.selected);
            EXPECT_EQ(a.s, b.s);
            EXPECT_EQ(a.pvalues, b.pvalues);
        }
    }
}

TEST(HcWcs, NegativesOnlyRatioIdentity) {
    // Binary labels with a clip-type score: V(x, 0) = -mu, V(x, 1) = M - mu.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        rng::KeyedStream s(seed, rng::Stream::trial_data, 2);
        const std::size_t n = 20 + s.below(40), m = 1 + s.below(20);
        const double big_m = 3.0;
        std::vector<double> full_v, full_w, neg_v, neg_w, tv, tw;
        ExactSum neg_total, all_total;
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = s.uniform();
            const bool positive = s.uniform() < mu;
            const double w = std::exp(s.normal());
            full_v.push_back((positive ? big_m : 0.0) - mu);
            full_w.push_back(w);
            all_total.add(w);
            if (!positive) {
                neg_v.push_back(-mu);
                neg_w.push_back(w);
                neg_total.add(w);
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            tv.push_back(-s.uniform());
            tw.push_back(std::exp(s.normal()));
        }
        const WeightedTest test(tv, tw);
        const auto p_full = wcp_nonrandomized(WeightedCalibration(full_v, full_w), test).values;
        const auto p_neg = wcp_nonrandomized(WeightedCalibration(neg_v, neg_w), test).values;
        for (std::size_t j = 0; j < m; ++j) {
            const double ratio = (neg_total.value() + tw[j]) / (all_total.value() + tw[j]);
            EXPECT_NEAR(p_full[j] / p_neg[j], ratio, 1e-12) << seed << ' ' << j;
        }
    }
}

// Properties --------------------------------------------------------------------

TEST(WcsProperties, MatchesReferenceBitwise) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto inst = random_instance(seed, 50, 25, seed % 4 == 0);
        const double q = 0.05 + 0.45 * rng::keyed_uniform(seed, rng::Stream::study, 1);
        for (Method m : {Method::wcs_hete, Method::wcs_homo, Method::wcs_dtm}) {
            const auto cfg = config_for(m, q, seed);
            const auto fast = wcs(inst.calib, inst.test, cfg);
            const auto slow = reference::wcs(inst.calib, inst.test, cfg);
            ASSERT_EQ(fast.pvalues, slow.pvalues) << seed;
            ASSERT_EQ(fast.rhat_sizes, slow.rhat_sizes) << seed;
            ASSERT_EQ(fast.s, slow.s) << seed;
            ASSERT_EQ(fast.first_step, slow.first_step) << seed;
            ASSERT_EQ(fast.selected, slow.selected) << seed;
            ASSERT_EQ(fast.r_star, slow.r_star) << seed;
        }
    }
}

TEST(WcsProperties, InclusionsAndSelfRejection) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto inst = random_instance(seed, 50, 30, seed % 3 == 0);
        const double q = 0.1 + 0.4 * rng::keyed_uniform(seed, rng::Stream::study, 2);
        const auto hete = wcs(inst.calib, inst.test, config_for(Method::wcs_hete, q, seed));
        const auto homo = wcs(inst.calib, inst.test, config_for(Method::wcs_homo, q, seed));
        const auto dtm = wcs(inst.calib, inst.test, config_for(Method::wcs_dtm, q, seed));
        EXPECT_TRUE(subset(dtm.selected, hete.selected));
        EXPECT_TRUE(subset(dtm.selected, homo.selected));
        EXPECT_TRUE(subset(hete.selected, hete.first_step));
        EXPECT_TRUE(subset(homo.selected, homo.first_step));
        EXPECT_EQ(hete.r_star, hete.selected.size());
        const double floor = bh_threshold(q, 1, inst.test.size());
        for (std::size_t j = 0; j < inst.test.size(); ++j) {
            EXPECT_GE(hete.rhat_sizes[j], 1u);
            EXPECT_GE(hete.s[j], floor);
        }
    }
}

TEST(WcsProperties, ZeroXiKeepsFirstStep) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = random_instance(seed, 40, 20);
        const auto fs = wcs_first_step(inst.calib, inst.test, 0.3);
        const std::vector<double> zeros(inst.test.size(), 0.0);
        EXPECT_EQ(prune(fs.first_step, fs.rhat_sizes, zeros).selected, fs.first_step);
    }
}

TEST(WcsProperties, EbhEquivalence) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto inst = random_instance(seed, 50, 30);
        const double q = 0.05 + 0.45 * rng::keyed_uniform(seed, rng::Stream::study, 3);
        const auto dtm = wcs(inst.calib, inst.test, config_for(Method::wcs_dtm, q));
        const auto e = evalues_from_wcs(dtm.pvalues, dtm.rhat_sizes, q, inst.test.size());
        EXPECT_EQ(ebh(e, q), dtm.selected) << seed;
    }
}

TEST(WcsProperties, StepUpEquivalence) {
    // p_j <= s_j iff BH on the auxiliary row with p_j at position j rejects j.
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = random_instance(seed, 40, 20, seed % 2 == 0);
        const double q = 0.2;
        const auto fs = wcs_first_step(inst.calib, inst.test, q);
        for (std::size_t j = 0; j < inst.test.size(); ++j) {
            auto row = reference::aux_row(inst.calib, inst.test, j);
            row[j] = fs.pvalues[j];
            const auto rej = bh(row, q).selected;
            const bool in_bh = std::binary_search(rej.begin(), rej.end(), j);
            EXPECT_EQ(fs.pvalues[j] <= fs.s[j], in_bh) << seed << ' ' << j;
        }
    }
}

TEST(WcsProperties, LeaveOneOutOracleInvariance) {
    // For a null unit in R^(1), recomputing R_j with oracle (true-outcome)
    // scores for the anchor must give the same set.
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto inst = random_instance(seed, 40, 20);
        rng::KeyedStream s(seed, rng::Stream::trial_data, 3);
        const double q = 0.3;
        const auto fs = wcs_first_step(inst.calib, inst.test, q);
        for (std::size_t j : fs.first_step) {
            const double oracle_score = inst.test.scores()[j] - std::abs(s.normal());
            // Oracle row: anchor score replaced, anchor position forced to 0.
            const auto aux = aux_pvalues(inst.calib, inst.test, j, 0.0, oracle_score);
            std::vector<double> row;
            for (std::size_t l = 0, k = 0; l < inst.test.size(); ++l) {
                row.push_back(l == j ? 0.0 : aux[k++]);
            }
            EXPECT_EQ(bh(row, q).selected.size(), fs.rhat_sizes[j]) << seed << ' ' << j;
            ++checked;
        }
    }
    EXPECT_GT(checked, 100u);
}

TEST(WcsProperties, ThreadCountDoesNotChangeOutput) {
    const auto inst = random_instance(8, 2000, 300, false, 200);
    const auto cfg = config_for(Method::wcs_hete, 0.2, 5);
    SelectionResult serial;
    {
        ScopedWorkerLimit one(1);
        serial = wcs(inst.calib, inst.test, cfg);
    }
    const auto parallel = wcs(inst.calib, inst.test, cfg);
    EXPECT_EQ(serial.selected, parallel.selected);
    EXPECT_EQ(serial.s, parallel.s);
    EXPECT_EQ(serial.pvalues, parallel.pvalues);
}

TEST(RunSelection, WbhUsesSeededRandomizedPValues) {
    const auto inst = random_instance(21, 40, 20);
    const auto r = run_selection(inst.calib, inst.test, config_for(Method::wbh, 0.2, 9));
    const auto p = wcp_randomized(inst.calib, inst.test, std::uint64_t{9});
    EXPECT_EQ(r.pvalues, p.values);
    EXPECT_EQ(r.selected, bh(p.values, 0.2).selected);
    EXPECT_EQ(r.seed, std::uint64_t{9});
    auto nr = config_for(Method::wbh, 0.2, 9);
    nr.randomized_pvalues = false;
    EXPECT_EQ(run_selection(inst.calib, inst.test, nr).pvalues,
              wcp_nonrandomized(inst.calib, inst.test).values);
}
