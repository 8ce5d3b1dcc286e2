#include "confsel/core_types.hpp"
#include "confsel/exact_sum.hpp"
#include "confsel/parallel.hpp"
#include "confsel/rng.hpp"
#include "confsel/scores.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

using namespace confsel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

TEST(Scores, ResExamples) {
    EXPECT_EQ(score_res(5, 2), 3);
    EXPECT_EQ(score_res(0, 0), 0);
    EXPECT_EQ(score_res(1.5, 2.5), -1.0);
    EXPECT_THROW(score_res(kNaN, 0), std::invalid_argument);
}

TEST(Scores, ClipExamples) {
    EXPECT_DOUBLE_EQ(score_clip(1, 0, 100, 0.3), 99.7);
    EXPECT_DOUBLE_EQ(score_clip(0, 0, 100, 0.3), -0.3);
    EXPECT_EQ(score_clip(3, 5, 100, 1), 4);
    EXPECT_THROW(score_clip(1, 0, kInf, 0), std::invalid_argument);
}

TEST(Scores, CqrExamples) {
    EXPECT_EQ(score_cqr(2, 1), 1);
    EXPECT_EQ(score_cqr(1, 1), 0);
    EXPECT_EQ(score_cqr(-1, 0.5), -1.5);
}

TEST(Scores, CdfPassThroughRejectsOutOfRange) {
    EXPECT_EQ(score_cdf(0.25), 0.25);
    EXPECT_THROW(score_cdf(1.5), std::invalid_argument);
    EXPECT_THROW(score_cdf(-0.1), std::invalid_argument);
}

TEST(Scores, ValidateMonotoneExamples) {
    const std::vector<std::vector<ScoreRow>> inc{{{1, 0.5}, {2, 0.7}}};
    EXPECT_TRUE(validate_monotone(inc).ok);

    const std::vector<std::vector<ScoreRow>> dec{{{1, 0.9}, {2, 0.7}}};
    const auto report = validate_monotone(dec);
    ASSERT_FALSE(report.ok);
    EXPECT_EQ(report.violation->group, 0u);
    EXPECT_EQ(report.violation->first_row, 0u);
    EXPECT_EQ(report.violation->second_row, 1u);

    const std::vector<std::vector<ScoreRow>> flat{{{1, 0.5}, {2, 0.5}}};
    EXPECT_TRUE(validate_monotone(flat).ok);
}

TEST(Scores, ValidateMonotoneFindsViolationAgainstEarlierMax) {
    // Unsorted rows; the drop is relative to y = 2, not the adjacent y = 3 row.
    const std::vector<std::vector<ScoreRow>> g{{{1, 0.0}, {2, 5.0}, {3, 5.0}},
                                               {{3, 1.0}, {1, 0.0}, {2, 2.0}}};
    const auto report = validate_monotone(g);
    ASSERT_FALSE(report.ok);
    EXPECT_EQ(report.violation->group, 1u);
    EXPECT_EQ(report.violation->first_row, 2u);
    EXPECT_EQ(report.violation->second_row, 0u);
}

TEST(Scores, AllConstructorsMonotoneOnRandomGrids) {
    rng::KeyedStream s(11, rng::Stream::trial_data, 0);
    std::vector<std::vector<ScoreRow>> res, clip, cqr;
    for (int g = 0; g < 200; ++g) {
        const double mu = 3.0 * s.normal();
        const double c = s.normal();
        const double big_m = 2.0 * std::max(std::abs(mu), std::abs(c)) + 1.0;
        std::vector<ScoreRow> r1, r2, r3;
        for (int k = 0; k < 20; ++k) {
            const double y = 4.0 * s.normal();
            r1.push_back({y, score_res(y, mu)});
            r2.push_back({y, score_clip(y, c, big_m, mu)});
            r3.push_back({y, score_cqr(y, mu)});
        }
        res.push_back(r1);
        clip.push_back(r2);
        cqr.push_back(r3);
    }
    EXPECT_TRUE(validate_monotone(res).ok);
    EXPECT_TRUE(validate_monotone(clip).ok);
    EXPECT_TRUE(validate_monotone(cqr).ok);
}

TEST(Scores, ClipSeparatesAboveAndBelowThreshold) {
    rng::KeyedStream s(12, rng::Stream::trial_data, 0);
    std::vector<double> mu(50), c(50);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        mu[i] = 2.0 * s.normal();
        c[i] = s.normal();
    }
    // Separation needs M > 2 max(|mu| v |c|) + |c| over the supplied rows.
    double bound = 0.0, c_max = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        bound = std::max({bound, std::abs(mu[i]), std::abs(c[i])});
        c_max = std::max(c_max, std::abs(c[i]));
    }
    const double big_m = 2.0 * bound + c_max + 0.5;
    double lowest_above = kInf, highest_below = -kInf;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        lowest_above = std::min(lowest_above, score_clip(c[i] + 1.0, c[i], big_m, mu[i]));
        highest_below = std::max(highest_below, score_clip(c[i] - 1.0, c[i], big_m, mu[i]));
    }
    EXPECT_GT(lowest_above, highest_below);
}

TEST(ScoreSpec, ClipValidatesM) {
    const std::vector<double> mu{0.5, -2.0};
    const std::vector<double> c{0.0, 1.0};
    EXPECT_EQ(ScoreSpec::clip(mu, c).clip_m, 5.0);
    EXPECT_THROW(ScoreSpec::clip(mu, c, 3.0), std::invalid_argument);
    const ScoreSpec spec = ScoreSpec::clip(mu, c, 10.0);
    EXPECT_EQ(spec.evaluate(1.0, 0.5, 0.0), 9.5);
    EXPECT_EQ(spec.evaluate(-1.0, 0.5, 0.0), -0.5);
}

TEST(CoreTypes, RejectBadWeightsAndLengths) {
    EXPECT_THROW(WeightedCalibration({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(WeightedCalibration({1.0}, {-1.0}), std::invalid_argument);
    EXPECT_THROW(WeightedCalibration({1.0}, {kInf}), std::invalid_argument);
    EXPECT_THROW(WeightedCalibration({kNaN}, {1.0}), std::invalid_argument);
    EXPECT_THROW(WeightedCalibration({1.0, 2.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(WeightedTest({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(WeightedTest({1.0}, {1.0}, std::vector<bool>{true, false}), std::invalid_argument);
    EXPECT_NO_THROW(WeightedCalibration({}, {}));
    EXPECT_NO_THROW(WeightedTest({1.0}, {2.0}, std::vector<bool>{true}));
}

TEST(CoreTypes, MethodNamesRoundTrip) {
    for (Method m : {Method::wbh, Method::wcs_hete, Method::wcs_homo, Method::wcs_dtm, Method::hc_wcs}) {
        EXPECT_EQ(parse_method(to_string(m)), m);
    }
    EXPECT_EQ(parse_method("wcs_homo"), Method::wcs_homo);
    EXPECT_FALSE(parse_method("bh").has_value());
    EXPECT_EQ(parse_pruning("dtm"), Pruning::dtm);
}

TEST(CoreTypes, SelectionConfigValidation) {
    SelectionConfig c;
    EXPECT_NO_THROW(c.validate());
    c.q = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.q = 0.1;
    c.tie_tolerance = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ExactSum, CorrectlyRoundedAndOrderFree) {
    const std::vector<double> a{1e100, 1.0, -1e100};
    EXPECT_EQ(exact_sum(a), 1.0);
    const std::vector<double> tenths(10, 0.1);
    EXPECT_EQ(exact_sum(tenths), 1.0);
    // Half-way case: 1 + 2^-53 + 2^-106 rounds up, 1 + 2^-53 rounds to even.
    const std::vector<double> up{1.0, std::ldexp(1.0, -53), std::ldexp(1.0, -106)};
    EXPECT_EQ(exact_sum(up), std::nextafter(1.0, 2.0));
    const std::vector<double> even{1.0, std::ldexp(1.0, -53)};
    EXPECT_EQ(exact_sum(even), 1.0);

    rng::KeyedStream s(3, rng::Stream::trial_data, 0);
    std::vector<double> xs(500);
    for (double& x : xs) x = std::exp(8.0 * s.normal());
    const double forward = exact_sum(xs);
    std::reverse(xs.begin(), xs.end());
    EXPECT_EQ(exact_sum(xs), forward);
}

TEST(Rng, KeyedStreamsAreDeterministicAndDistinct) {
    rng::KeyedStream a(42, rng::Stream::tie_break, 7), b(42, rng::Stream::tie_break, 7);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    std::set<double> firsts;
    for (std::uint64_t j = 0; j < 1000; ++j) firsts.insert(rng::keyed_uniform(42, rng::Stream::tie_break, j));
    EXPECT_EQ(firsts.size(), 1000u);
    EXPECT_NE(rng::keyed_uniform(42, rng::Stream::prune_hete, 0),
              rng::keyed_uniform(42, rng::Stream::prune_homo, 0));
    EXPECT_NE(rng::derive_seed(1, rng::Stream::selection, 0), rng::derive_seed(1, rng::Stream::selection, 1));
}

TEST(Rng, UniformAndNormalMoments) {
    rng::KeyedStream s(5, rng::Stream::trial_data, 0);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = s.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 0.005);
    EXPECT_NEAR(sn / n, 0.0, 0.01);
    EXPECT_NEAR(sn2 / n, 1.0, 0.02);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[s.below(7)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Parallel, WorkerLimitIsScoped) {
    const int base = worker_count();
    EXPECT_GE(base, 1);
    {
        ScopedWorkerLimit one(1);
        EXPECT_EQ(worker_count(), 1);
    }
    EXPECT_EQ(worker_count(), base);
}
