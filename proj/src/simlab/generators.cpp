#include "confsel/simlab.hpp"

#include "confsel/rng.hpp"
#include "confsel/scores.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace confsel::simlab {

using rng::KeyedStream;
using rng::Stream;

namespace {

constexpr std::size_t kIteDim = 10;
constexpr std::size_t kBinaryDim = 5;
// Linear predictor of the synthetic logistic outcome model.
constexpr std::array<double, kBinaryDim> kBinaryBeta{1.5, -1.0, 0.75, 0.0, 0.0};
constexpr double kBinaryIntercept = -0.5;
// mu_hat lies in (0, 1) and the threshold is 0, so 2 * max(|mu_hat| v |c|) + 1 <= 3.
constexpr double kBinaryClipM = 3.0;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

bool is_ite(Scenario s) {
    return s == Scenario::ite1 || s == Scenario::ite2 || s == Scenario::ite3;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

/// Replaces the input weights by w * exp(eta) when weight_gamma > 1.
void perturb_weights(const SimulationSpec& spec, std::size_t trial_index,
                     std::vector<double>& calib_w, std::vector<double>& test_w) {
    if (!(spec.weight_gamma > 1.0)) return;
    KeyedStream stream(spec.master_seed, Stream::weight_noise, trial_index);
    const double spread = std::log(spec.weight_gamma);
    const auto apply = [&](std::vector<double>& w) {
        for (double& v : w) v *= std::exp(spread * (2.0 * stream.uniform() - 1.0));
    };
    apply(calib_w);
    apply(test_w);
}

GeneratedTrial assemble(const SimulationSpec& spec, std::size_t trial_index,
                        std::vector<double> calib_scores, std::vector<double> calib_w,
                        std::vector<double> test_scores, std::vector<double> test_w,
                        std::vector<bool> nulls) {
    GeneratedTrial out;
    out.calib_true_weights = calib_w;
    out.test_true_weights = test_w;
    perturb_weights(spec, trial_index, calib_w, test_w);
    out.calibration = WeightedCalibration(std::move(calib_scores), std::move(calib_w));
    out.test = WeightedTest(std::move(test_scores), std::move(test_w), std::move(nulls));
    return out;
}

// ITE ------------------------------------------------------------------------

struct IteUnit {
    double x1 = 0.0;
    double x2 = 0.0;
    double o0 = 0.0;
    double o1 = 0.0;
    double eps0 = 0.0;
    double eps1 = 0.0;
    bool treated = false;
};

IteUnit draw_ite_unit(const SimulationSpec& spec, KeyedStream& stream) {
    std::array<double, kIteDim> z{};
    for (auto& v : z) v = stream.normal();
    if (spec.covariance == Covariance::ar09) {
        // Stationary AR(1) recursion: Cov(X_k, X_j) = 0.9^|k - j|.
        for (std::size_t k = 1; k < kIteDim; ++k) z[k] = 0.9 * z[k - 1] + std::sqrt(0.19) * z[k];
    }
    IteUnit u;
    u.x1 = normal_cdf(z[0]);
    u.x2 = normal_cdf(z[1]);
    const double eps0 = stream.normal();
    const double eps_free = stream.normal();
    const double mix = stream.uniform();
    const double treat = stream.uniform();

    u.eps0 = eps0;
    switch (spec.coupling) {
    case Coupling::independent: u.eps1 = eps_free; break;
    case Coupling::positive: u.eps1 = eps0; break;
    case Coupling::negative: u.eps1 = -eps0; break;
    }
    const double mu1 = ite_mu1(spec.scenario, u.x1, u.x2);
    const double sigma = spec.sigma1_scale * ite_sigma1(u.x1);
    u.o1 = std::max(0.0, mu1 + sigma * u.eps1);
    u.o0 = spec.scenario == Scenario::ite3 ? ite_mu0(spec.scenario, u.x1, u.x2) + 0.1 * eps0
                                           : 0.1 * eps0;
    if (spec.scenario == Scenario::ite2 && mix < 0.1) {
        u.o1 = 0.1 * eps0 - 0.5;
        u.o0 = u.o1 + 0.05;
    }
    u.treated = treat < propensity(u.x1);
    return u;
}

/// P(O(1) <= y | X = x).
double ite_conditional_cdf(const SimulationSpec& spec, double x1, double x2, double y) {
    const double mu1 = ite_mu1(spec.scenario, x1, x2);
    const double sigma = spec.sigma1_scale * ite_sigma1(x1);
    double censored = 0.0;
    if (y >= 0.0) {
        censored = sigma > 0.0 ? normal_cdf((y - mu1) / sigma) : (y >= mu1 ? 1.0 : 0.0);
    }
    if (spec.scenario != Scenario::ite2) return censored;
    return 0.1 * normal_cdf((y + 0.5) / 0.1) + 0.9 * censored;
}

double ite_score(const SimulationSpec& spec, double x1, double x2, double y) {
    switch (spec.score) {
    case SimScore::oracle: return score_cdf(ite_conditional_cdf(spec, x1, x2, y));
    case SimScore::res: return score_res(y, ite_mu1(spec.scenario, x1, x2));
    case SimScore::cqr: {
        const double q = std::max(0.0, ite_mu1(spec.scenario, x1, x2) +
                                           spec.sigma1_scale * ite_sigma1(x1) *
                                               normal_quantile(spec.cqr_beta));
        return score_cqr(y, q);
    }
    case SimScore::clip: break;
    }
    throw std::invalid_argument("clip score needs a binary outcome");
}

// Outlier ----------------------------------------------------------------------

using Point = std::array<double, kOutlierDim>;

double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < kOutlierDim; ++k) s += a[k] * b[k];
    return s;
}

// Binary -----------------------------------------------------------------------

struct BinaryUnit {
    double mu_hat = 0.0;
    bool positive = false;
};

BinaryUnit draw_binary_unit(KeyedStream& stream) {
    double eta = kBinaryIntercept;
    for (std::size_t k = 0; k < kBinaryDim; ++k) eta += kBinaryBeta[k] * stream.normal();
    BinaryUnit u;
    u.mu_hat = sigmoid(eta);
    u.positive = stream.uniform() < u.mu_hat;
    return u;
}

double binary_score(const SimulationSpec& spec, double y, double mu_hat) {
    // The oracle flag has no closed-form counterpart here; clip is the default.
    if (spec.score == SimScore::res) return score_res(y, mu_hat);
    return score_clip(y, 0.0, kBinaryClipM, mu_hat);
}

} // namespace

std::string_view to_string(Scenario s) {
    switch (s) {
    case Scenario::ite1: return "ite1";
    case Scenario::ite2: return "ite2";
    case Scenario::ite3: return "ite3";
    case Scenario::outlier: return "outlier";
    case Scenario::covshift_binary: return "covshift_binary";
    }
    return "unknown";
}

std::string_view to_string(Coupling c) {
    switch (c) {
    case Coupling::independent: return "independent";
    case Coupling::positive: return "positive";
    case Coupling::negative: return "negative";
    }
    return "unknown";
}

std::string_view to_string(Covariance c) { return c == Covariance::identity ? "ind" : "corr"; }

std::string_view to_string(SimScore s) {
    switch (s) {
    case SimScore::oracle: return "oracle";
    case SimScore::res: return "res";
    case SimScore::cqr: return "cqr";
    case SimScore::clip: return "clip";
    }
    return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view text) {
    for (Scenario s : {Scenario::ite1, Scenario::ite2, Scenario::ite3, Scenario::outlier,
                       Scenario::covshift_binary}) {
        if (text == to_string(s)) return s;
    }
    if (text == "covshift-binary") return Scenario::covshift_binary;
    return std::nullopt;
}

std::optional<Coupling> parse_coupling(std::string_view text) {
    for (Coupling c : {Coupling::independent, Coupling::positive, Coupling::negative}) {
        if (text == to_string(c)) return c;
    }
    return std::nullopt;
}

std::optional<Covariance> parse_covariance(std::string_view text) {
    if (text == "ind" || text == "identity") return Covariance::identity;
    if (text == "corr" || text == "ar0.9") return Covariance::ar09;
    return std::nullopt;
}

std::optional<SimScore> parse_sim_score(std::string_view text) {
    for (SimScore s : {SimScore::oracle, SimScore::res, SimScore::cqr, SimScore::clip}) {
        if (text == to_string(s)) return s;
    }
    return std::nullopt;
}

void SimulationSpec::validate() const {
    require(q > 0.0 && q < 1.0, "q must lie in (0, 1)");
    require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
    require(std::isfinite(signal_a) && signal_a >= 1.0, "signal a must be >= 1");
    require(cqr_beta > 0.0 && cqr_beta < 1.0, "cqr beta must lie in (0, 1)");
    require(std::isfinite(sigma1_scale) && sigma1_scale >= 0.0, "sigma1 scale must be >= 0");
    require(std::isfinite(weight_gamma) && weight_gamma >= 1.0, "weight gamma must be >= 1");
    if (is_ite(scenario)) {
        require(score != SimScore::clip, "clip score is only defined for covshift_binary");
    }
    if (scenario == Scenario::covshift_binary) {
        require(score != SimScore::cqr, "cqr score is not defined for covshift_binary");
        require(n_train >= 1, "covshift_binary needs n_train >= 1 to centre p(x)");
    }
    if (scenario == Scenario::outlier) {
        require(score == SimScore::oracle, "the outlier scenario only supports the oracle score");
    }
}

double beta24_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // P(Binomial(5, x) >= 2).
    const double r = 1.0 - x;
    const double r4 = r * r * r * r;
    return 1.0 - r4 * r - 5.0 * x * r4;
}

double propensity(double x1) { return (1.0 + beta24_cdf(x1)) / 4.0; }

double ite_mu0(Scenario s, double x1, double x2) {
    if (s != Scenario::ite3) return 0.0;
    return 2.0 / ((1.0 + std::exp(-3.0 * (x1 - 0.5))) * (1.0 + std::exp(-3.0 * (x2 - 0.5))));
}

double ite_mu1(Scenario s, double x1, double x2) {
    if (s == Scenario::ite3) return 0.1 + 1.5 * ite_mu0(s, x1, x2);
    return 4.0 / ((1.0 + std::exp(-12.0 * (x1 - 0.5))) * (1.0 + std::exp(-12.0 * (x2 - 0.5))));
}

double ite_sigma1(double x1) { return 0.2 - std::log(x1); }

GeneratedTrial gen_ite(const SimulationSpec& spec, std::size_t trial_index) {
    require(is_ite(spec.scenario), "gen_ite needs an ITE scenario");
    spec.validate();
    KeyedStream stream(spec.master_seed, Stream::trial_data, trial_index);

    std::vector<double> calib_scores, calib_w, test_scores, test_w, oracle;
    std::vector<bool> nulls;
    GeneratedTrial out;
    // Units are drawn one by one; treated ones fill the calibration fold and
    // control ones the test fold until each reaches its size.
    while (calib_scores.size() < spec.n_calib || test_scores.size() < spec.m) {
        const IteUnit u = draw_ite_unit(spec, stream);
        const double e = propensity(u.x1);
        const double w = (1.0 - e) / e;
        if (u.treated) {
            if (calib_scores.size() == spec.n_calib) continue;
            calib_scores.push_back(ite_score(spec, u.x1, u.x2, u.o1));
            calib_w.push_back(w);
            out.calib_aux.push_back(e);
            out.calib_noise.eps0.push_back(u.eps0);
            out.calib_noise.eps1.push_back(u.eps1);
        } else {
            if (test_scores.size() == spec.m) continue;
            test_scores.push_back(ite_score(spec, u.x1, u.x2, u.o0));
            oracle.push_back(ite_score(spec, u.x1, u.x2, u.o1));
            test_w.push_back(w);
            nulls.push_back(u.o1 <= u.o0);
            out.test_aux.push_back(e);
            out.test_noise.eps0.push_back(u.eps0);
            out.test_noise.eps1.push_back(u.eps1);
        }
    }
    GeneratedTrial built = assemble(spec, trial_index, std::move(calib_scores), std::move(calib_w),
                                    std::move(test_scores), std::move(test_w), std::move(nulls));
    built.oracle_test_scores = std::move(oracle);
    built.calib_aux = std::move(out.calib_aux);
    built.test_aux = std::move(out.test_aux);
    built.calib_noise = std::move(out.calib_noise);
    built.test_noise = std::move(out.test_noise);
    return built;
}

OutlierDesign outlier_design(const SimulationSpec& spec, std::size_t trial_index) {
    KeyedStream stream(spec.master_seed, Stream::study, spec.centers_per_study ? 0 : trial_index + 1);
    OutlierDesign d;
    d.centers.resize(kOutlierCenters);
    for (auto& c : d.centers) {
        for (double& v : c) v = -3.0 + 6.0 * stream.uniform();
    }
    for (std::size_t k = 0; k < 5; ++k) d.theta[k] = 0.1;
    return d;
}

double inlier_log_density(const OutlierDesign& design, std::span<const double> x) {
    if (x.size() != kOutlierDim) throw std::invalid_argument("outlier points have 50 coordinates");
    std::array<double, kOutlierCenters> terms{};
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < design.centers.size(); ++k) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < kOutlierDim; ++i) {
            const double diff = x[i] - design.centers[k][i];
            d2 += diff * diff;
        }
        terms[k] = -0.5 * d2;
        top = std::max(top, terms[k]);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < design.centers.size(); ++k) acc += std::exp(terms[k] - top);
    return top + std::log(acc);
}

GeneratedTrial gen_outlier(const SimulationSpec& spec, std::size_t trial_index) {
    require(spec.scenario == Scenario::outlier, "gen_outlier needs the outlier scenario");
    spec.validate();
    const OutlierDesign design = outlier_design(spec, trial_index);
    KeyedStream stream(spec.master_seed, Stream::trial_data, trial_index);

    // dP/dQ is proportional to 1 + exp(-theta'x). Against a Gaussian component
    // N(W_k, I) the exp term tilts the mean to W_k - theta with mass
    // exp(-theta'W_k + |theta|^2 / 2), so P is a finite mixture: Q itself
    // (mass 1) plus the tilted components.
    const double theta_sq = dot(design.theta, design.theta);
    std::vector<double> cumulative(kOutlierCenters + 1);
    double total = 1.0;
    cumulative[0] = total;
    for (std::size_t k = 0; k < kOutlierCenters; ++k) {
        total += std::exp(-dot(design.theta, design.centers[k]) + 0.5 * theta_sq) /
                 static_cast<double>(kOutlierCenters);
        cumulative[k + 1] = total;
    }

    const auto gaussian_around = [&](const Point& center, double scale, double shift) {
        Point x{};
        for (std::size_t i = 0; i < kOutlierDim; ++i) {
            x[i] = scale * stream.normal() + center[i] - shift * design.theta[i];
        }
        return x;
    };
    const auto random_center = [&]() -> const Point& {
        return design.centers[stream.below(kOutlierCenters)];
    };

    std::vector<double> calib_scores, calib_w;
    calib_scores.reserve(spec.n_calib);
    calib_w.reserve(spec.n_calib);
    for (std::size_t i = 0; i < spec.n_calib; ++i) {
        const double pick = stream.uniform() * total;
        const auto comp = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        const Point x = comp == 0 ? gaussian_around(random_center(), 1.0, 0.0)
                                  : gaussian_around(design.centers[std::min(comp, kOutlierCenters) - 1],
                                                    1.0, 1.0);
        calib_scores.push_back(inlier_log_density(design, x));
        calib_w.push_back(sigmoid(dot(design.theta, x)));
    }

    const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(spec.m) * spec.rho));
    std::vector<bool> nulls(spec.m, true);
    std::fill(nulls.begin(), nulls.begin() + static_cast<std::ptrdiff_t>(n_out), false);
    // Fisher-Yates, so outlier positions are exchangeable.
    for (std::size_t i = spec.m; i > 1; --i) {
        const auto j = static_cast<std::size_t>(stream.below(i));
        const bool tmp = nulls[i - 1];
        nulls[i - 1] = nulls[j];
        nulls[j] = tmp;
    }
    const double sqrt_a = std::sqrt(spec.signal_a);
    std::vector<double> test_scores, test_w;
    test_scores.reserve(spec.m);
    test_w.reserve(spec.m);
    for (std::size_t j = 0; j < spec.m; ++j) {
        const Point x = gaussian_around(random_center(), nulls[j] ? 1.0 : sqrt_a, 0.0);
        test_scores.push_back(inlier_log_density(design, x));
        test_w.push_back(sigmoid(dot(design.theta, x)));
    }
    std::vector<double> oracle = test_scores;
    GeneratedTrial out = assemble(spec, trial_index, std::move(calib_scores), std::move(calib_w),
                                  std::move(test_scores), std::move(test_w), std::move(nulls));
    out.oracle_test_scores = std::move(oracle);
    out.hypothesis_conditional = true;
    return out;
}

double calibration_inclusion_probability(double mu_hat, double mu_bar) {
    return std::min(0.8, sigmoid(mu_hat - mu_bar));
}

GeneratedTrial gen_covshift_binary(const SimulationSpec& spec, std::size_t trial_index) {
    require(spec.scenario == Scenario::covshift_binary,
            "gen_covshift_binary needs the covshift_binary scenario");
    spec.validate();
    KeyedStream stream(spec.master_seed, Stream::trial_data, trial_index);

    double mu_sum = 0.0;
    for (std::size_t i = 0; i < spec.n_train; ++i) mu_sum += draw_binary_unit(stream).mu_hat;
    const double mu_bar = mu_sum / static_cast<double>(spec.n_train);

    std::vector<double> calib_scores, calib_w, test_scores, test_w, oracle;
    GeneratedTrial out;
    while (calib_scores.size() < spec.n_calib) {
        const BinaryUnit u = draw_binary_unit(stream);
        const double p = calibration_inclusion_probability(u.mu_hat, mu_bar);
        if (!(stream.uniform() < p)) continue;
        if (spec.negatives_only && u.positive) continue;
        const double y = spec.negatives_only ? 0.0 : (u.positive ? 1.0 : 0.0);
        calib_scores.push_back(binary_score(spec, y, u.mu_hat));
        calib_w.push_back(1.0 / p);
        out.calib_aux.push_back(p);
    }
    std::vector<bool> nulls;
    for (std::size_t j = 0; j < spec.m; ++j) {
        const BinaryUnit u = draw_binary_unit(stream);
        const double p = calibration_inclusion_probability(u.mu_hat, mu_bar);
        test_scores.push_back(binary_score(spec, 0.0, u.mu_hat));
        // Without a threshold in the score (negatives-only path) the observed
        // score is already the one the null units would have.
        oracle.push_back(spec.negatives_only ? test_scores.back()
                                             : binary_score(spec, u.positive ? 1.0 : 0.0, u.mu_hat));
        test_w.push_back(1.0 / p);
        nulls.push_back(!u.positive);
        out.test_aux.push_back(p);
    }
    GeneratedTrial built = assemble(spec, trial_index, std::move(calib_scores), std::move(calib_w),
                                    std::move(test_scores), std::move(test_w), std::move(nulls));
    built.oracle_test_scores = std::move(oracle);
    built.calib_aux = std::move(out.calib_aux);
    built.test_aux = std::move(out.test_aux);
    built.hypothesis_conditional = spec.negatives_only;
    return built;
}

GeneratedTrial generate(const SimulationSpec& spec, std::size_t trial_index) {
    switch (spec.scenario) {
    case Scenario::ite1:
    case Scenario::ite2:
    case Scenario::ite3: return gen_ite(spec, trial_index);
    case Scenario::outlier: return gen_outlier(spec, trial_index);
    case Scenario::covshift_binary: return gen_covshift_binary(spec, trial_index);
    }
    throw std::invalid_argument("unknown scenario");
}

} // namespace confsel::simlab
