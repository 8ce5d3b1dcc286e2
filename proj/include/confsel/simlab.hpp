#pragma once

#include "confsel/core_types.hpp"
#include "confsel/metrics.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace confsel::simlab {

enum class Scenario { ite1, ite2, ite3, outlier, covshift_binary };
enum class Coupling { independent, positive, negative };
enum class Covariance { identity, ar09 };

/// Score used by the generators. `oracle` is the closed-form conditional CDF
/// P(O(1) <= y | X = x) for the ITE settings and the true inlier log-density
/// for the outlier scenario; the binary scenario treats it as `clip`.
enum class SimScore { oracle, res, cqr, clip };

std::string_view to_string(Scenario s);
std::string_view to_string(Coupling c);
std::string_view to_string(Covariance c);
std::string_view to_string(SimScore s);
std::optional<Scenario> parse_scenario(std::string_view text);
std::optional<Coupling> parse_coupling(std::string_view text);
/// Accepts `ind`/`identity` and `corr`/`ar0.9`.
std::optional<Covariance> parse_covariance(std::string_view text);
std::optional<SimScore> parse_sim_score(std::string_view text);

struct SimulationSpec {
    Scenario scenario = Scenario::ite1;
    Coupling coupling = Coupling::independent;
    Covariance covariance = Covariance::identity;
    /// Only the binary scenario consumes training draws (to centre p(x)).
    std::size_t n_train = 750;
    std::size_t n_calib = 250;
    std::size_t m = 100;
    /// Outlier signal strength a >= 1.
    double signal_a = 3.0;
    /// Outlier fraction in [0, 1].
    double rho = 0.1;
    double q = 0.1;
    std::size_t trials = 0;
    std::uint64_t master_seed = 0;
    SimScore score = SimScore::oracle;
    double cqr_beta = 0.5;
    /// Multiplies sigma_1(x) in the ITE settings; 0 removes the O(1) noise.
    double sigma1_scale = 1.0;
    /// > 1 replaces the input weights by w * exp(eta), eta ~ Unif[-log g, log g].
    double weight_gamma = 1.0;
    /// Binary scenario: calibrate on negatives only (hypothesis-conditional path).
    bool negatives_only = false;
    /// Outlier scenario: draw the 50 centres once per study (true) or per trial.
    bool centers_per_study = true;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct UnitNoise {
    std::vector<double> eps0;
    std::vector<double> eps1;
};

struct GeneratedTrial {
    WeightedCalibration calibration;
    WeightedTest test;
    /// True covariate-shift weights; equal to the input weights unless
    /// weight_gamma > 1.
    std::vector<double> calib_true_weights;
    std::vector<double> test_true_weights;
    /// Scores evaluated at the true outcome, V(X_{n+j}, Y_{n+j}).
    std::vector<double> oracle_test_scores;
    /// Propensity e(x) for the ITE settings, selection probability p(x) for
    /// the binary scenario, empty otherwise.
    std::vector<double> calib_aux;
    std::vector<double> test_aux;
    /// ITE noise draws, for checking the coupling contract.
    UnitNoise calib_noise;
    UnitNoise test_noise;
    /// Set when scores ignore the threshold, so only the hypothesis-conditional
    /// selection variants apply.
    bool hypothesis_conditional = false;
};

// ITE settings ---------------------------------------------------------------

double beta24_cdf(double x);
/// e(x) = (1 + Beta_{2,4} CDF(x_1)) / 4.
double propensity(double x1);
double ite_mu1(Scenario s, double x1, double x2);
double ite_mu0(Scenario s, double x1, double x2);
double ite_sigma1(double x1);

GeneratedTrial gen_ite(const SimulationSpec& spec, std::size_t trial_index);

// Outlier detection ------------------------------------------------------------

inline constexpr std::size_t kOutlierDim = 50;
inline constexpr std::size_t kOutlierCenters = 50;

struct OutlierDesign {
    std::vector<std::array<double, kOutlierDim>> centers;
    std::array<double, kOutlierDim> theta{};
};

/// Centres drawn from Unif([-3, 3]^50) and theta_j = 0.1 * 1{j <= 5}.
OutlierDesign outlier_design(const SimulationSpec& spec, std::size_t trial_index);

/// log sum_k exp(-|x - W_k|^2 / 2): the inlier log-density up to a constant.
double inlier_log_density(const OutlierDesign& design, std::span<const double> x);

GeneratedTrial gen_outlier(const SimulationSpec& spec, std::size_t trial_index);

// Binary classification with selection into calibration ---------------------------------------

/// min{0.8, sigmoid(mu_hat - mu_bar)}.
double calibration_inclusion_probability(double mu_hat, double mu_bar);

GeneratedTrial gen_covshift_binary(const SimulationSpec& spec, std::size_t trial_index);

GeneratedTrial generate(const SimulationSpec& spec, std::size_t trial_index);

// Trial runner -------------------------------------------------------------

/// Selection sets one trial produces. Labels are "wbh" plus either
/// "wcs-hete"/"wcs-homo"/"wcs-dtm" or "hc-wcs-hete"/"hc-wcs-homo"/"hc-wcs-dtm".
struct TrialSelections {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> sets;
    std::vector<std::size_t> first_step;
};

std::vector<std::string> method_labels(const SimulationSpec& spec);

TrialSelections select_all(const SimulationSpec& spec, const GeneratedTrial& trial,
                           std::size_t trial_index);

struct TrialRecord {
    std::size_t trial = 0;
    std::string method;
    TrialMetrics metrics;
};

struct MethodSummary {
    std::string method;
    std::size_t trials = 0;
    double fdr = 0.0;
    double fdr_se = 0.0;
    double power = 0.0;
    double power_se = 0.0;
    double weighted_fdr = 0.0;
    double weighted_fdr_se = 0.0;
    double mean_selected = 0.0;
    /// Mean of |R delta R_wbh| / max{1, |R_wbh|}.
    double mean_discrepancy = 0.0;
};

struct SimulationReport {
    SimulationSpec spec;
    std::vector<MethodSummary> summaries;
    std::vector<TrialRecord> records;
    /// Mean over trials of the (n + 1) / (sum w + w_j) plug-in.
    double weight_normalizer = 0.0;

    const MethodSummary* find(std::string_view method) const;
};

/// Runs spec.trials independent trials (in parallel; results do not depend on
/// the thread count) and aggregates per-method FDR, power and standard errors.
SimulationReport run_trials(const SimulationSpec& spec);

// PRDS counterexample -------------------------------------------------------------

struct ConditionalTail {
    double s = 0.0;
    double t = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t conditioned = 0;
    /// hits / conditioned; NaN when nothing was conditioned on.
    double estimate = 0.0;
    double se = 0.0;
};

/// Monte-Carlo estimates of F(s, t) = P(p_1 <= s | p_2 >= t) for the
/// two-point calibration construction with w(x) = x, P = Unif[1/2, 3/2], Q
/// with density x on [1/2, 3/2] and V(x, y) = -w(x).
std::vector<ConditionalTail> prds_conditional_tails(std::uint64_t n_draws, std::uint64_t seed,
                                                    std::span<const std::pair<double, double>> st);

inline constexpr double kPrdsExact35 = 533.0 / 7200.0;
inline constexpr double kPrdsExact910 = 547.0 / 7200.0;

struct PrdsEstimate {
    std::uint64_t draws = 0;
    std::uint64_t seed = 0;
    ConditionalTail f_35;
    ConditionalTail f_910;
    double exact_35 = kPrdsExact35;
    double exact_910 = kPrdsExact910;
    /// f_910 - f_35 exceeds 3 standard errors of the difference.
    bool ordering_confirmed = false;
};

PrdsEstimate prds_counterexample_mc(std::uint64_t n_draws, std::uint64_t seed);

/// Inverse CDF of the density x on [1/2, 3/2]: sqrt(2u + 1/4).
double q_density_inverse_cdf(double u);

// Super-uniformity -------------------------------------------------------------

/// Empirical P(p <= t, null) at each grid point.
std::vector<double> null_tail_frequencies(std::span<const double> pvalues,
                                          const std::vector<bool>& null_flags,
                                          std::span<const double> grid);

/// sup_t |F_N(t) - t| for the empirical CDF of `pvalues`.
double ks_distance_uniform(std::span<const double> pvalues);

/// DKW half-width sqrt(log(2 / alpha) / (2 N)).
double dkw_halfwidth(std::size_t n, double alpha);

struct SuperUniformityReport {
    std::size_t replicates = 0;
    std::vector<double> grid;
    std::vector<double> tail_frequency;
    std::vector<double> tail_se;
    bool tails_ok = false;
    double ks_distance = 0.0;
    double dkw_band = 0.0;
    bool dkw_ok = false;
};

/// Exchangeable design (w = 1): each replicate draws n_calib calibration
/// pairs, one test pair and an independent threshold; the observed p-value is
/// checked for P(p <= t, null) <= t + 3 SE and the randomized oracle p-value
/// for uniformity inside the DKW band at `dkw_alpha`.
SuperUniformityReport superuniformity_mc(std::size_t replicates, std::size_t n_calib,
                                         std::uint64_t seed, double dkw_alpha = 1e-3);

} // namespace confsel::simlab
