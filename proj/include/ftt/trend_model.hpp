#pragma once

#include "ftt/topic_clustering.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ftt {

// Per-topic share of items in each training quarter, normalized across the
// retained topics. Index i holds ordinal i + 1.
struct FrequencySeries {
    int topic_id = 0;
    std::vector<double> f;
    std::vector<int> raw_counts;
    int start_quarter_of_year = 1; // calendar quarter of ordinal 1

    int quarter_of_year(int ordinal) const { return (start_quarter_of_year - 1 + ordinal - 1) % 4 + 1; }
};

struct TrendConfig {
    std::optional<int> n_changepoints; // unset: min(3, max(0, Q_train - 3))
    double ridge_lambda_delta = 0.5;
    double ridge_lambda_beta = 0.1;
    int theta_count = 30;
    double changepoint_range = 0.8; // changepoints live in the first 80% of the window
};

void validate(const TrendConfig& config);

int default_changepoint_count(int q_train);

/// Changepoint ordinals evenly spaced over the first `range` fraction of
/// 1..q_train, excluding the first ordinal, deduplicated.
std::vector<int> place_changepoints(int q_train, int count, double range);

// Piecewise-linear trend in the quarter ordinal plus a zero-sum additive
// quarter-of-year effect:
//   y(q) = (k + sum_{s_j <= q} delta_j) q + (m + sum_{s_j <= q} gamma_j) + beta[qoy(q)]
// with gamma_j = -s_j delta_j, which keeps the trend continuous.
struct TrendFit {
    int topic_id = 0;
    double k = 0.0;
    double m = 0.0;
    std::vector<int> changepoints;
    std::vector<double> delta;
    std::vector<double> gamma;
    std::array<double, 4> beta{}; // indexed by quarter_of_year - 1
    double mape = 0.0;
    std::vector<double> fitted; // in-sample, ordinals 1..Q_train
    int forecast_ordinal = 0;
    int target_quarter_of_year = 1;
    double forecast_raw = 0.0; // trend + seasonal at forecast_ordinal, before clamping
    double forecast = 0.0;     // max(0, forecast_raw)

    double trend_at(double q) const;
    double seasonal_at(int quarter_of_year) const { return beta[quarter_of_year - 1]; }
    double predict(double q, int quarter_of_year) const { return trend_at(q) + seasonal_at(quarter_of_year); }
};

/// Drops clusters with fewer than `theta_count` members, then normalizes the
/// per-quarter counts of the survivors across topics for ordinals 1..q_train.
/// Returns an empty list (with a warning) when every topic is dropped.
std::vector<FrequencySeries> build_frequency_series(const std::vector<TopicCluster>& clusters,
                                                    int q_train, int theta_count,
                                                    int start_quarter_of_year = 1);

/// Ridge-penalized least squares fit of the trend model, solved exactly from
/// the normal equations. The forecast is taken `horizon` quarters after the
/// last observation with the seasonal term of `target_quarter_of_year`.
/// Throws FitError for series shorter than 4 or unrecoverably singular systems.
TrendFit fit_trend(const FrequencySeries& series, const TrendConfig& config,
                   int target_quarter_of_year, int horizon = 1);

/// Mean of |actual - fitted| / actual over entries with actual >= 1e-6;
/// +infinity when no entry qualifies. Throws InputError on length mismatch.
double compute_mape(std::span<const double> actual, std::span<const double> fitted);

struct TrendFitBatch {
    std::vector<TrendFit> fits;
    std::vector<std::pair<int, std::string>> excluded; // topic id, reason
};

/// Fits every series independently; failures are collected, not thrown.
TrendFitBatch fit_trends(const std::vector<FrequencySeries>& series, const TrendConfig& config,
                         int target_quarter_of_year, int horizon = 1);

} // namespace ftt
