#pragma once

#include "ftt/corpus_io.hpp"
#include "ftt/trend_model.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ftt {

enum class Strategy { kUniform, kFtt, kSamePeriod, kPreviousPeriod, kCombined };

std::string_view to_string(Strategy strategy);
/// Accepts uniform, ftt, same_period, previous_period, combined.
Strategy parse_strategy(std::string_view name);

// How a preserved topic's forecast becomes a raw weight.
enum class RatioMode {
    kShareRatio,       // forecast share / historical share
    kShareTimesTopics, // forecast share * number of preserved topics
};

enum class HistoryWindow { kFull, kLastQuarter };

std::string_view to_string(RatioMode mode);
RatioMode parse_ratio_mode(std::string_view name);
std::string_view to_string(HistoryWindow window);
HistoryWindow parse_history_window(std::string_view name);

struct ReweightConfig {
    Strategy strategy = Strategy::kFtt;
    double theta_mape = 0.8;
    double theta_lower = 0.3;
    double theta_upper = 2.0;
    double heuristic_boost = 2.0;
    RatioMode ratio_mode = RatioMode::kShareRatio;
    HistoryWindow history = HistoryWindow::kFull;
};

void validate(const ReweightConfig& config);

struct WeightAssignment {
    std::string instance_id;
    std::optional<int> topic_id;     // cluster of the instance, if any
    std::optional<double> raw_ratio; // set only for preserved topics
    double weight = 1.0;
};

/// Clamp into [lower, upper]. Throws ConfigError when lower > upper.
double bound(double value, double lower, double upper);

/// Forecast-driven weights. Topics with MAPE <= theta_mape form the preserved
/// set; their members get bound(raw ratio); every other instance gets 1.
/// Falls back to all-ones (with a warning) when nothing is preserved or the
/// preserved forecasts sum to zero.
std::vector<WeightAssignment> ftt_weights(std::span<const TrendFit> fits,
                                          std::span<const FrequencySeries> series,
                                          std::span<const std::string> instance_ids,
                                          const std::map<std::string, int, std::less<>>& membership,
                                          const ReweightConfig& config);

/// Same-period / previous-period / combined heuristics. `recent_ordinal` is
/// the quarter the previous-period rule boosts (the latest training quarter in
/// a rolling split). kUniform is accepted and yields all ones.
std::vector<WeightAssignment> heuristic_weights(std::span<const NewsInstance* const> instances,
                                                const QuarterIndex& target, int recent_ordinal,
                                                const ReweightConfig& config);

std::vector<WeightAssignment> uniform_weights(std::span<const std::string> instance_ids);

} // namespace ftt
