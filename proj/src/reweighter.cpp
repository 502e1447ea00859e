#include "ftt/reweighter.hpp"

#include "ftt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace ftt {

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
    case Strategy::kUniform: return "uniform";
    case Strategy::kFtt: return "ftt";
    case Strategy::kSamePeriod: return "same_period";
    case Strategy::kPreviousPeriod: return "previous_period";
    case Strategy::kCombined: return "combined";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : {Strategy::kUniform, Strategy::kFtt, Strategy::kSamePeriod,
                   Strategy::kPreviousPeriod, Strategy::kCombined}) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError(fmt::format("unknown strategy '{}'", name));
}

std::string_view to_string(RatioMode mode) {
    return mode == RatioMode::kShareRatio ? "share_ratio" : "share_times_topics";
}

RatioMode parse_ratio_mode(std::string_view name) {
    if (name == "share_ratio") return RatioMode::kShareRatio;
    if (name == "share_times_topics") return RatioMode::kShareTimesTopics;
    throw ConfigError(fmt::format("unknown ratio mode '{}'", name));
}

std::string_view to_string(HistoryWindow window) {
    return window == HistoryWindow::kFull ? "full" : "last_quarter";
}

HistoryWindow parse_history_window(std::string_view name) {
    if (name == "full") return HistoryWindow::kFull;
    if (name == "last_quarter") return HistoryWindow::kLastQuarter;
    throw ConfigError(fmt::format("unknown history window '{}'", name));
}

void validate(const ReweightConfig& config) {
    if (!(config.theta_mape > 0.0)) throw ConfigError("theta_mape must be > 0");
    if (!(config.theta_lower > 0.0 && config.theta_lower <= 1.0 && 1.0 <= config.theta_upper)) {
        throw ConfigError(fmt::format("need 0 < theta_lower <= 1 <= theta_upper, got [{}, {}]",
                                      config.theta_lower, config.theta_upper));
    }
    if (!(config.heuristic_boost > 1.0)) throw ConfigError("heuristic_boost must be > 1");
}

double bound(double value, double lower, double upper) {
    if (lower > upper) throw ConfigError(fmt::format("bound: lower {} > upper {}", lower, upper));
    return std::clamp(value, lower, upper);
}

std::vector<WeightAssignment> uniform_weights(std::span<const std::string> instance_ids) {
    std::vector<WeightAssignment> out;
    out.reserve(instance_ids.size());
    for (const auto& id : instance_ids) out.push_back({id, std::nullopt, std::nullopt, 1.0});
    return out;
}

std::vector<WeightAssignment> ftt_weights(std::span<const TrendFit> fits,
                                          std::span<const FrequencySeries> series,
                                          std::span<const std::string> instance_ids,
                                          const std::map<std::string, int, std::less<>>& membership,
                                          const ReweightConfig& config) {
    validate(config);
    std::unordered_map<int, const FrequencySeries*> series_by_topic;
    for (const auto& s : series) series_by_topic.emplace(s.topic_id, &s);

    struct Preserved {
        double forecast = 0.0;
        double history = 0.0;
    };
    std::map<int, Preserved> preserved;
    for (const auto& fit : fits) {
        if (!(fit.mape <= config.theta_mape)) continue;
        const auto it = series_by_topic.find(fit.topic_id);
        if (it == series_by_topic.end()) {
            throw InputError(fmt::format("no frequency series for fitted topic {}", fit.topic_id));
        }
        const auto& counts = it->second->raw_counts;
        const double history = config.history == HistoryWindow::kFull
                                   ? std::accumulate(counts.begin(), counts.end(), 0.0)
                                   : (counts.empty() ? 0.0 : static_cast<double>(counts.back()));
        preserved[fit.topic_id] = {std::max(0.0, fit.forecast), history};
    }

    double forecast_total = 0.0;
    double history_total = 0.0;
    for (const auto& [topic, p] : preserved) {
        forecast_total += p.forecast;
        history_total += p.history;
    }

    auto out = uniform_weights(instance_ids);
    for (auto& w : out) {
        if (auto it = membership.find(w.instance_id); it != membership.end()) w.topic_id = it->second;
    }
    if (preserved.empty() || !(forecast_total > 0.0)) {
        spdlog::warn("no usable preserved topics (preserved={}, forecast sum={}); uniform weights",
                     preserved.size(), forecast_total);
        return out;
    }

    std::map<int, double> raw_by_topic;
    for (const auto& [topic, p] : preserved) {
        const double forecast_share = p.forecast / forecast_total;
        double raw = 0.0;
        if (config.ratio_mode == RatioMode::kShareTimesTopics) {
            raw = forecast_share * static_cast<double>(preserved.size());
        } else if (history_total > 0.0 && p.history > 0.0) {
            raw = forecast_share / (p.history / history_total);
        } else {
            // A topic with no history in the window can only be boosted.
            raw = forecast_share > 0.0 ? config.theta_upper : 1.0;
        }
        raw_by_topic[topic] = raw;
    }

    for (auto& w : out) {
        if (!w.topic_id) continue;
        const auto it = raw_by_topic.find(*w.topic_id);
        if (it == raw_by_topic.end()) continue;
        w.raw_ratio = it->second;
        w.weight = bound(it->second, config.theta_lower, config.theta_upper);
    }
    return out;
}

std::vector<WeightAssignment> heuristic_weights(std::span<const NewsInstance* const> instances,
                                                const QuarterIndex& target, int recent_ordinal,
                                                const ReweightConfig& config) {
    if (config.strategy == Strategy::kFtt) {
        throw ConfigError("heuristic_weights does not handle the ftt strategy");
    }
    std::vector<WeightAssignment> out;
    out.reserve(instances.size());
    for (const auto* inst : instances) {
        const int qoy = quarter_of_month(inst->timestamp.month);
        const bool same = qoy == target.quarter_of_year;
        const bool recent = inst->ordinal == recent_ordinal;
        double weight = 1.0;
        switch (config.strategy) {
        case Strategy::kSamePeriod: weight = same ? config.heuristic_boost : 1.0; break;
        case Strategy::kPreviousPeriod: weight = recent ? config.heuristic_boost : 1.0; break;
        case Strategy::kCombined:
            weight = (same ? config.heuristic_boost : 1.0) * (recent ? config.heuristic_boost : 1.0);
            break;
        default: break;
        }
        out.push_back({inst->id, std::nullopt, std::nullopt, weight});
    }
    return out;
}

} // namespace ftt
