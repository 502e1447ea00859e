#pragma once

#include "ftt/corpus_io.hpp"
#include "ftt/detector.hpp"
#include "ftt/metrics.hpp"
#include "ftt/reweighter.hpp"
#include "ftt/topic_clustering.hpp"
#include "ftt/trend_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ftt {

// Seeds for every stage derive from one root seed:
//   balance = derive_seed(root, "balance"), train = derive_seed(root, "train").
std::uint64_t balance_seed(std::uint64_t root_seed);
std::uint64_t train_seed(std::uint64_t root_seed);

// Balanced instance indices of a rolling split, each in corpus order.
struct PreparedSplit {
    SplitSpec split;
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

PreparedSplit prepare_split(const Corpus& corpus, int target, std::uint64_t root_seed);

struct TopicModel {
    std::vector<TopicCluster> clusters;
    std::vector<FrequencySeries> series;
    TrendFitBatch trends;
};

/// Clusters the balanced training set, then fits a trend per retained topic
/// and forecasts the test quarter.
TopicModel build_topic_model(const Corpus& corpus, const PreparedSplit& prepared,
                             const ClusteringConfig& clustering, const TrendConfig& trend);

/// Frequency series and fits for a target, from already built clusters.
TopicModel fit_topic_model(const Corpus& corpus, int target, std::vector<TopicCluster> clusters,
                           const TrendConfig& trend);

/// Weights for the training set under config.strategy.
std::vector<WeightAssignment> compute_weights(const Corpus& corpus, const PreparedSplit& prepared,
                                              const TopicModel* topics, const ReweightConfig& config);

struct TopicBreakdown {
    std::size_t n_existing = 0;
    std::size_t n_new = 0;
    std::optional<Metrics> existing; // missing when the subset is empty
    std::optional<Metrics> new_topics;
};

TopicBreakdown topic_breakdown(std::span<const NewsInstance* const> test_instances,
                               const std::vector<TopicCluster>& trained,
                               std::span<const Label> predictions, const ClusteringConfig& config);

struct ExperimentConfig {
    std::vector<Strategy> strategies{Strategy::kUniform, Strategy::kFtt};
    std::vector<int> targets;
    std::vector<std::uint64_t> seeds{0};
    ClusteringConfig clustering;
    TrendConfig trend;
    ReweightConfig reweight; // strategy field is overridden per cell
    TrainConfig train;       // seed field is derived per cell
    bool breakdown = true;
    // Optional extra audit of every training batch: (target, batch examples).
    std::function<void(int, std::span<const Example>)> batch_audit;
};

struct CellResult {
    Strategy strategy = Strategy::kUniform;
    int target = 0;
    std::uint64_t seed = 0;
    std::optional<Metrics> metrics; // missing when the cell failed
    std::string error;
    TopicBreakdown breakdown;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t batches_checked = 0;
    int best_epoch = 0;
};

struct SummaryRow {
    Strategy strategy = Strategy::kUniform;
    int target = 0; // 0 marks the cross-quarter average
    Metrics mean;
    std::size_t cells = 0;
    std::size_t missing = 0;
    std::optional<Metrics> existing_mean;
    std::optional<Metrics> new_mean;
};

struct EvalReport {
    std::vector<CellResult> cells;
    std::vector<SummaryRow> per_quarter; // mean over seeds
    std::vector<SummaryRow> average;     // unweighted mean of per-quarter rows

    const SummaryRow* find(Strategy strategy, int target) const;
};

/// Every (strategy, target, seed) cell: balance, cluster, forecast, weight,
/// train, test. Each training batch is checked to hold only training
/// quarters; a leak aborts the cell with an error. Failed cells are kept as
/// missing.
EvalReport run_rolling_experiment(const Corpus& corpus, const ExperimentConfig& config);

/// Rebuilds summary rows from cells.
void summarize(EvalReport& report);

} // namespace ftt
