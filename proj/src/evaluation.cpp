#include "ftt/evaluation.hpp"

#include "ftt/errors.hpp"
#include "ftt/random.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace ftt {

std::uint64_t balance_seed(std::uint64_t root_seed) { return derive_seed(root_seed, "balance"); }
std::uint64_t train_seed(std::uint64_t root_seed) { return derive_seed(root_seed, "train"); }

PreparedSplit prepare_split(const Corpus& corpus, int target, std::uint64_t root_seed) {
    PreparedSplit p;
    p.split = make_rolling_split(corpus, target);
    const auto seed = balance_seed(root_seed);
    for (int q : p.split.train_quarters) {
        const auto subset = undersample_balanced(corpus, q, seed);
        p.train.insert(p.train.end(), subset.begin(), subset.end());
    }
    p.val = undersample_balanced(corpus, p.split.val_quarter, seed);
    p.test = undersample_balanced(corpus, p.split.test_quarter, seed);
    return p;
}

TopicModel fit_topic_model(const Corpus& corpus, int target, std::vector<TopicCluster> clusters,
                           const TrendConfig& trend) {
    TopicModel model;
    model.clusters = std::move(clusters);
    const int q_train = target - 2;
    if (q_train < 2) {
        spdlog::warn("target {}: {} training quarter(s), too few for trend fitting", target, q_train);
        return model;
    }
    model.series = build_frequency_series(model.clusters, q_train, trend.theta_count,
                                          corpus.quarter(1).quarter_of_year);
    // The series ends at the last training quarter; the test quarter is two
    // steps ahead (the validation quarter sits in between).
    model.trends = fit_trends(model.series, trend, corpus.quarter(target).quarter_of_year,
                              target - q_train);
    return model;
}

TopicModel build_topic_model(const Corpus& corpus, const PreparedSplit& prepared,
                             const ClusteringConfig& clustering, const TrendConfig& trend) {
    auto clusters = single_pass_cluster(corpus, prepared.train, clustering);
    return fit_topic_model(corpus, prepared.split.test_quarter, std::move(clusters), trend);
}

std::vector<WeightAssignment> compute_weights(const Corpus& corpus, const PreparedSplit& prepared,
                                              const TopicModel* topics, const ReweightConfig& config) {
    validate(config);
    std::vector<std::string> ids;
    std::vector<const NewsInstance*> instances;
    ids.reserve(prepared.train.size());
    for (auto i : prepared.train) {
        ids.push_back(corpus[i].id);
        instances.push_back(&corpus[i]);
    }
    switch (config.strategy) {
    case Strategy::kUniform: return uniform_weights(ids);
    case Strategy::kFtt: {
        if (!topics) throw InputError("ftt weights need a topic model");
        return ftt_weights(topics->trends.fits, topics->series, ids, membership_map(topics->clusters), config);
    }
    default: {
        const auto& target = corpus.quarter(prepared.split.test_quarter);
        return heuristic_weights(instances, target, prepared.split.train_quarters.back(), config);
    }
    }
}

TopicBreakdown topic_breakdown(std::span<const NewsInstance* const> test_instances,
                               const std::vector<TopicCluster>& trained,
                               std::span<const Label> predictions, const ClusteringConfig& config) {
    if (predictions.size() != test_instances.size()) {
        throw InputError("topic breakdown: predictions not aligned with instances");
    }
    const auto tags = assign_to_existing(test_instances, trained, config);
    std::vector<Label> labels_existing, preds_existing, labels_new, preds_new;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        auto& labels = tags[i].existing ? labels_existing : labels_new;
        auto& preds = tags[i].existing ? preds_existing : preds_new;
        labels.push_back(test_instances[i]->label);
        preds.push_back(predictions[i]);
    }
    TopicBreakdown b;
    b.n_existing = labels_existing.size();
    b.n_new = labels_new.size();
    if (!labels_existing.empty()) b.existing = compute_metrics(labels_existing, preds_existing);
    if (!labels_new.empty()) b.new_topics = compute_metrics(labels_new, preds_new);
    return b;
}

const SummaryRow* EvalReport::find(Strategy strategy, int target) const {
    const auto& rows = target == 0 ? average : per_quarter;
    for (const auto& r : rows) {
        if (r.strategy == strategy && r.target == target) return &r;
    }
    return nullptr;
}

namespace {

struct MetricsMean {
    Metrics sum;
    std::size_t n = 0;

    void add(const Metrics& m) {
        sum.accuracy += m.accuracy;
        sum.macro_f1 += m.macro_f1;
        sum.f1_fake += m.f1_fake;
        sum.f1_real += m.f1_real;
        ++n;
    }

    std::optional<Metrics> mean() const {
        if (n == 0) return std::nullopt;
        const double d = static_cast<double>(n);
        return Metrics{sum.accuracy / d, sum.macro_f1 / d, sum.f1_fake / d, sum.f1_real / d};
    }
};

} // namespace

void summarize(EvalReport& report) {
    report.per_quarter.clear();
    report.average.clear();

    std::vector<Strategy> strategies;
    std::vector<int> targets;
    for (const auto& c : report.cells) {
        if (std::find(strategies.begin(), strategies.end(), c.strategy) == strategies.end()) strategies.push_back(c.strategy);
        if (std::find(targets.begin(), targets.end(), c.target) == targets.end()) targets.push_back(c.target);
    }

    for (auto s : strategies) {
        MetricsMean over_targets, existing_over_targets, new_over_targets;
        std::size_t cells = 0, missing = 0;
        for (int t : targets) {
            MetricsMean m, existing, fresh;
            SummaryRow row;
            row.strategy = s;
            row.target = t;
            for (const auto& c : report.cells) {
                if (c.strategy != s || c.target != t) continue;
                ++row.cells;
                if (!c.metrics) {
                    ++row.missing;
                    continue;
                }
                m.add(*c.metrics);
                if (c.breakdown.existing) existing.add(*c.breakdown.existing);
                if (c.breakdown.new_topics) fresh.add(*c.breakdown.new_topics);
            }
            if (row.cells == 0) continue;
            cells += row.cells;
            missing += row.missing;
            if (auto mean = m.mean()) {
                row.mean = *mean;
                over_targets.add(*mean);
            }
            row.existing_mean = existing.mean();
            row.new_mean = fresh.mean();
            if (row.existing_mean) existing_over_targets.add(*row.existing_mean);
            if (row.new_mean) new_over_targets.add(*row.new_mean);
            report.per_quarter.push_back(row);
        }
        SummaryRow avg;
        avg.strategy = s;
        avg.target = 0;
        avg.cells = cells;
        avg.missing = missing;
        if (auto mean = over_targets.mean()) avg.mean = *mean;
        avg.existing_mean = existing_over_targets.mean();
        avg.new_mean = new_over_targets.mean();
        report.average.push_back(avg);
    }
}

EvalReport run_rolling_experiment(const Corpus& corpus, const ExperimentConfig& config) {
    validate(config.clustering);
    validate(config.trend);
    validate(config.train);
    EvalReport report;

    for (int target : config.targets) {
        for (auto seed : config.seeds) {
            std::optional<PreparedSplit> prepared;
            std::optional<TopicModel> topics;
            std::string setup_error;
            try {
                prepared = prepare_split(corpus, target, seed);
                const bool need_topics =
                    config.breakdown ||
                    std::find(config.strategies.begin(), config.strategies.end(), Strategy::kFtt) !=
                        config.strategies.end();
                if (need_topics && !prepared->train.empty()) {
                    topics = build_topic_model(corpus, *prepared, config.clustering, config.trend);
                }
            } catch (const std::exception& e) {
                setup_error = e.what();
            }

            for (auto strategy : config.strategies) {
                CellResult cell;
                cell.strategy = strategy;
                cell.target = target;
                cell.seed = seed;
                if (!prepared) {
                    cell.error = setup_error;
                    report.cells.push_back(std::move(cell));
                    continue;
                }
                try {
                    auto reweight = config.reweight;
                    reweight.strategy = strategy;
                    const auto weights = compute_weights(corpus, *prepared, topics ? &*topics : nullptr, reweight);
                    const auto train_set = make_examples(corpus, prepared->train, &weights);
                    const auto val_set = make_examples(corpus, prepared->val);
                    const auto test_set = make_examples(corpus, prepared->test);
                    if (test_set.empty()) throw InputError(fmt::format("target {}: empty test quarter", target));

                    auto train_config = config.train;
                    train_config.seed = train_seed(seed);
                    const int first_held_out = prepared->split.val_quarter;
                    std::vector<Example> batch;
                    auto audit = [&](std::span<const std::size_t> members) {
                        batch.clear();
                        for (auto i : members) {
                            if (train_set[i].ordinal >= first_held_out) {
                                throw TrainingError(fmt::format(
                                    "temporal leak: training batch holds quarter {} (target {})",
                                    train_set[i].ordinal, target));
                            }
                            if (config.batch_audit) batch.push_back(train_set[i]);
                        }
                        if (config.batch_audit) config.batch_audit(target, batch);
                        ++cell.batches_checked;
                    };
                    const auto trained = train(train_set, val_set, train_config, audit);

                    const auto preds = predict_labels(trained.params, test_set);
                    std::vector<Label> labels;
                    for (const auto& ex : test_set) labels.push_back(ex.label);
                    cell.metrics = compute_metrics(labels, preds);
                    cell.best_epoch = trained.best_epoch;
                    cell.n_train = train_set.size();
                    cell.n_test = test_set.size();

                    if (config.breakdown && topics && !topics->clusters.empty()) {
                        std::vector<const NewsInstance*> test_instances;
                        for (auto i : prepared->test) test_instances.push_back(&corpus[i]);
                        cell.breakdown = topic_breakdown(test_instances, topics->clusters, preds, config.clustering);
                    }
                } catch (const std::exception& e) {
                    cell.metrics.reset();
                    cell.error = e.what();
                    spdlog::error("cell strategy={} target={} seed={} failed: {}", to_string(strategy),
                                  target, seed, e.what());
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    summarize(report);
    return report;
}

} // namespace ftt
