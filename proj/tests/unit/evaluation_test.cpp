#include "ftt/errors.hpp"
#include "ftt/evaluation.hpp"
#include "ftt/random.hpp"
#include "ftt/synthetic.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fmt/format.h>

namespace ftt {
namespace {

Corpus small_synthetic(std::uint64_t seed = 0) {
    auto spec = planted_spec(seed);
    spec.n_quarters = 10;
    spec.dim = 128;
    for (auto& t : spec.topics) {
        if (t.pattern == TopicPattern::kEmergent) t.onset = 7;
    }
    return generate_synthetic(spec);
}

ExperimentConfig quick_experiment() {
    ExperimentConfig cfg;
    cfg.strategies = {Strategy::kUniform, Strategy::kFtt, Strategy::kSamePeriod};
    cfg.targets = {9, 10};
    cfg.seeds = {0, 1};
    cfg.train.hidden = 8;
    cfg.train.max_epochs = 4;
    cfg.train.learning_rate = 0.01;
    cfg.trend.theta_count = 10;
    return cfg;
}

TEST(PrepareSplit, QuartersAndBalance) {
    const auto corpus = small_synthetic();
    const auto prepared = prepare_split(corpus, 8, 3);
    EXPECT_EQ(prepared.split.val_quarter, 7);
    for (auto i : prepared.train) EXPECT_LE(corpus[i].ordinal, 6);
    for (auto i : prepared.val) EXPECT_EQ(corpus[i].ordinal, 7);
    for (auto i : prepared.test) EXPECT_EQ(corpus[i].ordinal, 8);
    for (const auto* set : {&prepared.train, &prepared.val, &prepared.test}) {
        EXPECT_TRUE(std::is_sorted(set->begin(), set->end()));
        int fake = 0;
        for (auto i : *set) fake += corpus[i].label == Label::kFake;
        EXPECT_EQ(2 * fake, static_cast<int>(set->size()));
    }
    EXPECT_EQ(prepare_split(corpus, 8, 3).train, prepared.train);
}

TEST(ComputeWeights, OnePerTrainingInstance) {
    const auto corpus = small_synthetic();
    const auto prepared = prepare_split(corpus, 10, 0);
    TrendConfig trend;
    trend.theta_count = 10;
    const auto model = build_topic_model(corpus, prepared, {}, trend);
    EXPECT_FALSE(model.series.empty());
    for (auto s : {Strategy::kUniform, Strategy::kFtt, Strategy::kSamePeriod, Strategy::kPreviousPeriod,
                   Strategy::kCombined}) {
        ReweightConfig cfg;
        cfg.strategy = s;
        const auto w = compute_weights(corpus, prepared, &model, cfg);
        ASSERT_EQ(w.size(), prepared.train.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
            EXPECT_EQ(w[k].instance_id, corpus[prepared.train[k]].id);
            EXPECT_GT(w[k].weight, 0.0);
            if (s == Strategy::kUniform) EXPECT_EQ(w[k].weight, 1.0);
        }
    }
}

TEST(TopicModel, ForecastsTheTestQuarter) {
    const auto corpus = small_synthetic();
    const auto prepared = prepare_split(corpus, 10, 0);
    TrendConfig trend;
    trend.theta_count = 10;
    const auto model = build_topic_model(corpus, prepared, {}, trend);
    for (const auto& s : model.series) EXPECT_EQ(s.f.size(), 8u);
    for (const auto& fit : model.trends.fits) {
        EXPECT_EQ(fit.forecast_ordinal, 10);
        EXPECT_EQ(fit.target_quarter_of_year, corpus.quarter(10).quarter_of_year);
    }
}

std::vector<NewsInstance> basis_items(const std::string& prefix, const std::vector<int>& axes, double jitter) {
    std::vector<NewsInstance> out;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        std::vector<double> v(10, 0.0);
        v[axes[k]] = 1.0;
        v[(axes[k] + 1) % 5] += jitter;
        out.push_back(testing::make_instance(fmt::format("{}{}", prefix, k), v, Label::kReal, {2020, 1, 1}));
    }
    return out;
}

TEST(TopicBreakdown, Boundaries) {
    const auto train = basis_items("tr", {0, 1, 2, 3, 4}, 0.0);
    std::vector<const NewsInstance*> train_ptrs;
    for (const auto& i : train) train_ptrs.push_back(&i);
    const ClusteringConfig cfg{0.5};
    const auto trained = single_pass_cluster(train_ptrs, cfg);
    ASSERT_EQ(trained.size(), 5u);

    auto run = [&](const std::vector<NewsInstance>& items) {
        std::vector<const NewsInstance*> ptrs;
        for (const auto& i : items) ptrs.push_back(&i);
        const std::vector<Label> preds(items.size(), Label::kReal);
        return topic_breakdown(ptrs, trained, preds, cfg);
    };

    const auto same = run(basis_items("s", {0, 1, 2, 3, 4}, 0.0));
    EXPECT_EQ(same.n_existing, 5u);
    EXPECT_EQ(same.n_new, 0u);
    EXPECT_FALSE(same.new_topics);

    const auto orth = run(basis_items("o", {5, 6, 7, 8, 9}, 0.0));
    EXPECT_EQ(orth.n_existing, 0u);
    EXPECT_FALSE(orth.existing);

    auto mixed = basis_items("n", {0, 1, 2, 3, 4}, 0.1);
    for (auto& i : basis_items("o", {5, 6, 7, 8, 9}, 0.0)) mixed.push_back(i);
    const auto m = run(mixed);
    EXPECT_EQ(m.n_existing, 5u);
    EXPECT_EQ(m.n_new, 5u);
}

TEST(RollingExperiment, ShapeAndHygiene) {
    const auto corpus = small_synthetic();
    auto cfg = quick_experiment();
    std::size_t audited = 0;
    cfg.batch_audit = [&](int target, std::span<const Example> batch) {
        for (const auto& e : batch) EXPECT_LT(e.ordinal, target - 1);
        ++audited;
    };
    const auto report = run_rolling_experiment(corpus, cfg);
    EXPECT_EQ(report.cells.size(), 3u * 2u * 2u);
    std::size_t checked = 0;
    for (const auto& c : report.cells) {
        EXPECT_TRUE(c.metrics) << c.error;
        EXPECT_GT(c.batches_checked, 0u);
        checked += c.batches_checked;
    }
    EXPECT_EQ(checked, audited);
    EXPECT_EQ(report.per_quarter.size(), 3u * 2u);
    ASSERT_EQ(report.average.size(), 3u);

    for (const auto& avg : report.average) {
        const auto* q9 = report.find(avg.strategy, 9);
        const auto* q10 = report.find(avg.strategy, 10);
        ASSERT_TRUE(q9 && q10);
        EXPECT_DOUBLE_EQ(avg.mean.macro_f1, (q9->mean.macro_f1 + q10->mean.macro_f1) / 2.0);
        EXPECT_EQ(avg.cells, 4u);
    }
}

TEST(RollingExperiment, SingleCellGivesOneRowPerStrategy) {
    const auto corpus = small_synthetic();
    auto cfg = quick_experiment();
    cfg.targets = {10};
    cfg.seeds = {7};
    const auto report = run_rolling_experiment(corpus, cfg);
    EXPECT_EQ(report.cells.size(), 3u);
    EXPECT_EQ(report.per_quarter.size(), 3u);
}

TEST(RollingExperiment, Deterministic) {
    const auto corpus = small_synthetic();
    auto cfg = quick_experiment();
    cfg.targets = {10};
    const auto a = run_rolling_experiment(corpus, cfg);
    const auto b = run_rolling_experiment(corpus, cfg);
    ASSERT_EQ(a.cells.size(), b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        EXPECT_EQ(a.cells[i].metrics->macro_f1, b.cells[i].metrics->macro_f1);
        EXPECT_EQ(a.cells[i].best_epoch, b.cells[i].best_epoch);
    }
}

TEST(RollingExperiment, LeakingAuditFailsCellNotRun) {
    const auto corpus = small_synthetic();
    auto cfg = quick_experiment();
    cfg.targets = {10};
    cfg.seeds = {0};
    cfg.strategies = {Strategy::kUniform};
    cfg.batch_audit = [](int, std::span<const Example>) { throw TrainingError("audit says no"); };
    const auto report = run_rolling_experiment(corpus, cfg);
    ASSERT_EQ(report.cells.size(), 1u);
    EXPECT_FALSE(report.cells[0].metrics);
    EXPECT_NE(report.cells[0].error.find("audit says no"), std::string::npos);
    EXPECT_EQ(report.average[0].missing, 1u);
}

TEST(Seeds, StageSeedsDiffer) {
    EXPECT_NE(balance_seed(0), train_seed(0));
    EXPECT_EQ(train_seed(3), derive_seed(3, "train"));
    EXPECT_EQ(balance_seed(3), derive_seed(3, "balance"));
}

} // namespace
} // namespace ftt
