#include "ftt/detector.hpp"
#include "ftt/errors.hpp"
#include "ftt/random.hpp"

#include "oracles/finite_difference.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace ftt {
namespace {

struct Batch {
    std::vector<std::vector<double>> xs;
    std::vector<Example> examples;
};

Batch random_batch(Rng& rng, std::size_t n, std::size_t d, bool random_weights) {
    Batch b;
    b.xs.resize(n, std::vector<double>(d));
    for (auto& x : b.xs)
        for (auto& v : x) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        Example e;
        e.embedding = b.xs[i];
        e.label = rng.bernoulli(0.5) ? Label::kFake : Label::kReal;
        e.weight = random_weights ? 0.3 + 1.7 * rng.uniform01() : 1.0;
        b.examples.push_back(e);
    }
    return b;
}

// Standard binary cross-entropy, written independently of the library.
double mean_cross_entropy(const ClassifierParams& p, const std::vector<Example>& batch) {
    double total = 0.0;
    for (const auto& e : batch) {
        const double prob = predict(p, e.embedding);
        total += e.label == Label::kFake ? -std::log(prob) : -std::log(1.0 - prob);
    }
    return total / static_cast<double>(batch.size());
}

TEST(Detector, ZeroParamsPredictHalf) {
    const auto p = ClassifierParams::zeros(4, 3);
    EXPECT_EQ(predict(p, std::vector<double>{1, -2, 3, 0.5}), 0.5);
}

TEST(Detector, OutputBiasSaturates) {
    auto p = ClassifierParams::zeros(2, 2);
    p.b2 = 10.0;
    EXPECT_GT(predict(p, std::vector<double>{0.3, 0.1}), 0.99);
}

TEST(Detector, DeterministicInitAndPrediction) {
    const auto a = ClassifierParams::initialized(8, 4, 77);
    const auto b = ClassifierParams::initialized(8, 4, 77);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, ClassifierParams::initialized(8, 4, 78));
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(predict(a, x), predict(b, x));
    EXPECT_THROW(predict(a, std::vector<double>{1, 2}), InputError);
}

TEST(Loss, SingleItemAtHalf) {
    const auto p = ClassifierParams::zeros(2, 2);
    const std::vector<double> x{1, 1};
    const std::vector<Example> batch{{x, Label::kFake, 1.0, 1}};
    EXPECT_NEAR(weighted_loss(p, batch), std::log(2.0), 1e-15);
}

TEST(Loss, UnitWeightsEqualMeanCrossEntropy) {
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = ClassifierParams::initialized(8, 4, rng.next_u64());
        const auto b = random_batch(rng, 7, 8, false);
        EXPECT_NEAR(weighted_loss(p, b.examples), mean_cross_entropy(p, b.examples), 1e-12);
    }
}

TEST(Loss, DoublingOneWeight) {
    const auto p = ClassifierParams::initialized(3, 2, 5);
    const std::vector<double> x1{0.2, -1, 0.5}, x2{1, 1, -0.3};
    std::vector<Example> batch{{x1, Label::kFake, 1.0, 1}, {x2, Label::kReal, 1.0, 1}};
    const double before = weighted_loss(p, batch);
    const double ce1 = -std::log(predict(p, x1));
    batch[0].weight = 2.0;
    EXPECT_NEAR(weighted_loss(p, batch) - before, ce1 / 2.0, 1e-14);
}

TEST(Loss, RejectsEmptyOrNonpositiveWeights) {
    const auto p = ClassifierParams::zeros(1, 1);
    EXPECT_THROW(weighted_loss(p, std::span<const Example>{}), InputError);
    const std::vector<double> x{1};
    const std::vector<Example> batch{{x, Label::kFake, 0.0, 1}};
    EXPECT_THROW(weighted_loss(p, batch), InputError);
}

TEST(Loss, FloorKeepsSaturatedLossFinite) {
    auto p = ClassifierParams::zeros(1, 1);
    p.b2 = -100.0;
    const std::vector<double> x{1};
    const std::vector<Example> batch{{x, Label::kFake, 1.0, 1}};
    EXPECT_NEAR(weighted_loss(p, batch), -std::log(1e-12), 1e-9);
}

TEST(Gradient, MatchesFiniteDifferences) {
    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = ClassifierParams::initialized(8, 4, rng.next_u64());
        auto q = p;
        q.b2 = 0.3 * rng.normal();
        for (auto& v : q.b1) v = 0.3 * rng.normal();
        const auto b = random_batch(rng, 5, 8, true);
        ClassifierParams grad;
        const double loss = weighted_loss_and_gradient(q, b.examples, grad);
        EXPECT_NEAR(loss, weighted_loss(q, b.examples), 1e-15);
        const auto numeric = oracle::numeric_gradient(q, b.examples, 1e-5);
        EXPECT_LT(oracle::max_relative_error(oracle::flatten(grad), numeric), 1e-4) << "trial " << trial;
    }
}

TEST(Gradient, UniformWeightsGiveUnweightedGradient) {
    Rng rng(3);
    const auto p = ClassifierParams::initialized(6, 3, 1);
    auto b = random_batch(rng, 9, 6, false);
    ClassifierParams g1, g2;
    weighted_loss_and_gradient(p, b.examples, g1);
    for (auto& e : b.examples) e.weight = 1.0;
    weighted_loss_and_gradient(p, b.examples, g2);
    EXPECT_EQ(g1, g2);
}

// Two Gaussian blobs in 2-D separated by a wide margin.
Batch separable(std::size_t n) {
    Rng rng(99);
    Batch b;
    for (std::size_t i = 0; i < n; ++i) {
        const bool fake = i % 2 == 0;
        b.xs.push_back({(fake ? 2.0 : -2.0) + 0.3 * rng.normal(), 0.5 * rng.normal()});
    }
    for (std::size_t i = 0; i < n; ++i) {
        b.examples.push_back({b.xs[i], i % 2 == 0 ? Label::kFake : Label::kReal, 1.0, 1});
    }
    return b;
}

TEST(Train, SeparableToySet) {
    const auto data = separable(20);
    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 5;
    cfg.max_epochs = 200;
    cfg.patience = 200;
    cfg.seed = 4;
    const auto result = train(data.examples, data.examples, cfg);
    const auto preds = predict_labels(result.params, data.examples);
    for (std::size_t i = 0; i < preds.size(); ++i) EXPECT_EQ(preds[i], data.examples[i].label);
    EXPECT_EQ(result.best_val_macro_f1, 1.0);
    ASSERT_GE(result.log.size(), 2u);
    EXPECT_LT(result.log.back().train_loss, result.log.front().train_loss);
}

TEST(Train, SameSeedSameLog) {
    const auto data = separable(30);
    TrainConfig cfg;
    cfg.hidden = 4;
    cfg.max_epochs = 15;
    cfg.seed = 12;
    const auto a = train(data.examples, data.examples, cfg);
    const auto b = train(data.examples, data.examples, cfg);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.params, b.params);
}

TEST(Train, EarlyStoppingKeepsBestEpoch) {
    const auto data = separable(30);
    TrainConfig cfg;
    cfg.hidden = 4;
    cfg.learning_rate = 0.05;
    cfg.max_epochs = 100;
    cfg.patience = 3;
    const auto r = train(data.examples, data.examples, cfg);
    EXPECT_LE(static_cast<int>(r.log.size()), r.best_epoch + cfg.patience);
    double best = 0.0;
    for (const auto& e : r.log) best = std::max(best, e.val_macro_f1);
    EXPECT_EQ(r.best_val_macro_f1, best);
}

TEST(Train, ObserverSeesEveryItemEachEpoch) {
    const auto data = separable(23);
    TrainConfig cfg;
    cfg.hidden = 2;
    cfg.batch_size = 4;
    cfg.max_epochs = 3;
    cfg.patience = 10;
    std::multiset<std::size_t> seen;
    std::size_t batches = 0;
    train(data.examples, data.examples, cfg, [&](std::span<const std::size_t> idx) {
        ++batches;
        EXPECT_LE(idx.size(), 4u);
        seen.insert(idx.begin(), idx.end());
    });
    EXPECT_EQ(batches, 3u * 6u);
    for (std::size_t i = 0; i < 23; ++i) EXPECT_EQ(seen.count(i), 3u);
}

TEST(Train, Validation) {
    TrainConfig cfg;
    cfg.batch_size = 0;
    EXPECT_THROW(validate(cfg), ConfigError);
    EXPECT_THROW(train({}, {}, TrainConfig{}), TrainingError);
}

TEST(Train, DivergenceIsReported) {
    const auto data = separable(10);
    TrainConfig cfg;
    cfg.hidden = 2;
    cfg.learning_rate = std::numeric_limits<double>::infinity();
    cfg.max_epochs = 3;
    EXPECT_THROW(train(data.examples, data.examples, cfg), Error);
}

Corpus small_corpus() {
    std::vector<NewsInstance> items;
    for (int i = 0; i < 6; ++i) {
        items.push_back(testing::make_instance(fmt::format("n{}", i), {double(i), 1.0}, i % 2 ? Label::kFake : Label::kReal,
                                               {2020, 1 + i, 1}));
    }
    return Corpus(2, items);
}

TEST(Examples, WeightsLookedUpById) {
    const auto corpus = small_corpus();
    const std::vector<std::size_t> idx{0, 2, 4};
    std::vector<WeightAssignment> weights{{"n4", {}, {}, 0.5}, {"n0", {}, {}, 2.0}, {"n2", {}, {}, 1.0}};
    const auto ex = make_examples(corpus, idx, &weights);
    ASSERT_EQ(ex.size(), 3u);
    EXPECT_EQ(ex[0].weight, 2.0);
    EXPECT_EQ(ex[2].weight, 0.5);
    EXPECT_EQ(ex[2].ordinal, corpus[4].ordinal);
    weights.pop_back();
    EXPECT_THROW(make_examples(corpus, idx, &weights), InputError);
}

TEST(Examples, AllOnesEqualsNoWeightFile) {
    const auto corpus = small_corpus();
    std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
    std::vector<WeightAssignment> ones;
    for (auto i : idx) ones.push_back({corpus[i].id, {}, {}, 1.0});
    TrainConfig cfg;
    cfg.hidden = 3;
    cfg.max_epochs = 5;
    const auto a = train(make_examples(corpus, idx, &ones), make_examples(corpus, idx), cfg);
    const auto b = train(make_examples(corpus, idx), make_examples(corpus, idx), cfg);
    EXPECT_EQ(a.params, b.params);
}

TEST(Checkpoint, RoundTripIsExact) {
    testing::TempDir dir("checkpoint");
    const auto p = ClassifierParams::initialized(5, 3, 8);
    save_checkpoint(dir / "m.json", p, TrainConfig{});
    EXPECT_EQ(load_checkpoint(dir / "m.json"), p);
    testing::write_file(dir / "bad.json", "{\"format\":\"other\"}");
    EXPECT_THROW(load_checkpoint(dir / "bad.json"), InputError);
    EXPECT_THROW(load_checkpoint(dir / "missing.json"), InputError);
}

} // namespace
} // namespace ftt
