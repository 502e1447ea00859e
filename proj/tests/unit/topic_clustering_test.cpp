#include "ftt/errors.hpp"
#include "ftt/random.hpp"
#include "ftt/topic_clustering.hpp"

#include "oracles/clustering_oracle.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace ftt {
namespace {

using testing::make_instance;

std::vector<NewsInstance> instances_from(const std::vector<std::vector<double>>& vs) {
    std::vector<NewsInstance> out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        out.push_back(make_instance(fmt::format("e{}", i + 1), vs[i], Label::kReal, {2020, 1, 1}));
        out.back().ordinal = 1;
    }
    return out;
}

std::vector<const NewsInstance*> pointers(const std::vector<NewsInstance>& items) {
    std::vector<const NewsInstance*> out;
    for (const auto& i : items) out.push_back(&i);
    return out;
}

TEST(Clustering, EmptyInput) {
    EXPECT_TRUE(single_pass_cluster(std::span<const NewsInstance* const>{}, {}).empty());
}

TEST(Clustering, Singleton) {
    const auto items = instances_from({{0.3, 0.4}});
    const auto ptrs = pointers(items);
    const auto clusters = single_pass_cluster(ptrs, {0.65});
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].centroid, (std::vector<double>{0.3, 0.4}));
    EXPECT_EQ(clusters[0].member_ids, (std::vector<std::string>{"e1"}));
}

TEST(Clustering, HandSimulatedThreeItems) {
    const double n = std::sqrt(0.81 + 0.01);
    SinglePassClusterer c({0.5});
    const auto a1 = c.add("e1", EmbeddingVector({1, 0}), 1);
    EXPECT_TRUE(a1.founded);
    EXPECT_EQ(a1.topic_id, 0);
    const auto a2 = c.add("e2", EmbeddingVector({0.9 / n, 0.1 / n}), 1);
    EXPECT_FALSE(a2.founded);
    EXPECT_EQ(a2.topic_id, 0);
    EXPECT_NEAR(a2.similarity, 0.9938837, 1e-6);
    const auto a3 = c.add("e3", EmbeddingVector({0, 1}), 1);
    EXPECT_TRUE(a3.founded);
    EXPECT_EQ(a3.topic_id, 1);
    // Similarity of e3 to the updated centroid [(1 + 0.9/n)/2, (0.1/n)/2].
    const double cx = (1 + 0.9 / n) / 2, cy = (0.1 / n) / 2;
    EXPECT_NEAR(a3.similarity, cy / std::hypot(cx, cy), 1e-12);
    EXPECT_NEAR(a3.similarity, 0.0553, 1e-4);
    EXPECT_LT(a3.similarity, 0.5);
    ASSERT_EQ(c.clusters().size(), 2u);
    EXPECT_NEAR(c.clusters()[0].centroid[0], (1 + 0.9 / n) / 2, 1e-15);
    EXPECT_NEAR(c.clusters()[0].centroid[1], (0.1 / n) / 2, 1e-15);
}

TEST(Clustering, ThresholdOneMakesSingletons) {
    std::vector<std::vector<double>> vs;
    for (int i = 0; i < 10; ++i) vs.push_back({1.0, 0.1 * i, 0.01 * i * i});
    const auto items = instances_from(vs);
    const auto ptrs = pointers(items);
    EXPECT_EQ(single_pass_cluster(ptrs, {1.0 - 1e-12}).size(), 10u);
}

TEST(Clustering, BoundaryEqualityFounds) {
    // Same direction: similarity is exactly 1, which does not exceed 1.
    SinglePassClusterer c({1.0});
    c.add("a", EmbeddingVector({2, 0}), 1);
    EXPECT_TRUE(c.add("b", EmbeddingVector({1, 0}), 1).founded);
}

TEST(Clustering, TiesGoToLowestTopicId) {
    // [1,1] is exactly as similar to [1,0] as to [0,1].
    SinglePassClusterer c({0.6});
    c.add("p", EmbeddingVector({1, 0}), 1);
    c.add("q", EmbeddingVector({0, 1}), 1);
    const auto r = c.add("r", EmbeddingVector({1, 1}), 1);
    EXPECT_FALSE(r.founded);
    EXPECT_EQ(r.topic_id, 0);
}

TEST(Clustering, ErrorsNameTheInstance) {
    const auto items = instances_from({{1, 0}, {0, 0}});
    const auto ptrs = pointers(items);
    try {
        single_pass_cluster(ptrs, {0.5});
        FAIL();
    } catch (const EmbeddingError& e) {
        EXPECT_NE(std::string(e.what()).find("e2"), std::string::npos);
    }
    const auto mixed = instances_from({{1, 0}, {1, 0, 0}});
    const auto mixed_ptrs = pointers(mixed);
    EXPECT_THROW(single_pass_cluster(mixed_ptrs, {0.5}), EmbeddingError);
}

TEST(Clustering, ConfigValidation) {
    EXPECT_THROW(validate(ClusteringConfig{0.0}), ConfigError);
    EXPECT_THROW(validate(ClusteringConfig{1.5}), ConfigError);
    EXPECT_NO_THROW(validate(ClusteringConfig{1.0}));
}

std::vector<std::vector<double>> random_vectors(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<std::vector<double>> out(n, std::vector<double>(d));
    // A few anchor directions so that joins actually happen.
    std::vector<std::vector<double>> anchors(3, std::vector<double>(d));
    for (auto& a : anchors)
        for (auto& x : a) x = rng.normal();
    for (auto& v : out) {
        const auto& a = anchors[rng.uniform_below(anchors.size())];
        for (std::size_t k = 0; k < d; ++k) v[k] = a[k] + 0.6 * rng.normal();
    }
    return out;
}

TEST(Clustering, InvariantsAndReplay) {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const auto vs = random_vectors(rng, 40, 5);
        auto items = instances_from(vs);
        for (std::size_t i = 0; i < items.size(); ++i) items[i].ordinal = 1 + static_cast<int>(i % 4);
        const auto ptrs = pointers(items);
        const ClusteringConfig cfg{0.3 + 0.6 * rng.uniform01()};
        const auto clusters = single_pass_cluster(ptrs, cfg);

        std::multiset<std::string> seen;
        for (const auto& c : clusters) {
            int count_sum = 0;
            for (const auto& [q, n] : c.counts_by_quarter) count_sum += n;
            EXPECT_EQ(static_cast<std::size_t>(count_sum), c.size());
            std::vector<double> mean(5, 0.0);
            for (const auto& id : c.member_ids) {
                seen.insert(id);
                const auto& v = vs[std::stoul(id.substr(1)) - 1];
                for (int k = 0; k < 5; ++k) mean[k] += v[k] / static_cast<double>(c.size());
            }
            for (int k = 0; k < 5; ++k) EXPECT_NEAR(c.centroid[k], mean[k], 1e-9);
        }
        EXPECT_EQ(seen.size(), items.size());
        EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), items.size());

        // Replay: every non-founder beat the threshold at its assignment moment.
        SinglePassClusterer replay(cfg);
        for (const auto* p : ptrs) {
            const auto a = replay.add(p->id, p->embedding, p->ordinal);
            if (!a.founded) EXPECT_GT(a.similarity, cfg.theta_sim);
            else EXPECT_LE(a.similarity, cfg.theta_sim);
        }
        ASSERT_EQ(replay.clusters().size(), clusters.size());
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            EXPECT_EQ(replay.clusters()[k].member_ids, clusters[k].member_ids);
        }
    }
}

TEST(Clustering, MatchesIndependentReference) {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = 1 + rng.uniform_below(20);
        const auto d = 2 + rng.uniform_below(5);
        const auto vs = random_vectors(rng, n, d);
        const double theta = 0.2 + 0.7 * rng.uniform01();
        const auto items = instances_from(vs);
        const auto ptrs = pointers(items);
        const auto clusters = single_pass_cluster(ptrs, {theta});
        const auto expected = oracle::reference_cluster(vs, theta);

        ASSERT_EQ(clusters.size(), expected.size()) << "trial " << trial;
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            std::vector<std::string> ids;
            for (auto i : expected[k]) ids.push_back(fmt::format("e{}", i + 1));
            EXPECT_EQ(clusters[k].member_ids, ids) << "trial " << trial;
            EXPECT_EQ(clusters[k].topic_id, static_cast<int>(k));
        }
    }
}

TEST(AssignToExisting, Examples) {
    const auto train = instances_from({{1, 0, 0}, {0, 1, 0}});
    const auto train_ptrs = pointers(train);
    const auto trained = single_pass_cluster(train_ptrs, {0.5});
    ASSERT_EQ(trained.size(), 2u);

    auto tests = instances_from({{0, 1, 0}, {0, 0, 1}, {0, 0, 1}});
    const auto test_ptrs = pointers(tests);
    const auto tags = assign_to_existing(test_ptrs, trained, {0.5});
    ASSERT_EQ(tags.size(), 3u);
    EXPECT_TRUE(tags[0].existing);
    EXPECT_EQ(tags[0].topic_id, 1);
    EXPECT_FALSE(tags[1].existing);
    EXPECT_EQ(tags[1].topic_id, 2);
    EXPECT_FALSE(tags[2].existing);
    EXPECT_EQ(tags[2].topic_id, 2);
    // The trained clusters themselves are untouched.
    EXPECT_EQ(trained[1].size(), 1u);
}

TEST(MembershipMap, CoversEveryMember) {
    const auto items = instances_from({{1, 0}, {1, 0.1}, {0, 1}});
    const auto ptrs = pointers(items);
    const auto m = membership_map(single_pass_cluster(ptrs, {0.9}));
    EXPECT_EQ(m.at("e1"), 0);
    EXPECT_EQ(m.at("e2"), 0);
    EXPECT_EQ(m.at("e3"), 1);
}

} // namespace
} // namespace ftt
