#include "ftt/embedder.hpp"
#include "ftt/errors.hpp"
#include "ftt/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include <fmt/format.h>

namespace ftt {
namespace {

TEST(Cosine, Examples) {
    const EmbeddingVector v({0.3, -1.2, 2.0});
    EXPECT_DOUBLE_EQ(cosine_similarity(v, v), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(EmbeddingVector({1, 0}), EmbeddingVector({0, 1})), 0.0);
    EXPECT_NEAR(cosine_similarity(EmbeddingVector({1, 0}), EmbeddingVector({1, 1})), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Cosine, ErrorsOnZeroNormOrDimensionMismatch) {
    EXPECT_THROW(cosine_similarity(EmbeddingVector({0, 0}), EmbeddingVector({1, 0})), EmbeddingError);
    EXPECT_THROW(cosine_similarity(EmbeddingVector({1, 0}), EmbeddingVector({1, 0, 0})), EmbeddingError);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(6), b(6);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        const double c = 0.01 + 100.0 * rng.uniform01();
        std::vector<double> scaled = a;
        for (auto& x : scaled) x *= c;
        const EmbeddingVector ea(a), eb(b), es(scaled);
        EXPECT_EQ(cosine_similarity(ea, eb), cosine_similarity(eb, ea));
        EXPECT_NEAR(cosine_similarity(es, eb), cosine_similarity(ea, eb), 1e-12);
        const double s = cosine_similarity(ea, eb);
        EXPECT_GE(s, -1.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
    EXPECT_EQ(tokenize("Hello, World! x2-Y"), (std::vector<std::string>{"hello", "world", "x2", "y"}));
    EXPECT_TRUE(tokenize("  ...  ").empty());
    EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (std::vector<std::string>{"caf\xc3\xa9", "ok"}));
}

TEST(HashEmbed, DeterministicUnitNorm) {
    const auto a = hash_embed("The quick brown fox", 64, 0);
    const auto b = hash_embed("The quick brown fox", 64, 0);
    EXPECT_EQ(a, b);
    EXPECT_NEAR(a.norm(), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
    EXPECT_EQ(hash_embed("the QUICK, brown fox.", 64, 0), a);
}

TEST(HashEmbed, SeedChangesBuckets) {
    EXPECT_NE(hash_embed("alpha beta gamma delta", 256, 0), hash_embed("alpha beta gamma delta", 256, 1));
}

TEST(HashEmbed, UnitNormOverRandomTexts) {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const auto n = 1 + rng.uniform_below(20);
        for (std::uint64_t k = 0; k < n; ++k) text += fmt::format("w{} ", rng.uniform_below(1000));
        try {
            EXPECT_NEAR(hash_embed(text, 128, 0).norm(), 1.0, 1e-9);
        } catch (const EmbeddingError&) {
            // Opposite-sign collisions can cancel every token; that is reported, not normalized.
        }
    }
}

TEST(HashEmbed, EmptyTextThrows) {
    EXPECT_THROW(hash_embed("", 32, 0), EmbeddingError);
    EXPECT_THROW(hash_embed(" ,;", 32, 0), EmbeddingError);
}

// Disjoint vocabularies share no tokens, so similarity comes only from bucket
// collisions, which are rare at d = 4096.
TEST(HashEmbed, DisjointVocabulariesAreNearlyOrthogonal) {
    Rng rng(31);
    int below = 0;
    for (int pair = 0; pair < 100; ++pair) {
        std::string left, right;
        for (int k = 0; k < 15; ++k) {
            left += fmt::format("left{} ", rng.uniform_below(100000));
            right += fmt::format("right{} ", rng.uniform_below(100000));
        }
        if (cosine_similarity(hash_embed(left, 4096, 0), hash_embed(right, 4096, 0)) < 0.2) ++below;
    }
    EXPECT_GE(below, 99);
}

} // namespace
} // namespace ftt
