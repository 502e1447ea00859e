#include "ftt/embedder.hpp"

#include "ftt/errors.hpp"
#include "ftt/random.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ftt {

EmbeddingVector::EmbeddingVector(std::vector<double> values)
    : values_(std::move(values)), norm_(l2_norm(values_)) {}

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double l2_norm(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

double cosine_similarity(std::span<const double> a, double norm_a,
                         std::span<const double> b, double norm_b) {
    if (a.size() != b.size()) {
        throw EmbeddingError(
            fmt::format("cosine similarity: dimension mismatch ({} vs {})", a.size(), b.size()));
    }
    if (!(norm_a > 0.0) || !(norm_b > 0.0)) {
        throw EmbeddingError("cosine similarity: zero-norm vector");
    }
    const double c = dot(a, b) / (norm_a * norm_b);
    return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine_similarity(a.values(), a.norm(), b.values(), b.norm());
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        const bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c >= 0x80;
        if (word) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

std::uint64_t hash_token(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

} // namespace

EmbeddingVector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw EmbeddingError("hash_embed: dimension must be positive");
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw EmbeddingError("hash_embed: text has no tokens (unembeddable)");

    std::vector<double> values(dim, 0.0);
    for (const auto& token : tokens) {
        const std::uint64_t bucket_hash = hash_token(token, seed);
        const std::uint64_t sign_hash = mix64(bucket_hash ^ 0x2545f4914f6cdd1dULL);
        values[bucket_hash % dim] += (sign_hash & 1U) ? 1.0 : -1.0;
    }
    const double norm = l2_norm(values);
    if (norm == 0.0) {
        // Every token cancelled against a colliding token of opposite sign.
        throw EmbeddingError("hash_embed: token hashes cancel to a zero vector (unembeddable)");
    }
    for (auto& v : values) v /= norm;
    return EmbeddingVector(std::move(values));
}

} // namespace ftt
