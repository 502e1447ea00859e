#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ftt {

// Dense embedding with its Euclidean norm cached at construction.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    double norm() const noexcept { return norm_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
        return a.values_ == b.values_;
    }

private:
    std::vector<double> values_;
    double norm_ = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Cosine similarity clamped to [-1, 1]. Throws EmbeddingError on a
/// dimension mismatch or a zero-norm argument.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Same, for raw spans with precomputed norms. Used on hot paths where the
/// centroid norm is maintained incrementally.
double cosine_similarity(std::span<const double> a, double norm_a,
                         std::span<const double> b, double norm_b);

/// Lowercased tokens split on anything that is not an ASCII letter or digit.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Signed feature hashing of `tokenize(text)` into `dim` buckets, L2
/// normalized. Throws EmbeddingError when the text has no tokens.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

} // namespace ftt
