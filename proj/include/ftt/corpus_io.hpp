#pragma once

#include "ftt/embedder.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ftt {

enum class Label : std::uint8_t { kReal = 0, kFake = 1 };

inline int to_int(Label label) { return static_cast<int>(label); }

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
};

/// Parses the date part of an ISO-8601 timestamp ("2020-05-15", optionally
/// followed by a time component). Throws InputError on malformed input.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

inline int quarter_of_month(int month) { return (month - 1) / 3 + 1; }

// Position of a calendar quarter in the corpus' consecutive quarter sequence.
struct QuarterIndex {
    int ordinal = 0; // 1-based
    int year = 0;
    int quarter_of_year = 0; // 1..4

    auto operator<=>(const QuarterIndex&) const = default;
};

struct NewsInstance {
    std::string id;
    std::optional<std::string> text;
    EmbeddingVector embedding;
    Label label = Label::kReal;
    Date timestamp;
    int ordinal = 0; // filled in by Corpus
};

// Immutable after construction; instances are sorted by (timestamp, id) and
// quarter ordinals cover every calendar quarter between the first and last
// observed one, including empty quarters.
class Corpus {
public:
    Corpus() = default;

    /// Sorts, assigns ordinals and validates. Throws InputError on duplicate
    /// ids or embeddings whose dimension differs from `dim`.
    Corpus(std::size_t dim, std::vector<NewsInstance> instances);

    std::size_t dim() const noexcept { return dim_; }
    int num_quarters() const noexcept { return static_cast<int>(quarters_.size()); }
    const std::vector<NewsInstance>& instances() const noexcept { return instances_; }
    const NewsInstance& operator[](std::size_t i) const { return instances_[i]; }
    std::size_t size() const noexcept { return instances_.size(); }

    const QuarterIndex& quarter(int ordinal) const;
    const std::vector<QuarterIndex>& quarters() const noexcept { return quarters_; }

    /// Indices (in corpus order) of the instances in one quarter.
    const std::vector<std::size_t>& indices_in_quarter(int ordinal) const;

private:
    std::size_t dim_ = 0;
    std::vector<NewsInstance> instances_;
    std::vector<QuarterIndex> quarters_;
    std::vector<std::vector<std::size_t>> by_quarter_;
};

struct Rejection {
    std::size_t line = 0;
    std::string id; // empty when the record has no readable id
    std::string reason;
};

struct LoadOptions {
    // 0 means: take the dimension from the header record, or from the first
    // record carrying an embedding.
    std::size_t expected_dim = 768;
    // Records with text but no embedding are embedded with hash_embed.
    std::uint64_t embed_seed = 0;
};

struct LoadResult {
    Corpus corpus;
    std::vector<Rejection> rejected;
};

/// JSON-lines reader. Bad records are rejected with a diagnostic; duplicate
/// ids, unreadable files and header/dimension conflicts are fatal.
LoadResult load_corpus(const std::filesystem::path& path, const LoadOptions& options);
LoadResult parse_corpus(std::istream& in, const LoadOptions& options);

/// Writes a header record followed by one record per instance, in corpus
/// order. Output is byte-stable for identical input.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Balanced 1:1 fake/real subset of one quarter, returned as corpus indices in
/// corpus order. Returns an empty set (with a warning) when either class is
/// absent.
std::vector<std::size_t> undersample_balanced(const Corpus& corpus, int ordinal,
                                              std::uint64_t seed);

struct SplitSpec {
    std::vector<int> train_quarters;
    int val_quarter = 0;
    int test_quarter = 0;
};

/// Rolling split for target ordinal Q: train 1..Q-2, validate Q-1, test Q.
/// Throws InputError when Q < 3.
SplitSpec make_rolling_split(int target);
/// Also checks that the target quarter exists in the corpus.
SplitSpec make_rolling_split(const Corpus& corpus, int target);

} // namespace ftt
