#include "ftt/corpus_io.hpp"

#include "ftt/errors.hpp"
#include "ftt/random.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace ftt {

using nlohmann::json;

namespace {

int parse_int(std::string_view text, std::string_view what) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw InputError(fmt::format("malformed {} '{}'", what, text));
    }
    return value;
}

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return month == 2 && is_leap(year) ? 29 : kDays[month - 1];
}

int calendar_quarter_number(const Date& d) {
    return d.year * 4 + quarter_of_month(d.month) - 1;
}

} // namespace

Date parse_iso_date(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-' ||
        (text.size() > 10 && text[10] != 'T' && text[10] != ' ')) {
        throw InputError(fmt::format("malformed timestamp '{}'", text));
    }
    Date d;
    d.year = parse_int(text.substr(0, 4), "year");
    d.month = parse_int(text.substr(5, 2), "month");
    d.day = parse_int(text.substr(8, 2), "day");
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw InputError(fmt::format("invalid calendar date '{}'", text));
    }
    return d;
}

std::string format_iso_date(const Date& date) {
    return fmt::format("{:04d}-{:02d}-{:02d}", date.year, date.month, date.day);
}

Corpus::Corpus(std::size_t dim, std::vector<NewsInstance> instances)
    : dim_(dim), instances_(std::move(instances)) {
    std::sort(instances_.begin(), instances_.end(), [](const auto& a, const auto& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
    });
    std::unordered_set<std::string_view> seen;
    for (const auto& inst : instances_) {
        if (!seen.insert(inst.id).second) {
            throw InputError(fmt::format("duplicate instance id '{}'", inst.id));
        }
        if (inst.embedding.dim() != dim_) {
            throw InputError(fmt::format("instance '{}': embedding dimension {} != {}", inst.id,
                                         inst.embedding.dim(), dim_));
        }
    }
    if (instances_.empty()) return;

    const int first = calendar_quarter_number(instances_.front().timestamp);
    const int last = calendar_quarter_number(instances_.back().timestamp);
    for (int n = first; n <= last; ++n) {
        quarters_.push_back({n - first + 1, n / 4, n % 4 + 1});
    }
    by_quarter_.resize(quarters_.size());
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        auto& inst = instances_[i];
        inst.ordinal = calendar_quarter_number(inst.timestamp) - first + 1;
        by_quarter_[inst.ordinal - 1].push_back(i);
    }
}

const QuarterIndex& Corpus::quarter(int ordinal) const {
    if (ordinal < 1 || ordinal > num_quarters()) {
        throw InputError(fmt::format("quarter ordinal {} outside 1..{}", ordinal, num_quarters()));
    }
    return quarters_[ordinal - 1];
}

const std::vector<std::size_t>& Corpus::indices_in_quarter(int ordinal) const {
    quarter(ordinal);
    return by_quarter_[ordinal - 1];
}

LoadResult parse_corpus(std::istream& in, const LoadOptions& options) {
    std::size_t dim = options.expected_dim;
    std::vector<NewsInstance> instances;
    std::vector<Rejection> rejected;
    // Text-only records are embedded after the dimension is known.
    std::vector<std::size_t> pending_text;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            rejected.push_back({line_no, "", fmt::format("invalid JSON: {}", e.what())});
            continue;
        }
        if (!record.is_object()) {
            rejected.push_back({line_no, "", "record is not a JSON object"});
            continue;
        }
        if (record.value("type", "") == "header") {
            if (record.contains("dim")) {
                const auto header_dim = record["dim"].get<std::size_t>();
                if (dim != 0 && header_dim != dim) {
                    throw InputError(fmt::format("corpus header declares dim {} but {} was expected",
                                                 header_dim, dim));
                }
                dim = header_dim;
            }
            continue;
        }

        std::string id;
        try {
            if (!record.contains("id") || !record["id"].is_string()) {
                throw InputError("missing string field 'id'");
            }
            id = record["id"].get<std::string>();
            if (!record.contains("label") || !record["label"].is_number_integer()) {
                throw InputError("missing integer field 'label'");
            }
            const auto label = record["label"].get<int>();
            if (label != 0 && label != 1) throw InputError(fmt::format("label {} not in {{0,1}}", label));
            if (!record.contains("timestamp") || !record["timestamp"].is_string()) {
                throw InputError("missing string field 'timestamp'");
            }

            NewsInstance inst;
            inst.id = id;
            inst.label = static_cast<Label>(label);
            inst.timestamp = parse_iso_date(record["timestamp"].get<std::string>());
            if (record.contains("text") && record["text"].is_string()) {
                inst.text = record["text"].get<std::string>();
            }

            const bool has_embedding = record.contains("embedding") && !record["embedding"].is_null();
            if (has_embedding) {
                const auto& arr = record["embedding"];
                if (!arr.is_array()) throw InputError("'embedding' is not an array");
                std::vector<double> values;
                values.reserve(arr.size());
                for (const auto& v : arr) {
                    if (!v.is_number()) throw InputError("'embedding' holds a non-number");
                    values.push_back(v.get<double>());
                }
                if (dim == 0) dim = values.size();
                if (values.size() != dim) {
                    throw InputError(fmt::format("embedding dimension {} != expected {}",
                                                 values.size(), dim));
                }
                inst.embedding = EmbeddingVector(std::move(values));
                if (!(inst.embedding.norm() > 0.0) || !std::isfinite(inst.embedding.norm())) {
                    throw InputError("embedding has zero or non-finite norm");
                }
            } else if (inst.text && !inst.text->empty()) {
                pending_text.push_back(instances.size());
            } else {
                throw InputError("record has neither text nor embedding");
            }
            instances.push_back(std::move(inst));
        } catch (const Error& e) {
            rejected.push_back({line_no, id, e.what()});
        } catch (const json::exception& e) {
            rejected.push_back({line_no, id, e.what()});
        }
    }

    if (!pending_text.empty()) {
        if (dim == 0) dim = 768;
        std::vector<bool> drop(instances.size(), false);
        for (auto idx : pending_text) {
            try {
                instances[idx].embedding = hash_embed(*instances[idx].text, dim, options.embed_seed);
            } catch (const EmbeddingError& e) {
                rejected.push_back({0, instances[idx].id, e.what()});
                drop[idx] = true;
            }
        }
        std::vector<NewsInstance> kept;
        kept.reserve(instances.size());
        for (std::size_t i = 0; i < instances.size(); ++i) {
            if (!drop[i]) kept.push_back(std::move(instances[i]));
        }
        instances = std::move(kept);
    }

    for (const auto& r : rejected) {
        spdlog::warn("rejected record (line {}, id '{}'): {}", r.line, r.id, r.reason);
    }
    return {Corpus(dim, std::move(instances)), std::move(rejected)};
}

LoadResult load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open corpus file '{}'", path.string()));
    return parse_corpus(in, options);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    out << json{{"type", "header"}, {"dim", corpus.dim()}}.dump() << '\n';
    for (const auto& inst : corpus.instances()) {
        json record;
        record["id"] = inst.id;
        if (inst.text) record["text"] = *inst.text;
        const auto values = inst.embedding.values();
        record["embedding"] = std::vector<double>(values.begin(), values.end());
        record["label"] = to_int(inst.label);
        record["timestamp"] = format_iso_date(inst.timestamp);
        out << record.dump() << '\n';
    }
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write corpus file '{}'", path.string()));
    write_corpus(out, corpus);
}

std::vector<std::size_t> undersample_balanced(const Corpus& corpus, int ordinal,
                                              std::uint64_t seed) {
    std::vector<std::size_t> fake;
    std::vector<std::size_t> real;
    for (auto idx : corpus.indices_in_quarter(ordinal)) {
        (corpus[idx].label == Label::kFake ? fake : real).push_back(idx);
    }
    if (fake.empty() || real.empty()) {
        spdlog::warn("quarter {} has {} fake / {} real instances; balanced subset is empty",
                     ordinal, fake.size(), real.size());
        return {};
    }

    // One stream per quarter, so the subset of a quarter does not depend on
    // which other quarters were sampled.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ordinal)));
    auto& larger = fake.size() > real.size() ? fake : real;
    const std::size_t keep = std::min(fake.size(), real.size());
    if (larger.size() > keep) {
        rng.shuffle(larger.begin(), larger.end());
        larger.resize(keep);
    }

    std::vector<std::size_t> out;
    out.reserve(2 * keep);
    out.insert(out.end(), fake.begin(), fake.end());
    out.insert(out.end(), real.begin(), real.end());
    std::sort(out.begin(), out.end());
    return out;
}

SplitSpec make_rolling_split(int target) {
    if (target < 3) {
        throw InputError(fmt::format("rolling split needs target quarter >= 3, got {}", target));
    }
    SplitSpec split;
    for (int q = 1; q <= target - 2; ++q) split.train_quarters.push_back(q);
    split.val_quarter = target - 1;
    split.test_quarter = target;
    return split;
}

SplitSpec make_rolling_split(const Corpus& corpus, int target) {
    if (target > corpus.num_quarters()) {
        throw InputError(fmt::format("target quarter {} beyond corpus range 1..{}", target,
                                     corpus.num_quarters()));
    }
    return make_rolling_split(target);
}

} // namespace ftt
