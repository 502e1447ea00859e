#pragma once

#include "ftt/evaluation.hpp"
#include "ftt/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <string>

namespace ftt {

// Everything a CLI run needs. Loaded from a flat "dotted.key = value" file;
// command-line flags are applied on top.
struct PipelineConfig {
    std::filesystem::path corpus_path;
    std::size_t dim = 768;
    std::uint64_t embed_seed = 0;
    std::uint64_t seed = 0;

    ClusteringConfig clustering;
    TrendConfig trend;
    ReweightConfig reweight;
    TrainConfig train;
    SynthSpec synth = planted_spec(0);

    std::vector<Strategy> strategies{Strategy::kUniform, Strategy::kFtt};
    std::vector<int> targets; // empty: the last four quarters of the corpus
    std::vector<std::uint64_t> seeds{0};
    bool breakdown = true;
};

/// Parses `key = value` lines in file order; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);

/// Applies one setting. Throws ConfigError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

PipelineConfig load_config(const std::filesystem::path& path);

/// Checks every sub-config's invariants.
void validate(const PipelineConfig& config);

std::vector<std::string> split_list(const std::string& text);

} // namespace ftt
