#pragma once

#include "ftt/corpus_io.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace ftt {

enum class TopicPattern { kDecrease, kPeriodic, kStationary, kEmergent };

std::string_view to_string(TopicPattern pattern);
TopicPattern parse_topic_pattern(std::string_view name);

// Expected item count per quarter:
//   decrease    base - amplitude * (q - 1)
//   periodic    base + amplitude when quarter_of_year == peak_quarter, else base
//   stationary  base
//   emergent    0 before onset, then base + amplitude * (q - onset)
struct SynthTopic {
    TopicPattern pattern = TopicPattern::kStationary;
    double base_rate = 30.0;
    double amplitude = 0.0;
    double label_signal_strength = 0.9; // P(cue token agrees with the label)
    int peak_quarter = 2;
    int onset = 1;
    // +1: fake items carry the "alpha" cue family; -1: they carry "beta".
    int polarity = 1;
    double fake_fraction = 0.5;
};

struct SynthSpec {
    int n_quarters = 20;
    int start_year = 2016;
    int start_quarter = 1;
    std::vector<SynthTopic> topics;
    std::size_t dim = 768;
    std::size_t vocab_per_topic = 6;
    std::size_t background_vocab = 200;
    std::size_t cue_vocab = 8; // words per cue family
    std::size_t tokens_per_item = 16;
    std::size_t cue_tokens_per_item = 2;
    double noise = 0.1; // fraction of non-cue tokens drawn from the background vocabulary
    bool poisson_counts = true; // false: counts are round(intensity)
    std::uint64_t seed = 0;
    std::uint64_t embed_seed = 0;
};

/// Throws ConfigError for infeasible specs (negative intensities, bad ranges).
void validate(const SynthSpec& spec);

double intensity(const SynthTopic& topic, int ordinal, int quarter_of_year);

/// Deterministic under spec.seed. Instance ids encode ordinal, topic and
/// index ("q05-t2-0013"); texts are embedded with hash_embed.
Corpus generate_synthetic(const SynthSpec& spec);

/// The planted four-pattern corpus used by the acceptance suite: a fading
/// topic, a topic peaking every second quarter, a stationary topic and a topic
/// emerging late, over 2016Q1..2020Q4.
SynthSpec planted_spec(std::uint64_t seed);

} // namespace ftt
