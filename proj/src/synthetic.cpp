#include "ftt/synthetic.hpp"

#include "ftt/errors.hpp"
#include "ftt/random.hpp"

#include <cmath>

#include <fmt/format.h>

namespace ftt {

std::string_view to_string(TopicPattern pattern) {
    switch (pattern) {
    case TopicPattern::kDecrease: return "decrease";
    case TopicPattern::kPeriodic: return "periodic";
    case TopicPattern::kStationary: return "stationary";
    case TopicPattern::kEmergent: return "emergent";
    }
    return "?";
}

TopicPattern parse_topic_pattern(std::string_view name) {
    for (auto p : {TopicPattern::kDecrease, TopicPattern::kPeriodic, TopicPattern::kStationary,
                   TopicPattern::kEmergent}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError(fmt::format("unknown topic pattern '{}'", name));
}

double intensity(const SynthTopic& topic, int ordinal, int quarter_of_year) {
    switch (topic.pattern) {
    case TopicPattern::kDecrease: return topic.base_rate - topic.amplitude * (ordinal - 1);
    case TopicPattern::kPeriodic:
        return topic.base_rate + (quarter_of_year == topic.peak_quarter ? topic.amplitude : 0.0);
    case TopicPattern::kStationary: return topic.base_rate;
    case TopicPattern::kEmergent:
        return ordinal < topic.onset ? 0.0 : topic.base_rate + topic.amplitude * (ordinal - topic.onset);
    }
    return 0.0;
}

namespace {

int quarter_of_year_at(const SynthSpec& spec, int ordinal) {
    return (spec.start_quarter - 1 + ordinal - 1) % 4 + 1;
}

int year_at(const SynthSpec& spec, int ordinal) {
    return spec.start_year + (spec.start_quarter - 1 + ordinal - 1) / 4;
}

} // namespace

void validate(const SynthSpec& spec) {
    if (spec.n_quarters < 1) throw ConfigError("synthetic spec: n_quarters must be >= 1");
    if (spec.start_quarter < 1 || spec.start_quarter > 4) {
        throw ConfigError("synthetic spec: start_quarter must be in 1..4");
    }
    if (spec.topics.empty()) throw ConfigError("synthetic spec: no topics");
    if (spec.dim == 0 || spec.vocab_per_topic == 0 || spec.cue_vocab == 0 || spec.tokens_per_item == 0) {
        throw ConfigError("synthetic spec: dim, vocabulary sizes and tokens_per_item must be positive");
    }
    if (spec.noise < 0.0 || spec.noise > 1.0 || (spec.noise > 0.0 && spec.background_vocab == 0)) {
        throw ConfigError("synthetic spec: noise must be in [0, 1] with a nonempty background vocabulary");
    }
    for (std::size_t t = 0; t < spec.topics.size(); ++t) {
        const auto& topic = spec.topics[t];
        if (topic.label_signal_strength < 0.0 || topic.label_signal_strength > 1.0 ||
            topic.fake_fraction < 0.0 || topic.fake_fraction > 1.0) {
            throw ConfigError(fmt::format("synthetic topic {}: probabilities must be in [0, 1]", t));
        }
        if (topic.polarity != 1 && topic.polarity != -1) {
            throw ConfigError(fmt::format("synthetic topic {}: polarity must be +1 or -1", t));
        }
        if (topic.peak_quarter < 1 || topic.peak_quarter > 4) {
            throw ConfigError(fmt::format("synthetic topic {}: peak_quarter must be in 1..4", t));
        }
        for (int q = 1; q <= spec.n_quarters; ++q) {
            const double rate = intensity(topic, q, quarter_of_year_at(spec, q));
            if (rate < 0.0 || !std::isfinite(rate)) {
                throw ConfigError(fmt::format(
                    "synthetic topic {} ({}): infeasible intensity {} at quarter {}", t,
                    to_string(topic.pattern), rate, q));
            }
        }
    }
}

Corpus generate_synthetic(const SynthSpec& spec) {
    validate(spec);
    std::vector<NewsInstance> instances;

    for (int q = 1; q <= spec.n_quarters; ++q) {
        const int qoy = quarter_of_year_at(spec, q);
        const int year = year_at(spec, q);
        for (std::size_t t = 0; t < spec.topics.size(); ++t) {
            const auto& topic = spec.topics[t];
            Rng rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(q)), t));
            const double rate = intensity(topic, q, qoy);
            const auto count = spec.poisson_counts ? rng.poisson(rate)
                                                   : static_cast<std::uint64_t>(std::llround(rate));

            for (std::uint64_t n = 0; n < count; ++n) {
                const bool fake = rng.bernoulli(topic.fake_fraction);
                std::string text;
                auto append = [&text](const std::string& word) {
                    if (!text.empty()) text.push_back(' ');
                    text += word;
                };
                for (std::size_t k = 0; k < spec.tokens_per_item; ++k) {
                    if (spec.noise > 0.0 && rng.bernoulli(spec.noise)) {
                        append(fmt::format("bg{}", rng.uniform_below(spec.background_vocab)));
                    } else {
                        append(fmt::format("t{}w{}", t, rng.uniform_below(spec.vocab_per_topic)));
                    }
                }
                for (std::size_t k = 0; k < spec.cue_tokens_per_item; ++k) {
                    // An agreeing cue names the family tied to the label under
                    // this topic's polarity; otherwise the family is a coin flip.
                    const bool agree = rng.bernoulli(topic.label_signal_strength);
                    const bool alpha = agree ? (fake == (topic.polarity > 0)) : rng.bernoulli(0.5);
                    append(fmt::format("{}{}", alpha ? "alpha" : "beta", rng.uniform_below(spec.cue_vocab)));
                }

                NewsInstance inst;
                inst.id = fmt::format("q{:02d}-t{}-{:04d}", q, t, n);
                inst.label = fake ? Label::kFake : Label::kReal;
                inst.timestamp = {year, 3 * (qoy - 1) + 1 + static_cast<int>(n % 3),
                                  1 + static_cast<int>((n * 7) % 28)};
                inst.embedding = hash_embed(text, spec.dim, spec.embed_seed);
                inst.text = std::move(text);
                instances.push_back(std::move(inst));
            }
        }
    }
    return Corpus(spec.dim, std::move(instances));
}

SynthSpec planted_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.embed_seed = 0;
    spec.topics = {
        // Fading topic, 100 items in the first quarter down to 5 in the last.
        {TopicPattern::kDecrease, 100.0, 5.0, 0.9, 2, 1, 1, 0.5},
        // Flat except for a strong second-quarter peak each year.
        {TopicPattern::kPeriodic, 10.0, 60.0, 0.9, 2, 1, -1, 0.5},
        {TopicPattern::kStationary, 30.0, 0.0, 0.9, 2, 1, 1, 0.5},
        // Appears in 2019Q1 and grows steadily.
        {TopicPattern::kEmergent, 10.0, 8.0, 0.9, 2, 13, -1, 0.5},
    };
    return spec;
}

} // namespace ftt
