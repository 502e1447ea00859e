#include "ftt/config.hpp"

#include "ftt/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include <fmt/format.h>

namespace ftt {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(fmt::format("{}: cannot parse '{}'", key, value));
    }
    return out;
}

template <>
double parse_number<double>(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: cannot parse '{}'", key, value));
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, value));
}

SynthTopic& synth_topic(PipelineConfig& config, const std::string& key, std::size_t index) {
    if (index > config.synth.topics.size()) {
        throw ConfigError(fmt::format("{}: topics must be numbered consecutively from 0", key));
    }
    if (index == config.synth.topics.size()) config.synth.topics.emplace_back();
    return config.synth.topics[index];
}

} // namespace

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
        }
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& value) {
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter, std::less<>> setters = {
        {"corpus.path", [&](const std::string& v) { c.corpus_path = v; }},
        {"corpus.dim", [&](const std::string& v) { c.dim = parse_number<std::size_t>(key, v); }},
        {"corpus.embed_seed", [&](const std::string& v) { c.embed_seed = parse_number<std::uint64_t>(key, v); }},
        {"seed", [&](const std::string& v) { c.seed = parse_number<std::uint64_t>(key, v); }},
        {"clustering.theta_sim", [&](const std::string& v) { c.clustering.theta_sim = parse_number<double>(key, v); }},
        {"trend.theta_count", [&](const std::string& v) { c.trend.theta_count = parse_number<int>(key, v); }},
        {"trend.n_changepoints", [&](const std::string& v) {
             if (v == "auto") c.trend.n_changepoints.reset();
             else c.trend.n_changepoints = parse_number<int>(key, v);
         }},
        {"trend.ridge_lambda_delta", [&](const std::string& v) { c.trend.ridge_lambda_delta = parse_number<double>(key, v); }},
        {"trend.ridge_lambda_beta", [&](const std::string& v) { c.trend.ridge_lambda_beta = parse_number<double>(key, v); }},
        {"trend.changepoint_range", [&](const std::string& v) { c.trend.changepoint_range = parse_number<double>(key, v); }},
        {"reweight.strategy", [&](const std::string& v) { c.reweight.strategy = parse_strategy(v); }},
        {"reweight.theta_mape", [&](const std::string& v) { c.reweight.theta_mape = parse_number<double>(key, v); }},
        {"reweight.theta_lower", [&](const std::string& v) { c.reweight.theta_lower = parse_number<double>(key, v); }},
        {"reweight.theta_upper", [&](const std::string& v) { c.reweight.theta_upper = parse_number<double>(key, v); }},
        {"reweight.heuristic_boost", [&](const std::string& v) { c.reweight.heuristic_boost = parse_number<double>(key, v); }},
        {"reweight.ratio_mode", [&](const std::string& v) { c.reweight.ratio_mode = parse_ratio_mode(v); }},
        {"reweight.history", [&](const std::string& v) { c.reweight.history = parse_history_window(v); }},
        {"train.learning_rate", [&](const std::string& v) { c.train.learning_rate = parse_number<double>(key, v); }},
        {"train.batch_size", [&](const std::string& v) { c.train.batch_size = parse_number<std::size_t>(key, v); }},
        {"train.max_epochs", [&](const std::string& v) { c.train.max_epochs = parse_number<int>(key, v); }},
        {"train.patience", [&](const std::string& v) { c.train.patience = parse_number<int>(key, v); }},
        {"train.hidden", [&](const std::string& v) { c.train.hidden = parse_number<std::size_t>(key, v); }},
        {"experiment.strategies", [&](const std::string& v) {
             c.strategies.clear();
             for (const auto& s : split_list(v)) c.strategies.push_back(parse_strategy(s));
         }},
        {"experiment.targets", [&](const std::string& v) {
             c.targets.clear();
             for (const auto& s : split_list(v)) c.targets.push_back(parse_number<int>(key, s));
         }},
        {"experiment.seeds", [&](const std::string& v) {
             c.seeds.clear();
             for (const auto& s : split_list(v)) c.seeds.push_back(parse_number<std::uint64_t>(key, s));
         }},
        {"experiment.breakdown", [&](const std::string& v) { c.breakdown = parse_bool(key, v); }},
        {"synth.n_quarters", [&](const std::string& v) { c.synth.n_quarters = parse_number<int>(key, v); }},
        {"synth.start_year", [&](const std::string& v) { c.synth.start_year = parse_number<int>(key, v); }},
        {"synth.start_quarter", [&](const std::string& v) { c.synth.start_quarter = parse_number<int>(key, v); }},
        {"synth.dim", [&](const std::string& v) { c.synth.dim = parse_number<std::size_t>(key, v); }},
        {"synth.vocab_per_topic", [&](const std::string& v) { c.synth.vocab_per_topic = parse_number<std::size_t>(key, v); }},
        {"synth.background_vocab", [&](const std::string& v) { c.synth.background_vocab = parse_number<std::size_t>(key, v); }},
        {"synth.cue_vocab", [&](const std::string& v) { c.synth.cue_vocab = parse_number<std::size_t>(key, v); }},
        {"synth.tokens_per_item", [&](const std::string& v) { c.synth.tokens_per_item = parse_number<std::size_t>(key, v); }},
        {"synth.cue_tokens_per_item", [&](const std::string& v) { c.synth.cue_tokens_per_item = parse_number<std::size_t>(key, v); }},
        {"synth.noise", [&](const std::string& v) { c.synth.noise = parse_number<double>(key, v); }},
        {"synth.poisson_counts", [&](const std::string& v) { c.synth.poisson_counts = parse_bool(key, v); }},
        {"synth.seed", [&](const std::string& v) { c.synth.seed = parse_number<std::uint64_t>(key, v); }},
        {"synth.embed_seed", [&](const std::string& v) { c.synth.embed_seed = parse_number<std::uint64_t>(key, v); }},
        {"synth.topics", [&](const std::string& v) {
             if (v == "planted") c.synth.topics = planted_spec(0).topics;
             else if (v == "none") c.synth.topics.clear();
             else throw ConfigError(fmt::format("{}: expected 'planted' or 'none'", key));
         }},
    };

    if (const auto it = setters.find(key); it != setters.end()) {
        it->second(value);
        return;
    }

    // synth.topic.<n>.<field>
    constexpr std::string_view prefix = "synth.topic.";
    if (key.starts_with(prefix)) {
        const auto rest = key.substr(prefix.size());
        const auto dot = rest.find('.');
        if (dot != std::string::npos) {
            auto& topic = synth_topic(c, key, parse_number<std::size_t>(key, rest.substr(0, dot)));
            const auto field = rest.substr(dot + 1);
            if (field == "pattern") topic.pattern = parse_topic_pattern(value);
            else if (field == "base_rate") topic.base_rate = parse_number<double>(key, value);
            else if (field == "amplitude") topic.amplitude = parse_number<double>(key, value);
            else if (field == "signal") topic.label_signal_strength = parse_number<double>(key, value);
            else if (field == "peak_quarter") topic.peak_quarter = parse_number<int>(key, value);
            else if (field == "onset") topic.onset = parse_number<int>(key, value);
            else if (field == "polarity") topic.polarity = parse_number<int>(key, value);
            else if (field == "fake_fraction") topic.fake_fraction = parse_number<double>(key, value);
            else throw ConfigError(fmt::format("unknown config key '{}'", key));
            return;
        }
    }
    throw ConfigError(fmt::format("unknown config key '{}'", key));
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    PipelineConfig config;
    for (const auto& [key, value] : parse_key_values(in)) apply_setting(config, key, value);
    return config;
}

void validate(const PipelineConfig& config) {
    validate(config.clustering);
    validate(config.trend);
    validate(config.reweight);
    validate(config.train);
    validate(config.synth);
    if (config.strategies.empty()) throw ConfigError("experiment.strategies is empty");
    if (config.seeds.empty()) throw ConfigError("experiment.seeds is empty");
}

} // namespace ftt
