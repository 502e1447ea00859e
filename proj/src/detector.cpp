#include "ftt/detector.hpp"

#include "ftt/errors.hpp"
#include "ftt/metrics.hpp"
#include "ftt/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

namespace ftt {

using nlohmann::json;

namespace {

constexpr double kLogFloor = 1e-12;
const double kLogFloorLn = std::log(kLogFloor);

// log(sigmoid(z)) without overflow.
double log_sigmoid(double z) {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Hidden activations for one input. Zero inputs are skipped, which makes
// hashed (sparse) embeddings cheap without a separate sparse type.
void hidden_layer(const ClassifierParams& p, std::span<const double> x, std::vector<double>& a) {
    a.assign(p.b1.begin(), p.b1.end());
    const std::size_t h = p.hidden;
    for (std::size_t i = 0; i < p.input_dim; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = p.w1.data() + i * h;
        for (std::size_t j = 0; j < h; ++j) a[j] += xi * row[j];
    }
    for (auto& v : a) v = std::tanh(v);
}

double output_logit(const ClassifierParams& p, const std::vector<double>& a) {
    return std::inner_product(a.begin(), a.end(), p.w2.begin(), p.b2);
}

void check_batch(const ClassifierParams& params, std::span<const Example> batch) {
    if (batch.empty()) throw InputError("weighted loss: empty batch");
    for (const auto& ex : batch) {
        if (!(ex.weight > 0.0)) throw InputError(fmt::format("weighted loss: nonpositive weight {}", ex.weight));
        if (ex.embedding.size() != params.input_dim) {
            throw InputError(fmt::format("weighted loss: embedding dimension {} != {}",
                                         ex.embedding.size(), params.input_dim));
        }
    }
}

// Floored cross-entropy of one item from its logit.
double item_cross_entropy(double z, Label label) {
    const double log_p = label == Label::kFake ? log_sigmoid(z) : log_sigmoid(-z);
    return -std::max(log_p, kLogFloorLn);
}

} // namespace

ClassifierParams ClassifierParams::zeros(std::size_t input_dim, std::size_t hidden) {
    ClassifierParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.w1.assign(input_dim * hidden, 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(hidden, 0.0);
    return p;
}

ClassifierParams ClassifierParams::initialized(std::size_t input_dim, std::size_t hidden,
                                               std::uint64_t seed) {
    auto p = zeros(input_dim, hidden);
    Rng rng(seed);
    const double limit1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
    for (auto& w : p.w1) w = (2.0 * rng.uniform01() - 1.0) * limit1;
    const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (auto& w : p.w2) w = (2.0 * rng.uniform01() - 1.0) * limit2;
    return p;
}

bool ClassifierParams::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(w1) && finite(b1) && finite(w2) && std::isfinite(b2);
}

double predict(const ClassifierParams& params, std::span<const double> embedding) {
    if (embedding.size() != params.input_dim) {
        throw InputError(fmt::format("predict: embedding dimension {} != {}", embedding.size(),
                                     params.input_dim));
    }
    std::vector<double> a;
    hidden_layer(params, embedding, a);
    return sigmoid(output_logit(params, a));
}

double weighted_loss(const ClassifierParams& params, std::span<const Example> batch) {
    check_batch(params, batch);
    std::vector<double> a;
    double total = 0.0;
    for (const auto& ex : batch) {
        hidden_layer(params, ex.embedding, a);
        total += ex.weight * item_cross_entropy(output_logit(params, a), ex.label);
    }
    return total / static_cast<double>(batch.size());
}

double weighted_loss_and_gradient(const ClassifierParams& params, std::span<const Example> batch,
                                  ClassifierParams& grad) {
    check_batch(params, batch);
    if (grad.input_dim != params.input_dim || grad.hidden != params.hidden) {
        grad = ClassifierParams::zeros(params.input_dim, params.hidden);
    } else {
        std::fill(grad.w1.begin(), grad.w1.end(), 0.0);
        std::fill(grad.b1.begin(), grad.b1.end(), 0.0);
        std::fill(grad.w2.begin(), grad.w2.end(), 0.0);
        grad.b2 = 0.0;
    }

    const std::size_t h = params.hidden;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<double> a;
    std::vector<double> dz1(h);
    double total = 0.0;
    for (const auto& ex : batch) {
        hidden_layer(params, ex.embedding, a);
        const double z = output_logit(params, a);
        total += ex.weight * item_cross_entropy(z, ex.label);

        // d/dz of the floored loss; zero where the floor is active.
        const bool fake = ex.label == Label::kFake;
        const double log_p = fake ? log_sigmoid(z) : log_sigmoid(-z);
        if (log_p < kLogFloorLn) continue;
        const double dz2 = ex.weight * inv_n * (sigmoid(z) - (fake ? 1.0 : 0.0));

        grad.b2 += dz2;
        for (std::size_t j = 0; j < h; ++j) {
            grad.w2[j] += dz2 * a[j];
            dz1[j] = dz2 * params.w2[j] * (1.0 - a[j] * a[j]);
            grad.b1[j] += dz1[j];
        }
        for (std::size_t i = 0; i < params.input_dim; ++i) {
            const double xi = ex.embedding[i];
            if (xi == 0.0) continue;
            double* row = grad.w1.data() + i * h;
            for (std::size_t j = 0; j < h; ++j) row[j] += xi * dz1[j];
        }
    }
    return total * inv_n;
}

void validate(const TrainConfig& config) {
    if (!(config.learning_rate > 0.0) || config.batch_size == 0 || config.max_epochs <= 0 ||
        config.patience <= 0 || config.hidden == 0) {
        throw ConfigError("train config: learning rate, batch size, epochs, patience and hidden size must be positive");
    }
}

std::vector<Label> predict_labels(const ClassifierParams& params, std::span<const Example> examples) {
    std::vector<Label> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        out.push_back(predict(params, ex.embedding) >= 0.5 ? Label::kFake : Label::kReal);
    }
    return out;
}

namespace {

class Adam {
public:
    Adam(const ClassifierParams& shape, const TrainConfig& config)
        : config_(config), m_(ClassifierParams::zeros(shape.input_dim, shape.hidden)),
          v_(m_) {}

    void step(ClassifierParams& p, const ClassifierParams& g) {
        ++t_;
        const double c1 = 1.0 - std::pow(config_.beta1, t_);
        const double c2 = 1.0 - std::pow(config_.beta2, t_);
        update(p.w1, g.w1, m_.w1, v_.w1, c1, c2);
        update(p.b1, g.b1, m_.b1, v_.b1, c1, c2);
        update(p.w2, g.w2, m_.w2, v_.w2, c1, c2);
        update_one(p.b2, g.b2, m_.b2, v_.b2, c1, c2);
    }

private:
    void update_one(double& p, double g, double& m, double& v, double c1, double c2) const {
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
        p -= config_.learning_rate * (m / c1) / (std::sqrt(v / c2) + config_.epsilon);
    }

    void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                std::vector<double>& v, double c1, double c2) const {
        for (std::size_t i = 0; i < p.size(); ++i) update_one(p[i], g[i], m[i], v[i], c1, c2);
    }

    TrainConfig config_;
    ClassifierParams m_;
    ClassifierParams v_;
    int t_ = 0;
};

} // namespace

TrainResult train(std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& config, const BatchObserver& observer) {
    validate(config);
    if (train_set.empty() || val_set.empty()) {
        throw TrainingError(fmt::format("train: need nonempty train and validation sets ({} / {})",
                                        train_set.size(), val_set.size()));
    }
    const std::size_t dim = train_set.front().embedding.size();

    TrainResult result;
    auto params = ClassifierParams::initialized(dim, config.hidden, derive_seed(config.seed, "init"));
    Rng shuffler(derive_seed(config.seed, "shuffle"));
    Adam adam(params, config);
    ClassifierParams grad = ClassifierParams::zeros(dim, config.hidden);

    std::vector<Label> val_labels;
    for (const auto& ex : val_set) val_labels.push_back(ex.label);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Example> batch;
    result.best_val_macro_f1 = -1.0;
    int stale = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffler.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> members(order.data() + start, end - start);
            if (observer) observer(members);
            batch.clear();
            for (auto i : members) batch.push_back(train_set[i]);

            const double loss = weighted_loss_and_gradient(params, batch, grad);
            if (!std::isfinite(loss)) {
                throw TrainingError(fmt::format("loss diverged at epoch {} (value {})", epoch, loss));
            }
            loss_sum += loss * static_cast<double>(batch.size());
            adam.step(params, grad);
        }
        if (!params.all_finite()) {
            throw TrainingError(fmt::format("parameters became non-finite at epoch {}", epoch));
        }

        const auto preds = predict_labels(params, val_set);
        const double val_f1 = compute_metrics(val_labels, preds).macro_f1;
        result.log.push_back({epoch, loss_sum / static_cast<double>(order.size()), val_f1});

        if (val_f1 > result.best_val_macro_f1) {
            result.best_val_macro_f1 = val_f1;
            result.best_epoch = epoch;
            result.params = params;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    return result;
}

std::vector<Example> make_examples(const Corpus& corpus, std::span<const std::size_t> indices,
                                   const std::vector<WeightAssignment>* weights) {
    std::unordered_map<std::string_view, double> by_id;
    if (weights) {
        for (const auto& w : *weights) by_id.emplace(w.instance_id, w.weight);
    }
    std::vector<Example> out;
    out.reserve(indices.size());
    for (auto i : indices) {
        const auto& inst = corpus[i];
        double weight = 1.0;
        if (weights) {
            const auto it = by_id.find(inst.id);
            if (it == by_id.end()) {
                throw InputError(fmt::format("no training weight for instance '{}'", inst.id));
            }
            weight = it->second;
        }
        out.push_back({inst.embedding.values(), inst.label, weight, inst.ordinal});
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const ClassifierParams& params,
                     const TrainConfig& config) {
    json j;
    j["format"] = "ftt-mlp";
    j["version"] = 1;
    j["input_dim"] = params.input_dim;
    j["hidden"] = params.hidden;
    j["activation"] = "tanh";
    j["w1"] = params.w1;
    j["b1"] = params.b1;
    j["w2"] = params.w2;
    j["b2"] = params.b2;
    j["config"] = {{"learning_rate", config.learning_rate}, {"batch_size", config.batch_size},
                   {"max_epochs", config.max_epochs},       {"patience", config.patience},
                   {"beta1", config.beta1},                 {"beta2", config.beta2},
                   {"epsilon", config.epsilon}};
    j["seed"] = config.seed;
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write checkpoint '{}'", path.string()));
    out << j.dump() << '\n';
}

ClassifierParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open checkpoint '{}'", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(fmt::format("checkpoint '{}': {}", path.string(), e.what()));
    }
    if (j.value("format", "") != "ftt-mlp" || j.value("version", 0) != 1) {
        throw InputError(fmt::format("checkpoint '{}': unsupported format", path.string()));
    }
    ClassifierParams p;
    p.input_dim = j.at("input_dim").get<std::size_t>();
    p.hidden = j.at("hidden").get<std::size_t>();
    p.w1 = j.at("w1").get<std::vector<double>>();
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.w2 = j.at("w2").get<std::vector<double>>();
    p.b2 = j.at("b2").get<double>();
    if (p.w1.size() != p.input_dim * p.hidden || p.b1.size() != p.hidden || p.w2.size() != p.hidden) {
        throw InputError(fmt::format("checkpoint '{}': parameter shapes do not match", path.string()));
    }
    return p;
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write training log '{}'", path.string()));
    out << "epoch,train_loss,val_macf1\n";
    for (const auto& e : log) out << fmt::format("{},{:.17g},{:.17g}\n", e.epoch, e.train_loss, e.val_macro_f1);
}

} // namespace ftt
