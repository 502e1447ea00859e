#pragma once

#include "ftt/corpus_io.hpp"
#include "ftt/reweighter.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace ftt {

// Two-layer classifier over a fixed embedding:
//   p = sigmoid(w2 . tanh(W1 x + b1) + b2)
struct ClassifierParams {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    std::vector<double> w1; // input_dim x hidden: row i maps input i to every hidden unit
    std::vector<double> b1; // hidden
    std::vector<double> w2; // hidden
    double b2 = 0.0;

    static ClassifierParams zeros(std::size_t input_dim, std::size_t hidden);
    /// Glorot-uniform weights, zero biases, drawn from `seed`.
    static ClassifierParams initialized(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

    bool all_finite() const;
    bool operator==(const ClassifierParams&) const = default;
};

/// Probability of the fake class. Throws InputError on dimension mismatch.
double predict(const ClassifierParams& params, std::span<const double> embedding);
inline double predict(const ClassifierParams& params, const EmbeddingVector& embedding) {
    return predict(params, embedding.values());
}

struct Example {
    std::span<const double> embedding;
    Label label = Label::kReal;
    double weight = 1.0;
    int ordinal = 0; // provenance, for split hygiene checks
};

/// -(1/N) sum w_i [y_i log p_i + (1-y_i) log(1-p_i)], log arguments floored at
/// 1e-12. Throws InputError for an empty batch or a nonpositive weight.
double weighted_loss(const ClassifierParams& params, std::span<const Example> batch);

/// Loss plus its exact gradient (same shape as params) accumulated into `grad`.
double weighted_loss_and_gradient(const ClassifierParams& params, std::span<const Example> batch,
                                  ClassifierParams& grad);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    int max_epochs = 100;
    int patience = 5;
    std::uint64_t seed = 0;
    std::size_t hidden = 128;
    // Adam moment decay and stabilizer, at their customary defaults.
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void validate(const TrainConfig& config);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
};

struct TrainResult {
    ClassifierParams params; // best validation macro-F1
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_macro_f1 = 0.0;
};

/// Called once per mini-batch with the indices (into the training span) of its
/// members.
using BatchObserver = std::function<void(std::span<const std::size_t>)>;

/// Seeded mini-batch Adam on the weighted loss with early stopping on
/// validation macro-F1 (threshold 0.5). Throws TrainingError if the loss or
/// parameters become non-finite.
TrainResult train(std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& config, const BatchObserver& observer = {});

/// Builds examples for corpus indices. With `weights`, every instance must
/// have an entry (looked up by id); without, all weights are 1.
std::vector<Example> make_examples(const Corpus& corpus, std::span<const std::size_t> indices,
                                   const std::vector<WeightAssignment>* weights = nullptr);

std::vector<Label> predict_labels(const ClassifierParams& params, std::span<const Example> examples);

void save_checkpoint(const std::filesystem::path& path, const ClassifierParams& params,
                     const TrainConfig& config);
ClassifierParams load_checkpoint(const std::filesystem::path& path);

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

} // namespace ftt
