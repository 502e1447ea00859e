#pragma once

#include "ftt/corpus_io.hpp"

#include <cstddef>
#include <span>

namespace ftt {

// Fake is the positive class.
struct ConfusionCounts {
    std::size_t tp = 0; // fake predicted fake
    std::size_t fn = 0; // fake predicted real
    std::size_t tn = 0; // real predicted real
    std::size_t fp = 0; // real predicted fake
};

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double f1_fake = 0.0;
    double f1_real = 0.0;
};

ConfusionCounts confusion(std::span<const Label> labels, std::span<const Label> predictions);

/// F1 with a zero denominator is reported as 0.
Metrics metrics_from_confusion(const ConfusionCounts& counts);

/// Throws InputError on length mismatch or empty input.
Metrics compute_metrics(std::span<const Label> labels, std::span<const Label> predictions);

} // namespace ftt
