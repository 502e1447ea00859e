#include "ftt/metrics.hpp"

#include "ftt/errors.hpp"

#include <fmt/format.h>

namespace ftt {

ConfusionCounts confusion(std::span<const Label> labels, std::span<const Label> predictions) {
    if (labels.size() != predictions.size()) {
        throw InputError(fmt::format("metrics: {} labels vs {} predictions", labels.size(),
                                     predictions.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool fake = labels[i] == Label::kFake;
        const bool said_fake = predictions[i] == Label::kFake;
        if (fake) {
            said_fake ? ++c.tp : ++c.fn;
        } else {
            said_fake ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

} // namespace

Metrics metrics_from_confusion(const ConfusionCounts& c) {
    Metrics m;
    const std::size_t total = c.tp + c.fn + c.tn + c.fp;
    m.accuracy = total == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    m.f1_fake = f1(c.tp, c.fp, c.fn);
    m.f1_real = f1(c.tn, c.fn, c.fp);
    m.macro_f1 = (m.f1_fake + m.f1_real) / 2.0;
    return m;
}

Metrics compute_metrics(std::span<const Label> labels, std::span<const Label> predictions) {
    if (labels.empty()) throw InputError("metrics: empty input");
    return metrics_from_confusion(confusion(labels, predictions));
}

} // namespace ftt
