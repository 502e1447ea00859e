#include "ftt/topic_clustering.hpp"

#include "ftt/errors.hpp"

#include <fmt/format.h>

namespace ftt {

void validate(const ClusteringConfig& config) {
    if (!(config.theta_sim > 0.0 && config.theta_sim <= 1.0)) {
        throw ConfigError(fmt::format("theta_sim must be in (0, 1], got {}", config.theta_sim));
    }
}

SinglePassClusterer::SinglePassClusterer(ClusteringConfig config) : config_(config) {
    validate(config_);
}

SinglePassClusterer::SinglePassClusterer(ClusteringConfig config, std::vector<TopicCluster> clusters)
    : config_(config), clusters_(std::move(clusters)) {
    validate(config_);
    for (const auto& c : clusters_) {
        const auto n = static_cast<double>(c.size());
        std::vector<double> sum(c.centroid.size());
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = c.centroid[i] * n;
        sums_.push_back(std::move(sum));
        centroid_norms_.push_back(l2_norm(c.centroid));
    }
}

ClusterAssignment SinglePassClusterer::add(std::string_view id, const EmbeddingVector& embedding,
                                           int ordinal) {
    if (!(embedding.norm() > 0.0)) {
        throw EmbeddingError(fmt::format("instance '{}' has a zero-norm embedding", id));
    }
    if (!clusters_.empty() && embedding.dim() != clusters_.front().centroid.size()) {
        throw EmbeddingError(fmt::format("instance '{}': embedding dimension {} != {}", id,
                                         embedding.dim(), clusters_.front().centroid.size()));
    }

    int best = -1;
    double best_sim = -1.0;
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
        if (!(centroid_norms_[c] > 0.0)) continue; // members cancelled out exactly
        const double sim = cosine_similarity(embedding.values(), embedding.norm(),
                                             clusters_[c].centroid, centroid_norms_[c]);
        if (best < 0 || sim > best_sim) {
            best = static_cast<int>(c);
            best_sim = sim;
        }
    }

    if (best >= 0 && best_sim > config_.theta_sim) {
        auto& cluster = clusters_[best];
        auto& sum = sums_[best];
        const auto values = embedding.values();
        cluster.member_ids.emplace_back(id);
        cluster.counts_by_quarter[ordinal] += 1;
        const auto n = static_cast<double>(cluster.size());
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += values[i];
            cluster.centroid[i] = sum[i] / n;
        }
        centroid_norms_[best] = l2_norm(cluster.centroid);
        return {cluster.topic_id, false, best_sim};
    }

    TopicCluster cluster;
    cluster.topic_id = clusters_.empty() ? 0 : clusters_.back().topic_id + 1;
    const auto values = embedding.values();
    cluster.centroid.assign(values.begin(), values.end());
    cluster.member_ids.emplace_back(id);
    cluster.counts_by_quarter[ordinal] = 1;
    sums_.push_back(cluster.centroid);
    centroid_norms_.push_back(embedding.norm());
    clusters_.push_back(std::move(cluster));
    return {clusters_.back().topic_id, true, best_sim};
}

std::vector<TopicCluster> single_pass_cluster(std::span<const NewsInstance* const> instances,
                                              const ClusteringConfig& config) {
    SinglePassClusterer clusterer(config);
    for (const auto* inst : instances) clusterer.add(inst->id, inst->embedding, inst->ordinal);
    return std::move(clusterer).release();
}

std::vector<TopicCluster> single_pass_cluster(const Corpus& corpus,
                                              std::span<const std::size_t> indices,
                                              const ClusteringConfig& config) {
    std::vector<const NewsInstance*> items;
    items.reserve(indices.size());
    for (auto i : indices) items.push_back(&corpus[i]);
    return single_pass_cluster(items, config);
}

std::vector<TopicTag> assign_to_existing(std::span<const NewsInstance* const> instances,
                                         const std::vector<TopicCluster>& trained,
                                         const ClusteringConfig& config) {
    if (trained.empty()) throw InputError("assign_to_existing needs at least one trained cluster");
    const int last_trained_id = trained.back().topic_id;
    SinglePassClusterer clusterer(config, trained);
    std::vector<TopicTag> tags;
    tags.reserve(instances.size());
    for (const auto* inst : instances) {
        const auto a = clusterer.add(inst->id, inst->embedding, inst->ordinal);
        tags.push_back({a.topic_id <= last_trained_id, a.topic_id});
    }
    return tags;
}

std::map<std::string, int, std::less<>> membership_map(const std::vector<TopicCluster>& clusters) {
    std::map<std::string, int, std::less<>> out;
    for (const auto& c : clusters) {
        for (const auto& id : c.member_ids) out.emplace(id, c.topic_id);
    }
    return out;
}

} // namespace ftt
