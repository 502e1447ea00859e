#pragma once

#include "ftt/corpus_io.hpp"
#include "ftt/embedder.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ftt {

struct ClusteringConfig {
    double theta_sim = 0.65; // join only when similarity is strictly greater
};

/// Throws ConfigError unless theta_sim is in (0, 1].
void validate(const ClusteringConfig& config);

struct TopicCluster {
    int topic_id = 0; // creation order
    std::vector<double> centroid; // arithmetic mean of raw member embeddings
    std::vector<std::string> member_ids; // in assignment order
    std::map<int, int> counts_by_quarter; // ordinal -> members

    std::size_t size() const noexcept { return member_ids.size(); }
};

struct ClusterAssignment {
    int topic_id = 0;
    bool founded = false;
    // Similarity to the chosen centroid before the update; for a founder, the
    // best similarity seen (or -1 when there were no clusters yet).
    double similarity = -1.0;
};

// Sequential single-pass clustering state. Each added item joins the cluster
// whose current centroid is most cosine-similar, if that similarity exceeds
// theta_sim (ties go to the lowest topic id); otherwise it founds a new
// cluster. Centroids are running means of raw member embeddings.
class SinglePassClusterer {
public:
    explicit SinglePassClusterer(ClusteringConfig config);
    /// Warm start from previously built clusters; their centroids keep
    /// updating as new items join.
    SinglePassClusterer(ClusteringConfig config, std::vector<TopicCluster> clusters);

    ClusterAssignment add(std::string_view id, const EmbeddingVector& embedding, int ordinal);

    const std::vector<TopicCluster>& clusters() const noexcept { return clusters_; }
    std::vector<TopicCluster> release() && { return std::move(clusters_); }

private:
    ClusteringConfig config_;
    std::vector<TopicCluster> clusters_;
    std::vector<std::vector<double>> sums_;
    std::vector<double> centroid_norms_;
};

/// Clusters instances in the given order. Throws EmbeddingError naming the
/// first instance with a zero-norm embedding or a mismatched dimension.
std::vector<TopicCluster> single_pass_cluster(std::span<const NewsInstance* const> instances,
                                              const ClusteringConfig& config);

/// Convenience overload over corpus indices (corpus order is (timestamp, id)).
std::vector<TopicCluster> single_pass_cluster(const Corpus& corpus,
                                              std::span<const std::size_t> indices,
                                              const ClusteringConfig& config);

struct TopicTag {
    bool existing = false;
    int topic_id = 0; // id in the warm-started clustering (new topics get fresh ids)
};

/// Replays the single-pass rule on held-out instances, warm-started from the
/// trained clusters. Items joining a pre-existing cluster are tagged
/// existing; items founding or joining a cluster created during this pass are
/// tagged new.
std::vector<TopicTag> assign_to_existing(std::span<const NewsInstance* const> instances,
                                         const std::vector<TopicCluster>& trained,
                                         const ClusteringConfig& config);

/// instance id -> topic id over every member of the clusters.
std::map<std::string, int, std::less<>> membership_map(const std::vector<TopicCluster>& clusters);

} // namespace ftt
