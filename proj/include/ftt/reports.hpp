#pragma once

#include "ftt/corpus_io.hpp"
#include "ftt/evaluation.hpp"
#include "ftt/reweighter.hpp"
#include "ftt/topic_clustering.hpp"
#include "ftt/trend_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ftt {

// Context written into the header of cluster files so later stages know which
// rolling split the clusters belong to.
struct ClusterFileHeader {
    int target = 0;
    int train_quarters = 0;
    int start_quarter_of_year = 1;
    double theta_sim = 0.0;
    std::uint64_t seed = 0;
};

/// Summary dump: one JSON line per topic {topic_id, size, counts_by_quarter,
/// sample_member_ids}, after a header line.
void write_cluster_dump(const std::filesystem::path& path, const ClusterFileHeader& header,
                        const std::vector<TopicCluster>& clusters, std::size_t sample_size = 5);

/// Full clustering state (centroids and all member ids), readable back.
void write_cluster_state(const std::filesystem::path& path, const ClusterFileHeader& header,
                         const std::vector<TopicCluster>& clusters);
std::pair<ClusterFileHeader, std::vector<TopicCluster>>
read_cluster_state(const std::filesystem::path& path);

/// One row per retained topic: parameters, MAPE, forecast, and the actual and
/// fitted series joined with ';'. Topics whose fit failed keep a row with an
/// "excluded" status.
void write_trend_report(const std::filesystem::path& path, const TopicModel& model);

struct TrendReportRow {
    int topic_id = 0;
    bool ok = false;
    double mape = 0.0;
    double forecast = 0.0;
};
std::vector<TrendReportRow> read_trend_report(const std::filesystem::path& path);

/// Long-form plot data: topic_id, ordinal, year, quarter, kind, actual, fitted.
/// History rows cover the training window; one forecast row per fitted topic.
void write_plot_data(const std::filesystem::path& path, const Corpus& corpus, const TopicModel& model);

void write_weights(const std::filesystem::path& path, const std::vector<WeightAssignment>& weights);
std::vector<WeightAssignment> read_weights(const std::filesystem::path& path);

void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
std::string format_report_table(const EvalReport& report);

} // namespace ftt
