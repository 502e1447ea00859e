#include "ftt/reports.hpp"

#include "ftt/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ftt {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    return in;
}

// Shortest text that reads back to the same double.
std::string num(double v) { return fmt::format("{:.17g}", v); }

template <typename T>
std::string join(const std::vector<T>& values, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(sep);
        if constexpr (std::is_floating_point_v<T>) {
            out += num(values[i]);
        } else {
            out += fmt::format("{}", values[i]);
        }
    }
    return out;
}

json header_json(const ClusterFileHeader& h) {
    return {{"type", "header"},
            {"target", h.target},
            {"train_quarters", h.train_quarters},
            {"start_quarter_of_year", h.start_quarter_of_year},
            {"theta_sim", h.theta_sim},
            {"seed", h.seed}};
}

json counts_json(const std::map<int, int>& counts) {
    json j = json::object();
    for (const auto& [q, n] : counts) j[std::to_string(q)] = n;
    return j;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw InputError(fmt::format("bad number '{}'", s));
    return v;
}

} // namespace

void write_cluster_dump(const std::filesystem::path& path, const ClusterFileHeader& header,
                        const std::vector<TopicCluster>& clusters, std::size_t sample_size) {
    auto out = open_out(path);
    out << header_json(header).dump() << '\n';
    for (const auto& c : clusters) {
        const std::size_t n = std::min(sample_size, c.member_ids.size());
        json j;
        j["topic_id"] = c.topic_id;
        j["size"] = c.size();
        j["counts_by_quarter"] = counts_json(c.counts_by_quarter);
        j["sample_member_ids"] = std::vector<std::string>(c.member_ids.begin(), c.member_ids.begin() + n);
        out << j.dump() << '\n';
    }
}

void write_cluster_state(const std::filesystem::path& path, const ClusterFileHeader& header,
                         const std::vector<TopicCluster>& clusters) {
    auto out = open_out(path);
    out << header_json(header).dump() << '\n';
    for (const auto& c : clusters) {
        json j;
        j["topic_id"] = c.topic_id;
        j["centroid"] = c.centroid;
        j["member_ids"] = c.member_ids;
        j["counts_by_quarter"] = counts_json(c.counts_by_quarter);
        out << j.dump() << '\n';
    }
}

std::pair<ClusterFileHeader, std::vector<TopicCluster>>
read_cluster_state(const std::filesystem::path& path) {
    auto in = open_in(path);
    ClusterFileHeader header;
    std::vector<TopicCluster> clusters;
    std::string line;
    bool seen_header = false;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = json::parse(line);
            if (j.value("type", "") == "header") {
                header.target = j.at("target").get<int>();
                header.train_quarters = j.at("train_quarters").get<int>();
                header.start_quarter_of_year = j.at("start_quarter_of_year").get<int>();
                header.theta_sim = j.at("theta_sim").get<double>();
                header.seed = j.at("seed").get<std::uint64_t>();
                seen_header = true;
                continue;
            }
            TopicCluster c;
            c.topic_id = j.at("topic_id").get<int>();
            c.centroid = j.at("centroid").get<std::vector<double>>();
            c.member_ids = j.at("member_ids").get<std::vector<std::string>>();
            for (const auto& [q, n] : j.at("counts_by_quarter").items()) {
                c.counts_by_quarter[std::stoi(q)] = n.get<int>();
            }
            clusters.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw InputError(fmt::format("cluster state '{}': {}", path.string(), e.what()));
    }
    if (!seen_header) throw InputError(fmt::format("cluster state '{}' has no header", path.string()));
    return {header, std::move(clusters)};
}

void write_trend_report(const std::filesystem::path& path, const TopicModel& model) {
    auto out = open_out(path);
    out << "topic_id,status,k,m,changepoints,delta,gamma,beta_q1,beta_q2,beta_q3,beta_q4,mape,"
           "forecast_ordinal,target_quarter_of_year,forecast_raw,forecast,actual,fitted\n";
    for (const auto& s : model.series) {
        const TrendFit* fit = nullptr;
        for (const auto& f : model.trends.fits) {
            if (f.topic_id == s.topic_id) fit = &f;
        }
        if (!fit) {
            out << fmt::format("{},excluded,,,,,,,,,,,,,,,{},\n", s.topic_id, join(s.f));
            continue;
        }
        out << fmt::format("{},ok,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.topic_id,
                           num(fit->k), num(fit->m), join(fit->changepoints), join(fit->delta),
                           join(fit->gamma), num(fit->beta[0]), num(fit->beta[1]), num(fit->beta[2]),
                           num(fit->beta[3]), num(fit->mape), fit->forecast_ordinal,
                           fit->target_quarter_of_year, num(fit->forecast_raw), num(fit->forecast),
                           join(s.f), join(fit->fitted));
    }
}

std::vector<TrendReportRow> read_trend_report(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(fmt::format("trend report '{}' is empty", path.string()));
    std::vector<TrendReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 16) throw InputError(fmt::format("trend report '{}': short row", path.string()));
        TrendReportRow row;
        row.topic_id = std::stoi(fields[0]);
        row.ok = fields[1] == "ok";
        if (row.ok) {
            row.mape = parse_double(fields[11]);
            row.forecast = parse_double(fields[15]);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_plot_data(const std::filesystem::path& path, const Corpus& corpus, const TopicModel& model) {
    auto out = open_out(path);
    out << "topic_id,ordinal,year,quarter,kind,actual,fitted\n";
    for (const auto& s : model.series) {
        const TrendFit* fit = nullptr;
        for (const auto& f : model.trends.fits) {
            if (f.topic_id == s.topic_id) fit = &f;
        }
        for (std::size_t i = 0; i < s.f.size(); ++i) {
            const auto& q = corpus.quarter(static_cast<int>(i) + 1);
            out << fmt::format("{},{},{},{},history,{},{}\n", s.topic_id, q.ordinal, q.year,
                               q.quarter_of_year, num(s.f[i]), fit ? num(fit->fitted[i]) : "");
        }
        if (fit && fit->forecast_ordinal <= corpus.num_quarters()) {
            const auto& q = corpus.quarter(fit->forecast_ordinal);
            out << fmt::format("{},{},{},{},forecast,,{}\n", s.topic_id, q.ordinal, q.year,
                               q.quarter_of_year, num(fit->forecast));
        }
    }
}

void write_weights(const std::filesystem::path& path, const std::vector<WeightAssignment>& weights) {
    auto out = open_out(path);
    for (const auto& w : weights) {
        json j;
        j["instance_id"] = w.instance_id;
        j["topic_id"] = w.topic_id ? json(*w.topic_id) : json(nullptr);
        j["raw_ratio"] = w.raw_ratio ? json(*w.raw_ratio) : json(nullptr);
        j["weight"] = w.weight;
        out << j.dump() << '\n';
    }
}

std::vector<WeightAssignment> read_weights(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<WeightAssignment> out;
    std::string line;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = json::parse(line);
            WeightAssignment w;
            w.instance_id = j.at("instance_id").get<std::string>();
            if (!j.at("topic_id").is_null()) w.topic_id = j["topic_id"].get<int>();
            if (!j.at("raw_ratio").is_null()) w.raw_ratio = j["raw_ratio"].get<double>();
            w.weight = j.at("weight").get<double>();
            if (!(w.weight > 0.0)) throw InputError(fmt::format("nonpositive weight for '{}'", w.instance_id));
            out.push_back(std::move(w));
        }
    } catch (const json::exception& e) {
        throw InputError(fmt::format("weights '{}': {}", path.string(), e.what()));
    }
    return out;
}

namespace {

std::string opt_num(const std::optional<Metrics>& m) { return m ? num(m->macro_f1) : ""; }

std::string metric_cols(const Metrics& m) {
    return fmt::format("{},{},{},{}", num(m.accuracy), num(m.macro_f1), num(m.f1_fake), num(m.f1_real));
}

} // namespace

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
    auto out = open_out(path);
    out << "row,strategy,target,seed,accuracy,macf1,f1_fake,f1_real,existing_macf1,new_macf1,"
           "n_existing,n_new,cells,missing,status\n";
    for (const auto& c : report.cells) {
        if (c.metrics) {
            out << fmt::format("cell,{},{},{},{},{},{},{},{},,,ok\n", to_string(c.strategy), c.target,
                               c.seed, metric_cols(*c.metrics), opt_num(c.breakdown.existing),
                               opt_num(c.breakdown.new_topics), c.breakdown.n_existing, c.breakdown.n_new);
        } else {
            std::string status = c.error;
            for (auto& ch : status) {
                if (ch == ',' || ch == '\n') ch = ' ';
            }
            out << fmt::format("cell,{},{},{},,,,,,,,,,,missing: {}\n", to_string(c.strategy),
                               c.target, c.seed, status);
        }
    }
    auto summary = [&](const char* kind, const SummaryRow& r) {
        out << fmt::format("{},{},{},,{},{},{},,,{},{},\n", kind, to_string(r.strategy), r.target,
                           metric_cols(r.mean), opt_num(r.existing_mean), opt_num(r.new_mean),
                           r.cells, r.missing);
    };
    for (const auto& r : report.per_quarter) summary("quarter", r);
    for (const auto& r : report.average) summary("average", r);
}

std::string format_report_table(const EvalReport& report) {
    std::string out;
    out += fmt::format("{:<9} {:<16} {:>8} {:>8} {:>8} {:>8}\n", "target", "strategy", "macF1",
                       "Acc", "F1fake", "F1real");
    auto line = [&](const std::string& target, const SummaryRow& r) {
        out += fmt::format("{:<9} {:<16} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f}{}\n", target,
                           to_string(r.strategy), r.mean.macro_f1, r.mean.accuracy, r.mean.f1_fake,
                           r.mean.f1_real, r.missing ? fmt::format("  ({} missing)", r.missing) : "");
    };
    for (const auto& r : report.per_quarter) line(fmt::format("Q{}", r.target), r);
    for (const auto& r : report.average) line("Average", r);

    bool any_breakdown = false;
    for (const auto& r : report.average) any_breakdown |= r.existing_mean || r.new_mean;
    if (any_breakdown) {
        out += fmt::format("\n{:<16} {:>16} {:>16}\n", "strategy", "existing macF1", "new macF1");
        for (const auto& r : report.average) {
            out += fmt::format("{:<16} {:>16} {:>16}\n", to_string(r.strategy),
                               r.existing_mean ? fmt::format("{:.4f}", r.existing_mean->macro_f1) : "-",
                               r.new_mean ? fmt::format("{:.4f}", r.new_mean->macro_f1) : "-");
        }
    }
    return out;
}

} // namespace ftt
