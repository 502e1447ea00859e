#include "ftt/cli.hpp"

#include "ftt/config.hpp"
#include "ftt/errors.hpp"
#include "ftt/reports.hpp"

#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace ftt {

namespace {

// Flags shared by most subcommands; unset flags leave the config value alone.
struct CommonFlags {
    std::string config_path;
    std::optional<std::string> corpus;
    std::optional<std::size_t> dim;
    std::optional<std::uint64_t> seed;
    std::optional<double> theta_sim;
    std::optional<int> theta_count;
    std::optional<std::string> strategy;
    std::optional<double> theta_mape;
    std::optional<double> theta_lower;
    std::optional<double> theta_upper;
    std::optional<std::string> ratio_mode;
    std::optional<int> target;
};

void add_config_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "Key-value config file");
    cmd->add_option("--seed", f.seed, "Root seed");
}

void add_corpus_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--corpus", f.corpus, "JSON-lines corpus file");
    cmd->add_option("--dim", f.dim, "Expected embedding dimension");
}

PipelineConfig resolve(const CommonFlags& f) {
    PipelineConfig c = f.config_path.empty() ? PipelineConfig{} : load_config(f.config_path);
    if (f.corpus) c.corpus_path = *f.corpus;
    if (f.dim) c.dim = *f.dim;
    if (f.seed) c.seed = *f.seed;
    if (f.theta_sim) c.clustering.theta_sim = *f.theta_sim;
    if (f.theta_count) c.trend.theta_count = *f.theta_count;
    if (f.strategy) c.reweight.strategy = parse_strategy(*f.strategy);
    if (f.theta_mape) c.reweight.theta_mape = *f.theta_mape;
    if (f.theta_lower) c.reweight.theta_lower = *f.theta_lower;
    if (f.theta_upper) c.reweight.theta_upper = *f.theta_upper;
    if (f.ratio_mode) c.reweight.ratio_mode = parse_ratio_mode(*f.ratio_mode);
    validate(c);
    return c;
}

Corpus load(const PipelineConfig& c) {
    if (c.corpus_path.empty()) throw InputError("no corpus path given (--corpus or corpus.path)");
    auto result = load_corpus(c.corpus_path, {c.dim, c.embed_seed});
    if (result.corpus.size() == 0) {
        throw InputError(fmt::format("corpus '{}' has no valid records", c.corpus_path.string()));
    }
    return std::move(result.corpus);
}

int target_or_last(const std::optional<int>& target, const Corpus& corpus) {
    return target.value_or(corpus.num_quarters());
}

ClusterFileHeader make_header(const Corpus& corpus, int target, const PipelineConfig& c) {
    return {target, target - 2, corpus.quarter(1).quarter_of_year, c.clustering.theta_sim, c.seed};
}

std::string state_path_for(const std::string& out) { return out + ".state"; }

void ensure_logger() {
    static const bool installed = [] {
        auto logger = spdlog::stderr_logger_mt("ftt");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)installed;
}

} // namespace

int command_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    ensure_logger();
    CLI::App app{"Topic-trend forecasting and reweighting for temporally shifting fake news detection", "ftt"};
    app.require_subcommand(1);

    CommonFlags f;
    std::string out_path;
    std::string state_path;
    std::string in_path;
    std::string trends_path;
    std::string plot_path;
    std::string weights_path;
    std::string model_path;
    std::string log_path;
    std::optional<std::uint64_t> embed_seed;
    std::optional<std::string> strategies;
    std::optional<std::string> targets;
    std::optional<std::string> seeds;
    bool synth_corpus = false;

    auto* synth = app.add_subcommand("synth", "Generate the planted synthetic corpus");
    add_config_flags(synth, f);
    synth->add_option("--dim", f.dim, "Embedding dimension");
    synth->add_option("--out", out_path, "Output corpus file")->required();

    auto* embed = app.add_subcommand("embed", "Hash-embed text records into a corpus file");
    embed->add_option("--in", in_path, "Input JSON-lines file")->required();
    embed->add_option("--out", out_path, "Output corpus file")->required();
    embed->add_option("--dim", f.dim, "Embedding dimension");
    embed->add_option("--embed-seed", embed_seed, "Hashing seed");

    auto* cluster = app.add_subcommand("cluster", "Cluster the balanced training split of a target quarter");
    add_config_flags(cluster, f);
    add_corpus_flags(cluster, f);
    cluster->add_option("--target", f.target, "Target quarter ordinal (default: last)");
    cluster->add_option("--theta-sim", f.theta_sim, "Similarity threshold");
    cluster->add_option("--out", out_path, "Cluster dump (JSON lines)")->required();
    cluster->add_option("--state", state_path, "Full cluster state (default: <out>.state)");

    auto* trends = app.add_subcommand("trends", "Fit per-topic trends and forecast the target quarter");
    add_config_flags(trends, f);
    add_corpus_flags(trends, f);
    trends->add_option("--state", state_path, "Cluster state from `cluster`")->required();
    trends->add_option("--theta-count", f.theta_count, "Minimum topic size");
    trends->add_option("--out", out_path, "Trend report CSV")->required();
    trends->add_option("--plot", plot_path, "Plot data CSV");

    auto* reweight = app.add_subcommand("reweight", "Compute training weights");
    add_config_flags(reweight, f);
    add_corpus_flags(reweight, f);
    reweight->add_option("--target", f.target, "Target quarter ordinal (default: from state, else last)");
    reweight->add_option("--strategy", f.strategy, "uniform|ftt|same_period|previous_period|combined");
    reweight->add_option("--state", state_path, "Cluster state (ftt)");
    reweight->add_option("--trends", trends_path, "Trend report (ftt)");
    reweight->add_option("--theta-count", f.theta_count, "Minimum topic size");
    reweight->add_option("--theta-mape", f.theta_mape, "MAPE filter threshold");
    reweight->add_option("--theta-lower", f.theta_lower, "Lower weight bound");
    reweight->add_option("--theta-upper", f.theta_upper, "Upper weight bound");
    reweight->add_option("--ratio-mode", f.ratio_mode, "share_ratio|share_times_topics");
    reweight->add_option("--out", out_path, "Weights (JSON lines)")->required();

    auto* train_cmd = app.add_subcommand("train", "Train the detector on a rolling split");
    add_config_flags(train_cmd, f);
    add_corpus_flags(train_cmd, f);
    train_cmd->add_option("--target", f.target, "Target quarter ordinal (default: last)");
    train_cmd->add_option("--weights", weights_path, "Weights file (default: all ones)");
    train_cmd->add_option("--out", model_path, "Model checkpoint")->required();
    train_cmd->add_option("--log", log_path, "Training log CSV");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the target quarter");
    add_config_flags(eval, f);
    add_corpus_flags(eval, f);
    eval->add_option("--target", f.target, "Target quarter ordinal (default: last)");
    eval->add_option("--model", model_path, "Model checkpoint")->required();
    eval->add_option("--state", state_path, "Cluster state for the existing/new topic breakdown");
    eval->add_option("--strategy", f.strategy, "Strategy name recorded in the report");
    eval->add_option("--out", out_path, "Report CSV")->required();

    auto* rolling = app.add_subcommand("rolling", "Run the full rolling experiment");
    add_config_flags(rolling, f);
    add_corpus_flags(rolling, f);
    rolling->add_option("--strategies", strategies, "Comma-separated strategies");
    rolling->add_option("--targets", targets, "Comma-separated target ordinals");
    rolling->add_option("--seeds", seeds, "Comma-separated root seeds");
    rolling->add_flag("--synth", synth_corpus, "Use the synthetic corpus from the config instead of a file");
    rolling->add_option("--out", out_path, "Report CSV")->required();

    std::vector<const char*> argv;
    argv.push_back("ftt");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            auto c = resolve(f);
            if (f.seed) c.synth.seed = *f.seed;
            if (f.dim) c.synth.dim = *f.dim;
            write_corpus(out_path, generate_synthetic(c.synth));
        } else if (embed->parsed()) {
            const auto result = load_corpus(in_path, {f.dim.value_or(768), embed_seed.value_or(0)});
            write_corpus(out_path, result.corpus);
            out << fmt::format("embedded {} records, rejected {}\n", result.corpus.size(), result.rejected.size());
        } else if (cluster->parsed()) {
            const auto c = resolve(f);
            const auto corpus = load(c);
            const int target = target_or_last(f.target, corpus);
            const auto prepared = prepare_split(corpus, target, c.seed);
            const auto clusters = single_pass_cluster(corpus, prepared.train, c.clustering);
            const auto header = make_header(corpus, target, c);
            write_cluster_dump(out_path, header, clusters);
            write_cluster_state(state_path.empty() ? state_path_for(out_path) : state_path, header, clusters);
        } else if (trends->parsed()) {
            const auto c = resolve(f);
            const auto corpus = load(c);
            auto [header, clusters] = read_cluster_state(state_path);
            const auto model = fit_topic_model(corpus, header.target, std::move(clusters), c.trend);
            write_trend_report(out_path, model);
            if (!plot_path.empty()) write_plot_data(plot_path, corpus, model);
        } else if (reweight->parsed()) {
            auto c = resolve(f);
            const auto corpus = load(c);
            std::optional<ClusterFileHeader> header;
            TopicModel model;
            if (!state_path.empty()) {
                auto state = read_cluster_state(state_path);
                header = state.first;
                model.clusters = std::move(state.second);
            }
            if (header && !f.seed) c.seed = header->seed;
            const int target = f.target.value_or(header ? header->target : corpus.num_quarters());
            if (header && header->target != target) {
                throw InputError(fmt::format("cluster state is for target {}, not {}", header->target, target));
            }
            const auto prepared = prepare_split(corpus, target, c.seed);
            if (c.reweight.strategy == Strategy::kFtt) {
                if (!header || trends_path.empty()) throw InputError("ftt weights need --state and --trends");
                model.series = build_frequency_series(model.clusters, header->train_quarters,
                                                      c.trend.theta_count, header->start_quarter_of_year);
                const auto rows = read_trend_report(trends_path);
                if (rows.size() != model.series.size()) {
                    throw InputError(fmt::format("trend report has {} topics, clusters retain {} (theta_count mismatch?)",
                                                 rows.size(), model.series.size()));
                }
                for (const auto& row : rows) {
                    if (!row.ok) continue;
                    TrendFit fit;
                    fit.topic_id = row.topic_id;
                    fit.mape = row.mape;
                    fit.forecast = row.forecast;
                    model.trends.fits.push_back(fit);
                }
            }
            write_weights(out_path, compute_weights(corpus, prepared, &model, c.reweight));
        } else if (train_cmd->parsed()) {
            const auto c = resolve(f);
            const auto corpus = load(c);
            const int target = target_or_last(f.target, corpus);
            const auto prepared = prepare_split(corpus, target, c.seed);
            std::optional<std::vector<WeightAssignment>> weights;
            if (!weights_path.empty()) weights = read_weights(weights_path);
            const auto train_set = make_examples(corpus, prepared.train, weights ? &*weights : nullptr);
            const auto val_set = make_examples(corpus, prepared.val);
            auto train_config = c.train;
            train_config.seed = train_seed(c.seed);
            const auto result = train(train_set, val_set, train_config);
            save_checkpoint(model_path, result.params, train_config);
            if (!log_path.empty()) write_training_log(log_path, result.log);
            out << fmt::format("best epoch {} val macF1 {:.4f}\n", result.best_epoch, result.best_val_macro_f1);
        } else if (eval->parsed()) {
            const auto c = resolve(f);
            const auto corpus = load(c);
            const int target = target_or_last(f.target, corpus);
            const auto prepared = prepare_split(corpus, target, c.seed);
            const auto params = load_checkpoint(model_path);
            const auto test_set = make_examples(corpus, prepared.test);
            if (test_set.empty()) throw InputError(fmt::format("target {}: empty test quarter", target));

            CellResult cell;
            cell.strategy = f.strategy ? parse_strategy(*f.strategy) : Strategy::kUniform;
            cell.target = target;
            cell.seed = c.seed;
            cell.n_test = test_set.size();
            const auto preds = predict_labels(params, test_set);
            std::vector<Label> labels;
            for (const auto& ex : test_set) labels.push_back(ex.label);
            cell.metrics = compute_metrics(labels, preds);
            if (!state_path.empty()) {
                const auto [header, clusters] = read_cluster_state(state_path);
                if (!clusters.empty()) {
                    std::vector<const NewsInstance*> instances;
                    for (auto i : prepared.test) instances.push_back(&corpus[i]);
                    cell.breakdown = topic_breakdown(instances, clusters, preds, c.clustering);
                }
            }
            EvalReport report;
            report.cells.push_back(cell);
            summarize(report);
            write_report_csv(out_path, report);
            out << format_report_table(report);
        } else if (rolling->parsed()) {
            auto c = resolve(f);
            if (strategies) {
                c.strategies.clear();
                for (const auto& s : split_list(*strategies)) c.strategies.push_back(parse_strategy(s));
            }
            if (targets) apply_setting(c, "experiment.targets", *targets);
            if (seeds) apply_setting(c, "experiment.seeds", *seeds);
            validate(c);
            Corpus corpus;
            if (synth_corpus) {
                corpus = generate_synthetic(c.synth);
            } else {
                corpus = load(c);
            }
            if (c.targets.empty()) {
                for (int q = std::max(3, corpus.num_quarters() - 3); q <= corpus.num_quarters(); ++q) c.targets.push_back(q);
            }
            ExperimentConfig experiment;
            experiment.strategies = c.strategies;
            experiment.targets = c.targets;
            experiment.seeds = c.seeds;
            experiment.clustering = c.clustering;
            experiment.trend = c.trend;
            experiment.reweight = c.reweight;
            experiment.train = c.train;
            experiment.breakdown = c.breakdown;
            const auto report = run_rolling_experiment(corpus, experiment);
            write_report_csv(out_path, report);
            out << format_report_table(report);
        }
    } catch (const Error& e) {
        err << "error: " << e.category() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace ftt
