#include "ftt/trend_model.hpp"

#include "ftt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace ftt {

void validate(const TrendConfig& config) {
    if (config.n_changepoints && *config.n_changepoints < 0) {
        throw ConfigError("n_changepoints must be >= 0");
    }
    if (config.ridge_lambda_delta < 0.0 || config.ridge_lambda_beta < 0.0) {
        throw ConfigError("ridge penalties must be >= 0");
    }
    if (config.theta_count < 0) throw ConfigError("theta_count must be >= 0");
    if (!(config.changepoint_range > 0.0 && config.changepoint_range <= 1.0)) {
        throw ConfigError("changepoint_range must be in (0, 1]");
    }
}

int default_changepoint_count(int q_train) {
    return std::min(3, std::max(0, q_train - 3));
}

std::vector<int> place_changepoints(int q_train, int count, double range) {
    std::vector<int> out;
    const int horizon = static_cast<int>(std::floor(range * q_train));
    if (count <= 0 || horizon < 2) return out;
    for (int j = 1; j <= count; ++j) {
        const double pos = static_cast<double>(j) * (horizon - 1) / count;
        const int s = 1 + static_cast<int>(std::lround(pos));
        // s = 1 would duplicate the base slope; repeated positions add nothing.
        if (s > 1 && (out.empty() || out.back() != s)) out.push_back(s);
    }
    return out;
}

double TrendFit::trend_at(double q) const {
    double rate = k;
    double offset = m;
    for (std::size_t j = 0; j < changepoints.size(); ++j) {
        if (changepoints[j] <= q) {
            rate += delta[j];
            offset += gamma[j];
        }
    }
    return rate * q + offset;
}

std::vector<FrequencySeries> build_frequency_series(const std::vector<TopicCluster>& clusters,
                                                    int q_train, int theta_count,
                                                    int start_quarter_of_year) {
    if (q_train < 2) throw InputError(fmt::format("need at least 2 training quarters, got {}", q_train));

    std::vector<FrequencySeries> series;
    for (const auto& c : clusters) {
        if (static_cast<int>(c.size()) < theta_count) continue;
        FrequencySeries s;
        s.topic_id = c.topic_id;
        s.start_quarter_of_year = start_quarter_of_year;
        s.raw_counts.assign(q_train, 0);
        for (const auto& [ordinal, count] : c.counts_by_quarter) {
            if (ordinal >= 1 && ordinal <= q_train) s.raw_counts[ordinal - 1] = count;
        }
        series.push_back(std::move(s));
    }
    if (series.empty()) {
        spdlog::warn("no topic reaches theta_count={} members; weights fall back to uniform", theta_count);
        return series;
    }

    for (int q = 0; q < q_train; ++q) {
        long total = 0;
        for (const auto& s : series) total += s.raw_counts[q];
        for (auto& s : series) {
            s.f.push_back(total > 0 ? static_cast<double>(s.raw_counts[q]) / static_cast<double>(total) : 0.0);
        }
    }
    return series;
}

double compute_mape(std::span<const double> actual, std::span<const double> fitted) {
    if (actual.size() != fitted.size()) {
        throw InputError(fmt::format("MAPE: length mismatch ({} vs {})", actual.size(), fitted.size()));
    }
    if (actual.empty()) throw InputError("MAPE: empty input");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] < 1e-6) continue;
        sum += std::abs(actual[i] - fitted[i]) / actual[i];
        ++n;
    }
    return n == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(n);
}

namespace {

// Column layout of the design matrix: [q, 1, (q - s_j)+ ..., season_1..3].
// Season column c is +1 in quarter c, -1 in quarter 4 (beta_4 = -beta_1-beta_2-beta_3).
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                       bool& ok) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    ok = llt.info() == Eigen::Success && llt.rcond() > 1e-13;
    if (!ok) return {};
    return llt.solve(rhs);
}

} // namespace

TrendFit fit_trend(const FrequencySeries& series, const TrendConfig& config,
                   int target_quarter_of_year, int horizon) {
    validate(config);
    const int n = static_cast<int>(series.f.size());
    if (n < 4) {
        throw FitError(fmt::format("topic {}: {} observations, need at least 4", series.topic_id, n));
    }
    if (target_quarter_of_year < 1 || target_quarter_of_year > 4) {
        throw FitError(fmt::format("target quarter of year {} not in 1..4", target_quarter_of_year));
    }
    if (horizon < 1) throw FitError("forecast horizon must be >= 1");

    TrendFit fit;
    fit.topic_id = series.topic_id;
    fit.changepoints = place_changepoints(
        n, config.n_changepoints.value_or(default_changepoint_count(n)), config.changepoint_range);
    const int J = static_cast<int>(fit.changepoints.size());
    const int p = 2 + J + 3;

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const int q = i + 1;
        X(i, 0) = q;
        X(i, 1) = 1.0;
        for (int j = 0; j < J; ++j) X(i, 2 + j) = std::max(0, q - fit.changepoints[j]);
        const int qoy = series.quarter_of_year(q);
        for (int c = 0; c < 3; ++c) X(i, 2 + J + c) = qoy == c + 1 ? 1.0 : (qoy == 4 ? -1.0 : 0.0);
        y(i) = series.f[i];
    }

    // Penalty: lambda_delta |delta|^2 + lambda_beta |beta_1..4|^2, where the
    // full beta norm in the 3-parameter basis is b'(I + 11')b.
    auto penalty = [&](double lambda_delta, double lambda_beta) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p, p);
        for (int j = 0; j < J; ++j) P(2 + j, 2 + j) = lambda_delta;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) P(2 + J + a, 2 + J + b) = lambda_beta * ((a == b ? 1.0 : 0.0) + 1.0);
        }
        return P;
    };

    const Eigen::MatrixXd gram = X.transpose() * X;
    const Eigen::VectorXd rhs = X.transpose() * y;
    bool ok = false;
    Eigen::VectorXd theta =
        solve_normal_equations(gram + penalty(config.ridge_lambda_delta, config.ridge_lambda_beta), rhs, ok);
    if (!ok) {
        spdlog::debug("topic {}: singular normal equations, retrying with jitter", series.topic_id);
        constexpr double kJitter = 1e-6;
        theta = solve_normal_equations(
            gram + penalty(config.ridge_lambda_delta + kJitter, config.ridge_lambda_beta + kJitter), rhs, ok);
        if (!ok) throw FitError(fmt::format("topic {}: singular normal equations", series.topic_id));
    }

    fit.k = theta(0);
    fit.m = theta(1);
    for (int j = 0; j < J; ++j) {
        fit.delta.push_back(theta(2 + j));
        fit.gamma.push_back(-fit.changepoints[j] * theta(2 + j));
    }
    const double b1 = theta(2 + J), b2 = theta(3 + J), b3 = theta(4 + J);
    fit.beta = {b1, b2, b3, -(b1 + b2 + b3)};

    fit.fitted.reserve(n);
    for (int q = 1; q <= n; ++q) fit.fitted.push_back(fit.predict(q, series.quarter_of_year(q)));
    fit.mape = compute_mape(series.f, fit.fitted);

    fit.forecast_ordinal = n + horizon;
    fit.target_quarter_of_year = target_quarter_of_year;
    fit.forecast_raw = fit.trend_at(fit.forecast_ordinal) + fit.seasonal_at(target_quarter_of_year);
    fit.forecast = std::max(0.0, fit.forecast_raw);
    return fit;
}

TrendFitBatch fit_trends(const std::vector<FrequencySeries>& series, const TrendConfig& config,
                         int target_quarter_of_year, int horizon) {
    TrendFitBatch batch;
    for (const auto& s : series) {
        try {
            batch.fits.push_back(fit_trend(s, config, target_quarter_of_year, horizon));
        } catch (const FitError& e) {
            spdlog::warn("{}; topic excluded from reweighting", e.what());
            batch.excluded.emplace_back(s.topic_id, e.what());
        }
    }
    return batch;
}

} // namespace ftt
