#include "sscl/experiment.hpp"

#include "sscl/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace sscl {

namespace {

using Clock = std::chrono::steady_clock;
using Predictor = std::function<int(const Vector&)>;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void emit(const LogSink& log, const std::string& message) {
    if (log) log(message);
}

// Re-throws with a location prefix, keeping the error category.
template <class Body>
void with_context(const std::string& where, Body&& body) {
    try {
        body();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
    } catch (const SolverError& e) {
        throw SolverError(where + ": " + e.what());
    }
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    const int threads = std::min(jobs, count);
    for (int t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

Vector row_of(const Dataset& ds, int i) { return ds.features.row(i).transpose(); }

Predictor fit(Algorithm algorithm, const ExperimentConfig& config, const Hyperparams& hyper, const Dataset& raw_train) {
    if (algorithm == Algorithm::sscl) {
        auto ensemble = std::make_shared<SsclEnsemble>(train_one_vs_rest(raw_train, hyper).ensemble);
        return [ensemble](const Vector& x) { return predict_multiclass(*ensemble, x); };
    }
    const Standardizer s = fit_standardizer(raw_train);
    auto train = std::make_shared<const Dataset>(apply_standardizer(s, raw_train));
    if (algorithm == Algorithm::knn) {
        auto knn = std::make_shared<KnnClassifier>(train, config.effective_knn_k());
        return [knn, s](const Vector& x) { return knn->predict(apply_standardizer(s, x)); };
    }
    auto srbc = std::make_shared<SrbcClassifier>(train, config.effective_srbc_gamma());
    return [srbc, s](const Vector& x) { return srbc->predict(apply_standardizer(s, x)); };
}

std::vector<int> predict_all(const Predictor& predictor, const Dataset& raw_test) {
    std::vector<int> out(raw_test.n());
    for (int i = 0; i < raw_test.n(); ++i) out[i] = predictor(row_of(raw_test, i));
    return out;
}

FoldSplit make_split(const ExperimentConfig& config, const Dataset& data, std::uint64_t seed) {
    return config.stratify ? stratified_kfold(data.labels, config.fold_count, seed)
                           : kfold(data.n(), config.fold_count, seed);
}

}  // namespace

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::sscl: return "sscl";
        case Algorithm::knn: return "knn";
        case Algorithm::srbc: return "srbc";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "sscl") return Algorithm::sscl;
    if (name == "knn") return Algorithm::knn;
    if (name == "srbc") return Algorithm::srbc;
    throw ConfigError("unknown algorithm '" + name + "' (expected sscl, knn or srbc)");
}

std::string to_string(SweepParameter parameter) {
    switch (parameter) {
        case SweepParameter::alpha: return "alpha";
        case SweepParameter::beta: return "beta";
        case SweepParameter::gamma: return "gamma";
        case SweepParameter::k: return "k";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "alpha") return SweepParameter::alpha;
    if (name == "beta") return SweepParameter::beta;
    if (name == "gamma") return SweepParameter::gamma;
    if (name == "k") return SweepParameter::k;
    throw ConfigError("unknown sweep parameter '" + name + "' (expected alpha, beta, gamma or k)");
}

void ExperimentConfig::validate() const {
    if (fold_count < 2) throw ConfigError("fold count must be at least 2");
    if (algorithms.empty()) throw ConfigError("no algorithms selected");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (inner_folds != 0 && inner_folds < 2) throw ConfigError("inner fold count must be at least 2");
    if (tune && (grid.alpha.empty() || grid.beta.empty() || grid.gamma.empty()))
        throw ConfigError("tuning grids must be non-empty");
    if (std::find(algorithms.begin(), algorithms.end(), Algorithm::sscl) != algorithms.end() && !tune)
        hyper.validate();
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty list");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BoxStats box_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("box_stats of an empty list");
    std::vector<double> v(values.begin(), values.end());
    BoxStats s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.median = quantile(v, 0.5);
    s.q25 = quantile(v, 0.25);
    s.q75 = quantile(v, 0.75);
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

const AlgorithmSummary& CvReport::summary(Algorithm algorithm) const {
    for (const auto& s : summaries)
        if (s.algorithm == algorithm) return s;
    throw std::out_of_range("no summary for algorithm " + to_string(algorithm));
}

std::vector<int> fit_predict(Algorithm algorithm, const ExperimentConfig& config, const Hyperparams& hyper,
                             const Dataset& raw_train, const Dataset& raw_test) {
    return predict_all(fit(algorithm, config, hyper, raw_train), raw_test);
}

Hyperparams tune_hyperparams(const ExperimentConfig& config, const Dataset& raw_train, std::uint64_t seed,
                             const LogSink& log) {
    const int inner = config.inner_folds > 0 ? config.inner_folds : config.fold_count - 1;
    const FoldSplit inner_split = config.stratify ? stratified_kfold(raw_train.labels, inner, seed)
                                            : kfold(raw_train.n(), inner, seed);

    std::optional<Hyperparams> best;
    double best_accuracy = -1.0;
    for (double alpha : config.grid.alpha) {
        for (double beta : config.grid.beta) {
            for (double gamma : config.grid.gamma) {
                Hyperparams h = config.hyper;
                h.alpha = alpha;
                h.beta = beta;
                h.gamma = gamma;
                if (!h.convex()) continue;
                double total = 0.0;
                try {
                    for (int f = 0; f < inner; ++f) {
                        const auto train_idx = inner_split.train_indices(f);
                        const auto test_idx = inner_split.test_indices(f);
                        const Dataset tr = subset(raw_train, train_idx);
                        const Dataset te = subset(raw_train, test_idx);
                        total += accuracy(fit_predict(Algorithm::sscl, config, h, tr, te), te.labels);
                    }
                } catch (const SolverError& e) {
                    // A combination that cannot be trained is not a candidate.
                    std::ostringstream msg;
                    msg << "warning: skipping alpha=" << alpha << " beta=" << beta << " gamma=" << gamma << ": "
                        << e.what();
                    emit(log, msg.str());
                    continue;
                }
                const double mean = total / inner;
                if (mean > best_accuracy) {
                    best_accuracy = mean;
                    best = h;
                }
            }
        }
    }
    if (!best) throw ConfigError("no tuning grid combination satisfies alpha^2 < 2*beta and trains");
    std::ostringstream msg;
    msg << "tuned alpha=" << best->alpha << " beta=" << best->beta << " gamma=" << best->gamma
        << " (inner accuracy " << best_accuracy << ")";
    emit(log, msg.str());
    return *best;
}

CvReport run_cv(const ExperimentConfig& config, const Dataset& data, const LogSink& log) {
    config.validate();
    CvReport report;
    report.split = make_split(config, data, config.seed);

    const int algo_count = static_cast<int>(config.algorithms.size());
    const int job_count = config.fold_count * algo_count;
    report.folds.resize(job_count);
    for (Algorithm a : config.algorithms) report.predictions[a] = std::vector<int>(data.n(), -1);
    std::mutex predictions_mutex;

    parallel_for(job_count, config.jobs, [&](int job) {
        const int fold = job / algo_count;
        const Algorithm algorithm = config.algorithms[job % algo_count];
        with_context("fold " + std::to_string(fold) + ", " + to_string(algorithm), [&] {
            const auto train_idx = report.split.train_indices(fold);
            const auto test_idx = report.split.test_indices(fold);
            const Dataset raw_train = subset(data, train_idx);
            const Dataset raw_test = subset(data, test_idx);

            FoldResult result;
            result.fold = fold;
            result.algorithm = algorithm;
            result.test_count = raw_test.n();

            Hyperparams hyper = config.hyper;
            if (algorithm == Algorithm::sscl && config.tune) {
                hyper = tune_hyperparams(config, raw_train, config.seed + 1 + static_cast<std::uint64_t>(fold), log);
                result.tuned = hyper;
            }

            const auto train_start = Clock::now();
            const Predictor predictor = fit(algorithm, config, hyper, raw_train);
            result.train_seconds = seconds_since(train_start);

            const auto predict_start = Clock::now();
            const std::vector<int> predicted = predict_all(predictor, raw_test);
            result.predict_seconds = seconds_since(predict_start);
            result.accuracy = accuracy(predicted, raw_test.labels);

            {
                std::lock_guard lock(predictions_mutex);
                auto& out = report.predictions[algorithm];
                for (std::size_t t = 0; t < test_idx.size(); ++t) out[test_idx[t]] = predicted[t];
            }
            report.folds[job] = result;
            if (config.verbosity > 0) {
                std::ostringstream msg;
                msg << "fold " << fold << " " << to_string(algorithm) << ": accuracy " << result.accuracy << " ("
                    << result.train_seconds + result.predict_seconds << " s)";
                emit(log, msg.str());
            }
        });
    });

    for (Algorithm a : config.algorithms) {
        std::vector<double> acc;
        AlgorithmSummary s;
        s.algorithm = a;
        for (const auto& r : report.folds) {
            if (r.algorithm != a) continue;
            acc.push_back(r.accuracy);
            s.mean_train_seconds += r.train_seconds / config.fold_count;
            s.mean_predict_seconds += r.predict_seconds / config.fold_count;
        }
        s.accuracy = box_stats(acc);
        report.summaries.push_back(s);
    }
    return report;
}

void write_cv_report(const CvReport& report, const Dataset& data, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p);
        if (!out) throw DataError("cannot write '" + p.string() + "'");
        out << std::setprecision(12);
        return out;
    };

    write_fold_csv(report.split, (dir / "folds.csv").string());
    {
        auto out = open(dir / "cv_folds.csv");
        out << "fold,algorithm,accuracy,train_seconds,predict_seconds,test_count\n";
        for (const auto& r : report.folds)
            out << r.fold << ',' << to_string(r.algorithm) << ',' << r.accuracy << ',' << r.train_seconds << ','
                << r.predict_seconds << ',' << r.test_count << '\n';
    }
    {
        auto out = open(dir / "cv_summary.csv");
        out << "algorithm,mean,median,q25,q75,stddev,mean_train_seconds,mean_predict_seconds\n";
        for (const auto& s : report.summaries)
            out << to_string(s.algorithm) << ',' << s.accuracy.mean << ',' << s.accuracy.median << ','
                << s.accuracy.q25 << ',' << s.accuracy.q75 << ',' << s.accuracy.stddev << ',' << s.mean_train_seconds
                << ',' << s.mean_predict_seconds << '\n';
    }
    for (const auto& [algorithm, predicted] : report.predictions) {
        auto out = open(dir / ("predictions_" + to_string(algorithm) + ".csv"));
        out << "point_index,fold,truth,predicted\n";
        for (int i = 0; i < data.n(); ++i)
            out << i << ',' << report.split.assignments[i] << ',' << data.class_names[data.labels[i]] << ','
                << data.class_names[predicted[i]] << '\n';
    }
}

void print_cv_summary(const CvReport& report, std::ostream& out) {
    out << std::left << std::setw(10) << "algorithm" << std::right << std::setw(10) << "mean" << std::setw(10)
        << "median" << std::setw(10) << "q25" << std::setw(10) << "q75" << std::setw(12) << "train[s]"
        << std::setw(12) << "predict[s]" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& s : report.summaries)
        out << std::left << std::setw(10) << to_string(s.algorithm) << std::right << std::setw(10) << s.accuracy.mean
            << std::setw(10) << s.accuracy.median << std::setw(10) << s.accuracy.q25 << std::setw(10)
            << s.accuracy.q75 << std::setw(12) << s.mean_train_seconds << std::setw(12) << s.mean_predict_seconds
            << '\n';
    out << std::defaultfloat;
}

std::vector<double> default_sweep_grid(SweepParameter parameter, int n) {
    switch (parameter) {
        case SweepParameter::alpha: return {0.1, 1.0, 10.0, 100.0};
        case SweepParameter::beta: return {1.0, 10.0, 100.0};
        case SweepParameter::gamma: return {0.01, 0.1, 1.0, 10.0};
        case SweepParameter::k: {
            std::vector<double> ks;
            for (int k : {1, 2, 3, 5, 8, 10, 15, 20})
                if (k <= n - 1) ks.push_back(k);
            return ks;
        }
    }
    return {};
}

SweepTable run_sweep(const ExperimentConfig& config, const Dataset& data, SweepParameter parameter,
                     std::span<const double> grid, const LogSink& log) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    const FoldSplit probe = make_split(config, data, config.seed);
    const auto sizes = probe.fold_sizes();
    const int min_train = data.n() - *std::max_element(sizes.begin(), sizes.end());

    SweepTable table;
    table.parameter = parameter;
    for (double value : grid) {
        ExperimentConfig cfg = config;
        cfg.algorithms = {Algorithm::sscl};
        cfg.tune = false;
        Hyperparams& h = cfg.hyper;
        switch (parameter) {
            case SweepParameter::alpha: h.alpha = value; break;
            case SweepParameter::beta: h.beta = value; break;
            case SweepParameter::gamma: h.gamma = value; break;
            case SweepParameter::k: h.k = static_cast<int>(value); break;
        }
        std::string reason;
        if (parameter == SweepParameter::k && (value != std::floor(value) || h.k < 1 || h.k > min_train - 1))
            reason = "k must be an integer in [1, " + std::to_string(min_train - 1) + "]";
        else if (!h.convex())
            reason = "alpha^2 < 2*beta violated";
        else if (!(h.alpha > 0.0) || !(h.beta > 0.0) || !(h.gamma >= 0.0))
            reason = "value out of range";
        if (!reason.empty()) {
            std::ostringstream msg;
            msg << "warning: skipping " << to_string(parameter) << "=" << value << ": " << reason;
            emit(log, msg.str());
            table.skipped.push_back(value);
            continue;
        }
        const CvReport report = run_cv(cfg, data, log);
        const auto& s = report.summary(Algorithm::sscl);
        table.rows.push_back({value, s.accuracy.mean, s.accuracy.stddev});
    }
    if (table.rows.empty()) throw ConfigError("sweep grid has no valid values after filtering");
    return table;
}

void write_sweep_csv(const SweepTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << std::setprecision(12);
    out << to_string(table.parameter) << ",mean_accuracy,std\n";
    for (const auto& r : table.rows) out << r.value << ',' << r.mean_accuracy << ',' << r.stddev << '\n';
}

TrainResult emit_convergence(const Dataset& data, const Hyperparams& hyper, int positive_class) {
    const Standardizer s = fit_standardizer(data);
    auto standardized = std::make_shared<const Dataset>(apply_standardizer(s, data));
    return train(make_binary_task(standardized, positive_class), hyper, s);
}

void write_trace_csv(const TrainTrace& trace, const std::string& path, bool with_timing) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << std::setprecision(17);
    out << "t,dual_objective,primal_objective,mean_kkt_residual,box_kkt_residual,multiplier_step,multiplier_gap";
    out << (with_timing ? ",seconds\n" : "\n");
    for (const auto& r : trace.rows) {
        out << r.iteration << ',' << r.dual << ',' << r.primal << ',' << r.mean_l1_kkt << ',' << r.box_kkt << ','
            << r.multiplier_step << ',' << r.multiplier_gap;
        if (with_timing) out << ',' << r.seconds;
        out << '\n';
    }
}

void write_bench_csv(const CvReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << std::setprecision(12);
    out << "algorithm,mean_train_seconds,mean_predict_seconds,mean_total_seconds,mean_accuracy\n";
    for (const auto& s : report.summaries)
        out << to_string(s.algorithm) << ',' << s.mean_train_seconds << ',' << s.mean_predict_seconds << ','
            << s.mean_train_seconds + s.mean_predict_seconds << ',' << s.accuracy.mean << '\n';
}

void print_bench_table(const CvReport& report, std::ostream& out) {
    out << std::left << std::setw(10) << "algorithm" << std::right << std::setw(14) << "train[s]" << std::setw(14)
        << "predict[s]" << std::setw(14) << "total[s]" << std::setw(10) << "accuracy" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& s : report.summaries)
        out << std::left << std::setw(10) << to_string(s.algorithm) << std::right << std::setw(14)
            << s.mean_train_seconds << std::setw(14) << s.mean_predict_seconds << std::setw(14)
            << s.mean_train_seconds + s.mean_predict_seconds << std::setw(10) << s.accuracy.mean << '\n';
    out << std::defaultfloat;
}

}  // namespace sscl
