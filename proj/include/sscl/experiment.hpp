#pragma once

#include "sscl/data.hpp"
#include "sscl/sscl.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sscl {

enum class Algorithm { sscl, knn, srbc };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

enum class SweepParameter { alpha, beta, gamma, k };

std::string to_string(SweepParameter parameter);
SweepParameter parse_sweep_parameter(const std::string& name);

using LogSink = std::function<void(const std::string&)>;

struct TuneGrid {
    std::vector<double> alpha{0.1, 1.0, 10.0, 100.0};
    std::vector<double> beta{1.0, 10.0, 100.0};
    std::vector<double> gamma{0.01, 0.1, 1.0, 10.0};
};

struct ExperimentConfig {
    std::string data_path;
    std::string label_column = "last";
    std::vector<Algorithm> algorithms{Algorithm::sscl, Algorithm::knn, Algorithm::srbc};
    Hyperparams hyper;
    int knn_k = 0;             // 0 uses hyper.k
    double srbc_gamma = -1.0;  // negative uses hyper.gamma
    int fold_count = 10;
    std::uint64_t seed = 0;
    bool stratify = false;
    std::string out_dir;
    int jobs = 1;
    int verbosity = 0;
    // Nested tuning of SSCL's (alpha, beta, gamma) on each training portion.
    bool tune = false;
    int inner_folds = 0;  // 0 uses fold_count - 1
    TuneGrid grid;

    int effective_knn_k() const { return knn_k > 0 ? knn_k : hyper.k; }
    double effective_srbc_gamma() const { return srbc_gamma >= 0.0 ? srbc_gamma : hyper.gamma; }
    /// Throws ConfigError.
    void validate() const;
};

struct FoldResult {
    int fold = 0;
    Algorithm algorithm = Algorithm::sscl;
    double accuracy = 0.0;
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
    int test_count = 0;
    std::optional<Hyperparams> tuned;
};

struct BoxStats {
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double stddev = 0.0;  // sample standard deviation
};

/// Linear interpolation between closest ranks.
double quantile(std::vector<double> values, double p);
BoxStats box_stats(std::span<const double> values);

struct AlgorithmSummary {
    Algorithm algorithm = Algorithm::sscl;
    BoxStats accuracy;
    double mean_train_seconds = 0.0;
    double mean_predict_seconds = 0.0;
};

struct CvReport {
    FoldSplit split;
    std::vector<FoldResult> folds;  // fold-major, algorithms in config order
    std::vector<AlgorithmSummary> summaries;
    std::map<Algorithm, std::vector<int>> predictions;  // held-out prediction per point

    const AlgorithmSummary& summary(Algorithm algorithm) const;
};

/// Fit-and-predict for one algorithm on one split; returns predicted class ids for `test`.
std::vector<int> fit_predict(Algorithm algorithm, const ExperimentConfig& config, const Hyperparams& hyper,
                             const Dataset& raw_train, const Dataset& raw_test);

CvReport run_cv(const ExperimentConfig& config, const Dataset& data, const LogSink& log = {});
void write_cv_report(const CvReport& report, const Dataset& data, const std::string& out_dir);
void print_cv_summary(const CvReport& report, std::ostream& out);

struct SweepRow {
    double value = 0.0;
    double mean_accuracy = 0.0;
    double stddev = 0.0;
};

struct SweepTable {
    SweepParameter parameter = SweepParameter::gamma;
    std::vector<SweepRow> rows;
    std::vector<double> skipped;
};

std::vector<double> default_sweep_grid(SweepParameter parameter, int n);

/// SSCL cross-validation for each grid value; invalid values are skipped with a warning.
SweepTable run_sweep(const ExperimentConfig& config, const Dataset& data, SweepParameter parameter,
                     std::span<const double> grid, const LogSink& log = {});
void write_sweep_csv(const SweepTable& table, const std::string& path);

/// Trains once on the standardized data (class `positive_class` vs rest) and returns the trace.
TrainResult emit_convergence(const Dataset& data, const Hyperparams& hyper, int positive_class = 0);
/// Without timing the file depends only on the inputs and seed.
void write_trace_csv(const TrainTrace& trace, const std::string& path, bool with_timing = true);

void write_bench_csv(const CvReport& report, const std::string& path);
void print_bench_table(const CvReport& report, std::ostream& out);

/// Nested cross-validation over `config.grid` on a training portion.
Hyperparams tune_hyperparams(const ExperimentConfig& config, const Dataset& raw_train, std::uint64_t seed,
                             const LogSink& log = {});

}  // namespace sscl
