// sscl: cross-validation, sweeps, convergence traces, timing and single-model inference.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver failure.

#include <sscl/experiment.hpp>
#include <sscl/serialize.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace sscl;

namespace {

enum Exit { ok = 0, config_failure = 1, data_failure = 2, solver_failure = 3 };

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad grid value '" + item + "'");
        }
    }
    return out;
}

struct Options {
    std::string data;
    std::string label_col = "last";
    std::string algos = "sscl,knn,srbc";
    Hyperparams hyper;
    int knn_k = 0;
    int folds = 10;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 1;
    bool stratify = false;
    bool tune = false;
    int inner_folds = 0;
    int verbosity = 0;

    ExperimentConfig config() const {
        ExperimentConfig c;
        c.data_path = data;
        c.label_column = label_col;
        c.algorithms.clear();
        for (const auto& name : split_list(algos)) c.algorithms.push_back(parse_algorithm(name));
        c.hyper = hyper;
        c.knn_k = knn_k;
        c.fold_count = folds;
        c.seed = seed;
        c.stratify = stratify;
        c.out_dir = out_dir();
        c.jobs = jobs;
        c.tune = tune;
        c.inner_folds = inner_folds;
        c.verbosity = verbosity;
        c.validate();
        return c;
    }

    std::string out_dir() const { return out.empty() ? std::string("sscl_out") : out; }

    Dataset load() const {
        if (data.empty()) throw ConfigError("--data is required");
        return load_csv(data, LabelColumn::parse(label_col));
    }
};

LogSink stderr_log() {
    return [](const std::string& line) { std::cerr << line << '\n'; };
}

std::string output_path(const Options& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir());
    return (std::filesystem::path(o.out_dir()) / name).string();
}

int cmd_cv(const Options& o) {
    const ExperimentConfig c = o.config();
    const Dataset data = o.load();
    const CvReport report = run_cv(c, data, stderr_log());
    write_cv_report(report, data, o.out_dir());
    print_cv_summary(report, std::cout);
    std::cout << "reports written to " << o.out_dir() << '\n';
    return ok;
}

int cmd_sweep(const Options& o, const std::string& parameter_name, const std::string& grid_text) {
    ExperimentConfig c = o.config();
    c.algorithms = {Algorithm::sscl};
    const Dataset data = o.load();
    const SweepParameter parameter = parse_sweep_parameter(parameter_name);
    const std::vector<double> grid =
        grid_text.empty() ? default_sweep_grid(parameter, data.n()) : parse_grid(grid_text);
    const SweepTable table = run_sweep(c, data, parameter, grid, stderr_log());
    const std::string path = output_path(o, "sweep_" + to_string(parameter) + ".csv");
    write_sweep_csv(table, path);
    std::cout << std::left << std::setw(12) << to_string(parameter) << std::right << std::setw(10) << "mean"
              << std::setw(10) << "std" << '\n';
    for (const auto& row : table.rows)
        std::cout << std::left << std::setw(12) << row.value << std::right << std::fixed << std::setprecision(4)
                  << std::setw(10) << row.mean_accuracy << std::setw(10) << row.stddev << std::defaultfloat << '\n';
    std::cout << "sweep written to " << path << '\n';
    return ok;
}

int cmd_converge(const Options& o, int positive_class, bool timing, const std::string& trace_path) {
    o.hyper.validate();
    const Dataset data = o.load();
    if (positive_class < 0 || positive_class >= data.class_count())
        throw ConfigError("class " + std::to_string(positive_class) + " out of range (" +
                          std::to_string(data.class_count()) + " classes)");
    const TrainResult r = emit_convergence(data, o.hyper, positive_class);
    const std::string path = trace_path.empty() ? output_path(o, "convergence.csv") : trace_path;
    write_trace_csv(r.trace, path, timing);
    const auto& last = r.trace.rows.back();
    std::cout << r.trace.rows.size() << " iterations" << (r.trace.stopped_early ? " (converged)" : "")
              << ", final dual " << std::setprecision(10) << last.dual << ", primal " << last.primal << '\n';
    if (!coefficients_jointly_bounded(r.model.delta, o.hyper.beta))
        std::cerr << "warning: sum of squared multipliers exceeds 2*beta; the coefficient terms may be unbounded "
                     "(try a smaller alpha or larger beta)\n";
    std::cout << "trace written to " << path << '\n';
    return ok;
}

int cmd_train(const Options& o, const std::string& model_path) {
    o.hyper.validate();
    const Dataset data = o.load();
    const EnsembleResult r = train_one_vs_rest(data, o.hyper);
    const std::string path = model_path.empty() ? output_path(o, "model.json") : model_path;
    save_model(r.ensemble, path);
    for (const auto& m : r.ensemble.models)
        if (!coefficients_jointly_bounded(m.delta, o.hyper.beta))
            std::cerr << "warning: sum of squared multipliers exceeds 2*beta for one model; the coefficient terms "
                         "may be unbounded (try a smaller alpha or larger beta)\n";
    std::cout << r.ensemble.models.size() << " model(s) for " << r.ensemble.class_count << " classes written to "
              << path << '\n';
    return ok;
}

int cmd_predict(const Options& o, const std::string& model_path, const std::string& out_path) {
    if (model_path.empty()) throw ConfigError("--model is required");
    const SsclEnsemble model = load_model(model_path);
    const Dataset queries = o.load();
    const int d = model.models.empty() ? 0 : model.models.front().standardizer.dim();
    if (queries.d() != d)
        throw DataError("queries have " + std::to_string(queries.d()) + " features, model expects " +
                        std::to_string(d));

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw DataError("cannot write '" + out_path + "'");
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "index,predicted\n";
    const bool labelled = queries.class_count() > 0;
    int correct = 0;
    for (int i = 0; i < queries.n(); ++i) {
        const int cls = predict_multiclass(model, queries.features.row(i).transpose());
        const std::string& name = model.class_names.at(cls);
        out << i << ',' << name << '\n';
        if (labelled && queries.class_names[queries.labels[i]] == name) ++correct;
    }
    if (labelled)
        std::cerr << "accuracy " << static_cast<double>(correct) / queries.n() << " on " << queries.n()
                  << " labelled queries\n";
    return ok;
}

int cmd_bench(const Options& o) {
    const ExperimentConfig c = o.config();
    const Dataset data = o.load();
    const CvReport report = run_cv(c, data, stderr_log());
    const std::string path = output_path(o, "bench.csv");
    write_bench_csv(report, path);
    print_bench_table(report, std::cout);
    std::cout << "timings written to " << path << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse context classifiers: cross validation, sweeps, convergence traces and inference"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags override it");

    Options o;
    app.add_option("--data", o.data, "CSV dataset (queries for predict)");
    app.add_option("--label-col", o.label_col, "label column: index, header name, 'last' or 'none'")
        ->capture_default_str();
    app.add_option("--algos", o.algos, "comma-separated subset of sscl,knn,srbc")->capture_default_str();
    app.add_option("--alpha", o.hyper.alpha, "hinge-loss weight")->capture_default_str();
    app.add_option("--beta", o.hyper.beta, "reconstruction weight")->capture_default_str();
    app.add_option("--gamma", o.hyper.gamma, "sparsity weight")->capture_default_str();
    app.add_option("--k", o.hyper.k, "context size")->capture_default_str();
    app.add_option("--iters", o.hyper.max_outer_iter, "maximum outer iterations")->capture_default_str();
    app.add_option("--tol", o.hyper.outer_tol, "relative dual change that stops training")->capture_default_str();
    app.add_option("--knn-k", o.knn_k, "neighbours for the KNN baseline (0 uses --k)")->capture_default_str();
    app.add_option("--folds", o.folds, "cross-validation folds")->capture_default_str();
    app.add_option("--seed", o.seed, "seed for folds and initial multipliers")->capture_default_str();
    app.add_option("--out", o.out, "output directory (default sscl_out)")->envname("SSCL_OUT_DIR");
    app.add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
    app.add_flag("--stratify", o.stratify, "stratified folds");
    app.add_flag("--tune", o.tune, "choose alpha, beta, gamma by inner cross validation on each training fold");
    app.add_option("--inner-folds", o.inner_folds, "inner folds for --tune (0 uses folds - 1)");
    app.add_flag("-v,--verbose", o.verbosity, "per-fold progress on stderr");

    auto* cv = app.add_subcommand("cv", "k-fold cross validation of the selected algorithms")->fallthrough();

    std::string parameter, grid;
    auto* sweep = app.add_subcommand("sweep", "SSCL accuracy across one parameter's grid")->fallthrough();
    sweep->add_option("--param", parameter, "alpha, beta, gamma or k")->required();
    sweep->add_option("--grid", grid, "comma-separated values (default grid if omitted)");

    int positive_class = 0;
    bool no_timing = false;
    std::string trace_path;
    auto* converge = app.add_subcommand("converge", "per-iteration objective trace of one training run")->fallthrough();
    converge->add_option("--class", positive_class, "class id trained against the rest")->capture_default_str();
    converge->add_flag("--no-timing", no_timing, "omit the seconds column so reruns give identical files");
    converge->add_option("--trace", trace_path, "trace CSV path (default <out>/convergence.csv)");

    std::string model_path;
    auto* train_cmd = app.add_subcommand("train", "train on the whole dataset and save the model")->fallthrough();
    train_cmd->add_option("--model", model_path, "model file (default <out>/model.json)");

    std::string predictions_path;
    auto* predict_cmd = app.add_subcommand("predict", "label query rows with a saved model")->fallthrough();
    predict_cmd->add_option("--model", model_path, "model file")->required();
    predict_cmd->add_option("--predictions", predictions_path, "output CSV (default stdout)");

    auto* bench = app.add_subcommand("bench", "training and prediction time per algorithm")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_failure;
    }
    if (o.jobs == 0) o.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    try {
        if (cv->parsed()) return cmd_cv(o);
        if (sweep->parsed()) return cmd_sweep(o, parameter, grid);
        if (converge->parsed()) return cmd_converge(o, positive_class, !no_timing, trace_path);
        if (train_cmd->parsed()) return cmd_train(o, model_path);
        if (predict_cmd->parsed()) {
            if (app.get_option("--label-col")->count() == 0) o.label_col = "none";
            return cmd_predict(o, model_path, predictions_path);
        }
        if (bench->parsed()) return cmd_bench(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_failure;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_failure;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return solver_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_failure;
    }
    return ok;
}
