// Python bindings: training, inference, model files, cross validation and the two solvers.

#include <sscl/experiment.hpp>
#include <sscl/serialize.hpp>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace sscl;

namespace {

Dataset to_dataset(const Matrix& X, const std::vector<int>& y) {
    if (X.rows() != static_cast<Eigen::Index>(y.size()))
        throw ConfigError("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()) +
                          " labels");
    return make_dataset(X, y);
}

std::vector<int> predict_rows(const SsclEnsemble& model, const Matrix& X) {
    std::vector<int> out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_multiclass(model, X.row(i).transpose());
    return out;
}

py::dict solution_dict(const Solution& s) {
    py::dict d;
    d["x"] = s.x;
    d["objective"] = s.report.objective;
    d["kkt_residual"] = s.report.kkt_residual;
    d["iterations"] = s.report.iterations;
    d["converged"] = s.report.converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sscl, m) {
    m.doc() = "Supervised sparse context learning: core bindings";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<Hyperparams>(m, "Hyperparams")
        .def(py::init<>())
        .def_readwrite("alpha", &Hyperparams::alpha)
        .def_readwrite("beta", &Hyperparams::beta)
        .def_readwrite("gamma", &Hyperparams::gamma)
        .def_readwrite("k", &Hyperparams::k)
        .def_readwrite("max_outer_iter", &Hyperparams::max_outer_iter)
        .def_readwrite("outer_tol", &Hyperparams::outer_tol)
        .def_readwrite("seed", &Hyperparams::seed)
        .def_readwrite("solver_tol", &Hyperparams::solver_tol)
        .def_readwrite("damp_oscillation", &Hyperparams::damp_oscillation)
        .def("validate", &Hyperparams::validate)
        .def("__repr__", [](const Hyperparams& h) {
            return "Hyperparams(alpha=" + std::to_string(h.alpha) + ", beta=" + std::to_string(h.beta) +
                   ", gamma=" + std::to_string(h.gamma) + ", k=" + std::to_string(h.k) + ")";
        });

    py::class_<SsclEnsemble>(m, "Ensemble")
        .def_readonly("class_count", &SsclEnsemble::class_count)
        .def_readonly("positive_classes", &SsclEnsemble::positive_classes)
        .def_property_readonly("weights",
                               [](const SsclEnsemble& e) {
                                   std::vector<Vector> w;
                                   for (const auto& model : e.models) w.push_back(model.w);
                                   return w;
                               })
        .def_property_readonly("multipliers",
                               [](const SsclEnsemble& e) {
                                   std::vector<Vector> d;
                                   for (const auto& model : e.models) d.push_back(model.delta);
                                   return d;
                               })
        .def("predict", &predict_rows, py::arg("X"), "Class id per row of X.")
        .def(
            "scores",
            [](const SsclEnsemble& e, const Vector& x) {
                std::vector<double> s;
                for (const auto& model : e.models) s.push_back(predict(model, x).score);
                return s;
            },
            py::arg("x"), "Binary score of each one-vs-rest model; positive favours its class.")
        .def("to_json", &model_to_json)
        .def_static("from_json", &model_from_json, py::arg("text"))
        .def("save", [](const SsclEnsemble& e, const std::string& path) { save_model(e, path); }, py::arg("path"))
        .def_static("load", &load_model, py::arg("path"));

    m.def(
        "fit",
        [](const Matrix& X, const std::vector<int>& y, const Hyperparams& hyper) {
            hyper.validate();
            return train_one_vs_rest(to_dataset(X, y), hyper).ensemble;
        },
        py::arg("X"), py::arg("y"), py::arg("hyper") = Hyperparams{}, py::call_guard<py::gil_scoped_release>(),
        "Standardizes X and trains one-vs-rest models; y holds dense class ids.");

    m.def(
        "load_csv",
        [](const std::string& path, const std::string& label_col) {
            Dataset ds = load_csv(path, LabelColumn::parse(label_col));
            return py::make_tuple(ds.features, ds.labels, ds.class_names);
        },
        py::arg("path"), py::arg("label_col") = "last", "Returns (X, class ids, class names).");

    m.def(
        "cross_validate",
        [](const Matrix& X, const std::vector<int>& y, const std::vector<std::string>& algorithms, int folds,
           std::uint64_t seed, const Hyperparams& hyper, int knn_k, int jobs, bool stratify) {
            ExperimentConfig c;
            c.algorithms.clear();
            for (const auto& a : algorithms) c.algorithms.push_back(parse_algorithm(a));
            c.fold_count = folds;
            c.seed = seed;
            c.hyper = hyper;
            c.knn_k = knn_k;
            c.jobs = jobs;
            c.stratify = stratify;
            CvReport report;
            {
                py::gil_scoped_release release;
                report = run_cv(c, to_dataset(X, y));
            }
            py::dict out;
            for (const auto& s : report.summaries) {
                py::dict d;
                std::vector<double> per_fold;
                for (const auto& f : report.folds)
                    if (f.algorithm == s.algorithm) per_fold.push_back(f.accuracy);
                d["folds"] = per_fold;
                d["mean"] = s.accuracy.mean;
                d["median"] = s.accuracy.median;
                d["q25"] = s.accuracy.q25;
                d["q75"] = s.accuracy.q75;
                d["stddev"] = s.accuracy.stddev;
                d["predictions"] = report.predictions.at(s.algorithm);
                out[py::str(to_string(s.algorithm))] = d;
            }
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("algorithms") = std::vector<std::string>{"sscl", "knn", "srbc"},
        py::arg("folds") = 10, py::arg("seed") = 0, py::arg("hyper") = Hyperparams{}, py::arg("knn_k") = 0,
        py::arg("jobs") = 1, py::arg("stratify") = false, "Per-algorithm fold accuracies and boxplot statistics.");

    m.def(
        "convergence",
        [](const Matrix& X, const std::vector<int>& y, const Hyperparams& hyper, int positive_class) {
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = emit_convergence(to_dataset(X, y), hyper, positive_class);
            }
            py::list rows;
            for (const auto& row : r.trace.rows) {
                py::dict d;
                d["t"] = row.iteration;
                d["dual"] = row.dual;
                d["primal"] = row.primal;
                d["mean_kkt_residual"] = row.mean_l1_kkt;
                d["box_kkt_residual"] = row.box_kkt;
                d["multiplier_step"] = row.multiplier_step;
                rows.append(d);
            }
            return rows;
        },
        py::arg("X"), py::arg("y"), py::arg("hyper") = Hyperparams{}, py::arg("positive_class") = 0,
        "Per-iteration objectives of one class-vs-rest training run.");

    m.def(
        "solve_l1_quadratic",
        [](const Matrix& P, const Vector& q, double gamma, double tol) {
            SolveOptions o;
            o.tol = tol;
            return solution_dict(solve_l1_quadratic(L1QuadraticProblem{P, q, gamma}, o));
        },
        py::arg("P"), py::arg("q"), py::arg("gamma"), py::arg("tol") = 1e-8,
        "minimize 0.5 v'Pv + q'v + gamma |v|_1");

    m.def(
        "solve_box_qp",
        [](const Matrix& M, double upper, double tol) {
            SolveOptions o;
            o.tol = tol;
            return solution_dict(solve_box_qp(BoxQpProblem{M, upper}, o));
        },
        py::arg("M"), py::arg("upper"), py::arg("tol") = 1e-8, "maximize -0.5 d'Md + sum(d) over 0 <= d <= upper");
}
