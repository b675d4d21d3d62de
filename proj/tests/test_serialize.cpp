#include <doctest.h>

#include <sscl/serialize.hpp>

#include "synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace sscl;

namespace {

void check_same_predictions(const SsclEnsemble& a, const SsclEnsemble& b, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(5.0, 6.0);
    for (int q = 0; q < 100; ++q) {
        Vector x(d);
        for (int j = 0; j < d; ++j) x[j] = normal(rng);
        CHECK(predict_multiclass(a, x) == predict_multiclass(b, x));
        for (std::size_t m = 0; m < a.models.size(); ++m) {
            const Prediction pa = predict(a.models[m], x);
            const Prediction pb = predict(b.models[m], x);
            CHECK(pa.label == pb.label);
            CHECK(pa.score == pb.score);  // bitwise
        }
    }
}

}  // namespace

TEST_SUITE("model files") {
    TEST_CASE("binary ensemble survives a file round trip") {
        const Dataset raw = synthetic::two_clusters(15, 3, 21, 0.1);
        Hyperparams h;
        h.seed = 9;
        const SsclEnsemble original = train_one_vs_rest(raw, h).ensemble;
        const auto path = (std::filesystem::temp_directory_path() / "sscl_test_model.json").string();
        save_model(original, path);
        const SsclEnsemble loaded = load_model(path);

        CHECK(loaded.class_count == original.class_count);
        CHECK(loaded.class_names == original.class_names);
        CHECK(loaded.positive_classes == original.positive_classes);
        const SsclModel& a = original.models.front();
        const SsclModel& b = loaded.models.front();
        CHECK(a.w == b.w);
        CHECK(a.coeffs == b.coeffs);
        CHECK(a.delta == b.delta);
        CHECK(a.train_features == b.train_features);
        CHECK(a.train_labels == b.train_labels);
        CHECK(a.standardizer.mean == b.standardizer.mean);
        CHECK(a.standardizer.scale == b.standardizer.scale);
        CHECK(a.hyper.seed == b.hyper.seed);
        CHECK(a.hyper.alpha == b.hyper.alpha);
        CHECK(a.hyper.damp_oscillation == b.hyper.damp_oscillation);
        check_same_predictions(original, loaded, 3, 1);
    }

    TEST_CASE("multiclass ensemble survives a string round trip") {
        const Dataset raw = synthetic::blobs(8, 2, 3, 4.0, 2);
        const SsclEnsemble original = train_one_vs_rest(raw, Hyperparams{}).ensemble;
        const SsclEnsemble loaded = model_from_json(model_to_json(original));
        REQUIRE(loaded.models.size() == 3);
        check_same_predictions(original, loaded, 2, 2);
        CHECK(model_to_json(loaded) == model_to_json(original));
    }

    TEST_CASE("malformed files are data errors") {
        CHECK_THROWS_AS(model_from_json("not json"), DataError);
        CHECK_THROWS_AS(model_from_json(R"({"format":"something-else","version":1})"), DataError);
        CHECK_THROWS_AS(model_from_json(R"({"format":"sscl-model","version":99})"), DataError);
        CHECK_THROWS_AS(model_from_json(R"({"format":"sscl-model","version":1})"), DataError);
        CHECK_THROWS_AS(load_model("/nonexistent/model.json"), DataError);
    }
}
