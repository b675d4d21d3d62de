#include <doctest.h>

#include <sscl/baselines.hpp>

#include "synthetic.hpp"

#include <algorithm>
#include <random>

using namespace sscl;

namespace {

std::shared_ptr<const Dataset> points(Matrix x, std::vector<int> labels) {
    return std::make_shared<const Dataset>(make_dataset(std::move(x), std::move(labels)));
}

Vector vec(std::initializer_list<double> v) {
    return Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_SUITE("knn") {
    TEST_CASE("exact match with one neighbour") {
        auto train = points(Matrix{{0, 0}, {5, 5}, {9, 0}}, {1, 0, 1});
        const KnnClassifier knn(train, 1);
        CHECK(knn.predict(vec({5, 5})) == 0);
        CHECK(knn.predict(vec({9, 0})) == 1);
    }

    TEST_CASE("majority of three") {
        auto train = points(Matrix{{0}, {1}, {2}, {10}}, {0, 0, 1, 1});
        CHECK(KnnClassifier(train, 3).predict(vec({0.5})) == 0);
    }

    TEST_CASE("tie goes to the lower class id") {
        auto train = points(Matrix{{0}, {1}, {10}}, {1, 0, 1});
        CHECK(KnnClassifier(train, 2).predict(vec({0.5})) == 0);
    }

    TEST_CASE("k out of range") {
        auto train = points(Matrix{{0}, {1}}, {0, 1});
        CHECK_THROWS_AS(KnnClassifier(train, 0), ConfigError);
        CHECK_THROWS_AS(KnnClassifier(train, 3), ConfigError);
    }

    TEST_CASE("property: k = n always returns the most frequent class") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Dataset ds = synthetic::blobs(3 + static_cast<int>(seed % 3), 2, 3, 2.0, seed);
            std::vector<int> labels = ds.labels;
            labels[0] = 2;  // make class 2 the unique mode
            auto train = points(ds.features, labels);
            const KnnClassifier knn(train, train->n());
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> normal(0.0, 10.0);
            for (int q = 0; q < 5; ++q) CHECK(knn.predict(vec({normal(rng), normal(rng)})) == 2);
        }
    }
}

TEST_SUITE("srbc") {
    TEST_CASE("training point is reconstructed by its own class") {
        auto train = points(Matrix{{1, 0}, {0.2, 0.3}, {0, 1}, {0, 2}}, {0, 0, 1, 1});
        const SrbcClassifier srbc(train, 0.0);
        CHECK(srbc.predict(vec({1, 0})) == 0);
        CHECK(srbc.residuals(vec({1, 0}))[0] < 1e-12);
    }

    TEST_CASE("dominant sparsity weight collapses to the tie rule") {
        auto train = points(Matrix{{1, 0}, {0, 1}}, {0, 1});
        const SrbcClassifier srbc(train, 1e9);
        const Vector x = vec({0.3, 4});
        const auto r = srbc.residuals(x);
        CHECK(r[0] == x.squaredNorm());
        CHECK(r[1] == x.squaredNorm());
        CHECK(srbc.predict(x) == 0);
    }

    TEST_CASE("orthogonal class subspaces") {
        auto train = points(Matrix{{1, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 1, 1}}, {0, 0, 1, 1});
        const SrbcClassifier srbc(train, 0.0);
        const Vector x = vec({0, 2, -1});
        const auto r = srbc.residuals(x);
        CHECK(r[1] < 1e-12);
        CHECK(r[0] == doctest::Approx(x.squaredNorm()).epsilon(1e-10));
        CHECK(srbc.predict(x) == 1);
    }

    TEST_CASE("property: without sparsity the residual is the least-squares residual") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 20; ++trial) {
            Matrix x(10, 3);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
            const std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
            auto train = points(x, labels);
            const SrbcClassifier srbc(train, 0.0);
            const Vector q = vec({normal(rng), normal(rng), normal(rng)});
            const auto r = srbc.residuals(q);
            for (int c = 0; c < 2; ++c) {
                const Matrix dict = x.middleRows(5 * c, 5).transpose();
                const Vector ls = dict.completeOrthogonalDecomposition().solve(q);
                CHECK(r[static_cast<std::size_t>(c)] >= 0.0);
                CHECK(std::abs(r[static_cast<std::size_t>(c)] - (q - dict * ls).squaredNorm()) <= 1e-8);
            }
        }
    }

    TEST_CASE("property: residuals are non-negative and empty classes never win") {
        const Dataset ds = synthetic::blobs(5, 3, 3, 3.0, 1);
        Dataset partial = subset(ds, std::vector<int>{0, 1, 2, 3, 4, 10, 11, 12, 13, 14});
        auto train = std::make_shared<const Dataset>(partial);
        const SrbcClassifier srbc(train, 0.1);
        for (int i = 0; i < ds.n(); ++i) {
            const auto r = srbc.residuals(ds.features.row(i).transpose());
            CHECK(r[1] == std::numeric_limits<double>::infinity());
            for (double v : r) CHECK(v >= 0.0);
            CHECK(srbc.predict(ds.features.row(i).transpose()) != 1);
        }
    }

    TEST_CASE("negative sparsity weight is rejected") {
        auto train = points(Matrix{{1}, {2}}, {0, 1});
        CHECK_THROWS_AS(SrbcClassifier(train, -0.1), ConfigError);
    }
}
