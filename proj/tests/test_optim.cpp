#include <doctest.h>

#include <sscl/optim.hpp>

#include "oracles.hpp"

#include <random>

using namespace sscl;

namespace {

L1QuadraticProblem l1(std::initializer_list<std::initializer_list<double>> p, std::initializer_list<double> q,
                      double gamma) {
    const auto k = static_cast<Eigen::Index>(q.size());
    L1QuadraticProblem out;
    out.P.resize(k, k);
    Eigen::Index r = 0;
    for (auto row : p) {
        Eigen::Index c = 0;
        for (double v : row) out.P(r, c++) = v;
        ++r;
    }
    out.q = Eigen::Map<const Vector>(q.begin(), k);
    out.gamma = gamma;
    return out;
}

Vector vec(std::initializer_list<double> v) { return Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

TEST_SUITE("l1 quadratic") {
    TEST_CASE("unregularized one-dimensional least squares") {
        const auto sol = solve_l1_quadratic(l1({{1}}, {-1}, 0.0));
        CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sol.report.converged);
    }

    TEST_CASE("soft-threshold dead zone gives zero") {
        const auto sol = solve_l1_quadratic(l1({{1}}, {-0.5}, 1.0));
        CHECK(sol.x[0] == 0.0);
        CHECK(sol.report.converged);
    }

    TEST_CASE("separable soft threshold") {
        const auto p = l1({{2, 0}, {0, 2}}, {-3, 1}, 1.0);
        const auto sol = solve_l1_quadratic(p);
        CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sol.x[1] == 0.0);
        const auto oracle = oracle::l1q_by_sign_enumeration(p.P, p.q, p.gamma);
        CHECK(sol.report.objective == doctest::Approx(oracle.objective).epsilon(1e-12));
    }

    TEST_CASE("kkt residual certificates") {
        CHECK(l1q_kkt_residual(l1({{1}}, {-1}, 0.0), vec({1.0})) <= 1e-10);
        CHECK(l1q_kkt_residual(l1({{1}}, {-0.5}, 1.0), vec({0.0})) <= 1e-10);
        CHECK(l1q_kkt_residual(l1({{2, 0}, {0, 2}}, {-3, 1}, 1.0), vec({1.0, 0.0})) <= 1e-10);
        CHECK(l1q_kkt_residual(l1({{1}}, {-1}, 0.0), vec({0.0})) == doctest::Approx(1.0));
        CHECK(l1q_kkt_residual(l1({{1}}, {-0.5}, 1.0), vec({0.0})) == 0.0);
        CHECK_THROWS_AS(l1q_kkt_residual(l1({{1}}, {-1}, 0.0), vec({0.0, 1.0})), std::invalid_argument);
    }

    TEST_CASE("matches sign-pattern enumeration on random problems") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> dim(1, 6);
        std::normal_distribution<double> normal;
        const double gammas[] = {0.0, 0.1, 1.0, 10.0};
        for (int trial = 0; trial < 60; ++trial) {
            const int k = dim(rng);
            L1QuadraticProblem p;
            p.P = oracle::random_pd(k, rng);
            p.q = Vector::NullaryExpr(k, [&] { return 3.0 * normal(rng); });
            p.gamma = gammas[trial % 4];
            const auto sol = solve_l1_quadratic(p);
            const auto ref = oracle::l1q_by_sign_enumeration(p.P, p.q, p.gamma);
            CHECK(sol.report.converged);
            CHECK(std::abs(sol.report.objective - ref.objective) <= 1e-8);
            CHECK(sol.report.kkt_residual <= 1e-8);
        }
    }

    TEST_CASE("objective never increases across iterations") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 30; ++trial) {
            const int k = 2 + trial % 7;
            L1QuadraticProblem p{oracle::random_pd(k, rng), Vector::NullaryExpr(k, [&] { return 4.0 * normal(rng); }), 0.5};
            SolveOptions opt;
            opt.record_history = true;
            opt.initial = Vector::NullaryExpr(k, [&] { return normal(rng); });
            const auto sol = solve_l1_quadratic(p, opt);
            REQUIRE(sol.history.size() >= 2);
            for (std::size_t t = 1; t < sol.history.size(); ++t)
                CHECK(sol.history[t] <= sol.history[t - 1] + 1e-12 * (1.0 + std::abs(sol.history[t - 1])));
        }
    }

    TEST_CASE("l1 norm shrinks along the gamma path") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> normal;
        const double path[] = {0.0, 0.1, 0.5, 1.0, 5.0};
        for (int trial = 0; trial < 20; ++trial) {
            const int k = 1 + trial % 8;
            L1QuadraticProblem p{oracle::random_pd(k, rng), Vector::NullaryExpr(k, [&] { return 3.0 * normal(rng); }), 0.0};
            double previous = std::numeric_limits<double>::infinity();
            for (double g : path) {
                p.gamma = g;
                const double norm = solve_l1_quadratic(p).x.lpNorm<1>();
                CHECK(norm <= previous + 1e-9);
                previous = norm;
            }
        }
    }

    TEST_CASE("scaling the problem leaves the minimizer unchanged") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 20; ++trial) {
            const int k = 1 + trial % 6;
            L1QuadraticProblem p{oracle::random_pd(k, rng), Vector::NullaryExpr(k, [&] { return 3.0 * normal(rng); }), 0.7};
            const Vector base = solve_l1_quadratic(p).x;
            for (double c : {0.01, 3.0, 250.0}) {
                L1QuadraticProblem scaled{c * p.P, c * p.q, c * p.gamma};
                SolveOptions opt;
                opt.tol = 1e-8 * std::max(1.0, c);
                CHECK((solve_l1_quadratic(scaled, opt).x - base).cwiseAbs().maxCoeff() <= 1e-7);
            }
        }
    }

    TEST_CASE("warm start reaches the same minimizer") {
        std::mt19937_64 rng(29);
        std::normal_distribution<double> normal;
        const int k = 6;
        L1QuadraticProblem p{oracle::random_pd(k, rng), Vector::NullaryExpr(k, [&] { return 3.0 * normal(rng); }), 0.3};
        SolveOptions opt;
        opt.initial = Vector::Constant(k, 2.0);
        CHECK((solve_l1_quadratic(p, opt).x - solve_l1_quadratic(p).x).cwiseAbs().maxCoeff() <= 1e-9);
    }

    TEST_CASE("indefinite problems are rejected with a direction") {
        const auto p = l1({{1, 2}, {2, 1}}, {-1, -1}, 0.1);
        try {
            solve_l1_quadratic(p);
            FAIL("expected IndefiniteProblem");
        } catch (const IndefiniteProblem& e) {
            const Vector& d = e.direction();
            REQUIRE(d.size() == 2);
            CHECK(d.dot(p.P * d) < 0.0);
        }
        CHECK_THROWS_AS(solve_l1_quadratic(l1({{-1}}, {1}, 0.1)), IndefiniteProblem);
    }

    TEST_CASE("iteration budget exhaustion is reported, not thrown") {
        std::mt19937_64 rng(31);
        L1QuadraticProblem p{oracle::random_pd(8, rng), Vector::Constant(8, -5.0), 0.01};
        SolveOptions opt;
        opt.max_iter = 1;
        const auto sol = solve_l1_quadratic(p, opt);
        CHECK_FALSE(sol.report.converged);
        CHECK(sol.report.kkt_residual > opt.tol);
        CHECK(sol.report.iterations == 1);
    }

    TEST_CASE("input validation") {
        CHECK_THROWS_AS(solve_l1_quadratic(l1({{1, 0}, {1, 1}}, {0, 0}, 0.1)), std::invalid_argument);
        CHECK_THROWS_AS(solve_l1_quadratic(l1({{1}}, {0}, -1.0)), std::invalid_argument);
        SolveOptions bad;
        bad.tol = 0.0;
        CHECK_THROWS_AS(solve_l1_quadratic(l1({{1}}, {0}, 0.0), bad), std::invalid_argument);
    }
}

TEST_SUITE("box qp") {
    TEST_CASE("linear objective saturates at the upper bound") {
        BoxQpProblem p{Matrix::Zero(3, 3), 2.0};
        const auto sol = solve_box_qp(p);
        CHECK(sol.x == Vector::Constant(3, 2.0));
        CHECK(boxqp_kkt_residual(p, sol.x) <= 1e-10);
    }

    TEST_CASE("interior one-dimensional optimum") {
        BoxQpProblem p{Matrix::Constant(1, 1, 1.0), 10.0};
        const auto sol = solve_box_qp(p);
        CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(boxqp_kkt_residual(p, sol.x) <= 1e-10);
    }

    TEST_CASE("rank-one matrix saturates both coordinates") {
        BoxQpProblem p{Matrix::Ones(2, 2), 0.3};
        const auto sol = solve_box_qp(p);
        CHECK(sol.x[0] == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(sol.x[1] == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(sol.report.objective == doctest::Approx(0.42).epsilon(1e-12));
        CHECK(boxqp_kkt_residual(p, sol.x) <= 1e-10);
        CHECK(oracle::boxqp_by_active_set_enumeration(p.M, p.upper).objective == doctest::Approx(0.42));
    }

    TEST_CASE("kkt residual values") {
        BoxQpProblem wide{Matrix::Constant(1, 1, 1.0), 10.0};
        CHECK(boxqp_kkt_residual(wide, Vector::Zero(1)) == doctest::Approx(1.0));
        BoxQpProblem narrow{Matrix::Constant(1, 1, 1.0), 0.4};
        CHECK(boxqp_kkt_residual(narrow, Vector::Constant(1, 0.4)) == 0.0);
        CHECK_THROWS_AS(boxqp_kkt_residual(narrow, Vector::Constant(1, 0.5)), std::invalid_argument);
    }

    TEST_CASE("matches active-set enumeration on random problems") {
        std::mt19937_64 rng(41);
        std::uniform_int_distribution<int> dim(1, 6);
        const double uppers[] = {0.1, 1.0, 10.0};
        for (int trial = 0; trial < 60; ++trial) {
            const int n = dim(rng);
            const int rank = 1 + trial % (n + 1);
            BoxQpProblem p{oracle::random_gram(n, rank, rng), uppers[trial % 3]};
            const auto sol = solve_box_qp(p);
            const auto ref = oracle::boxqp_by_active_set_enumeration(p.M, p.upper);
            CHECK(sol.report.converged);
            CHECK(std::abs(sol.report.objective - ref.objective) <= 1e-8);
            CHECK(sol.report.kkt_residual <= 1e-8);
        }
    }

    TEST_CASE("objective never decreases across sweeps") {
        std::mt19937_64 rng(43);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 3 + trial;
            BoxQpProblem p{oracle::random_gram(n, 2 + trial % 5, rng), 1.0 + trial};
            SolveOptions opt;
            opt.record_history = true;
            const auto sol = solve_box_qp(p, opt);
            for (std::size_t t = 1; t < sol.history.size(); ++t)
                CHECK(sol.history[t] >= sol.history[t - 1] - 1e-12 * (1.0 + std::abs(sol.history[t - 1])));
            CHECK((sol.x.array() >= 0.0).all());
            CHECK((sol.x.array() <= p.upper).all());
        }
    }

    TEST_CASE("zero diagonal coordinates follow the sign of the linear term") {
        Matrix m = Matrix::Zero(2, 2);
        m(1, 1) = 4.0;
        BoxQpProblem p{m, 3.0};
        const auto sol = solve_box_qp(p);
        CHECK(sol.x[0] == 3.0);
        CHECK(sol.x[1] == doctest::Approx(0.25));
    }

    TEST_CASE("validation") {
        CHECK_THROWS_AS(solve_box_qp(BoxQpProblem{Matrix::Identity(2, 2), 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(solve_box_qp(BoxQpProblem{Matrix::Zero(2, 3), 1.0}), std::invalid_argument);
    }
}
