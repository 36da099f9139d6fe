#include <doctest.h>

#include <cmath>
#include <limits>

#include "genuq/errors.hpp"
#include "genuq/rng.hpp"
#include "genuq/schedule.hpp"
#include "genuq/score.hpp"

using genuq::LikelihoodModel;
using genuq::MiniBatch;
using genuq::Schedule;

namespace {

MiniBatch batch_from(std::initializer_list<double> xs, std::initializer_list<double> ys) {
    MiniBatch b;
    b.x.resize(static_cast<Eigen::Index>(xs.size()), 1);
    b.y.resize(static_cast<Eigen::Index>(ys.size()), 1);
    Eigen::Index i = 0;
    for (double v : xs) b.x(i++, 0) = v;
    i = 0;
    for (double v : ys) b.y(i++, 0) = v;
    b.finalize();
    return b;
}

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd out(1);
    out << v;
    return out;
}

}  // namespace

TEST_SUITE("score") {

TEST_CASE("symmetric batch with equal observations gets equal log-weights") {
    MiniBatch b = batch_from({1.5, -1.5}, {0.7, 0.7});
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.3);
    Eigen::VectorXd lw = genuq::log_weights(vec1(0.0), 0.4, b, vec1(0.2), lik, sched);
    REQUIRE(lw.size() == 2);
    CHECK(lw(0) == doctest::Approx(lw(1)).epsilon(1e-14));
}

TEST_CASE("single-sample batch normalizes to weight 1") {
    MiniBatch b = batch_from({2.0}, {5.0});
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.1);
    Eigen::VectorXd lw = genuq::log_weights(vec1(0.3), 0.5, b, vec1(4.0), lik, sched);
    REQUIRE(lw.size() == 1);
    Eigen::VectorXd w = genuq::normalize_weights(lw);
    CHECK(w(0) == 1.0);
}

TEST_CASE("near t=1 the weights reduce to the likelihood term") {
    MiniBatch b = batch_from({-1.0, 0.5, 2.0}, {0.1, 0.4, 0.9});
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.25);
    Eigen::VectorXd y_star = vec1(0.3);
    Eigen::VectorXd w_full = genuq::normalize_weights(
        genuq::log_weights(vec1(0.8), 1.0 - 1e-9, b, y_star, lik, sched));
    Eigen::VectorXd w_lik = genuq::normalize_weights(
        genuq::log_likelihood_terms(b, y_star, lik));
    CHECK((w_full - w_lik).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("normalize_weights spec values") {
    Eigen::VectorXd two(2);
    two << 0.0, 0.0;
    Eigen::VectorXd w = genuq::normalize_weights(two);
    CHECK(w(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w(1) == doctest::Approx(0.5).epsilon(1e-14));

    Eigen::VectorXd four = Eigen::VectorXd::Constant(4, -123.75);
    Eigen::VectorXd w4 = genuq::normalize_weights(four);
    for (int i = 0; i < 4; ++i) CHECK(w4(i) == doctest::Approx(0.25).epsilon(1e-14));

    Eigen::VectorXd extreme(2);
    extreme << -1e6, 0.0;
    Eigen::VectorXd we = genuq::normalize_weights(extreme);
    CHECK(we.allFinite());
    CHECK(we(0) == doctest::Approx(0.0).epsilon(1e-200));
    CHECK(we(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_weights error paths") {
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd gone = Eigen::VectorXd::Constant(3, -inf);
    CHECK_THROWS_AS(genuq::normalize_weights(gone), genuq::numeric_error);

    Eigen::VectorXd nan_in(2);
    nan_in << 0.0, std::nan("");
    CHECK_THROWS_AS(genuq::normalize_weights(nan_in), genuq::numeric_error);

    Eigen::VectorXd pos_inf(2);
    pos_inf << 0.0, inf;
    CHECK_THROWS_AS(genuq::normalize_weights(pos_inf), genuq::numeric_error);

    CHECK_THROWS_AS(genuq::normalize_weights(Eigen::VectorXd()), genuq::data_error);
}

TEST_CASE("normalize_weights shift invariance and simplex") {
    genuq::RngStream rng(31, 0);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd lw(16);
        for (int i = 0; i < 16; ++i) lw(i) = 30.0 * rng.normal();
        Eigen::VectorXd w = genuq::normalize_weights(lw);
        CHECK(std::abs(w.sum() - 1.0) < 1e-12);
        CHECK((w.array() >= 0.0).all());
        CHECK((w.array() <= 1.0).all());
        const double shift = 100.0 * rng.normal();
        Eigen::VectorXd ws = genuq::normalize_weights(lw.array() + shift);
        CHECK((w - ws).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("point-mass batch reproduces the closed-form Gaussian score") {
    MiniBatch b = batch_from({0.8}, {1.3});
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.2);
    genuq::RngStream rng(5, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const double t = 0.001 + 0.998 * rng.uniform();
        const double z = 2.0 * rng.normal();
        auto r = genuq::score_estimate(vec1(z), t, b, vec1(1.0), lik, sched);
        const double expected = -(z - sched.gamma(t) * 0.8) / sched.rho2(t);
        CHECK(r.score(0) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(r.x_bar(0) == 0.8);
    }
}

// Marginalizing a standard Gaussian prior through the forward kernel gives
// Z_t ~ Normal(0, gamma^2 + rho^2); its score is -z/(gamma^2 + rho^2).
TEST_CASE("large-batch estimate converges to the Gaussian convolution score") {
    const int M = 100000;
    MiniBatch b;
    b.x.resize(M, 1);
    b.y.resize(M, 1);
    genuq::RngStream rng(99, 0);
    for (int i = 0; i < M; ++i) {
        b.x(i, 0) = rng.normal();
        b.y(i, 0) = 0.0;  // identical observations: likelihood term is uniform
    }
    b.finalize();
    Schedule sched;
    auto lik = LikelihoodModel::make_kernel(1.0);
    const double t = 0.5;
    const double denom = sched.gamma(t) * sched.gamma(t) + sched.rho2(t);
    for (double z : {-1.0, 0.0, 1.0}) {
        auto r = genuq::score_estimate(vec1(z), t, b, vec1(0.0), lik, sched);
        CHECK(std::abs(r.score(0) - (-z / denom)) < 0.02);
    }
}

TEST_CASE("weighted-mean form equals the term-by-term sum form") {
    genuq::RngStream rng(17, 0);
    Schedule sched;
    auto lik = LikelihoodModel::make_kernel(0.7);
    for (int rep = 0; rep < 20; ++rep) {
        const int N = 12;
        MiniBatch b;
        b.x.resize(N, 2);
        b.y.resize(N, 1);
        for (int i = 0; i < N; ++i) {
            b.x(i, 0) = rng.normal();
            b.x(i, 1) = rng.normal();
            b.y(i, 0) = rng.normal();
        }
        b.finalize();
        Eigen::VectorXd z(2);
        z << rng.normal(), rng.normal();
        const double t = 0.05 + 0.9 * rng.uniform();
        Eigen::VectorXd y_star = vec1(0.3 * rng.normal());

        auto r = genuq::score_estimate(z, t, b, y_star, lik, sched);
        Eigen::VectorXd w = genuq::normalize_weights(
            genuq::log_weights(z, t, b, y_star, lik, sched));
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
        for (int i = 0; i < N; ++i)
            sum += w(i) * (-(z - sched.gamma(t) * b.x.row(i).transpose()) / sched.rho2(t));
        CHECK((r.score - sum).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("weighted mean stays in the convex hull of the batch") {
    genuq::RngStream rng(23, 0);
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.5);
    for (int rep = 0; rep < 30; ++rep) {
        const int N = 8;
        MiniBatch b;
        b.x.resize(N, 3);
        b.y.resize(N, 2);
        for (int i = 0; i < N; ++i) {
            for (int c = 0; c < 3; ++c) b.x(i, c) = 2.0 * rng.normal();
            for (int c = 0; c < 2; ++c) b.y(i, c) = rng.normal();
        }
        b.finalize();
        Eigen::VectorXd z(3);
        z << rng.normal(), rng.normal(), rng.normal();
        Eigen::VectorXd y_star(2);
        y_star << rng.normal(), rng.normal();
        const double t = 0.01 + 0.98 * rng.uniform();
        auto r = genuq::score_estimate(z, t, b, y_star, lik, sched);
        for (int c = 0; c < 3; ++c) {
            CHECK(r.x_bar(c) >= b.x.col(c).minCoeff() - 1e-12);
            CHECK(r.x_bar(c) <= b.x.col(c).maxCoeff() + 1e-12);
        }
    }
}

TEST_CASE("kernel weights lose y-dependence as the bandwidth grows") {
    MiniBatch b = batch_from({-1.2, 0.1, 0.9, 2.2}, {0.3, 1.9, -0.5, 1.1});
    Schedule sched;
    auto wide = LikelihoodModel::make_kernel(1e8);
    Eigen::VectorXd z = vec1(0.4);
    const double t = 0.3;
    Eigen::VectorXd w_wide = genuq::normalize_weights(
        genuq::log_weights(z, t, b, vec1(0.7), wide, sched));

    // Likelihood-free reference: the Gaussian-kernel term alone.
    Eigen::VectorXd kernel_only(4);
    for (int i = 0; i < 4; ++i) {
        const double diff = z(0) - sched.gamma(t) * b.x(i, 0);
        kernel_only(i) = -diff * diff / (2.0 * sched.rho2(t));
    }
    Eigen::VectorXd w_free = genuq::normalize_weights(kernel_only);
    CHECK((w_wide - w_free).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("silverman bandwidth reference values") {
    CHECK(genuq::silverman_bandwidth(1, 256) == doctest::Approx(0.3494131).epsilon(1e-6));
    // q=1, n=1: (4/3)^(1/5) exactly
    CHECK(genuq::silverman_bandwidth(1, 1) ==
          doctest::Approx(std::pow(4.0 / 3.0, 0.2)).epsilon(1e-12));
    CHECK_THROWS_AS(genuq::silverman_bandwidth(0, 10), genuq::config_error);
}

TEST_CASE("cached-likelihood fast path matches the reference evaluation") {
    genuq::RngStream rng(41, 0);
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.4);
    const int N = 20;
    MiniBatch b;
    b.x.resize(N, 2);
    b.y.resize(N, 1);
    for (int i = 0; i < N; ++i) {
        b.x(i, 0) = rng.normal();
        b.x(i, 1) = rng.normal();
        b.y(i, 0) = rng.normal();
    }
    b.finalize();
    Eigen::VectorXd y_star = vec1(0.2);
    Eigen::VectorXd log_lik = genuq::log_likelihood_terms(b, y_star, lik);
    for (int rep = 0; rep < 25; ++rep) {
        Eigen::VectorXd z(2);
        z << rng.normal(), rng.normal();
        const double t = 0.01 + 0.98 * rng.uniform();
        auto slow = genuq::score_estimate(z, t, b, y_star, lik, sched);
        auto fast = genuq::score_estimate_with_lik(z, t, b, log_lik, sched);
        CHECK((slow.score - fast.score).lpNorm<Eigen::Infinity>() <
              1e-9 * (1.0 + slow.score.lpNorm<Eigen::Infinity>()));
        CHECK((slow.x_bar - fast.x_bar).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("constructor and argument validation") {
    CHECK_THROWS_AS(LikelihoodModel::make_explicit(0.0), genuq::config_error);
    CHECK_THROWS_AS(LikelihoodModel::make_explicit(-1.0), genuq::config_error);
    CHECK_THROWS_AS(LikelihoodModel::make_kernel(0.0), genuq::config_error);

    MiniBatch bad;
    bad.x.resize(2, 1);
    bad.y.resize(3, 1);
    CHECK_THROWS_AS(bad.finalize(), genuq::data_error);

    MiniBatch b = batch_from({1.0, 2.0}, {0.5, 0.6});
    Schedule sched;
    auto lik = LikelihoodModel::make_explicit(0.3);
    CHECK_THROWS_AS(genuq::log_weights(vec1(0.0), 1e-9, b, vec1(0.0), lik, sched),
                    genuq::numeric_error);
    CHECK_THROWS_AS(genuq::log_weights(vec1(0.0), 1.5, b, vec1(0.0), lik, sched),
                    genuq::numeric_error);
    Eigen::VectorXd z2(2);
    z2 << 0.0, 0.0;
    CHECK_THROWS_AS(genuq::log_weights(z2, 0.5, b, vec1(0.0), lik, sched),
                    genuq::data_error);
    Eigen::VectorXd y2(2);
    y2 << 0.0, 0.0;
    CHECK_THROWS_AS(genuq::log_weights(vec1(0.0), 0.5, b, y2, lik, sched),
                    genuq::data_error);
}

}  // TEST_SUITE
