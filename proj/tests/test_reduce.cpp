#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "genuq/container.hpp"
#include "genuq/errors.hpp"
#include "genuq/reduce.hpp"
#include "genuq/rng.hpp"
#include "helpers.hpp"

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    genuq::RngStream rng(seed, 0);
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = rng.normal();
    return m;
}

// Mean reconstruction error of the training rows under the fitted reducer.
double mean_sse(const genuq::LinearReducer& r, const Eigen::MatrixXd& fields) {
    Eigen::MatrixXd rec = genuq::decode_rows(r, genuq::encode_rows(r, fields));
    return (rec - fields).squaredNorm() / static_cast<double>(fields.rows());
}

double total_variance(const Eigen::MatrixXd& fields) {
    Eigen::RowVectorXd mu = fields.colwise().mean();
    return (fields.rowwise() - mu).squaredNorm() / static_cast<double>(fields.rows());
}

}  // namespace

TEST_SUITE("reduce") {

TEST_CASE("recovers a two-dimensional plane exactly") {
    const Eigen::Index D = 6, n = 40;
    Eigen::VectorXd m(D), u = Eigen::VectorXd::Zero(D), v = Eigen::VectorXd::Zero(D);
    m << 1, 2, 3, 4, 5, 6;
    u(0) = 1.0;
    v(1) = v(2) = 1.0 / std::sqrt(2.0);
    genuq::RngStream rng(11, 0);
    Eigen::MatrixXd fields(n, D);
    for (Eigen::Index i = 0; i < n; ++i)
        fields.row(i) = (m + 2.0 * rng.normal() * u + rng.normal() * v).transpose();

    auto r = genuq::fit_reducer(fields, 2);
    CHECK((genuq::decode_rows(r, genuq::encode_rows(r, fields)) - fields)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK(r.explained_ratio.sum() == doctest::Approx(1.0).epsilon(1e-10));

    // Basis columns stay inside span{u, v}.
    Eigen::MatrixXd Q(D, 2);
    Q.col(0) = u;
    Q.col(1) = v;
    Eigen::MatrixXd resid = r.basis - Q * (Q.transpose() * r.basis);
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("k equal to D reproduces every field") {
    Eigen::MatrixXd fields = gaussian_matrix(60, 3, 12);
    auto r = genuq::fit_reducer(fields, 3);
    CHECK(mean_sse(r, fields) < 1e-18);
    CHECK(r.explained_ratio.sum() == doctest::Approx(1.0).epsilon(1e-10));
    Eigen::MatrixXd gram = r.basis.transpose() * r.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("isotropic data splits variance evenly") {
    Eigen::MatrixXd fields = gaussian_matrix(4000, 5, 13);
    auto r = genuq::fit_reducer(fields, 2);
    CHECK(std::abs(r.explained_ratio.sum() - 0.4) < 0.05);
    CHECK(r.explained_ratio(0) >= r.explained_ratio(1));
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(r.explained_ratio(i) >= 0.0);
        CHECK(r.explained_ratio(i) <= 1.0);
    }
}

TEST_CASE("explained ratio matches the reconstruction deficit") {
    // mean SSE / n == total_var * (1 - sum EVR) for exact principal bases.
    Eigen::MatrixXd aniso = gaussian_matrix(200, 5, 14);
    aniso.col(0) *= 3.0;
    aniso.col(1) *= 2.0;
    aniso.col(3) *= 0.5;
    aniso.col(4) *= 0.1;
    const double tv = total_variance(aniso);
    for (Eigen::Index k : {1, 2, 4}) {
        auto r = genuq::fit_reducer(aniso, k);
        const double expect = tv * (1.0 - r.explained_ratio.sum());
        CHECK(mean_sse(r, aniso) == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("principal basis beats random orthonormal projections") {
    Eigen::MatrixXd aniso = gaussian_matrix(200, 5, 15);
    aniso.col(0) *= 3.0;
    aniso.col(1) *= 2.0;
    auto r = genuq::fit_reducer(aniso, 2);
    const double best = mean_sse(r, aniso);
    Eigen::RowVectorXd mu = aniso.colwise().mean();
    Eigen::MatrixXd centered = aniso.rowwise() - mu;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Eigen::MatrixXd raw = gaussian_matrix(5, 2, 100 + s);
        Eigen::MatrixXd Q =
            Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
            Eigen::MatrixXd::Identity(5, 2);
        const double sse =
            (centered - centered * Q * Q.transpose()).squaredNorm() / 200.0;
        CHECK(sse >= best - 1e-9 * (1.0 + best));
    }
}

TEST_CASE("reconstruction error never grows with k") {
    Eigen::MatrixXd aniso = gaussian_matrix(150, 5, 16);
    aniso.col(0) *= 3.0;
    aniso.col(2) *= 2.0;
    double prev = 1e300;
    for (Eigen::Index k = 1; k <= 5; ++k) {
        const double sse = mean_sse(genuq::fit_reducer(aniso, k), aniso);
        CHECK(sse <= prev + 1e-9);
        prev = sse;
    }
    CHECK(prev < 1e-18);
}

TEST_CASE("encode of the stored mean is the zero latent") {
    Eigen::MatrixXd fields = gaussian_matrix(30, 4, 17);
    auto r = genuq::fit_reducer(fields, 2);
    CHECK(genuq::encode(r, r.mean).isZero(0.0));

    // Projection is idempotent.
    Eigen::VectorXd x = fields.row(3).transpose();
    Eigen::VectorXd p1 = genuq::decode(r, genuq::encode(r, x));
    Eigen::VectorXd p2 = genuq::decode(r, genuq::encode(r, p1));
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-9);

    // Row-batch forms agree with per-vector forms.
    Eigen::MatrixXd lat = genuq::encode_rows(r, fields);
    CHECK((lat.row(3).transpose() - genuq::encode(r, x)).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXd rec = genuq::decode_rows(r, lat);
    CHECK((rec.row(3).transpose() - genuq::decode(r, lat.row(3).transpose()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("wide fields use the gram path with the same guarantees") {
    Eigen::MatrixXd fields = gaussian_matrix(12, 40, 18);
    auto r = genuq::fit_reducer(fields, 4);
    Eigen::MatrixXd gram = r.basis.transpose() * r.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
    const double tv = total_variance(fields);
    CHECK(mean_sse(r, fields) ==
          doctest::Approx(tv * (1.0 - r.explained_ratio.sum())).epsilon(1e-8));
    for (Eigen::Index c = 0; c < 4; ++c) {
        Eigen::Index imax = 0;
        r.basis.col(c).cwiseAbs().maxCoeff(&imax);
        CHECK(r.basis(imax, c) > 0.0);
    }
    CHECK(r.explained_ratio(0) >= r.explained_ratio(3));
}

TEST_CASE("rank-deficient wide data rejects oversized k") {
    // Rank-2 plane in 50 dims from 10 samples: directions 3..5 do not exist.
    genuq::RngStream rng(19, 0);
    Eigen::MatrixXd fields(10, 50);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(50), v = Eigen::VectorXd::Zero(50);
    u(0) = 1.0;
    v(7) = 1.0;
    for (Eigen::Index i = 0; i < 10; ++i)
        fields.row(i) = (rng.normal() * u + rng.normal() * v).transpose();
    CHECK_NOTHROW(genuq::fit_reducer(fields, 2));
    CHECK_THROWS_AS(genuq::fit_reducer(fields, 5), genuq::numeric_error);
}

TEST_CASE("input validation") {
    Eigen::MatrixXd fields = gaussian_matrix(20, 4, 20);
    CHECK_THROWS_AS(genuq::fit_reducer(fields, 0), genuq::config_error);
    CHECK_THROWS_AS(genuq::fit_reducer(fields, 5), genuq::config_error);
    CHECK_THROWS_AS(genuq::fit_reducer(gaussian_matrix(1, 4, 21), 1), genuq::data_error);
    Eigen::MatrixXd bad = fields;
    bad(3, 2) = std::nan("");
    CHECK_THROWS_AS(genuq::fit_reducer(bad, 2), genuq::data_error);

    auto r = genuq::fit_reducer(fields, 2);
    CHECK_THROWS_AS(genuq::encode(r, Eigen::VectorXd::Zero(3)), genuq::data_error);
    CHECK_THROWS_AS(genuq::decode(r, Eigen::VectorXd::Zero(3)), genuq::data_error);
    CHECK_THROWS_AS(genuq::encode_rows(r, gaussian_matrix(5, 3, 22)), genuq::data_error);
    CHECK_THROWS_AS(genuq::decode_rows(r, gaussian_matrix(5, 3, 23)), genuq::data_error);
}

TEST_CASE("save and load round trip is exact") {
    testutil::TempDir tmp("reduce");
    Eigen::MatrixXd fields = gaussian_matrix(25, 6, 24);
    auto r = genuq::fit_reducer(fields, 3);
    const std::string path = tmp.file("reducer.gqrd");
    genuq::save_reducer(r, path);
    auto back = genuq::load_reducer(path);
    CHECK(back.mean == r.mean);
    CHECK(back.basis == r.basis);
    CHECK(back.explained_ratio == r.explained_ratio);

    Eigen::VectorXd x = fields.row(4).transpose();
    CHECK(genuq::encode(back, x) == genuq::encode(r, x));
}

TEST_CASE("load rejects foreign or incomplete files") {
    testutil::TempDir tmp("reduce_bad");
    const std::string wrong = tmp.file("model.bin");
    genuq::Container c;
    c.header["format"] = "other";
    genuq::write_container(wrong, "GQUQ", c);
    CHECK_THROWS_AS(genuq::load_reducer(wrong), genuq::data_error);

    const std::string empty = tmp.file("empty.gqrd");
    genuq::Container c2;
    c2.header["format"] = "gqrd";
    genuq::write_container(empty, "GQRD", c2);
    CHECK_THROWS_AS(genuq::load_reducer(empty), genuq::data_error);

    CHECK_THROWS_AS(genuq::load_reducer(tmp.file("missing.gqrd")), genuq::data_error);
}

}  // TEST_SUITE
