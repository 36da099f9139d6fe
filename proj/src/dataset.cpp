#include "genuq/dataset.hpp"

#include <cmath>

#include "genuq/csv.hpp"
#include "genuq/errors.hpp"
#include "genuq/rng.hpp"

namespace genuq {

void Dataset::validate() const {
    if (x_rows.rows() != y_rows.rows()) throw data_error("dataset: x/y row counts differ");
    if (J() < 2) throw data_error("dataset: needs at least 2 rows");
    if (d() < 1 || q() < 1) throw data_error("dataset: needs at least one x and one y column");
    if (!x_rows.allFinite() || !y_rows.allFinite())
        throw data_error("dataset: non-finite entries");
}

namespace {

Eigen::MatrixXd scale_apply(const Eigen::MatrixXd& rows, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& std) {
    if (rows.cols() != mean.size()) throw data_error("scaler: column count mismatch");
    return (rows.rowwise() - mean.transpose()).array().rowwise() /
           std.transpose().array();
}

Eigen::MatrixXd scale_invert(const Eigen::MatrixXd& rows, const Eigen::VectorXd& mean,
                             const Eigen::VectorXd& std) {
    if (rows.cols() != mean.size()) throw data_error("scaler: column count mismatch");
    return (rows.array().rowwise() * std.transpose().array()).matrix().rowwise() +
           mean.transpose();
}

void stats(const Eigen::MatrixXd& rows, Eigen::VectorXd& mean, Eigen::VectorXd& std) {
    const double n = static_cast<double>(rows.rows());
    mean = rows.colwise().mean();
    Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
    std = (centered.array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index c = 0; c < std.size(); ++c)
        if (std(c) == 0.0) std(c) = 1.0;
}

}  // namespace

Eigen::MatrixXd Scaler::apply_x(const Eigen::MatrixXd& rows) const {
    return scale_apply(rows, x_mean, x_std);
}
Eigen::MatrixXd Scaler::apply_y(const Eigen::MatrixXd& rows) const {
    return scale_apply(rows, y_mean, y_std);
}
Eigen::MatrixXd Scaler::invert_x(const Eigen::MatrixXd& rows) const {
    return scale_invert(rows, x_mean, x_std);
}
Eigen::MatrixXd Scaler::invert_y(const Eigen::MatrixXd& rows) const {
    return scale_invert(rows, y_mean, y_std);
}
Eigen::VectorXd Scaler::apply_y_vec(const Eigen::VectorXd& y) const {
    if (y.size() != y_mean.size()) throw data_error("scaler: y dimension mismatch");
    return ((y - y_mean).array() / y_std.array()).matrix();
}
Eigen::VectorXd Scaler::invert_x_vec(const Eigen::VectorXd& x) const {
    if (x.size() != x_mean.size()) throw data_error("scaler: x dimension mismatch");
    return ((x.array() * x_std.array()) + x_mean.array()).matrix();
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& x_cols,
                 const std::vector<std::string>& y_cols) {
    if (x_cols.empty() || y_cols.empty())
        throw config_error("load_csv: x and y column lists must be nonempty");
    CsvTable table = read_csv(path);

    auto col_index = [&](const std::string& name) -> Eigen::Index {
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (table.header[c] == name) return static_cast<Eigen::Index>(c);
        throw data_error(path + ": missing column '" + name + "'");
    };

    Dataset ds;
    ds.x_names = x_cols;
    ds.y_names = y_cols;
    ds.x_rows.resize(table.values.rows(), static_cast<Eigen::Index>(x_cols.size()));
    ds.y_rows.resize(table.values.rows(), static_cast<Eigen::Index>(y_cols.size()));
    for (std::size_t c = 0; c < x_cols.size(); ++c)
        ds.x_rows.col(static_cast<Eigen::Index>(c)) = table.values.col(col_index(x_cols[c]));
    for (std::size_t c = 0; c < y_cols.size(); ++c)
        ds.y_rows.col(static_cast<Eigen::Index>(c)) = table.values.col(col_index(y_cols[c]));
    ds.validate();
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::vector<std::string> header = ds.x_names;
    header.insert(header.end(), ds.y_names.begin(), ds.y_names.end());
    Eigen::MatrixXd all(ds.J(), ds.d() + ds.q());
    all << ds.x_rows, ds.y_rows;
    write_csv(path, header, all);
}

Scaler fit_scaler(const Dataset& ds) {
    ds.validate();
    Scaler sc;
    stats(ds.x_rows, sc.x_mean, sc.x_std);
    stats(ds.y_rows, sc.y_mean, sc.y_std);
    return sc;
}

Dataset standardize(const Dataset& ds, const Scaler& sc) {
    Dataset out = ds;
    out.x_rows = sc.apply_x(ds.x_rows);
    out.y_rows = sc.apply_y(ds.y_rows);
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    ds.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("split: test_fraction must lie in (0,1)");
    const auto J = static_cast<std::size_t>(ds.J());
    const auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(J) * test_fraction));
    if (n_test < 1) throw config_error("split: test split would be empty");
    if (J - n_test < 2) throw config_error("split: train split needs at least 2 rows");

    RngStream rng(seed, 0);
    auto perm = rng.permutation(J);
    std::vector<bool> in_test(J, false);
    for (std::size_t i = 0; i < n_test; ++i) in_test[perm[i]] = true;

    Dataset train, test;
    train.x_names = test.x_names = ds.x_names;
    train.y_names = test.y_names = ds.y_names;
    train.x_rows.resize(static_cast<Eigen::Index>(J - n_test), ds.d());
    train.y_rows.resize(static_cast<Eigen::Index>(J - n_test), ds.q());
    test.x_rows.resize(static_cast<Eigen::Index>(n_test), ds.d());
    test.y_rows.resize(static_cast<Eigen::Index>(n_test), ds.q());
    Eigen::Index tr = 0, te = 0;
    for (std::size_t j = 0; j < J; ++j) {
        if (in_test[j]) {
            test.x_rows.row(te) = ds.x_rows.row(static_cast<Eigen::Index>(j));
            test.y_rows.row(te) = ds.y_rows.row(static_cast<Eigen::Index>(j));
            ++te;
        } else {
            train.x_rows.row(tr) = ds.x_rows.row(static_cast<Eigen::Index>(j));
            train.y_rows.row(tr) = ds.y_rows.row(static_cast<Eigen::Index>(j));
            ++tr;
        }
    }
    return {std::move(train), std::move(test)};
}

Dataset make_bimodal(std::size_t n, double sigma, std::uint64_t seed) {
    if (n < 2) throw config_error("make_bimodal: n must be >= 2");
    if (sigma < 0) throw config_error("make_bimodal: sigma must be >= 0");
    Dataset ds;
    ds.x_names = {"x"};
    ds.y_names = {"y"};
    ds.x_rows.resize(static_cast<Eigen::Index>(n), 1);
    ds.y_rows.resize(static_cast<Eigen::Index>(n), 1);
    RngStream rng(seed, 0);
    for (std::size_t j = 0; j < n; ++j) {
        double x = rng.uniform(-2.0, 2.0);
        double eps = sigma > 0 ? sigma * rng.normal() : 0.0;
        ds.x_rows(static_cast<Eigen::Index>(j), 0) = x;
        ds.y_rows(static_cast<Eigen::Index>(j), 0) = x * x + eps;
    }
    return ds;
}

}  // namespace genuq
