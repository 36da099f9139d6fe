#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace genuq {

// Paired samples (x in R^d, y in R^q) in problem units.
struct Dataset {
    Eigen::MatrixXd x_rows;  // J x d
    Eigen::MatrixXd y_rows;  // J x q
    std::vector<std::string> x_names;
    std::vector<std::string> y_names;

    Eigen::Index J() const { return x_rows.rows(); }
    Eigen::Index d() const { return x_rows.cols(); }
    Eigen::Index q() const { return y_rows.cols(); }

    // Throws unless row counts match, J >= 2, d,q >= 1, all entries finite.
    void validate() const;
};

// Per-column standardization statistics, problem units. Population (1/J)
// standard deviation; constant columns get std forced to 1 so they pass
// through unchanged.
struct Scaler {
    Eigen::VectorXd x_mean, x_std;  // length d
    Eigen::VectorXd y_mean, y_std;  // length q

    Eigen::MatrixXd apply_x(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd apply_y(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd invert_x(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd invert_y(const Eigen::MatrixXd& rows) const;
    Eigen::VectorXd apply_y_vec(const Eigen::VectorXd& y) const;
    Eigen::VectorXd invert_x_vec(const Eigen::VectorXd& x) const;
};

// Reads the named columns from a headered CSV.
Dataset load_csv(const std::string& path, const std::vector<std::string>& x_cols,
                 const std::vector<std::string>& y_cols);

// Writes x columns then y columns under their stored names.
void write_csv(const Dataset& ds, const std::string& path);

Scaler fit_scaler(const Dataset& ds);

// Returns the dataset expressed in standardized units.
Dataset standardize(const Dataset& ds, const Scaler& sc);

// Disjoint row partition via seeded uniform shuffle; |test| = round(J * f).
// Both halves keep original row order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Benchmark generator: x ~ Uniform[-2,2], y = x^2 + Normal(0, sigma^2).
Dataset make_bimodal(std::size_t n, double sigma, std::uint64_t seed);

}  // namespace genuq
