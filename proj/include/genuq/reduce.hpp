#pragma once

#include <string>

#include <Eigen/Core>

namespace genuq {

// Mean-centered principal component projection: field -> k latent
// coordinates and back. Stands in for nonlinear encoders when targets are
// high-dimensional fields; users with pre-encoded latents bypass it.
struct LinearReducer {
    Eigen::VectorXd mean;             // length D
    Eigen::MatrixXd basis;            // D x k, orthonormal columns
    Eigen::VectorXd explained_ratio;  // k, non-increasing, each in [0,1]

    Eigen::Index D() const { return mean.size(); }
    Eigen::Index k() const { return basis.cols(); }
};

// Top-k principal directions of the row-sample matrix. Deterministic sign
// convention: the largest-magnitude coordinate of each direction is
// positive. When D > n the eigenproblem is solved on the n x n Gram matrix
// instead of the D x D covariance.
LinearReducer fit_reducer(const Eigen::MatrixXd& fields, Eigen::Index k);

Eigen::VectorXd encode(const LinearReducer& r, const Eigen::VectorXd& field);
Eigen::VectorXd decode(const LinearReducer& r, const Eigen::VectorXd& latent);
Eigen::MatrixXd encode_rows(const LinearReducer& r, const Eigen::MatrixXd& fields);
Eigen::MatrixXd decode_rows(const LinearReducer& r, const Eigen::MatrixXd& latents);

// Persistence in the shared container format, magic "GQRD".
void save_reducer(const LinearReducer& r, const std::string& path);
LinearReducer load_reducer(const std::string& path);

}  // namespace genuq
