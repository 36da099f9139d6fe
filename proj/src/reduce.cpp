#include "genuq/reduce.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "genuq/container.hpp"
#include "genuq/errors.hpp"

namespace genuq {

namespace {

// Flip each column so its largest-magnitude coordinate is positive.
void fix_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index imax = 0;
        basis.col(c).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, c) < 0) basis.col(c) = -basis.col(c);
    }
}

}  // namespace

LinearReducer fit_reducer(const Eigen::MatrixXd& fields, Eigen::Index k) {
    const Eigen::Index n = fields.rows();
    const Eigen::Index D = fields.cols();
    if (n < 2) throw data_error("reduce: needs at least 2 rows");
    if (k < 1 || k > std::min(n, D))
        throw config_error("reduce: k must lie in [1, min(n, D)]");
    if (!fields.allFinite()) throw data_error("reduce: non-finite entries");

    LinearReducer r;
    r.mean = fields.colwise().mean();
    Eigen::MatrixXd centered = fields.rowwise() - r.mean.transpose();
    const double total_var = centered.squaredNorm() / static_cast<double>(n);

    Eigen::VectorXd top_eigs(k);
    if (D <= n) {
        Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success) throw numeric_error("reduce: eigendecomposition failed");
        r.basis.resize(D, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            r.basis.col(i) = es.eigenvectors().col(D - 1 - i);
            top_eigs(i) = std::max(0.0, es.eigenvalues()(D - 1 - i));
        }
    } else {
        // Gram trick: eigenvectors u of (C C^T)/n give directions C^T u.
        Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success) throw numeric_error("reduce: eigendecomposition failed");
        r.basis.resize(D, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double lambda = std::max(0.0, es.eigenvalues()(n - 1 - i));
            Eigen::VectorXd dir = centered.transpose() * es.eigenvectors().col(n - 1 - i);
            const double norm = dir.norm();
            if (norm < 1e-12 * std::sqrt(total_var + 1.0))
                throw numeric_error("reduce: requested k exceeds the data rank");
            r.basis.col(i) = dir / norm;
            top_eigs(i) = lambda;
        }
    }
    fix_signs(r.basis);
    r.explained_ratio =
        total_var > 0 ? (top_eigs / total_var).eval() : Eigen::VectorXd::Zero(k).eval();
    return r;
}

Eigen::VectorXd encode(const LinearReducer& r, const Eigen::VectorXd& field) {
    if (field.size() != r.D()) throw data_error("encode: field dimension mismatch");
    return r.basis.transpose() * (field - r.mean);
}

Eigen::VectorXd decode(const LinearReducer& r, const Eigen::VectorXd& latent) {
    if (latent.size() != r.k()) throw data_error("decode: latent dimension mismatch");
    return r.mean + r.basis * latent;
}

Eigen::MatrixXd encode_rows(const LinearReducer& r, const Eigen::MatrixXd& fields) {
    if (fields.cols() != r.D()) throw data_error("encode: field dimension mismatch");
    return (fields.rowwise() - r.mean.transpose()) * r.basis;
}

Eigen::MatrixXd decode_rows(const LinearReducer& r, const Eigen::MatrixXd& latents) {
    if (latents.cols() != r.k()) throw data_error("decode: latent dimension mismatch");
    return (latents * r.basis.transpose()).rowwise() + r.mean.transpose();
}

namespace {
constexpr const char* kReducerMagic = "GQRD";
}

void save_reducer(const LinearReducer& r, const std::string& path) {
    Container c;
    c.header["format"] = "gqrd";
    c.header["dim"] = r.D();
    c.header["latent_dim"] = r.k();

    ContainerTensor mean{"mean", {static_cast<std::size_t>(r.mean.size())}, {}};
    mean.data.assign(r.mean.data(), r.mean.data() + r.mean.size());
    ContainerTensor basis{"basis",
                          {static_cast<std::size_t>(r.basis.rows()),
                           static_cast<std::size_t>(r.basis.cols())},
                          {}};
    basis.data.reserve(static_cast<std::size_t>(r.basis.size()));
    for (Eigen::Index row = 0; row < r.basis.rows(); ++row)
        for (Eigen::Index col = 0; col < r.basis.cols(); ++col)
            basis.data.push_back(r.basis(row, col));
    ContainerTensor evr{"explained_ratio",
                        {static_cast<std::size_t>(r.explained_ratio.size())}, {}};
    evr.data.assign(r.explained_ratio.data(),
                    r.explained_ratio.data() + r.explained_ratio.size());
    c.tensors = {std::move(mean), std::move(basis), std::move(evr)};
    write_container(path, kReducerMagic, c);
}

LinearReducer load_reducer(const std::string& path) {
    Container c = read_container(path, kReducerMagic);
    LinearReducer r;
    for (const auto& t : c.tensors) {
        if (t.name == "mean") {
            r.mean = Eigen::Map<const Eigen::VectorXd>(t.data.data(),
                                                       static_cast<Eigen::Index>(t.data.size()));
        } else if (t.name == "basis") {
            if (t.shape.size() != 2) throw data_error(path + ": basis tensor is not a matrix");
            r.basis.resize(static_cast<Eigen::Index>(t.shape[0]),
                           static_cast<Eigen::Index>(t.shape[1]));
            std::size_t i = 0;
            for (Eigen::Index row = 0; row < r.basis.rows(); ++row)
                for (Eigen::Index col = 0; col < r.basis.cols(); ++col)
                    r.basis(row, col) = t.data[i++];
        } else if (t.name == "explained_ratio") {
            r.explained_ratio = Eigen::Map<const Eigen::VectorXd>(
                t.data.data(), static_cast<Eigen::Index>(t.data.size()));
        }
    }
    if (r.mean.size() == 0 || r.basis.size() == 0)
        throw data_error(path + ": reducer file missing tensors");
    return r;
}

}  // namespace genuq
