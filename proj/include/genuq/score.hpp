#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "genuq/schedule.hpp"

namespace genuq {

enum class LikelihoodMode { explicit_gaussian, observation_kernel };

// How p(y | x_n) inside the score weights is evaluated. Both scale
// parameters live in standardized-y units.
//
// explicit_gaussian treats the stored y_n as the noiseless forward output of
// x_n and evaluates Normal(y_star; y_n, sigma^2). observation_kernel
// replaces the unavailable likelihood with a Gaussian kernel of bandwidth h,
// the data-driven fallback when only noisy pairs exist.
struct LikelihoodModel {
    LikelihoodMode mode = LikelihoodMode::explicit_gaussian;
    double sigma = 0.0;
    double bandwidth = 0.0;

    static LikelihoodModel make_explicit(double sigma);
    static LikelihoodModel make_kernel(double bandwidth);

    // The active Gaussian width for the current mode.
    double scale() const;
};

// Default kernel bandwidth per standardized y-dimension (Silverman):
// (4/(q+2))^(1/(q+4)) * n^(-1/(q+4)).
double silverman_bandwidth(Eigen::Index q, std::size_t n);

// The dataset subset backing one score evaluation, standardized units.
// finalize() caches row norms used by the fast path and must be called after
// the matrices are filled.
struct MiniBatch {
    Eigen::MatrixXd x;  // N x d
    Eigen::MatrixXd y;  // N x q
    Eigen::VectorXd x_sqnorm;

    Eigen::Index N() const { return x.rows(); }
    void finalize();
};

// The y-dependent part of the log-weights. Constant along an ODE trajectory
// (it does not involve z or t), so callers integrating a trajectory compute
// it once and reuse it at every stage.
Eigen::VectorXd log_likelihood_terms(const MiniBatch& batch, const Eigen::VectorXd& y_star,
                                     const LikelihoodModel& lik);

// Unnormalized log-weights: -||z_t - gamma_t x_n||^2 / (2 rho_t^2) + log p(y_star | x_n).
// The prior factor is omitted as constant: the batch is drawn from the prior
// dataset itself, so prior density is already represented by sampling
// frequency.
Eigen::VectorXd log_weights(const Eigen::VectorXd& z_t, double t, const MiniBatch& batch,
                            const Eigen::VectorXd& y_star, const LikelihoodModel& lik,
                            const Schedule& sched);

// Softmax via logsumexp; sums to 1. Entries of -inf become zero weight;
// all entries -inf (or any NaN/+inf) is an error.
Eigen::VectorXd normalize_weights(const Eigen::VectorXd& log_w);

struct ScoreResult {
    Eigen::VectorXd score;  // d-vector
    Eigen::VectorXd x_bar;  // weighted batch mean, reused by the flow velocity
};

ScoreResult score_estimate(const Eigen::VectorXd& z_t, double t, const MiniBatch& batch,
                           const Eigen::VectorXd& y_star, const LikelihoodModel& lik,
                           const Schedule& sched);

// Hot path used by the integrator: identical result to score_estimate but
// takes the precomputed likelihood terms and skips re-deriving them.
ScoreResult score_estimate_with_lik(const Eigen::VectorXd& z_t, double t,
                                    const MiniBatch& batch, const Eigen::VectorXd& log_lik,
                                    const Schedule& sched);

}  // namespace genuq
