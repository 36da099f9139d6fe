#include "genuq/score.hpp"

#include <cmath>
#include <limits>

#include "genuq/errors.hpp"

namespace genuq {

LikelihoodModel LikelihoodModel::make_explicit(double sigma) {
    if (!(sigma > 0)) throw config_error("likelihood: sigma must be > 0");
    LikelihoodModel m;
    m.mode = LikelihoodMode::explicit_gaussian;
    m.sigma = sigma;
    return m;
}

LikelihoodModel LikelihoodModel::make_kernel(double bandwidth) {
    if (!(bandwidth > 0)) throw config_error("likelihood: bandwidth must be > 0");
    LikelihoodModel m;
    m.mode = LikelihoodMode::observation_kernel;
    m.bandwidth = bandwidth;
    return m;
}

double LikelihoodModel::scale() const {
    return mode == LikelihoodMode::explicit_gaussian ? sigma : bandwidth;
}

double silverman_bandwidth(Eigen::Index q, std::size_t n) {
    if (q < 1 || n < 1) throw config_error("silverman_bandwidth: q and n must be >= 1");
    const double qd = static_cast<double>(q);
    const double expo = 1.0 / (qd + 4.0);
    return std::pow(4.0 / (qd + 2.0), expo) * std::pow(static_cast<double>(n), -expo);
}

void MiniBatch::finalize() {
    if (x.rows() != y.rows()) throw data_error("minibatch: x/y row counts differ");
    if (x.rows() < 1) throw data_error("minibatch: needs at least one row");
    x_sqnorm = x.rowwise().squaredNorm();
}

namespace {

void check_t(double t, const Schedule& sched) {
    // The readout evaluates at exactly t_min; allow rounding slack there.
    if (!(t > 0.0 && t <= 1.0 && t >= sched.t_min * (1.0 - 1e-9)))
        throw numeric_error("score: t outside [t_min, 1]");
}

}  // namespace

Eigen::VectorXd log_likelihood_terms(const MiniBatch& batch, const Eigen::VectorXd& y_star,
                                     const LikelihoodModel& lik) {
    if (y_star.size() != batch.y.cols())
        throw data_error("score: y_star dimension mismatch");
    const double s = lik.scale();
    if (!(s > 0)) throw config_error("score: likelihood scale must be > 0");
    return (batch.y.rowwise() - y_star.transpose()).rowwise().squaredNorm() *
           (-1.0 / (2.0 * s * s));
}

Eigen::VectorXd log_weights(const Eigen::VectorXd& z_t, double t, const MiniBatch& batch,
                            const Eigen::VectorXd& y_star, const LikelihoodModel& lik,
                            const Schedule& sched) {
    check_t(t, sched);
    if (z_t.size() != batch.x.cols()) throw data_error("score: z_t dimension mismatch");
    const double gamma = sched.gamma(t);
    const double rho2 = sched.rho2(t);
    Eigen::VectorXd kernel =
        ((batch.x * gamma).rowwise() - z_t.transpose()).rowwise().squaredNorm() *
        (-1.0 / (2.0 * rho2));
    return kernel + log_likelihood_terms(batch, y_star, lik);
}

Eigen::VectorXd normalize_weights(const Eigen::VectorXd& log_w) {
    if (log_w.size() < 1) throw data_error("normalize_weights: empty input");
    const double inf = std::numeric_limits<double>::infinity();
    // maxCoeff never selects NaN (all comparisons fail), so any NaN survives
    // into the <= sweep; +inf surfaces as a non-finite max.
    const double m = log_w.maxCoeff();
    if (m == inf || std::isnan(m) || !(log_w.array() <= m).all())
        throw numeric_error("normalize_weights: non-finite log-weight");
    if (m == -inf)
        throw numeric_error(
            "normalize_weights: all weights vanished; widen the likelihood bandwidth");
    // Entries more than 680 nats below the peak hold < 1e-295 of the mass,
    // invisible at double precision; flooring them keeps exp() and every
    // downstream pass out of the subnormal range and its per-op microcode
    // stalls, which otherwise dominate tight-likelihood batches.
    Eigen::VectorXd w = (log_w.array() - m).max(-680.0).exp();
    return w / w.sum();
}

namespace {

ScoreResult assemble(const Eigen::VectorXd& z_t, double t, const MiniBatch& batch,
                     const Eigen::VectorXd& log_w, const Schedule& sched) {
    Eigen::VectorXd w = normalize_weights(log_w);
    ScoreResult r;
    r.x_bar = batch.x.transpose() * w;
    r.score = -(z_t - sched.gamma(t) * r.x_bar) / sched.rho2(t);
    return r;
}

}  // namespace

ScoreResult score_estimate(const Eigen::VectorXd& z_t, double t, const MiniBatch& batch,
                           const Eigen::VectorXd& y_star, const LikelihoodModel& lik,
                           const Schedule& sched) {
    return assemble(z_t, t, batch, log_weights(z_t, t, batch, y_star, lik, sched), sched);
}

ScoreResult score_estimate_with_lik(const Eigen::VectorXd& z_t, double t,
                                    const MiniBatch& batch, const Eigen::VectorXd& log_lik,
                                    const Schedule& sched) {
    check_t(t, sched);
    if (z_t.size() != batch.x.cols()) throw data_error("score: z_t dimension mismatch");
    if (log_lik.size() != batch.N()) throw data_error("score: log_lik length mismatch");
    const double gamma = sched.gamma(t);
    const double rho2 = sched.rho2(t);
    // ||z - g x_n||^2 expanded through the cached row norms; one N x d GEMV
    // instead of materializing the N x d difference.
    Eigen::VectorXd xz = batch.x * z_t;
    const double z2 = z_t.squaredNorm();
    Eigen::VectorXd log_w =
        log_lik.array() +
        (2.0 * gamma * xz.array() - gamma * gamma * batch.x_sqnorm.array() - z2) /
            (2.0 * rho2);
    return assemble(z_t, t, batch, log_w, sched);
}

}  // namespace genuq
