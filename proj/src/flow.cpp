#include "genuq/flow.hpp"

#include <atomic>
#include <cmath>
#include <mutex>

#include "genuq/csv.hpp"
#include "genuq/errors.hpp"
#include "genuq/rng.hpp"
#include "genuq/threads.hpp"

namespace genuq {

void FlowConfig::validate() const {
    if (n_steps < 2) throw config_error("flow: n_steps must be >= 2");
    if (n_triples < 1) throw config_error("flow: n_triples must be >= 1");
}

Eigen::VectorXd velocity(const Eigen::VectorXd& z_t, double t, const Eigen::VectorXd& x_bar,
                         const Schedule& sched) {
    if (!(t >= sched.t_min * (1.0 - 1e-9) && t <= 1.0))
        throw numeric_error("velocity: t outside [t_min, 1]");
    if (z_t.size() != x_bar.size()) throw data_error("velocity: dimension mismatch");
    return (z_t - (1.0 + t) * x_bar) / (2.0 * t);
}

Eigen::VectorXd integrate(const Eigen::VectorXd& z1, const Eigen::VectorXd& y_star,
                          const MiniBatch& batch, const LikelihoodModel& lik,
                          const Schedule& sched, int n_steps) {
    if (n_steps < 2) throw config_error("integrate: n_steps must be >= 2");
    if (!z1.allFinite()) throw numeric_error("integrate: non-finite initial state");
    if (z1.size() != batch.x.cols()) throw data_error("integrate: z dimension mismatch");

    const Eigen::VectorXd log_lik = log_likelihood_terms(batch, y_star, lik);
    const double s_min = std::sqrt(sched.t_min);

    // dz/ds for z(s) := z(t = s^2); equals 2s * velocity(z, s^2).
    auto f = [&](const Eigen::VectorXd& z, double s) -> Eigen::VectorXd {
        ScoreResult r = score_estimate_with_lik(z, s * s, batch, log_lik, sched);
        return (z - (1.0 + s * s) * r.x_bar) / s;
    };

    Eigen::VectorXd z = z1;
    for (int k = 0; k < n_steps; ++k) {
        const double sa = 1.0 + (s_min - 1.0) * (static_cast<double>(k) / n_steps);
        const double sb = 1.0 + (s_min - 1.0) * (static_cast<double>(k + 1) / n_steps);
        const double h = sb - sa;
        Eigen::VectorXd k1 = f(z, sa);
        Eigen::VectorXd k2 = f(z + 0.5 * h * k1, sa + 0.5 * h);
        Eigen::VectorXd k3 = f(z + 0.5 * h * k2, sa + 0.5 * h);
        Eigen::VectorXd k4 = f(z + h * k3, sb);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite())
            throw numeric_error("integrate: non-finite state at step " + std::to_string(k + 1));
    }
    return score_estimate_with_lik(z, sched.t_min, batch, log_lik, sched).x_bar;
}

std::vector<LabeledTriple> generate_labels(const Dataset& ds_std, const LikelihoodModel& lik,
                                           const Schedule& sched, const FlowConfig& cfg,
                                           int workers) {
    cfg.validate();
    ds_std.validate();
    const auto J = static_cast<std::size_t>(ds_std.J());
    const auto d = ds_std.d();
    std::size_t N = cfg.batch_size == 0 ? J : std::min(cfg.batch_size, J);
    const bool full_batch = N == J;
    const std::size_t M = cfg.n_triples;

    // With N = J the subset draw is skipped and one shared batch serves all
    // trajectories.
    MiniBatch shared;
    if (full_batch) {
        shared.x = ds_std.x_rows;
        shared.y = ds_std.y_rows;
        shared.finalize();
    }

    std::vector<LabeledTriple> out(M);
    std::vector<char> ok(M, 0);
    std::atomic<std::size_t> failures{0};
    std::string first_failure;
    std::mutex failure_mutex;

    parallel_for(M, workers, [&](std::size_t m) {
        RngStream rng(cfg.seed, m);
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(J));
        LabeledTriple trip;
        trip.y = ds_std.y_rows.row(static_cast<Eigen::Index>(j)).transpose();
        trip.z.resize(d);
        for (Eigen::Index i = 0; i < d; ++i) trip.z(i) = rng.normal();

        const MiniBatch* batch = &shared;
        MiniBatch local;
        if (!full_batch) {
            auto idx = rng.subset(J, N);
            local.x.resize(static_cast<Eigen::Index>(N), ds_std.d());
            local.y.resize(static_cast<Eigen::Index>(N), ds_std.q());
            for (std::size_t i = 0; i < N; ++i) {
                local.x.row(static_cast<Eigen::Index>(i)) =
                    ds_std.x_rows.row(static_cast<Eigen::Index>(idx[i]));
                local.y.row(static_cast<Eigen::Index>(i)) =
                    ds_std.y_rows.row(static_cast<Eigen::Index>(idx[i]));
            }
            local.finalize();
            batch = &local;
        }

        try {
            trip.x = integrate(trip.z, trip.y, *batch, lik, sched, cfg.n_steps);
            out[m] = std::move(trip);
            ok[m] = 1;
        } catch (const error& e) {
            failures.fetch_add(1);
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (first_failure.empty())
                first_failure = "triple " + std::to_string(m) + ": " + e.what();
        }
    });

    const std::size_t nfail = failures.load();
    if (nfail * 100 > M) {
        throw numeric_error("generate_labels: " + std::to_string(nfail) + "/" +
                            std::to_string(M) + " trajectories failed (first: " +
                            first_failure + ")");
    }
    if (nfail > 0) {
        std::vector<LabeledTriple> kept;
        kept.reserve(M - nfail);
        for (std::size_t m = 0; m < M; ++m)
            if (ok[m]) kept.push_back(std::move(out[m]));
        return kept;
    }
    return out;
}

void write_triples_csv(const std::string& path, const std::vector<LabeledTriple>& triples) {
    if (triples.empty()) throw data_error("write_triples_csv: no triples");
    const auto d = triples[0].x.size();
    const auto q = triples[0].y.size();
    std::vector<std::string> header;
    for (Eigen::Index i = 0; i < d; ++i) header.push_back("x_" + std::to_string(i));
    for (Eigen::Index i = 0; i < q; ++i) header.push_back("y_" + std::to_string(i));
    for (Eigen::Index i = 0; i < d; ++i) header.push_back("z_" + std::to_string(i));
    Eigen::MatrixXd values(static_cast<Eigen::Index>(triples.size()), 2 * d + q);
    for (std::size_t r = 0; r < triples.size(); ++r) {
        const auto& t = triples[r];
        if (t.x.size() != d || t.y.size() != q || t.z.size() != d)
            throw data_error("write_triples_csv: inconsistent triple dimensions");
        values.row(static_cast<Eigen::Index>(r)) << t.x.transpose(), t.y.transpose(),
            t.z.transpose();
    }
    write_csv(path, header, values);
}

std::vector<LabeledTriple> read_triples_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    Eigen::Index d = 0, q = 0;
    for (const auto& name : table.header) {
        if (name.rfind("x_", 0) == 0) ++d;
        else if (name.rfind("y_", 0) == 0) ++q;
    }
    if (d < 1 || q < 1 || table.header.size() != static_cast<std::size_t>(2 * d + q))
        throw data_error(path + ": not a triples file (expected x_*, y_*, z_* columns)");
    std::vector<LabeledTriple> triples(static_cast<std::size_t>(table.values.rows()));
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        auto& t = triples[static_cast<std::size_t>(r)];
        t.x = table.values.row(r).segment(0, d).transpose();
        t.y = table.values.row(r).segment(d, q).transpose();
        t.z = table.values.row(r).segment(d + q, d).transpose();
    }
    return triples;
}

}  // namespace genuq
