#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "genuq/dataset.hpp"
#include "genuq/schedule.hpp"
#include "genuq/score.hpp"

namespace genuq {

// One training record: x_m is the reverse-ODE image of reference draw z_m
// conditioned on observation y_m. All standardized units.
struct LabeledTriple {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd z;
};

struct FlowConfig {
    int n_steps = 100;
    std::size_t batch_size = 256;  // score mini-batch N; 0 means the full dataset
    std::size_t n_triples = 20000;
    std::uint64_t seed = 0;

    void validate() const;
};

// Probability-flow velocity in its algebraically collapsed form
// (z - (1+t) x_bar) / (2t). Finite on [t_min, 1] including t = 1.
Eigen::VectorXd velocity(const Eigen::VectorXd& z_t, double t, const Eigen::VectorXd& x_bar,
                         const Schedule& sched);

// Integrates the reverse ODE from t = 1 to t_min with classical RK4 on a
// sqrt(t)-uniform grid (the velocity scales like 1/t near t_min; stepping
// uniformly in s = sqrt(t) equidistributes the local error). The returned
// Z_0 is the denoised readout x_bar(z(t_min), t_min) rather than the raw
// state: the raw state still carries the O(sqrt(t_min)) remnant of the
// reference draw, which the readout removes exactly in the point-mass limit.
// The trajectory's mini-batch is fixed across all stages.
Eigen::VectorXd integrate(const Eigen::VectorXd& z1, const Eigen::VectorXd& y_star,
                          const MiniBatch& batch, const LikelihoodModel& lik,
                          const Schedule& sched, int n_steps);

// Mass-produces labeled triples. Per index m: draw a conditioning row
// uniformly from ds_std, draw z ~ Normal(0, I_d), draw the trajectory's
// mini-batch, integrate. Each trajectory consumes its own RNG stream keyed
// by (seed, m), so the output is byte-identical for any worker count.
// Failed trajectories are dropped with a diagnostic; more than 1% failures
// aborts.
std::vector<LabeledTriple> generate_labels(const Dataset& ds_std, const LikelihoodModel& lik,
                                           const Schedule& sched, const FlowConfig& cfg,
                                           int workers);

// Triple persistence: columns x_0.., y_0.., z_0.. in standardized space.
void write_triples_csv(const std::string& path, const std::vector<LabeledTriple>& triples);
std::vector<LabeledTriple> read_triples_csv(const std::string& path);

}  // namespace genuq
