#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "genuq/flow.hpp"
#include "genuq/network.hpp"

namespace genuq {

// Per-dimension summary of an ensemble: moments, interpolated quantiles,
// Freedman-Diaconis histogram (bin count clipped to [16, 128]).
struct DimensionSummary {
    double mean = 0.0;
    double std = 0.0;  // population
    double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
    std::vector<double> bin_edges;
    std::vector<std::size_t> bin_counts;

    nlohmann::json to_json() const;
};

struct PosteriorSummary {
    std::vector<DimensionSummary> dims;

    nlohmann::json to_json() const;
};

PosteriorSummary posterior_summary(const Eigen::MatrixXd& samples);  // K x d

struct EnsembleForecast {
    Eigen::VectorXd y_star;    // problem units
    Eigen::MatrixXd samples;   // K x d, problem units
    PosteriorSummary summary;

    nlohmann::json to_json() const;
};

// Standardizes y_star with the model's scaler, draws K reference vectors,
// runs the eval-mode generator, and inverse-scales the outputs.
EnsembleForecast ensemble(const GeneratorModel& model, const Eigen::VectorXd& y_star,
                          std::size_t K, std::uint64_t seed);

// Pooled 1 - SSE/SST over all entries, SST about the pooled truth mean.
double r2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);

// Per-dimension R^2 values (diagnostic companion to the pooled score).
Eigen::VectorXd r2_per_dimension(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);

struct ScatterResult {
    Eigen::MatrixXd truth;  // n x d
    Eigen::MatrixXd pred;   // n x d
    double r2 = 0.0;
};

// pred = G(y_m, z_m) per triple, eval mode; pooled R^2 against x_m.
ScatterResult validation_scatter(const GeneratorModel& model,
                                 const std::vector<LabeledTriple>& triples);

// Linear-interpolation empirical quantile of a sample vector.
double quantile(std::vector<double> values, double level);

// Local maxima of a Gaussian-kernel density estimate of the samples over
// [lo, hi], strongest first. Bandwidth is Silverman's rule floored at a
// grid-resolvable width; diagnostic for multi-modal ensembles.
std::vector<double> sample_modes(const std::vector<double>& samples, double lo, double hi);

}  // namespace genuq
