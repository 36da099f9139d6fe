#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genuq/dataset.hpp"

namespace genuq {

// Adaptive Simpson integral of fn over [a, b]. The interval is pre-split
// into uniform panels before recursion so narrow features (the bimodal
// reference at sigma = 0.01 is two spikes of width ~5e-3) cannot slip
// between probe points.
double integrate_1d(const std::function<double(double)>& fn, double a, double b,
                    double tol = 1e-10, int panels = 4096);

// A 1-D reference density on a bounded support, normalized by quadrature at
// construction. Everything it reports is derived independently of the
// pipeline components it judges.
class AnalyticPosterior {
public:
    AnalyticPosterior(std::string problem_id, std::function<double(double)> unnormalized,
                      double lo, double hi);

    const std::string& problem_id() const { return id_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double pdf(double x) const;  // 0 outside the support
    double cdf(double x) const;
    double mean() const;
    double std() const;

    // Local maxima above 1e-6 of the peak, refined parabolically.
    std::vector<double> modes() const;

    // Probability mass on x > 0.
    double sign_split() const;

    // First Wasserstein distance between the empirical distribution of the
    // samples and this density: integral of |F_emp - F| over the union of
    // supports.
    double w1_to_samples(std::vector<double> samples) const;

    // Re-integrates the normalized pdf; should be 1 within quadrature
    // tolerance (self-check used by tests).
    double normalization() const;

private:
    std::string id_;
    std::function<double(double)> raw_;
    double lo_, hi_, norm_;
    std::vector<double> grid_, cdf_grid_;  // dense cached CDF
};

// x ~ Normal(0,1), y = x + eps, eps ~ Normal(0, sigma_obs^2). The posterior
// given y is Normal(y/(1+sigma^2), sigma^2/(1+sigma^2)).
struct ConjugateGaussian {
    Dataset dataset;
    double sigma_obs;

    AnalyticPosterior posterior(double y) const;
    double posterior_mean(double y) const;
    double posterior_std() const;
};

ConjugateGaussian gaussian_linear_problem(double sigma_obs, std::size_t n, std::uint64_t seed);

// Density proportional to exp(-(y - x^2)^2 / (2 sigma^2)) on [-2, 2].
AnalyticPosterior bimodal_reference(double y, double sigma);

}  // namespace genuq
