#include "genuq/bench.hpp"

#include <algorithm>
#include <cmath>

#include "genuq/errors.hpp"
#include "genuq/rng.hpp"

namespace genuq {

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& fn, double a, double fa, double m,
                double fm, double b, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    const double left = simpson(a, fa, flm, m, fm);
    const double right = simpson(m, fm, frm, b, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(fn, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           adaptive(fn, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_1d(const std::function<double(double)>& fn, double a, double b, double tol,
                    int panels) {
    if (!(b > a)) throw config_error("integrate_1d: requires b > a");
    if (panels < 1) throw config_error("integrate_1d: panels must be >= 1");
    double total = 0.0;
    const double h = (b - a) / panels;
    const double panel_tol = tol / panels;
    for (int p = 0; p < panels; ++p) {
        const double pa = a + p * h, pb = a + (p + 1) * h, pm = 0.5 * (pa + pb);
        const double fa = fn(pa), fm = fn(pm), fb = fn(pb);
        total += adaptive(fn, pa, fa, pm, fm, pb, fb, simpson(pa, fa, fm, pb, fb),
                          panel_tol, 48);
    }
    return total;
}

AnalyticPosterior::AnalyticPosterior(std::string problem_id,
                                     std::function<double(double)> unnormalized, double lo,
                                     double hi)
    : id_(std::move(problem_id)), raw_(std::move(unnormalized)), lo_(lo), hi_(hi) {
    if (!(hi_ > lo_)) throw config_error("posterior: empty support");
    norm_ = integrate_1d(raw_, lo_, hi_, 1e-10);
    if (!(norm_ > 0) || !std::isfinite(norm_))
        throw numeric_error("posterior: density does not normalize");

    // Dense cached CDF: composite Simpson on 2^15 cells.
    const int n = 1 << 15;
    grid_.resize(n + 1);
    cdf_grid_.resize(n + 1);
    const double h = (hi_ - lo_) / n;
    double acc = 0.0;
    double prev = pdf(lo_);
    grid_[0] = lo_;
    cdf_grid_[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double x = lo_ + i * h;
        const double mid = pdf(x - 0.5 * h);
        const double cur = pdf(x);
        acc += h / 6.0 * (prev + 4.0 * mid + cur);
        grid_[i] = x;
        cdf_grid_[i] = std::min(1.0, acc);
        prev = cur;
    }
}

double AnalyticPosterior::pdf(double x) const {
    if (x < lo_ || x > hi_) return 0.0;
    return raw_(x) / norm_;
}

double AnalyticPosterior::cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const double pos = (x - lo_) / (hi_ - lo_) * (grid_.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= grid_.size()) return cdf_grid_.back();
    const double frac = pos - static_cast<double>(i);
    return cdf_grid_[i] * (1.0 - frac) + cdf_grid_[i + 1] * frac;
}

double AnalyticPosterior::mean() const {
    return integrate_1d([&](double x) { return x * pdf(x); }, lo_, hi_, 1e-10);
}

double AnalyticPosterior::std() const {
    const double m = mean();
    const double var =
        integrate_1d([&](double x) { return (x - m) * (x - m) * pdf(x); }, lo_, hi_, 1e-10);
    return std::sqrt(std::max(0.0, var));
}

std::vector<double> AnalyticPosterior::modes() const {
    const int n = 1 << 15;
    const double h = (hi_ - lo_) / n;
    std::vector<double> vals(n + 1);
    double peak = 0.0;
    for (int i = 0; i <= n; ++i) {
        vals[i] = pdf(lo_ + i * h);
        peak = std::max(peak, vals[i]);
    }
    std::vector<double> out;
    const double floor = 1e-6 * peak;
    for (int i = 1; i < n; ++i) {
        if (vals[i] > floor && vals[i] > vals[i - 1] && vals[i] >= vals[i + 1]) {
            // Parabolic refinement through the three surrounding points.
            const double denom = vals[i - 1] - 2.0 * vals[i] + vals[i + 1];
            double offset = denom != 0.0 ? 0.5 * (vals[i - 1] - vals[i + 1]) / denom : 0.0;
            offset = std::clamp(offset, -0.5, 0.5);
            out.push_back(lo_ + (i + offset) * h);
        }
    }
    return out;
}

double AnalyticPosterior::sign_split() const {
    if (lo_ >= 0) return 1.0;
    if (hi_ <= 0) return 0.0;
    return 1.0 - cdf(0.0);
}

double AnalyticPosterior::w1_to_samples(std::vector<double> samples) const {
    if (samples.empty()) throw data_error("w1: empty sample set");
    std::sort(samples.begin(), samples.end());
    const double lo = std::min(lo_, samples.front());
    const double hi = std::max(hi_, samples.back());
    const int n = 1 << 16;
    const double h = (hi - lo) / n;
    const double count = static_cast<double>(samples.size());
    double w1 = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double fe =
            static_cast<double>(std::upper_bound(samples.begin(), samples.end(), x) -
                                samples.begin()) /
            count;
        const double diff = std::abs(fe - cdf(x));
        w1 += (i == 0 || i == n) ? 0.5 * diff : diff;
    }
    return w1 * h;
}

double AnalyticPosterior::normalization() const {
    return integrate_1d([&](double x) { return pdf(x); }, lo_, hi_, 1e-10);
}

AnalyticPosterior ConjugateGaussian::posterior(double y) const {
    const double s2 = sigma_obs * sigma_obs;
    const double span = 8.0;  // +/- 8 posterior stds around the posterior mean
    const double m = posterior_mean(y);
    const double sd = posterior_std();
    return AnalyticPosterior(
        "conjugate_gaussian",
        [y, s2](double x) {
            return std::exp(-0.5 * x * x - (y - x) * (y - x) / (2.0 * s2));
        },
        m - span * sd, m + span * sd);
}

double ConjugateGaussian::posterior_mean(double y) const {
    return y / (1.0 + sigma_obs * sigma_obs);
}

double ConjugateGaussian::posterior_std() const {
    const double s2 = sigma_obs * sigma_obs;
    return std::sqrt(s2 / (1.0 + s2));
}

ConjugateGaussian gaussian_linear_problem(double sigma_obs, std::size_t n, std::uint64_t seed) {
    if (!(sigma_obs > 0)) throw config_error("gaussian_linear_problem: sigma_obs must be > 0");
    if (n < 2) throw config_error("gaussian_linear_problem: n must be >= 2");
    ConjugateGaussian p;
    p.sigma_obs = sigma_obs;
    p.dataset.x_names = {"x"};
    p.dataset.y_names = {"y"};
    p.dataset.x_rows.resize(static_cast<Eigen::Index>(n), 1);
    p.dataset.y_rows.resize(static_cast<Eigen::Index>(n), 1);
    RngStream rng(seed, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = rng.normal();
        const double eps = rng.normal();
        p.dataset.x_rows(static_cast<Eigen::Index>(j), 0) = x;
        p.dataset.y_rows(static_cast<Eigen::Index>(j), 0) = x + sigma_obs * eps;
    }
    return p;
}

AnalyticPosterior bimodal_reference(double y, double sigma) {
    if (!(sigma > 0)) throw config_error("bimodal_reference: sigma must be > 0");
    const double s2 = sigma * sigma;
    return AnalyticPosterior(
        "bimodal",
        [y, s2](double x) { return std::exp(-(y - x * x) * (y - x * x) / (2.0 * s2)); },
        -2.0, 2.0);
}

}  // namespace genuq
