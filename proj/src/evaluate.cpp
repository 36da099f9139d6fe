#include "genuq/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "genuq/errors.hpp"
#include "genuq/rng.hpp"

namespace genuq {

nlohmann::json DimensionSummary::to_json() const {
    return {{"mean", mean},
            {"std", std},
            {"q05", q05},
            {"q25", q25},
            {"q50", q50},
            {"q75", q75},
            {"q95", q95},
            {"histogram", {{"edges", bin_edges}, {"counts", bin_counts}}}};
}

nlohmann::json PosteriorSummary::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : dims) arr.push_back(d.to_json());
    return {{"dimensions", arr}};
}

nlohmann::json EnsembleForecast::to_json() const {
    return {{"y_star", std::vector<double>(y_star.data(), y_star.data() + y_star.size())},
            {"n_samples", samples.rows()},
            {"summary", summary.to_json()}};
}

double quantile(std::vector<double> values, double level) {
    if (values.empty()) throw data_error("quantile: empty sample");
    if (!(level >= 0.0 && level <= 1.0)) throw config_error("quantile: level outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

namespace {

DimensionSummary summarize_dim(std::vector<double> v) {
    DimensionSummary s;
    const auto K = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(K);
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(K);
    s.mean = mean;
    s.std = std::sqrt(var);
    s.q05 = quantile(v, 0.05);
    s.q25 = quantile(v, 0.25);
    s.q50 = quantile(v, 0.50);
    s.q75 = quantile(v, 0.75);
    s.q95 = quantile(v, 0.95);

    std::sort(v.begin(), v.end());
    const double lo = v.front(), hi = v.back();
    std::size_t nbins;
    if (hi == lo) {
        // Degenerate spread: one unit-wide span, all mass in the middle bin.
        nbins = 16;
        s.bin_edges.resize(nbins + 1);
        for (std::size_t i = 0; i <= nbins; ++i)
            s.bin_edges[i] = lo - 0.5 + static_cast<double>(i) / static_cast<double>(nbins);
    } else {
        const double iqr = s.q75 - s.q25;
        const double fd_width =
            2.0 * iqr / std::cbrt(static_cast<double>(K));
        double width = fd_width > 0 ? fd_width : (hi - lo) / 64.0;
        nbins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
        nbins = std::clamp<std::size_t>(nbins, 16, 128);
        s.bin_edges.resize(nbins + 1);
        for (std::size_t i = 0; i <= nbins; ++i)
            s.bin_edges[i] =
                lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nbins);
    }
    s.bin_counts.assign(nbins, 0);
    for (double x : v) {
        auto bin = static_cast<std::size_t>(
            std::floor((x - s.bin_edges.front()) /
                       (s.bin_edges.back() - s.bin_edges.front()) *
                       static_cast<double>(nbins)));
        if (bin >= nbins) bin = nbins - 1;
        ++s.bin_counts[bin];
    }
    return s;
}

}  // namespace

PosteriorSummary posterior_summary(const Eigen::MatrixXd& samples) {
    if (samples.rows() < 2) throw data_error("posterior_summary: needs at least 2 samples");
    PosteriorSummary out;
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
        std::vector<double> v(samples.rows());
        for (Eigen::Index r = 0; r < samples.rows(); ++r) v[static_cast<std::size_t>(r)] = samples(r, c);
        out.dims.push_back(summarize_dim(std::move(v)));
    }
    return out;
}

EnsembleForecast ensemble(const GeneratorModel& model, const Eigen::VectorXd& y_star,
                          std::size_t K, std::uint64_t seed) {
    if (K < 1) throw config_error("ensemble: K must be >= 1");
    const auto q = model.scaler.y_mean.size();
    const auto d = model.arch.output_dim;
    if (y_star.size() != q)
        throw config_error("ensemble: y_star has dimension " + std::to_string(y_star.size()) +
                           ", expected " + std::to_string(q));

    Eigen::VectorXd ys = model.scaler.apply_y_vec(y_star);
    Eigen::MatrixXd inputs(model.arch.input_dim, static_cast<Eigen::Index>(K));
    RngStream rng(seed, 0);
    for (std::size_t k = 0; k < K; ++k) {
        inputs.col(static_cast<Eigen::Index>(k)).head(q) = ys;
        for (Eigen::Index i = 0; i < d; ++i)
            inputs(q + i, static_cast<Eigen::Index>(k)) = rng.normal();
    }
    Eigen::MatrixXd out = forward_batch(model, inputs);  // d x K, standardized

    EnsembleForecast f;
    f.y_star = y_star;
    f.samples = model.scaler.invert_x(out.transpose());
    if (K >= 2) f.summary = posterior_summary(f.samples);
    else {
        DimensionSummary s;
        for (Eigen::Index c = 0; c < f.samples.cols(); ++c) {
            s.mean = s.q05 = s.q25 = s.q50 = s.q75 = s.q95 = f.samples(0, c);
            s.std = 0.0;
            s.bin_edges = {f.samples(0, c) - 0.5, f.samples(0, c) + 0.5};
            s.bin_counts = {1};
            f.summary.dims.push_back(s);
        }
    }
    return f;
}

double r2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
        throw data_error("r2: shape mismatch");
    if (truth.rows() < 2) throw data_error("r2: needs at least 2 rows");
    const double mean = truth.mean();
    const double sst = (truth.array() - mean).square().sum();
    if (sst == 0.0) throw numeric_error("r2: truth is constant, metric undefined");
    const double sse = (truth - pred).squaredNorm();
    return 1.0 - sse / sst;
}

Eigen::VectorXd r2_per_dimension(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
        throw data_error("r2: shape mismatch");
    Eigen::VectorXd out(truth.cols());
    for (Eigen::Index c = 0; c < truth.cols(); ++c)
        out(c) = r2(truth.col(c), pred.col(c));
    return out;
}

ScatterResult validation_scatter(const GeneratorModel& model,
                                 const std::vector<LabeledTriple>& triples) {
    if (triples.empty()) throw data_error("validation_scatter: empty input");
    const auto n = static_cast<Eigen::Index>(triples.size());
    const auto q = triples[0].y.size();
    const auto d = triples[0].x.size();
    Eigen::MatrixXd inputs(q + d, n);
    ScatterResult r;
    r.truth.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = triples[static_cast<std::size_t>(i)];
        inputs.col(i) << t.y, t.z;
        r.truth.row(i) = t.x.transpose();
    }
    r.pred = forward_batch(model, inputs).transpose();
    r.r2 = r2(r.truth, r.pred);
    return r;
}

std::vector<double> sample_modes(const std::vector<double>& samples, double lo, double hi) {
    if (samples.empty() || !(hi > lo)) return {};
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double sd = std::sqrt(var / n);
    const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = sd;
    double h = 0.9 * spread * std::pow(n, -0.2);
    const double h_floor = 1e-3 * (hi - lo);
    if (!(h > h_floor)) h = h_floor;

    // Grid step at most h/3 so no maximum can hide between probes.
    const auto cells =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(3.0 * (hi - lo) / h)), 200,
                                8000);
    const double step = (hi - lo) / static_cast<double>(cells);
    std::vector<double> dens(cells + 1, 0.0);
    for (std::size_t g = 0; g <= cells; ++g) {
        const double xg = lo + step * static_cast<double>(g);
        double acc = 0.0;
        for (double s : samples) {
            const double u = (xg - s) / h;
            acc += std::exp(-0.5 * u * u);
        }
        dens[g] = acc;
    }
    const double peak = *std::max_element(dens.begin(), dens.end());
    if (peak <= 0.0) return {};

    std::vector<std::pair<double, double>> found;  // (density, location)
    for (std::size_t g = 1; g < cells; ++g) {
        if (dens[g] < 0.01 * peak) continue;
        if (dens[g] >= dens[g - 1] && dens[g] > dens[g + 1]) {
            const double denom = dens[g - 1] - 2.0 * dens[g] + dens[g + 1];
            double shift = 0.0;
            if (denom < 0.0) shift = 0.5 * (dens[g - 1] - dens[g + 1]) / denom;
            shift = std::clamp(shift, -0.5, 0.5);
            found.emplace_back(dens[g], lo + step * (static_cast<double>(g) + shift));
        }
    }
    if (dens[0] > dens[1] && dens[0] >= 0.01 * peak) found.emplace_back(dens[0], lo);
    if (dens[cells] > dens[cells - 1] && dens[cells] >= 0.01 * peak)
        found.emplace_back(dens[cells], hi);
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> out;
    out.reserve(found.size());
    for (const auto& [d, x] : found) out.push_back(x);
    return out;
}

}  // namespace genuq
