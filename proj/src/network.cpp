#include "genuq/network.hpp"

#include <cmath>

#include "genuq/errors.hpp"

namespace genuq {

void Architecture::validate() const {
    if (input_dim < 1 || output_dim < 1) throw config_error("architecture: dims must be >= 1");
    if (hidden_layers != 1 && hidden_layers != 2)
        throw config_error("architecture: hidden_layers must be 1 or 2");
    if (hidden_width < 1) throw config_error("architecture: hidden_width must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 0.5))
        throw config_error("architecture: dropout_rate must lie in [0, 0.5)");
}

nlohmann::json Architecture::to_json() const {
    return {{"input_dim", input_dim},
            {"hidden_layers", hidden_layers},
            {"hidden_width", hidden_width},
            {"output_dim", output_dim},
            {"dropout_rate", dropout_rate}};
}

Architecture Architecture::from_json(const nlohmann::json& j) {
    Architecture a;
    a.input_dim = j.at("input_dim").get<int>();
    a.hidden_layers = j.at("hidden_layers").get<int>();
    a.hidden_width = j.at("hidden_width").get<int>();
    a.output_dim = j.at("output_dim").get<int>();
    a.dropout_rate = j.at("dropout_rate").get<double>();
    a.validate();
    return a;
}

namespace {

std::vector<std::pair<int, int>> layer_shapes(const Architecture& arch) {
    std::vector<std::pair<int, int>> shapes;
    int in = arch.input_dim;
    for (int l = 0; l < arch.hidden_layers; ++l) {
        shapes.emplace_back(arch.hidden_width, in);
        in = arch.hidden_width;
    }
    shapes.emplace_back(arch.output_dim, in);
    return shapes;
}

}  // namespace

std::size_t param_count(const Architecture& arch) {
    std::size_t n = 0;
    for (auto [rows, cols] : layer_shapes(arch))
        n += static_cast<std::size_t>(rows) * cols + rows;
    return n;
}

void GeneratorModel::validate() const {
    arch.validate();
    auto shapes = layer_shapes(arch);
    if (W.size() != shapes.size() || b.size() != shapes.size())
        throw data_error("model: layer count does not match architecture");
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        if (W[l].rows() != shapes[l].first || W[l].cols() != shapes[l].second ||
            b[l].size() != shapes[l].first)
            throw data_error("model: layer " + std::to_string(l) + " shape mismatch");
        if (!W[l].allFinite() || !b[l].allFinite())
            throw numeric_error("model: non-finite parameters in layer " + std::to_string(l));
    }
}

GeneratorModel init_model(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    GeneratorModel m;
    m.arch = arch;
    RngStream rng(seed, 0);
    for (auto [rows, cols] : layer_shapes(arch)) {
        Eigen::MatrixXd w(rows, cols);
        const double limit = std::sqrt(6.0 / (rows + cols));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
        m.W.push_back(std::move(w));
        m.b.push_back(Eigen::VectorXd::Zero(rows));
    }
    return m;
}

namespace {

// Inverted dropout mask: surviving units scaled by 1/(1-r) so the eval path
// needs no rescaling. Sample-major fill order fixes determinism.
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             RngStream& rng) {
    Eigen::MatrixXd mask(rows, cols);
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            mask(r, c) = rng.uniform() >= rate ? scale : 0.0;
    return mask;
}

struct ForwardTrace {
    std::vector<Eigen::MatrixXd> pre;     // pre-activation per hidden layer
    std::vector<Eigen::MatrixXd> post;    // post-activation (+ dropout) per hidden layer
    std::vector<Eigen::MatrixXd> masks;   // dropout masks (empty in eval mode)
    Eigen::MatrixXd out;
};

ForwardTrace run_forward(const GeneratorModel& model, const Eigen::MatrixXd& inputs,
                         bool train_mode, RngStream* dropout_rng) {
    const int L = model.n_layers();
    ForwardTrace tr;
    const bool use_dropout = train_mode && model.arch.dropout_rate > 0.0;
    const Eigen::MatrixXd* h = &inputs;
    for (int l = 0; l < L - 1; ++l) {
        Eigen::MatrixXd a = (model.W[l] * (*h)).colwise() + model.b[l];
        Eigen::MatrixXd post = a.cwiseMax(0.0);
        if (use_dropout) {
            Eigen::MatrixXd mask =
                dropout_mask(post.rows(), post.cols(), model.arch.dropout_rate, *dropout_rng);
            post = post.cwiseProduct(mask);
            tr.masks.push_back(std::move(mask));
        }
        tr.pre.push_back(std::move(a));
        tr.post.push_back(std::move(post));
        h = &tr.post.back();
    }
    tr.out = (model.W[L - 1] * (*h)).colwise() + model.b[L - 1];
    return tr;
}

}  // namespace

Eigen::MatrixXd forward_batch(const GeneratorModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != model.arch.input_dim)
        throw data_error("forward: input dimension mismatch");
    return run_forward(model, inputs, false, nullptr).out;
}

Eigen::VectorXd forward(const GeneratorModel& model, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z, bool train_mode,
                        std::uint64_t dropout_seed) {
    if (y.size() + z.size() != model.arch.input_dim)
        throw data_error("forward: y/z dimensions do not sum to input_dim");
    Eigen::MatrixXd in(model.arch.input_dim, 1);
    in.col(0) << y, z;
    if (!train_mode || model.arch.dropout_rate == 0.0)
        return run_forward(model, in, false, nullptr).out.col(0);
    RngStream rng(dropout_seed, 0);
    return run_forward(model, in, true, &rng).out.col(0);
}

double mse_and_gradient(const GeneratorModel& model, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, bool train_mode,
                        RngStream& dropout_rng, Gradients& grads) {
    if (inputs.cols() == 0) throw data_error("mse_and_gradient: empty batch");
    if (inputs.rows() != model.arch.input_dim || targets.rows() != model.arch.output_dim ||
        inputs.cols() != targets.cols())
        throw data_error("mse_and_gradient: shape mismatch");

    const int L = model.n_layers();
    ForwardTrace tr = run_forward(model, inputs, train_mode, &dropout_rng);

    const double denom = static_cast<double>(inputs.cols()) * model.arch.output_dim;
    Eigen::MatrixXd diff = tr.out - targets;
    const double loss = diff.squaredNorm() / denom;

    grads.W.resize(L);
    grads.b.resize(L);
    Eigen::MatrixXd delta = (2.0 / denom) * diff;
    for (int l = L - 1; l >= 0; --l) {
        const Eigen::MatrixXd& below = l == 0 ? inputs : tr.post[l - 1];
        grads.W[l] = delta * below.transpose();
        grads.b[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd dh = model.W[l].transpose() * delta;
            if (!tr.masks.empty()) dh = dh.cwiseProduct(tr.masks[l - 1]);
            delta = dh.cwiseProduct(
                (tr.pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

double mse_loss(const GeneratorModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets) {
    Eigen::MatrixXd out = forward_batch(model, inputs);
    const double denom = static_cast<double>(inputs.cols()) * model.arch.output_dim;
    return (out - targets).squaredNorm() / denom;
}

AdamState AdamState::zeros_like(const GeneratorModel& model) {
    AdamState s;
    for (std::size_t l = 0; l < model.W.size(); ++l) {
        s.mW.push_back(Eigen::MatrixXd::Zero(model.W[l].rows(), model.W[l].cols()));
        s.vW.push_back(Eigen::MatrixXd::Zero(model.W[l].rows(), model.W[l].cols()));
        s.mb.push_back(Eigen::VectorXd::Zero(model.b[l].size()));
        s.vb.push_back(Eigen::VectorXd::Zero(model.b[l].size()));
    }
    return s;
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, double lr, long step) {
    if (!grad.allFinite()) throw numeric_error("adam_step: non-finite gradient");
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double mc = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double vc = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    param -= (lr * (m / mc).array() / ((v / vc).array().sqrt() + kEps)).matrix();
}

}  // namespace

void adam_step(GeneratorModel& model, const Gradients& grads, AdamState& state, double lr) {
    if (grads.W.size() != model.W.size() || grads.b.size() != model.b.size())
        throw data_error("adam_step: gradient shape mismatch");
    ++state.step;
    for (std::size_t l = 0; l < model.W.size(); ++l) {
        adam_update(model.W[l], grads.W[l], state.mW[l], state.vW[l], lr, state.step);
        adam_update(model.b[l], grads.b[l], state.mb[l], state.vb[l], lr, state.step);
    }
}

}  // namespace genuq
