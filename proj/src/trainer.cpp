#include "genuq/trainer.hpp"

#include <chrono>
#include <cmath>

#include "genuq/container.hpp"
#include "genuq/errors.hpp"

namespace genuq {

void TrainConfig::validate() const {
    if (!(lr > 0)) throw config_error("train: lr must be > 0");
    if (batch_size < 1) throw config_error("train: batch_size must be >= 1");
    if (max_epochs < 1) throw config_error("train: max_epochs must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 0.5))
        throw config_error("train: val_fraction must lie in (0, 0.5)");
    if (!(min_delta >= 0)) throw config_error("train: min_delta must be >= 0");
    if (patience < 1) throw config_error("train: patience must be >= 1");
    if (ma_window < 1) throw config_error("train: ma_window must be >= 1");
}

nlohmann::json TrainReport::to_json() const {
    return {{"train_loss", train_loss},
            {"val_loss", val_loss},
            {"epochs_run", epochs_run()},
            {"best_epoch", best_epoch},
            {"stop_reason", stop_reason},
            {"generalization_gap", generalization_gap},
            {"gap_flagged", gap_flagged},
            {"wall_seconds", wall_seconds}};
}

namespace {

double moving_avg(const std::vector<double>& series, std::size_t upto, int window) {
    // Mean of the last min(upto, window) entries of series[0..upto).
    const std::size_t n = std::min<std::size_t>(upto, static_cast<std::size_t>(window));
    double s = 0.0;
    for (std::size_t i = upto - n; i < upto; ++i) s += series[i];
    return s / static_cast<double>(n);
}

}  // namespace

StopDecision should_stop(const std::vector<double>& train_loss,
                         const std::vector<double>& val_loss, const TrainConfig& cfg) {
    if (train_loss.size() != val_loss.size())
        throw data_error("should_stop: series lengths differ");
    const std::size_t k = train_loss.size();
    if (k < 1) throw data_error("should_stop: needs at least one epoch");

    const auto w = static_cast<std::size_t>(cfg.ma_window);
    int streak = 0;
    for (std::size_t i = w; i <= k; ++i) {
        const bool down = moving_avg(train_loss, i, cfg.ma_window) <
                          moving_avg(train_loss, i - 1, cfg.ma_window);
        const bool up = moving_avg(val_loss, i, cfg.ma_window) >
                        moving_avg(val_loss, i - 1, cfg.ma_window);
        streak = down && up ? streak + 1 : 0;
    }
    if (streak >= cfg.patience) return {true, "trend_stop"};
    return {false, ""};
}

std::pair<GeneratorModel, TrainReport> train(const std::vector<LabeledTriple>& triples,
                                             const Architecture& arch, const TrainConfig& cfg) {
    cfg.validate();
    arch.validate();
    if (triples.size() < 10) throw data_error("train: needs at least 10 triples");

    const auto M = triples.size();
    const auto q = triples[0].y.size();
    const auto d = triples[0].x.size();
    if (arch.input_dim != q + d || arch.output_dim != d)
        throw config_error("train: architecture dims do not match triples");

    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(M) * cfg.val_fraction)));
    const std::size_t n_train = M - n_val;
    if (n_train < 1) throw config_error("train: empty training split");

    RngStream split_rng(cfg.seed, 0);
    auto perm = split_rng.permutation(M);
    TrainReport report;
    report.val_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));

    auto fill = [&](Eigen::MatrixXd& in, Eigen::MatrixXd& tgt, std::size_t lo, std::size_t hi) {
        in.resize(q + d, static_cast<Eigen::Index>(hi - lo));
        tgt.resize(d, static_cast<Eigen::Index>(hi - lo));
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& t = triples[perm[i]];
            const auto c = static_cast<Eigen::Index>(i - lo);
            in.col(c) << t.y, t.z;
            tgt.col(c) = t.x;
        }
    };
    Eigen::MatrixXd val_in, val_tgt, train_in, train_tgt;
    fill(val_in, val_tgt, 0, n_val);
    fill(train_in, train_tgt, n_val, M);

    GeneratorModel model = init_model(arch, derive_seed(cfg.seed, 1));
    AdamState adam = AdamState::zeros_like(model);
    RngStream epoch_rng(cfg.seed, 2);
    RngStream dropout_rng(cfg.seed, 3);

    GeneratorModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    Gradients grads;
    Eigen::MatrixXd batch_in, batch_tgt;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        auto order = epoch_rng.permutation(n_train);
        double loss_sum = 0.0;
        for (std::size_t s = 0; s < n_train; s += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t e = std::min(n_train, s + static_cast<std::size_t>(cfg.batch_size));
            const auto B = static_cast<Eigen::Index>(e - s);
            batch_in.resize(q + d, B);
            batch_tgt.resize(d, B);
            for (std::size_t i = s; i < e; ++i) {
                batch_in.col(static_cast<Eigen::Index>(i - s)) =
                    train_in.col(static_cast<Eigen::Index>(order[i]));
                batch_tgt.col(static_cast<Eigen::Index>(i - s)) =
                    train_tgt.col(static_cast<Eigen::Index>(order[i]));
            }
            double loss = mse_and_gradient(model, batch_in, batch_tgt, true, dropout_rng, grads);
            if (!std::isfinite(loss))
                throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch));
            adam_step(model, grads, adam, cfg.lr);
            loss_sum += loss * static_cast<double>(B);
        }
        const double train_loss = loss_sum / static_cast<double>(n_train);
        const double val_loss = mse_loss(model, val_in, val_tgt);
        if (!std::isfinite(val_loss))
            throw numeric_error("train: non-finite validation loss at epoch " +
                                std::to_string(epoch));
        report.train_loss.push_back(train_loss);
        report.val_loss.push_back(val_loss);
        if (val_loss - train_loss > cfg.gap_threshold) report.gap_flagged = true;

        if (best_val - val_loss > cfg.min_delta) {
            best = model;
            best_val = val_loss;
            report.best_epoch = epoch;
        }

        StopDecision dec = should_stop(report.train_loss, report.val_loss, cfg);
        if (dec.stop) {
            report.stop_reason = dec.reason;
            break;
        }
    }
    if (report.stop_reason.empty()) report.stop_reason = "max_epochs";
    report.generalization_gap =
        report.val_loss[report.best_epoch] - report.train_loss[report.best_epoch];
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(best), std::move(report)};
}

namespace {

constexpr const char* kCheckpointMagic = "GQUQ";

ContainerTensor vector_tensor(const std::string& name, const Eigen::VectorXd& v) {
    ContainerTensor t;
    t.name = name;
    t.shape = {static_cast<std::size_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
}

ContainerTensor matrix_tensor(const std::string& name, const Eigen::MatrixXd& m) {
    ContainerTensor t;
    t.name = name;
    t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
    return t;
}

Eigen::VectorXd tensor_vector(const ContainerTensor& t) {
    if (t.shape.size() != 1)
        throw data_error("checkpoint: tensor '" + t.name + "' is not a vector");
    return Eigen::Map<const Eigen::VectorXd>(t.data.data(),
                                             static_cast<Eigen::Index>(t.data.size()));
}

Eigen::MatrixXd tensor_matrix(const ContainerTensor& t) {
    if (t.shape.size() != 2)
        throw data_error("checkpoint: tensor '" + t.name + "' is not a matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.shape[0]),
                      static_cast<Eigen::Index>(t.shape[1]));
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[i++];
    return m;
}

}  // namespace

void save_checkpoint(const GeneratorModel& model, const std::string& path) {
    model.validate();
    Container c;
    c.header["format"] = "gquq";
    c.header["architecture"] = model.arch.to_json();
    c.header["provenance"] = model.provenance;
    c.tensors.push_back(vector_tensor("scaler.x_mean", model.scaler.x_mean));
    c.tensors.push_back(vector_tensor("scaler.x_std", model.scaler.x_std));
    c.tensors.push_back(vector_tensor("scaler.y_mean", model.scaler.y_mean));
    c.tensors.push_back(vector_tensor("scaler.y_std", model.scaler.y_std));
    for (int l = 0; l < model.n_layers(); ++l) {
        c.tensors.push_back(matrix_tensor("W" + std::to_string(l), model.W[l]));
        c.tensors.push_back(vector_tensor("b" + std::to_string(l), model.b[l]));
    }
    write_container(path, kCheckpointMagic, c);
}

GeneratorModel load_checkpoint(const std::string& path) {
    Container c = read_container(path, kCheckpointMagic);
    GeneratorModel m;
    try {
        m.arch = Architecture::from_json(c.header.at("architecture"));
        m.provenance = c.header.value("provenance", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path + ": malformed checkpoint header: " + e.what());
    }

    auto find = [&](const std::string& name) -> const ContainerTensor& {
        for (const auto& t : c.tensors)
            if (t.name == name) return t;
        throw data_error(path + ": checkpoint missing tensor '" + name + "'");
    };
    m.scaler.x_mean = tensor_vector(find("scaler.x_mean"));
    m.scaler.x_std = tensor_vector(find("scaler.x_std"));
    m.scaler.y_mean = tensor_vector(find("scaler.y_mean"));
    m.scaler.y_std = tensor_vector(find("scaler.y_std"));
    for (int l = 0; l < m.arch.hidden_layers + 1; ++l) {
        m.W.push_back(tensor_matrix(find("W" + std::to_string(l))));
        m.b.push_back(tensor_vector(find("b" + std::to_string(l))));
    }
    m.validate();
    return m;
}

}  // namespace genuq
