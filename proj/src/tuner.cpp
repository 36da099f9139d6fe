#include "genuq/tuner.hpp"

#include <cmath>

#include "genuq/errors.hpp"
#include "genuq/evaluate.hpp"
#include "genuq/rng.hpp"
#include "genuq/threads.hpp"

namespace genuq {

void SearchSpace::validate() const {
    if (widths.empty() || depths.empty() || batch_sizes.empty())
        throw config_error("search: structural lists must be nonempty");
    for (int w : widths)
        if (w < 1) throw config_error("search: widths must be >= 1");
    for (int dep : depths)
        if (dep != 1 && dep != 2) throw config_error("search: depths must be 1 or 2");
    for (int b : batch_sizes)
        if (b < 1) throw config_error("search: batch_sizes must be >= 1");
    if (!(lr_min > 0 && lr_max >= lr_min))
        throw config_error("search: lr range must be positive and ordered");
    if (!(dropout_min >= 0 && dropout_max >= dropout_min && dropout_max < 0.5))
        throw config_error("search: dropout range must be ordered within [0, 0.5)");
    if (n_trials < 1) throw config_error("search: n_trials must be >= 1");
    if (max_epochs < 1) throw config_error("search: max_epochs must be >= 1");
}

std::size_t SearchSpace::grid_size() const {
    return depths.size() * widths.size() * batch_sizes.size();
}

nlohmann::json TrialConfig::to_json() const {
    return {{"depth", depth},
            {"width", width},
            {"batch_size", batch_size},
            {"lr", lr},
            {"dropout", dropout}};
}

TrialConfig sample_trial(const SearchSpace& space, int trial_index, std::uint64_t seed) {
    space.validate();
    if (trial_index < 0 || trial_index >= space.n_trials)
        throw config_error("sample_trial: trial index out of range");

    const std::size_t cell = static_cast<std::size_t>(trial_index) % space.grid_size();
    const std::size_t nb = space.batch_sizes.size();
    const std::size_t nw = space.widths.size();
    TrialConfig tc;
    tc.trial_id = trial_index;
    tc.depth = space.depths[cell / (nw * nb)];
    tc.width = space.widths[(cell / nb) % nw];
    tc.batch_size = space.batch_sizes[cell % nb];

    RngStream rng(seed, static_cast<std::uint64_t>(trial_index));
    tc.lr = std::exp(rng.uniform(std::log(space.lr_min), std::log(space.lr_max)));
    tc.dropout = rng.uniform(space.dropout_min, space.dropout_max);
    return tc;
}

nlohmann::json SearchOutcome::to_json() const {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json t = {{"id", r.config.trial_id},
                            {"config", r.config.to_json()},
                            {"status", r.status}};
        if (r.status == "ok") {
            t["best_val_loss"] = r.best_val_loss;
            t["r2"] = r.r2;
            t["epochs_run"] = r.report.epochs_run();
            t["best_epoch"] = r.report.best_epoch;
            t["stop_reason"] = r.report.stop_reason;
            t["wall_seconds"] = r.report.wall_seconds;
        } else {
            t["message"] = r.message;
        }
        trials.push_back(std::move(t));
    }
    return {{"schema", "genuq.search/1"}, {"trials", trials}, {"best_trial", best_trial}};
}

nlohmann::json SearchOutcome::best_config() const {
    if (best_trial < 0) throw numeric_error("search: no successful trial");
    return results[static_cast<std::size_t>(best_trial)].config.to_json();
}

SearchOutcome run_search(const std::vector<LabeledTriple>& triples, const SearchSpace& space,
                         int parallelism, std::uint64_t seed, const TrainConfig& base) {
    space.validate();
    if (parallelism < 1) throw config_error("search: parallelism must be >= 1");
    if (triples.size() < 10) throw data_error("search: needs at least 10 triples");

    const auto q = triples[0].y.size();
    const auto d = triples[0].x.size();
    const auto n = static_cast<std::size_t>(space.n_trials);

    SearchOutcome out;
    out.results.resize(n);
    std::vector<GeneratorModel> models(n);

    parallel_for(n, parallelism, [&](std::size_t i) {
        TrialResult& res = out.results[i];
        res.config = sample_trial(space, static_cast<int>(i), seed);
        Architecture arch;
        arch.input_dim = static_cast<int>(q + d);
        arch.output_dim = static_cast<int>(d);
        arch.hidden_layers = res.config.depth;
        arch.hidden_width = res.config.width;
        arch.dropout_rate = res.config.dropout;

        TrainConfig cfg = base;
        cfg.lr = res.config.lr;
        cfg.batch_size = res.config.batch_size;
        cfg.max_epochs = space.max_epochs;
        cfg.seed = derive_seed(seed, 0x7452ull + i);

        try {
            auto [model, report] = train(triples, arch, cfg);
            res.best_val_loss = report.val_loss[static_cast<std::size_t>(report.best_epoch)];
            std::vector<LabeledTriple> val;
            val.reserve(report.val_indices.size());
            for (std::size_t idx : report.val_indices) val.push_back(triples[idx]);
            res.r2 = validation_scatter(model, val).r2;
            res.report = std::move(report);
            res.status = "ok";
            models[i] = std::move(model);
        } catch (const error& e) {
            res.status = "failed";
            res.message = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = out.results[i];
        if (r.status != "ok") continue;
        if (out.best_trial < 0 ||
            r.best_val_loss < out.results[static_cast<std::size_t>(out.best_trial)].best_val_loss)
            out.best_trial = static_cast<int>(i);
    }
    if (out.best_trial < 0) {
        std::string detail;
        for (const auto& r : out.results)
            detail += "\n  trial " + std::to_string(r.config.trial_id) + ": " + r.message;
        throw numeric_error("search: all trials failed" + detail);
    }
    out.best_model = std::move(models[static_cast<std::size_t>(out.best_trial)]);
    return out;
}

}  // namespace genuq
