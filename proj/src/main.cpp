#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "genuq/bench.hpp"
#include "genuq/config.hpp"
#include "genuq/csv.hpp"
#include "genuq/dataset.hpp"
#include "genuq/errors.hpp"
#include "genuq/evaluate.hpp"
#include "genuq/flow.hpp"
#include "genuq/reduce.hpp"
#include "genuq/rng.hpp"
#include "genuq/schedule.hpp"
#include "genuq/score.hpp"
#include "genuq/threads.hpp"
#include "genuq/trainer.hpp"
#include "genuq/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace genuq {
namespace {

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw data_error("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw data_error("cannot create output directory " + dir.string() + ": " +
                             ec.message());
}

// Overwrite guard: rerunning into a populated directory requires --force.
void require_fresh(const fs::path& dir, const std::vector<std::string>& names, bool force) {
    if (force) return;
    for (const auto& name : names) {
        const fs::path p = dir / name;
        if (fs::exists(p))
            throw config_error("refusing to overwrite " + p.string() +
                               "; pass --force to allow it");
    }
}

std::vector<std::string> default_names(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

// ---------------------------------------------------------------------------
// Shared pipeline stages
// ---------------------------------------------------------------------------

struct Prepared {
    Dataset train_std;  // standardized training split
    Dataset test_raw;   // held-out split, problem units
    Scaler scaler;
    LikelihoodModel lik;
};

LikelihoodModel build_likelihood(LikelihoodMode mode, double sigma_problem,
                                 const Scaler& scaler, std::size_t batch_size,
                                 std::size_t pool_size) {
    if (mode == LikelihoodMode::explicit_gaussian)
        return LikelihoodModel::make_explicit(standardized_sigma(sigma_problem, scaler.y_std));
    const std::size_t n = batch_size == 0 ? pool_size : std::min(batch_size, pool_size);
    return LikelihoodModel::make_kernel(silverman_bandwidth(scaler.y_mean.size(), n));
}

Prepared prepare(const Dataset& raw, const RunConfig& rc) {
    raw.validate();
    Prepared p;
    auto [train_raw, test_raw] = split(raw, rc.test_fraction, derive_seed(rc.seed, 1));
    p.scaler = fit_scaler(train_raw);
    p.train_std = standardize(train_raw, p.scaler);
    p.test_raw = std::move(test_raw);
    p.lik = build_likelihood(rc.lik_mode, rc.lik_sigma, p.scaler, rc.batch_size,
                             static_cast<std::size_t>(p.train_std.J()));
    return p;
}

json provenance_json(const RunConfig& rc, const Prepared& p) {
    json prov;
    prov["data"] = {{"x_cols", p.train_std.x_names},
                    {"y_cols", p.train_std.y_names},
                    {"test_fraction", rc.test_fraction}};
    prov["schedule"] = {{"t_min", rc.t_min}};
    prov["flow"] = {{"n_steps", rc.n_steps},
                    {"batch_size", rc.batch_size},
                    {"n_triples", rc.n_triples}};
    json lik = {{"mode", rc.lik_mode == LikelihoodMode::explicit_gaussian
                             ? "explicit_gaussian"
                             : "observation_kernel"}};
    if (p.lik.mode == LikelihoodMode::explicit_gaussian) {
        lik["sigma"] = rc.lik_sigma;
        lik["sigma_std"] = p.lik.sigma;
    } else {
        lik["bandwidth"] = p.lik.bandwidth;
    }
    prov["likelihood"] = lik;
    prov["seed"] = rc.seed;
    return prov;
}

std::vector<LabeledTriple> make_triples(const Prepared& p, const RunConfig& rc, int workers) {
    FlowConfig fc;
    fc.n_steps = rc.n_steps;
    fc.batch_size = rc.batch_size;
    fc.n_triples = rc.n_triples;
    fc.seed = derive_seed(rc.seed, 2);
    const Schedule sched(rc.t_min);
    return generate_labels(p.train_std, p.lik, sched, fc, workers);
}

std::string best_toml(const TrialConfig& c, int max_epochs) {
    std::ostringstream os;
    os << "# hyperparameters selected by search; drop into a [train] section\n";
    os << "[train]\n";
    os << "depth = " << c.depth << "\n";
    os << "width = " << c.width << "\n";
    os << "batch_size = " << c.batch_size << "\n";
    os << "lr = " << fmt_double(c.lr) << "\n";
    os << "dropout = " << fmt_double(c.dropout) << "\n";
    os << "max_epochs = " << max_epochs << "\n";
    return os.str();
}

json report_json(const json& config, double r2_value, const TrainReport& report) {
    return {{"schema", "genuq.report/1"},
            {"config", config},
            {"r2", r2_value},
            {"report", report.to_json()}};
}

struct TuneArtifacts {
    GeneratorModel model;
    Dataset test_raw;
};

// load -> split/scale -> label -> search -> persist. Shared by `tune` and
// the bimodal demo.
TuneArtifacts tune_pipeline(const Dataset& raw, const RunConfig& rc, const fs::path& out,
                            int workers, bool force) {
    ensure_dir(out);
    require_fresh(out,
                  {"checkpoint.gquq", "labels.csv", "search.json", "report.json", "best.toml",
                   "test.csv"},
                  force);
    Prepared p = prepare(raw, rc);
    write_csv(p.test_raw, (out / "test.csv").string());

    std::vector<LabeledTriple> triples = make_triples(p, rc, workers);
    write_triples_csv((out / "labels.csv").string(), triples);

    SearchOutcome outcome = run_search(triples, rc.space, workers, rc.seed, rc.train);
    const TrialResult& best = outcome.results[static_cast<std::size_t>(outcome.best_trial)];

    TuneArtifacts art;
    art.model = outcome.best_model;
    art.model.scaler = p.scaler;
    art.model.provenance = provenance_json(rc, p);
    save_checkpoint(art.model, (out / "checkpoint.gquq").string());
    write_json_file(out / "search.json", outcome.to_json());
    write_json_file(out / "report.json", report_json(best.config.to_json(), best.r2, best.report));
    write_text_file(out / "best.toml", best_toml(best.config, rc.space.max_epochs));
    art.test_raw = std::move(p.test_raw);
    return art;
}

// Likelihood for post-training evaluation, rebuilt from checkpoint
// provenance; the kernel bandwidth adapts to the evaluation pool size.
LikelihoodModel likelihood_from_provenance(const json& prov, const Scaler& scaler,
                                           std::size_t pool_size) {
    const json& lik = prov.at("likelihood");
    const std::string mode = lik.at("mode").get<std::string>();
    if (mode == "explicit_gaussian")
        return LikelihoodModel::make_explicit(lik.at("sigma_std").get<double>());
    return LikelihoodModel::make_kernel(
        silverman_bandwidth(scaler.y_mean.size(), pool_size));
}

// Held-out assessment: fresh reference triples drawn against the test pool
// give the scatter R^2; per-row ensembles give calibration ranks.
json evaluate_metrics(const GeneratorModel& model, const Dataset& test_raw,
                      std::size_t n_eval_triples, std::size_t K, std::uint64_t seed,
                      int workers) {
    test_raw.validate();
    const Dataset test_std = standardize(test_raw, model.scaler);
    const json& prov = model.provenance;
    const double t_min = prov.at("schedule").at("t_min").get<double>();
    const int n_steps = prov.at("flow").at("n_steps").get<int>();
    const Schedule sched(t_min);
    const LikelihoodModel lik = likelihood_from_provenance(
        prov, model.scaler, static_cast<std::size_t>(test_std.J()));

    FlowConfig fc;
    fc.n_steps = n_steps;
    fc.batch_size = 0;  // the full test pool backs every score evaluation
    fc.n_triples = n_eval_triples;
    fc.seed = derive_seed(seed, 3);
    std::vector<LabeledTriple> triples = generate_labels(test_std, lik, sched, fc, workers);
    ScatterResult scatter = validation_scatter(model, triples);
    Eigen::VectorXd per_dim = r2_per_dimension(scatter.truth, scatter.pred);

    json rows = json::array();
    std::vector<std::size_t> rank_hist(10, 0);
    const auto n = test_raw.x_rows.rows();
    const auto d = test_raw.x_rows.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd y = test_raw.y_rows.row(i).transpose();
        EnsembleForecast f =
            ensemble(model, y, K, derive_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
        json row;
        row["y"] = std::vector<double>(y.data(), y.data() + y.size());
        row["x_true"] = std::vector<double>(test_raw.x_rows.row(i).data(),
                                            test_raw.x_rows.row(i).data() + d);
        std::vector<double> means, stds, ranks;
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto& dim = f.summary.dims[static_cast<std::size_t>(j)];
            means.push_back(dim.mean);
            stds.push_back(dim.std);
            const double truth = test_raw.x_rows(i, j);
            Eigen::Index below = 0, tied = 0;
            for (Eigen::Index k = 0; k < f.samples.rows(); ++k) {
                if (f.samples(k, j) < truth) ++below;
                else if (f.samples(k, j) == truth) ++tied;
            }
            const double rank = (static_cast<double>(below) + 0.5 * static_cast<double>(tied)) /
                                static_cast<double>(f.samples.rows());
            ranks.push_back(rank);
            const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(rank * 10.0));
            ++rank_hist[bin];
        }
        row["mean"] = means;
        row["std"] = stds;
        row["quantile_rank"] = ranks;
        rows.push_back(row);
    }

    json out;
    out["schema"] = "genuq.metrics/1";
    out["n_test"] = n;
    out["n_eval_triples"] = triples.size();
    out["ensemble_size"] = K;
    out["r2"] = scatter.r2;
    out["r2_per_dimension"] =
        std::vector<double>(per_dim.data(), per_dim.data() + per_dim.size());
    out["rank_histogram"] = rank_hist;
    out["rows"] = rows;
    return out;
}

std::vector<std::string> provenance_x_names(const GeneratorModel& model) {
    const Eigen::Index d = model.scaler.x_mean.size();
    if (model.provenance.contains("data") && model.provenance["data"].contains("x_cols")) {
        auto names = model.provenance["data"]["x_cols"].get<std::vector<std::string>>();
        if (static_cast<Eigen::Index>(names.size()) == d) return names;
    }
    return default_names("x", d);
}

void write_forecast(const fs::path& dir, std::size_t index, const EnsembleForecast& f,
                    const std::vector<std::string>& x_names) {
    write_csv((dir / ("ensemble_" + std::to_string(index) + ".csv")).string(), x_names,
              f.samples);
    json summary = f.to_json();
    summary["schema"] = "genuq.summary/1";
    summary["index"] = index;
    write_json_file(dir / ("summary_" + std::to_string(index) + ".json"), summary);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    int threads = 0;
    bool force = false;
};

RunConfig resolve_flags(const CommonFlags& fl) {
    Config cfg = Config::parse_file(fl.config_path);
    for (const auto& s : fl.sets) cfg.apply_override(s);
    RunConfig rc = resolve_run_config(cfg);
    if (!fl.out_dir.empty()) rc.output_dir = fl.out_dir;
    if (fl.threads > 0) rc.threads = fl.threads;
    return rc;
}

Dataset load_configured_data(const RunConfig& rc) {
    if (rc.data_path.empty())
        throw config_error("missing required config value 'data.path'");
    if (rc.x_cols.empty())
        throw config_error("missing required config value 'data.x_cols'");
    if (rc.y_cols.empty())
        throw config_error("missing required config value 'data.y_cols'");
    return load_csv(rc.data_path, rc.x_cols, rc.y_cols);
}

fs::path required_out_dir(const RunConfig& rc) {
    if (rc.output_dir.empty())
        throw config_error("missing required config value 'output.dir' (or pass --out)");
    return rc.output_dir;
}

void cmd_tune(const CommonFlags& fl) {
    RunConfig rc = resolve_flags(fl);
    Dataset raw = load_configured_data(rc);
    tune_pipeline(raw, rc, required_out_dir(rc), resolve_threads(rc.threads), fl.force);
}

void cmd_train(const CommonFlags& fl) {
    RunConfig rc = resolve_flags(fl);
    Dataset raw = load_configured_data(rc);
    const fs::path out = required_out_dir(rc);
    ensure_dir(out);
    require_fresh(out, {"checkpoint.gquq", "labels.csv", "report.json", "test.csv"}, fl.force);
    const int workers = resolve_threads(rc.threads);

    Prepared p = prepare(raw, rc);
    write_csv(p.test_raw, (out / "test.csv").string());
    std::vector<LabeledTriple> triples = make_triples(p, rc, workers);
    write_triples_csv((out / "labels.csv").string(), triples);

    Architecture arch;
    arch.input_dim = static_cast<int>(p.train_std.q() + p.train_std.d());
    arch.hidden_layers = rc.train_depth;
    arch.hidden_width = rc.train_width;
    arch.output_dim = static_cast<int>(p.train_std.d());
    arch.dropout_rate = rc.train_dropout;
    TrainConfig tc = rc.train;
    tc.seed = derive_seed(rc.seed, 4);
    auto [model, report] = train(triples, arch, tc);

    std::vector<LabeledTriple> val;
    for (std::size_t idx : report.val_indices) val.push_back(triples[idx]);
    const double r2_val = validation_scatter(model, val).r2;

    model.scaler = p.scaler;
    model.provenance = provenance_json(rc, p);
    save_checkpoint(model, (out / "checkpoint.gquq").string());
    json cfg_json = {{"depth", rc.train_depth},      {"width", rc.train_width},
                     {"batch_size", tc.batch_size},  {"lr", tc.lr},
                     {"dropout", rc.train_dropout},  {"max_epochs", tc.max_epochs}};
    write_json_file(out / "report.json", report_json(cfg_json, r2_val, report));
}

struct GenerateFlags {
    std::string checkpoint;
    std::vector<std::string> y_inline;
    std::string y_csv;
    std::int64_t K = 2000;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool force = false;
};

std::vector<Eigen::VectorXd> observation_rows(const GenerateFlags& fl,
                                              const GeneratorModel& model) {
    const Eigen::Index q = model.scaler.y_mean.size();
    std::vector<Eigen::VectorXd> rows;
    for (const auto& spec : fl.y_inline) {
        std::vector<double> vals;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw config_error("cannot parse observation value '" + tok + "' in --y " + spec);
            }
        }
        if (static_cast<Eigen::Index>(vals.size()) != q)
            throw config_error("--y " + spec + " has " + std::to_string(vals.size()) +
                               " values; the model expects q = " + std::to_string(q));
        rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                   static_cast<Eigen::Index>(vals.size())));
    }
    if (!fl.y_csv.empty()) {
        CsvTable table = read_csv(fl.y_csv);
        std::vector<std::string> y_names;
        if (model.provenance.contains("data") && model.provenance["data"].contains("y_cols"))
            y_names = model.provenance["data"]["y_cols"].get<std::vector<std::string>>();
        std::vector<Eigen::Index> cols;
        bool by_name = static_cast<Eigen::Index>(y_names.size()) == q;
        if (by_name) {
            for (const auto& name : y_names) {
                auto it = std::find(table.header.begin(), table.header.end(), name);
                if (it == table.header.end()) {
                    by_name = false;
                    break;
                }
                cols.push_back(it - table.header.begin());
            }
        }
        if (!by_name) {
            if (table.values.cols() != q)
                throw config_error(fl.y_csv + " has " + std::to_string(table.values.cols()) +
                                   " columns; the model expects q = " + std::to_string(q));
            cols.clear();
            for (Eigen::Index j = 0; j < q; ++j) cols.push_back(j);
        }
        for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
            Eigen::VectorXd y(q);
            for (Eigen::Index j = 0; j < q; ++j) y[j] = table.values(i, cols[static_cast<std::size_t>(j)]);
            rows.push_back(y);
        }
    }
    if (rows.empty())
        throw config_error("no observations given; pass --y values or --y-csv file");
    return rows;
}

void cmd_generate(const GenerateFlags& fl) {
    if (fl.K < 1) throw config_error("--k must be at least 1");
    GeneratorModel model = load_checkpoint(fl.checkpoint);
    std::vector<Eigen::VectorXd> rows = observation_rows(fl, model);
    const fs::path out = fl.out_dir;
    ensure_dir(out);
    std::vector<std::string> artifacts;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        artifacts.push_back("ensemble_" + std::to_string(i) + ".csv");
        artifacts.push_back("summary_" + std::to_string(i) + ".json");
    }
    require_fresh(out, artifacts, fl.force);
    const std::vector<std::string> x_names = provenance_x_names(model);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EnsembleForecast f = ensemble(model, rows[i], static_cast<std::size_t>(fl.K),
                                      derive_seed(fl.seed, i));
        write_forecast(out, i, f, x_names);
    }
}

struct EvaluateFlags {
    std::string checkpoint;
    std::string test_csv;
    std::string out_dir;
    std::int64_t n_triples = 2000;
    std::int64_t K = 2000;
    std::uint64_t seed = 0;
    int threads = 0;
    bool force = false;
};

void cmd_evaluate(const EvaluateFlags& fl) {
    if (fl.K < 2) throw config_error("--k must be at least 2");
    if (fl.n_triples < 10) throw config_error("--triples must be at least 10");
    GeneratorModel model = load_checkpoint(fl.checkpoint);
    const json& prov = model.provenance;
    if (!prov.contains("data"))
        throw data_error(fl.checkpoint + ": checkpoint lacks data provenance");
    auto x_cols = prov["data"]["x_cols"].get<std::vector<std::string>>();
    auto y_cols = prov["data"]["y_cols"].get<std::vector<std::string>>();
    Dataset test = load_csv(fl.test_csv, x_cols, y_cols);
    const fs::path out = fl.out_dir;
    ensure_dir(out);
    require_fresh(out, {"metrics.json"}, fl.force);
    json metrics = evaluate_metrics(model, test, static_cast<std::size_t>(fl.n_triples),
                                    static_cast<std::size_t>(fl.K), fl.seed,
                                    resolve_threads(fl.threads));
    write_json_file(out / "metrics.json", metrics);
    std::cout << "r2 " << fmt_double(metrics["r2"].get<double>()) << "\n";
}

struct DemoFlags {
    std::string out_dir;
    std::uint64_t seed = 0;
    std::int64_t n_samples = 10000;
    std::vector<std::string> sets;
    int threads = 0;
    bool force = false;
};

// End-to-end reference problem: x ~ U[-2,2], y = x^2 observed with sigma =
// 0.01 noise. Synthesizes data, tunes, evaluates the held-out split, and
// forecasts three observations with analytic cross-checks.
void cmd_bimodal_demo(const DemoFlags& fl) {
    if (fl.n_samples < 10) throw config_error("--n-samples must be at least 10");
    static const char* kDemoDefaults =
        "[data]\n"
        "test_fraction = 0.2\n"
        "[flow]\n"
        "n_steps = 100\n"
        "batch_size = 0\n"
        "n_triples = 20000\n"
        "[likelihood]\n"
        "mode = \"explicit_gaussian\"\n"
        "sigma = 0.01\n"
        "[eval]\n"
        "n_ensemble = 2000\n"
        "y_star = [0.25, 1.0, 2.25]\n";
    Config cfg = Config::parse_string(kDemoDefaults, "<demo defaults>");
    cfg.apply_override("run.seed=" + std::to_string(fl.seed));
    for (const auto& s : fl.sets) cfg.apply_override(s);
    RunConfig rc = resolve_run_config(cfg);
    if (!fl.out_dir.empty()) rc.output_dir = fl.out_dir;
    if (fl.threads > 0) rc.threads = fl.threads;
    const fs::path out = required_out_dir(rc);
    const int workers = resolve_threads(rc.threads);

    ensure_dir(out);
    std::vector<std::string> artifacts = {"metrics.json", "summary.txt"};
    const Eigen::Index q = 1;
    const std::size_t n_targets = rc.y_star_flat.size() / static_cast<std::size_t>(q);
    for (std::size_t i = 0; i < n_targets; ++i) {
        artifacts.push_back("ensemble_" + std::to_string(i) + ".csv");
        artifacts.push_back("summary_" + std::to_string(i) + ".json");
    }
    require_fresh(out, artifacts, fl.force);

    // The dataset stores exact forward evaluations; observation noise enters
    // through the explicit likelihood, not the stored pairs.
    Dataset raw = make_bimodal(static_cast<std::size_t>(fl.n_samples), 0.0,
                               derive_seed(rc.seed, 0));
    TuneArtifacts art = tune_pipeline(raw, rc, out, workers, fl.force);

    json metrics = evaluate_metrics(art.model, art.test_raw,
                                    std::min<std::size_t>(2000, rc.n_triples),
                                    rc.n_ensemble, rc.seed, workers);

    const std::vector<std::string> x_names = provenance_x_names(art.model);
    json targets = json::array();
    std::ostringstream text;
    text << "bimodal demo: x ~ U[-2,2], y = x^2 + Normal(0, " << fmt_double(rc.lik_sigma)
         << "^2)\n";
    text << "dataset " << fl.n_samples << " rows, " << rc.n_triples << " labeled triples, seed "
         << rc.seed << "\n";
    text << "held-out scatter R^2: " << fmt_double(metrics["r2"].get<double>()) << "\n\n";
    for (std::size_t i = 0; i < n_targets; ++i) {
        const double y = rc.y_star_flat[i];
        Eigen::VectorXd y_vec(1);
        y_vec << y;
        EnsembleForecast f =
            ensemble(art.model, y_vec, rc.n_ensemble, derive_seed(rc.seed, 500 + i));
        write_forecast(out, i, f, x_names);

        std::vector<double> samples(f.samples.data(), f.samples.data() + f.samples.rows());
        std::vector<double> modes = sample_modes(samples, -2.0, 2.0);
        if (modes.size() > 2) modes.resize(2);
        std::sort(modes.begin(), modes.end());
        double positive = 0.0, origin = 0.0;
        for (double s : samples) {
            if (s > 0.0) positive += 1.0;
            if (std::abs(s) < 0.3) origin += 1.0;
        }
        positive /= static_cast<double>(samples.size());
        origin /= static_cast<double>(samples.size());

        AnalyticPosterior oracle = bimodal_reference(y, rc.lik_sigma);
        const double w1 = oracle.w1_to_samples(samples);
        std::vector<double> oracle_modes = oracle.modes();
        std::sort(oracle_modes.begin(), oracle_modes.end());

        json t;
        t["y"] = y;
        t["modes"] = modes;
        t["sign_split"] = positive;
        t["origin_mass"] = origin;
        t["w1"] = w1;
        t["oracle"] = {{"modes", oracle_modes},
                       {"sign_split", oracle.sign_split()},
                       {"mean", oracle.mean()},
                       {"std", oracle.std()}};
        targets.push_back(t);

        text << "y* = " << fmt_double(y) << "\n";
        text << "  ensemble modes:";
        for (double m : modes) text << " " << fmt_double(m);
        text << " (analytic:";
        for (double m : oracle_modes) text << " " << fmt_double(m);
        text << ")\n";
        text << "  sign split " << fmt_double(positive) << ", mass within 0.3 of origin "
             << fmt_double(origin) << ", W1 to analytic " << fmt_double(w1) << "\n";
    }
    metrics["targets"] = targets;
    write_json_file(out / "metrics.json", metrics);
    write_text_file(out / "summary.txt", text.str());
    std::cout << text.str();
}

struct ReduceFitFlags {
    std::string fields_csv;
    std::int64_t k = 20;
    std::string out_file;
    bool force = false;
};

void cmd_reduce_fit(const ReduceFitFlags& fl) {
    CsvTable table = read_csv(fl.fields_csv);
    if (!fl.force && fs::exists(fl.out_file))
        throw config_error("refusing to overwrite " + fl.out_file +
                           "; pass --force to allow it");
    LinearReducer r = fit_reducer(table.values, fl.k);
    save_reducer(r, fl.out_file);
    std::cout << "fitted reducer: D = " << r.D() << ", k = " << r.k()
              << ", top explained ratio " << fmt_double(r.explained_ratio[0]) << "\n";
}

struct ReduceApplyFlags {
    std::string reducer_file;
    std::string input_csv;
    std::string out_file;
    bool force = false;
};

void cmd_reduce_apply(const ReduceApplyFlags& fl, bool encode_direction) {
    LinearReducer r = load_reducer(fl.reducer_file);
    CsvTable table = read_csv(fl.input_csv);
    if (!fl.force && fs::exists(fl.out_file))
        throw config_error("refusing to overwrite " + fl.out_file +
                           "; pass --force to allow it");
    Eigen::MatrixXd out_values;
    std::vector<std::string> header;
    if (encode_direction) {
        out_values = encode_rows(r, table.values);
        header = default_names("c", r.k());
    } else {
        out_values = decode_rows(r, table.values);
        header = default_names("f", r.D());
    }
    write_csv(fl.out_file, header, out_values);
}

struct OracleFlags {
    std::string problem = "bimodal";
    double y = 1.0;
    double sigma = 0.01;
};

void cmd_oracle(const OracleFlags& fl) {
    json out;
    if (fl.problem == "bimodal") {
        AnalyticPosterior p = bimodal_reference(fl.y, fl.sigma);
        out = {{"problem", "bimodal"},
               {"y", fl.y},
               {"sigma", fl.sigma},
               {"modes", p.modes()},
               {"sign_split", p.sign_split()},
               {"mean", p.mean()},
               {"std", p.std()},
               {"normalization", p.normalization()}};
    } else if (fl.problem == "conjugate") {
        if (!(fl.sigma > 0.0)) throw config_error("--sigma must be positive");
        const double mean = fl.y / (1.0 + fl.sigma * fl.sigma);
        const double var = fl.sigma * fl.sigma / (1.0 + fl.sigma * fl.sigma);
        out = {{"problem", "conjugate"},
               {"y", fl.y},
               {"sigma", fl.sigma},
               {"mean", mean},
               {"std", std::sqrt(var)}};
    } else {
        throw config_error("unknown oracle problem '" + fl.problem +
                           "'; expected bimodal or conjugate");
    }
    std::cout << out.dump(2) << "\n";
}

}  // namespace
}  // namespace genuq

int main(int argc, char** argv) {
    using namespace genuq;
    CLI::App app{
        "genuq: training-free conditional generation for inverse uncertainty "
        "quantification.\n"
        "Pipeline: probability-flow labeling of (parameter, observation) pairs, conditional "
        "generator training with hyperparameter search, ensemble posterior forecasts.\n"
        "Defaults: test_fraction 0.2, val_fraction 0.1, n_triples 20000, n_ensemble 2000, "
        "n_steps 100, score batch 256 (0 = full dataset)."};
    app.require_subcommand(1);

    CommonFlags tune_fl, train_fl;
    GenerateFlags gen_fl;
    EvaluateFlags eval_fl;
    DemoFlags demo_fl;
    ReduceFitFlags rfit_fl;
    ReduceApplyFlags renc_fl, rdec_fl;
    OracleFlags oracle_fl;

    auto add_common = [](CLI::App* cmd, CommonFlags& fl) {
        cmd->add_option("--config", fl.config_path, "TOML config file")->required();
        cmd->add_option("--set", fl.sets, "override a config value: section.key=value");
        cmd->add_option("--out", fl.out_dir, "output directory (overrides output.dir)");
        cmd->add_option("--threads", fl.threads,
                        "worker cap; 0 = GENAI4UQ_THREADS or hardware")
            ->capture_default_str();
        cmd->add_flag("--force", fl.force, "overwrite existing artifacts");
    };

    CLI::App* tune = app.add_subcommand(
        "tune", "label the dataset, run the hyperparameter search, save the best model");
    add_common(tune, tune_fl);
    tune->callback([&] { cmd_tune(tune_fl); });

    CLI::App* train = app.add_subcommand(
        "train", "label the dataset and train one fixed [train] configuration");
    add_common(train, train_fl);
    train->callback([&] { cmd_train(train_fl); });

    CLI::App* gen = app.add_subcommand("generate",
                                       "draw posterior ensembles from a saved checkpoint");
    gen->add_option("--checkpoint", gen_fl.checkpoint, "model checkpoint")->required();
    gen->add_option("--y", gen_fl.y_inline,
                    "inline observation, comma-separated q values; repeatable");
    gen->add_option("--y-csv", gen_fl.y_csv, "CSV of observations, one per row");
    gen->add_option("--k", gen_fl.K, "ensemble size")->capture_default_str();
    gen->add_option("--seed", gen_fl.seed, "reference-draw seed")->capture_default_str();
    gen->add_option("--out", gen_fl.out_dir, "output directory")->required();
    gen->add_flag("--force", gen_fl.force, "overwrite existing artifacts");
    gen->callback([&] { cmd_generate(gen_fl); });

    CLI::App* eval = app.add_subcommand(
        "evaluate", "score a checkpoint against held-out (x, y) rows");
    eval->add_option("--checkpoint", eval_fl.checkpoint, "model checkpoint")->required();
    eval->add_option("--test", eval_fl.test_csv, "held-out CSV with the training columns")
        ->required();
    eval->add_option("--out", eval_fl.out_dir, "output directory")->required();
    eval->add_option("--triples", eval_fl.n_triples, "reference triples for the scatter R^2")
        ->capture_default_str();
    eval->add_option("--k", eval_fl.K, "per-row ensemble size")->capture_default_str();
    eval->add_option("--seed", eval_fl.seed, "evaluation seed")->capture_default_str();
    eval->add_option("--threads", eval_fl.threads,
                     "worker cap; 0 = GENAI4UQ_THREADS or hardware")
        ->capture_default_str();
    eval->add_flag("--force", eval_fl.force, "overwrite existing artifacts");
    eval->callback([&] { cmd_evaluate(eval_fl); });

    CLI::App* demo = app.add_subcommand(
        "bimodal-demo", "end-to-end reference run on the y = x^2 problem");
    demo->add_option("--out", demo_fl.out_dir, "output directory")->required();
    demo->add_option("--seed", demo_fl.seed, "global seed")->capture_default_str();
    demo->add_option("--n-samples", demo_fl.n_samples, "synthesized dataset size")
        ->capture_default_str();
    demo->add_option("--set", demo_fl.sets, "override a demo config value: section.key=value");
    demo->add_option("--threads", demo_fl.threads,
                     "worker cap; 0 = GENAI4UQ_THREADS or hardware")
        ->capture_default_str();
    demo->add_flag("--force", demo_fl.force, "overwrite existing artifacts");
    demo->callback([&] { cmd_bimodal_demo(demo_fl); });

    CLI::App* reduce = app.add_subcommand("reduce",
                                          "linear dimension reduction for field-valued targets");
    reduce->require_subcommand(1);
    CLI::App* rfit = reduce->add_subcommand("fit", "fit a k-component reducer to field rows");
    rfit->add_option("--fields", rfit_fl.fields_csv, "CSV of field rows")->required();
    rfit->add_option("--k", rfit_fl.k, "latent dimension")->capture_default_str();
    rfit->add_option("--out", rfit_fl.out_file, "reducer output file")->required();
    rfit->add_flag("--force", rfit_fl.force, "overwrite an existing file");
    rfit->callback([&] { cmd_reduce_fit(rfit_fl); });
    CLI::App* renc = reduce->add_subcommand("encode", "project field rows to latents");
    renc->add_option("--reducer", renc_fl.reducer_file, "fitted reducer")->required();
    renc->add_option("--fields", renc_fl.input_csv, "CSV of field rows")->required();
    renc->add_option("--out", renc_fl.out_file, "latent CSV")->required();
    renc->add_flag("--force", renc_fl.force, "overwrite an existing file");
    renc->callback([&] { cmd_reduce_apply(renc_fl, true); });
    CLI::App* rdec = reduce->add_subcommand("decode", "reconstruct fields from latents");
    rdec->add_option("--reducer", rdec_fl.reducer_file, "fitted reducer")->required();
    rdec->add_option("--latents", rdec_fl.input_csv, "CSV of latent rows")->required();
    rdec->add_option("--out", rdec_fl.out_file, "reconstruction CSV")->required();
    rdec->add_flag("--force", rdec_fl.force, "overwrite an existing file");
    rdec->callback([&] { cmd_reduce_apply(rdec_fl, false); });

    CLI::App* oracle = app.add_subcommand("oracle",
                                          "print analytic reference posteriors (debugging aid)");
    oracle->group("");  // hidden from --help
    oracle->add_option("--problem", oracle_fl.problem, "bimodal | conjugate");
    oracle->add_option("--y", oracle_fl.y, "observation value");
    oracle->add_option("--sigma", oracle_fl.sigma, "noise scale");
    oracle->callback([&] { cmd_oracle(oracle_fl); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
