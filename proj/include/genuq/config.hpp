#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "genuq/flow.hpp"
#include "genuq/schedule.hpp"
#include "genuq/score.hpp"
#include "genuq/trainer.hpp"
#include "genuq/tuner.hpp"

namespace genuq {

// One parsed config value. Arrays hold scalars only.
struct ConfigValue {
    enum class Kind { integer, real, boolean, text, array };
    Kind kind = Kind::text;
    std::int64_t i = 0;
    double d = 0.0;
    bool b = false;
    std::string s;
    std::vector<ConfigValue> items;
};

// TOML-subset document flattened to "section.key" entries. Supported
// syntax: [section] headers, key = value lines, # comments, integers,
// floats, booleans, double-quoted strings (\\ \" \n \t escapes), and
// single-level arrays of those scalars (may span lines until the bracket
// closes). That covers every config this tool reads or writes; fancier
// TOML (nested tables, dates, multi-line strings) is rejected with the
// offending line number.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin);

    // "section.key=value" from a --set flag; value syntax as in a file.
    void apply_override(const std::string& assignment);

    bool contains(const std::string& key) const;

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<std::int64_t> get_ints(const std::string& key,
                                       std::vector<std::int64_t> fallback) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::string> get_strings(const std::string& key,
                                         std::vector<std::string> fallback) const;

    const std::map<std::string, ConfigValue>& entries() const { return values_; }

private:
    std::map<std::string, ConfigValue> values_;
};

// Everything one pipeline run needs, resolved from defaults + file +
// overrides and range-checked. Error messages name the offending
// "section.key".
struct RunConfig {
    // [data]
    std::string data_path;
    std::vector<std::string> x_cols, y_cols;
    double test_fraction = 0.2;

    // [schedule] / [flow]
    double t_min = 1e-3;
    int n_steps = 100;
    std::size_t batch_size = 256;  // score mini-batch N; 0 = full dataset
    std::size_t n_triples = 20000; // M

    // [likelihood]; sigma is in problem y-units and is converted to
    // standardized units against the fitted scaler at pipeline time.
    LikelihoodMode lik_mode = LikelihoodMode::explicit_gaussian;
    double lik_sigma = 0.0;

    // [search]
    SearchSpace space;

    // [train]
    TrainConfig train;
    int train_depth = 2;
    int train_width = 64;
    double train_dropout = 0.05;

    // [eval]. y_star_flat is reshaped into rows of length q at use time.
    std::size_t n_ensemble = 2000;  // K
    std::vector<double> y_star_flat;
    std::string y_star_path;

    // [output] / [run]
    std::string output_dir;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = auto-detect
};

// Rejects unknown keys (typo guard) and out-of-range values.
RunConfig resolve_run_config(const Config& cfg);

// Standardized-unit likelihood sigma from a problem-unit one: exact for
// q = 1, the RMS-of-inverse-scales rule for q > 1.
double standardized_sigma(double sigma, const Eigen::VectorXd& y_std);

}  // namespace genuq
