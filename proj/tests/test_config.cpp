#include <doctest.h>

#include <cmath>
#include <string>

#include "genuq/config.hpp"
#include "genuq/errors.hpp"
#include "helpers.hpp"

using genuq::Config;

namespace {

// Minimal valid document; tests append one bad line each.
const char* kBase = "[likelihood]\nsigma = 0.5\n";

genuq::RunConfig resolve_with(const std::string& extra) {
    Config cfg = Config::parse_string(std::string(kBase) + extra, "test");
    return genuq::resolve_run_config(cfg);
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parses the supported syntax") {
    const char* text =
        "# leading comment\n"
        "title = \"demo # not a comment\"\n"
        "\n"
        "[data]\n"
        "path = \"data/input.csv\"  # trailing comment\n"
        "x_cols = [\"x1\", \"x2\"]\n"
        "test_fraction = 0.25\n"
        "\n"
        "[flow]\n"
        "n_steps = 150\n"
        "enabled = true\n"
        "values = [1,\n"
        "  2, 3,  # comment inside the array\n"
        "]\n"
        "esc = \"a\\\"b\\\\c\\nd\\te\"\n";
    Config cfg = Config::parse_string(text, "test");
    CHECK(cfg.get_string("title", "") == "demo # not a comment");
    CHECK(cfg.get_string("data.path", "") == "data/input.csv");
    CHECK(cfg.get_strings("data.x_cols", {}) == std::vector<std::string>{"x1", "x2"});
    CHECK(cfg.get_double("data.test_fraction", 0.0) == 0.25);
    CHECK(cfg.get_int("flow.n_steps", 0) == 150);
    CHECK(cfg.get_bool("flow.enabled", false) == true);
    CHECK(cfg.get_ints("flow.values", {}) == std::vector<std::int64_t>{1, 2, 3});
    CHECK(cfg.get_string("flow.esc", "") == "a\"b\\c\nd\te");
    CHECK(cfg.contains("flow.n_steps"));
    CHECK(!cfg.contains("flow.missing"));
}

TEST_CASE("scalar conversions and fallbacks") {
    Config cfg = Config::parse_string("[a]\nn = 7\nxs = [1, 2.5]\none = 4\n", "test");
    // Integers widen to doubles on demand.
    CHECK(cfg.get_double("a.n", 0.0) == 7.0);
    CHECK(cfg.get_doubles("a.xs", {}) == std::vector<double>{1.0, 2.5});
    // A lone scalar reads as a one-element list.
    CHECK(cfg.get_ints("a.one", {}) == std::vector<std::int64_t>{4});
    CHECK(cfg.get_int("a.absent", 42) == 42);
    CHECK(cfg.get_string("a.absent", "dflt") == "dflt");
    CHECK(cfg.get_doubles("a.absent", {3.0}) == std::vector<double>{3.0});
}

TEST_CASE("type errors name the offending key") {
    Config cfg = Config::parse_string("[a]\nlabel = \"text\"\nn = 3\n", "test");
    CHECK_THROWS_WITH_AS(cfg.get_int("a.label", 0), doctest::Contains("a.label"),
                         genuq::config_error);
    CHECK_THROWS_WITH_AS(cfg.get_bool("a.n", false), doctest::Contains("a.n"),
                         genuq::config_error);
    CHECK_THROWS_WITH_AS(cfg.get_strings("a.n", {}), doctest::Contains("a.n"),
                         genuq::config_error);
}

TEST_CASE("parse errors carry origin and line number") {
    auto parse = [](const char* text) { return Config::parse_string(text, "orig"); };
    CHECK_THROWS_WITH_AS(parse("key value\n"), doctest::Contains("orig:1"),
                         genuq::config_error);
    CHECK_THROWS_WITH_AS(parse("\n\nx = \"open\n"), doctest::Contains("orig:3"),
                         genuq::config_error);
    CHECK_THROWS_AS(parse("x = [1, 2\n"), genuq::config_error);       // unterminated array
    CHECK_THROWS_AS(parse("x = [[1], [2]]\n"), genuq::config_error);  // nested array
    CHECK_THROWS_AS(parse("x = \"a\\qb\"\n"), genuq::config_error);   // unknown escape
    CHECK_THROWS_AS(parse("[data\nx = 1\n"), genuq::config_error);    // malformed header
    CHECK_THROWS_AS(parse("a b = 1\n"), genuq::config_error);         // malformed key
    CHECK_THROWS_AS(parse("x = 99999999999999999999999\n"), genuq::config_error);
    CHECK_THROWS_AS(parse("x = nan\n"), genuq::config_error);
    CHECK_THROWS_AS(parse("x =\n"), genuq::config_error);             // missing value
}

TEST_CASE("file round trip and missing file") {
    testutil::TempDir tmp("config");
    const std::string path = tmp.file("run.toml");
    testutil::write_file(path, "[run]\nseed = 9\n");
    Config cfg = Config::parse_file(path);
    CHECK(cfg.get_int("run.seed", 0) == 9);
    CHECK_THROWS_AS(Config::parse_file(tmp.file("absent.toml")), genuq::config_error);
}

TEST_CASE("overrides replace file values") {
    Config cfg = Config::parse_string("[flow]\nn_steps = 100\n", "test");
    cfg.apply_override("flow.n_steps=250");
    CHECK(cfg.get_int("flow.n_steps", 0) == 250);
    cfg.apply_override("run.seed=42");
    CHECK(cfg.get_int("run.seed", 0) == 42);
    cfg.apply_override("data.x_cols=[\"a\",\"b\"]");
    CHECK(cfg.get_strings("data.x_cols", {}) == std::vector<std::string>{"a", "b"});

    CHECK_THROWS_AS(cfg.apply_override("flow.n_steps"), genuq::config_error);
    CHECK_THROWS_AS(cfg.apply_override("nsteps=5"), genuq::config_error);
    CHECK_THROWS_AS(cfg.apply_override("flow.n_steps=abc"), genuq::config_error);
}

TEST_CASE("resolved defaults") {
    auto rc = resolve_with("");
    CHECK(rc.test_fraction == 0.2);
    CHECK(rc.t_min == 1e-3);
    CHECK(rc.n_steps == 100);
    CHECK(rc.batch_size == 256);
    CHECK(rc.n_triples == 20000);
    CHECK(rc.lik_mode == genuq::LikelihoodMode::explicit_gaussian);
    CHECK(rc.lik_sigma == 0.5);
    CHECK(rc.n_ensemble == 2000);
    CHECK(rc.seed == 0);
    CHECK(rc.threads == 0);
    CHECK(rc.train_depth == 2);
    CHECK(rc.train_width == 64);
    CHECK(rc.train_dropout == 0.05);
}

TEST_CASE("kernel mode needs no sigma") {
    Config cfg = Config::parse_string("[likelihood]\nmode = \"observation_kernel\"\n", "t");
    auto rc = genuq::resolve_run_config(cfg);
    CHECK(rc.lik_mode == genuq::LikelihoodMode::observation_kernel);

    // Explicit mode with the zero default is rejected.
    Config empty = Config::parse_string("", "t");
    CHECK_THROWS_WITH_AS(genuq::resolve_run_config(empty),
                         doctest::Contains("likelihood.sigma"), genuq::config_error);
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK_THROWS_WITH_AS(resolve_with("[data]\npth = \"x.csv\"\n"),
                         doctest::Contains("data.pth"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("top_level = 1\n"),
                         doctest::Contains("unknown config key"), genuq::config_error);
}

TEST_CASE("range errors name the section.key") {
    CHECK_THROWS_WITH_AS(resolve_with("[data]\ntest_fraction = 1.5\n"),
                         doctest::Contains("data.test_fraction"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[schedule]\nt_min = 0.7\n"),
                         doctest::Contains("schedule.t_min"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[flow]\nn_triples = 5\n"),
                         doctest::Contains("flow.n_triples"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[flow]\nn_steps = 0\n"),
                         doctest::Contains("flow.n_steps"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("mode = \"banana\"\n"),
                         doctest::Contains("likelihood.mode"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[search]\ndepths = [3]\n"),
                         doctest::Contains("search.depths"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[search]\nlr_min = 0.1\n"),
                         doctest::Contains("search.lr_min"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[search]\ndropout_max = 0.7\n"),
                         doctest::Contains("search.dropout_min"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[train]\ndropout = 0.6\n"),
                         doctest::Contains("train.dropout"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[train]\nval_fraction = 0.0\n"),
                         doctest::Contains("train.val_fraction"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[eval]\nn_ensemble = 0\n"),
                         doctest::Contains("eval.n_ensemble"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[run]\nseed = -1\n"),
                         doctest::Contains("run.seed"), genuq::config_error);
    CHECK_THROWS_WITH_AS(resolve_with("[run]\nthreads = -2\n"),
                         doctest::Contains("run.threads"), genuq::config_error);
}

TEST_CASE("selected hyperparameter fragments reparse cleanly") {
    // Shape written next to checkpoints for reuse via --config.
    const char* fragment =
        "# hyperparameters selected by search; drop into a [train] section\n"
        "[train]\n"
        "depth = 2\n"
        "width = 128\n"
        "batch_size = 64\n"
        "lr = 0.0031622776601683794\n"
        "dropout = 0.014999999999999999\n"
        "max_epochs = 300\n";
    auto rc = resolve_with(fragment);
    CHECK(rc.train_depth == 2);
    CHECK(rc.train_width == 128);
    CHECK(rc.train.batch_size == 64);
    CHECK(rc.train.lr == 0.0031622776601683794);
    CHECK(rc.train_dropout == 0.014999999999999999);
    CHECK(rc.train.max_epochs == 300);
}

TEST_CASE("sigma conversion to standardized units") {
    Eigen::VectorXd one(1);
    one << 2.0;
    CHECK(genuq::standardized_sigma(0.5, one) == doctest::Approx(0.25).epsilon(1e-14));
    Eigen::VectorXd two(2);
    two << 1.0, 2.0;
    CHECK(genuq::standardized_sigma(2.0, two) ==
          doctest::Approx(2.0 * std::sqrt(0.625)).epsilon(1e-14));
    CHECK_THROWS_AS(genuq::standardized_sigma(1.0, Eigen::VectorXd()), genuq::config_error);
}

}  // TEST_SUITE
