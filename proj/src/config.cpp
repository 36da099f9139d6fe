#include "genuq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "genuq/errors.hpp"

namespace genuq {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    throw config_error(origin + ":" + std::to_string(line) + ": " + what);
}

// Cuts a trailing comment, honoring double-quoted strings.
std::string strip_comment(const std::string& line, const std::string& origin, int lineno) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    if (in_str) fail(origin, lineno, "unterminated string");
    return line;
}

int bracket_balance(const std::string& s) {
    bool in_str = false;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
        }
    }
    return depth;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            return false;
    }
    return k.front() != '.' && k.back() != '.';
}

std::string parse_quoted(const std::string& raw, std::size_t& pos, const std::string& origin,
                         int line) {
    std::string out;
    ++pos;  // opening quote
    while (pos < raw.size()) {
        char c = raw[pos++];
        if (c == '"') return out;
        if (c == '\\') {
            if (pos >= raw.size()) fail(origin, line, "dangling escape in string");
            char e = raw[pos++];
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: fail(origin, line, std::string("unsupported escape \\") + e);
            }
        } else {
            out += c;
        }
    }
    fail(origin, line, "unterminated string");
}

ConfigValue parse_scalar(const std::string& raw, const std::string& origin, int line,
                         const std::string& key) {
    ConfigValue v;
    if (!raw.empty() && raw.front() == '"') {
        std::size_t pos = 0;
        v.kind = ConfigValue::Kind::text;
        v.s = parse_quoted(raw, pos, origin, line);
        if (!trim(raw.substr(pos)).empty())
            fail(origin, line, "trailing characters after string for '" + key + "'");
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.b = (raw == "true");
        return v;
    }
    bool int_like = !raw.empty();
    for (std::size_t i = 0; i < raw.size() && int_like; ++i) {
        char c = raw[i];
        if (i == 0 && (c == '+' || c == '-')) {
            int_like = raw.size() > 1;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) int_like = false;
    }
    if (int_like) {
        std::int64_t val = 0;
        auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), val);
        if (ec != std::errc() || p != raw.data() + raw.size())
            fail(origin, line, "integer out of range for '" + key + "': " + raw);
        v.kind = ConfigValue::Kind::integer;
        v.i = val;
        return v;
    }
    double dv = 0.0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), dv);
    if (ec != std::errc() || p != raw.data() + raw.size() || !std::isfinite(dv))
        fail(origin, line, "cannot parse value for '" + key + "': " + raw);
    v.kind = ConfigValue::Kind::real;
    v.d = dv;
    return v;
}

// Splits array items at top-level commas (strings may contain commas).
std::vector<std::string> split_items(const std::string& body, const std::string& origin,
                                     int line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_str = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (in_str) {
            cur += c;
            if (c == '\\' && i + 1 < body.size()) cur += body[++i];
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
            cur += c;
        } else if (c == '[') {
            fail(origin, line, "nested arrays are not supported");
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    std::string last = trim(cur);
    if (!last.empty()) out.push_back(last);
    for (const auto& item : out)
        if (item.empty()) fail(origin, line, "empty array element");
    return out;
}

ConfigValue parse_value(const std::string& raw, const std::string& origin, int line,
                        const std::string& key) {
    if (raw.empty()) fail(origin, line, "missing value for '" + key + "'");
    if (raw.front() == '[') {
        if (raw.back() != ']') fail(origin, line, "unterminated array for '" + key + "'");
        ConfigValue v;
        v.kind = ConfigValue::Kind::array;
        for (const auto& item : split_items(raw.substr(1, raw.size() - 2), origin, line))
            v.items.push_back(parse_scalar(item, origin, line, key));
        return v;
    }
    return parse_scalar(raw, origin, line, key);
}

const ConfigValue* find(const std::map<std::string, ConfigValue>& values,
                        const std::string& key) {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
}

[[noreturn]] void type_error(const std::string& key, const std::string& expected) {
    throw config_error("config value '" + key + "' must be " + expected);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const int start = lineno;
        std::string t = trim(strip_comment(line, origin, lineno));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(origin, start, "malformed section header: " + t);
            section = trim(t.substr(1, t.size() - 2));
            if (!valid_key(section)) fail(origin, start, "malformed section name: " + t);
            continue;
        }
        std::size_t eq = std::string::npos;
        bool in_str = false;
        for (std::size_t i = 0; i < t.size(); ++i) {
            char c = t[i];
            if (in_str) {
                if (c == '\\') ++i;
                else if (c == '"') in_str = false;
            } else if (c == '"') {
                in_str = true;
            } else if (c == '=') {
                eq = i;
                break;
            }
        }
        if (eq == std::string::npos) fail(origin, start, "expected key = value: " + t);
        std::string key = trim(t.substr(0, eq));
        if (!valid_key(key)) fail(origin, start, "malformed key: '" + key + "'");
        std::string value_text = trim(t.substr(eq + 1));
        while (bracket_balance(value_text) > 0) {
            if (!std::getline(in, line))
                fail(origin, start, "unterminated array for '" + key + "'");
            ++lineno;
            value_text += " " + trim(strip_comment(line, origin, lineno));
            value_text = trim(value_text);
        }
        std::string full = section.empty() ? key : section + "." + key;
        out.values_[full] = parse_value(value_text, origin, start, full);
    }
    return out;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

void Config::apply_override(const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw config_error("--set expects section.key=value, got: " + assignment);
    std::string key = trim(assignment.substr(0, eq));
    if (!valid_key(key) || key.find('.') == std::string::npos)
        throw config_error("--set expects a section.key name, got: '" + key + "'");
    values_[key] = parse_value(trim(assignment.substr(eq + 1)), "--set " + key, 1, key);
}

bool Config::contains(const std::string& key) const { return values_.count(key) != 0; }

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::integer) type_error(key, "an integer");
    return v->i;
}

double Config::get_double(const std::string& key, double fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    if (v->kind == ConfigValue::Kind::integer) return static_cast<double>(v->i);
    if (v->kind != ConfigValue::Kind::real) type_error(key, "a number");
    return v->d;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::boolean) type_error(key, "true or false");
    return v->b;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::text) type_error(key, "a quoted string");
    return v->s;
}

namespace {
// A lone scalar is accepted where a one-element array is expected.
std::vector<const ConfigValue*> as_items(const ConfigValue& v) {
    std::vector<const ConfigValue*> out;
    if (v.kind == ConfigValue::Kind::array) {
        for (const auto& item : v.items) out.push_back(&item);
    } else {
        out.push_back(&v);
    }
    return out;
}
}  // namespace

std::vector<std::int64_t> Config::get_ints(const std::string& key,
                                           std::vector<std::int64_t> fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    std::vector<std::int64_t> out;
    for (const ConfigValue* item : as_items(*v)) {
        if (item->kind != ConfigValue::Kind::integer) type_error(key, "an array of integers");
        out.push_back(item->i);
    }
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        std::vector<double> fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const ConfigValue* item : as_items(*v)) {
        if (item->kind == ConfigValue::Kind::integer) out.push_back(static_cast<double>(item->i));
        else if (item->kind == ConfigValue::Kind::real) out.push_back(item->d);
        else type_error(key, "an array of numbers");
    }
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             std::vector<std::string> fallback) const {
    const ConfigValue* v = find(values_, key);
    if (!v) return fallback;
    std::vector<std::string> out;
    for (const ConfigValue* item : as_items(*v)) {
        if (item->kind != ConfigValue::Kind::text) type_error(key, "an array of strings");
        out.push_back(item->s);
    }
    return out;
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "data.path", "data.x_cols", "data.y_cols", "data.test_fraction",
        "schedule.t_min",
        "flow.n_steps", "flow.batch_size", "flow.n_triples",
        "likelihood.mode", "likelihood.sigma",
        "search.n_trials", "search.depths", "search.widths", "search.batch_sizes",
        "search.lr_min", "search.lr_max", "search.dropout_min", "search.dropout_max",
        "search.max_epochs",
        "train.depth", "train.width", "train.dropout", "train.lr", "train.batch_size",
        "train.max_epochs", "train.val_fraction", "train.min_delta", "train.patience",
        "train.gap_threshold", "train.ma_window",
        "eval.n_ensemble", "eval.y_star", "eval.y_star_path",
        "output.dir",
        "run.seed", "run.threads",
    };
    return keys;
}

void check(bool ok, const std::string& key, const std::string& requirement) {
    if (!ok) throw config_error("config value '" + key + "' " + requirement);
}

std::size_t get_size(const Config& cfg, const std::string& key, std::size_t fallback) {
    std::int64_t v = cfg.get_int(key, static_cast<std::int64_t>(fallback));
    check(v >= 0, key, "must be non-negative");
    return static_cast<std::size_t>(v);
}

int get_bounded_int(const Config& cfg, const std::string& key, int fallback, int lo) {
    std::int64_t v = cfg.get_int(key, fallback);
    check(v >= lo && v <= 1'000'000'000, key,
          "must lie in [" + std::to_string(lo) + ", 1e9]");
    return static_cast<int>(v);
}

std::vector<int> get_int_list(const Config& cfg, const std::string& key,
                              std::vector<int> fallback, int lo) {
    std::vector<std::int64_t> fb(fallback.begin(), fallback.end());
    std::vector<std::int64_t> raw = cfg.get_ints(key, fb);
    check(!raw.empty(), key, "must not be empty");
    std::vector<int> out;
    for (std::int64_t v : raw) {
        check(v >= lo && v <= 1'000'000, key,
              "entries must lie in [" + std::to_string(lo) + ", 1e6]");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace

RunConfig resolve_run_config(const Config& cfg) {
    for (const auto& [key, value] : cfg.entries())
        if (!known_keys().count(key)) throw config_error("unknown config key '" + key + "'");

    RunConfig rc;
    rc.data_path = cfg.get_string("data.path", "");
    rc.x_cols = cfg.get_strings("data.x_cols", {});
    rc.y_cols = cfg.get_strings("data.y_cols", {});
    rc.test_fraction = cfg.get_double("data.test_fraction", rc.test_fraction);
    check(rc.test_fraction > 0.0 && rc.test_fraction < 1.0, "data.test_fraction",
          "must lie in (0, 1)");

    rc.t_min = cfg.get_double("schedule.t_min", rc.t_min);
    check(rc.t_min > 0.0 && rc.t_min < 0.5, "schedule.t_min", "must lie in (0, 0.5)");
    rc.n_steps = get_bounded_int(cfg, "flow.n_steps", rc.n_steps, 1);
    rc.batch_size = get_size(cfg, "flow.batch_size", rc.batch_size);
    rc.n_triples = get_size(cfg, "flow.n_triples", rc.n_triples);
    check(rc.n_triples >= 10, "flow.n_triples", "must be at least 10");

    std::string mode = cfg.get_string("likelihood.mode", "explicit_gaussian");
    if (mode == "explicit_gaussian") rc.lik_mode = LikelihoodMode::explicit_gaussian;
    else if (mode == "observation_kernel") rc.lik_mode = LikelihoodMode::observation_kernel;
    else
        throw config_error(
            "config value 'likelihood.mode' must be \"explicit_gaussian\" or "
            "\"observation_kernel\"");
    rc.lik_sigma = cfg.get_double("likelihood.sigma", rc.lik_sigma);
    if (rc.lik_mode == LikelihoodMode::explicit_gaussian)
        check(rc.lik_sigma > 0.0, "likelihood.sigma",
              "must be positive for explicit_gaussian mode");

    rc.space.n_trials = get_bounded_int(cfg, "search.n_trials", rc.space.n_trials, 1);
    rc.space.depths = get_int_list(cfg, "search.depths", rc.space.depths, 1);
    for (int depth : rc.space.depths)
        check(depth == 1 || depth == 2, "search.depths", "entries must be 1 or 2");
    rc.space.widths = get_int_list(cfg, "search.widths", rc.space.widths, 1);
    rc.space.batch_sizes = get_int_list(cfg, "search.batch_sizes", rc.space.batch_sizes, 1);
    rc.space.lr_min = cfg.get_double("search.lr_min", rc.space.lr_min);
    rc.space.lr_max = cfg.get_double("search.lr_max", rc.space.lr_max);
    check(rc.space.lr_min > 0.0 && rc.space.lr_min <= rc.space.lr_max, "search.lr_min",
          "must satisfy 0 < lr_min <= lr_max");
    rc.space.dropout_min = cfg.get_double("search.dropout_min", rc.space.dropout_min);
    rc.space.dropout_max = cfg.get_double("search.dropout_max", rc.space.dropout_max);
    check(rc.space.dropout_min >= 0.0 && rc.space.dropout_min <= rc.space.dropout_max &&
              rc.space.dropout_max < 0.5,
          "search.dropout_min", "must satisfy 0 <= min <= max < 0.5");
    rc.space.max_epochs = get_bounded_int(cfg, "search.max_epochs", rc.space.max_epochs, 1);

    rc.train_depth = get_bounded_int(cfg, "train.depth", rc.train_depth, 1);
    check(rc.train_depth <= 2, "train.depth", "must be 1 or 2");
    rc.train_width = get_bounded_int(cfg, "train.width", rc.train_width, 1);
    rc.train_dropout = cfg.get_double("train.dropout", rc.train_dropout);
    check(rc.train_dropout >= 0.0 && rc.train_dropout < 0.5, "train.dropout",
          "must lie in [0, 0.5)");
    rc.train.lr = cfg.get_double("train.lr", rc.train.lr);
    check(rc.train.lr > 0.0, "train.lr", "must be positive");
    rc.train.batch_size = get_bounded_int(cfg, "train.batch_size", rc.train.batch_size, 1);
    rc.train.max_epochs = get_bounded_int(cfg, "train.max_epochs", rc.train.max_epochs, 1);
    rc.train.val_fraction = cfg.get_double("train.val_fraction", rc.train.val_fraction);
    check(rc.train.val_fraction > 0.0 && rc.train.val_fraction < 1.0, "train.val_fraction",
          "must lie in (0, 1)");
    rc.train.min_delta = cfg.get_double("train.min_delta", rc.train.min_delta);
    check(rc.train.min_delta >= 0.0, "train.min_delta", "must be non-negative");
    rc.train.patience = get_bounded_int(cfg, "train.patience", rc.train.patience, 1);
    rc.train.gap_threshold = cfg.get_double("train.gap_threshold", rc.train.gap_threshold);
    check(rc.train.gap_threshold > 0.0, "train.gap_threshold", "must be positive");
    rc.train.ma_window = get_bounded_int(cfg, "train.ma_window", rc.train.ma_window, 1);

    rc.n_ensemble = get_size(cfg, "eval.n_ensemble", rc.n_ensemble);
    check(rc.n_ensemble >= 1, "eval.n_ensemble", "must be at least 1");
    rc.y_star_flat = cfg.get_doubles("eval.y_star", {});
    rc.y_star_path = cfg.get_string("eval.y_star_path", "");

    rc.output_dir = cfg.get_string("output.dir", "");
    std::int64_t seed = cfg.get_int("run.seed", 0);
    check(seed >= 0, "run.seed", "must be non-negative");
    rc.seed = static_cast<std::uint64_t>(seed);
    rc.threads = get_bounded_int(cfg, "run.threads", 0, 0);
    return rc;
}

double standardized_sigma(double sigma, const Eigen::VectorXd& y_std) {
    if (y_std.size() == 0) throw config_error("standardized_sigma: empty scale vector");
    double acc = 0.0;
    for (Eigen::Index j = 0; j < y_std.size(); ++j) acc += 1.0 / (y_std[j] * y_std[j]);
    return sigma * std::sqrt(acc / static_cast<double>(y_std.size()));
}

}  // namespace genuq
