#include "skycast/config/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "skycast/core/error.hpp"
#include "skycast/io/csv.hpp"

namespace skycast::config {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + text + "'");
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty entry in " + key);
        out.push_back(parse_number<int>(key, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

struct Binding {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string& name, const std::string& text)> set;
};

template <typename T>
Binding num(std::string section, std::string key, T& (*field)(RunConfig&)) {
    return {std::move(section), std::move(key),
            [field](const RunConfig& c) {
                const T v = field(const_cast<RunConfig&>(c));
                if constexpr (std::is_floating_point_v<T>) return io::format_double(v);
                else return std::to_string(v);
            },
            [field](RunConfig& c, const std::string& name, const std::string& text) {
                field(c) = parse_number<T>(name, text);
            }};
}

#define SKYCAST_NUM(T, sec, key, expr) num<T>(sec, key, +[](RunConfig& c) -> T& { return expr; })

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = [] {
        std::vector<Binding> b;
        b.push_back(SKYCAST_NUM(std::uint64_t, "generator", "seed", c.generator.seed));
        b.push_back({"generator", "first", [](const RunConfig& c) { return format_date(c.generator.first); },
                     [](RunConfig& c, const std::string& name, const std::string& t) {
                         try {
                             c.generator.first = parse_date(t);
                         } catch (const Error&) {
                             throw ConfigError("bad date for " + name + ": '" + t + "'");
                         }
                     }});
        b.push_back({"generator", "last", [](const RunConfig& c) { return format_date(c.generator.last); },
                     [](RunConfig& c, const std::string& name, const std::string& t) {
                         try {
                             c.generator.last = parse_date(t);
                         } catch (const Error&) {
                             throw ConfigError("bad date for " + name + ": '" + t + "'");
                         }
                     }});
        b.push_back(SKYCAST_NUM(int, "generator", "markets", c.generator.markets));

        b.push_back(SKYCAST_NUM(int, "grids", "fare_brackets", c.grids.fare_brackets));
        b.push_back(SKYCAST_NUM(double, "grids", "bracket_width", c.grids.bracket_width));
        b.push_back(SKYCAST_NUM(int, "grids", "intervals", c.grids.intervals));
        b.push_back(SKYCAST_NUM(int, "grids", "interval_width", c.grids.interval_width));

        b.push_back(SKYCAST_NUM(int, "prepare", "window_size", c.prepare.window_size));
        b.push_back(SKYCAST_NUM(int, "prepare", "test_months", c.prepare.test_months));
        b.push_back(SKYCAST_NUM(double, "prepare", "val_fraction", c.prepare.val_fraction));
        b.push_back({"prepare", "stack_closure",
                     [](const RunConfig& c) { return std::string(c.prepare.stack_closure ? "true" : "false"); },
                     [](RunConfig& c, const std::string& name, const std::string& t) {
                         c.prepare.stack_closure = parse_bool(name, t);
                     }});

        b.push_back({"model", "variant", [](const RunConfig& c) { return std::string(nn::variant_name(c.train.variant)); },
                     [](RunConfig& c, const std::string& name, const std::string& t) {
                         try {
                             c.train.variant = nn::parse_variant(t);
                         } catch (const Error&) {
                             throw ConfigError("unknown model variant for " + name + ": '" + t + "'");
                         }
                     }});
        b.push_back(SKYCAST_NUM(int, "model", "window_size", c.train.hyperparams.window_size));
        b.push_back(SKYCAST_NUM(int, "model", "temporal_channels", c.train.hyperparams.temporal_channels));
        b.push_back(SKYCAST_NUM(int, "model", "closure_channels", c.train.hyperparams.closure_channels));
        b.push_back(SKYCAST_NUM(int, "model", "season_channels", c.train.hyperparams.season_channels));
        b.push_back(SKYCAST_NUM(int, "model", "decoder_channels", c.train.hyperparams.decoder_channels));
        b.push_back(SKYCAST_NUM(int, "model", "temporal_kernel", c.train.hyperparams.temporal_kernel));
        b.push_back(SKYCAST_NUM(int, "model", "closure_kernel", c.train.hyperparams.closure_kernel));
        b.push_back(SKYCAST_NUM(int, "model", "season_kernel", c.train.hyperparams.season_kernel));
        b.push_back(SKYCAST_NUM(int, "model", "decoder_kernel", c.train.hyperparams.decoder_kernel));
        b.push_back(SKYCAST_NUM(int, "model", "deep_layers", c.train.hyperparams.deep_layers));
        b.push_back(SKYCAST_NUM(int, "model", "decoder_layers", c.train.hyperparams.decoder_layers));
        b.push_back(SKYCAST_NUM(int, "model", "season_layers", c.train.hyperparams.season_layers));
        b.push_back(SKYCAST_NUM(int, "model", "shallow_steps", c.train.hyperparams.shallow_steps));

        b.push_back(SKYCAST_NUM(int, "train", "epochs", c.train.hyperparams.epochs));
        b.push_back(SKYCAST_NUM(int, "train", "batch_size", c.train.hyperparams.batch_size));
        b.push_back(SKYCAST_NUM(double, "train", "learning_rate", c.train.hyperparams.learning_rate));
        b.push_back(SKYCAST_NUM(double, "train", "final_lr_fraction", c.train.hyperparams.final_lr_fraction));
        b.push_back(SKYCAST_NUM(int, "train", "patience", c.train.patience));
        b.push_back(SKYCAST_NUM(int, "train", "max_pseudo_delta", c.train.max_pseudo_delta));
        b.push_back(SKYCAST_NUM(std::uint64_t, "train", "init_seed", c.train.hyperparams.seed));
        b.push_back(SKYCAST_NUM(std::uint64_t, "train", "mask_seed", c.train.base_seed));

        b.push_back({"evaluate", "reference",
                     [](const RunConfig& c) { return c.reference_model; },
                     [](RunConfig& c, const std::string&, const std::string& t) { c.reference_model = t; }});
        b.push_back(SKYCAST_NUM(int, "evaluate", "arima_p", c.baselines.arima.p));
        b.push_back(SKYCAST_NUM(int, "evaluate", "arima_d", c.baselines.arima.d));
        b.push_back(SKYCAST_NUM(int, "evaluate", "arima_q", c.baselines.arima.q));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_p", c.baselines.sarima.p));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_d", c.baselines.sarima.d));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_q", c.baselines.sarima.q));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_P", c.baselines.seasonal.P));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_D", c.baselines.seasonal.D));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_Q", c.baselines.seasonal.Q));
        b.push_back(SKYCAST_NUM(int, "evaluate", "sarima_s", c.baselines.seasonal.s));
        b.push_back(SKYCAST_NUM(int, "evaluate", "trend_horizon", c.trend_horizon));

        b.push_back(SKYCAST_NUM(int, "sensitivity", "shock_day", c.sensitivity.shock_day));
        b.push_back(SKYCAST_NUM(double, "sensitivity", "shock_multiplier", c.sensitivity.shock_multiplier));
        b.push_back(SKYCAST_NUM(int, "sensitivity", "horizon_days", c.sensitivity.horizon_days));
        b.push_back(SKYCAST_NUM(int, "sensitivity", "lead_days", c.sensitivity.lead_days));

        b.push_back({"sweep", "windows", [](const RunConfig& c) { return join(c.sweep.windows); },
                     [](RunConfig& c, const std::string& name, const std::string& t) {
                         c.sweep.windows = parse_int_list(name, t);
                     }});
        b.push_back(SKYCAST_NUM(int, "sweep", "search_budget", c.sweep.search_budget));
        b.push_back(SKYCAST_NUM(std::uint64_t, "sweep", "search_seed", c.sweep.search_seed));

        b.push_back({"output", "dir", [](const RunConfig& c) { return c.output_dir.string(); },
                     [](RunConfig& c, const std::string&, const std::string& t) { c.output_dir = t; }});
        return b;
    }();
    return table;
}

#undef SKYCAST_NUM

}  // namespace

void RunConfig::validate() const {
    if (generator.last <= generator.first) throw ConfigError("generator.last must follow generator.first");
    if (generator.markets < 1 || generator.markets > 5) throw ConfigError("generator.markets must be in [1, 5]");
    if (grids.fare_brackets < 1 || grids.intervals < 1 || grids.interval_width < 1 || !(grids.bracket_width > 0))
        throw ConfigError("grid sizes must be positive");
    if (prepare.window_size < 1) throw ConfigError("prepare.window_size must be at least 1");
    if (prepare.test_months < 1) throw ConfigError("prepare.test_months must be at least 1");
    if (!(prepare.val_fraction > 0.0 && prepare.val_fraction < 1.0))
        throw ConfigError("prepare.val_fraction must lie in (0, 1)");
    train.validate();
    if (train.hyperparams.window_size > prepare.window_size)
        throw ConfigError("model.window_size exceeds prepare.window_size");
    auto check_order = [](int v, const char* name) {
        if (v < 0 || v > 3) throw ConfigError(std::string("evaluate.") + name + " must be in [0, 3]");
    };
    check_order(baselines.arima.p, "arima_p");
    check_order(baselines.arima.d, "arima_d");
    check_order(baselines.arima.q, "arima_q");
    check_order(baselines.sarima.p, "sarima_p");
    check_order(baselines.sarima.d, "sarima_d");
    check_order(baselines.sarima.q, "sarima_q");
    check_order(baselines.seasonal.P, "sarima_P");
    check_order(baselines.seasonal.D, "sarima_D");
    check_order(baselines.seasonal.Q, "sarima_Q");
    if (baselines.seasonal.s < 0) throw ConfigError("evaluate.sarima_s must be non-negative");
    if (trend_horizon < 1) throw ConfigError("evaluate.trend_horizon must be positive");
    shock().validate();
    if (sensitivity.horizon_days < 1) throw ConfigError("sensitivity.horizon_days must be positive");
    if (sensitivity.lead_days < 0) throw ConfigError("sensitivity.lead_days must be non-negative");
    if (sweep.windows.empty()) throw ConfigError("sweep.windows must list at least one size");
    for (int n : sweep.windows)
        if (n < 1) throw ConfigError("sweep.windows entries must be at least 1");
    if (sweep.search_budget < 1) throw ConfigError("sweep.search_budget must be at least 1");
    if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

GridSpec RunConfig::grid_spec() const {
    return GridSpec{FareBracketGrid::uniform(grids.fare_brackets, grids.bracket_width),
                    IntervalGrid(grids.interval_width, grids.intervals)};
}

synth::DateRange RunConfig::date_range() const { return {generator.first, generator.last}; }

std::vector<synth::MarketConfig> RunConfig::markets() const {
    auto all = synth::default_markets(date_range());
    all.resize(static_cast<std::size_t>(generator.markets));
    return all;
}

synth::ShockConfig RunConfig::shock() const { return {sensitivity.shock_day, sensitivity.shock_multiplier}; }

void RunConfig::set_seed(std::uint64_t seed) {
    generator.seed = seed;
    train.hyperparams.seed = seed;
    train.base_seed = seed;
}

std::string RunConfig::echo(bool include_output) const {
    std::ostringstream out;
    std::string section;
    for (const auto& b : bindings()) {
        if (!include_output && b.section == "output") continue;
        if (b.section != section) {
            if (!section.empty()) out << "\n";
            section = b.section;
            out << "[" << section << "]\n";
        }
        out << b.key << " = " << b.get(*this) << "\n";
    }
    return out.str();
}

RunConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    RunConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' appears outside any section");
        for (const auto& [key, value] : body) {
            const std::string name = section + "." + key;
            const auto& table = bindings();
            auto it = std::find_if(table.begin(), table.end(),
                                   [&](const Binding& b) { return b.section == section && b.key == key; });
            if (it == table.end()) throw ConfigError("unknown config key '" + name + "'");
            it->set(c, name, value.data());
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("SKYCAST_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    return parse_number<std::uint64_t>("SKYCAST_SEED", raw);
}

}  // namespace skycast::config
