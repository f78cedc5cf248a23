#include "wst/config.hpp"

#include "wst/errors.hpp"

#include <charconv>
#include <fstream>

namespace wst::config {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
    }
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': bad number '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': bad boolean '" + value + "'");
}

} // namespace

void apply_setting(RunSettings& settings, const std::string& section,
                   const std::string& key, const std::string& value) {
    pipeline::HybridConfig& h = settings.hybrid;
    if (section == "pipeline") {
        if (key == "family") {
            h.family = wavelet::family_from_string(value);
        } else if (key == "level") {
            h.level = (value == "auto") ? 0 : parse_int(key, value);
            if (h.level < 0) throw ConfigError("level must be >= 1 or 'auto'");
        } else if (key == "ratio") {
            h.split_ratio = parse_double(key, value);
        } else if (key == "alpha") {
            h.routing_alpha = parse_double(key, value);
        } else if (key == "horizon") {
            h.horizon = parse_int(key, value);
        } else if (key == "seed") {
            h.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "clip_negative") {
            h.clip_negative = parse_bool(key, value);
        } else if (key == "ljung_box_lags") {
            h.ljung_box_lags = parse_int(key, value);
        } else if (key == "variant") {
            settings.variant = pipeline::variant_from_string(value);
        } else {
            throw ConfigError("unknown key '" + key + "' in [pipeline]");
        }
    } else if (section == "sarima") {
        if (key == "order") {
            if (value == "auto") {
                h.sarima_spec.reset();
            } else {
                h.sarima_spec = sarima::Spec::parse(value);
            }
        } else if (key == "p_max") {
            h.grid.p_max = parse_int(key, value);
        } else if (key == "q_max") {
            h.grid.q_max = parse_int(key, value);
        } else if (key == "P_max") {
            h.grid.P_max = parse_int(key, value);
        } else if (key == "Q_max") {
            h.grid.Q_max = parse_int(key, value);
        } else if (key == "d_max") {
            h.grid.d_max = parse_int(key, value);
        } else if (key == "D_max") {
            h.grid.D_max = parse_int(key, value);
        } else {
            throw ConfigError("unknown key '" + key + "' in [sarima]");
        }
    } else if (section == "transformer") {
        transformer::Config& t = h.transformer;
        if (key == "num_blocks") {
            t.num_blocks = parse_int(key, value);
        } else if (key == "d_model") {
            t.d_model = parse_int(key, value);
        } else if (key == "num_heads") {
            t.num_heads = parse_int(key, value);
        } else if (key == "d_ff") {
            t.d_ff = parse_int(key, value);
        } else if (key == "mlp_units") {
            t.mlp_units = parse_int(key, value);
        } else if (key == "dropout") {
            t.dropout = parse_double(key, value);
        } else if (key == "mlp_dropout") {
            t.mlp_dropout = parse_double(key, value);
        } else if (key == "window") {
            t.window = parse_int(key, value);
        } else if (key == "batch_size") {
            t.batch_size = parse_int(key, value);
        } else if (key == "max_epochs") {
            t.max_epochs = parse_int(key, value);
        } else if (key == "early_stop_patience") {
            t.early_stop_patience = parse_int(key, value);
        } else if (key == "learning_rate") {
            t.learning_rate = parse_double(key, value);
        } else {
            throw ConfigError("unknown key '" + key + "' in [transformer]");
        }
    } else {
        throw ConfigError("unknown config section [" + section + "]");
    }
}

RunSettings load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    RunSettings settings;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key = value");
        }
        if (section.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": key outside any [section]");
        }
        try {
            apply_setting(settings, section, trim(t.substr(0, eq)),
                          trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " +
                              e.what());
        }
    }
    return settings;
}

} // namespace wst::config
