#pragma once

// Run configuration: a flat key-value text format with dotted keys. Every key
// has a default; `dump_defaults` prints the complete key set so a config file
// can start from `scenemc --dump-defaults`.

#include "scenemc/energy.hpp"
#include "scenemc/inference.hpp"

#include <cstdio>
#include <map>
#include <sstream>
#include <string>

namespace scenemc {

struct RunConfig {
    EnergyWeights weights;
    InferenceOptions options;
    uint64_t seed = 0;
    std::string priors_path;  // paths.priors: HOI prior file for synth/infer
};

namespace detail {

inline std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InvalidInputError("config key " + key + ": expected a number, got '" + value + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw InvalidInputError("config key " + key + ": expected an integer");
    return i;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw InvalidInputError("config key " + key + ": expected true/false");
}

inline Vec3 parse_triple(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    Vec3 v;
    if (!(in >> v.x() >> v.y() >> v.z()))
        throw InvalidInputError("config key " + key + ": expected three numbers");
    return v;
}

inline std::vector<std::string> split_key(const std::string& key) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= key.size()) {
        const size_t dot = key.find('.', start);
        if (dot == std::string::npos) {
            parts.push_back(key.substr(start));
            break;
        }
        parts.push_back(key.substr(start, dot - start));
        start = dot + 1;
    }
    return parts;
}

inline bool apply_phase_key(PhaseParams& p, const std::string& field, const std::string& key,
                            const std::string& value) {
    if (field == "iters") p.iters = parse_int(key, value);
    else if (field == "t0") p.t0 = parse_double(key, value);
    else if (field == "gamma") p.gamma = parse_double(key, value);
    else if (field == "step_trans") p.step_trans = parse_double(key, value);
    else if (field == "step_rot") p.step_rot = parse_double(key, value);
    else if (field == "step_scale") p.step_scale = parse_double(key, value);
    else if (field == "p_desc") p.p_desc = parse_double(key, value);
    else return false;
    return true;
}

}  // namespace detail

/// Applies one `key = value` assignment. Unknown keys are errors.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_triple;
    const auto parts = detail::split_key(key);

    if (parts.size() == 2 && parts[0] == "weights") {
        if (parts[1] == "support") cfg.weights.support = parse_double(key, value);
        else if (parts[1] == "collision") cfg.weights.collision = parse_double(key, value);
        else if (parts[1] == "hoi") cfg.weights.hoi = parse_double(key, value);
        else if (parts[1] == "likelihood_obj") cfg.weights.likelihood_obj = parse_double(key, value);
        else if (parts[1] == "likelihood_pose") cfg.weights.likelihood_pose = parse_double(key, value);
        else throw InvalidInputError("unknown config key: " + key);
        if (cfg.weights.support < 0 || cfg.weights.collision < 0 || cfg.weights.hoi < 0 ||
            cfg.weights.likelihood_obj < 0 || cfg.weights.likelihood_pose < 0)
            throw InvalidInputError("config key " + key + ": weights must be nonnegative");
        return;
    }
    if (parts.size() == 3 && parts[0] == "schedule" && parts[1] == "phase1") {
        if (detail::apply_phase_key(cfg.options.schedule.phase1, parts[2], key, value)) return;
        throw InvalidInputError("unknown config key: " + key);
    }
    if (parts.size() == 3 && parts[0] == "schedule" && parts[1] == "phase3") {
        if (detail::apply_phase_key(cfg.options.schedule.phase3, parts[2], key, value)) return;
        throw InvalidInputError("unknown config key: " + key);
    }
    if (parts.size() == 2 && parts[0] == "schedule" && parts[1] == "sample_layout") {
        cfg.options.sample_layout = parse_bool(key, value);
        return;
    }
    if (parts.size() == 2 && parts[0] == "thresholds") {
        if (parts[1] == "hoi_confidence") cfg.options.hoi_conf_threshold = parse_double(key, value);
        else if (parts[1] == "topdown_confidence")
            cfg.options.topdown_conf_threshold = parse_double(key, value);
        else throw InvalidInputError("unknown config key: " + key);
        return;
    }
    if (parts.size() == 2 && parts[0] == "energy") {
        if (parts[1] == "offscreen_penalty")
            cfg.options.energy_params.offscreen_penalty = parse_double(key, value);
        else if (parts[1] == "proxy_margin")
            cfg.options.energy_params.proxy_margin = parse_double(key, value);
        else if (parts[1] == "human_footprint_half")
            cfg.options.energy_params.human_footprint_half = parse_double(key, value);
        else throw InvalidInputError("unknown config key: " + key);
        return;
    }
    if (parts.size() == 2 && parts[0] == "init") {
        if (parts[1] == "h0_hip") cfg.options.h0_hip = parse_double(key, value);
        else if (parts[1] == "h0_head") cfg.options.h0_head = parse_double(key, value);
        else if (parts[1] == "lambda_support")
            cfg.options.support_priors.lambda = parse_double(key, value);
        else if (parts[1] == "default_room") {
            std::istringstream in(value);
            Cuboid room;
            if (!(in >> room.center.x() >> room.center.y() >> room.center.z() >> room.size.x() >>
                  room.size.y() >> room.size.z()))
                throw InvalidInputError("config key " + key + ": expected six numbers");
            room.class_label = "room";
            cfg.options.default_layout = room;
        } else {
            throw InvalidInputError("unknown config key: " + key);
        }
        return;
    }
    if (parts.size() == 3 && parts[0] == "class") {
        ClassDefault def = cfg.options.class_defaults.get(parts[1]);
        if (parts[2] == "size") def.size = parse_triple(key, value);
        else if (parts[2] == "center_height") def.center_height = parse_double(key, value);
        else if (parts[2] == "container") def.container = parse_bool(key, value);
        else throw InvalidInputError("unknown config key: " + key);
        cfg.options.class_defaults.by_class[parts[1]] = def;
        return;
    }
    if (parts.size() == 3 && parts[0] == "support_prior") {
        const double p = parse_double(key, value);
        if (p < 0.0 || p > 1.0)
            throw InvalidInputError("config key " + key + ": probability must be in [0,1]");
        cfg.options.support_priors.table[{parts[1], parts[2]}] = p;
        return;
    }
    if (parts.size() == 2 && parts[0] == "paths" && parts[1] == "priors") {
        cfg.priors_path = value;
        return;
    }
    if (parts.size() == 1 && parts[0] == "seed") {
        cfg.seed = static_cast<uint64_t>(parse_double(key, value));
        return;
    }
    throw InvalidInputError("unknown config key: " + key);
}

/// Parses `key = value` lines; '#' starts a comment; blank lines skipped.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError("config line " + std::to_string(lineno) +
                                    ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw InvalidInputError("config line " + std::to_string(lineno) +
                                    ": expected 'key = value'");
        apply_config_key(cfg, key, value);
    }
    return cfg;
}

inline std::string dump_default_config() {
    const RunConfig cfg;
    std::ostringstream out;
    char buf[256];
    auto emit = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.9g\n", key, v);
        out << buf;
    };
    out << "# scenemc run configuration (defaults)\n";
    emit("weights.support", cfg.weights.support);
    emit("weights.collision", cfg.weights.collision);
    emit("weights.hoi", cfg.weights.hoi);
    emit("weights.likelihood_obj", cfg.weights.likelihood_obj);
    emit("weights.likelihood_pose", cfg.weights.likelihood_pose);
    for (const char* phase : {"phase1", "phase3"}) {
        const PhaseParams& p =
            std::string(phase) == "phase1" ? cfg.options.schedule.phase1 : cfg.options.schedule.phase3;
        std::snprintf(buf, sizeof(buf), "schedule.%s.iters = %d\n", phase, p.iters);
        out << buf;
        std::snprintf(buf, sizeof(buf), "schedule.%s.t0 = %.9g\n", phase, p.t0);
        out << buf;
        std::snprintf(buf, sizeof(buf), "schedule.%s.gamma = %.9g\n", phase, p.gamma);
        out << buf;
        std::snprintf(buf, sizeof(buf), "schedule.%s.step_trans = %.9g\n", phase, p.step_trans);
        out << buf;
        std::snprintf(buf, sizeof(buf), "schedule.%s.step_rot = %.9g\n", phase, p.step_rot);
        out << buf;
        std::snprintf(buf, sizeof(buf), "schedule.%s.step_scale = %.9g\n", phase, p.step_scale);
        out << buf;
        std::snprintf(buf, sizeof(buf), "schedule.%s.p_desc = %.9g\n", phase, p.p_desc);
        out << buf;
    }
    out << "schedule.sample_layout = " << (cfg.options.sample_layout ? "true" : "false") << "\n";
    emit("thresholds.hoi_confidence", cfg.options.hoi_conf_threshold);
    emit("thresholds.topdown_confidence", cfg.options.topdown_conf_threshold);
    emit("energy.offscreen_penalty", cfg.options.energy_params.offscreen_penalty);
    emit("energy.proxy_margin", cfg.options.energy_params.proxy_margin);
    emit("energy.human_footprint_half", cfg.options.energy_params.human_footprint_half);
    emit("init.h0_hip", cfg.options.h0_hip);
    emit("init.h0_head", cfg.options.h0_head);
    emit("init.lambda_support", cfg.options.support_priors.lambda);
    for (const auto& [cls, def] : cfg.options.class_defaults.by_class) {
        std::snprintf(buf, sizeof(buf), "class.%s.size = %.9g %.9g %.9g\n", cls.c_str(),
                      def.size.x(), def.size.y(), def.size.z());
        out << buf;
        std::snprintf(buf, sizeof(buf), "class.%s.center_height = %.9g\n", cls.c_str(),
                      def.center_height);
        out << buf;
        std::snprintf(buf, sizeof(buf), "class.%s.container = %s\n", cls.c_str(),
                      def.container ? "true" : "false");
        out << buf;
    }
    out << "seed = " << cfg.seed << "\n";
    out << "# paths.priors = hoi_priors.json\n";
    return out.str();
}

}  // namespace scenemc
