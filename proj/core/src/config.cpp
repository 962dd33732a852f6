#include "navmem/config.hpp"

#include "config_json.hpp"
#include "navmem/errors.hpp"

#include <charconv>
#include <vector>

namespace navmem {

using cfgjson::json;

namespace {

std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

template <typename T>
void get_field(const json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(join_path(path, key) + ": " + e.what());
    }
}

template <typename T>
bool full_parse(const std::string& s, T& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && p == end;
}

json sniff_value(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    if (!v.empty() && v[0] != '-') {
        uint64_t u = 0;
        if (full_parse(v, u)) return u;
    }
    int64_t i = 0;
    if (full_parse(v, i)) return i;
    double d = 0.0;
    if (full_parse(v, d)) return d;
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

} // namespace

namespace cfgjson {

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& path) {
    if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + " must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown config key: " + join_path(path, item.key()));
    }
}

json to_json(const MergeConfig& c) {
    return json{{"alpha_curr", c.alpha_curr},
                {"alpha_short", c.alpha_short},
                {"alpha_long", c.alpha_long},
                {"buffer_len", c.buffer_len},
                {"tau", c.tau}};
}

json to_json(const FeatureConfig& c) {
    return json{{"n_x", c.n_x}, {"c", c.c}, {"feature_seed", c.feature_seed}};
}

json to_json(const LatencyModel& c) {
    return json{{"inference_s", c.inference_s}, {"comm_s", c.comm_s}, {"action_s", c.action_s}};
}

json to_json(const GenConfig& c) {
    return json{{"min_side", c.min_side},
                {"max_side", c.max_side},
                {"obstacle_density", c.obstacle_density},
                {"view_radius", c.view_radius},
                {"max_retries", c.max_retries},
                {"human_count_min", c.human_count_min},
                {"human_count_max", c.human_count_max},
                {"low_level_ratio", c.low_level_ratio}};
}

json to_json(const ProfileConfig& c) {
    return json{{"horizon", c.horizon}, {"stream", c.stream}, {"reps", c.reps}};
}

json to_json(const RunConfig& c) {
    return json{{"task", c.task},         {"episodes", c.episodes},
                {"seed", c.seed},         {"policy", c.policy},
                {"out", c.out},           {"memory", to_json(c.memory)},
                {"features", to_json(c.features)}, {"latency", to_json(c.latency)},
                {"gen", to_json(c.gen)},  {"profile", to_json(c.profile)}};
}

void from_json(const json& j, MergeConfig& c, const std::string& path) {
    reject_unknown(j, {"alpha_curr", "alpha_short", "alpha_long", "buffer_len", "tau"}, path);
    get_field(j, "alpha_curr", c.alpha_curr, path);
    get_field(j, "alpha_short", c.alpha_short, path);
    get_field(j, "alpha_long", c.alpha_long, path);
    get_field(j, "buffer_len", c.buffer_len, path);
    get_field(j, "tau", c.tau, path);
}

void from_json(const json& j, FeatureConfig& c, const std::string& path) {
    reject_unknown(j, {"n_x", "c", "feature_seed"}, path);
    get_field(j, "n_x", c.n_x, path);
    get_field(j, "c", c.c, path);
    get_field(j, "feature_seed", c.feature_seed, path);
}

void from_json(const json& j, LatencyModel& c, const std::string& path) {
    reject_unknown(j, {"inference_s", "comm_s", "action_s"}, path);
    get_field(j, "inference_s", c.inference_s, path);
    get_field(j, "comm_s", c.comm_s, path);
    get_field(j, "action_s", c.action_s, path);
}

void from_json(const json& j, GenConfig& c, const std::string& path) {
    reject_unknown(j,
                   {"min_side", "max_side", "obstacle_density", "view_radius", "max_retries",
                    "human_count_min", "human_count_max", "low_level_ratio"},
                   path);
    get_field(j, "min_side", c.min_side, path);
    get_field(j, "max_side", c.max_side, path);
    get_field(j, "obstacle_density", c.obstacle_density, path);
    get_field(j, "view_radius", c.view_radius, path);
    get_field(j, "max_retries", c.max_retries, path);
    get_field(j, "human_count_min", c.human_count_min, path);
    get_field(j, "human_count_max", c.human_count_max, path);
    get_field(j, "low_level_ratio", c.low_level_ratio, path);
}

void from_json(const json& j, ProfileConfig& c, const std::string& path) {
    reject_unknown(j, {"horizon", "stream", "reps"}, path);
    get_field(j, "horizon", c.horizon, path);
    get_field(j, "stream", c.stream, path);
    get_field(j, "reps", c.reps, path);
}

void from_json(const json& j, RunConfig& c, const std::string& path) {
    reject_unknown(j,
                   {"task", "episodes", "seed", "policy", "out", "memory", "features", "latency",
                    "gen", "profile"},
                   path);
    get_field(j, "task", c.task, path);
    get_field(j, "episodes", c.episodes, path);
    get_field(j, "seed", c.seed, path);
    get_field(j, "policy", c.policy, path);
    get_field(j, "out", c.out, path);
    if (j.contains("memory")) from_json(j.at("memory"), c.memory, join_path(path, "memory"));
    if (j.contains("features")) from_json(j.at("features"), c.features, join_path(path, "features"));
    if (j.contains("latency")) from_json(j.at("latency"), c.latency, join_path(path, "latency"));
    if (j.contains("gen")) from_json(j.at("gen"), c.gen, join_path(path, "gen"));
    if (j.contains("profile")) from_json(j.at("profile"), c.profile, join_path(path, "profile"));
}

} // namespace cfgjson

void ProfileConfig::validate() const {
    if (horizon < 1) throw ConfigError("profile.horizon must be >= 1");
    if (reps < 1) throw ConfigError("profile.reps must be >= 1");
    if (stream != "constant" && stream != "orthogonal" && stream != "random") {
        throw ConfigError("profile.stream must be constant, orthogonal, or random");
    }
}

TaskKind RunConfig::task_kind() const { return task_kind_from_string(task); }

void RunConfig::validate() const {
    task_kind_from_string(task);
    if (episodes < 0) throw ConfigError("episodes must be >= 0");
    if (out.empty()) throw ConfigError("out must name a directory");
    memory.validate();
    features.validate();
    latency.validate();
    gen.validate();
    profile.validate();
}

RunConfig run_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    cfgjson::from_json(j, c, "");
    return c;
}

std::string run_config_to_json(const RunConfig& config) {
    return cfgjson::to_json(config).dump(2) + "\n";
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key=value: " + assignment);
    }
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json root = cfgjson::to_json(config);
    json* cur = &root;
    const std::vector<std::string> parts = split(key, '.');
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        if (parts[i].empty()) throw ConfigError("bad override key: " + key);
        cur = &((*cur)[parts[i]]);
    }
    if (parts.back().empty()) throw ConfigError("bad override key: " + key);
    (*cur)[parts.back()] = sniff_value(value);

    // A fresh parse of the patched document both validates the path and
    // reports type errors with their full key path.
    RunConfig fresh;
    cfgjson::from_json(root, fresh, "");
    config = fresh;
}

LatencyModel parse_latency(const std::string& spec, LatencyModel base) {
    if (spec.empty()) throw ConfigError("empty latency spec");
    for (const std::string& part : split(spec, ',')) {
        const size_t eq = part.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == part.size()) {
            throw ConfigError("latency spec entries must look like name=seconds: " + part);
        }
        const std::string name = part.substr(0, eq);
        double v = 0.0;
        if (!full_parse(part.substr(eq + 1), v)) {
            throw ConfigError("bad latency value in: " + part);
        }
        if (name == "inference") {
            base.inference_s = v;
        } else if (name == "comm") {
            base.comm_s = v;
        } else if (name == "action") {
            base.action_s = v;
        } else {
            throw ConfigError("unknown latency field: " + name);
        }
    }
    base.validate();
    return base;
}

} // namespace navmem
