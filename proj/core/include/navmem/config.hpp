#pragma once

#include "navmem/executor.hpp"
#include "navmem/features.hpp"
#include "navmem/memory.hpp"
#include "navmem/task.hpp"
#include "navmem/world.hpp"

#include <cstdint>
#include <string>

namespace navmem {

// Frame streams the profiler can synthesize.
struct ProfileConfig {
    int horizon = 500;
    std::string stream = "constant"; // constant | orthogonal | random
    int reps = 11;                   // timing repetitions per step; the median is reported

    void validate() const;
};

// Everything a run needs. JSON schema mirrors the field names; unknown keys
// are rejected so typos fail loudly instead of silently using defaults.
struct RunConfig {
    std::string task = "vln";
    int episodes = 100;
    uint64_t seed = 1;
    std::string policy = "oracle";
    std::string out = "out";
    MergeConfig memory;
    FeatureConfig features;
    LatencyModel latency;
    GenConfig gen;
    ProfileConfig profile;

    TaskKind task_kind() const;
    void validate() const;
};

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

// Applies one "dotted.key=value" override (e.g. "memory.tau=0.9"). The value
// is re-validated through the JSON schema, so unknown paths and wrong types
// raise ConfigError.
void apply_override(RunConfig& config, const std::string& assignment);

// Parses the "inference=0.2,comm=0.3,action=1.0" latency shorthand on top of
// the given base model.
LatencyModel parse_latency(const std::string& spec, LatencyModel base = {});

} // namespace navmem
