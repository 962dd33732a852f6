#pragma once

#include "navmem/config.hpp"
#include "navmem/policy.hpp"
#include "navmem/world.hpp"

#include <string>
#include <vector>

namespace navmem {

// One imitation sample. The history is a compact replay reference (episode
// seed plus the actions executed so far); the frames it stands for are
// regenerated bit-exactly on demand rather than stored.
struct NavSample {
    std::string episode_id;
    TaskKind task = TaskKind::VLN;
    std::string instruction;
    uint64_t seed = 0;
    std::vector<Action> action_prefix;
    bool is_answer = false; // answer samples carry `answer`, action samples `label`
    ActionBatch label{};
    std::string answer;

    friend bool operator==(const NavSample&, const NavSample&);
};

// Samples plus the configs needed to regenerate their episodes and frames.
struct SampleSet {
    GenConfig gen;
    MergeConfig memory;
    FeatureConfig features;
    std::vector<NavSample> samples;
};

// JSONL: a navmem.samples.v1 header line carrying the configs, then one
// sample per line. read(write(x)) preserves every field; malformed input
// raises SchemaMismatch naming the line.
void write_samples(const SampleSet& set, const std::string& path);
SampleSet read_samples(const std::string& path);

struct CollectOptions {
    bool successful_only = true; // drop episodes whose expert rollout misses
};

// Walks the expert through each episode one action at a time, labeling every
// visited state with the expert's next-4-action batch; EQA episodes append
// one answer sample.
SampleSet collect_gt_samples(const std::vector<Episode>& episodes, Policy& expert,
                             const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg,
                             const GenConfig& gen, const CollectOptions& opts = {});

// DAgger: the student chooses every executed action, the expert labels every
// visited state. One sample per executed step; no success filter.
SampleSet dagger_collect(const std::vector<Episode>& episodes, Policy& student, Policy& expert,
                         const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg,
                         const GenConfig& gen);

// Regenerates the frame tensors a sample's history stands for: rebuild the
// episode from its seed, replay the prefix, encode every view on the way.
std::vector<TokenMatrix> regenerate_frames(const NavSample& sample, const SampleSet& set);

} // namespace navmem
