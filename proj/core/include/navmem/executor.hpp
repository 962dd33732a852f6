#pragma once

#include "navmem/features.hpp"
#include "navmem/memory.hpp"
#include "navmem/policy.hpp"
#include "navmem/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace navmem {

struct LatencyModel {
    double inference_s = 0.2;
    double comm_s = 0.3;
    double action_s = 1.0; // per executed action

    void validate() const; // throws ConfigError unless all finite and >= 0

    // Frame upload, inference, command download. Integer microseconds keep
    // event ordering exact.
    int64_t roundtrip_us() const;
    int64_t action_us() const;
};

enum class EventKind { FrameSent, BatchArrived, ActionStarted, ActionFinished, BatchSuperseded };

std::string to_string(EventKind k);

struct Event {
    int64_t t_us = 0;
    EventKind kind = EventKind::FrameSent;
    std::vector<Action> actions; // BatchArrived: the batch; ActionStarted: one entry
};

// Times non-decreasing; every ActionStarted is matched by an ActionFinished.
struct EventTrace {
    std::vector<Event> events;
};

// One line per event: {"t":...,"event":"..."} plus the action payload where
// present. Byte-stable; golden traces compare against it directly.
std::string trace_to_jsonl(const EventTrace& trace);

// Per-frame observation path shared by executors and collectors: render the
// local view, encode it, fold it into the rolling memory, assemble the
// prompt.
struct ObservationPipeline {
    ObservationPipeline(const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg);

    // Captures the state's current view and returns the navigation prompt.
    TokenSequence observe(const EpisodeState& state);
    // Question-answer prompt over the memory as it stands; no new frame.
    TokenSequence answer_prompt(const EpisodeState& state);

    MergeConfig mem;
    FeatureConfig feat;
    MemoryState memory;
    int64_t frames = 0;
};

struct RolloutResult {
    EpisodeState state;
    EventTrace trace;   // empty in blocking mode
    std::string answer; // EQA reply collected after the rollout stopped
};

// Synchronous benchmark mode: observe, plan, execute the batch, repeat. A
// batch opening with STOP stops the episode; a later STOP abandons the rest
// of the batch and re-observes.
RolloutResult run_blocking(const Episode& ep, Policy& policy, const MergeConfig& mem_cfg,
                           const FeatureConfig& feat_cfg);

// Deterministic event-loop model of the deployed system: a frame is sent
// after every completed action, the planner replies one round-trip later,
// and a newly arrived batch replaces whatever is still queued (the in-flight
// action completes). Same-instant events settle in a fixed order: finish,
// frame out, batch in, next action start.
RolloutResult run_nonblocking(const Episode& ep, Policy& policy, const LatencyModel& latency,
                              const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg);

} // namespace navmem
