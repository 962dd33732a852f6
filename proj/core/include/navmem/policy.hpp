#pragma once

#include "navmem/planner.hpp"
#include "navmem/prompt.hpp"
#include "navmem/world.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace navmem {

// Foresight batch: always exactly 4 actions; everything after the first STOP
// is STOP.
struct ActionBatch {
    std::array<Action, 4> actions{Action::Stop, Action::Stop, Action::Stop, Action::Stop};
};

// Builds a batch from a prefix, padding with STOP and forcing the padding
// convention.
ActionBatch make_batch(const std::vector<Action>& prefix);

struct PolicyRequest {
    const TokenSequence* tokens = nullptr; // what a learned model would consume
    const EpisodeState* state = nullptr;   // privileged handle for oracles
};

class Policy {
  public:
    virtual ~Policy() = default;
    virtual ActionBatch plan(const PolicyRequest& request) = 0;
    // EQA reply once navigation has stopped.
    virtual std::string answer(const PolicyRequest& request);
};

// Deterministic shortest-path expert. Stateless between calls: every plan()
// re-derives its route from the episode state, so stale snapshots (as handed
// out by the non-blocking executor) and parallel episodes both work.
// Episodes with a literal command script are executed verbatim, then STOP.
class OraclePolicy : public Policy {
  public:
    ActionBatch plan(const PolicyRequest& request) override;
    std::string answer(const PolicyRequest& request) override;
};

// Expert with epsilon-random exploration on non-STOP actions; the DAgger
// student stand-in. Deterministic in (episode seed, step, policy seed).
class NoisyExpertPolicy : public Policy {
  public:
    explicit NoisyExpertPolicy(double epsilon = 0.2, uint64_t seed = 0);
    ActionBatch plan(const PolicyRequest& request) override;
    std::string answer(const PolicyRequest& request) override;

  private:
    OraclePolicy oracle_;
    double epsilon_;
    uint64_t seed_;
};

// Uniform over all four actions; degenerate student for collector tests.
class RandomPolicy : public Policy {
  public:
    explicit RandomPolicy(uint64_t seed = 0);
    ActionBatch plan(const PolicyRequest& request) override;

  private:
    uint64_t seed_;
};

// Replays batches recorded as JSONL lines {"actions": [...]}; an optional
// {"answer": "..."} line supplies the EQA reply. Exhausted files yield STOP.
class ReplayPolicy : public Policy {
  public:
    explicit ReplayPolicy(const std::string& path);
    ActionBatch plan(const PolicyRequest& request) override;
    std::string answer(const PolicyRequest& request) override;

  private:
    std::vector<ActionBatch> batches_;
    std::string answer_;
    size_t next_ = 0;
};

// Config selector: oracle | noisy-expert[:eps] | random | replay:<file>.
std::unique_ptr<Policy> make_policy(const std::string& spec, uint64_t seed);

} // namespace navmem
