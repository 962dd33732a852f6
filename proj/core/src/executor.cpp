#include "navmem/executor.hpp"

#include "navmem/errors.hpp"
#include "navmem/prompt.hpp"

#include <cmath>
#include <deque>
#include <queue>
#include <tuple>

namespace navmem {

namespace {

int64_t to_us(double seconds) { return static_cast<int64_t>(std::llround(seconds * 1e6)); }

std::string one_event_json(const Event& e) {
    std::string line = "{\"t\":" + std::to_string(e.t_us) + ",\"event\":\"" + to_string(e.kind) +
                       "\"";
    if (e.kind == EventKind::ActionStarted) {
        line += ",\"action\":\"" + to_string(e.actions.at(0)) + "\"";
    } else if (e.kind == EventKind::BatchArrived) {
        line += ",\"actions\":[";
        for (size_t i = 0; i < e.actions.size(); ++i) {
            if (i) line += ",";
            line += "\"" + to_string(e.actions[i]) + "\"";
        }
        line += "]";
    }
    line += "}";
    return line;
}

std::string answer_phase(ObservationPipeline& pipe, Policy& policy, const EpisodeState& state) {
    if (state.ep->task != TaskKind::EQA || pipe.memory.empty()) return "";
    const TokenSequence tokens = pipe.answer_prompt(state);
    PolicyRequest req{&tokens, &state};
    return policy.answer(req);
}

} // namespace

void LatencyModel::validate() const {
    const double vals[] = {inference_s, comm_s, action_s};
    for (double v : vals) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("latency values must be finite and >= 0");
    }
}

int64_t LatencyModel::roundtrip_us() const { return to_us(comm_s) + to_us(inference_s) + to_us(comm_s); }

int64_t LatencyModel::action_us() const { return to_us(action_s); }

std::string to_string(EventKind k) {
    switch (k) {
    case EventKind::FrameSent: return "FrameSent";
    case EventKind::BatchArrived: return "BatchArrived";
    case EventKind::ActionStarted: return "ActionStarted";
    case EventKind::ActionFinished: return "ActionFinished";
    case EventKind::BatchSuperseded: return "BatchSuperseded";
    }
    throw Error("unknown event kind");
}

std::string trace_to_jsonl(const EventTrace& trace) {
    std::string out;
    for (const Event& e : trace.events) {
        out += one_event_json(e);
        out += "\n";
    }
    return out;
}

ObservationPipeline::ObservationPipeline(const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg)
    : mem(mem_cfg), feat(feat_cfg) {
    mem.validate();
    feat.validate();
}

TokenSequence ObservationPipeline::observe(const EpisodeState& state) {
    const LocalView view = render_local_view(state);
    const FrameFeatures f = extract_features(view, feat, frames);
    push_frame(memory, f.tokens, mem);
    ++frames;
    return assemble(memory, state.ep->instruction, /*nav_mode=*/true);
}

TokenSequence ObservationPipeline::answer_prompt(const EpisodeState& state) {
    return assemble(memory, state.ep->instruction, /*nav_mode=*/false);
}

RolloutResult run_blocking(const Episode& ep, Policy& policy, const MergeConfig& mem_cfg,
                           const FeatureConfig& feat_cfg) {
    ObservationPipeline pipe(mem_cfg, feat_cfg);
    EpisodeState state = start_episode(std::make_shared<const Episode>(ep));

    while (!state.done) {
        const TokenSequence tokens = pipe.observe(state);
        PolicyRequest req{&tokens, &state};
        const ActionBatch batch = policy.plan(req);
        if (batch.actions[0] == Action::Stop) {
            step(state, Action::Stop);
            break;
        }
        for (Action a : batch.actions) {
            if (a == Action::Stop) break; // drop the tail, observe again
            step(state, a);
            if (state.done) break;
        }
    }

    RolloutResult r{std::move(state), {}, ""};
    r.answer = answer_phase(pipe, policy, r.state);
    return r;
}

namespace {

// Same-instant resolution order; lower settles first.
enum SchedRank { kFinishRank = 0, kFrameRank = 1, kArriveRank = 2, kStartRank = 3 };

struct Sched {
    int64_t t = 0;
    int rank = 0;
    uint64_t seq = 0; // FIFO among fully tied events
    ActionBatch batch{};
    Action act = Action::Stop;
};

struct LaterFirst {
    bool operator()(const Sched& a, const Sched& b) const {
        return std::tie(a.t, a.rank, a.seq) > std::tie(b.t, b.rank, b.seq);
    }
};

} // namespace

RolloutResult run_nonblocking(const Episode& ep, Policy& policy, const LatencyModel& latency,
                              const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg) {
    latency.validate();
    ObservationPipeline pipe(mem_cfg, feat_cfg);
    EpisodeState state = start_episode(std::make_shared<const Episode>(ep));
    EventTrace trace;

    std::priority_queue<Sched, std::vector<Sched>, LaterFirst> pq;
    uint64_t seq = 0;
    std::deque<Action> queue; // most recent batch, head next to run
    bool busy = false;

    pq.push(Sched{0, kFrameRank, seq++});

    while (!pq.empty() && !state.done) {
        const Sched e = pq.top();
        pq.pop();
        switch (e.rank) {
        case kFrameRank: {
            trace.events.push_back({e.t, EventKind::FrameSent, {}});
            const TokenSequence tokens = pipe.observe(state);
            // The planner sees the world as it was at capture time.
            const EpisodeState snapshot = state;
            PolicyRequest req{&tokens, &snapshot};
            Sched arrive{e.t + latency.roundtrip_us(), kArriveRank, seq++};
            arrive.batch = policy.plan(req);
            pq.push(arrive);
            break;
        }
        case kArriveRank: {
            std::vector<Action> acts(e.batch.actions.begin(), e.batch.actions.end());
            trace.events.push_back({e.t, EventKind::BatchArrived, acts});
            const bool superseded = !queue.empty();
            queue.assign(e.batch.actions.begin(), e.batch.actions.end());
            if (superseded) trace.events.push_back({e.t, EventKind::BatchSuperseded, {}});
            if (!busy) pq.push(Sched{e.t, kStartRank, seq++});
            break;
        }
        case kStartRank: {
            if (busy || queue.empty()) break; // a newer arrival already started one
            const Action a = queue.front();
            queue.pop_front();
            busy = true;
            trace.events.push_back({e.t, EventKind::ActionStarted, {a}});
            const int64_t dur = a == Action::Stop ? 0 : latency.action_us();
            Sched fin{e.t + dur, kFinishRank, seq++};
            fin.act = a;
            pq.push(fin);
            break;
        }
        case kFinishRank: {
            step(state, e.act);
            trace.events.push_back({e.t, EventKind::ActionFinished, {}});
            busy = false;
            if (state.done) break;
            pq.push(Sched{e.t, kFrameRank, seq++});
            if (!queue.empty()) pq.push(Sched{e.t, kStartRank, seq++});
            break;
        }
        default: throw Error("corrupt event schedule");
        }
    }

    RolloutResult r{std::move(state), std::move(trace), ""};
    r.answer = answer_phase(pipe, policy, r.state);
    return r;
}

} // namespace navmem
