#include "navmem/policy.hpp"

#include "navmem/errors.hpp"
#include "navmem/features.hpp"
#include "navmem/geometry.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

using nlohmann::json;

namespace navmem {

namespace {

// A grid waypoint counts as reached once the body center is this close.
constexpr double kWaypointCaptureM = 0.12;
// FORWARD is allowed while the bearing error stays within half a turn
// quantum; otherwise turn first.
constexpr double kForwardAlignDeg = 15.0;

// Stop margins sit inside the task radii so quantized motion cannot
// overshoot past the success boundary.
constexpr double kVlnStopM = 2.5;
constexpr double kObjectStopM = 0.8;
constexpr double kFollowStopM = 1.8;
// Follow keeps a hysteresis band: approach while farther than this, idle
// inside it.
constexpr double kFollowApproachM = 1.0;
// Keep route cells this far from humans so a freshly planned path does not
// brush the blocking radius (agent radius + human radius = 0.48 m).
constexpr double kHumanStampM = 0.70;
// Fallback stamp when the wide one walls the agent in; just past blocking.
constexpr double kHumanStampTightM = kAgentRadius + kHumanRadius + 0.04;

Vec2 pose_pos(const Pose& p) { return {p.x, p.y}; }

double human_clearance(const EpisodeState& state, Vec2 p) {
    double c = std::numeric_limits<double>::infinity();
    for (const HumanState& h : state.humans) c = std::min(c, distance(p, h.pos));
    return c;
}

int apply_turn(int heading_deg, Action a) {
    const int d = a == Action::TurnLeft ? 360 - kTurnDeg : kTurnDeg;
    return (heading_deg + d) % 360;
}

// delta is the signed rotation needed, in (-180, 180]. Exactly opposite
// targets could go either way; prefer TURN_LEFT.
Action turn_toward(double delta) {
    if (delta >= 180.0 - 1e-9) return Action::TurnLeft;
    return delta > 0.0 ? Action::TurnRight : Action::TurnLeft;
}

// Mirrors the simulator's ordered landmark capture so the lookahead batch
// switches targets at the same points the rollout will.
void capture_landmarks(const Episode& ep, Vec2 agent, std::vector<bool>& reached) {
    for (size_t i = 0; i < reached.size(); ++i) {
        if (reached[i]) continue;
        if (distance(agent, ep.landmarks[i]) <= kLandmarkCaptureM) {
            reached[i] = true;
            continue;
        }
        break;
    }
}

struct Target {
    Vec2 point;
    bool is_final = false; // stopping here ends the episode
    double stop_m = 0.0;
};

Target select_target(const Episode& ep, const Pose& pose, const std::vector<bool>& reached) {
    switch (ep.task) {
    case TaskKind::VLN:
        for (size_t i = 0; i < reached.size(); ++i) {
            if (!reached[i]) return {ep.landmarks[i], false, 0.0};
        }
        return {ep.destination, true, kVlnStopM};
    case TaskKind::ObjectNav:
    case TaskKind::EQA: {
        // Cheapest instance by geodesic, not by straight-line distance: a
        // wall between agent and the nearest instance would wreck SPL.
        double best = std::numeric_limits<double>::infinity();
        Vec2 pos{};
        for (const SceneObject& o : ep.scene.objects) {
            if (o.category != ep.target_category) continue;
            const double d = geodesic_m(ep.scene, pose_pos(pose), o.pos, kAgentInflateCells);
            if (d < best) {
                best = d;
                pos = o.pos;
            }
        }
        if (!std::isfinite(best)) throw Unreachable("no reachable instance of target category");
        return {pos, true, kObjectStopM};
    }
    case TaskKind::Follow:
        throw Error("select_target: Follow uses its own pursuit");
    }
    throw Error("unknown task kind");
}

// Four-action lookahead toward fixed goals, replanning the grid route
// whenever the target switches (landmark captured mid-batch).
ActionBatch plan_static(const EpisodeState& state) {
    const Episode& ep = *state.ep;
    std::vector<Action> acts;
    Pose pose = state.pose;
    std::vector<bool> reached = state.landmark_reached;
    capture_landmarks(ep, pose_pos(pose), reached);

    std::vector<Cell> path;
    size_t path_idx = 0;
    Vec2 planned_for{std::numeric_limits<double>::quiet_NaN(), 0.0};

    // Object goals cannot change mid-batch; only VLN retargets as landmarks
    // capture.
    const bool retargets = ep.task == TaskKind::VLN;
    const Target fixed = retargets ? Target{} : select_target(ep, pose, reached);

    while (acts.size() < 4) {
        const Target t = retargets ? select_target(ep, pose, reached) : fixed;
        if (t.is_final && distance(pose_pos(pose), t.point) <= t.stop_m) {
            acts.push_back(Action::Stop);
            break;
        }
        if (!(t.point == planned_for)) {
            path = plan_shortest_path(ep.scene, pose, t.point, kAgentInflateCells).cells;
            path_idx = 0;
            planned_for = t.point;
        }
        while (path_idx < path.size() &&
               distance(pose_pos(pose), ep.scene.cell_center(path[path_idx].x, path[path_idx].y)) <=
                   kWaypointCaptureM) {
            ++path_idx;
        }
        const Vec2 wp = path_idx < path.size()
                            ? ep.scene.cell_center(path[path_idx].x, path[path_idx].y)
                            : t.point;
        const double delta = angle_diff_deg(bearing_deg(pose_pos(pose), wp),
                                            static_cast<double>(pose.heading_deg));
        if (std::abs(delta) > kForwardAlignDeg + 1e-9) {
            const Action a = turn_toward(delta);
            pose.heading_deg = apply_turn(pose.heading_deg, a);
            acts.push_back(a);
        } else {
            const Vec2 np = pose_pos(pose) + kForwardM * heading_vec(pose.heading_deg);
            pose.x = np.x;
            pose.y = np.y;
            acts.push_back(Action::Forward);
            capture_landmarks(ep, np, reached);
        }
    }
    return make_batch(acts);
}

// Route cells for the Follow pursuit. Non-target humans are stamped into the
// planning grid so the path swings around them; two bodies meeting head-on in
// a corridor would otherwise block each other forever (the simulator halts
// human steps near the agent, and the agent refuses steps near humans).
// Overlapping stamps can wall the agent in, so a disconnect retries with the
// tightest radius the refusal margin allows before falling back to the static
// path.
std::vector<Cell> follow_route(const EpisodeState& state, const Pose& pose, Vec2 target) {
    const Episode& ep = *state.ep;
    const Scene& scene = ep.scene;
    const Cell from{scene.cell_of(pose.x), scene.cell_of(pose.y)};
    for (const double stamp_m : {kHumanStampM, kHumanStampTightM}) {
        OccGrid grid = planning_grid(scene, kAgentInflateCells);
        const int reach = static_cast<int>(std::ceil(stamp_m / scene.cell_m)) + 1;
        for (size_t i = 0; i < state.humans.size(); ++i) {
            if (static_cast<int>(i) == ep.follow_human_id) continue;
            const Vec2 h = state.humans[i].pos;
            const int cx = scene.cell_of(h.x);
            const int cy = scene.cell_of(h.y);
            for (int dy = -reach; dy <= reach; ++dy) {
                for (int dx = -reach; dx <= reach; ++dx) {
                    const int x = cx + dx;
                    const int y = cy + dy;
                    if (x < 0 || y < 0 || x >= grid.width || y >= grid.height) continue;
                    if (distance(scene.cell_center(x, y), h) < stamp_m) {
                        grid.occ[grid.index(x, y)] = true;
                    }
                }
            }
        }
        try {
            const Cell to =
                nearest_free_cell(grid, Cell{scene.cell_of(target.x), scene.cell_of(target.y)});
            return plan_path(grid, from, to).cells;
        } catch (const Unreachable&) {
            continue;
        }
    }
    return plan_shortest_path(ep.scene, pose, target, kAgentInflateCells).cells;
}

// Pursuit of a moving human. Candidate actions are committed against a
// scratch copy of the live state, so the plan sees the exact walker motion
// and blocking rules the rollout will replay; a FORWARD that would collide
// is never emitted, and the followed-step count stays exact.
ActionBatch plan_follow(const EpisodeState& state) {
    const Episode& ep = *state.ep;
    if (ep.follow_human_id < 0 || ep.follow_human_id >= static_cast<int>(state.humans.size())) {
        throw Error("follow target missing from state");
    }

    std::vector<Action> acts;
    EpisodeState scratch = state;
    std::vector<Cell> path;
    size_t path_idx = 0;
    bool planned = false;
    bool yielding = false;

    const auto commit = [&](Action a) {
        step(scratch, a);
        acts.push_back(a);
    };

    // Forward only happens if the simulated step really moves.
    const auto try_forward = [&]() -> bool {
        EpisodeState probe = scratch;
        if (step(probe, Action::Forward).collided) return false;
        scratch = std::move(probe);
        acts.push_back(Action::Forward);
        return true;
    };

    // Net-zero wiggle; parity on the step index keeps the alternation exact
    // across batch boundaries.
    const auto wiggle = [&] {
        commit(scratch.steps % 2 == 0 ? Action::TurnLeft : Action::TurnRight);
    };

    // A blocked step means the agent and a walker are crowding each other;
    // the simulator also halts humans close to the agent, so standing still
    // can deadlock both. Head for the most open forward landing instead.
    // Stays in force for the rest of the batch so the escape turn is not
    // undone by the next iteration's pursuit alignment.
    const auto yield_move = [&] {
        yielding = true;
        static constexpr int kOffsets[] = {0,   30,  -30,  60,  -60,  90,
                                           -90, 120, -120, 150, -150, 180};
        int best_heading = -1;
        double best_clear = kAgentRadius + kHumanRadius;
        for (const int off : kOffsets) {
            const int h = (scratch.pose.heading_deg + off + 360) % 360;
            const Vec2 cand = pose_pos(scratch.pose) + kForwardM * heading_vec(h);
            if (disc_hits_occupancy(ep.scene, cand, kAgentRadius)) continue;
            const double c = human_clearance(scratch, cand);
            if (c > best_clear) {
                best_clear = c;
                best_heading = h;
            }
        }
        if (best_heading < 0) {
            // Boxed in; wait for the walkers to pass.
            wiggle();
            return;
        }
        if (best_heading == scratch.pose.heading_deg) {
            if (!try_forward()) wiggle();
            return;
        }
        const double yd = angle_diff_deg(static_cast<double>(best_heading),
                                         static_cast<double>(scratch.pose.heading_deg));
        commit(turn_toward(yd));
    };

    while (acts.size() < 4 && !scratch.done) {
        const Vec2 target = scratch.humans[static_cast<size_t>(ep.follow_human_id)].pos;
        const Vec2 apos = pose_pos(scratch.pose);
        const double d = distance(apos, target);
        const double delta =
            angle_diff_deg(bearing_deg(apos, target), static_cast<double>(scratch.pose.heading_deg));
        int followed = 0;
        for (bool f : scratch.following) {
            if (f) ++followed;
        }
        if (followed >= ep.follow_steps && d <= kFollowStopM) {
            // Square up before stopping; success requires facing the target.
            if (std::abs(delta) <= kFacingConeDeg - 1.0) {
                commit(Action::Stop);
                break;
            }
            commit(turn_toward(delta));
            continue;
        }
        if (yielding) {
            yield_move();
            continue;
        }
        if (d <= kFollowApproachM) {
            // Close enough; burn the step in place.
            wiggle();
            continue;
        }
        if (!planned) {
            path = follow_route(scratch, scratch.pose, target);
            path_idx = 0;
            planned = true;
        }
        while (path_idx < path.size() &&
               distance(apos, ep.scene.cell_center(path[path_idx].x, path[path_idx].y)) <=
                   kWaypointCaptureM) {
            ++path_idx;
        }
        const Vec2 wp = path_idx < path.size()
                            ? ep.scene.cell_center(path[path_idx].x, path[path_idx].y)
                            : target;
        const double wp_delta = angle_diff_deg(bearing_deg(apos, wp),
                                               static_cast<double>(scratch.pose.heading_deg));
        if (std::abs(wp_delta) > kForwardAlignDeg + 1e-9) {
            commit(turn_toward(wp_delta));
            continue;
        }
        if (!try_forward()) yield_move();
    }
    return make_batch(acts);
}

const EpisodeState& request_state(const PolicyRequest& request) {
    if (request.state == nullptr) throw Error("policy request carries no episode state");
    return *request.state;
}

double key_rand01(uint64_t& s) { return (splitmix64(s) >> 11) * 0x1.0p-53; }

uint64_t make_key(uint64_t episode_seed, int step, uint64_t policy_seed) {
    uint64_t s = episode_seed ^ 0x6e61766d656d2121ull;
    s += splitmix64(s) ^ (static_cast<uint64_t>(step) * 0x9e3779b97f4a7c15ull);
    s += splitmix64(s) ^ policy_seed;
    splitmix64(s);
    return s;
}

} // namespace

ActionBatch make_batch(const std::vector<Action>& prefix) {
    ActionBatch b;
    bool stopped = false;
    for (size_t i = 0; i < b.actions.size(); ++i) {
        if (!stopped && i < prefix.size()) {
            b.actions[i] = prefix[i];
            if (prefix[i] == Action::Stop) stopped = true;
        } else {
            b.actions[i] = Action::Stop;
        }
    }
    return b;
}

std::string Policy::answer(const PolicyRequest&) { return ""; }

ActionBatch OraclePolicy::plan(const PolicyRequest& request) {
    const EpisodeState& state = request_state(request);
    const Episode& ep = *state.ep;
    if (state.done) return make_batch({});

    if (!ep.script.empty()) {
        // Literal command episodes: replay the script from wherever the
        // rollout currently is, then stop.
        std::vector<Action> acts;
        for (size_t i = static_cast<size_t>(state.steps);
             i < ep.script.size() && acts.size() < 4; ++i) {
            acts.push_back(ep.script[i]);
        }
        return make_batch(acts);
    }
    if (ep.task == TaskKind::Follow) return plan_follow(state);
    return plan_static(state);
}

std::string OraclePolicy::answer(const PolicyRequest& request) {
    return request_state(request).ep->answer;
}

NoisyExpertPolicy::NoisyExpertPolicy(double epsilon, uint64_t seed)
    : epsilon_(epsilon), seed_(seed) {
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must lie in [0, 1]");
}

ActionBatch NoisyExpertPolicy::plan(const PolicyRequest& request) {
    const EpisodeState& state = request_state(request);
    ActionBatch batch = oracle_.plan(request);
    uint64_t s = make_key(state.ep->seed, state.steps, seed_);
    for (Action& a : batch.actions) {
        if (a == Action::Stop) continue; // never corrupt the stop decision
        if (key_rand01(s) < epsilon_) {
            static const Action kMoves[3] = {Action::Forward, Action::TurnLeft,
                                             Action::TurnRight};
            a = kMoves[splitmix64(s) % 3];
        }
    }
    return batch;
}

std::string NoisyExpertPolicy::answer(const PolicyRequest& request) {
    return oracle_.answer(request);
}

RandomPolicy::RandomPolicy(uint64_t seed) : seed_(seed) {}

ActionBatch RandomPolicy::plan(const PolicyRequest& request) {
    const EpisodeState& state = request_state(request);
    uint64_t s = make_key(state.ep->seed, state.steps, seed_ ^ 0x72616e646f6dull);
    std::vector<Action> acts;
    static const Action kAll[4] = {Action::Forward, Action::TurnLeft, Action::TurnRight,
                                   Action::Stop};
    for (int i = 0; i < 4; ++i) acts.push_back(kAll[splitmix64(s) % 4]);
    return make_batch(acts);
}

ReplayPolicy::ReplayPolicy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay file: " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaMismatch("replay line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("answer")) {
            answer_ = j.at("answer").get<std::string>();
            continue;
        }
        if (!j.contains("actions") || !j.at("actions").is_array()) {
            throw SchemaMismatch("replay line " + std::to_string(lineno) +
                                 ": expected an actions array");
        }
        std::vector<Action> acts;
        try {
            for (const json& a : j.at("actions")) {
                acts.push_back(action_from_string(a.get<std::string>()));
            }
        } catch (const json::exception& e) {
            throw SchemaMismatch("replay line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ConfigError& e) {
            // An unrecognized action name is a defect of the file, not of the
            // caller's configuration.
            throw SchemaMismatch("replay line " + std::to_string(lineno) + ": " + e.what());
        }
        if (acts.size() > 4) {
            throw SchemaMismatch("replay line " + std::to_string(lineno) +
                                 ": batch longer than 4 actions");
        }
        batches_.push_back(make_batch(acts));
    }
}

ActionBatch ReplayPolicy::plan(const PolicyRequest&) {
    if (next_ >= batches_.size()) return make_batch({});
    return batches_[next_++];
}

std::string ReplayPolicy::answer(const PolicyRequest&) { return answer_; }

std::unique_ptr<Policy> make_policy(const std::string& spec, uint64_t seed) {
    if (spec == "oracle") return std::make_unique<OraclePolicy>();
    if (spec == "random") return std::make_unique<RandomPolicy>(seed);
    if (spec == "noisy-expert") return std::make_unique<NoisyExpertPolicy>(0.2, seed);
    if (spec.rfind("noisy-expert:", 0) == 0) {
        const std::string eps = spec.substr(std::string("noisy-expert:").size());
        try {
            return std::make_unique<NoisyExpertPolicy>(std::stod(eps), seed);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad epsilon in policy spec: " + spec);
        }
    }
    if (spec.rfind("replay:", 0) == 0) {
        return std::make_unique<ReplayPolicy>(spec.substr(std::string("replay:").size()));
    }
    throw ConfigError("unknown policy: " + spec);
}

} // namespace navmem
