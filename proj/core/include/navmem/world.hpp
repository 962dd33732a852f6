#pragma once

#include "navmem/metrics.hpp"
#include "navmem/planner.hpp"
#include "navmem/prompt.hpp"
#include "navmem/scene.hpp"
#include "navmem/view.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace navmem {

enum class Action { Forward, TurnLeft, TurnRight, Stop };

// Wire names: forward, turn_left, turn_right, stop.
std::string to_string(Action a);
Action action_from_string(const std::string& name);

inline constexpr double kForwardM = 0.25;
inline constexpr int kTurnDeg = 30;
inline constexpr double kAgentRadius = 0.18;
inline constexpr double kHumanRadius = 0.3;
inline constexpr double kHumanStepM = 0.1;

// Success radii per task, meters.
inline constexpr double kVlnRadius = 3.0;
inline constexpr double kObjectNavRadius = 1.0;
inline constexpr double kEqaRadius = 1.0;
inline constexpr double kFollowRadius = 2.0;

// Capture radius for intermediate route landmarks.
inline constexpr double kLandmarkCaptureM = 1.0;
// Facing tolerance for Follow success: one turn quantum either way.
inline constexpr double kFacingConeDeg = 30.0;

// Agent bodies plan on a 1-ring dilated grid (cell centers then clear walls
// by 0.375 m > 0.18 m radius); human bodies use 2 rings for their wider disc.
inline constexpr int kAgentInflateCells = 1;
inline constexpr int kHumanInflateCells = 2;

struct GenConfig {
    int min_side = 20; // cells
    int max_side = 60;
    double obstacle_density = 0.06; // share of interior area covered by random blocks
    int view_radius = 8;            // cells
    int max_retries = 50;
    int human_count_min = 2; // Follow only
    int human_count_max = 6;
    double low_level_ratio = 0.0; // share of VLN episodes that are literal action scripts

    void validate() const;
};

struct Episode {
    std::string id;
    TaskKind task = TaskKind::VLN;
    uint64_t seed = 0;
    Scene scene;
    Pose start;
    Instruction instruction;
    int max_steps = 500;
    int view_radius = 8;

    std::vector<Vec2> landmarks; // VLN: route points, visited in order
    Vec2 destination{};          // VLN
    std::string target_category; // ObjectNav / EQA
    std::string question;        // EQA
    std::string answer;          // EQA ground truth
    int follow_human_id = -1;    // Follow
    int follow_steps = 0;        // Follow: steps the expert keeps tracking before stopping
    std::vector<Action> script;  // low-level episodes: literal command sequence, no STOP
};

struct StepResult {
    Pose new_pose;
    bool collided = false;
    LocalView frame;
    bool done = false;
};

struct HumanState {
    Vec2 pos;
    int next_waypoint = 0;   // index into the spec's waypoint cycle
    std::vector<Cell> path;  // planned cells toward that waypoint
    size_t path_idx = 0;
};

// Mutable rollout state. Copyable so executors can hand policies a snapshot
// of the world as it was when a frame was captured.
struct EpisodeState {
    std::shared_ptr<const Episode> ep;
    Pose pose;
    std::vector<HumanState> humans;
    int steps = 0;
    bool done = false;
    bool stopped = false; // finished via an executed STOP rather than the step cap
    int forward_count = 0;
    bool human_collision = false;
    std::vector<bool> following;        // Follow: per executed step, within 2 m of target
    std::vector<bool> landmark_reached; // VLN
    double min_goal_dist = 0.0;         // closest approach to the goal so far
    std::vector<Action> executed;
    std::vector<Pose> trail; // start pose plus one entry per step
};

EpisodeState start_episode(const Episode& ep);
EpisodeState start_episode(std::shared_ptr<const Episode> ep);

// Applies one action. A FORWARD into a wall or a human disc leaves the pose
// unchanged and flags the collision; the step still counts. Humans advance
// one plan step (0.1 m) each non-STOP action. Throws EpisodeFinished once
// done.
StepResult step(EpisodeState& state, Action action);

// Egocentric occupancy patch around the agent's cell plus tags for objects
// and humans within view range, a 90-degree cone, and clear line of sight.
LocalView render_local_view(const EpisodeState& state);

// Deterministic in (task, config, seed). Layouts are retried until the
// planner confirms the goal reachable; GenerationFailed after max_retries.
Episode generate_episode(TaskKind task, const GenConfig& config, uint64_t seed);

struct SuccessRecord {
    bool success = false;
    bool oracle_success = false; // came within the task radius at any step
    double nav_error_m = 0.0;    // final distance to the goal entity
    double path_length_m = 0.0;  // 0.25 m per unblocked FORWARD
    double geodesic_m = 0.0;     // planner-grid shortest start-to-goal
    int follow_steps = 0;
    int total_steps = 0;
    bool human_collision = false;
    bool answer_correct = false; // EQA
};

// Requires a finished rollout. `answer` is the agent's reply for EQA
// episodes; ignored elsewhere.
SuccessRecord check_success(const EpisodeState& state, const std::string& answer = "");

// Flattens a finished rollout into the row the metrics aggregator consumes.
EpisodeOutcome outcome_of(const EpisodeState& state, const SuccessRecord& record);

// Current position of the goal entity and the task's success radius.
Vec2 goal_point(const EpisodeState& state);
double task_radius(TaskKind task);

// Episode round-trip as a navmem.episode.v1 JSON document.
std::string episode_to_json(const Episode& ep);
Episode episode_from_json(const std::string& text);

} // namespace navmem
