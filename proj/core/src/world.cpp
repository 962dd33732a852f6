#include "navmem/world.hpp"

#include "navmem/errors.hpp"
#include "navmem/features.hpp"
#include "navmem/metrics.hpp"
#include "navmem/templates.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace navmem {

namespace {

// View cone half-angle.
constexpr double kFovHalfDeg = 45.0;

double rand01(uint64_t& s) { return (splitmix64(s) >> 11) * 0x1.0p-53; }

int rand_int(uint64_t& s, int lo, int hi) {
    return lo + static_cast<int>(splitmix64(s) % static_cast<uint64_t>(hi - lo + 1));
}

uint64_t attempt_seed(uint64_t seed, int attempt) {
    uint64_t s = seed;
    for (int i = 0; i <= attempt; ++i) splitmix64(s);
    return s;
}

} // namespace

std::string to_string(Action a) {
    switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::Stop: return "stop";
    }
    throw Error("unknown action");
}

Action action_from_string(const std::string& name) {
    if (name == "forward") return Action::Forward;
    if (name == "turn_left") return Action::TurnLeft;
    if (name == "turn_right") return Action::TurnRight;
    if (name == "stop") return Action::Stop;
    throw ConfigError("unknown action '" + name + "'");
}

void GenConfig::validate() const {
    if (min_side < 12 || max_side < min_side) {
        throw ConfigError("gen: need 12 <= min_side <= max_side");
    }
    if (obstacle_density < 0.0 || obstacle_density > 0.3) {
        throw ConfigError("gen: obstacle_density must lie in [0, 0.3]");
    }
    if (view_radius < 2) throw ConfigError("gen: view_radius must be >= 2");
    if (max_retries < 1) throw ConfigError("gen: max_retries must be >= 1");
    if (human_count_min < 1 || human_count_max < human_count_min) {
        throw ConfigError("gen: need 1 <= human_count_min <= human_count_max");
    }
    if (low_level_ratio < 0.0 || low_level_ratio > 1.0) {
        throw ConfigError("gen: low_level_ratio must lie in [0, 1]");
    }
}

double task_radius(TaskKind task) {
    switch (task) {
    case TaskKind::VLN: return kVlnRadius;
    case TaskKind::ObjectNav: return kObjectNavRadius;
    case TaskKind::EQA: return kEqaRadius;
    case TaskKind::Follow: return kFollowRadius;
    }
    throw Error("unknown task kind");
}

Vec2 goal_point(const EpisodeState& state) {
    const Episode& ep = *state.ep;
    const Vec2 agent{state.pose.x, state.pose.y};
    switch (ep.task) {
    case TaskKind::VLN: return ep.destination;
    case TaskKind::ObjectNav: {
        double best = std::numeric_limits<double>::infinity();
        Vec2 pos{};
        for (const SceneObject& o : ep.scene.objects) {
            if (o.category != ep.target_category) continue;
            const double d = distance(agent, o.pos);
            if (d < best) {
                best = d;
                pos = o.pos;
            }
        }
        if (!std::isfinite(best)) throw Error("goal_point: no instance of target category");
        return pos;
    }
    case TaskKind::EQA:
        for (const SceneObject& o : ep.scene.objects) {
            if (o.category == ep.target_category) return o.pos;
        }
        throw Error("goal_point: no instance of target category");
    case TaskKind::Follow:
        if (ep.follow_human_id < 0 ||
            ep.follow_human_id >= static_cast<int>(state.humans.size())) {
            throw Error("goal_point: bad follow target");
        }
        return state.humans[static_cast<size_t>(ep.follow_human_id)].pos;
    }
    throw Error("unknown task kind");
}

namespace {

void replan_human(EpisodeState& state, size_t hi) {
    const Scene& scene = state.ep->scene;
    const HumanSpec& spec = scene.humans[hi];
    HumanState& h = state.humans[hi];
    const OccGrid grid = planning_grid(scene, kHumanInflateCells);
    const Vec2 wp = spec.waypoints[static_cast<size_t>(h.next_waypoint)];
    const Cell from{scene.cell_of(h.pos.x), scene.cell_of(h.pos.y)};
    const Cell to = nearest_free_cell(grid, Cell{scene.cell_of(wp.x), scene.cell_of(wp.y)});
    h.path = plan_path(grid, from, to).cells;
    h.path_idx = 0;
}

void advance_human(EpisodeState& state, size_t hi) {
    const Scene& scene = state.ep->scene;
    const HumanSpec& spec = scene.humans[hi];
    HumanState& h = state.humans[hi];
    if (spec.waypoints.empty()) return;

    Vec2 pos = h.pos;
    double budget = kHumanStepM;
    size_t replans = 0;
    while (budget > 1e-12) {
        if (h.path_idx >= h.path.size()) {
            if (++replans > spec.waypoints.size() + 1) break; // all waypoints coincide
            h.next_waypoint = (h.next_waypoint + 1) % static_cast<int>(spec.waypoints.size());
            replan_human(state, hi);
            continue;
        }
        const Cell c = h.path[h.path_idx];
        const Vec2 target = scene.cell_center(c.x, c.y);
        const double d = distance(pos, target);
        if (d <= budget) {
            pos = target;
            budget -= d;
            ++h.path_idx;
        } else {
            pos = pos + (budget / d) * (target - pos);
            budget = 0.0;
        }
    }

    // Bodies block each other: a move that would touch the agent or another
    // human is skipped for this step.
    if (distance(pos, Vec2{state.pose.x, state.pose.y}) < kAgentRadius + kHumanRadius) return;
    for (size_t j = 0; j < state.humans.size(); ++j) {
        if (j != hi && distance(pos, state.humans[j].pos) < 2.0 * kHumanRadius) return;
    }
    h.pos = pos;
}

void update_progress(EpisodeState& state) {
    const Episode& ep = *state.ep;
    const Vec2 agent{state.pose.x, state.pose.y};
    if (ep.task == TaskKind::VLN) {
        for (size_t i = 0; i < ep.landmarks.size(); ++i) {
            if (state.landmark_reached[i]) continue;
            if (distance(agent, ep.landmarks[i]) <= kLandmarkCaptureM) {
                state.landmark_reached[i] = true;
                continue; // capture may cascade when landmarks sit close together
            }
            break; // route landmarks are visited in order
        }
    }
    const Vec2 g = goal_point(state);
    state.min_goal_dist = std::min(state.min_goal_dist, distance(agent, g));
    if (ep.task == TaskKind::Follow) {
        state.following.push_back(distance(agent, g) <= kFollowRadius);
    }
}

} // namespace

EpisodeState start_episode(const Episode& ep) {
    return start_episode(std::make_shared<const Episode>(ep));
}

EpisodeState start_episode(std::shared_ptr<const Episode> ep) {
    EpisodeState state;
    state.ep = std::move(ep);
    state.pose = state.ep->start;
    state.min_goal_dist = std::numeric_limits<double>::infinity();
    state.landmark_reached.assign(state.ep->landmarks.size(), false);
    for (size_t hi = 0; hi < state.ep->scene.humans.size(); ++hi) {
        HumanState h;
        h.pos = state.ep->scene.humans[hi].start;
        state.humans.push_back(std::move(h));
        if (!state.ep->scene.humans[hi].waypoints.empty()) replan_human(state, hi);
    }
    const Vec2 agent{state.pose.x, state.pose.y};
    state.min_goal_dist = distance(agent, goal_point(state));
    state.trail.push_back(state.pose);
    return state;
}

StepResult step(EpisodeState& state, Action action) {
    if (state.done) throw EpisodeFinished("step: episode already finished");
    const Episode& ep = *state.ep;
    bool collided = false;

    switch (action) {
    case Action::Stop:
        state.stopped = true;
        state.done = true;
        break;
    case Action::TurnLeft:
        state.pose.heading_deg = (state.pose.heading_deg + 360 - kTurnDeg) % 360;
        break;
    case Action::TurnRight:
        state.pose.heading_deg = (state.pose.heading_deg + kTurnDeg) % 360;
        break;
    case Action::Forward: {
        const Vec2 next =
            Vec2{state.pose.x, state.pose.y} + kForwardM * heading_vec(state.pose.heading_deg);
        if (disc_hits_occupancy(ep.scene, next, kAgentRadius)) {
            collided = true;
        } else {
            for (const HumanState& h : state.humans) {
                if (distance(next, h.pos) < kAgentRadius + kHumanRadius) {
                    collided = true;
                    state.human_collision = true;
                    break;
                }
            }
        }
        if (!collided) {
            state.pose.x = next.x;
            state.pose.y = next.y;
            state.forward_count += 1;
        }
        break;
    }
    }

    state.steps += 1;
    state.executed.push_back(action);
    if (action != Action::Stop) {
        for (size_t hi = 0; hi < state.humans.size(); ++hi) advance_human(state, hi);
    }
    if (state.steps >= ep.max_steps) state.done = true;
    update_progress(state);
    state.trail.push_back(state.pose);

    return StepResult{state.pose, collided, render_local_view(state), state.done};
}

LocalView render_local_view(const EpisodeState& state) {
    const Episode& ep = *state.ep;
    const Scene& scene = ep.scene;
    LocalView view;
    view.radius = ep.view_radius;
    view.heading_deg = state.pose.heading_deg;
    const int r = view.radius;
    const int side = 2 * r + 1;
    const int cxa = scene.cell_of(state.pose.x);
    const int cya = scene.cell_of(state.pose.y);
    view.patch.assign(static_cast<size_t>(side) * side, 0);
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            view.patch[static_cast<size_t>(dy + r) * side + (dx + r)] =
                scene.occupied(cxa + dx, cya + dy) ? 1 : 0;
        }
    }

    const Vec2 agent{state.pose.x, state.pose.y};
    const double range = r * scene.cell_m;
    auto visible = [&](Vec2 pos) {
        const double d = distance(agent, pos);
        if (d > range + 1e-12) return false;
        if (d > 1e-9) {
            const double rel = angle_diff_deg(bearing_deg(agent, pos),
                                              static_cast<double>(state.pose.heading_deg));
            if (std::abs(rel) > kFovHalfDeg + 1e-9) return false;
        }
        return line_of_sight(scene, cxa, cya, scene.cell_of(pos.x), scene.cell_of(pos.y));
    };
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const Vec2 p = scene.objects[i].pos;
        if (!visible(p)) continue;
        view.tags.push_back(VisTag{VisTag::Kind::Object, static_cast<int>(i),
                                   scene.cell_of(p.x) - cxa, scene.cell_of(p.y) - cya});
    }
    for (size_t i = 0; i < state.humans.size(); ++i) {
        const Vec2 p = state.humans[i].pos;
        if (!visible(p)) continue;
        view.tags.push_back(VisTag{VisTag::Kind::Human, static_cast<int>(i),
                                   scene.cell_of(p.x) - cxa, scene.cell_of(p.y) - cya});
    }
    std::sort(view.tags.begin(), view.tags.end(), [](const VisTag& a, const VisTag& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.id < b.id;
    });
    return view;
}

SuccessRecord check_success(const EpisodeState& state, const std::string& answer) {
    if (!state.done) throw Error("check_success: episode still running");
    const Episode& ep = *state.ep;
    SuccessRecord r;
    r.total_steps = state.steps;
    r.path_length_m = kForwardM * state.forward_count;
    r.human_collision = state.human_collision;
    r.follow_steps =
        static_cast<int>(std::count(state.following.begin(), state.following.end(), true));

    const Vec2 agent{state.pose.x, state.pose.y};
    const Vec2 goal = goal_point(state);
    r.nav_error_m = distance(agent, goal);
    const double radius = task_radius(ep.task);
    r.oracle_success = state.min_goal_dist <= radius;

    switch (ep.task) {
    case TaskKind::VLN:
        r.success = state.stopped && r.nav_error_m <= radius;
        r.geodesic_m = geodesic_m(ep.scene, Vec2{ep.start.x, ep.start.y}, ep.destination,
                                  kAgentInflateCells);
        break;
    case TaskKind::ObjectNav:
    case TaskKind::EQA: {
        r.success = state.stopped && r.nav_error_m <= radius;
        double best = std::numeric_limits<double>::infinity();
        for (const SceneObject& o : ep.scene.objects) {
            if (o.category != ep.target_category) continue;
            best = std::min(best,
                            geodesic_m(ep.scene, Vec2{ep.start.x, ep.start.y}, o.pos,
                                       kAgentInflateCells));
        }
        r.geodesic_m = best;
        if (ep.task == TaskKind::EQA) {
            r.answer_correct = normalize_answer(answer) == normalize_answer(ep.answer);
        }
        break;
    }
    case TaskKind::Follow: {
        const double facing = std::abs(angle_diff_deg(
            bearing_deg(agent, goal), static_cast<double>(state.pose.heading_deg)));
        r.success = state.stopped && r.nav_error_m <= radius && facing <= kFacingConeDeg + 1e-9;
        const Vec2 tstart =
            ep.scene.humans[static_cast<size_t>(ep.follow_human_id)].start;
        r.geodesic_m =
            geodesic_m(ep.scene, Vec2{ep.start.x, ep.start.y}, tstart, kAgentInflateCells);
        break;
    }
    }
    return r;
}

EpisodeOutcome outcome_of(const EpisodeState& state, const SuccessRecord& record) {
    EpisodeOutcome o;
    o.episode_id = state.ep->id;
    o.task = state.ep->task;
    o.seed = state.ep->seed;
    o.success = record.success;
    o.oracle_success = record.oracle_success;
    o.path_length_m = record.path_length_m;
    o.geodesic_m = record.geodesic_m;
    o.nav_error_m = record.nav_error_m;
    o.steps = record.total_steps;
    o.stopped = state.stopped;
    o.follow_steps = record.follow_steps;
    o.total_steps = record.total_steps;
    o.human_collision = record.human_collision;
    o.answer_correct = record.answer_correct;
    return o;
}

// ---------------------------------------------------------------------------
// Episode generation

namespace {

struct SceneDraft {
    Scene scene;
    OccGrid agent_grid; // 1-ring inflation
    std::vector<int> free_cells; // inflated-free flat indices, ascending
};

SceneDraft draft_scene(uint64_t& rng, const GenConfig& cfg, double density) {
    Scene s;
    s.width = rand_int(rng, cfg.min_side, cfg.max_side);
    s.height = rand_int(rng, cfg.min_side, cfg.max_side);
    s.occ.assign(static_cast<size_t>(s.width) * s.height, 0);
    for (int x = 0; x < s.width; ++x) {
        s.occ[static_cast<size_t>(x)] = 1;
        s.occ[static_cast<size_t>(s.height - 1) * s.width + x] = 1;
    }
    for (int y = 0; y < s.height; ++y) {
        s.occ[static_cast<size_t>(y) * s.width] = 1;
        s.occ[static_cast<size_t>(y) * s.width + s.width - 1] = 1;
    }
    const int interior = (s.width - 2) * (s.height - 2);
    const int target = static_cast<int>(density * interior);
    int placed = 0;
    for (int guard = 0; placed < target && guard < 400; ++guard) {
        const int bw = rand_int(rng, 1, 4);
        const int bh = rand_int(rng, 1, 4);
        if (s.width - 2 - bw < 2 || s.height - 2 - bh < 2) continue;
        const int bx = rand_int(rng, 2, s.width - 2 - bw);
        const int by = rand_int(rng, 2, s.height - 2 - bh);
        for (int y = by; y < by + bh; ++y) {
            for (int x = bx; x < bx + bw; ++x) {
                s.occ[static_cast<size_t>(y) * s.width + x] = 1;
            }
        }
        placed += bw * bh;
    }

    SceneDraft d;
    d.agent_grid = planning_grid(s, kAgentInflateCells);
    for (int i = 0; i < s.width * s.height; ++i) {
        if (!d.agent_grid.occ[static_cast<size_t>(i)]) d.free_cells.push_back(i);
    }
    d.scene = std::move(s);
    return d;
}

Cell pick_free_cell(uint64_t& rng, const SceneDraft& d) {
    const int i = d.free_cells[static_cast<size_t>(splitmix64(rng) %
                                                   d.free_cells.size())];
    return Cell{i % d.scene.width, i / d.scene.width};
}

bool reachable(const SceneDraft& d, Cell from, Cell to, double* out_m = nullptr) {
    try {
        const PlanResult p = plan_path(d.agent_grid, from, to);
        if (out_m) *out_m = p.meters(d.scene.cell_m);
        return true;
    } catch (const Unreachable&) {
        return false;
    }
}

// Objects the six-category pool knows about, placed on planner-free cells so
// every instance is approachable.
void place_object(SceneDraft& d, uint64_t& rng, const std::string& category,
                  const std::string& color, Cell at) {
    d.scene.objects.push_back(SceneObject{category, color, d.scene.cell_center(at.x, at.y)});
    (void)rng;
}

std::string pick_color(uint64_t& rng) {
    const auto& colors = object_colors();
    return colors[static_cast<size_t>(splitmix64(rng) % colors.size())];
}

Episode finish_episode(TaskKind task, uint64_t seed, const GenConfig& cfg, SceneDraft&& d) {
    Episode ep;
    ep.task = task;
    ep.seed = seed;
    ep.id = to_string(task) + "-" + std::to_string(seed);
    ep.scene = std::move(d.scene);
    ep.view_radius = cfg.view_radius;
    return ep;
}

bool gen_objectnav(uint64_t rng, uint64_t seed, const GenConfig& cfg, Episode& out) {
    SceneDraft d = draft_scene(rng, cfg, cfg.obstacle_density);
    if (d.free_cells.size() < 20) return false;
    const Cell start = pick_free_cell(rng, d);
    const int heading = 30 * rand_int(rng, 0, 11);

    const auto& cats = object_categories();
    const std::string target = cats[static_cast<size_t>(splitmix64(rng) % cats.size())];
    const int n_targets = rand_int(rng, 1, 2);
    const int n_distractors = rand_int(rng, 3, 5);

    std::vector<Cell> used{start};
    auto place_distinct = [&](double min_geo, double* got_geo) -> std::pair<bool, Cell> {
        for (int tries = 0; tries < 60; ++tries) {
            const Cell c = pick_free_cell(rng, d);
            if (std::find(used.begin(), used.end(), c) != used.end()) continue;
            double geo = 0.0;
            if (!reachable(d, start, c, &geo)) continue;
            if (geo < min_geo) continue;
            if (got_geo) *got_geo = geo;
            used.push_back(c);
            return {true, c};
        }
        return {false, Cell{}};
    };

    for (int i = 0; i < n_targets; ++i) {
        auto [ok, c] = place_distinct(2.0, nullptr);
        if (!ok) return false;
        place_object(d, rng, target, pick_color(rng), c);
    }
    for (int i = 0; i < n_distractors; ++i) {
        auto [ok, c] = place_distinct(0.0, nullptr);
        if (!ok) return false;
        std::string cat = cats[static_cast<size_t>(splitmix64(rng) % cats.size())];
        place_object(d, rng, cat, pick_color(rng), c);
    }

    out = finish_episode(TaskKind::ObjectNav, seed, cfg, std::move(d));
    out.start = Pose{out.scene.cell_center(start.x, start.y).x,
                     out.scene.cell_center(start.x, start.y).y, heading};
    out.target_category = target;
    out.instruction = render_instruction(objectnav_template(), {{"Object", target}}, seed);
    return true;
}

bool gen_eqa(uint64_t rng, uint64_t seed, const GenConfig& cfg, Episode& out) {
    SceneDraft d = draft_scene(rng, cfg, cfg.obstacle_density);
    if (d.free_cells.size() < 20) return false;
    const Cell start = pick_free_cell(rng, d);
    const int heading = 30 * rand_int(rng, 0, 11);

    // One instance of the asked-about category keeps "the [Object]" unique.
    auto cats = object_categories();
    for (size_t i = cats.size() - 1; i > 0; --i) {
        std::swap(cats[i], cats[splitmix64(rng) % (i + 1)]);
    }
    const std::string target = cats[0];
    const std::string target_color = pick_color(rng);

    std::vector<Cell> used{start};
    auto place_distinct = [&](double min_geo) -> std::pair<bool, Cell> {
        for (int tries = 0; tries < 60; ++tries) {
            const Cell c = pick_free_cell(rng, d);
            if (std::find(used.begin(), used.end(), c) != used.end()) continue;
            double geo = 0.0;
            if (!reachable(d, start, c, &geo)) continue;
            if (geo < min_geo) continue;
            used.push_back(c);
            return {true, c};
        }
        return {false, Cell{}};
    };

    auto [ok, tc] = place_distinct(2.0);
    if (!ok) return false;
    place_object(d, rng, target, target_color, tc);
    const int n_distractors = rand_int(rng, 2, 4);
    for (int i = 0; i < n_distractors; ++i) {
        auto [ok2, c] = place_distinct(0.0);
        if (!ok2) return false;
        const std::string cat = cats[1 + static_cast<size_t>(splitmix64(rng) % (cats.size() - 1))];
        place_object(d, rng, cat, pick_color(rng), c);
    }

    out = finish_episode(TaskKind::EQA, seed, cfg, std::move(d));
    out.start = Pose{out.scene.cell_center(start.x, start.y).x,
                     out.scene.cell_center(start.x, start.y).y, heading};
    out.target_category = target;
    out.answer = target_color;
    out.instruction = render_instruction(eqa_template(), {{"Object", target}}, seed);
    out.question = out.instruction.text;
    return true;
}

bool gen_vln_route(uint64_t rng, uint64_t seed, const GenConfig& cfg, Episode& out) {
    SceneDraft d = draft_scene(rng, cfg, cfg.obstacle_density);
    if (d.free_cells.size() < 40) return false;
    const Cell start = pick_free_cell(rng, d);
    const int heading = 30 * rand_int(rng, 0, 11);

    Cell dest{};
    std::vector<Cell> path;
    bool found = false;
    for (int tries = 0; tries < 60 && !found; ++tries) {
        const Cell c = pick_free_cell(rng, d);
        if (c == start) continue;
        try {
            PlanResult p = plan_path(d.agent_grid, start, c);
            if (p.meters(d.scene.cell_m) < 4.0) continue;
            dest = c;
            path = std::move(p.cells);
            found = true;
        } catch (const Unreachable&) {
        }
    }
    if (!found) return false;

    // Landmarks sit on the shortest route so the optimal path passes them.
    auto cats = object_categories();
    for (size_t i = cats.size() - 1; i > 0; --i) {
        std::swap(cats[i], cats[splitmix64(rng) % (i + 1)]);
    }
    const Cell lm1 = path[path.size() / 3];
    const Cell lm2 = path[2 * path.size() / 3];
    place_object(d, rng, cats[0], pick_color(rng), lm1);
    place_object(d, rng, cats[1], pick_color(rng), lm2);
    place_object(d, rng, cats[2], pick_color(rng), dest);

    out = finish_episode(TaskKind::VLN, seed, cfg, std::move(d));
    out.start = Pose{out.scene.cell_center(start.x, start.y).x,
                     out.scene.cell_center(start.x, start.y).y, heading};
    out.landmarks = {out.scene.cell_center(lm1.x, lm1.y), out.scene.cell_center(lm2.x, lm2.y)};
    out.destination = out.scene.cell_center(dest.x, dest.y);
    out.instruction = render_instruction(
        vln_template(), {{"First", cats[0]}, {"Second", cats[1]}, {"Third", cats[2]}}, seed);
    return true;
}

bool gen_vln_low_level(uint64_t rng, uint64_t seed, const GenConfig& cfg, Episode& out) {
    SceneDraft d = draft_scene(rng, cfg, 0.02);
    if (d.free_cells.size() < 20) return false;
    const Cell start = pick_free_cell(rng, d);
    const int heading = 30 * rand_int(rng, 0, 11);
    const int n_fwd = rand_int(rng, 3, 6);
    const bool turn_right = rand_int(rng, 0, 1) == 1;
    const int n_turn = rand_int(rng, 1, 4);

    // The command run must execute collision-free from the start pose.
    Vec2 pos = d.scene.cell_center(start.x, start.y);
    const Vec2 dir = heading_vec(heading);
    for (int i = 0; i < n_fwd; ++i) {
        pos = pos + kForwardM * dir;
        if (disc_hits_occupancy(d.scene, pos, kAgentRadius)) return false;
    }

    out = finish_episode(TaskKind::VLN, seed, cfg, std::move(d));
    out.start = Pose{out.scene.cell_center(start.x, start.y).x,
                     out.scene.cell_center(start.x, start.y).y, heading};
    out.destination = pos;
    for (int i = 0; i < n_fwd; ++i) out.script.push_back(Action::Forward);
    for (int i = 0; i < n_turn; ++i) {
        out.script.push_back(turn_right ? Action::TurnRight : Action::TurnLeft);
    }
    out.instruction = render_instruction(low_level_template(),
                                         {{"N", std::to_string(n_fwd)},
                                          {"Dir", turn_right ? "right" : "left"},
                                          {"M", std::to_string(n_turn)}},
                                         seed);
    return true;
}

bool gen_follow(uint64_t rng, uint64_t seed, const GenConfig& cfg, Episode& out) {
    SceneDraft d = draft_scene(rng, cfg, std::min(cfg.obstacle_density, 0.04));
    const OccGrid human_grid = planning_grid(d.scene, kHumanInflateCells);
    std::vector<int> human_free;
    for (int i = 0; i < d.scene.width * d.scene.height; ++i) {
        if (!human_grid.occ[static_cast<size_t>(i)]) human_free.push_back(i);
    }
    if (human_free.size() < 40) return false;

    const int n_humans = rand_int(rng, cfg.human_count_min, cfg.human_count_max);
    auto descriptors = human_descriptors();
    if (static_cast<size_t>(n_humans) > descriptors.size()) return false;
    for (size_t i = descriptors.size() - 1; i > 0; --i) {
        std::swap(descriptors[i], descriptors[splitmix64(rng) % (i + 1)]);
    }

    auto pick_human_cell = [&]() {
        const int i = human_free[static_cast<size_t>(splitmix64(rng) % human_free.size())];
        return Cell{i % d.scene.width, i / d.scene.width};
    };

    std::vector<Cell> starts;
    for (int h = 0; h < n_humans; ++h) {
        bool ok = false;
        for (int tries = 0; tries < 60 && !ok; ++tries) {
            const Cell c = pick_human_cell();
            const Vec2 p = d.scene.cell_center(c.x, c.y);
            ok = true;
            for (const Cell& other : starts) {
                if (distance(p, d.scene.cell_center(other.x, other.y)) < 3.0 * kHumanRadius) {
                    ok = false;
                    break;
                }
            }
            if (ok) starts.push_back(c);
        }
        if (!ok) return false;
    }

    for (int h = 0; h < n_humans; ++h) {
        HumanSpec spec;
        spec.id = h;
        spec.description = descriptors[static_cast<size_t>(h)];
        spec.start = d.scene.cell_center(starts[static_cast<size_t>(h)].x,
                                         starts[static_cast<size_t>(h)].y);
        const int n_wp = rand_int(rng, 2, 4);
        Cell prev = starts[static_cast<size_t>(h)];
        for (int w = 0; w < n_wp; ++w) {
            bool ok = false;
            for (int tries = 0; tries < 60 && !ok; ++tries) {
                const Cell c = pick_human_cell();
                double geo = 0.0;
                try {
                    geo = plan_path(human_grid, prev, c).meters(d.scene.cell_m);
                } catch (const Unreachable&) {
                    continue;
                }
                if (geo < 2.0 || geo > 8.0) continue;
                spec.waypoints.push_back(d.scene.cell_center(c.x, c.y));
                prev = c;
                ok = true;
            }
            if (!ok) return false;
        }
        d.scene.humans.push_back(std::move(spec));
    }

    const int target = rand_int(rng, 0, n_humans - 1);
    const Vec2 tpos = d.scene.humans[static_cast<size_t>(target)].start;

    // Start the agent close to the target, looking at it.
    Cell agent_start{};
    bool placed = false;
    const int span = static_cast<int>(std::ceil(2.0 / d.scene.cell_m));
    const Cell tcell{d.scene.cell_of(tpos.x), d.scene.cell_of(tpos.y)};
    std::vector<Cell> candidates;
    for (int dy = -span; dy <= span; ++dy) {
        for (int dx = -span; dx <= span; ++dx) {
            const Cell c{tcell.x + dx, tcell.y + dy};
            if (d.agent_grid.occupied(c.x, c.y)) continue;
            const Vec2 p = d.scene.cell_center(c.x, c.y);
            const double dist_t = distance(p, tpos);
            if (dist_t < 1.0 || dist_t > 2.0) continue;
            bool clear = true;
            for (const HumanSpec& h : d.scene.humans) {
                if (distance(p, h.start) < kAgentRadius + kHumanRadius + 0.2) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;
            if (!line_of_sight(d.scene, c.x, c.y, tcell.x, tcell.y)) continue;
            candidates.push_back(c);
        }
    }
    if (!candidates.empty()) {
        agent_start = candidates[static_cast<size_t>(splitmix64(rng) % candidates.size())];
        placed = true;
    }
    if (!placed) return false;

    const Vec2 apos = d.scene.cell_center(agent_start.x, agent_start.y);
    const double bearing = bearing_deg(apos, tpos);
    int heading = static_cast<int>(std::lround(bearing / 30.0)) * 30;
    heading = ((heading % 360) + 360) % 360;

    out = finish_episode(TaskKind::Follow, seed, cfg, std::move(d));
    out.start = Pose{apos.x, apos.y, heading};
    out.follow_human_id = target;
    out.follow_steps = rand_int(rng, 60, 120);
    out.instruction = render_instruction(
        follow_template(),
        {{"Descriptor", out.scene.humans[static_cast<size_t>(target)].description}}, seed);

    // The target must appear in the first observation.
    EpisodeState probe = start_episode(out);
    const LocalView v = render_local_view(probe);
    const bool seen = std::any_of(v.tags.begin(), v.tags.end(), [&](const VisTag& t) {
        return t.kind == VisTag::Kind::Human && t.id == target;
    });
    return seen;
}

} // namespace

Episode generate_episode(TaskKind task, const GenConfig& config, uint64_t seed) {
    config.validate();
    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        uint64_t rng = attempt_seed(seed, attempt);
        Episode ep;
        bool ok = false;
        switch (task) {
        case TaskKind::VLN:
            ok = (rand01(rng) < config.low_level_ratio)
                     ? gen_vln_low_level(rng, seed, config, ep)
                     : gen_vln_route(rng, seed, config, ep);
            break;
        case TaskKind::ObjectNav: ok = gen_objectnav(rng, seed, config, ep); break;
        case TaskKind::EQA: ok = gen_eqa(rng, seed, config, ep); break;
        case TaskKind::Follow: ok = gen_follow(rng, seed, config, ep); break;
        }
        if (ok) return ep;
    }
    throw GenerationFailed("generate_episode: no solvable " + to_string(task) +
                           " layout within " + std::to_string(config.max_retries) +
                           " attempts (seed " + std::to_string(seed) + ")");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json vec_json(Vec2 v) { return json{{"x", v.x}, {"y", v.y}}; }
Vec2 vec_from(const json& j) { return Vec2{j.at("x").get<double>(), j.at("y").get<double>()}; }

} // namespace

std::string episode_to_json(const Episode& ep) {
    json j;
    j["schema"] = "navmem.episode.v1";
    j["id"] = ep.id;
    j["task"] = to_string(ep.task);
    j["seed"] = ep.seed;
    j["scene"] = json::parse(scene_to_json(ep.scene));
    j["start"] = json{{"x", ep.start.x}, {"y", ep.start.y}, {"heading", ep.start.heading_deg}};
    j["instruction"] = ep.instruction.text;
    j["max_steps"] = ep.max_steps;
    j["view_radius"] = ep.view_radius;
    json lms = json::array();
    for (Vec2 l : ep.landmarks) lms.push_back(vec_json(l));
    j["landmarks"] = std::move(lms);
    j["destination"] = vec_json(ep.destination);
    j["target_category"] = ep.target_category;
    j["question"] = ep.question;
    j["answer"] = ep.answer;
    j["follow_human_id"] = ep.follow_human_id;
    j["follow_steps"] = ep.follow_steps;
    json script = json::array();
    for (Action a : ep.script) script.push_back(to_string(a));
    j["script"] = std::move(script);
    return j.dump();
}

Episode episode_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("episode json: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != "navmem.episode.v1") {
        throw SchemaMismatch("episode json: expected schema navmem.episode.v1");
    }
    try {
        Episode ep;
        ep.id = j.at("id").get<std::string>();
        ep.task = task_kind_from_string(j.at("task").get<std::string>());
        ep.seed = j.at("seed").get<uint64_t>();
        ep.scene = scene_from_json(j.at("scene").dump());
        ep.start = Pose{j.at("start").at("x").get<double>(), j.at("start").at("y").get<double>(),
                        j.at("start").at("heading").get<int>()};
        ep.instruction = Instruction{j.at("instruction").get<std::string>(), ep.task};
        ep.max_steps = j.at("max_steps").get<int>();
        ep.view_radius = j.at("view_radius").get<int>();
        for (const json& l : j.at("landmarks")) ep.landmarks.push_back(vec_from(l));
        ep.destination = vec_from(j.at("destination"));
        ep.target_category = j.at("target_category").get<std::string>();
        ep.question = j.at("question").get<std::string>();
        ep.answer = j.at("answer").get<std::string>();
        ep.follow_human_id = j.at("follow_human_id").get<int>();
        ep.follow_steps = j.at("follow_steps").get<int>();
        for (const json& a : j.at("script")) {
            ep.script.push_back(action_from_string(a.get<std::string>()));
        }
        return ep;
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("episode json: ") + e.what());
    }
}

} // namespace navmem
