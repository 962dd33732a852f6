#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "navmem/errors.hpp"
#include "navmem/policy.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace navmem;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "navmem-policy-tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_replay(const std::string& name, const std::vector<std::string>& lines) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path, std::ios::trunc);
    for (const std::string& l : lines) out << l << "\n";
    return path;
}

Scene open_scene() {
    Scene s;
    s.width = 40;
    s.height = 40;
    s.occ.assign(1600, 0);
    return s;
}

// Agent at a cell center facing +x; one trackable object on the x axis.
Episode object_episode(Vec2 object_pos) {
    Episode ep;
    ep.id = "hand-obj";
    ep.task = TaskKind::ObjectNav;
    ep.scene = open_scene();
    SceneObject o;
    o.category = "mug";
    o.color = "red";
    o.pos = object_pos;
    ep.scene.objects.push_back(o);
    ep.start = Pose{2.625, 2.625, 0};
    ep.instruction = Instruction{"find the mug", TaskKind::ObjectNav};
    ep.target_category = "mug";
    ep.max_steps = 100;
    return ep;
}

Episode vln_episode(Vec2 landmark, Vec2 destination) {
    Episode ep;
    ep.id = "hand-vln";
    ep.task = TaskKind::VLN;
    ep.scene = open_scene();
    ep.start = Pose{2.625, 2.625, 0};
    ep.instruction = Instruction{"walk the route", TaskKind::VLN};
    ep.landmarks = {landmark};
    ep.destination = destination;
    ep.max_steps = 100;
    return ep;
}

PolicyRequest req_of(const EpisodeState& state) { return PolicyRequest{nullptr, &state}; }

bool stop_padded(const ActionBatch& b) {
    bool stopped = false;
    for (Action a : b.actions) {
        if (stopped && a != Action::Stop) return false;
        if (a == Action::Stop) stopped = true;
    }
    return true;
}

} // namespace

TEST_CASE("batches pad with stop and freeze everything after the first stop") {
    const ActionBatch empty = make_batch({});
    for (Action a : empty.actions) CHECK(a == Action::Stop);

    const ActionBatch one = make_batch({Action::Forward});
    CHECK(one.actions == std::array<Action, 4>{Action::Forward, Action::Stop, Action::Stop,
                                               Action::Stop});

    const ActionBatch mid = make_batch(
        {Action::TurnLeft, Action::Stop, Action::Forward, Action::Forward});
    CHECK(mid.actions == std::array<Action, 4>{Action::TurnLeft, Action::Stop, Action::Stop,
                                               Action::Stop});

    const ActionBatch five = make_batch({Action::Forward, Action::TurnLeft, Action::TurnRight,
                                         Action::Forward, Action::Forward});
    CHECK(five.actions == std::array<Action, 4>{Action::Forward, Action::TurnLeft,
                                                Action::TurnRight, Action::Forward});
}

TEST_CASE("the expert walks straight at a goal ahead and stops inside the margin") {
    OraclePolicy oracle;

    // 3 m dead ahead: four forwards, no premature stop.
    const Episode far = object_episode({5.625, 2.625});
    EpisodeState far_state = start_episode(far);
    const ActionBatch b_far = oracle.plan(req_of(far_state));
    for (Action a : b_far.actions) CHECK(a == Action::Forward);

    // 1 m ahead: one forward lands at 0.75 m, inside the stop margin.
    const Episode near = object_episode({3.625, 2.625});
    EpisodeState near_state = start_episode(near);
    const ActionBatch b_near = oracle.plan(req_of(near_state));
    CHECK(b_near.actions == std::array<Action, 4>{Action::Forward, Action::Stop, Action::Stop,
                                                  Action::Stop});

    // Directly behind: the whole batch is spent rotating, never advancing.
    const Episode behind = object_episode({0.625, 2.625});
    EpisodeState behind_state = start_episode(behind);
    const ActionBatch b_behind = oracle.plan(req_of(behind_state));
    for (Action a : b_behind.actions) CHECK(a == Action::TurnLeft);

    // Finished episodes get an all-stop batch.
    far_state.done = true;
    const ActionBatch b_done = oracle.plan(req_of(far_state));
    for (Action a : b_done.actions) CHECK(a == Action::Stop);
}

TEST_CASE("route points are visited in order before the destination counts") {
    OraclePolicy oracle;

    // The unvisited landmark behind the agent outranks the destination ahead.
    const Episode ep = vln_episode({0.625, 2.625}, {7.625, 2.625});
    EpisodeState state = start_episode(ep);
    CHECK(oracle.plan(req_of(state)).actions[0] == Action::TurnLeft);

    // Once the landmark is ticked off, the far destination pulls forward.
    state.landmark_reached[0] = true;
    const ActionBatch ahead = oracle.plan(req_of(state));
    for (Action a : ahead.actions) CHECK(a == Action::Forward);

    // Destination already inside the stop margin: stop on the spot.
    const Episode close = vln_episode({0.625, 2.625}, {4.125, 2.625});
    EpisodeState close_state = start_episode(close);
    close_state.landmark_reached[0] = true;
    CHECK(oracle.plan(req_of(close_state)).actions[0] == Action::Stop);
}

TEST_CASE("command scripts replay verbatim from the current step, then stop") {
    Episode ep = vln_episode({0.625, 2.625}, {7.625, 2.625});
    ep.script = {Action::Forward, Action::TurnLeft, Action::TurnLeft,
                 Action::Forward, Action::Forward, Action::TurnRight};

    OraclePolicy oracle;
    EpisodeState state = start_episode(ep);
    const ActionBatch first = oracle.plan(req_of(state));
    CHECK(first.actions == std::array<Action, 4>{Action::Forward, Action::TurnLeft,
                                                 Action::TurnLeft, Action::Forward});
    for (Action a : first.actions) step(state, a);

    const ActionBatch second = oracle.plan(req_of(state));
    CHECK(second.actions == std::array<Action, 4>{Action::Forward, Action::TurnRight,
                                                  Action::Stop, Action::Stop});
    step(state, second.actions[0]);
    step(state, second.actions[1]);

    const ActionBatch third = oracle.plan(req_of(state));
    for (Action a : third.actions) CHECK(a == Action::Stop);
}

TEST_CASE("exploration noise leaves the expert's stop slots alone") {
    CHECK_THROWS_AS(NoisyExpertPolicy(-0.1, 0), ConfigError);
    CHECK_THROWS_AS(NoisyExpertPolicy(1.5, 0), ConfigError);

    Episode ep = object_episode({5.625, 2.625});
    ep.seed = 31;

    // Zero noise reproduces the expert batch at every visited state.
    {
        OraclePolicy oracle;
        NoisyExpertPolicy calm(0.0, 9);
        EpisodeState state = start_episode(ep);
        for (int i = 0; i < 12 && !state.done; ++i) {
            const ActionBatch want = oracle.plan(req_of(state));
            CHECK(calm.plan(req_of(state)).actions == want.actions);
            step(state, want.actions[0]);
        }
    }

    // Heavy noise perturbs some non-stop slot, agrees across instances, and
    // never corrupts a stop decision.
    {
        OraclePolicy oracle;
        NoisyExpertPolicy a(0.5, 9);
        NoisyExpertPolicy b(0.5, 9);
        NoisyExpertPolicy other(0.5, 77);
        EpisodeState state = start_episode(ep);
        int deviations = 0;
        int seed_splits = 0;
        for (int i = 0; i < 12 && !state.done; ++i) {
            const ActionBatch want = oracle.plan(req_of(state));
            const ActionBatch got = a.plan(req_of(state));
            CHECK(got.actions == b.plan(req_of(state)).actions);
            if (got.actions != other.plan(req_of(state)).actions) ++seed_splits;
            for (size_t k = 0; k < 4; ++k) {
                if (want.actions[k] == Action::Stop) CHECK(got.actions[k] == Action::Stop);
                if (got.actions[k] != want.actions[k]) ++deviations;
            }
            step(state, want.actions[0]);
        }
        CHECK(deviations >= 1);
        CHECK(seed_splits >= 1);
    }

    // The reply path is a pure passthrough to the expert.
    Episode qep = object_episode({5.625, 2.625});
    qep.task = TaskKind::EQA;
    qep.question = "what color is the mug";
    qep.answer = "red";
    EpisodeState qstate = start_episode(qep);
    NoisyExpertPolicy noisy(0.3, 4);
    CHECK(noisy.answer(req_of(qstate)) == "red");
}

TEST_CASE("random batches are keyed by episode seed, step, and policy seed") {
    Episode ep = object_episode({5.625, 2.625});
    ep.seed = 8;
    OraclePolicy driver;
    RandomPolicy r1(5);
    RandomPolicy r2(5);
    RandomPolicy r3(6);
    EpisodeState state = start_episode(ep);
    int splits = 0;
    for (int i = 0; i < 10 && !state.done; ++i) {
        const ActionBatch b1 = r1.plan(req_of(state));
        CHECK(b1.actions == r2.plan(req_of(state)).actions);
        if (b1.actions != r3.plan(req_of(state)).actions) ++splits;
        CHECK(stop_padded(b1));
        step(state, driver.plan(req_of(state)).actions[0]);
    }
    CHECK(splits >= 1);
}

TEST_CASE("recorded batches replay in order and run dry as stop") {
    const fs::path path = write_replay("good.jsonl",
                                       {R"({"actions": ["forward", "turn_left"]})",
                                        "",
                                        R"({"actions": []})",
                                        R"({"answer": "blue"})",
                                        R"({"actions": ["stop"]})"});
    ReplayPolicy replay(path.string());
    const PolicyRequest req{};

    CHECK(replay.plan(req).actions == std::array<Action, 4>{Action::Forward, Action::TurnLeft,
                                                            Action::Stop, Action::Stop});
    for (Action a : replay.plan(req).actions) CHECK(a == Action::Stop);
    for (Action a : replay.plan(req).actions) CHECK(a == Action::Stop);
    for (Action a : replay.plan(req).actions) CHECK(a == Action::Stop); // exhausted
    CHECK(replay.answer(req) == "blue");
}

TEST_CASE("broken replay files name the offending line") {
    CHECK_THROWS_AS(ReplayPolicy((scratch_dir() / "missing.jsonl").string()), IoError);

    const auto expect_line = [](const std::string& name, const std::string& line,
                                const std::string& needle) {
        const fs::path path = write_replay(name, {R"({"actions": ["forward"]})", line});
        try {
            ReplayPolicy replay(path.string());
            FAIL("expected SchemaMismatch for: " << line);
        } catch (const SchemaMismatch& e) {
            const std::string what = e.what();
            CHECK(what.find("replay line 2") != std::string::npos);
            CHECK(what.find(needle) != std::string::npos);
        }
    };

    expect_line("parse.jsonl", "{oops", "");
    expect_line("noarray.jsonl", R"({"foo": 1})", "expected an actions array");
    expect_line("toolong.jsonl",
                R"({"actions": ["stop", "stop", "stop", "stop", "stop"]})",
                "longer than 4");
    expect_line("unknown.jsonl", R"({"actions": ["strafe"]})", "");
    expect_line("notstring.jsonl", R"({"actions": [42]})", "");
}

TEST_CASE("policy specs select and parameterize implementations") {
    Episode ep = object_episode({5.625, 2.625});
    EpisodeState state = start_episode(ep);

    const auto oracle = make_policy("oracle", 1);
    for (Action a : oracle->plan(req_of(state)).actions) CHECK(a == Action::Forward);

    // noise 0 through the spec string matches the plain expert.
    const auto calm = make_policy("noisy-expert:0", 1);
    CHECK(calm->plan(req_of(state)).actions == oracle->plan(req_of(state)).actions);
    CHECK(make_policy("noisy-expert", 1) != nullptr);
    CHECK(make_policy("random", 1) != nullptr);

    const fs::path path = write_replay("spec.jsonl", {R"({"actions": ["turn_right"]})"});
    const auto replay = make_policy("replay:" + path.string(), 1);
    CHECK(replay->plan(req_of(state)).actions[0] == Action::TurnRight);

    CHECK_THROWS_AS(make_policy("learned", 1), ConfigError);
    CHECK_THROWS_AS(make_policy("noisy-expert:abc", 1), ConfigError);
    CHECK_THROWS_AS(make_policy("noisy-expert:1.5", 1), ConfigError);
}
