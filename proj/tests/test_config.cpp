#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "navmem/config.hpp"
#include "navmem/errors.hpp"

#include <string>

using namespace navmem;

namespace {

std::string thrown_message(const std::string& text) {
    try {
        run_config_from_json(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string override_message(RunConfig& config, const std::string& assignment) {
    try {
        apply_override(config, assignment);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("an empty document yields the default run configuration") {
    const RunConfig c = run_config_from_json("{}");
    CHECK(c.task == "vln");
    CHECK(c.episodes == 100);
    CHECK(c.seed == 1);
    CHECK(c.policy == "oracle");
    CHECK(c.out == "out");
    CHECK(c.memory.alpha_curr == 2);
    CHECK(c.memory.alpha_short == 8);
    CHECK(c.memory.alpha_long == 16);
    CHECK(c.memory.buffer_len == 64);
    CHECK(c.memory.tau == 0.95);
    CHECK(c.features.n_x == 256);
    CHECK(c.features.c == 32);
    CHECK(c.profile.horizon == 500);
    CHECK(c.profile.stream == "constant");
    CHECK(c.profile.reps == 11);
    CHECK_NOTHROW(c.validate());
    CHECK(c.task_kind() == TaskKind::VLN);
}

TEST_CASE("unknown keys and wrong types are named by their dotted path") {
    CHECK(thrown_message(R"({"bogus": 1})") == "unknown config key: bogus");
    CHECK(thrown_message(R"({"memory": {"bogus": 1}})") ==
          "unknown config key: memory.bogus");
    CHECK(thrown_message(R"({"gen": {"tau": 0.5}})") == "unknown config key: gen.tau");

    const std::string type_err = thrown_message(R"({"memory": {"tau": "high"}})");
    CHECK(type_err.rfind("memory.tau: ", 0) == 0);

    CHECK(thrown_message(R"({"memory": 3})") == "memory must be an object");
    CHECK(thrown_message("[]") == "config must be an object");
    CHECK(thrown_message("{").rfind("config is not valid JSON", 0) == 0);
}

TEST_CASE("json round-trip preserves every field") {
    RunConfig c;
    c.task = "follow";
    c.episodes = 7;
    c.seed = 42;
    c.policy = "noisy-expert:0.1";
    c.out = "runs/a";
    c.memory.tau = 0.9;
    c.memory.buffer_len = 32;
    c.features.feature_seed = 5;
    c.latency.comm_s = 0.05;
    c.gen.min_side = 15;
    c.gen.low_level_ratio = 0.25;
    c.profile.horizon = 64;
    c.profile.stream = "random";
    c.profile.reps = 3;

    const std::string text = run_config_to_json(c);
    CHECK(text.back() == '\n');
    CHECK(text.rfind("{\n", 0) == 0);

    const RunConfig back = run_config_from_json(text);
    CHECK(back.task == c.task);
    CHECK(back.episodes == c.episodes);
    CHECK(back.seed == c.seed);
    CHECK(back.policy == c.policy);
    CHECK(back.out == c.out);
    CHECK(back.memory.tau == c.memory.tau);
    CHECK(back.memory.buffer_len == c.memory.buffer_len);
    CHECK(back.features.feature_seed == c.features.feature_seed);
    CHECK(back.latency.comm_s == c.latency.comm_s);
    CHECK(back.gen.min_side == c.gen.min_side);
    CHECK(back.gen.low_level_ratio == c.gen.low_level_ratio);
    CHECK(back.profile.horizon == c.profile.horizon);
    CHECK(back.profile.stream == c.profile.stream);
    CHECK(back.profile.reps == c.profile.reps);
}

TEST_CASE("overrides patch one dotted key and keep the rest") {
    RunConfig c;
    c.episodes = 9;

    apply_override(c, "memory.tau=0.5");
    CHECK(c.memory.tau == 0.5);
    CHECK(c.episodes == 9);       // untouched sibling
    CHECK(c.memory.alpha_curr == 2); // untouched nested sibling

    apply_override(c, "episodes=7");
    CHECK(c.episodes == 7);
    CHECK(c.memory.tau == 0.5);

    apply_override(c, "task=eqa");
    CHECK(c.task == "eqa");
    CHECK(c.task_kind() == TaskKind::EQA);

    apply_override(c, "gen.low_level_ratio=-0.5");
    CHECK(c.gen.low_level_ratio == -0.5); // overrides patch, validate() judges
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("override values are sniffed as bool, integer, double, then string") {
    RunConfig c;

    // "true" becomes a JSON bool: string fields reject it, numeric fields
    // take the usual bool-to-number reading.
    const std::string bool_err = override_message(c, "policy=true");
    CHECK(bool_err.rfind("policy: ", 0) == 0);
    CHECK(bool_err.find("boolean") != std::string::npos);
    apply_override(c, "episodes=true");
    CHECK(c.episodes == 1);
    // Unquoted text survives as a string only where a string belongs.
    apply_override(c, "policy=random");
    CHECK(c.policy == "random");
    CHECK(override_message(c, "episodes=abc").rfind("episodes: ", 0) == 0);
    // Integers keep full unsigned range; negatives take the signed path.
    apply_override(c, "seed=18446744073709551615");
    CHECK(c.seed == 18446744073709551615ull);
    apply_override(c, "memory.tau=1");
    CHECK(c.memory.tau == 1.0);
}

TEST_CASE("bad override shapes are rejected") {
    RunConfig c;
    CHECK_THROWS_AS(apply_override(c, "noequals"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "=5"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "a..b=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "a.=1"), ConfigError);
    CHECK(override_message(c, "bogus=1") == "unknown config key: bogus");
    CHECK(override_message(c, "memory.bogus=1") == "unknown config key: memory.bogus");
    CHECK(override_message(c, "memory=5") == "memory must be an object");

    // Failed overrides leave the configuration untouched.
    CHECK(c.episodes == 100);
    CHECK(c.memory.alpha_curr == 2);
}

TEST_CASE("latency shorthand patches the base model") {
    const LatencyModel full = parse_latency("inference=0.2,comm=0.3,action=1.5");
    CHECK(full.inference_s == 0.2);
    CHECK(full.comm_s == 0.3);
    CHECK(full.action_s == 1.5);

    LatencyModel base;
    base.inference_s = 0.25;
    base.comm_s = 0.1;
    base.action_s = 0.5;
    const LatencyModel patched = parse_latency("comm=0.9", base);
    CHECK(patched.inference_s == 0.25);
    CHECK(patched.comm_s == 0.9);
    CHECK(patched.action_s == 0.5);

    CHECK_THROWS_AS(parse_latency(""), ConfigError);
    CHECK_THROWS_AS(parse_latency("comm"), ConfigError);
    CHECK_THROWS_AS(parse_latency("=1"), ConfigError);
    CHECK_THROWS_AS(parse_latency("comm="), ConfigError);
    CHECK_THROWS_AS(parse_latency("warmup=1"), ConfigError);
    CHECK_THROWS_AS(parse_latency("comm=fast"), ConfigError);
    CHECK_THROWS_AS(parse_latency("action=-1"), ConfigError);
}

TEST_CASE("profile and run validation reject out-of-range settings") {
    ProfileConfig p;
    CHECK_NOTHROW(p.validate());
    p.horizon = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.horizon = 1;
    p.reps = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.reps = 1;
    p.stream = "linear";
    CHECK_THROWS_AS(p.validate(), ConfigError);

    RunConfig c;
    c.task = "demo";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.task = "vln";
    c.episodes = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.episodes = 1;
    c.out.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
