// navmem: benchmark, profile, and data-collection driver for the memory
// library. Subcommands: bench, profile, collect, dump-episode, replay.
// Exit codes: 0 success, 1 config/input error, 2 runtime error.

#include "navmem/config.hpp"
#include "navmem/dataset.hpp"
#include "navmem/errors.hpp"
#include "navmem/executor.hpp"
#include "navmem/metrics.hpp"
#include "navmem/policy.hpp"
#include "navmem/world.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace navmem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("short write to " + path.string());
}

// Flags shared by every subcommand; applied on top of --config in a fixed
// order so the precedence is file < named flags < --set.
struct CommonFlags {
    std::string config_path;
    std::string task;
    int episodes = 0;
    uint64_t seed = 0;
    std::string policy;
    std::string out;
    std::string latency;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run config");
    cmd->add_option("--task", f.task, "vln | objectnav | eqa | follow");
    cmd->add_option("--episodes", f.episodes, "episode count");
    cmd->add_option("--seed", f.seed, "base seed; episode i uses seed+i");
    cmd->add_option("--policy", f.policy, "oracle | noisy-expert[:eps] | random | replay:<file>");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--latency", f.latency, "e.g. inference=0.2,comm=0.3,action=1.0");
    cmd->add_option("--set", f.sets, "dotted.key=value override, repeatable");
}

RunConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
    RunConfig cfg;
    if (cmd->count("--config")) cfg = run_config_from_json(slurp(f.config_path));
    if (cmd->count("--task")) apply_override(cfg, "task=" + f.task);
    if (cmd->count("--episodes")) apply_override(cfg, "episodes=" + std::to_string(f.episodes));
    if (cmd->count("--seed")) apply_override(cfg, "seed=" + std::to_string(f.seed));
    if (cmd->count("--policy")) cfg.policy = f.policy;
    if (cmd->count("--out")) cfg.out = f.out;
    if (cmd->count("--latency")) cfg.latency = parse_latency(f.latency, cfg.latency);
    for (const std::string& s : f.sets) apply_override(cfg, s);
    cfg.validate();
    return cfg;
}

std::vector<Episode> make_episodes(const RunConfig& cfg) {
    std::vector<Episode> eps;
    eps.reserve(static_cast<size_t>(cfg.episodes));
    for (int i = 0; i < cfg.episodes; ++i) {
        eps.push_back(generate_episode(cfg.task_kind(), cfg.gen, cfg.seed + static_cast<uint64_t>(i)));
    }
    return eps;
}

void cmd_bench(const RunConfig& cfg) {
    if (cfg.episodes == 0) throw EmptyInput("bench: episode count is zero");
    fs::create_directories(cfg.out);

    std::vector<EpisodeOutcome> outcomes;
    for (int i = 0; i < cfg.episodes; ++i) {
        const Episode ep =
            generate_episode(cfg.task_kind(), cfg.gen, cfg.seed + static_cast<uint64_t>(i));
        const auto policy = make_policy(cfg.policy, cfg.seed);
        const RolloutResult r = run_blocking(ep, *policy, cfg.memory, cfg.features);
        outcomes.push_back(outcome_of(r.state, check_success(r.state, r.answer)));
    }

    const MetricsReport report = aggregate(outcomes);
    std::cout << report_table(report);

    std::string csv = episode_csv_header();
    for (const EpisodeOutcome& o : outcomes) csv += episode_csv_row(o);
    spit(fs::path(cfg.out) / "episodes.csv", csv);
    spit(fs::path(cfg.out) / "report.json", report_to_json(report));
}

TokenMatrix profile_frame(const RunConfig& cfg, int t) {
    const int n = cfg.features.n_x;
    const int c = cfg.features.c;
    TokenMatrix f(n, c);
    if (cfg.profile.stream == "constant") {
        uint64_t s = cfg.seed ^ 0xc0817a27ull;
        for (double& v : f.data) v = uniform_pm1(s);
    } else if (cfg.profile.stream == "orthogonal") {
        // One-hot channel per step; consecutive pooled tokens have cosine 0,
        // so the long tier never fuses.
        const int ch = t % c;
        for (int r = 0; r < n; ++r) f.at(r, ch) = 1.0;
    } else { // random
        uint64_t s = cfg.seed;
        s ^= static_cast<uint64_t>(t) * 0x9e3779b97f4a7c15ull;
        splitmix64(s);
        for (double& v : f.data) v = uniform_pm1(s);
    }
    return f;
}

void cmd_profile(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    const ProfileConfig& pc = cfg.profile;

    MemoryState state;
    std::string csv = "t,merged_tokens,naive_tokens,push_micros\n";
    int64_t merged = 0, naive = 0;
    for (int t = 1; t <= pc.horizon; ++t) {
        const TokenMatrix frame = profile_frame(cfg, t);

        std::vector<double> micros;
        micros.reserve(static_cast<size_t>(pc.reps));
        for (int rep = 0; rep < pc.reps; ++rep) {
            MemoryState scratch = state;
            const auto t0 = std::chrono::steady_clock::now();
            push_frame(scratch, frame, cfg.memory);
            const auto t1 = std::chrono::steady_clock::now();
            micros.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        }
        std::sort(micros.begin(), micros.end());
        const double med = micros[micros.size() / 2];

        push_frame(state, frame, cfg.memory);
        merged = token_count(state);
        naive = naive_token_count(t, cfg.features.n_x, cfg.memory);

        char row[128];
        std::snprintf(row, sizeof(row), "%d,%lld,%lld,%.3f\n", t,
                      static_cast<long long>(merged), static_cast<long long>(naive), med);
        csv += row;
    }
    spit(fs::path(cfg.out) / "profile.csv", csv);
    std::printf("t=%d stream=%s merged_tokens=%lld naive_tokens=%lld ratio=%.1f\n", pc.horizon,
                pc.stream.c_str(), static_cast<long long>(merged), static_cast<long long>(naive),
                merged > 0 ? static_cast<double>(naive) / static_cast<double>(merged) : 0.0);
}

void cmd_collect(const RunConfig& cfg, bool dagger, bool successful_only,
                 const std::string& student_spec) {
    if (cfg.episodes == 0) throw EmptyInput("collect: episode count is zero");
    fs::create_directories(cfg.out);
    const std::vector<Episode> episodes = make_episodes(cfg);

    OraclePolicy expert;
    SampleSet set;
    if (dagger) {
        const auto student = make_policy(student_spec, cfg.seed);
        set = dagger_collect(episodes, *student, expert, cfg.memory, cfg.features, cfg.gen);
    } else {
        CollectOptions opts;
        opts.successful_only = successful_only;
        set = collect_gt_samples(episodes, expert, cfg.memory, cfg.features, cfg.gen, opts);
    }
    const fs::path path = fs::path(cfg.out) / "samples.jsonl";
    write_samples(set, path.string());
    std::printf("wrote %zu samples from %d episodes to %s\n", set.samples.size(), cfg.episodes,
                path.string().c_str());
}

void cmd_dump_episode(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    const Episode ep = generate_episode(cfg.task_kind(), cfg.gen, cfg.seed);
    const fs::path path = fs::path(cfg.out) / "episode.json";
    spit(path, episode_to_json(ep) + "\n");
    std::printf("episode %s: %dx%d cells, %zu objects, %zu humans\n  instruction: %s\n",
                ep.id.c_str(), ep.scene.width, ep.scene.height, ep.scene.objects.size(),
                ep.scene.humans.size(), ep.instruction.text.c_str());
}

void cmd_replay(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    const Episode ep = generate_episode(cfg.task_kind(), cfg.gen, cfg.seed);
    const auto policy = make_policy(cfg.policy, cfg.seed);
    const RolloutResult r = run_nonblocking(ep, *policy, cfg.latency, cfg.memory, cfg.features);

    spit(fs::path(cfg.out) / "trace.jsonl", trace_to_jsonl(r.trace));
    std::string actions;
    for (size_t i = 0; i < r.state.executed.size(); ++i) {
        actions += "{\"i\":" + std::to_string(i) + ",\"action\":\"" +
                   to_string(r.state.executed[i]) + "\"}\n";
    }
    spit(fs::path(cfg.out) / "actions.jsonl", actions);

    const SuccessRecord rec = check_success(r.state, r.answer);
    std::printf("replayed %s: %zu events, %d steps, success=%d\n", ep.id.c_str(),
                r.trace.events.size(), rec.total_steps, rec.success ? 1 : 0);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"token-merging navigation memory driver"};
    app.require_subcommand(1);

    CommonFlags bench_f, profile_f, collect_f, dump_f, replay_f;
    int horizon = 0, reps = 0;
    std::string stream;
    bool dagger = false;
    bool successful_only = true;
    std::string student = "noisy-expert";

    CLI::App* bench = app.add_subcommand("bench", "run episodes, report metrics");
    add_common(bench, bench_f);

    CLI::App* profile = app.add_subcommand("profile", "token growth and push timing");
    add_common(profile, profile_f);
    profile->add_option("--horizon", horizon, "stream length T");
    profile->add_option("--stream", stream, "constant | orthogonal | random");
    profile->add_option("--reps", reps, "timing repetitions per step");

    CLI::App* collect = app.add_subcommand("collect", "collect imitation samples");
    add_common(collect, collect_f);
    collect->add_flag("--dagger", dagger, "student drives, expert labels");
    collect->add_flag("--successful-only,!--no-successful-only", successful_only,
                      "keep only successful expert episodes (default on)");
    collect->add_option("--student", student, "DAgger student policy spec");

    CLI::App* dump = app.add_subcommand("dump-episode", "generate one episode as JSON");
    add_common(dump, dump_f);

    CLI::App* replay = app.add_subcommand("replay", "non-blocking rollout with event trace");
    add_common(replay, replay_f);

    try {
        app.parse(argc, argv);
        if (bench->parsed()) {
            cmd_bench(build_config(bench, bench_f));
        } else if (profile->parsed()) {
            RunConfig cfg = build_config(profile, profile_f);
            if (profile->count("--horizon")) {
                apply_override(cfg, "profile.horizon=" + std::to_string(horizon));
            }
            if (profile->count("--stream")) apply_override(cfg, "profile.stream=" + stream);
            if (profile->count("--reps")) apply_override(cfg, "profile.reps=" + std::to_string(reps));
            cmd_profile(cfg);
        } else if (collect->parsed()) {
            cmd_collect(build_config(collect, collect_f), dagger, successful_only, student);
        } else if (dump->parsed()) {
            cmd_dump_episode(build_config(dump, dump_f));
        } else if (replay->parsed()) {
            cmd_replay(build_config(replay, replay_f));
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const SchemaMismatch& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
