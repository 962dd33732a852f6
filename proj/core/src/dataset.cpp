#include "navmem/dataset.hpp"

#include "config_json.hpp"
#include "navmem/errors.hpp"
#include "navmem/executor.hpp"

#include <fstream>

namespace navmem {

using cfgjson::json;

namespace {

constexpr const char* kSchema = "navmem.samples.v1";

json actions_json(const std::vector<Action>& acts) {
    json arr = json::array();
    for (Action a : acts) arr.push_back(to_string(a));
    return arr;
}

std::vector<Action> actions_from(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw SchemaMismatch(where + ": expected an action array");
    std::vector<Action> acts;
    for (const json& a : arr) acts.push_back(action_from_string(a.get<std::string>()));
    return acts;
}

json sample_json(const NavSample& s) {
    json j{{"episode_id", s.episode_id},
           {"task", to_string(s.task)},
           {"instruction", s.instruction},
           {"seed", s.seed},
           {"prefix", actions_json(s.action_prefix)}};
    if (s.is_answer) {
        j["answer"] = s.answer;
    } else {
        j["label"] = actions_json(std::vector<Action>(s.label.actions.begin(), s.label.actions.end()));
    }
    return j;
}

NavSample sample_from(const json& j, const std::string& where) {
    NavSample s;
    try {
        s.episode_id = j.at("episode_id").get<std::string>();
        s.task = task_kind_from_string(j.at("task").get<std::string>());
        s.instruction = j.at("instruction").get<std::string>();
        s.seed = j.at("seed").get<uint64_t>();
        s.action_prefix = actions_from(j.at("prefix"), where);
        const bool has_label = j.contains("label");
        const bool has_answer = j.contains("answer");
        if (has_label == has_answer) {
            throw SchemaMismatch(where + ": need exactly one of label/answer");
        }
        if (has_answer) {
            s.is_answer = true;
            s.answer = j.at("answer").get<std::string>();
        } else {
            const std::vector<Action> acts = actions_from(j.at("label"), where);
            if (acts.size() != 4) throw SchemaMismatch(where + ": label must hold 4 actions");
            s.label = make_batch(acts);
        }
    } catch (const json::exception& e) {
        throw SchemaMismatch(where + ": " + e.what());
    } catch (const ConfigError& e) {
        // Unknown task or action names are schema violations of the file,
        // not configuration mistakes of the caller.
        throw SchemaMismatch(where + ": " + e.what());
    }
    return s;
}

// Shared rollout: `driver` picks the executed action, `labeler` provides the
// recorded batch. For plain GT collection they are the same policy.
void collect_episode(const Episode& ep, Policy& driver, Policy& labeler, const MergeConfig& mem_cfg,
                     const FeatureConfig& feat_cfg, bool filter_success,
                     std::vector<NavSample>& out) {
    ObservationPipeline pipe(mem_cfg, feat_cfg);
    EpisodeState state = start_episode(std::make_shared<const Episode>(ep));
    std::vector<NavSample> collected;
    std::vector<Action> prefix;

    while (!state.done) {
        const TokenSequence tokens = pipe.observe(state);
        PolicyRequest req{&tokens, &state};
        const ActionBatch label = labeler.plan(req);
        const Action chosen =
            &driver == &labeler ? label.actions[0] : driver.plan(req).actions[0];

        NavSample s;
        s.episode_id = ep.id;
        s.task = ep.task;
        s.instruction = ep.instruction.text;
        s.seed = ep.seed;
        s.action_prefix = prefix;
        s.label = label;
        collected.push_back(std::move(s));

        step(state, chosen);
        prefix.push_back(chosen);
    }

    std::string reply;
    if (ep.task == TaskKind::EQA) {
        const TokenSequence tokens = pipe.answer_prompt(state);
        PolicyRequest req{&tokens, &state};
        reply = labeler.answer(req);
        NavSample s;
        s.episode_id = ep.id;
        s.task = ep.task;
        s.instruction = ep.instruction.text;
        s.seed = ep.seed;
        s.action_prefix = prefix;
        s.is_answer = true;
        s.answer = reply;
        collected.push_back(std::move(s));
    }

    if (filter_success && !check_success(state, reply).success) return;
    out.insert(out.end(), collected.begin(), collected.end());
}

} // namespace

bool operator==(const NavSample& a, const NavSample& b) {
    return a.episode_id == b.episode_id && a.task == b.task && a.instruction == b.instruction &&
           a.seed == b.seed && a.action_prefix == b.action_prefix && a.is_answer == b.is_answer &&
           a.label.actions == b.label.actions && a.answer == b.answer;
}

void write_samples(const SampleSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write samples to " + path);
    json header{{"schema", kSchema},
                {"gen", cfgjson::to_json(set.gen)},
                {"memory", cfgjson::to_json(set.memory)},
                {"features", cfgjson::to_json(set.features)}};
    out << header.dump() << "\n";
    for (const NavSample& s : set.samples) out << sample_json(s).dump() << "\n";
    if (!out) throw IoError("short write to " + path);
}

SampleSet read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open samples file " + path);
    SampleSet set;
    std::string line;
    size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaMismatch(where + ": " + e.what());
        }
        if (!have_header) {
            if (!j.is_object() || j.value("schema", "") != kSchema) {
                throw SchemaMismatch(where + ": expected a " + std::string(kSchema) + " header");
            }
            try {
                cfgjson::from_json(j.at("gen"), set.gen, "gen");
                cfgjson::from_json(j.at("memory"), set.memory, "memory");
                cfgjson::from_json(j.at("features"), set.features, "features");
            } catch (const json::exception& e) {
                throw SchemaMismatch(where + ": " + e.what());
            }
            have_header = true;
            continue;
        }
        set.samples.push_back(sample_from(j, where));
    }
    if (!have_header) throw SchemaMismatch(path + ": missing header line");
    return set;
}

SampleSet collect_gt_samples(const std::vector<Episode>& episodes, Policy& expert,
                             const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg,
                             const GenConfig& gen, const CollectOptions& opts) {
    SampleSet set{gen, mem_cfg, feat_cfg, {}};
    for (const Episode& ep : episodes) {
        collect_episode(ep, expert, expert, mem_cfg, feat_cfg, opts.successful_only, set.samples);
    }
    return set;
}

SampleSet dagger_collect(const std::vector<Episode>& episodes, Policy& student, Policy& expert,
                         const MergeConfig& mem_cfg, const FeatureConfig& feat_cfg,
                         const GenConfig& gen) {
    SampleSet set{gen, mem_cfg, feat_cfg, {}};
    for (const Episode& ep : episodes) {
        collect_episode(ep, student, expert, mem_cfg, feat_cfg, /*filter_success=*/false,
                        set.samples);
    }
    return set;
}

std::vector<TokenMatrix> regenerate_frames(const NavSample& sample, const SampleSet& set) {
    const Episode ep = generate_episode(sample.task, set.gen, sample.seed);
    EpisodeState state = start_episode(std::make_shared<const Episode>(ep));
    std::vector<TokenMatrix> frames;
    auto capture = [&] {
        frames.push_back(
            extract_features(render_local_view(state), set.features,
                             static_cast<int64_t>(frames.size()))
                .tokens);
    };
    capture();
    for (Action a : sample.action_prefix) {
        step(state, a);
        capture();
    }
    return frames;
}

} // namespace navmem
