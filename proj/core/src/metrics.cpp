#include "navmem/metrics.hpp"

#include "navmem/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace navmem {

double spl(bool success, double p_m, double l_m) {
    if (l_m <= 0.0) throw DegenerateEpisode("spl: geodesic length must be positive");
    if (p_m < 0.0) throw DegenerateEpisode("spl: path length must be non-negative");
    if (!success) return 0.0;
    return l_m / std::max(p_m, l_m);
}

std::pair<double, int> follow_rates(const std::vector<bool>& following, bool collided_episode) {
    const int total = static_cast<int>(following.size());
    const int good = static_cast<int>(std::count(following.begin(), following.end(), true));
    const double fr = total == 0 ? 0.0 : static_cast<double>(good) / total;
    return {fr, collided_episode ? 1 : 0};
}

std::string normalize_answer(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        if (std::ispunct(c)) continue;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    const size_t a = out.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = out.find_last_not_of(" \t\r\n");
    return out.substr(a, b - a + 1);
}

MetricsReport aggregate(const std::vector<EpisodeOutcome>& outcomes) {
    if (outcomes.empty()) throw EmptyInput("aggregate: no episode outcomes");
    struct Sums {
        int n = 0;
        int success = 0, oracle = 0, collided = 0, correct = 0;
        double spl_sum = 0.0, tl_sum = 0.0, ne_sum = 0.0, fr_sum = 0.0;
    };
    std::map<TaskKind, Sums> sums;
    for (const EpisodeOutcome& o : outcomes) {
        Sums& s = sums[o.task];
        s.n += 1;
        s.success += o.success ? 1 : 0;
        s.oracle += o.oracle_success ? 1 : 0;
        s.collided += o.human_collision ? 1 : 0;
        s.correct += o.answer_correct ? 1 : 0;
        s.tl_sum += o.path_length_m;
        s.ne_sum += o.nav_error_m;
        if (o.task != TaskKind::Follow) s.spl_sum += spl(o.success, o.path_length_m, o.geodesic_m);
        if (o.task == TaskKind::Follow && o.total_steps > 0) {
            s.fr_sum += static_cast<double>(o.follow_steps) / o.total_steps;
        }
    }

    MetricsReport report;
    for (const auto& [task, s] : sums) {
        TaskAggregate a;
        a.episodes = s.n;
        a.sr = 100.0 * s.success / s.n;
        a.tl_mean = s.tl_sum / s.n;
        if (task == TaskKind::Follow) {
            a.fr = 100.0 * s.fr_sum / s.n;
            a.cr = 100.0 * s.collided / s.n;
        } else {
            a.osr = 100.0 * s.oracle / s.n;
            a.spl = 100.0 * s.spl_sum / s.n;
            a.ne_mean = s.ne_sum / s.n;
        }
        if (task == TaskKind::EQA) a.acc = 100.0 * s.correct / s.n;
        report.per_task[task] = a;
        report.total_episodes += s.n;
    }
    return report;
}

namespace {

using nlohmann::json;

void put_if_set(json& j, const char* key, double v) {
    if (v >= 0.0) j[key] = v;
}

} // namespace

std::string report_to_json(const MetricsReport& report) {
    json j;
    j["schema"] = "navmem.report.v1";
    j["total_episodes"] = report.total_episodes;
    json tasks = json::object();
    for (const auto& [task, a] : report.per_task) {
        json t;
        t["episodes"] = a.episodes;
        t["sr"] = a.sr;
        t["tl_mean_m"] = a.tl_mean;
        put_if_set(t, "osr", a.osr);
        put_if_set(t, "spl", a.spl);
        put_if_set(t, "ne_mean_m", a.ne_mean);
        put_if_set(t, "fr", a.fr);
        put_if_set(t, "cr", a.cr);
        put_if_set(t, "acc", a.acc);
        tasks[to_string(task)] = std::move(t);
    }
    j["tasks"] = std::move(tasks);
    return j.dump(2) + "\n";
}

namespace {

std::string fmt_cell(double v) {
    if (v < 0.0) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

} // namespace

std::string report_table(const MetricsReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %5s %7s %7s %7s %8s %8s %7s %7s %7s\n", "task", "eps",
                  "SR%", "OSR%", "SPL%", "TL(m)", "NE(m)", "FR%", "CR%", "ACC%");
    out += line;
    for (const auto& [task, a] : report.per_task) {
        std::snprintf(line, sizeof(line), "%-10s %5d %7s %7s %7s %8.2f %8s %7s %7s %7s\n",
                      to_string(task).c_str(), a.episodes, fmt_cell(a.sr).c_str(),
                      fmt_cell(a.osr).c_str(), fmt_cell(a.spl).c_str(), a.tl_mean,
                      fmt_cell(a.ne_mean).c_str(), fmt_cell(a.fr).c_str(), fmt_cell(a.cr).c_str(),
                      fmt_cell(a.acc).c_str());
        out += line;
    }
    return out;
}

std::string episode_csv_header() {
    return "episode_id,task,seed,success,oracle_success,spl,path_length_m,geodesic_m,"
           "nav_error_m,steps,stopped,follow_steps,total_steps,human_collision,answer_correct\n";
}

std::string episode_csv_row(const EpisodeOutcome& o) {
    const double s = o.task == TaskKind::Follow
                         ? 0.0
                         : spl(o.success, o.path_length_m, o.geodesic_m);
    char buf[384];
    std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%d,%d,%.6f,%.6f,%.6f,%.6f,%d,%d,%d,%d,%d,%d\n",
                  o.episode_id.c_str(), to_string(o.task).c_str(),
                  static_cast<unsigned long long>(o.seed), o.success ? 1 : 0,
                  o.oracle_success ? 1 : 0, s, o.path_length_m, o.geodesic_m, o.nav_error_m,
                  o.steps, o.stopped ? 1 : 0, o.follow_steps, o.total_steps,
                  o.human_collision ? 1 : 0, o.answer_correct ? 1 : 0);
    return buf;
}

} // namespace navmem
