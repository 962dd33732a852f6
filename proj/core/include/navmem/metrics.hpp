#pragma once

#include "navmem/task.hpp"

#include <map>
#include <string>
#include <vector>

namespace navmem {

struct EpisodeOutcome {
    std::string episode_id;
    TaskKind task = TaskKind::VLN;
    uint64_t seed = 0;
    bool success = false;
    bool oracle_success = false;
    double path_length_m = 0.0; // p (TL)
    double geodesic_m = 0.0;    // l
    double nav_error_m = 0.0;   // NE
    int steps = 0;
    bool stopped = false;
    int follow_steps = 0; // Follow only
    int total_steps = 0;
    bool human_collision = false; // Follow only
    bool answer_correct = false;  // EQA only
};

// Per-task means as percentages (rates) or meters (TL, NE). Fields that do
// not apply to a task (OSR/SPL/NE for Follow, FR/CR outside Follow, ACC
// outside EQA) are left at -1 and rendered as "-".
struct TaskAggregate {
    int episodes = 0;
    double sr = 0.0;
    double osr = -1.0;
    double spl = -1.0;
    double tl_mean = 0.0;
    double ne_mean = -1.0;
    double fr = -1.0;
    double cr = -1.0;
    double acc = -1.0;
};

struct MetricsReport {
    std::map<TaskKind, TaskAggregate> per_task;
    int total_episodes = 0;
};

// S * l / max(p, l). Throws DegenerateEpisode when l <= 0.
double spl(bool success, double p_m, double l_m);

// FR = following steps / total steps (0 when no steps recorded);
// CR contribution = 1 if the episode had a human collision, else 0.
std::pair<double, int> follow_rates(const std::vector<bool>& following, bool collided_episode);

// Lowercase, trim outer whitespace, drop punctuation; the equality used for
// answer checking.
std::string normalize_answer(const std::string& text);

// Means over episodes, grouped by task. Throws EmptyInput on no outcomes.
MetricsReport aggregate(const std::vector<EpisodeOutcome>& outcomes);

std::string report_to_json(const MetricsReport& report);
std::string report_table(const MetricsReport& report);

// episodes.csv layout: one row per episode, fixed column order.
std::string episode_csv_header();
std::string episode_csv_row(const EpisodeOutcome& o);

} // namespace navmem
