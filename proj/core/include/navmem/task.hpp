#pragma once

#include <string>

namespace navmem {

enum class TaskKind { VLN, ObjectNav, EQA, Follow };

// Lowercase wire names: vln, objectnav, eqa, follow.
std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

} // namespace navmem
