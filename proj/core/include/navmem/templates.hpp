#pragma once

#include "navmem/prompt.hpp"
#include "navmem/task.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace navmem {

// Instruction pattern with [Slot] placeholders, e.g.
// "Search for a/an [Object]." (the "a/an" stays literal).
struct InstructionTemplate {
    TaskKind task_kind;
    std::string pattern;
};

// Slot vocabularies.
const std::vector<std::string>& object_categories(); // couch, bed, chair, toilet, plant, TV
const std::vector<std::string>& object_colors();
const std::vector<std::string>& human_descriptors(); // 8 clothing descriptions

InstructionTemplate vln_template();
InstructionTemplate objectnav_template();
InstructionTemplate eqa_template();
InstructionTemplate follow_template();
InstructionTemplate low_level_template();

// Rewrites a rendered instruction; identity by default. Hook point for
// external paraphrase augmentation.
using ParaphraseFn = std::function<std::string(const std::string& text, uint64_t seed)>;

// Fills every [Slot] in the pattern from `slots`, then applies the
// paraphrase hook. Throws MissingSlot when the pattern names an absent slot.
Instruction render_instruction(const InstructionTemplate& tmpl,
                               const std::map<std::string, std::string>& slots, uint64_t seed,
                               const ParaphraseFn& paraphrase = {});

} // namespace navmem
