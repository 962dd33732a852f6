#include "navmem/templates.hpp"

#include "navmem/errors.hpp"

namespace navmem {

const std::vector<std::string>& object_categories() {
    static const std::vector<std::string> v = {"couch", "bed", "chair", "toilet", "plant", "TV"};
    return v;
}

const std::vector<std::string>& object_colors() {
    static const std::vector<std::string> v = {"red", "blue", "green", "yellow", "white", "black"};
    return v;
}

const std::vector<std::string>& human_descriptors() {
    static const std::vector<std::string> v = {
        "man wearing a blue shirt and black pants",
        "woman in a red jacket",
        "man in a green hoodie",
        "woman wearing a yellow dress",
        "man in a white t-shirt and jeans",
        "woman in a black coat",
        "man wearing a gray sweater",
        "woman in an orange vest",
    };
    return v;
}

InstructionTemplate vln_template() {
    return {TaskKind::VLN, "Walk past the [First], then continue to the [Second], and stop near the [Third]."};
}

InstructionTemplate objectnav_template() {
    return {TaskKind::ObjectNav, "Search for a/an [Object]."};
}

InstructionTemplate eqa_template() {
    return {TaskKind::EQA, "What color is the [Object]?"};
}

InstructionTemplate follow_template() {
    return {TaskKind::Follow, "Follow the [Descriptor]."};
}

InstructionTemplate low_level_template() {
    return {TaskKind::VLN, "move forward [N] steps, then turn [Dir] [M] steps."};
}

Instruction render_instruction(const InstructionTemplate& tmpl,
                               const std::map<std::string, std::string>& slots, uint64_t seed,
                               const ParaphraseFn& paraphrase) {
    std::string text;
    const std::string& p = tmpl.pattern;
    size_t i = 0;
    while (i < p.size()) {
        if (p[i] != '[') {
            text += p[i++];
            continue;
        }
        const size_t close = p.find(']', i);
        if (close == std::string::npos) {
            text += p.substr(i);
            break;
        }
        const std::string name = p.substr(i + 1, close - i - 1);
        auto it = slots.find(name);
        if (it == slots.end()) {
            throw MissingSlot("render_instruction: no value for slot [" + name + "]");
        }
        text += it->second;
        i = close + 1;
    }
    if (paraphrase) text = paraphrase(text, seed);
    if (text.empty()) throw EmptyInput("render_instruction: rendered empty instruction");
    return Instruction{text, tmpl.task_kind};
}

} // namespace navmem
