#include "navmem/prompt.hpp"

#include "navmem/errors.hpp"

#include <sstream>

namespace navmem {

std::string to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::VLN: return "vln";
    case TaskKind::ObjectNav: return "objectnav";
    case TaskKind::EQA: return "eqa";
    case TaskKind::Follow: return "follow";
    }
    throw Error("unknown task kind");
}

TaskKind task_kind_from_string(const std::string& name) {
    if (name == "vln") return TaskKind::VLN;
    if (name == "objectnav") return TaskKind::ObjectNav;
    if (name == "eqa") return TaskKind::EQA;
    if (name == "follow") return TaskKind::Follow;
    throw ConfigError("unknown task kind '" + name + "'");
}

TokenSequence assemble(const MemoryState& state, const Instruction& instr, bool nav_mode) {
    if (instr.text.empty()) throw EmptyInput("assemble: instruction text is empty");
    std::vector<TokenRun> runs = token_runs(state); // throws EmptyMemory at t=0

    TokenSequence seq;
    seq.items.push_back(PromptToken{TokenKind::ObsBegin, {}, {}});
    for (size_t r = 0; r < runs.size(); ++r) {
        if (r > 0) seq.items.push_back(PromptToken{TokenKind::FrameSep, {}, {}});
        const TokenMatrix& m = *runs[r].tokens;
        for (int row = 0; row < m.rows; ++row) {
            std::span<const double> v = m.row(row);
            seq.items.push_back(
                PromptToken{TokenKind::Visual, std::vector<double>(v.begin(), v.end()), {}});
        }
    }
    if (nav_mode) seq.items.push_back(PromptToken{TokenKind::NavTag, {}, {}});

    std::istringstream words(instr.text);
    std::string word;
    while (words >> word) seq.items.push_back(PromptToken{TokenKind::Instr, {}, std::move(word)});
    return seq;
}

int64_t visual_token_count(const TokenSequence& seq) {
    int64_t n = 0;
    for (const PromptToken& t : seq.items) {
        if (t.kind == TokenKind::Visual) ++n;
    }
    return n;
}

std::string format_sequence(const TokenSequence& seq) {
    std::ostringstream out;
    for (const PromptToken& t : seq.items) {
        switch (t.kind) {
        case TokenKind::ObsBegin: out << "ObsBegin\n"; break;
        case TokenKind::Visual: out << "Visual dim=" << t.value.size() << "\n"; break;
        case TokenKind::FrameSep: out << "FrameSep\n"; break;
        case TokenKind::NavTag: out << "NavTag\n"; break;
        case TokenKind::Instr: out << "Instr \"" << t.symbol << "\"\n"; break;
        }
    }
    return out.str();
}

} // namespace navmem
