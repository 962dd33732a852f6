#pragma once

#include "navmem/memory.hpp"
#include "navmem/task.hpp"

#include <string>
#include <vector>

namespace navmem {

enum class TokenKind { ObsBegin, Visual, FrameSep, NavTag, Instr };

struct PromptToken {
    TokenKind kind;
    std::vector<double> value; // Visual only
    std::string symbol;        // Instr only
};

// Model-input sequence: one ObsBegin, visual runs separated by FrameSep,
// then NavTag (navigation requests only) and whitespace-split instruction
// symbols.
struct TokenSequence {
    std::vector<PromptToken> items;
};

struct Instruction {
    std::string text;
    TaskKind task_kind = TaskKind::VLN;
};

// Lays out the memory as long entries, short entries, then current, treating
// each fused long entry as one frame run. Throws EmptyMemory before the first
// push and EmptyInput on a blank instruction.
TokenSequence assemble(const MemoryState& state, const Instruction& instr, bool nav_mode);

int64_t visual_token_count(const TokenSequence& seq);

// One tagged token per line, structural fields only; frozen by golden tests.
std::string format_sequence(const TokenSequence& seq);

} // namespace navmem
