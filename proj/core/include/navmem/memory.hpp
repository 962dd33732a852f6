#pragma once

#include "navmem/matrix.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace navmem {

// Pooling scales per tier plus the short-buffer capacity and fuse threshold.
// The scale chain (alpha_short a multiple of alpha_curr, alpha_long a multiple
// of alpha_short) is what lets each tier be pooled from the previous one
// instead of from the raw frame.
struct MergeConfig {
    int alpha_curr = 2;
    int alpha_short = 8;
    int alpha_long = 16;
    int buffer_len = 64;
    double tau = 0.95;

    void validate() const;
};

// One compressed long-memory slot: a running mean over k_merged frames.
struct LongEntry {
    TokenMatrix tokens; // (side/alpha_long)^2 rows
    int64_t k_merged = 0;
};

struct MemoryState {
    TokenMatrix current;               // newest frame at alpha_curr resolution
    std::deque<TokenMatrix> short_mem; // oldest first, each at alpha_short resolution
    std::vector<LongEntry> long_mem;   // append order, each at alpha_long resolution
    int64_t frame_count = 0;

    bool empty() const { return frame_count == 0; }
};

// Work done by a single push, for cost-profile assertions. In steady state
// (frame_count > buffer_len + 1) every field is independent of frame_count.
struct PushStats {
    int pooled_rows = 0; // token rows produced by pooling
    int cos_evals = 0;
    int fusions = 0;
    int inserts = 0; // new long entries
    int pops = 0;    // short entries retired into the long tier
};

// Folds one raw frame (n_x x c, n_x a perfect square) into the memory.
// The previous current drops into the short buffer; on overflow the oldest
// short entry is pooled down and either fused into the last long entry
// (cosine strictly above tau) or appended as a new one.
PushStats push_frame(MemoryState& state, const TokenMatrix& frame, const MergeConfig& config);

// Token rows held across all three tiers.
int64_t token_count(const MemoryState& state);

// Merge-free baseline: every frame kept at current resolution, stacked in
// frame order. naive_token_count is its closed-form row count.
TokenMatrix naive_memory(const std::vector<TokenMatrix>& frames, const MergeConfig& config);
int64_t naive_token_count(int64_t t, int n_x, const MergeConfig& config);

// One contiguous block of the serialized order: long entries, then short
// entries oldest first, then current. Pointers borrow from the state.
struct TokenRun {
    enum class Tier { Long, Short, Current };
    Tier tier;
    const TokenMatrix* tokens;
    int64_t k_merged; // 0 outside the long tier
};

// Throws EmptyMemory before the first push.
std::vector<TokenRun> token_runs(const MemoryState& state);

// All runs stacked into one matrix, same order as token_runs.
TokenMatrix concat_tokens(const MemoryState& state);

// Reference construction that re-derives every tier from the full frame
// history with independent arithmetic (block sums divided once, fresh mean
// per fuse decision). Used to pin the incremental path down in tests.
MemoryState batch_memory(const std::vector<TokenMatrix>& frames, const MergeConfig& config);

// Snapshot round-trip. Doubles survive exactly; from_json throws
// SchemaMismatch on anything but a navmem.memory.v1 document.
std::string memory_to_json(const MemoryState& state, const MergeConfig& config);
MemoryState memory_from_json(const std::string& text, MergeConfig* config_out = nullptr);

} // namespace navmem
