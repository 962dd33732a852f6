#include "navmem/errors.hpp"
#include "navmem/features.hpp"
#include "navmem/memory.hpp"

#include <string>
#include <vector>

namespace navmem {

namespace {

// Block mean straight from a raw frame: sum every cell of the alpha x alpha
// block, divide once. Deliberately not grid_pool so the incremental path is
// checked against separately ordered arithmetic.
TokenMatrix block_mean(const TokenMatrix& x, int alpha) {
    const int side = exact_sqrt(x.rows);
    if (side < 0 || alpha < 1 || side % alpha != 0) {
        throw IncompatibleScale("batch_memory: alpha " + std::to_string(alpha) +
                                " incompatible with frame");
    }
    const int out_side = side / alpha;
    TokenMatrix out(out_side * out_side, x.cols);
    for (int r = 0; r < out.rows; ++r) {
        const int oi = r / out_side;
        const int oj = r % out_side;
        for (int ch = 0; ch < x.cols; ++ch) {
            double sum = 0.0;
            for (int bi = 0; bi < alpha; ++bi) {
                for (int bj = 0; bj < alpha; ++bj) {
                    sum += x.at((oi * alpha + bi) * side + (oj * alpha + bj), ch);
                }
            }
            out.at(r, ch) = sum / (static_cast<double>(alpha) * alpha);
        }
    }
    return out;
}

} // namespace

MemoryState batch_memory(const std::vector<TokenMatrix>& frames, const MergeConfig& config) {
    config.validate();
    if (frames.empty()) throw EmptyInput("batch_memory: no frames");
    for (const TokenMatrix& f : frames) {
        if (!f.same_shape(frames.front())) {
            throw ShapeMismatch("batch_memory: frames disagree on shape");
        }
    }

    const int64_t t = static_cast<int64_t>(frames.size());
    MemoryState state;
    state.frame_count = t;
    state.current = block_mean(frames.back(), config.alpha_curr);

    // Short buffer holds the most recent min(t-1, B) predecessors of the
    // current frame, oldest first.
    const int64_t n_short = std::min<int64_t>(t - 1, config.buffer_len);
    for (int64_t i = t - 1 - n_short; i < t - 1; ++i) {
        state.short_mem.push_back(block_mean(frames[static_cast<size_t>(i)], config.alpha_short));
    }

    // Everything older fell out of the buffer in frame order. Group by the
    // fuse rule, accumulating raw sums so each mean is a single division.
    struct Group {
        std::vector<double> sum;
        int64_t count = 0;
    };
    std::vector<Group> groups;
    for (int64_t i = 0; i < t - 1 - n_short; ++i) {
        TokenMatrix cand = block_mean(frames[static_cast<size_t>(i)], config.alpha_long);
        bool fused = false;
        if (!groups.empty()) {
            Group& last = groups.back();
            std::vector<double> mean(last.sum.size());
            for (size_t k = 0; k < mean.size(); ++k) {
                mean[k] = last.sum[k] / static_cast<double>(last.count);
            }
            if (cosine_similarity(cand.data, mean) > config.tau) {
                for (size_t k = 0; k < mean.size(); ++k) last.sum[k] += cand.data[k];
                last.count += 1;
                fused = true;
            }
        }
        if (!fused) groups.push_back(Group{std::move(cand.data), 1});
    }

    const int long_rows = (exact_sqrt(frames.front().rows) / config.alpha_long) *
                          (exact_sqrt(frames.front().rows) / config.alpha_long);
    for (const Group& g : groups) {
        LongEntry e;
        e.tokens = TokenMatrix(long_rows, frames.front().cols);
        for (size_t k = 0; k < g.sum.size(); ++k) {
            e.tokens.data[k] = g.sum[k] / static_cast<double>(g.count);
        }
        e.k_merged = g.count;
        state.long_mem.push_back(std::move(e));
    }
    return state;
}

} // namespace navmem
