#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "navmem/errors.hpp"
#include "navmem/features.hpp"
#include "navmem/memory.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

using namespace navmem;

namespace {

TokenMatrix random_frame(int n_x, int c, uint64_t seed) {
    TokenMatrix m(n_x, c);
    for (double& v : m.data) v = uniform_pm1(seed);
    return m;
}

std::vector<TokenMatrix> random_stream(int t, int n_x, int c, uint64_t seed) {
    std::vector<TokenMatrix> frames;
    frames.reserve(static_cast<size_t>(t));
    uint64_t s = seed;
    for (int i = 0; i < t; ++i) {
        TokenMatrix m(n_x, c);
        for (double& v : m.data) v = uniform_pm1(s);
        frames.push_back(std::move(m));
    }
    return frames;
}

// Every frame lights a single channel, cycling; consecutive retired entries
// are orthogonal, so the fuse gate never opens.
std::vector<TokenMatrix> orthogonal_stream(int t, int n_x, int c) {
    std::vector<TokenMatrix> frames;
    for (int i = 0; i < t; ++i) {
        TokenMatrix m(n_x, c);
        for (int r = 0; r < n_x; ++r) m.at(r, i % c) = 1.0;
        frames.push_back(std::move(m));
    }
    return frames;
}

// One fixed frame plus a vanishing perturbation; every retired entry fuses.
std::vector<TokenMatrix> near_constant_stream(int t, int n_x, int c, uint64_t seed) {
    std::vector<TokenMatrix> frames;
    uint64_t s = seed;
    const TokenMatrix base = random_frame(n_x, c, seed ^ 0x5eedull);
    for (int i = 0; i < t; ++i) {
        TokenMatrix m = base;
        for (double& v : m.data) v += 1e-6 * uniform_pm1(s);
        frames.push_back(std::move(m));
    }
    return frames;
}

int64_t sum_k(const MemoryState& state) {
    int64_t k = 0;
    for (const LongEntry& e : state.long_mem) k += e.k_merged;
    return k;
}

} // namespace

TEST_CASE("merge config validation enforces the scale chain") {
    CHECK_NOTHROW(MergeConfig{}.validate());
    CHECK_NOTHROW(MergeConfig{1, 2, 4, 1, 1.0}.validate());
    CHECK_THROWS_AS((MergeConfig{0, 8, 16, 64, 0.95}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{8, 8, 16, 64, 0.95}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{2, 16, 8, 64, 0.95}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{2, 7, 14, 64, 0.95}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{2, 8, 12, 64, 0.95}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{2, 8, 16, 0, 0.95}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{2, 8, 16, 64, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((MergeConfig{2, 8, 16, 64, 1.0 + 1e-9}.validate()), ConfigError);
}

TEST_CASE("push rejects malformed frames") {
    const MergeConfig cfg;
    MemoryState st;
    CHECK_THROWS_AS(push_frame(st, TokenMatrix(3, 2, 0.0), cfg), ShapeMismatch);
    // Square, but the side does not carry the coarsest scale.
    CHECK_THROWS_AS(push_frame(st, TokenMatrix(16, 2, 0.0), cfg), ShapeMismatch);

    push_frame(st, random_frame(256, 4, 1), cfg);
    CHECK_THROWS_AS(push_frame(st, random_frame(1024, 4, 2), cfg), ShapeMismatch);
    CHECK_THROWS_AS(push_frame(st, random_frame(256, 8, 3), cfg), ShapeMismatch);
}

TEST_CASE("token counts follow the closed form while the buffer fills") {
    const MergeConfig cfg; // 2/8/16, buffer 64
    MemoryState st;
    CHECK(st.empty());
    const auto frames = random_stream(66, 256, 8, 42);
    for (int t = 1; t <= 66; ++t) {
        push_frame(st, frames[static_cast<size_t>(t - 1)], cfg);
        CHECK(st.frame_count == t);
        CHECK(st.current.rows == 64);
        const int expect_short = std::min(t - 1, cfg.buffer_len);
        CHECK(static_cast<int>(st.short_mem.size()) == expect_short);
        if (t <= 65) {
            CHECK(token_count(st) == 64 + 4 * (t - 1));
            CHECK(st.long_mem.empty());
        }
    }
    // First retirement past the buffer always opens the long tier.
    CHECK(token_count(st) == 321);
    REQUIRE(st.long_mem.size() == 1);
    CHECK(st.long_mem[0].k_merged == 1);
    CHECK(st.long_mem[0].tokens.rows == 1);
    for (const TokenMatrix& m : st.short_mem) CHECK(m.rows == 4);
}

TEST_CASE("frozen anchors: 64 at t=1, 320 at t=65, 321 at t=66") {
    const MergeConfig cfg;
    MemoryState st;
    const auto frames = random_stream(66, 256, 32, 7);
    for (int t = 1; t <= 66; ++t) {
        push_frame(st, frames[static_cast<size_t>(t - 1)], cfg);
        if (t == 1) CHECK(token_count(st) == 64);
        if (t == 65) CHECK(token_count(st) == 320);
        if (t == 66) CHECK(token_count(st) == 321);
    }
}

TEST_CASE("retired frames are conserved into the long tier") {
    const MergeConfig cfg;
    MemoryState st;
    for (const TokenMatrix& f : random_stream(150, 256, 16, 99)) push_frame(st, f, cfg);
    CHECK(st.frame_count == 150);
    CHECK(static_cast<int>(st.short_mem.size()) == cfg.buffer_len);
    CHECK(sum_k(st) == 150 - cfg.buffer_len - 1);
    CHECK(token_count(st) == 64 + 256 + static_cast<int64_t>(st.long_mem.size()));
}

TEST_CASE("orthogonal retirements never fuse") {
    const MergeConfig cfg{1, 2, 4, 4, 0.95};
    MemoryState st;
    for (const TokenMatrix& f : orthogonal_stream(20, 16, 8)) push_frame(st, f, cfg);
    REQUIRE(st.long_mem.size() == 15);
    for (const LongEntry& e : st.long_mem) CHECK(e.k_merged == 1);
    // current 16 + four shorts of 4 + fifteen singles of 1
    CHECK(token_count(st) == 47);
}

TEST_CASE("a constant stream collapses the long tier to one running mean") {
    const MergeConfig cfg{2, 8, 16, 16, 0.95};
    const TokenMatrix frame = random_frame(256, 8, 5);
    MemoryState st;
    for (int t = 0; t < 100; ++t) push_frame(st, frame, cfg);
    REQUIRE(st.long_mem.size() == 1);
    CHECK(st.long_mem[0].k_merged == 100 - 16 - 1);
    // The running mean of identical candidates is that candidate.
    const TokenMatrix cand = grid_pool(frame, PoolScale{16});
    CHECK(max_abs_diff(st.long_mem[0].tokens, cand) <= 1e-12);
}

TEST_CASE("the fuse gate is strict: similarity equal to tau does not fuse") {
    // Identical candidates clamp to cosine exactly 1; tau = 1 must reject.
    const MergeConfig cfg{2, 8, 16, 4, 1.0};
    const TokenMatrix frame = random_frame(256, 4, 3);
    MemoryState st;
    for (int t = 0; t < 10; ++t) push_frame(st, frame, cfg);
    CHECK(st.long_mem.size() == 5);
    for (const LongEntry& e : st.long_mem) CHECK(e.k_merged == 1);
}

TEST_CASE("fused entries hold the exact arithmetic mean of their candidates") {
    const MergeConfig cfg{2, 8, 16, 16, 0.95};
    const int t = 100;
    const auto frames = near_constant_stream(t, 256, 8, 21);
    MemoryState st;
    for (const TokenMatrix& f : frames) push_frame(st, f, cfg);

    const int64_t pops = t - cfg.buffer_len - 1;
    REQUIRE(st.long_mem.size() == 1);
    REQUIRE(st.long_mem[0].k_merged == pops);

    // Independent mean over the retired candidates, summed then divided once.
    TokenMatrix mean(st.long_mem[0].tokens.rows, st.long_mem[0].tokens.cols);
    for (int64_t i = 0; i < pops; ++i) {
        const TokenMatrix cand = grid_pool(frames[static_cast<size_t>(i)], PoolScale{16});
        for (size_t j = 0; j < mean.data.size(); ++j) mean.data[j] += cand.data[j];
    }
    for (double& v : mean.data) v /= static_cast<double>(pops);
    CHECK(max_abs_diff(st.long_mem[0].tokens, mean) <= 1e-9);
}

TEST_CASE("per-push work is flat once the buffer is saturated") {
    const MergeConfig cfg;
    MemoryState st;
    const auto frames = random_stream(200, 256, 8, 17);
    for (int t = 1; t <= 200; ++t) {
        const PushStats s = push_frame(st, frames[static_cast<size_t>(t - 1)], cfg);
        if (t == 1) {
            CHECK(s.pooled_rows == 64);
            CHECK(s.cos_evals == 0);
            CHECK(s.pops == 0);
        } else if (t <= cfg.buffer_len + 1) {
            CHECK(s.pooled_rows == 68);
            CHECK(s.cos_evals == 0);
            CHECK(s.pops == 0);
        } else {
            // Steady state: identical work at t=66 and t=200.
            CHECK(s.pooled_rows == 69);
            CHECK(s.pops == 1);
            CHECK(s.cos_evals == (t == cfg.buffer_len + 2 ? 0 : 1));
            CHECK(s.fusions + s.inserts == 1);
        }
    }
}

TEST_CASE("incremental pushes equal the batch reconstruction") {
    const MergeConfig deflt;
    const MergeConfig small{1, 2, 4, 4, 0.95};
    struct Case {
        std::vector<TokenMatrix> frames;
        MergeConfig cfg;
    };
    std::vector<Case> cases;
    cases.push_back({random_stream(150, 256, 32, 1), deflt});
    cases.push_back({random_stream(90, 256, 64, 2), deflt});
    cases.push_back({orthogonal_stream(40, 16, 8), small});
    cases.push_back({near_constant_stream(120, 256, 8, 3), deflt});

    for (const Case& c : cases) {
        MemoryState online;
        for (const TokenMatrix& f : c.frames) push_frame(online, f, c.cfg);
        const MemoryState batch = batch_memory(c.frames, c.cfg);

        CHECK(online.frame_count == batch.frame_count);
        REQUIRE(online.short_mem.size() == batch.short_mem.size());
        REQUIRE(online.long_mem.size() == batch.long_mem.size());
        for (size_t i = 0; i < online.long_mem.size(); ++i) {
            CHECK(online.long_mem[i].k_merged == batch.long_mem[i].k_merged);
        }
        CHECK(max_abs_diff(concat_tokens(online), concat_tokens(batch)) <= 1e-12);
    }
}

TEST_CASE("serialized runs walk long, then short in age order, then current") {
    const MergeConfig cfg{1, 2, 4, 2, 1.0}; // tau 1: every pop inserts
    MemoryState st;
    for (const TokenMatrix& f : orthogonal_stream(6, 16, 4)) push_frame(st, f, cfg);
    // 6 pushes, buffer 2: three pops, three long entries.
    const auto runs = token_runs(st);
    REQUIRE(runs.size() == 3 + 2 + 1);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(runs[i].tier == TokenRun::Tier::Long);
        CHECK(runs[i].k_merged == 1);
        CHECK(runs[i].tokens == &st.long_mem[i].tokens);
    }
    CHECK(runs[3].tier == TokenRun::Tier::Short);
    CHECK(runs[3].tokens == &st.short_mem[0]);
    CHECK(runs[3].k_merged == 0);
    CHECK(runs[4].tokens == &st.short_mem[1]);
    CHECK(runs[5].tier == TokenRun::Tier::Current);
    CHECK(runs[5].tokens == &st.current);

    const TokenMatrix all = concat_tokens(st);
    CHECK(static_cast<int64_t>(all.rows) == token_count(st));

    MemoryState fresh;
    CHECK_THROWS_AS(token_runs(fresh), EmptyMemory);
    CHECK_THROWS_AS(concat_tokens(fresh), EmptyMemory);
}

TEST_CASE("the merge-free baseline grows linearly") {
    const MergeConfig cfg;
    CHECK(naive_token_count(1, 256, cfg) == 64);
    CHECK(naive_token_count(500, 256, cfg) == 32000);
    CHECK(naive_token_count(0, 256, cfg) == 0);
    CHECK_THROWS_AS(naive_token_count(10, 15, cfg), IncompatibleScale);

    const auto frames = random_stream(5, 256, 4, 9);
    const TokenMatrix naive = naive_memory(frames, cfg);
    CHECK(naive.rows == 5 * 64);
    CHECK(naive.cols == 4);
    CHECK_THROWS_AS(naive_memory({}, cfg), EmptyInput);
}

TEST_CASE("memory snapshots round-trip exactly through json") {
    const MergeConfig cfg{2, 8, 16, 8, 0.9};
    MemoryState st;
    for (const TokenMatrix& f : random_stream(30, 256, 8, 13)) push_frame(st, f, cfg);

    MergeConfig cfg_back;
    const MemoryState back = memory_from_json(memory_to_json(st, cfg), &cfg_back);
    CHECK(cfg_back.alpha_curr == cfg.alpha_curr);
    CHECK(cfg_back.alpha_short == cfg.alpha_short);
    CHECK(cfg_back.alpha_long == cfg.alpha_long);
    CHECK(cfg_back.buffer_len == cfg.buffer_len);
    CHECK(cfg_back.tau == cfg.tau);
    CHECK(back.frame_count == st.frame_count);
    REQUIRE(back.short_mem.size() == st.short_mem.size());
    REQUIRE(back.long_mem.size() == st.long_mem.size());
    for (size_t i = 0; i < st.long_mem.size(); ++i) {
        CHECK(back.long_mem[i].k_merged == st.long_mem[i].k_merged);
    }
    CHECK(max_abs_diff(concat_tokens(back), concat_tokens(st)) == 0.0);
}

TEST_CASE("memory json rejects foreign documents") {
    CHECK_THROWS_AS(memory_from_json("not json"), SchemaMismatch);
    CHECK_THROWS_AS(memory_from_json("{}"), SchemaMismatch);
    CHECK_THROWS_AS(memory_from_json(R"({"schema":"navmem.memory.v2"})"), SchemaMismatch);
    CHECK_THROWS_AS(
        memory_from_json(
            R"({"schema":"navmem.memory.v1","frame_count":1,"current":{"rows":2,"cols":2,"data":[1.0]},"short":[],"long":[]})"),
        SchemaMismatch);
}
