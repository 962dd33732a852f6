#include "navmem/memory.hpp"

#include "navmem/errors.hpp"
#include "navmem/features.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>
#include <utility>

namespace navmem {

void MergeConfig::validate() const {
    if (alpha_curr < 1 || !(alpha_curr < alpha_short && alpha_short < alpha_long)) {
        throw ConfigError("memory: scales must strictly increase, got " +
                          std::to_string(alpha_curr) + "/" + std::to_string(alpha_short) + "/" +
                          std::to_string(alpha_long));
    }
    if (alpha_short % alpha_curr != 0 || alpha_long % alpha_short != 0) {
        throw ConfigError("memory: each scale must divide the next, got " +
                          std::to_string(alpha_curr) + "/" + std::to_string(alpha_short) + "/" +
                          std::to_string(alpha_long));
    }
    if (buffer_len < 1) throw ConfigError("memory: buffer_len must be >= 1");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("memory: tau must lie in (0, 1]");
}

namespace {

void check_frame(const MemoryState& state, const TokenMatrix& frame, const MergeConfig& config) {
    config.validate();
    const int side = exact_sqrt(frame.rows);
    if (side < 0) {
        throw ShapeMismatch("push_frame: frame has " + std::to_string(frame.rows) +
                            " tokens, not a square grid");
    }
    if (side % config.alpha_long != 0) {
        throw ShapeMismatch("push_frame: grid side " + std::to_string(side) +
                            " not divisible by alpha_long " + std::to_string(config.alpha_long));
    }
    if (!state.empty()) {
        const int expect_rows = state.current.rows * config.alpha_curr * config.alpha_curr;
        if (frame.rows != expect_rows || frame.cols != state.current.cols) {
            throw ShapeMismatch("push_frame: frame " + std::to_string(frame.rows) + "x" +
                                std::to_string(frame.cols) + " does not match stream " +
                                std::to_string(expect_rows) + "x" +
                                std::to_string(state.current.cols));
        }
    }
}

} // namespace

PushStats push_frame(MemoryState& state, const TokenMatrix& frame, const MergeConfig& config) {
    check_frame(state, frame, config);
    PushStats stats;

    TokenMatrix incoming = grid_pool(frame, PoolScale{config.alpha_curr});
    stats.pooled_rows += incoming.rows;

    if (!state.empty()) {
        TokenMatrix retired =
            grid_pool(state.current, PoolScale{config.alpha_short / config.alpha_curr});
        stats.pooled_rows += retired.rows;
        state.short_mem.push_back(std::move(retired));

        if (static_cast<int>(state.short_mem.size()) > config.buffer_len) {
            TokenMatrix cand = grid_pool(state.short_mem.front(),
                                         PoolScale{config.alpha_long / config.alpha_short});
            stats.pooled_rows += cand.rows;
            state.short_mem.pop_front();
            stats.pops = 1;

            bool fused = false;
            if (!state.long_mem.empty()) {
                LongEntry& last = state.long_mem.back();
                stats.cos_evals = 1;
                // Single-row tiers compare whole entries; multi-row tiers
                // compare flattened, which keeps the rule well defined for
                // any scale chain.
                if (cosine_similarity(cand.data, last.tokens.data) > config.tau) {
                    const double k = static_cast<double>(last.k_merged);
                    for (size_t i = 0; i < cand.data.size(); ++i) {
                        last.tokens.data[i] = (k * last.tokens.data[i] + cand.data[i]) / (k + 1.0);
                    }
                    last.k_merged += 1;
                    stats.fusions = 1;
                    fused = true;
                }
            }
            if (!fused) {
                state.long_mem.push_back(LongEntry{std::move(cand), 1});
                stats.inserts = 1;
            }
        }
    }

    state.current = std::move(incoming);
    state.frame_count += 1;
    return stats;
}

int64_t token_count(const MemoryState& state) {
    int64_t n = state.current.rows;
    for (const TokenMatrix& m : state.short_mem) n += m.rows;
    for (const LongEntry& e : state.long_mem) n += e.tokens.rows;
    return n;
}

TokenMatrix naive_memory(const std::vector<TokenMatrix>& frames, const MergeConfig& config) {
    config.validate();
    if (frames.empty()) throw EmptyInput("naive_memory: no frames");
    TokenMatrix out(0, frames.front().cols);
    for (const TokenMatrix& f : frames) {
        append_rows(out, grid_pool(f, PoolScale{config.alpha_curr}));
    }
    return out;
}

int64_t naive_token_count(int64_t t, int n_x, const MergeConfig& config) {
    config.validate();
    const int side = exact_sqrt(n_x);
    if (side < 0 || side % config.alpha_curr != 0) {
        throw IncompatibleScale("naive_token_count: n_x " + std::to_string(n_x) +
                                " incompatible with alpha_curr");
    }
    const int per_frame = (side / config.alpha_curr) * (side / config.alpha_curr);
    return t * static_cast<int64_t>(per_frame);
}

std::vector<TokenRun> token_runs(const MemoryState& state) {
    if (state.empty()) throw EmptyMemory("token_runs: no frames pushed");
    std::vector<TokenRun> runs;
    runs.reserve(state.long_mem.size() + state.short_mem.size() + 1);
    for (const LongEntry& e : state.long_mem) {
        runs.push_back(TokenRun{TokenRun::Tier::Long, &e.tokens, e.k_merged});
    }
    for (const TokenMatrix& m : state.short_mem) {
        runs.push_back(TokenRun{TokenRun::Tier::Short, &m, 0});
    }
    runs.push_back(TokenRun{TokenRun::Tier::Current, &state.current, 0});
    return runs;
}

TokenMatrix concat_tokens(const MemoryState& state) {
    std::vector<TokenRun> runs = token_runs(state);
    TokenMatrix out(0, state.current.cols);
    for (const TokenRun& r : runs) append_rows(out, *r.tokens);
    return out;
}

namespace {

using nlohmann::json;

json matrix_to_json(const TokenMatrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

TokenMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
        throw SchemaMismatch("memory json: malformed matrix object");
    }
    TokenMatrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    if (static_cast<int64_t>(data.size()) != int64_t{m.rows} * m.cols) {
        throw SchemaMismatch("memory json: matrix data length does not match shape");
    }
    m.data = std::move(data);
    return m;
}

} // namespace

std::string memory_to_json(const MemoryState& state, const MergeConfig& config) {
    json j;
    j["schema"] = "navmem.memory.v1";
    j["config"] = {{"alpha_curr", config.alpha_curr}, {"alpha_short", config.alpha_short},
                   {"alpha_long", config.alpha_long}, {"buffer_len", config.buffer_len},
                   {"tau", config.tau}};
    j["frame_count"] = state.frame_count;
    j["current"] = matrix_to_json(state.current);
    json shorts = json::array();
    for (const TokenMatrix& m : state.short_mem) shorts.push_back(matrix_to_json(m));
    j["short"] = std::move(shorts);
    json longs = json::array();
    for (const LongEntry& e : state.long_mem) {
        longs.push_back(json{{"k_merged", e.k_merged}, {"tokens", matrix_to_json(e.tokens)}});
    }
    j["long"] = std::move(longs);
    return j.dump();
}

MemoryState memory_from_json(const std::string& text, MergeConfig* config_out) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("memory json: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != "navmem.memory.v1") {
        throw SchemaMismatch("memory json: expected schema navmem.memory.v1");
    }
    try {
        if (config_out) {
            const json& c = j.at("config");
            config_out->alpha_curr = c.at("alpha_curr").get<int>();
            config_out->alpha_short = c.at("alpha_short").get<int>();
            config_out->alpha_long = c.at("alpha_long").get<int>();
            config_out->buffer_len = c.at("buffer_len").get<int>();
            config_out->tau = c.at("tau").get<double>();
        }
        MemoryState state;
        state.frame_count = j.at("frame_count").get<int64_t>();
        state.current = matrix_from_json(j.at("current"));
        for (const json& s : j.at("short")) state.short_mem.push_back(matrix_from_json(s));
        for (const json& l : j.at("long")) {
            state.long_mem.push_back(
                LongEntry{matrix_from_json(l.at("tokens")), l.at("k_merged").get<int64_t>()});
        }
        return state;
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("memory json: ") + e.what());
    }
}

} // namespace navmem
