#include "navmem/features.hpp"

#include "navmem/errors.hpp"

#include <cmath>
#include <string>

namespace navmem {

void FeatureConfig::validate() const {
    if (exact_sqrt(n_x) < 0) {
        throw ConfigError("features.n_x must be a perfect square, got " + std::to_string(n_x));
    }
    if (c < 1) throw ConfigError("features.c must be >= 1");
}

int exact_sqrt(int n) {
    if (n < 0) return -1;
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    for (int k = std::max(0, s - 1); k <= s + 1; ++k) {
        if (k * k == n) return k;
    }
    return -1;
}

TokenMatrix grid_pool(const TokenMatrix& x, PoolScale alpha) {
    const int side = exact_sqrt(x.rows);
    if (side < 0) {
        throw NonSquareTokenGrid("grid_pool: token count " + std::to_string(x.rows) +
                                 " is not a perfect square");
    }
    if (alpha.alpha < 1 || side % alpha.alpha != 0) {
        throw IncompatibleScale("grid_pool: alpha " + std::to_string(alpha.alpha) +
                                " does not divide grid side " + std::to_string(side));
    }
    const int a = alpha.alpha;
    const int out_side = side / a;
    TokenMatrix out(out_side * out_side, x.cols);
    const double inv = 1.0 / (static_cast<double>(a) * a);
    for (int oi = 0; oi < out_side; ++oi) {
        for (int oj = 0; oj < out_side; ++oj) {
            double* dst = &out.at(oi * out_side + oj, 0);
            for (int bi = 0; bi < a; ++bi) {
                const int r = oi * a + bi;
                for (int bj = 0; bj < a; ++bj) {
                    const double* src = x.row(r * side + oj * a + bj).data();
                    for (int ch = 0; ch < x.cols; ++ch) dst[ch] += src[ch];
                }
            }
            for (int ch = 0; ch < x.cols; ++ch) dst[ch] *= inv;
        }
    }
    return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cosine_similarity: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + " channels");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0; // zero vector carries no similarity evidence
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform_pm1(uint64_t& state) {
    const uint64_t bits = splitmix64(state) >> 11; // 53 random bits
    return static_cast<double>(bits) * (2.0 / 9007199254740992.0) - 1.0;
}

namespace {

uint64_t fnv1a(uint64_t h, const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t view_hash(const LocalView& view, uint64_t seed) {
    uint64_t h = 1469598103934665603ull;
    h = fnv1a(h, &seed, sizeof(seed));
    int32_t v[2] = {view.radius, view.heading_deg};
    h = fnv1a(h, v, sizeof(v));
    if (!view.patch.empty()) h = fnv1a(h, view.patch.data(), view.patch.size());
    for (const VisTag& t : view.tags) {
        int32_t rec[4] = {static_cast<int32_t>(t.kind), t.id, t.dx, t.dy};
        h = fnv1a(h, rec, sizeof(rec));
    }
    return h;
}

} // namespace

FrameFeatures extract_features(const LocalView& view, const FeatureConfig& config,
                               int64_t frame_index) {
    config.validate();
    const int side = exact_sqrt(config.n_x);
    const int c = config.c;

    uint64_t rng = view_hash(view, config.feature_seed);
    TokenMatrix raw(config.n_x, c);
    for (double& v : raw.data) v = uniform_pm1(rng);

    // 3x3 binomial smoothing with edge clamp; neighboring patches correlate.
    static const double k[3] = {0.25, 0.5, 0.25};
    TokenMatrix tmp(config.n_x, c);
    auto clamp = [side](int i) { return i < 0 ? 0 : (i >= side ? side - 1 : i); };
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            double* dst = &tmp.at(i * side + j, 0);
            for (int d = -1; d <= 1; ++d) {
                const double* src = &raw.at(i * side + clamp(j + d), 0);
                const double w = k[d + 1];
                for (int ch = 0; ch < c; ++ch) dst[ch] += w * src[ch];
            }
        }
    }
    TokenMatrix out(config.n_x, c);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            double* dst = &out.at(i * side + j, 0);
            for (int d = -1; d <= 1; ++d) {
                const double* src = &tmp.at(clamp(i + d) * side + j, 0);
                const double w = k[d + 1];
                for (int ch = 0; ch < c; ++ch) dst[ch] += w * src[ch];
            }
        }
    }
    return FrameFeatures{std::move(out), frame_index};
}

} // namespace navmem
