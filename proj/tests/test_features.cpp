#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "navmem/errors.hpp"
#include "navmem/features.hpp"

#include <cmath>
#include <vector>

using namespace navmem;

namespace {

// Independent pooling reference: walk every output block, sum, divide once.
TokenMatrix pool_reference(const TokenMatrix& x, int alpha) {
    const int side = exact_sqrt(x.rows);
    const int out_side = side / alpha;
    TokenMatrix out(out_side * out_side, x.cols);
    for (int oi = 0; oi < out_side; ++oi) {
        for (int oj = 0; oj < out_side; ++oj) {
            for (int ch = 0; ch < x.cols; ++ch) {
                double sum = 0.0;
                for (int bi = 0; bi < alpha; ++bi) {
                    for (int bj = 0; bj < alpha; ++bj) {
                        sum += x.at((oi * alpha + bi) * side + oj * alpha + bj, ch);
                    }
                }
                out.at(oi * out_side + oj, ch) = sum / (alpha * alpha);
            }
        }
    }
    return out;
}

TokenMatrix random_grid(int side, int cols, uint64_t seed) {
    TokenMatrix m(side * side, cols);
    for (double& v : m.data) v = uniform_pm1(seed);
    return m;
}

double grand_mean(const TokenMatrix& m) {
    double s = 0.0;
    for (double v : m.data) s += v;
    return s / static_cast<double>(m.data.size());
}

LocalView sample_view() {
    LocalView v;
    v.radius = 2;
    v.heading_deg = 90;
    v.patch.assign(25, 0);
    v.patch[7] = 1;
    v.tags.push_back(VisTag{VisTag::Kind::Object, 3, 1, -2});
    return v;
}

} // namespace

TEST_CASE("exact_sqrt accepts perfect squares only") {
    CHECK(exact_sqrt(256) == 16);
    CHECK(exact_sqrt(16) == 4);
    CHECK(exact_sqrt(1) == 1);
    CHECK(exact_sqrt(0) == 0);
    CHECK(exact_sqrt(2) == -1);
    CHECK(exact_sqrt(255) == -1);
    CHECK(exact_sqrt(-4) == -1);
}

TEST_CASE("pooling a 2x2 grid to one token averages all four") {
    TokenMatrix x(4, 1);
    x.at(0, 0) = 1.0;
    x.at(1, 0) = 2.0;
    x.at(2, 0) = 3.0;
    x.at(3, 0) = 5.0;
    const TokenMatrix out = grid_pool(x, PoolScale{2});
    CHECK(out.rows == 1);
    CHECK(out.cols == 1);
    CHECK(out.at(0, 0) == doctest::Approx(2.75).epsilon(1e-15));
}

TEST_CASE("pooling a 4x4 grid halves the side with block means") {
    TokenMatrix x(16, 1);
    for (int i = 0; i < 16; ++i) x.at(i, 0) = static_cast<double>(i);
    const TokenMatrix out = grid_pool(x, PoolScale{2});
    REQUIRE(out.rows == 4);
    CHECK(out.at(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(out.at(1, 0) == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(out.at(2, 0) == doctest::Approx(10.5).epsilon(1e-15));
    CHECK(out.at(3, 0) == doctest::Approx(12.5).epsilon(1e-15));
}

TEST_CASE("alpha of one is the identity") {
    const TokenMatrix x = random_grid(4, 3, 11);
    const TokenMatrix out = grid_pool(x, PoolScale{1});
    CHECK(max_abs_diff(x, out) == 0.0);
}

TEST_CASE("pooling matches the reference on random grids") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        const TokenMatrix x = random_grid(8, 4, seed);
        for (int alpha : {1, 2, 4, 8}) {
            const TokenMatrix got = grid_pool(x, PoolScale{alpha});
            const TokenMatrix want = pool_reference(x, alpha);
            CHECK(max_abs_diff(got, want) <= 1e-14);
        }
    }
}

TEST_CASE("pooling twice composes to the product scale") {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        const TokenMatrix x = random_grid(16, 8, seed);
        const TokenMatrix once = grid_pool(x, PoolScale{8});
        const TokenMatrix twice = grid_pool(grid_pool(x, PoolScale{2}), PoolScale{4});
        CHECK(max_abs_diff(once, twice) <= 1e-12);
    }
}

TEST_CASE("pooling preserves the grand mean") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const TokenMatrix x = random_grid(16, 8, seed);
        const TokenMatrix out = grid_pool(x, PoolScale{4});
        CHECK(grand_mean(out) == doctest::Approx(grand_mean(x)).epsilon(1e-12));
    }
}

TEST_CASE("pooling rejects non-square grids and non-dividing scales") {
    CHECK_THROWS_AS(grid_pool(TokenMatrix(3, 2, 0.0), PoolScale{1}), NonSquareTokenGrid);
    CHECK_THROWS_AS(grid_pool(TokenMatrix(16, 2, 0.0), PoolScale{3}), IncompatibleScale);
    CHECK_THROWS_AS(grid_pool(TokenMatrix(16, 2, 0.0), PoolScale{0}), IncompatibleScale);
    CHECK_THROWS_AS(grid_pool(TokenMatrix(16, 2, 0.0), PoolScale{-2}), IncompatibleScale);
}

TEST_CASE("cosine similarity identities") {
    const std::vector<double> ex{1.0, 0.0};
    const std::vector<double> ey{0.0, 1.0};
    const std::vector<double> diag{1.0, 1.0};
    const std::vector<double> neg{-1.0, 0.0};
    const std::vector<double> zero{0.0, 0.0};

    CHECK(cosine_similarity(ex, ex) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(ex, ey) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cosine_similarity(ex, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(cosine_similarity(ex, diag) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cosine_similarity(zero, ex) == 0.0);
    CHECK(cosine_similarity(ex, zero) == 0.0);

    // Scale invariance.
    const std::vector<double> big{5.0, 5.0};
    CHECK(cosine_similarity(diag, big) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> three{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(cosine_similarity(ex, three), DimensionMismatch);
}

TEST_CASE("splitmix64 reproduces the published reference stream") {
    uint64_t s = 0;
    CHECK(splitmix64(s) == 0xE220A8397B1DCDAFull);
    CHECK(splitmix64(s) == 0x6E789E6AA1B965F4ull);
    CHECK(splitmix64(s) == 0x06C45D188009454Full);
}

TEST_CASE("uniform_pm1 stays in the half-open unit interval and is seeded") {
    uint64_t s = 42;
    for (int i = 0; i < 10000; ++i) {
        const double v = uniform_pm1(s);
        CHECK(v >= -1.0);
        CHECK(v < 1.0);
    }
    uint64_t a = 7, b = 7;
    for (int i = 0; i < 100; ++i) CHECK(uniform_pm1(a) == uniform_pm1(b));
}

TEST_CASE("feature config validation") {
    FeatureConfig bad;
    bad.n_x = 200;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.n_x = 256;
    bad.c = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.c = 1;
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("extractor output has the configured shape and stays bounded") {
    FeatureConfig cfg;
    const FrameFeatures f = extract_features(sample_view(), cfg, 5);
    CHECK(f.tokens.rows == cfg.n_x);
    CHECK(f.tokens.cols == cfg.c);
    CHECK(f.frame_index == 5);
    CHECK(all_finite(f.tokens));
    // Smoothing is a convex combination of values in [-1, 1).
    for (double v : f.tokens.data) {
        CHECK(v >= -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("extractor is deterministic in view content and seed") {
    FeatureConfig cfg;
    const LocalView view = sample_view();
    const FrameFeatures a = extract_features(view, cfg, 0);
    const FrameFeatures b = extract_features(view, cfg, 0);
    CHECK(content_hash(a.tokens) == content_hash(b.tokens));

    // The frame index annotates, it does not perturb.
    const FrameFeatures c = extract_features(view, cfg, 99);
    CHECK(content_hash(a.tokens) == content_hash(c.tokens));

    FeatureConfig other = cfg;
    other.feature_seed = 1;
    CHECK(content_hash(extract_features(view, other).tokens) != content_hash(a.tokens));

    LocalView moved = view;
    moved.patch[3] = 1;
    CHECK(content_hash(extract_features(moved, cfg).tokens) != content_hash(a.tokens));

    LocalView turned = view;
    turned.heading_deg = 180;
    CHECK(content_hash(extract_features(turned, cfg).tokens) != content_hash(a.tokens));

    LocalView tagged = view;
    tagged.tags.push_back(VisTag{VisTag::Kind::Human, 1, 0, 2});
    CHECK(content_hash(extract_features(tagged, cfg).tokens) != content_hash(a.tokens));
}
