#pragma once

#include "navmem/matrix.hpp"
#include "navmem/view.hpp"

#include <cstdint>
#include <span>

namespace navmem {

// One frame's visual tokens: N_x tokens of C channels, laid out as a
// row-major sqrt(N_x) x sqrt(N_x) patch grid.
struct FrameFeatures {
    TokenMatrix tokens;
    int64_t frame_index = 0;
};

// Positive pooling factor. Valid against a given grid when it divides the
// grid side exactly.
struct PoolScale {
    int alpha = 1;
};

struct FeatureConfig {
    int n_x = 256;       // token count per frame, must be a perfect square
    int c = 32;          // channels
    uint64_t feature_seed = 0;

    void validate() const; // throws ConfigError
};

// Integer square root if n is a perfect square, otherwise -1.
int exact_sqrt(int n);

// Averages alpha x alpha blocks of the token grid, reducing N rows to
// N/alpha^2 rows. Channel count is preserved. Throws NonSquareTokenGrid when
// the row count is not a perfect square and IncompatibleScale when alpha
// does not divide the grid side.
TokenMatrix grid_pool(const TokenMatrix& x, PoolScale alpha);

// Cosine of two channel vectors. Zero-norm input on either side yields 0.
// Throws DimensionMismatch on unequal lengths.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Deterministic synthetic extractor standing in for a learned encoder:
// hashes the view content and seed into a pseudo-random token grid, then
// smooths spatially so neighboring patch tokens correlate.
FrameFeatures extract_features(const LocalView& view, const FeatureConfig& config,
                               int64_t frame_index = 0);

// splitmix64 step; the library's building block for seeded determinism.
uint64_t splitmix64(uint64_t& state);

// Uniform double in [-1, 1) from a splitmix64 stream.
double uniform_pm1(uint64_t& state);

} // namespace navmem
