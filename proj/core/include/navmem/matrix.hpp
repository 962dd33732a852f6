#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace navmem {

// Dense row-major matrix of doubles. Rows are tokens, columns are channels.
// All arithmetic in the library accumulates in double precision.
struct TokenMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data; // row-major, rows*cols entries

    TokenMatrix() = default;
    TokenMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
    std::span<double> row(int r) {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    bool same_shape(const TokenMatrix& o) const { return rows == o.rows && cols == o.cols; }
    bool empty() const { return rows == 0 || cols == 0; }
};

// True when both matrices have equal shape and every entry differs by at
// most tol in absolute value.
bool approx_equal(const TokenMatrix& a, const TokenMatrix& b, double tol);

// Largest absolute entrywise difference; requires equal shapes.
double max_abs_diff(const TokenMatrix& a, const TokenMatrix& b);

// True when every entry is finite.
bool all_finite(const TokenMatrix& m);

// Appends the rows of src to dst (shapes must agree on cols; dst may be empty).
void append_rows(TokenMatrix& dst, const TokenMatrix& src);

// FNV-1a over the raw bytes of shape and data, for byte-stability checks.
uint64_t content_hash(const TokenMatrix& m);

} // namespace navmem
