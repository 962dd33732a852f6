#include "navmem/matrix.hpp"

#include "navmem/errors.hpp"

#include <cmath>
#include <cstring>

namespace navmem {

bool approx_equal(const TokenMatrix& a, const TokenMatrix& b, double tol) {
    if (!a.same_shape(b)) return false;
    for (size_t i = 0; i < a.data.size(); ++i) {
        if (std::abs(a.data[i] - b.data[i]) > tol) return false;
    }
    return true;
}

double max_abs_diff(const TokenMatrix& a, const TokenMatrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    }
    return m;
}

bool all_finite(const TokenMatrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void append_rows(TokenMatrix& dst, const TokenMatrix& src) {
    if (dst.empty()) {
        dst = src;
        return;
    }
    if (dst.cols != src.cols) throw DimensionMismatch("append_rows: column count mismatch");
    dst.data.insert(dst.data.end(), src.data.begin(), src.data.end());
    dst.rows += src.rows;
}

uint64_t content_hash(const TokenMatrix& m) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&m.rows, sizeof(m.rows));
    mix(&m.cols, sizeof(m.cols));
    if (!m.data.empty()) mix(m.data.data(), m.data.size() * sizeof(double));
    return h;
}

} // namespace navmem
