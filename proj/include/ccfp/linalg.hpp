#pragma once

// Small dense linear-algebra helpers used throughout the toolkit.
// Problems here have at most a few dozen variables, so everything is
// plain row-major storage with O(n^2)/O(n^3) loops.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccfp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;  // row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: size mismatch " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y = M x
inline Vec matvec(const Mat& m, const Vec& x) {
    if (m.cols != x.size())
        throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

// y = M^T x
inline Vec matvec_transposed(const Mat& m, const Vec& x) {
    if (m.rows != x.size())
        throw std::invalid_argument("matvec_transposed: dimension mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += m(i, j) * x[i];
    return y;
}

inline double inf_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline double two_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline Vec axpy(double a, const Vec& x, const Vec& y) {  // a*x + y
    Vec r(y);
    for (std::size_t i = 0; i < x.size(); ++i) r[i] += a * x[i];
    return r;
}

inline Vec scaled(const Vec& x, double a) {
    Vec r(x);
    for (double& v : r) v *= a;
    return r;
}

}  // namespace ccfp
