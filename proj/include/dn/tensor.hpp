#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "dn/check.hpp"
#include "dn/cost.hpp"

namespace dn {

using Scalar = double;

class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t n, Scalar fill = 0.0) : e_(n, fill) {}
    Vector(std::initializer_list<Scalar> init) : e_(init) {}

    std::size_t size() const { return e_.size(); }
    Scalar& operator[](std::size_t i) { return e_[i]; }
    Scalar operator[](std::size_t i) const { return e_[i]; }
    Scalar* data() { return e_.data(); }
    const Scalar* data() const { return e_.data(); }
    std::span<Scalar> span() { return e_; }
    std::span<const Scalar> span() const { return e_; }
    auto begin() { return e_.begin(); }
    auto end() { return e_.end(); }
    auto begin() const { return e_.begin(); }
    auto end() const { return e_.end(); }
    bool operator==(const Vector&) const = default;

    bool all_finite() const {
        for (Scalar x : e_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::vector<Scalar> e_;
};

// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, Scalar fill = 0.0)
        : rows_(rows), cols_(cols), e_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Scalar& operator()(std::size_t r, std::size_t c) { return e_[r * cols_ + c]; }
    Scalar operator()(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }
    Scalar* data() { return e_.data(); }
    const Scalar* data() const { return e_.data(); }
    std::span<Scalar> row(std::size_t r) { return {e_.data() + r * cols_, cols_}; }
    std::span<const Scalar> row(std::size_t r) const { return {e_.data() + r * cols_, cols_}; }
    bool operator==(const Matrix&) const = default;

    bool all_finite() const {
        for (Scalar x : e_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Scalar> e_;
};

// Signed fixed-point descriptor Qm.f: m integer bits (>= 1), f fractional
// bits (>= 0), m + f <= 31. The quantization grid is k * 2^-f for integer
// k in [-2^(m+f-1), +2^(m+f-1)], both ends included.
struct QFormat {
    int int_bits;
    int frac_bits;

    QFormat(int m, int f) : int_bits(m), frac_bits(f) {
        check(m >= 1, "QFormat: integer bits must be >= 1");
        check(f >= 0, "QFormat: fractional bits must be >= 0");
        check(m + f <= 31, "QFormat: m + f must be <= 31");
    }

    double scale() const { return std::ldexp(1.0, frac_bits); }
    double inv_scale() const { return std::ldexp(1.0, -frac_bits); }
    // Clip bound on the scaled value 2^f * theta.
    double bound() const { return std::ldexp(1.0, int_bits + frac_bits - 1); }
    // Largest representable activation magnitude.
    double max_value() const { return std::ldexp(1.0, int_bits - 1); }

    bool operator==(const QFormat&) const = default;
};

// round(2^f * theta) * 2^-f with the scaled value clipped to
// [-2^(m+f-1), +2^(m+f-1)]; round-half-away-from-zero.
Scalar quantize(Scalar theta, const QFormat& q);

Vector quantize_vector(const Vector& v, const QFormat& q);

// In-place variant used by the engines.
void quantize_in_place(Vector& v, const QFormat& q);

// Exact dense product W*x; charges rows*cols macs and weight fetches,
// cols state reads and rows state writes.
Vector matvec_dense(const Matrix& w, const Vector& x, CostCounters& counters);

} // namespace dn
