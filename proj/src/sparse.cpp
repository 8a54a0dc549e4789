#include "dn/sparse.hpp"

namespace dn {

SparseWeights compress(const Matrix& w, Scalar zero_tol) {
    check(zero_tol >= 0.0, "compress: zero_tol must be >= 0");
    SparseWeights sw;
    sw.rows = w.rows();
    sw.cols = w.cols();
    sw.col_start.assign(w.cols() + 1, 0);
    for (std::size_t j = 0; j < w.cols(); ++j) {
        for (std::size_t i = 0; i < w.rows(); ++i) {
            const Scalar v = w(i, j);
            if (std::fabs(v) <= zero_tol) continue;
            sw.row_idx.push_back(static_cast<std::uint32_t>(i));
            sw.values.push_back(v);
        }
        sw.col_start[j + 1] = static_cast<std::uint32_t>(sw.values.size());
    }
    return sw;
}

Matrix to_dense(const SparseWeights& sw) {
    Matrix w(sw.rows, sw.cols);
    for (std::size_t j = 0; j < sw.cols; ++j)
        for (std::uint32_t k = sw.col_start[j]; k < sw.col_start[j + 1]; ++k)
            w(sw.row_idx[k], j) = sw.values[k];
    return w;
}

void delta_accumulate(const SparseWeights& sw, const Vector& delta, Vector& acc,
                      CostCounters& counters) {
    check(sw.cols == delta.size(), "delta_accumulate: cols != delta length");
    check(sw.rows == acc.size(), "delta_accumulate: rows != acc length");
    std::uint64_t touched = 0;
    for (std::size_t j = 0; j < sw.cols; ++j) {
        const Scalar d = delta[j];
        if (d == 0.0) continue;
        const std::uint32_t begin = sw.col_start[j];
        const std::uint32_t end = sw.col_start[j + 1];
        for (std::uint32_t k = begin; k < end; ++k)
            acc[sw.row_idx[k]] += sw.values[k] * d;
        touched += end - begin;
    }
    counters.macs += touched;
    counters.weight_fetches += touched;
}

} // namespace dn
