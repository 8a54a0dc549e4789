#pragma once

#include <cstdint>
#include <vector>

#include "dn/cost.hpp"
#include "dn/tensor.hpp"

namespace dn {

// Column-compressed weights. Delta sparsity selects whole columns, so
// columns are the unit of skipping; rows stay sorted ascending within a
// column to fix the summation order.
struct SparseWeights {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> col_start; // cols + 1 entries
    std::vector<std::uint32_t> row_idx;   // ascending within each column
    std::vector<Scalar> values;           // nonzero

    std::size_t nnz() const { return values.size(); }
    std::size_t col_nnz(std::size_t j) const {
        return col_start[j + 1] - col_start[j];
    }
    double occupancy() const {
        const std::size_t total = rows * cols;
        return total ? static_cast<double>(nnz()) / static_cast<double>(total) : 0.0;
    }
};

// Entries with |w| <= zero_tol are dropped; kept entries round-trip to
// dense exactly.
SparseWeights compress(const Matrix& w, Scalar zero_tol = 0.0);

Matrix to_dense(const SparseWeights& sw);

// acc += W * delta, visiting only nonzero delta components and, within
// each touched column, only stored weights. Charges exactly the touched
// weight count as macs and fetches; per-element results match the dense
// product bit for bit (same multiply/add order per output row).
void delta_accumulate(const SparseWeights& sw, const Vector& delta, Vector& acc,
                      CostCounters& counters);

} // namespace dn
