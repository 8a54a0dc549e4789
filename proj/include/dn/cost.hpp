#pragma once

#include <cstdint>
#include <string>

namespace dn {

// Exact tallies of what a run charged. Kernel-level code charges macs and
// weight_fetches only (one fetch per multiply-accumulate, so the two stay
// equal for matrix work); the step wrappers charge state traffic and the
// elementwise gate math, mirroring the per-product accounting of the cost
// model: each replaced matrix-vector product of size rows x cols charges
//   dense:  rows*cols macs+fetches, cols state reads, rows state writes
//   delta:  (touched weights) macs+fetches, 2*cols reads (signal + ref),
//           rows reads + rows writes (stored memory), cols + rows
//           elementwise ops (delta calc + accumulate)
struct CostCounters {
    std::uint64_t macs = 0;
    std::uint64_t weight_fetches = 0;
    std::uint64_t state_reads = 0;
    std::uint64_t state_writes = 0;
    std::uint64_t elementwise_ops = 0;

    void merge(const CostCounters& other) {
        macs += other.macs;
        weight_fetches += other.weight_fetches;
        state_reads += other.state_reads;
        state_writes += other.state_writes;
        elementwise_ops += other.elementwise_ops;
    }
};

// Closed-form costs for one n x n product at delta occupancy o_c and
// weight occupancy o_m:
//   comp_dense = n^2              comp_sparse = o_m*o_c*n^2 + 2n
//   mem_dense  = n^2 + n          mem_sparse  = o_m*o_c*n^2 + 4n
struct CostReport {
    double comp_dense = 0;
    double comp_sparse = 0;
    double mem_dense = 0;
    double mem_sparse = 0;
    double speedup_comp = 0;
    double speedup_mem = 0;

    static const char* csv_header();
    std::string csv_row() const;
};

CostReport theoretical_costs(std::size_t n, double o_c, double o_m);

struct SpeedupPair {
    double comp = 0;
    double mem = 0;
};

// (dense.macs / delta.macs, dense.weight_fetches / delta.weight_fetches)
SpeedupPair measured_speedup(const CostCounters& delta, const CostCounters& dense);

} // namespace dn
