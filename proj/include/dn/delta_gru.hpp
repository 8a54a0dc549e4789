#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dn/cost.hpp"
#include "dn/gru_ref.hpp"
#include "dn/sparse.hpp"
#include "dn/tensor.hpp"

namespace dn {

// Delta execution state. The four memories hold merged pre-activation
// sums; the references hold the last value of each signal component that
// propagated an above-threshold change.
struct DeltaGruState {
    Vector x_ref;  // x-hat
    Vector h_ref;  // h-hat
    Vector h_prev; // h_{t-1}, the blend input
    Vector m_r, m_u, m_xc, m_hc;
};

// Memories start at their biases: M_r = b_r, M_u = b_u, M_xc = b_c,
// M_hc = 0. References and h_prev start at zero.
DeltaGruState delta_init(const GruParams& p);

struct StepStats {
    std::size_t nnz_dx = 0;
    std::size_t nnz_dh = 0;
    double occupancy_x = 0;
    double occupancy_h = 0;
};

struct ThresholdResult {
    Vector delta;
    Vector new_ref;
    std::size_t nnz = 0;
};

// Componentwise: fires iff |current[i] - ref[i]| > theta (strict). Fired
// components propagate the difference and move the reference to the
// current value; suppressed components keep both at rest.
ThresholdResult threshold_delta(const Vector& current, const Vector& ref, Scalar theta);

// Column-major copy of a row-major matrix, so delta-driven column visits
// run over contiguous memory.
struct DenseColumns {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Scalar> elems;

    const Scalar* column(std::size_t j) const { return elems.data() + j * rows; }
};

DenseColumns pack_columns(const Matrix& m);

// The six weight matrices in column-accessible form, either packed dense
// or column-compressed sparse. Immutable and shareable across runs.
class DeltaWeights {
public:
    static DeltaWeights dense(const GruParams& p);
    static DeltaWeights sparse(const GruParams& p, Scalar zero_tol = 0.0);

    bool is_sparse() const { return sparse_; }
    std::size_t input_size() const { return nx_; }
    std::size_t hidden_size() const { return nh_; }
    // Blended o_m over the six matrices; 1.0 for dense.
    double weight_occupancy() const;

    // Column j of {W_xr, W_xu, W_xc} scaled by s into the three memories.
    void accumulate_input(std::size_t j, Scalar s, Vector& m_r, Vector& m_u,
                          Vector& m_xc, CostCounters& counters) const;
    // Column j of {W_hr, W_hu, W_hc} scaled by s into the three memories.
    void accumulate_hidden(std::size_t j, Scalar s, Vector& m_r, Vector& m_u,
                           Vector& m_hc, CostCounters& counters) const;

private:
    std::array<DenseColumns, 6> dense_;  // xr, xu, xc, hr, hu, hc
    std::array<SparseWeights, 6> csc_;
    bool sparse_ = false;
    std::size_t nx_ = 0;
    std::size_t nh_ = 0;
};

// Per-step capture for training; filled only when requested.
struct StepTrace {
    Vector dx, dh;
    std::vector<std::uint8_t> mask_h; // dh[i] fired
    Vector m_hc;                      // after accumulation
    Vector r, u, c;
};

struct StepResult {
    Vector h;
    StepStats stats;
};

// One thresholded delta step. Mutates the state in place; h_t is
// quantized (when q is set) before being stored as the next h_prev.
// Kernel charges cover only touched columns; the wrapper charges the
// occupancy-independent linear terms per replaced product.
StepResult delta_gru_step(const DeltaWeights& w, DeltaGruState& s, const Vector& x_t,
                          Scalar theta, const std::optional<QFormat>& q,
                          CostCounters& counters, StepTrace* trace = nullptr);

struct DeltaRunResult {
    std::vector<Vector> hs;
    std::vector<StepStats> steps;
    double mean_occupancy_x = 0;
    double mean_occupancy_h = 0;
};

// Runs a fresh delta_init state over xs. Inputs are quantized at ingestion
// when q is set. Pass prebuilt weights to amortize packing across runs.
DeltaRunResult delta_gru_sequence(const GruParams& p, const std::vector<Vector>& xs,
                                  Scalar theta, const std::optional<QFormat>& q,
                                  CostCounters& counters,
                                  const DeltaWeights* weights = nullptr);

} // namespace dn
