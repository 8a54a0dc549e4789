#pragma once

#include <optional>
#include <vector>

#include "dn/cost.hpp"
#include "dn/tensor.hpp"

namespace dn {

// One GRU layer:
//   r_t = sigmoid(W_xr x_t + W_hr h_{t-1} + b_r)
//   u_t = sigmoid(W_xu x_t + W_hu h_{t-1} + b_u)
//   c_t = tanh(W_xc x_t + r_t .* (W_hc h_{t-1}) + b_c)
//   h_t = (1 - u_t) .* h_{t-1} + u_t .* c_t
struct GruParams {
    Matrix w_xr, w_xu, w_xc; // n_h x n_x
    Matrix w_hr, w_hu, w_hc; // n_h x n_h
    Vector b_r, b_u, b_c;    // n_h

    std::size_t input_size() const { return w_xr.cols(); }
    std::size_t hidden_size() const { return w_xr.rows(); }

    // Throws ContractViolation on inconsistent shapes or non-finite entries.
    void validate() const;
};

inline Scalar sigmoid(Scalar x) { return 1.0 / (1.0 + std::exp(-x)); }

// Dense reference step. The six products are charged through matvec_dense;
// the wrapper adds the elementwise gate math (14*n_h ops) and the h_prev
// read / h_t write.
Vector gru_step(const GruParams& p, const Vector& x_t, const Vector& h_prev,
                CostCounters& counters);

// Iterated steps from h0. When q is set, h_t is quantized after each step
// before feeding forward, and the quantized values are what is returned.
std::vector<Vector> gru_sequence(const GruParams& p, const std::vector<Vector>& xs,
                                 const Vector& h0, const std::optional<QFormat>& q,
                                 CostCounters& counters);

} // namespace dn
