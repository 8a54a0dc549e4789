#include "dn/kernels.hpp"

#include <cmath>

// Reference implementations. The arithmetic here is the contract: SIMD
// backends must reproduce these results bit for bit.

namespace dn::kernels {
namespace {

void axpy_scalar(double* acc, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += a * x[i];
}

std::size_t threshold_delta_scalar(const double* cur, double* ref, double* delta,
                                   double theta, std::size_t n) {
    std::size_t fired = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = cur[i] - ref[i];
        if (std::fabs(d) > theta) {
            delta[i] = d;
            ref[i] = cur[i];
            ++fired;
        } else {
            delta[i] = 0.0;
        }
    }
    return fired;
}

void quantize_scalar(const double* in, double* out, double scale,
                     double inv_scale, double bound, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = in[i] * scale;
        s = (s < -bound) ? -bound : s;
        s = (s > bound) ? bound : s;
        out[i] = std::round(s) * inv_scale;
    }
}

void gate_blend_scalar(double* h, const double* u, const double* h_prev,
                       const double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        h[i] = (1.0 - u[i]) * h_prev[i] + u[i] * c[i];
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", axpy_scalar, threshold_delta_scalar,
                         quantize_scalar, gate_blend_scalar};
    return ops;
}

} // namespace dn::kernels
