// NEON backend (AArch64, two lanes of double). Same operation sequence as
// the scalar reference; frintz + half-away bump mirrors std::round exactly.

#include "backends.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace dn::kernels {
namespace {

void axpy_neon(double* acc, const double* x, double a, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vacc = vld1q_f64(acc + i);
        vacc = vaddq_f64(vacc, vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(acc + i, vacc);
    }
    for (; i < n; ++i) acc[i] += a * x[i];
}

std::size_t threshold_delta_neon(const double* cur, double* ref, double* delta,
                                 double theta, std::size_t n) {
    const float64x2_t vtheta = vdupq_n_f64(theta);
    std::size_t fired = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vcur = vld1q_f64(cur + i);
        float64x2_t vref = vld1q_f64(ref + i);
        float64x2_t d = vsubq_f64(vcur, vref);
        uint64x2_t m = vcgtq_f64(vabsq_f64(d), vtheta);
        float64x2_t vd = vreinterpretq_f64_u64(
            vandq_u64(m, vreinterpretq_u64_f64(d)));
        vst1q_f64(delta + i, vd);
        vst1q_f64(ref + i, vbslq_f64(m, vcur, vref));
        fired += (vgetq_lane_u64(m, 0) & 1u) + (vgetq_lane_u64(m, 1) & 1u);
    }
    for (; i < n; ++i) {
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

inline float64x2_t round_away(float64x2_t s) {
    float64x2_t t = vrndq_f64(s); // toward zero
    float64x2_t f = vsubq_f64(s, t);
    uint64x2_t m = vcgeq_f64(vabsq_f64(f), vdupq_n_f64(0.5));
    const uint64x2_t sign = vdupq_n_u64(0x8000000000000000ull);
    float64x2_t sgn1 = vreinterpretq_f64_u64(vorrq_u64(
        vandq_u64(vreinterpretq_u64_f64(s), sign),
        vreinterpretq_u64_f64(vdupq_n_f64(1.0))));
    // select, not add: t + 0.0 would turn -0.0 into +0.0
    return vbslq_f64(m, vaddq_f64(t, sgn1), t);
}

void quantize_neon(const double* in, double* out, double scale,
                   double inv_scale, double bound, std::size_t n) {
    const float64x2_t vscale = vdupq_n_f64(scale);
    const float64x2_t vinv = vdupq_n_f64(inv_scale);
    const float64x2_t vlo = vdupq_n_f64(-bound);
    const float64x2_t vhi = vdupq_n_f64(bound);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t s = vmulq_f64(vld1q_f64(in + i), vscale);
        s = vmaxq_f64(vlo, s);
        s = vminq_f64(vhi, s);
        vst1q_f64(out + i, vmulq_f64(round_away(s), vinv));
    }
    for (; i < n; ++i) {
        double s = in[i] * scale;
        s = (s < -bound) ? -bound : s;
        s = (s > bound) ? bound : s;
        out[i] = std::round(s) * inv_scale;
    }
}

void gate_blend_neon(double* h, const double* u, const double* h_prev,
                     const double* c, std::size_t n) {
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vu = vld1q_f64(u + i);
        float64x2_t keep = vmulq_f64(vsubq_f64(one, vu), vld1q_f64(h_prev + i));
        float64x2_t take = vmulq_f64(vu, vld1q_f64(c + i));
        vst1q_f64(h + i, vaddq_f64(keep, take));
    }
    for (; i < n; ++i) h[i] = (1.0 - u[i]) * h_prev[i] + u[i] * c[i];
}

} // namespace

const Ops* neon_backend() {
    static const Ops ops{"neon", axpy_neon, threshold_delta_neon,
                         quantize_neon, gate_blend_neon};
    return &ops;
}

} // namespace dn::kernels

#else

namespace dn::kernels {
const Ops* neon_backend() { return nullptr; }
} // namespace dn::kernels

#endif
