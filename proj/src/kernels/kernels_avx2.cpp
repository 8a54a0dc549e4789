// AVX2 backend. Four lanes of double per iteration, scalar tail. Every
// lane performs the same operation sequence as the scalar reference:
// separate multiply and add (no FMA), identical clamp order, and a
// truncate-based half-away-from-zero rounding that matches std::round
// bit for bit.

#include "backends.hpp"

#if defined(__AVX2__) && (defined(__x86_64__) || defined(_M_X64))

#include <immintrin.h>

#include <cmath>

namespace dn::kernels {
namespace {

const __m256d kSignMask = _mm256_set1_pd(-0.0);

void axpy_avx2(double* acc, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vacc = _mm256_loadu_pd(acc + i);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(acc + i, vacc);
    }
    for (; i < n; ++i) acc[i] += a * x[i];
}

std::size_t threshold_delta_avx2(const double* cur, double* ref, double* delta,
                                 double theta, std::size_t n) {
    const __m256d vtheta = _mm256_set1_pd(theta);
    std::size_t fired = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vcur = _mm256_loadu_pd(cur + i);
        __m256d vref = _mm256_loadu_pd(ref + i);
        __m256d d = _mm256_sub_pd(vcur, vref);
        __m256d ad = _mm256_andnot_pd(kSignMask, d);
        __m256d m = _mm256_cmp_pd(ad, vtheta, _CMP_GT_OQ);
        _mm256_storeu_pd(delta + i, _mm256_and_pd(m, d));
        _mm256_storeu_pd(ref + i, _mm256_blendv_pd(vref, vcur, m));
        fired += static_cast<unsigned>(__builtin_popcount(_mm256_movemask_pd(m)));
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

// round-half-away-from-zero: t = trunc(s), f = s - t (exact), bump t by
// copysign(1, s) when |f| >= 0.5. Agrees with std::round for every finite
// input including signed zeros and |s| >= 2^52.
inline __m256d round_away(__m256d s) {
    __m256d t = _mm256_round_pd(s, _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
    __m256d f = _mm256_sub_pd(s, t);
    __m256d af = _mm256_andnot_pd(kSignMask, f);
    __m256d m = _mm256_cmp_pd(af, _mm256_set1_pd(0.5), _CMP_GE_OQ);
    __m256d sgn1 = _mm256_or_pd(_mm256_and_pd(kSignMask, s), _mm256_set1_pd(1.0));
    // select, not add: t + 0.0 would turn -0.0 into +0.0
    return _mm256_blendv_pd(t, _mm256_add_pd(t, sgn1), m);
}

void quantize_avx2(const double* in, double* out, double scale,
                   double inv_scale, double bound, std::size_t n) {
    const __m256d vscale = _mm256_set1_pd(scale);
    const __m256d vinv = _mm256_set1_pd(inv_scale);
    const __m256d vlo = _mm256_set1_pd(-bound);
    const __m256d vhi = _mm256_set1_pd(bound);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_mul_pd(_mm256_loadu_pd(in + i), vscale);
        s = _mm256_max_pd(vlo, s);
        s = _mm256_min_pd(vhi, s);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(round_away(s), vinv));
    }
    for (; i < n; ++i) {
        double s = in[i] * scale;
        s = (s < -bound) ? -bound : s;
        s = (s > bound) ? bound : s;
        out[i] = std::round(s) * inv_scale;
    }
}

void gate_blend_avx2(double* h, const double* u, const double* h_prev,
                     const double* c, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vu = _mm256_loadu_pd(u + i);
        __m256d keep = _mm256_mul_pd(_mm256_sub_pd(one, vu), _mm256_loadu_pd(h_prev + i));
        __m256d take = _mm256_mul_pd(vu, _mm256_loadu_pd(c + i));
        _mm256_storeu_pd(h + i, _mm256_add_pd(keep, take));
    }
    for (; i < n; ++i) h[i] = (1.0 - u[i]) * h_prev[i] + u[i] * c[i];
}

} // namespace

const Ops* avx2_backend() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const Ops ops{"avx2", axpy_avx2, threshold_delta_avx2,
                         quantize_avx2, gate_blend_avx2};
    return &ops;
}

} // namespace dn::kernels

#else

namespace dn::kernels {
const Ops* avx2_backend() { return nullptr; }
} // namespace dn::kernels

#endif
