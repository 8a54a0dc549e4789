#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Low-level array kernels behind the engine's inner loops. Every backend
// implements the exact same arithmetic (operation-for-operation, no FMA
// contraction, no reassociation), so switching backends never changes a
// single output bit. Equivalence is enforced by tests/test_kernels.cpp.

namespace dn::kernels {

struct Ops {
    const char* name;

    // acc[i] += a * x[i]
    void (*axpy)(double* acc, const double* x, double a, std::size_t n);

    // Per component: d = cur[i] - ref[i]; fires iff |d| > theta (strict).
    // Fired: delta[i] = d and ref[i] = cur[i]. Suppressed: delta[i] = 0,
    // ref untouched. Returns the fired count.
    std::size_t (*threshold_delta)(const double* cur, double* ref, double* delta,
                                   double theta, std::size_t n);

    // out[i] = round(clamp(in[i] * scale, -bound, +bound)) * inv_scale
    // with round-half-away-from-zero (std::round semantics, bit for bit).
    void (*quantize)(const double* in, double* out, double scale,
                     double inv_scale, double bound, std::size_t n);

    // h[i] = (1 - u[i]) * h_prev[i] + u[i] * c[i]
    void (*gate_blend)(double* h, const double* u, const double* h_prev,
                       const double* c, std::size_t n);
};

const Ops& scalar_ops();

// Backends compiled in and runnable on this CPU; scalar is always present
// and always first.
std::vector<const Ops*> available();

// Active backend. The first call picks the widest available one, honoring
// the DN_KERNELS environment variable (scalar|avx2|neon|auto) if set.
const Ops& active();

// Force a backend by name; "auto" restores the default choice. Returns
// false if the name is unknown or the backend cannot run on this CPU.
bool select(std::string_view name);

} // namespace dn::kernels
