#pragma once

#include <cmath>

#include "dn/gru_ref.hpp"
#include "dn/rng.hpp"

namespace dn::testutil {

inline GruParams random_params(std::size_t nx, std::size_t nh, std::uint64_t seed,
                               double weight_scale = 0.0) {
    Rng rng(seed);
    auto fill_m = [&](Matrix& m, std::size_t r, std::size_t c) {
        m = Matrix(r, c);
        const double s = weight_scale > 0.0 ? weight_scale
                                            : 1.0 / std::sqrt(static_cast<double>(c));
        for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = rng.uniform(-s, s);
    };
    GruParams p;
    fill_m(p.w_xr, nh, nx);
    fill_m(p.w_xu, nh, nx);
    fill_m(p.w_xc, nh, nx);
    fill_m(p.w_hr, nh, nh);
    fill_m(p.w_hu, nh, nh);
    fill_m(p.w_hc, nh, nh);
    p.b_r = Vector(nh);
    p.b_u = Vector(nh);
    p.b_c = Vector(nh);
    for (std::size_t i = 0; i < nh; ++i) {
        p.b_r[i] = rng.uniform(-0.1, 0.1);
        p.b_u[i] = rng.uniform(-0.1, 0.1);
        p.b_c[i] = rng.uniform(-0.1, 0.1);
    }
    return p;
}

inline GruParams zero_params(std::size_t nx, std::size_t nh) {
    GruParams p;
    p.w_xr = Matrix(nh, nx);
    p.w_xu = Matrix(nh, nx);
    p.w_xc = Matrix(nh, nx);
    p.w_hr = Matrix(nh, nh);
    p.w_hu = Matrix(nh, nh);
    p.w_hc = Matrix(nh, nh);
    p.b_r = Vector(nh);
    p.b_u = Vector(nh);
    p.b_c = Vector(nh);
    return p;
}

inline std::vector<Vector> random_sequence(Rng& rng, std::size_t steps, std::size_t nx,
                                           double lo = -1.0, double hi = 1.0) {
    std::vector<Vector> xs(steps, Vector(nx));
    for (auto& x : xs)
        for (std::size_t i = 0; i < nx; ++i) x[i] = rng.uniform(lo, hi);
    return xs;
}

} // namespace dn::testutil
