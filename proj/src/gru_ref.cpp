#include "dn/gru_ref.hpp"

#include "dn/kernels.hpp"

namespace dn {

void GruParams::validate() const {
    const std::size_t nh = hidden_size();
    const std::size_t nx = input_size();
    check(nh > 0 && nx > 0, "GruParams: empty dimensions");
    auto want = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
        check(m.rows() == r && m.cols() == c,
              std::string("GruParams: bad shape for ") + name);
        check(m.all_finite(), std::string("GruParams: non-finite entries in ") + name);
    };
    want(w_xr, nh, nx, "W_xr");
    want(w_xu, nh, nx, "W_xu");
    want(w_xc, nh, nx, "W_xc");
    want(w_hr, nh, nh, "W_hr");
    want(w_hu, nh, nh, "W_hu");
    want(w_hc, nh, nh, "W_hc");
    auto wantv = [&](const Vector& v, const char* name) {
        check(v.size() == nh, std::string("GruParams: bad length for ") + name);
        check(v.all_finite(), std::string("GruParams: non-finite entries in ") + name);
    };
    wantv(b_r, "b_r");
    wantv(b_u, "b_u");
    wantv(b_c, "b_c");
}

Vector gru_step(const GruParams& p, const Vector& x_t, const Vector& h_prev,
                CostCounters& counters) {
    const std::size_t nh = p.hidden_size();
    check(x_t.size() == p.input_size(), "gru_step: x_t length != n_x");
    check(h_prev.size() == nh, "gru_step: h_prev length != n_h");

    Vector r = matvec_dense(p.w_xr, x_t, counters);
    Vector hr = matvec_dense(p.w_hr, h_prev, counters);
    Vector u = matvec_dense(p.w_xu, x_t, counters);
    Vector hu = matvec_dense(p.w_hu, h_prev, counters);
    Vector c = matvec_dense(p.w_xc, x_t, counters);
    Vector hc = matvec_dense(p.w_hc, h_prev, counters);

    for (std::size_t i = 0; i < nh; ++i) {
        r[i] = sigmoid(r[i] + hr[i] + p.b_r[i]);
        u[i] = sigmoid(u[i] + hu[i] + p.b_u[i]);
        c[i] = std::tanh(c[i] + r[i] * hc[i] + p.b_c[i]);
    }
    Vector h(nh);
    kernels::active().gate_blend(h.data(), u.data(), h_prev.data(), c.data(), nh);

    counters.elementwise_ops += 14 * nh;
    counters.state_reads += nh;
    counters.state_writes += nh;
    return h;
}

std::vector<Vector> gru_sequence(const GruParams& p, const std::vector<Vector>& xs,
                                 const Vector& h0, const std::optional<QFormat>& q,
                                 CostCounters& counters) {
    check(h0.size() == p.hidden_size(), "gru_sequence: h0 length != n_h");
    std::vector<Vector> hs;
    hs.reserve(xs.size());
    Vector h = h0;
    for (const Vector& x : xs) {
        h = gru_step(p, x, h, counters);
        if (q) {
            quantize_in_place(h, *q);
            counters.elementwise_ops += p.hidden_size();
        }
        hs.push_back(h);
    }
    return hs;
}

} // namespace dn
