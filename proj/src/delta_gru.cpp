#include "dn/delta_gru.hpp"

#include "dn/kernels.hpp"

namespace dn {

DeltaGruState delta_init(const GruParams& p) {
    p.validate();
    DeltaGruState s;
    s.x_ref = Vector(p.input_size());
    s.h_ref = Vector(p.hidden_size());
    s.h_prev = Vector(p.hidden_size());
    s.m_r = p.b_r;
    s.m_u = p.b_u;
    s.m_xc = p.b_c;
    s.m_hc = Vector(p.hidden_size());
    return s;
}

ThresholdResult threshold_delta(const Vector& current, const Vector& ref, Scalar theta) {
    check(current.size() == ref.size(), "threshold_delta: length mismatch");
    check(theta >= 0.0, "threshold_delta: theta must be >= 0");
    ThresholdResult r;
    r.new_ref = ref;
    r.delta = Vector(current.size());
    r.nnz = kernels::active().threshold_delta(current.data(), r.new_ref.data(),
                                              r.delta.data(), theta, current.size());
    return r;
}

DenseColumns pack_columns(const Matrix& m) {
    DenseColumns dc;
    dc.rows = m.rows();
    dc.cols = m.cols();
    dc.elems.resize(m.rows() * m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i)
            dc.elems[j * m.rows() + i] = m(i, j);
    return dc;
}

DeltaWeights DeltaWeights::dense(const GruParams& p) {
    p.validate();
    DeltaWeights w;
    w.nx_ = p.input_size();
    w.nh_ = p.hidden_size();
    w.dense_ = {pack_columns(p.w_xr), pack_columns(p.w_xu), pack_columns(p.w_xc),
                pack_columns(p.w_hr), pack_columns(p.w_hu), pack_columns(p.w_hc)};
    return w;
}

DeltaWeights DeltaWeights::sparse(const GruParams& p, Scalar zero_tol) {
    p.validate();
    DeltaWeights w;
    w.nx_ = p.input_size();
    w.nh_ = p.hidden_size();
    w.csc_ = {compress(p.w_xr, zero_tol), compress(p.w_xu, zero_tol),
              compress(p.w_xc, zero_tol), compress(p.w_hr, zero_tol),
              compress(p.w_hu, zero_tol), compress(p.w_hc, zero_tol)};
    w.sparse_ = true;
    return w;
}

double DeltaWeights::weight_occupancy() const {
    if (!sparse_) return 1.0;
    std::size_t kept = 0;
    std::size_t total = 0;
    for (const SparseWeights& sw : csc_) {
        kept += sw.nnz();
        total += sw.rows * sw.cols;
    }
    return total ? static_cast<double>(kept) / static_cast<double>(total) : 0.0;
}

namespace {

inline void accum_sparse_col(const SparseWeights& sw, std::size_t j, Scalar s,
                             Vector& m) {
    const std::uint32_t end = sw.col_start[j + 1];
    for (std::uint32_t k = sw.col_start[j]; k < end; ++k)
        m[sw.row_idx[k]] += sw.values[k] * s;
}

} // namespace

void DeltaWeights::accumulate_input(std::size_t j, Scalar s, Vector& m_r, Vector& m_u,
                                    Vector& m_xc, CostCounters& counters) const {
    if (!sparse_) {
        const auto& ops = kernels::active();
        ops.axpy(m_r.data(), dense_[0].column(j), s, nh_);
        ops.axpy(m_u.data(), dense_[1].column(j), s, nh_);
        ops.axpy(m_xc.data(), dense_[2].column(j), s, nh_);
        counters.macs += 3 * nh_;
        counters.weight_fetches += 3 * nh_;
        return;
    }
    accum_sparse_col(csc_[0], j, s, m_r);
    accum_sparse_col(csc_[1], j, s, m_u);
    accum_sparse_col(csc_[2], j, s, m_xc);
    const std::uint64_t touched =
        csc_[0].col_nnz(j) + csc_[1].col_nnz(j) + csc_[2].col_nnz(j);
    counters.macs += touched;
    counters.weight_fetches += touched;
}

void DeltaWeights::accumulate_hidden(std::size_t j, Scalar s, Vector& m_r, Vector& m_u,
                                     Vector& m_hc, CostCounters& counters) const {
    if (!sparse_) {
        const auto& ops = kernels::active();
        ops.axpy(m_r.data(), dense_[3].column(j), s, nh_);
        ops.axpy(m_u.data(), dense_[4].column(j), s, nh_);
        ops.axpy(m_hc.data(), dense_[5].column(j), s, nh_);
        counters.macs += 3 * nh_;
        counters.weight_fetches += 3 * nh_;
        return;
    }
    accum_sparse_col(csc_[3], j, s, m_r);
    accum_sparse_col(csc_[4], j, s, m_u);
    accum_sparse_col(csc_[5], j, s, m_hc);
    const std::uint64_t touched =
        csc_[3].col_nnz(j) + csc_[4].col_nnz(j) + csc_[5].col_nnz(j);
    counters.macs += touched;
    counters.weight_fetches += touched;
}

StepResult delta_gru_step(const DeltaWeights& w, DeltaGruState& s, const Vector& x_t,
                          Scalar theta, const std::optional<QFormat>& q,
                          CostCounters& counters, StepTrace* trace) {
    const std::size_t nx = w.input_size();
    const std::size_t nh = w.hidden_size();
    check(x_t.size() == nx, "delta_gru_step: x_t length != n_x");
    check(s.h_prev.size() == nh, "delta_gru_step: state size != n_h");
    check(theta >= 0.0, "delta_gru_step: theta must be >= 0");

    const auto& ops = kernels::active();
    Vector dx(nx);
    Vector dh(nh);
    const std::size_t nnz_x =
        ops.threshold_delta(x_t.data(), s.x_ref.data(), dx.data(), theta, nx);
    const std::size_t nnz_h =
        ops.threshold_delta(s.h_prev.data(), s.h_ref.data(), dh.data(), theta, nh);

    // Linear (occupancy-independent) charges for the six replaced
    // products: 2*cols reads for signal+reference, rows read + rows
    // written for the stored memory, cols + rows elementwise ops for the
    // delta calculation and accumulate.
    counters.state_reads += 3 * (2 * nx + nh) + 3 * (2 * nh + nh);
    counters.state_writes += 3 * nh + 3 * nh;
    counters.elementwise_ops += 3 * (nx + nh) + 3 * (nh + nh);

    for (std::size_t j = 0; j < nx; ++j)
        if (dx[j] != 0.0) w.accumulate_input(j, dx[j], s.m_r, s.m_u, s.m_xc, counters);
    for (std::size_t j = 0; j < nh; ++j)
        if (dh[j] != 0.0) w.accumulate_hidden(j, dh[j], s.m_r, s.m_u, s.m_hc, counters);

    Vector r(nh), u(nh), c(nh);
    for (std::size_t i = 0; i < nh; ++i) {
        r[i] = sigmoid(s.m_r[i]);
        u[i] = sigmoid(s.m_u[i]);
        c[i] = std::tanh(s.m_xc[i] + r[i] * s.m_hc[i]);
    }
    Vector h(nh);
    ops.gate_blend(h.data(), u.data(), s.h_prev.data(), c.data(), nh);
    counters.elementwise_ops += 9 * nh;
    counters.state_reads += nh;
    counters.state_writes += nh;
    if (q) {
        quantize_in_place(h, *q);
        counters.elementwise_ops += nh;
    }

    if (trace) {
        trace->dx = dx;
        trace->dh = dh;
        trace->mask_h.resize(nh);
        for (std::size_t i = 0; i < nh; ++i) trace->mask_h[i] = dh[i] != 0.0;
        trace->m_hc = s.m_hc;
        trace->r = r;
        trace->u = u;
        trace->c = c;
    }

    s.h_prev = h;

    StepStats stats;
    stats.nnz_dx = nnz_x;
    stats.nnz_dh = nnz_h;
    stats.occupancy_x = nx ? static_cast<double>(nnz_x) / static_cast<double>(nx) : 0.0;
    stats.occupancy_h = nh ? static_cast<double>(nnz_h) / static_cast<double>(nh) : 0.0;
    return {std::move(h), stats};
}

DeltaRunResult delta_gru_sequence(const GruParams& p, const std::vector<Vector>& xs,
                                  Scalar theta, const std::optional<QFormat>& q,
                                  CostCounters& counters, const DeltaWeights* weights) {
    DeltaWeights local;
    if (!weights) {
        local = DeltaWeights::dense(p);
        weights = &local;
    }
    DeltaGruState s = delta_init(p);
    DeltaRunResult out;
    out.hs.reserve(xs.size());
    out.steps.reserve(xs.size());
    for (const Vector& x : xs) {
        StepResult step;
        if (q) {
            Vector xq = quantize_vector(x, *q);
            counters.elementwise_ops += x.size();
            step = delta_gru_step(*weights, s, xq, theta, q, counters);
        } else {
            step = delta_gru_step(*weights, s, x, theta, q, counters);
        }
        out.hs.push_back(std::move(step.h));
        out.steps.push_back(step.stats);
    }
    if (!out.steps.empty()) {
        double sx = 0;
        double sh = 0;
        for (const StepStats& st : out.steps) {
            sx += st.occupancy_x;
            sh += st.occupancy_h;
        }
        out.mean_occupancy_x = sx / static_cast<double>(out.steps.size());
        out.mean_occupancy_h = sh / static_cast<double>(out.steps.size());
    }
    return out;
}

} // namespace dn
