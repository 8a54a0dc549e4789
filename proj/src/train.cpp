#include "dn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dn/delta_gru.hpp"
#include "dn/kernels.hpp"

namespace dn {
namespace {

// out += W * x, row dots
void matvec_accum(const Matrix& w, const Vector& x, Vector& out) {
    const std::size_t rows = w.rows();
    const std::size_t cols = w.cols();
    const Scalar* wd = w.data();
    for (std::size_t i = 0; i < rows; ++i) {
        const Scalar* row = wd + i * cols;
        Scalar acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
        out[i] += acc;
    }
}

// acc += W^T * g
void matvec_t_axpy(const Matrix& w, const Vector& g, Vector& acc) {
    const auto& ops = kernels::active();
    for (std::size_t i = 0; i < w.rows(); ++i)
        ops.axpy(acc.data(), w.data() + i * w.cols(), g[i], w.cols());
}

// dw += g * x^T
void outer_axpy(Matrix& dw, const Vector& g, const Vector& x) {
    const auto& ops = kernels::active();
    for (std::size_t i = 0; i < dw.rows(); ++i)
        ops.axpy(dw.data() + i * dw.cols(), x.data(), g[i], dw.cols());
}

Vector softmax(const Vector& logits) {
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (Scalar v : logits) mx = std::max(mx, v);
    Vector p(logits.size());
    Scalar sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) p[i] /= sum;
    return p;
}

std::size_t argmax(const Vector& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

Vector feature_row(const Matrix& f, std::size_t t) {
    Vector x(f.cols());
    for (std::size_t i = 0; i < f.cols(); ++i) x[i] = f(t, i);
    return x;
}

// Readout on the mean-over-time hidden state; returns cross-entropy.
Scalar apply_readout(const Readout& ro, const std::vector<Vector>& hs, int label,
                     SeqCache& cache) {
    const std::size_t nh = ro.w.cols();
    Vector mean(nh);
    if (!hs.empty()) {
        for (const Vector& h : hs)
            for (std::size_t i = 0; i < nh; ++i) mean[i] += h[i];
        const Scalar inv = 1.0 / static_cast<double>(hs.size());
        for (std::size_t i = 0; i < nh; ++i) mean[i] *= inv;
    }
    Vector logits = ro.b;
    matvec_accum(ro.w, mean, logits);
    cache.h_mean = std::move(mean);
    cache.probs = softmax(logits);
    return -std::log(cache.probs[static_cast<std::size_t>(label)]);
}

std::uint64_t dense_step_macs(std::size_t nx, std::size_t nh) {
    return 3ull * nh * (nx + nh);
}

} // namespace

Gradients zeros_like(const GruModel& m) {
    check(m.readout.has_value(), "zeros_like: model has no readout");
    const std::size_t nx = m.gru.input_size();
    const std::size_t nh = m.gru.hidden_size();
    Gradients g;
    g.gru.w_xr = Matrix(nh, nx);
    g.gru.w_xu = Matrix(nh, nx);
    g.gru.w_xc = Matrix(nh, nx);
    g.gru.w_hr = Matrix(nh, nh);
    g.gru.w_hu = Matrix(nh, nh);
    g.gru.w_hc = Matrix(nh, nh);
    g.gru.b_r = Vector(nh);
    g.gru.b_u = Vector(nh);
    g.gru.b_c = Vector(nh);
    g.readout.w = Matrix(m.readout->w.rows(), nh);
    g.readout.b = Vector(m.readout->b.size());
    return g;
}

std::vector<std::span<Scalar>> tensor_views(GruParams& p, Readout* readout) {
    std::vector<std::span<Scalar>> v;
    auto add_m = [&](Matrix& m) { v.emplace_back(m.data(), m.rows() * m.cols()); };
    auto add_v = [&](Vector& x) { v.emplace_back(x.data(), x.size()); };
    add_m(p.w_xr);
    add_m(p.w_xu);
    add_m(p.w_xc);
    add_m(p.w_hr);
    add_m(p.w_hu);
    add_m(p.w_hc);
    add_v(p.b_r);
    add_v(p.b_u);
    add_v(p.b_c);
    if (readout) {
        add_m(readout->w);
        add_v(readout->b);
    }
    return v;
}

namespace {

SeqCache forward_dense_seq(const GruModel& m, const Sequence& seq, const TrainConfig& cfg,
                           Rng& rng, Scalar& ce, std::size_t& correct) {
    const GruParams& p = m.gru;
    const std::size_t nx = p.input_size();
    const std::size_t nh = p.hidden_size();
    const std::size_t steps = seq.features.rows();
    check(seq.features.cols() == nx, "forward_train: sequence width != n_x");

    SeqCache cache;
    cache.label = seq.label;
    cache.steps = steps;
    cache.x_in.reserve(steps);
    cache.h_tilde.reserve(steps);
    cache.v_hc.reserve(steps);
    cache.r.reserve(steps);
    cache.u.reserve(steps);
    cache.c.reserve(steps);
    cache.h.reserve(steps);

    const auto& ops = kernels::active();
    Vector h(nh);
    for (std::size_t t = 0; t < steps; ++t) {
        Vector x = feature_row(seq.features, t);
        if (cfg.q) quantize_in_place(x, *cfg.q);
        if (cfg.noise_sigma > 0.0)
            for (std::size_t i = 0; i < nx; ++i) x[i] += cfg.noise_sigma * rng.gaussian();
        Vector ht = h;
        if (cfg.noise_sigma > 0.0)
            for (std::size_t i = 0; i < nh; ++i) ht[i] += cfg.noise_sigma * rng.gaussian();

        Vector a_r(nh), a_u(nh), v(nh), a_c(nh);
        matvec_accum(p.w_xr, x, a_r);
        matvec_accum(p.w_hr, ht, a_r);
        matvec_accum(p.w_xu, x, a_u);
        matvec_accum(p.w_hu, ht, a_u);
        matvec_accum(p.w_hc, ht, v);
        matvec_accum(p.w_xc, x, a_c);

        Vector r(nh), u(nh), c(nh);
        for (std::size_t i = 0; i < nh; ++i) {
            r[i] = sigmoid(a_r[i] + p.b_r[i]);
            u[i] = sigmoid(a_u[i] + p.b_u[i]);
            c[i] = std::tanh(a_c[i] + r[i] * v[i] + p.b_c[i]);
        }
        Vector h_new(nh);
        ops.gate_blend(h_new.data(), u.data(), h.data(), c.data(), nh);
        if (cfg.q) quantize_in_place(h_new, *cfg.q);

        cache.x_in.push_back(std::move(x));
        cache.h_tilde.push_back(std::move(ht));
        cache.v_hc.push_back(std::move(v));
        cache.r.push_back(std::move(r));
        cache.u.push_back(std::move(u));
        cache.c.push_back(std::move(c));
        cache.h.push_back(h_new);
        h = std::move(h_new);
    }
    ce += apply_readout(*m.readout, cache.h, seq.label, cache);
    if (argmax(cache.probs) == static_cast<std::size_t>(seq.label)) ++correct;
    return cache;
}

SeqCache forward_delta_seq(const GruModel& m, const DeltaWeights& w, const Sequence& seq,
                           const TrainConfig& cfg, CostCounters& counters, Scalar& ce,
                           std::size_t& correct, Scalar& abs_dh_sum, double& occ_x_sum,
                           double& occ_h_sum) {
    const GruParams& p = m.gru;
    const std::size_t nx = p.input_size();
    const std::size_t steps = seq.features.rows();
    check(seq.features.cols() == nx, "forward_train: sequence width != n_x");

    SeqCache cache;
    cache.label = seq.label;
    cache.steps = steps;
    cache.dx.reserve(steps);
    cache.dh.reserve(steps);
    cache.mask_h.reserve(steps);
    cache.m_hc.reserve(steps);
    cache.r.reserve(steps);
    cache.u.reserve(steps);
    cache.c.reserve(steps);
    cache.h.reserve(steps);

    DeltaGruState s = delta_init(p);
    for (std::size_t t = 0; t < steps; ++t) {
        Vector x = feature_row(seq.features, t);
        if (cfg.q) quantize_in_place(x, *cfg.q);
        StepTrace trace;
        StepResult step = delta_gru_step(w, s, x, cfg.theta_train, cfg.q, counters, &trace);
        for (std::size_t i = 0; i < trace.dh.size(); ++i) abs_dh_sum += std::fabs(trace.dh[i]);
        occ_x_sum += step.stats.occupancy_x;
        occ_h_sum += step.stats.occupancy_h;
        cache.dx.push_back(std::move(trace.dx));
        cache.dh.push_back(std::move(trace.dh));
        cache.mask_h.push_back(std::move(trace.mask_h));
        cache.m_hc.push_back(std::move(trace.m_hc));
        cache.r.push_back(std::move(trace.r));
        cache.u.push_back(std::move(trace.u));
        cache.c.push_back(std::move(trace.c));
        cache.h.push_back(std::move(step.h));
    }
    ce += apply_readout(*m.readout, cache.h, seq.label, cache);
    if (argmax(cache.probs) == static_cast<std::size_t>(seq.label)) ++correct;
    return cache;
}

} // namespace

ForwardResult forward_train(const GruModel& m, const std::vector<const Sequence*>& batch,
                            const TrainConfig& cfg, Rng& rng) {
    check(!batch.empty(), "forward_train: empty batch");
    check(m.readout.has_value(), "forward_train: model has no readout");
    const std::size_t nx = m.gru.input_size();
    const std::size_t nh = m.gru.hidden_size();

    ForwardResult out;
    out.cache.seqs.reserve(batch.size());

    Scalar ce = 0.0;
    Scalar abs_dh_sum = 0.0;
    double occ_x_sum = 0.0;
    double occ_h_sum = 0.0;
    std::size_t total_steps = 0;

    std::optional<DeltaWeights> weights;
    if (cfg.mode == TrainMode::Delta) weights = DeltaWeights::dense(m.gru);

    for (const Sequence* seq : batch) {
        total_steps += seq->features.rows();
        if (cfg.mode == TrainMode::Dense) {
            out.cache.seqs.push_back(
                forward_dense_seq(m, *seq, cfg, rng, ce, out.correct));
        } else {
            out.cache.seqs.push_back(forward_delta_seq(m, *weights, *seq, cfg,
                                                       out.counters, ce, out.correct,
                                                       abs_dh_sum, occ_x_sum, occ_h_sum));
        }
    }

    out.dense_cost.macs = dense_step_macs(nx, nh) * total_steps;
    out.dense_cost.weight_fetches = out.dense_cost.macs;

    out.task_loss = ce / static_cast<double>(batch.size());
    if (cfg.mode == TrainMode::Delta) {
        out.cache.delta_components = total_steps * nh;
        if (out.cache.delta_components > 0)
            out.sparsity_loss =
                cfg.beta * abs_dh_sum / static_cast<double>(out.cache.delta_components);
        if (total_steps > 0) {
            out.mean_occ_x = occ_x_sum / static_cast<double>(total_steps);
            out.mean_occ_h = occ_h_sum / static_cast<double>(total_steps);
        }
    } else {
        out.counters = out.dense_cost;
    }
    out.loss = out.task_loss + out.sparsity_loss;
    return out;
}

namespace {

// Shared readout backward; returns d(loss)/d(h_t) contribution per step
// (uniform over time) and accumulates readout gradients.
Vector readout_backward(const Readout& ro, const SeqCache& sc, Scalar inv_batch,
                        Gradients& g) {
    Vector dlogits = sc.probs;
    dlogits[static_cast<std::size_t>(sc.label)] -= 1.0;
    for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits[i] *= inv_batch;
    outer_axpy(g.readout.w, dlogits, sc.h_mean);
    for (std::size_t i = 0; i < dlogits.size(); ++i) g.readout.b[i] += dlogits[i];
    Vector dh_mean(ro.w.cols());
    matvec_t_axpy(ro.w, dlogits, dh_mean);
    if (sc.steps > 0) {
        const Scalar inv = 1.0 / static_cast<double>(sc.steps);
        for (std::size_t i = 0; i < dh_mean.size(); ++i) dh_mean[i] *= inv;
    }
    return dh_mean;
}

void backward_dense_seq(const GruModel& m, const SeqCache& sc, Scalar inv_batch,
                        Gradients& g) {
    const GruParams& p = m.gru;
    const std::size_t nh = p.hidden_size();
    const Vector dh_step = readout_backward(*m.readout, sc, inv_batch, g);

    Vector gh(nh); // dL/dh_t flowing from future steps
    const Vector h0(nh);
    for (std::size_t t = sc.steps; t-- > 0;) {
        const Vector& h_prev = (t == 0) ? h0 : sc.h[t - 1];
        const Vector& r = sc.r[t];
        const Vector& u = sc.u[t];
        const Vector& c = sc.c[t];

        Vector dh(nh);
        for (std::size_t i = 0; i < nh; ++i) dh[i] = gh[i] + dh_step[i];

        // h = (1-u) h_prev + u c; rounding backprops as identity
        Vector du(nh), dc(nh), gh_prev(nh);
        for (std::size_t i = 0; i < nh; ++i) {
            du[i] = dh[i] * (c[i] - h_prev[i]);
            dc[i] = dh[i] * u[i];
            gh_prev[i] = dh[i] * (1.0 - u[i]);
        }

        Vector da_c(nh), dr(nh), dv(nh);
        for (std::size_t i = 0; i < nh; ++i) {
            da_c[i] = dc[i] * (1.0 - c[i] * c[i]);
            dr[i] = da_c[i] * sc.v_hc[t][i];
            dv[i] = da_c[i] * r[i];
        }
        Vector da_r(nh), da_u(nh);
        for (std::size_t i = 0; i < nh; ++i) {
            da_r[i] = dr[i] * r[i] * (1.0 - r[i]);
            da_u[i] = du[i] * u[i] * (1.0 - u[i]);
        }

        outer_axpy(g.gru.w_xr, da_r, sc.x_in[t]);
        outer_axpy(g.gru.w_xu, da_u, sc.x_in[t]);
        outer_axpy(g.gru.w_xc, da_c, sc.x_in[t]);
        outer_axpy(g.gru.w_hr, da_r, sc.h_tilde[t]);
        outer_axpy(g.gru.w_hu, da_u, sc.h_tilde[t]);
        outer_axpy(g.gru.w_hc, dv, sc.h_tilde[t]);
        for (std::size_t i = 0; i < nh; ++i) {
            g.gru.b_r[i] += da_r[i];
            g.gru.b_u[i] += da_u[i];
            g.gru.b_c[i] += da_c[i];
        }

        Vector dht(nh); // into h_tilde = h_prev + noise
        matvec_t_axpy(p.w_hr, da_r, dht);
        matvec_t_axpy(p.w_hu, da_u, dht);
        matvec_t_axpy(p.w_hc, dv, dht);
        for (std::size_t i = 0; i < nh; ++i) gh[i] = gh_prev[i] + dht[i];
    }
}

void backward_delta_seq(const GruModel& m, const SeqCache& sc, Scalar inv_batch,
                        Scalar beta, std::size_t delta_components, Gradients& g) {
    const GruParams& p = m.gru;
    const std::size_t nh = p.hidden_size();
    const Vector dh_step = readout_backward(*m.readout, sc, inv_batch, g);
    const Scalar beta_scale =
        delta_components ? beta / static_cast<double>(delta_components) : 0.0;

    // Running gradients of the four memories (each M_t feeds M_{t+1}
    // unchanged, so the backward accumulators just grow over time).
    Vector G_r(nh), G_u(nh), G_xc(nh), G_hc(nh);
    Vector gh(nh);     // dL/dh_t from future steps
    Vector gh_hat(nh); // dL/d h-ref after step t
    const Vector h0(nh);

    for (std::size_t t = sc.steps; t-- > 0;) {
        const Vector& h_prev = (t == 0) ? h0 : sc.h[t - 1];
        const Vector& r = sc.r[t];
        const Vector& u = sc.u[t];
        const Vector& c = sc.c[t];

        Vector dh(nh);
        for (std::size_t i = 0; i < nh; ++i) dh[i] = gh[i] + dh_step[i];

        Vector du(nh), dc(nh), gh_prev(nh);
        for (std::size_t i = 0; i < nh; ++i) {
            du[i] = dh[i] * (c[i] - h_prev[i]);
            dc[i] = dh[i] * u[i];
            gh_prev[i] = dh[i] * (1.0 - u[i]);
        }

        // c = tanh(M_xc + r .* M_hc)
        for (std::size_t i = 0; i < nh; ++i) {
            const Scalar da_c = dc[i] * (1.0 - c[i] * c[i]);
            G_xc[i] += da_c;
            const Scalar dr = da_c * sc.m_hc[t][i];
            G_hc[i] += da_c * r[i];
            G_r[i] += dr * r[i] * (1.0 - r[i]);
            G_u[i] += du[i] * u[i] * (1.0 - u[i]);
        }

        outer_axpy(g.gru.w_xr, G_r, sc.dx[t]);
        outer_axpy(g.gru.w_xu, G_u, sc.dx[t]);
        outer_axpy(g.gru.w_xc, G_xc, sc.dx[t]);
        outer_axpy(g.gru.w_hr, G_r, sc.dh[t]);
        outer_axpy(g.gru.w_hu, G_u, sc.dh[t]);
        outer_axpy(g.gru.w_hc, G_hc, sc.dh[t]);

        Vector g_dh(nh); // dL/d(delta h_t)
        matvec_t_axpy(p.w_hr, G_r, g_dh);
        matvec_t_axpy(p.w_hu, G_u, g_dh);
        matvec_t_axpy(p.w_hc, G_hc, g_dh);
        if (beta_scale != 0.0)
            for (std::size_t i = 0; i < nh; ++i) {
                const Scalar d = sc.dh[t][i];
                if (d > 0.0)
                    g_dh[i] += beta_scale;
                else if (d < 0.0)
                    g_dh[i] -= beta_scale;
            }

        // Straight-through around the threshold:
        //   delta_h = mask .* (h_{t-1} - ref_old)
        //   ref_new = mask .* h_{t-1} + (1 - mask) .* ref_old
        const std::vector<std::uint8_t>& mask = sc.mask_h[t];
        for (std::size_t i = 0; i < nh; ++i) {
            if (mask[i]) {
                gh_prev[i] += g_dh[i] + gh_hat[i];
                gh_hat[i] = -g_dh[i];
            }
            // suppressed: gh_hat carries through unchanged
        }
        gh = std::move(gh_prev);
    }

    // M_{r,0} = b_r, M_{u,0} = b_u, M_{xc,0} = b_c, M_{hc,0} = 0
    for (std::size_t i = 0; i < nh; ++i) {
        g.gru.b_r[i] += G_r[i];
        g.gru.b_u[i] += G_u[i];
        g.gru.b_c[i] += G_xc[i];
    }
}

} // namespace

Gradients backward(const GruModel& m, const ForwardCache& cache, const TrainConfig& cfg) {
    Gradients g = zeros_like(m);
    const Scalar inv_batch = 1.0 / static_cast<double>(cache.seqs.size());
    for (const SeqCache& sc : cache.seqs) {
        if (cfg.mode == TrainMode::Dense)
            backward_dense_seq(m, sc, inv_batch, g);
        else
            backward_delta_seq(m, sc, inv_batch, cfg.beta, cache.delta_components, g);
    }
    return g;
}

const char* EpochMetrics::csv_header() {
    return "epoch,loss,task_loss,sparsity_loss,accuracy,mean_occ_x,mean_occ_h,"
           "speedup_comp,speedup_mem";
}

std::string EpochMetrics::csv_row() const {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  epoch, loss, task_loss, sparsity_loss, accuracy, mean_occ_x, mean_occ_h,
                  speedup_comp, speedup_mem);
    return buf;
}

TrainResult train_loop(const GruModel& init, const SequenceDataset& data,
                       const TrainConfig& cfg) {
    check(init.readout.has_value(), "train_loop: model has no readout");
    check(cfg.batch_size >= 1, "train_loop: batch_size must be >= 1");
    check(cfg.learning_rate > 0.0, "train_loop: learning_rate must be > 0");
    check(!data.sequences.empty(), "train_loop: empty dataset");
    check(cfg.mode == TrainMode::Delta || cfg.beta == 0.0,
          "train_loop: beta needs delta mode");

    TrainResult result;
    result.model = init;
    GruModel& model = result.model;
    Gradients velocity = zeros_like(model);
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(data.sequences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);

        double loss_sum = 0, task_sum = 0, sparse_sum = 0;
        std::size_t correct = 0;
        double occ_x_sum = 0, occ_h_sum = 0;
        std::size_t batches = 0;
        CostCounters run_cost, dense_cost;

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            std::vector<const Sequence*> batch;
            batch.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k)
                batch.push_back(&data.sequences[order[k]]);

            ForwardResult fr = forward_train(model, batch, cfg, rng);
            if (!std::isfinite(fr.loss))
                throw std::runtime_error("train_loop: training diverged at epoch " +
                                         std::to_string(epoch) +
                                         " (loss = " + std::to_string(fr.loss) + ")");
            Gradients g = backward(model, fr.cache, cfg);

            auto pv = tensor_views(model.gru, &*model.readout);
            auto gv = tensor_views(g.gru, &g.readout);
            auto vv = tensor_views(velocity.gru, &velocity.readout);
            for (std::size_t k = 0; k < pv.size(); ++k)
                for (std::size_t i = 0; i < pv[k].size(); ++i) {
                    vv[k][i] = cfg.momentum * vv[k][i] - cfg.learning_rate * gv[k][i];
                    pv[k][i] += vv[k][i];
                }

            const double bs = static_cast<double>(batch.size());
            loss_sum += fr.loss * bs;
            task_sum += fr.task_loss * bs;
            sparse_sum += fr.sparsity_loss * bs;
            correct += fr.correct;
            occ_x_sum += fr.mean_occ_x;
            occ_h_sum += fr.mean_occ_h;
            ++batches;
            run_cost.merge(fr.counters);
            dense_cost.merge(fr.dense_cost);
        }

        EpochMetrics em;
        em.epoch = epoch;
        const double n = static_cast<double>(order.size());
        em.loss = loss_sum / n;
        em.task_loss = task_sum / n;
        em.sparsity_loss = sparse_sum / n;
        em.accuracy = static_cast<double>(correct) / n;
        em.mean_occ_x = occ_x_sum / static_cast<double>(batches);
        em.mean_occ_h = occ_h_sum / static_cast<double>(batches);
        if (cfg.mode == TrainMode::Delta && run_cost.macs > 0) {
            const SpeedupPair sp = measured_speedup(run_cost, dense_cost);
            em.speedup_comp = sp.comp;
            em.speedup_mem = sp.mem;
        }
        result.history.push_back(em);
    }
    return result;
}

GruModel init_model(std::size_t n_x, std::size_t n_h, std::size_t n_classes,
                    std::uint64_t seed, const std::optional<QFormat>& q, Scalar theta) {
    check(n_x >= 1 && n_h >= 1, "init_model: sizes must be >= 1");
    Rng rng(seed);
    auto fill = [&](Matrix& m, std::size_t rows, std::size_t cols) {
        m = Matrix(rows, cols);
        const double s = 1.0 / std::sqrt(static_cast<double>(cols));
        for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = rng.uniform(-s, s);
    };
    GruModel model;
    fill(model.gru.w_xr, n_h, n_x);
    fill(model.gru.w_xu, n_h, n_x);
    fill(model.gru.w_xc, n_h, n_x);
    fill(model.gru.w_hr, n_h, n_h);
    fill(model.gru.w_hu, n_h, n_h);
    fill(model.gru.w_hc, n_h, n_h);
    model.gru.b_r = Vector(n_h);
    model.gru.b_u = Vector(n_h);
    model.gru.b_c = Vector(n_h);
    if (n_classes > 0) {
        Readout ro;
        fill(ro.w, n_classes, n_h);
        ro.b = Vector(n_classes);
        model.readout = std::move(ro);
    }
    model.qformat = q;
    model.theta = theta;
    return model;
}

DenseEval evaluate_dense(const GruModel& m, const SequenceDataset& data,
                         const std::optional<QFormat>& q) {
    check(m.readout.has_value(), "evaluate_dense: model has no readout");
    DenseEval out;
    std::size_t correct = 0;
    for (const Sequence& seq : data.sequences) {
        std::vector<Vector> xs = to_steps(seq.features);
        if (q)
            for (Vector& x : xs) quantize_in_place(x, *q);
        const std::vector<Vector> hs =
            gru_sequence(m.gru, xs, Vector(m.gru.hidden_size()), q, out.counters);
        SeqCache sc;
        apply_readout(*m.readout, hs, seq.label, sc);
        if (argmax(sc.probs) == static_cast<std::size_t>(seq.label)) ++correct;
    }
    out.accuracy =
        data.sequences.empty()
            ? 0.0
            : static_cast<double>(correct) / static_cast<double>(data.sequences.size());
    return out;
}

DeltaEval evaluate_delta(const GruModel& m, const SequenceDataset& data, Scalar theta,
                         const std::optional<QFormat>& q, bool weight_sparsity) {
    check(m.readout.has_value(), "evaluate_delta: model has no readout");
    const DeltaWeights weights = weight_sparsity ? DeltaWeights::sparse(m.gru)
                                                 : DeltaWeights::dense(m.gru);
    DeltaEval out;
    out.weight_occupancy = weights.weight_occupancy();
    std::size_t correct = 0;
    double occ_x_sum = 0, occ_h_sum = 0;
    std::size_t total_steps = 0;
    for (const Sequence& seq : data.sequences) {
        const std::vector<Vector> xs = to_steps(seq.features);
        const DeltaRunResult run =
            delta_gru_sequence(m.gru, xs, theta, q, out.counters, &weights);
        for (const StepStats& st : run.steps) {
            occ_x_sum += st.occupancy_x;
            occ_h_sum += st.occupancy_h;
        }
        total_steps += run.steps.size();
        SeqCache sc;
        apply_readout(*m.readout, run.hs, seq.label, sc);
        if (argmax(sc.probs) == static_cast<std::size_t>(seq.label)) ++correct;
    }
    if (total_steps > 0) {
        out.mean_occ_x = occ_x_sum / static_cast<double>(total_steps);
        out.mean_occ_h = occ_h_sum / static_cast<double>(total_steps);
    }
    out.accuracy =
        data.sequences.empty()
            ? 0.0
            : static_cast<double>(correct) / static_cast<double>(data.sequences.size());
    return out;
}

double blended_occupancy(std::size_t n_x, std::size_t n_h, double occ_x, double occ_h) {
    const double nx = static_cast<double>(n_x);
    const double nh = static_cast<double>(n_h);
    return (occ_x * nx + occ_h * nh) / (nx + nh);
}

} // namespace dn
