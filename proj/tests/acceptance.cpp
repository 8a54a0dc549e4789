// Acceptance suite. Each criterion prints exactly one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Everything is seeded,
// so reruns produce identical numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dn/cost.hpp"
#include "dn/data.hpp"
#include "dn/delta_gru.hpp"
#include "dn/gru_ref.hpp"
#include "dn/rng.hpp"
#include "dn/sparse.hpp"
#include "dn/train.hpp"

using namespace dn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

GruParams random_params(std::size_t nx, std::size_t nh, std::uint64_t seed) {
    Rng rng(seed);
    auto fill = [&](Matrix& m, std::size_t r, std::size_t c) {
        m = Matrix(r, c);
        const double s = 1.0 / std::sqrt(static_cast<double>(c));
        for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = rng.uniform(-s, s);
    };
    GruParams p;
    fill(p.w_xr, nh, nx);
    fill(p.w_xu, nh, nx);
    fill(p.w_xc, nh, nx);
    fill(p.w_hr, nh, nh);
    fill(p.w_hu, nh, nh);
    fill(p.w_hc, nh, nh);
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

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// --- criterion 1: exactness of the delta engine at theta = 0 ------------

Outcome criterion_exactness() {
    const std::size_t sizes[][2] = {{8, 8},  {32, 16}, {128, 64}, {8, 16}, {32, 32},
                                    {128, 32}, {8, 4},  {32, 8},  {128, 16}};
    Rng rng(1001);
    double worst = 0.0;
    int nets = 0;
    for (int round = 0; round < 3 && nets < 20; ++round) {
        for (const auto& sz : sizes) {
            if (nets >= 20) break;
            const std::size_t nh = sz[0], nx = sz[1];
            const GruParams p = random_params(nx, nh, 2000 + nets);
            std::vector<Vector> xs(1000, Vector(nx));
            for (auto& x : xs)
                for (std::size_t i = 0; i < nx; ++i) x[i] = rng.uniform(-1.0, 1.0);
            CostCounters cd, cs;
            const auto dense = gru_sequence(p, xs, Vector(nh), std::nullopt, cd);
            const DeltaRunResult delta =
                delta_gru_sequence(p, xs, 0.0, std::nullopt, cs);
            for (std::size_t t = 0; t < xs.size(); ++t)
                for (std::size_t i = 0; i < nh; ++i)
                    worst = std::max(worst,
                                     std::fabs(delta.hs[t][i] - dense[t][i]));
            ++nets;
        }
    }
    Outcome o;
    o.pass = worst <= 1e-9;
    o.detail = "20 nets x 1000 steps, max |h_delta - h_dense| = " + fmt("%.3g", worst) +
               " (<= 1e-9)";
    return o;
}

// --- criterion 2: references stay within theta of the signal ------------

Outcome criterion_drift() {
    Rng rng(1002);
    const std::size_t nx = 25, nh = 25;
    std::size_t component_steps = 0;
    double worst_margin = 0.0;
    bool ok = true;
    for (const double theta : {0.1, 0.25, 0.5}) {
        const GruParams p = random_params(nx, nh, 3000 + static_cast<int>(theta * 100));
        const DeltaWeights w = DeltaWeights::dense(p);
        DeltaGruState s = delta_init(p);
        CostCounters c;
        for (int t = 0; t < 700; ++t) {
            Vector x(nx);
            for (auto& v : x) v = rng.uniform(-1.5, 1.5);
            const Vector h_before = s.h_prev;
            delta_gru_step(w, s, x, theta, std::nullopt, c);
            for (std::size_t i = 0; i < nx; ++i) {
                const double gap = std::fabs(s.x_ref[i] - x[i]);
                worst_margin = std::max(worst_margin, gap - theta);
                if (gap > theta) ok = false;
            }
            for (std::size_t i = 0; i < nh; ++i) {
                const double gap = std::fabs(s.h_ref[i] - h_before[i]);
                worst_margin = std::max(worst_margin, gap - theta);
                if (gap > theta) ok = false;
            }
            component_steps += nx + nh;
        }
    }
    Outcome o;
    o.pass = ok && component_steps >= 100000;
    o.detail = std::to_string(component_steps) +
               " component-steps over theta {0.1, 0.25, 0.5}, worst gap-theta = " +
               fmt("%.3g", worst_margin);
    return o;
}

// --- criterion 3: measured counters match the printed formulas ----------

Outcome criterion_counters() {
    const std::size_t n = 100;
    Rng rng(1003);
    Matrix m(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        rng.shuffle(rows);
        for (std::size_t k = 0; k < 20; ++k) m(rows[k], j) = rng.uniform(0.5, 1.5);
    }
    const SparseWeights sw = compress(m);
    Vector delta(n);
    std::vector<std::size_t> cols(n);
    for (std::size_t i = 0; i < n; ++i) cols[i] = i;
    rng.shuffle(cols);
    for (std::size_t k = 0; k < 20; ++k) delta[cols[k]] = rng.uniform(0.5, 1.5);
    Vector acc(n);
    CostCounters c;
    delta_accumulate(sw, delta, acc, c);

    const CostReport r = theoretical_costs(100, 0.1, 1.0);
    Outcome o;
    o.pass = sw.occupancy() == 0.2 && c.macs == 400 && r.comp_sparse == 1200.0;
    o.detail = "o_m=0.2, o_c=0.2, n=100: charged MACs = " + std::to_string(c.macs) +
               " (= 400); theoretical comp_sparse(100, 0.1, 1) = " +
               fmt("%.0f", r.comp_sparse) + " (= 1200)";
    return o;
}

// --- criterion 4: sparse kernel equals the dense product exactly --------

Outcome criterion_sparse_equivalence() {
    Rng rng(1004);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t rows = 1 + rng.index(20);
        const std::size_t cols = 1 + rng.index(20);
        Matrix m(rows, cols);
        const double keep = rng.uniform(0.05, 0.95);
        for (std::size_t i = 0; i < rows * cols; ++i)
            if (rng.uniform() < keep) m.data()[i] = rng.uniform(-4.0, 4.0);
        Vector delta(cols);
        for (auto& d : delta)
            if (rng.uniform() < 0.4) d = rng.uniform(-4.0, 4.0);
        const SparseWeights sw = compress(m);
        Vector acc(rows);
        CostCounters c1, c2;
        delta_accumulate(sw, delta, acc, c1);
        const Vector want = matvec_dense(m, delta, c2);
        for (std::size_t i = 0; i < rows; ++i)
            if (acc[i] != want[i]) ++mismatches;
    }
    Outcome o;
    o.pass = mismatches == 0;
    o.detail = "1000 random (matrix, sparse delta) pairs, " +
               std::to_string(mismatches) + " element mismatches (exact compare)";
    return o;
}

// --- criterion 5: BPTT gradients vs central finite differences ----------

double fd_worst_error(const SequenceDataset& ds, const TrainConfig& cfg,
                      std::uint64_t model_seed) {
    GruModel model = init_model(ds.n_x, 6, ds.n_classes, model_seed);
    std::vector<const Sequence*> batch;
    for (const Sequence& s : ds.sequences) batch.push_back(&s);

    Rng rng(4242);
    const ForwardResult fr = forward_train(model, batch, cfg, rng);
    Gradients analytic = backward(model, fr.cache, cfg);

    auto gv = tensor_views(analytic.gru, &analytic.readout);
    auto pv = tensor_views(model.gru, &*model.readout);
    const double eps = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < pv.size(); ++k)
        for (std::size_t i = 0; i < pv[k].size(); ++i) {
            const double save = pv[k][i];
            Rng r1(4242), r2(4242);
            pv[k][i] = save + eps;
            const double lp = forward_train(model, batch, cfg, r1).loss;
            pv[k][i] = save - eps;
            const double lm = forward_train(model, batch, cfg, r2).loss;
            pv[k][i] = save;
            const double fd = (lp - lm) / (2.0 * eps);
            const double g = gv[k][i];
            const double rel =
                std::fabs(g - fd) / std::max({std::fabs(g), std::fabs(fd), 1e-6});
            worst = std::max(worst, rel);
        }
    return worst;
}

Outcome criterion_gradients() {
    const SequenceDataset ds = gen_synthetic(3, 4, 5, 0.7, 0.3, 6, 1005);
    TrainConfig dense;
    dense.mode = TrainMode::Dense;
    TrainConfig delta;
    delta.mode = TrainMode::Delta;
    delta.theta_train = 0.0;
    const double e_dense = fd_worst_error(ds, dense, 1006);
    const double e_delta = fd_worst_error(ds, delta, 1006);
    Outcome o;
    o.pass = e_dense < 1e-4 && e_delta < 1e-4;
    o.detail = "6 units x 5 steps, eps=1e-5: max rel err dense = " +
               fmt("%.3g", e_dense) + ", delta@0 = " + fmt("%.3g", e_delta) +
               " (< 1e-4)";
    return o;
}

// --- criterion 6: desk-scale accuracy/speedup analogue ------------------

struct Trained {
    GruModel dense;
    GruModel delta_b0;
    GruModel delta_b1;
    SequenceDataset train;
    SequenceDataset test;
};

Trained train_models() {
    Trained t;
    t.train = gen_synthetic(5, 16, 100, 0.97, 0.15, 500, 101);
    t.test = gen_synthetic(5, 16, 100, 0.97, 0.15, 200, 202);

    TrainConfig cfg;
    cfg.mode = TrainMode::Dense;
    cfg.learning_rate = 0.1;
    cfg.epochs = 40;
    cfg.batch_size = 16;
    cfg.seed = 11;
    const GruModel init = init_model(16, 64, 5, 11);
    t.dense = train_loop(init, t.train, cfg).model;

    cfg.mode = TrainMode::Delta;
    cfg.theta_train = 0.1;
    t.delta_b0 = train_loop(init, t.train, cfg).model;

    cfg.beta = 1.0;
    t.delta_b1 = train_loop(init, t.train, cfg).model;
    return t;
}

Outcome criterion_tradeoff(const Trained& t, double* dense_acc_out) {
    const DenseEval base = evaluate_dense(t.dense, t.test, std::nullopt);
    *dense_acc_out = base.accuracy;

    // (a) dense-trained model run as a delta network over the sweep grid
    const std::vector<double> grid = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    double best_theta = -1.0, acc_at_best = 0.0, sp_at_best = 0.0;
    std::string table = "\n    theta  accuracy  speedup\n";
    for (const double theta : grid) {
        const DeltaEval ev = evaluate_delta(t.dense, t.test, theta, std::nullopt, false);
        const SpeedupPair sp = measured_speedup(ev.counters, base.counters);
        table += "    " + fmt("%-6.2f", theta) + " " + fmt("%-9.3f", ev.accuracy) + " " +
                 fmt("%-7.2f", sp.comp) + "\n";
        if (sp.comp >= 2.0 && theta > best_theta) {
            best_theta = theta;
            acc_at_best = ev.accuracy;
            sp_at_best = sp.comp;
        }
    }
    const bool a_pass = best_theta >= 0.0 && base.accuracy - acc_at_best <= 0.03;

    // (b) delta-trained model evaluated at its training threshold
    const DeltaEval b0 = evaluate_delta(t.delta_b0, t.test, 0.1, std::nullopt, false);
    const SpeedupPair sp_b0 = measured_speedup(b0.counters, base.counters);
    const bool b_pass = b0.accuracy >= base.accuracy - 0.01 && sp_b0.comp >= 3.0;

    // (c) the L1 delta cost buys strictly more speedup at equal theta
    const DeltaEval b1 = evaluate_delta(t.delta_b1, t.test, 0.1, std::nullopt, false);
    const SpeedupPair sp_b1 = measured_speedup(b1.counters, base.counters);
    const bool c_pass = sp_b1.comp > sp_b0.comp && b0.accuracy - b1.accuracy <= 0.02;

    Outcome o;
    o.pass = a_pass && b_pass && c_pass;
    o.detail =
        "dense baseline acc " + fmt("%.3f", base.accuracy) + table +
        "    (a) largest theta with speedup >= 2: " + fmt("%.2f", best_theta) +
        ", acc " + fmt("%.3f", acc_at_best) + " (drop " +
        fmt("%.3f", base.accuracy - acc_at_best) + " <= 0.03), speedup " +
        fmt("%.2f", sp_at_best) + (a_pass ? " [ok]" : " [FAIL]") +
        "\n    (b) delta-trained @0.1: acc " + fmt("%.3f", b0.accuracy) +
        " (>= baseline - 0.01), speedup " + fmt("%.2f", sp_b0.comp) + " (>= 3)" +
        (b_pass ? " [ok]" : " [FAIL]") + "\n    (c) beta=1 @0.1: speedup " +
        fmt("%.2f", sp_b1.comp) + " > " + fmt("%.2f", sp_b0.comp) + ", acc " +
        fmt("%.3f", b1.accuracy) + " (drop " + fmt("%.3f", b0.accuracy - b1.accuracy) +
        " <= 0.02)" + (c_pass ? " [ok]" : " [FAIL]");
    return o;
}

// --- criterion 7: quantization properties and end-to-end Q3.4 -----------

Outcome criterion_quantization(const Trained& t, double dense_acc) {
    Rng rng(1007);
    const QFormat q(3, 4);
    const double half_step = std::ldexp(1.0, -q.frac_bits - 1);
    std::size_t bad = 0;
    for (int i = 0; i < 1000000; ++i) {
        const double theta = rng.uniform(-8.0, 8.0);
        const double once = quantize(theta, q);
        if (quantize(once, q) != once) ++bad;
        if (std::fabs(theta) < q.max_value() && std::fabs(once - theta) > half_step)
            ++bad;
    }

    // End-to-end: same weights, Q3.4 activations at theta = 0. The
    // accuracy change is reported, not asserted.
    const DeltaEval qd = evaluate_delta(t.dense, t.test, 0.0, q, false);

    Outcome o;
    o.pass = bad == 0;
    o.detail = "10^6 scalars: " + std::to_string(bad) +
               " idempotence/half-step violations; Q3.4 end-to-end at theta=0: acc " +
               fmt("%.3f", qd.accuracy) + " vs float " + fmt("%.3f", dense_acc) +
               " (change " + fmt("%+.3f", qd.accuracy - dense_acc) + ", reported only)";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    const bool only = argc > 1;
    const int want = only ? std::atoi(argv[1]) : 0;

    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o, double secs) {
        if (!o.pass) ++failures;
        std::printf("%s  criterion %d: %s  [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", id,
                    name, o.detail.c_str(), secs);
        std::fflush(stdout);
    };
    auto timed = [&](int id, const char* name, auto&& fn) {
        if (only && id != want) return;
        const auto t0 = std::chrono::steady_clock::now();
        const Outcome o = fn();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(id, name, o, secs);
    };

    timed(1, "theta-zero exactness", criterion_exactness);
    timed(2, "reference drift bound", criterion_drift);
    timed(3, "counter/formula agreement", criterion_counters);
    timed(4, "sparse kernel equivalence", criterion_sparse_equivalence);
    timed(5, "gradient correctness", criterion_gradients);

    if (!only || want == 6 || want == 7) {
        const auto t0 = std::chrono::steady_clock::now();
        const Trained t = train_models();
        const double train_secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("-- trained dense / delta / delta+L1 models in %.1fs\n", train_secs);

        double dense_acc = 0.0;
        const auto t6 = std::chrono::steady_clock::now();
        const Outcome o6 = criterion_tradeoff(t, &dense_acc);
        if (!only || want == 6)
            report(6, "accuracy/speedup tradeoff", o6,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t6)
                           .count() +
                       train_secs);

        if (!only || want == 7) {
            const auto t7 = std::chrono::steady_clock::now();
            const Outcome o7 = criterion_quantization(t, dense_acc);
            report(7, "quantization", o7,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t7)
                       .count());
        }
    }

    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all criteria passed\n");
    return failures == 0 ? 0 : 1;
}
