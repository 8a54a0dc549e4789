#include <doctest.h>

#include <cmath>

#include "dn/delta_gru.hpp"
#include "dn/rng.hpp"
#include "test_util.hpp"

using namespace dn;
using testutil::random_params;
using testutil::random_sequence;
using testutil::zero_params;

TEST_CASE("delta_init: memories start at their biases") {
    SUBCASE("zero biases give zero memories") {
        const DeltaGruState s = delta_init(zero_params(3, 4));
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(s.m_r[i] == 0.0);
            CHECK(s.m_u[i] == 0.0);
            CHECK(s.m_xc[i] == 0.0);
            CHECK(s.m_hc[i] == 0.0);
        }
    }
    SUBCASE("biases are copied; M_hc is zero regardless") {
        GruParams p = zero_params(3, 2);
        p.b_r = Vector{1.0, 2.0};
        p.b_u = Vector{-0.5, 0.25};
        p.b_c = Vector{3.0, -3.0};
        const DeltaGruState s = delta_init(p);
        CHECK(s.m_r == p.b_r);
        CHECK(s.m_u == p.b_u);
        CHECK(s.m_xc == p.b_c);
        CHECK(s.m_hc == Vector{0.0, 0.0});
        CHECK(s.x_ref == Vector(3));
        CHECK(s.h_ref == Vector(2));
        CHECK(s.h_prev == Vector(2));
    }
}

TEST_CASE("threshold_delta: worked examples") {
    SUBCASE("no change") {
        const Vector v{0.5, -1.0};
        const ThresholdResult r = threshold_delta(v, v, 0.3);
        CHECK(r.nnz == 0);
        CHECK(r.delta == Vector{0.0, 0.0});
        CHECK(r.new_ref == v);
    }
    SUBCASE("theta = 0 keeps exactly-equal components at rest") {
        const ThresholdResult r = threshold_delta(Vector{1.0, 2.0}, Vector{0.0, 2.0}, 0.0);
        CHECK(r.nnz == 1);
        CHECK(r.delta == Vector{1.0, 0.0});
        CHECK(r.new_ref == Vector{1.0, 2.0});
    }
    SUBCASE("componentwise rule at theta = 0.5") {
        const ThresholdResult r =
            threshold_delta(Vector{0.4, 0.6}, Vector{0.0, 0.0}, 0.5);
        CHECK(r.nnz == 1);
        CHECK(r.delta == Vector{0.0, 0.6});
        CHECK(r.new_ref == Vector{0.0, 0.6});
    }
    SUBCASE("contract checks") {
        CHECK_THROWS_AS(threshold_delta(Vector(2), Vector(3), 0.1), ContractViolation);
        CHECK_THROWS_AS(threshold_delta(Vector(2), Vector(2), -0.1), ContractViolation);
    }
}

TEST_CASE("threshold_delta: monotone in theta") {
    Rng rng(50);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector cur{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vector ref{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double t1 = rng.uniform(0.0, 1.0);
        const double t2 = t1 + rng.uniform(0.0, 1.0);
        const ThresholdResult a = threshold_delta(cur, ref, t1);
        const ThresholdResult b = threshold_delta(cur, ref, t2);
        for (std::size_t i = 0; i < 3; ++i)
            if (a.delta[i] == 0.0) CHECK(b.delta[i] == 0.0);
    }
}

TEST_CASE("delta_gru_step: an unchanged input charges zero MACs") {
    const GruParams p = random_params(4, 6, 60);
    const DeltaWeights w = DeltaWeights::dense(p);
    DeltaGruState s = delta_init(p);
    const Vector x{0.5, -0.5, 1.0, 0.25};
    CostCounters c;
    delta_gru_step(w, s, x, 0.1, std::nullopt, c);
    const std::uint64_t after_first = c.macs;
    CHECK(after_first > 0);

    // Same input again; h settles only if its change stays under theta,
    // so feed the same x until deltas die out, then check zero charge.
    for (int i = 0; i < 50; ++i) delta_gru_step(w, s, x, 0.1, std::nullopt, c);
    const std::uint64_t before = c.macs;
    const StepResult r = delta_gru_step(w, s, x, 0.1, std::nullopt, c);
    CHECK(c.macs == before);
    CHECK(r.stats.nnz_dx == 0);
    CHECK(r.stats.nnz_dh == 0);
}

TEST_CASE("delta_gru_step: single fired input column charges 3*n_h MACs") {
    const std::size_t nx = 5, nh = 7;
    const GruParams p = random_params(nx, nh, 61);
    const DeltaWeights w = DeltaWeights::dense(p);
    DeltaGruState s = delta_init(p);
    Vector x(nx);
    x[2] = 1.0; // only component above theta = 0.5 on step 1
    CostCounters c;
    const StepResult r = delta_gru_step(w, s, x, 0.5, std::nullopt, c);
    CHECK(r.stats.nnz_dx == 1);
    CHECK(r.stats.nnz_dh == 0); // h unchanged from init
    CHECK(c.macs == 3 * nh);
    CHECK(c.weight_fetches == 3 * nh);
}

TEST_CASE("delta engine at theta=0 tracks the dense reference") {
    Rng rng(62);
    for (const std::size_t nh : {4u, 16u}) {
        const std::size_t nx = 5;
        const GruParams p = random_params(nx, nh, 600 + nh);
        const auto xs = random_sequence(rng, 200, nx);
        CostCounters cd, cs;
        const auto dense = gru_sequence(p, xs, Vector(nh), std::nullopt, cd);
        const DeltaRunResult delta = delta_gru_sequence(p, xs, 0.0, std::nullopt, cs);
        REQUIRE(delta.hs.size() == dense.size());
        double max_dev = 0.0;
        for (std::size_t t = 0; t < dense.size(); ++t)
            for (std::size_t i = 0; i < nh; ++i)
                max_dev = std::max(max_dev, std::fabs(delta.hs[t][i] - dense[t][i]));
        CHECK(max_dev <= 1e-9);
    }
}

TEST_CASE("references never drift more than theta from the signal") {
    Rng rng(63);
    const std::size_t nx = 6, nh = 8;
    const GruParams p = random_params(nx, nh, 64);
    const DeltaWeights w = DeltaWeights::dense(p);
    CostCounters c;
    for (const double theta : {0.1, 0.25, 0.5}) {
        DeltaGruState s = delta_init(p);
        for (int t = 0; t < 100; ++t) {
            Vector x(nx);
            for (auto& v : x) v = rng.uniform(-1.5, 1.5);
            const Vector h_before = s.h_prev;
            delta_gru_step(w, s, x, theta, std::nullopt, c);
            for (std::size_t i = 0; i < nx; ++i)
                CHECK(std::fabs(s.x_ref[i] - x[i]) <= theta);
            for (std::size_t i = 0; i < nh; ++i)
                CHECK(std::fabs(s.h_ref[i] - h_before[i]) <= theta);
        }
    }
}

TEST_CASE("memory consistency: M_xc telescopes to W_xc x + b_c") {
    SUBCASE("dyadic inputs reproduce the product exactly") {
        GruParams p = zero_params(3, 4);
        // dyadic weights and biases: every partial sum is exact
        p.w_xc(0, 0) = 0.5;
        p.w_xc(1, 1) = -0.25;
        p.w_xc(2, 2) = 1.0;
        p.w_xc(3, 0) = 2.0;
        p.b_c = Vector{0.125, -1.0, 0.0, 0.5};
        const DeltaWeights w = DeltaWeights::dense(p);
        DeltaGruState s = delta_init(p);
        Rng rng(65);
        CostCounters c;
        Vector x(3);
        for (int t = 0; t < 30; ++t) {
            for (auto& v : x) v = static_cast<double>(rng.index(64)) * 0.03125 - 1.0;
            delta_gru_step(w, s, x, 0.0, std::nullopt, c);
            for (std::size_t i = 0; i < 4; ++i) {
                double want = p.b_c[i];
                for (std::size_t j = 0; j < 3; ++j) want += p.w_xc(i, j) * x[j];
                CHECK(s.m_xc[i] == want);
            }
        }
    }
    SUBCASE("random inputs stay within accumulation tolerance") {
        const GruParams p = random_params(5, 6, 66);
        const DeltaWeights w = DeltaWeights::dense(p);
        DeltaGruState s = delta_init(p);
        Rng rng(67);
        CostCounters c;
        for (int t = 0; t < 200; ++t) {
            Vector x(5);
            for (auto& v : x) v = rng.uniform(-1.0, 1.0);
            delta_gru_step(w, s, x, 0.0, std::nullopt, c);
            for (std::size_t i = 0; i < 6; ++i) {
                double want = p.b_c[i];
                for (std::size_t j = 0; j < 5; ++j) want += p.w_xc(i, j) * x[j];
                CHECK(s.m_xc[i] == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("charged MACs equal 3*n_h*(nnz_dx + nnz_dh) with dense weights") {
    Rng rng(68);
    const std::size_t nx = 9, nh = 11;
    const GruParams p = random_params(nx, nh, 69);
    const DeltaWeights w = DeltaWeights::dense(p);
    DeltaGruState s = delta_init(p);
    for (int t = 0; t < 40; ++t) {
        Vector x(nx);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        CostCounters c;
        const StepResult r = delta_gru_step(w, s, x, 0.2, std::nullopt, c);
        CHECK(c.macs == 3 * nh * (r.stats.nnz_dx + r.stats.nnz_dh));
        CHECK(c.weight_fetches == c.macs);
    }
}

TEST_CASE("step wrapper charges the documented linear terms") {
    const std::size_t nx = 4, nh = 6;
    const GruParams p = random_params(nx, nh, 70);
    const DeltaWeights w = DeltaWeights::dense(p);
    DeltaGruState s = delta_init(p);
    CostCounters c;
    delta_gru_step(w, s, Vector(nx), 0.5, std::nullopt, c);
    // per step: 3 input products + 3 hidden products + gate stage
    CHECK(c.state_reads == 3 * (2 * nx + nh) + 3 * (2 * nh + nh) + nh);
    CHECK(c.state_writes == 3 * nh + 3 * nh + nh);
    CHECK(c.elementwise_ops == 3 * (nx + nh) + 3 * (2 * nh) + 9 * nh);
}

TEST_CASE("sparse and dense weight paths produce identical states") {
    Rng rng(71);
    GruParams p = random_params(6, 8, 72);
    // plant exact zeros so compression actually prunes
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (rng.uniform() < 0.5) p.w_xr(i, j) = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (rng.uniform() < 0.5) p.w_hc(i, j) = 0.0;
    const DeltaWeights wd = DeltaWeights::dense(p);
    const DeltaWeights ws = DeltaWeights::sparse(p);
    CHECK(ws.weight_occupancy() < 1.0);

    const auto xs = random_sequence(rng, 50, 6);
    CostCounters cd, cs;
    const DeltaRunResult rd = delta_gru_sequence(p, xs, 0.15, std::nullopt, cd, &wd);
    const DeltaRunResult rs = delta_gru_sequence(p, xs, 0.15, std::nullopt, cs, &ws);
    for (std::size_t t = 0; t < xs.size(); ++t) CHECK(rd.hs[t] == rs.hs[t]);
    CHECK(cs.macs < cd.macs);
}

TEST_CASE("delta_gru_sequence: constant input fires once, then goes quiet") {
    const GruParams p = zero_params(3, 4); // zero weights keep h at zero
    Vector x{1.0, -1.0, 2.0};              // everything above theta on step 1
    std::vector<Vector> xs(5, x);
    CostCounters c;
    const DeltaRunResult r = delta_gru_sequence(p, xs, 0.25, std::nullopt, c);
    REQUIRE(r.steps.size() == 5);
    CHECK(r.steps[0].occupancy_x == 1.0);
    for (std::size_t t = 1; t < 5; ++t) CHECK(r.steps[t].occupancy_x == 0.0);
    for (const StepStats& st : r.steps) CHECK(st.occupancy_h == 0.0);
}

TEST_CASE("delta_gru_sequence: empty input") {
    const GruParams p = random_params(3, 4, 73);
    CostCounters c;
    const DeltaRunResult r = delta_gru_sequence(p, {}, 0.1, std::nullopt, c);
    CHECK(r.hs.empty());
    CHECK(r.steps.empty());
    CHECK(r.mean_occupancy_x == 0.0);
}

TEST_CASE("delta_gru_sequence: slow sinusoid keeps occupancy below one") {
    const GruParams p = random_params(2, 8, 74);
    std::vector<Vector> xs;
    for (int t = 0; t < 200; ++t)
        xs.push_back(Vector{std::sin(0.05 * t), std::cos(0.04 * t)});
    CostCounters c;
    const DeltaRunResult r = delta_gru_sequence(p, xs, 0.1, std::nullopt, c);
    CHECK(r.mean_occupancy_x < 1.0);
    CHECK(r.mean_occupancy_x > 0.0);
    CHECK(r.mean_occupancy_h < 1.0);
}

TEST_CASE("quantized delta run keeps references on the grid") {
    const GruParams p = random_params(3, 5, 75, 0.9);
    const QFormat q(3, 4);
    Rng rng(76);
    const auto xs = random_sequence(rng, 40, 3);
    const DeltaWeights w = DeltaWeights::dense(p);
    DeltaGruState s = delta_init(p);
    CostCounters c;
    for (const Vector& x : xs) {
        const Vector xq = quantize_vector(x, q);
        delta_gru_step(w, s, xq, 0.1, q, c);
        for (std::size_t i = 0; i < s.h_ref.size(); ++i)
            CHECK(s.h_ref[i] == quantize(s.h_ref[i], q));
        for (std::size_t i = 0; i < s.x_ref.size(); ++i)
            CHECK(s.x_ref[i] == quantize(s.x_ref[i], q));
    }
}
