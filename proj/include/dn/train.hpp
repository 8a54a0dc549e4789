#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dn/cost.hpp"
#include "dn/data.hpp"
#include "dn/model.hpp"
#include "dn/rng.hpp"

namespace dn {

enum class TrainMode { Dense, Delta };

struct TrainConfig {
    TrainMode mode = TrainMode::Dense;
    Scalar theta_train = 0.0;          // delta mode only
    std::optional<QFormat> q;          // activation rounding, straight-through backward
    Scalar noise_sigma = 0.0;          // dense mode only; zero-mean Gaussian on pre-matmul terms
    Scalar beta = 0.0;                 // weight of the L1 cost on delta-h
    Scalar learning_rate = 0.1;
    Scalar momentum = 0.9;
    std::size_t epochs = 100;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
};

// Same shapes as the parameters they differentiate.
struct Gradients {
    GruParams gru;
    Readout readout;
};

Gradients zeros_like(const GruModel& m);

// Mutable views over every parameter tensor, in a fixed order (the six
// matrices, three biases, then the readout). Used by the optimizer and by
// finite-difference checks.
std::vector<std::span<Scalar>> tensor_views(GruParams& p, Readout* readout);

// Per-sequence forward records needed by backward().
struct SeqCache {
    int label = 0;
    std::size_t steps = 0;
    // dense mode
    std::vector<Vector> x_in;    // rounded input plus noise, as fed to the products
    std::vector<Vector> h_tilde; // h_{t-1} plus noise, as fed to the products
    std::vector<Vector> v_hc;    // W_hc * h_tilde
    // delta mode
    std::vector<Vector> dx, dh;
    std::vector<std::vector<std::uint8_t>> mask_h;
    std::vector<Vector> m_hc;
    // both
    std::vector<Vector> r, u, c, h;
    Vector h_mean;
    Vector probs;
};

struct ForwardCache {
    std::vector<SeqCache> seqs;
    std::size_t delta_components = 0; // total delta-h entries across the batch
};

struct ForwardResult {
    Scalar loss = 0;
    Scalar task_loss = 0;
    Scalar sparsity_loss = 0;
    std::size_t correct = 0;
    double mean_occ_x = 1.0;
    double mean_occ_h = 1.0;
    CostCounters counters;    // what the run actually charged
    CostCounters dense_cost;  // what a dense run of the same shapes charges
    ForwardCache cache;
};

// Loss over one batch: mean cross-entropy of the mean-over-time readout,
// plus beta times the mean absolute delta-h (delta mode). Dense mode
// perturbs the pre-matmul activation terms with Gaussian noise of std
// noise_sigma; delta mode runs the thresholded engine at theta_train.
ForwardResult forward_train(const GruModel& m, const std::vector<const Sequence*>& batch,
                            const TrainConfig& cfg, Rng& rng);

// BPTT. Rounding and threshold masking backpropagate straight through:
// identity on propagated components, zero on suppressed ones.
Gradients backward(const GruModel& m, const ForwardCache& cache, const TrainConfig& cfg);

struct EpochMetrics {
    std::size_t epoch = 0;
    double loss = 0;
    double task_loss = 0;
    double sparsity_loss = 0;
    double accuracy = 0;
    double mean_occ_x = 1.0;
    double mean_occ_h = 1.0;
    double speedup_comp = 1.0;
    double speedup_mem = 1.0;

    static const char* csv_header();
    std::string csv_row() const;
};

struct TrainResult {
    GruModel model;
    std::vector<EpochMetrics> history;
};

// Plain SGD with momentum over shuffled minibatches; bit-deterministic
// given the seed. Throws on divergence (non-finite loss).
TrainResult train_loop(const GruModel& init, const SequenceDataset& data,
                       const TrainConfig& cfg);

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
GruModel init_model(std::size_t n_x, std::size_t n_h, std::size_t n_classes,
                    std::uint64_t seed, const std::optional<QFormat>& q = std::nullopt,
                    Scalar theta = 0.0);

struct DenseEval {
    double accuracy = 0;
    CostCounters counters;
};

struct DeltaEval {
    double accuracy = 0;
    double mean_occ_x = 0;
    double mean_occ_h = 0;
    CostCounters counters;
    double weight_occupancy = 1.0;
};

// Classification accuracy via the reference dense pass / the delta engine.
// Inputs are rounded at ingestion when q is set. weight_sparsity switches
// the delta run to compressed weights, charging only stored nonzeros.
DenseEval evaluate_dense(const GruModel& m, const SequenceDataset& data,
                         const std::optional<QFormat>& q);
DeltaEval evaluate_delta(const GruModel& m, const SequenceDataset& data, Scalar theta,
                         const std::optional<QFormat>& q, bool weight_sparsity);

// Quadratic-term occupancy of a delta step: charged MACs / dense MACs.
double blended_occupancy(std::size_t n_x, std::size_t n_h, double occ_x, double occ_h);

} // namespace dn
