#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dn/model.hpp"
#include "dn/tensor.hpp"

namespace dn {

// Malformed file content; message carries "path:line:".
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structurally valid file whose pieces disagree (e.g. a matrix block that
// contradicts the header dimensions); message names the offending block.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Sequence {
    Matrix features; // T x n_x
    int label = 0;
};

struct SequenceDataset {
    std::vector<Sequence> sequences;
    std::size_t n_classes = 0;
    std::size_t n_x = 0;
    // generation metadata
    double smoothness = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

// Temporally redundant synthetic sequences. Each class is a distinct
// slowly varying prototype (sum of low-frequency sinusoids with
// class-specific frequencies and phases); each sample adds AR(1) noise
// with one-step autocorrelation `smoothness` and stationary std `noise`.
// Labels cycle through the classes. When q is given, features are clipped
// to the representable range at generation.
SequenceDataset gen_synthetic(std::size_t n_classes, std::size_t n_x, std::size_t len,
                              double smoothness, double noise, std::size_t count,
                              std::uint64_t seed,
                              const std::optional<QFormat>& q = std::nullopt);

// One Vector per timestep, in engine order.
std::vector<Vector> to_steps(const Matrix& features);

// Line-oriented text formats; values printed with 17 significant digits so
// round-trips are exact. See README for the exact layouts.
void save_dataset(const std::string& path, const SequenceDataset& ds);
SequenceDataset load_dataset(const std::string& path);

void save_model(const std::string& path, const GruModel& m);
GruModel load_model(const std::string& path);

} // namespace dn
