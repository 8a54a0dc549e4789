#pragma once

#include <optional>

#include "dn/gru_ref.hpp"
#include "dn/tensor.hpp"

namespace dn {

// Affine classification head over the mean-over-time hidden state.
struct Readout {
    Matrix w; // n_classes x n_h
    Vector b; // n_classes

    std::size_t n_classes() const { return w.rows(); }
};

// A GRU layer plus optional head, activation format and default
// threshold; what the model file stores.
struct GruModel {
    GruParams gru;
    std::optional<Readout> readout;
    std::optional<QFormat> qformat;
    Scalar theta = 0.0;

    std::size_t n_classes() const { return readout ? readout->n_classes() : 0; }
};

} // namespace dn
