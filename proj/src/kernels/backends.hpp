#pragma once

#include "dn/kernels.hpp"

namespace dn::kernels {

// Each returns nullptr when the backend is not compiled in or the CPU
// lacks the instruction set.
const Ops* avx2_backend();
const Ops* neon_backend();

} // namespace dn::kernels
