#include "dn/tensor.hpp"

#include "dn/kernels.hpp"

namespace dn {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Scalar quantize(Scalar theta, const QFormat& q) {
    Scalar out;
    kernels::active().quantize(&theta, &out, q.scale(), q.inv_scale(), q.bound(), 1);
    return out;
}

Vector quantize_vector(const Vector& v, const QFormat& q) {
    Vector out(v.size());
    kernels::active().quantize(v.data(), out.data(), q.scale(), q.inv_scale(),
                               q.bound(), v.size());
    return out;
}

void quantize_in_place(Vector& v, const QFormat& q) {
    kernels::active().quantize(v.data(), v.data(), q.scale(), q.inv_scale(),
                               q.bound(), v.size());
}

Vector matvec_dense(const Matrix& w, const Vector& x, CostCounters& counters) {
    check(w.cols() == x.size(), "matvec_dense: W.cols != x.length");
    Vector r(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const Scalar* row = w.data() + i * w.cols();
        Scalar acc = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) acc += row[j] * x[j];
        r[i] = acc;
    }
    counters.macs += w.rows() * w.cols();
    counters.weight_fetches += w.rows() * w.cols();
    counters.state_reads += w.cols();
    counters.state_writes += w.rows();
    return r;
}

} // namespace dn
