#include "kconn/random.hpp"

namespace kconn {

CMatrix Rng::complex_matrix(Index rows, Index cols) {
    CMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = complex_normal();
    }
    return m;
}

CVector Rng::complex_vector(Index n) {
    CVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = complex_normal();
    return v;
}

CMatrix Rng::hermitian(Index n) {
    const CMatrix g = complex_matrix(n, n);
    return 0.5 * (g + g.adjoint());
}

CMatrix Rng::anti_hermitian(Index n) {
    const CMatrix g = complex_matrix(n, n);
    return 0.5 * (g - g.adjoint());
}

CMatrix Rng::unitary(Index n) {
    if (n < 1) throw std::invalid_argument("unitary: n must be >= 1");
    const CMatrix g = complex_matrix(n, n);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i) {
        const double mod = std::abs(r(i, i));
        if (mod > 0.0) q.col(i) *= r(i, i) / mod;
    }
    // one Gram-Schmidt pass to push the residual to rounding level
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < i; ++j) q.col(i) -= q.col(j).dot(q.col(i)) * q.col(j);
        q.col(i).normalize();
    }
    return q;
}

cplx Rng::disk_point(double radius) {
    const double r = radius * std::sqrt(uniform(0.0, 1.0));
    const double theta = uniform(0.0, 2.0 * 3.14159265358979323846);
    return std::polar(r, theta);
}

CMatrix random_unitary(Index n, std::uint64_t seed) {
    Rng rng(seed);
    return rng.unitary(n);
}

}  // namespace kconn
