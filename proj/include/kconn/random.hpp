#pragma once

#include "kconn/numerics.hpp"

#include <cstdint>
#include <random>

namespace kconn {

/// Seeded source of complex Gaussian test data. Deterministic per seed for a
/// given standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return normal_(engine_); }
    cplx complex_normal() { return {normal() / std::sqrt(2.0), normal() / std::sqrt(2.0)}; }

    CMatrix complex_matrix(Index rows, Index cols);
    CVector complex_vector(Index n);
    CMatrix hermitian(Index n);
    CMatrix anti_hermitian(Index n);
    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of R's diagonal absorbed into Q.
    CMatrix unitary(Index n);
    /// Uniform point of the disk of given radius.
    cplx disk_point(double radius);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Unitary of size n, a deterministic function of the seed.
CMatrix random_unitary(Index n, std::uint64_t seed);

}  // namespace kconn
