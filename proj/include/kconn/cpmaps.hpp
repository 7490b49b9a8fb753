#pragma once

#include "kconn/base_point.hpp"
#include "kconn/connections.hpp"
#include "kconn/kernels.hpp"
#include "kconn/random.hpp"

#include <cstdint>
#include <vector>

namespace kconn::cpmaps {

using KrausList = std::vector<CMatrix>;

/// Completely positive map Psi: M_n -> M_m, Psi(a) = sum_i K_i a K_i*.
///
/// Choi matrix ordering (row-major on C^n (x) C^m): entry (i*m + alpha, j*m + beta)
/// is Psi(E_ij)(alpha, beta). The stored Kraus family is the minimal one
/// re-extracted from the Choi matrix.
class CPMap {
public:
    CPMap(Index input_dim, Index output_dim, CMatrix choi, double tau = numerics::kPinvThreshold);

    Index input_dim() const { return n_; }
    Index output_dim() const { return m_; }
    const CMatrix& choi() const { return choi_; }
    const KrausList& kraus() const { return kraus_; }
    /// Numerical rank of the Choi matrix, i.e. the number of Kraus operators.
    Index choi_rank() const { return static_cast<Index>(kraus_.size()); }

    CMatrix operator()(const CMatrix& a) const;

    /// |Psi(I_n) - I_m|
    double unitality_residual() const;
    bool is_unital(double tol = 1e-8) const { return unitality_residual() <= tol; }

private:
    Index n_;
    Index m_;
    CMatrix choi_;
    KrausList kraus_;
};

/// Throws std::invalid_argument on an empty family or inconsistent shapes.
CPMap choi_from_kraus(const KrausList& kraus);

/// Kraus operators sqrt(lambda) v for the Choi eigenpairs with lambda above
/// tau * lambda_max, in descending eigenvalue order. Throws std::invalid_argument
/// if the Choi matrix is not Hermitian PSD within that threshold.
KrausList kraus_from_choi(const CMatrix& choi, Index input_dim, Index output_dim,
                          double tau = numerics::kPinvThreshold);

/// Minimal dilation Psi(a) = V* (a (x) I_r) V with V: C^m -> C^n (x) C^r an isometry.
struct StinespringTriple {
    CMatrix v;  // (n r) x m, row index j*r + i
    Index input_dim = 0;
    Index rank = 0;

    /// lambda(a) = a (x) I_r
    CMatrix lambda(const CMatrix& a) const;
};

/// V h = sum_i (K_i* h) (x) e_i. Throws std::invalid_argument when Psi is not unital.
StinespringTriple stinespring_dilate(const CPMap& psi);

/// max over matrix units a of |Psi(a) - V* lambda(a) V|
double verify_dilation(const CPMap& psi, const StinespringTriple& s);

/// K(s, t) = Psi(s* t) on U(n), fibers C^m. Requires Psi unital.
Kernel cp_kernel(const CPMap& psi);

/// d sigma(u, a) + Psi(a) sigma(u) along u exp(t a). a must be anti-Hermitian.
CVector cp_covariant_derivative(const CPMap& psi, const Section& sigma, const CMatrix& u, const CMatrix& a,
                                double h = numerics::kDefaultStep);

/// Kernel lambda(s* t) on U(n) with fibers C^n (x) C^r.
Kernel lambda_kernel(const StinespringTriple& s);

/// Orthonormal basis (n r x m) of S0 = Ran V, from the eigenvectors of V V*.
CMatrix dilation_range_basis(const StinespringTriple& s);

/// K0(s, t) = P_S0 lambda(s* t) restricted to S0, written in the coordinates of
/// dilation_range_basis: B* lambda(s* t) B (an m x m kernel on U(n)).
Kernel compressed_lambda_kernel(const StinespringTriple& s);

/// Identity on U(n) with fiber maps delta = B* V (m x m, unitary), from the
/// fibers of cp_kernel to those of compressed_lambda_kernel.
BundleMorphism dilation_morphism(const StinespringTriple& s);

/// Identity on U(n) with fiber maps delta = V into the fibers of lambda_kernel.
BundleMorphism dilation_embedding(const StinespringTriple& s);

/// Compression X -> B* X B onto Ran p (single Kraus operator B*).
CPMap compression_map(const HermitianProjector& p);

/// max over probes of |Psi_S0(E_p(X)) - Psi_S0(X)| for the compression onto Ran p.
double compression_expectation_residual(const HermitianProjector& p, const std::vector<CMatrix>& probes);

CPMap identity_map(Index n);
/// a -> tr(a) / n * I_n
CPMap depolarizing_map(Index n);
/// K_k = S^-1/2 G_k with G_k complex Gaussian m x n and S = sum_k G_k G_k*.
CPMap random_unital_cp(Index input_dim, Index output_dim, Index kraus_count, std::uint64_t seed);

using kconn::random_unitary;

}  // namespace kconn::cpmaps
