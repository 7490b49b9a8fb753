#pragma once

#include "kconn/connections.hpp"
#include "kconn/kernels.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

namespace kconn::grassmann {

/// Fiber-valued function on the Grassmannian: S -> F(S) in C^n with F(S) in S.
using AmbientSection = std::function<CVector(const HermitianProjector&)>;

/// E_p(X) = p X p + (1 - p) X (1 - p)
CMatrix conditional_expectation(const HermitianProjector& p, const CMatrix& x);

/// Block-diagonal conditional expectation attached to a base projector, i.e.
/// the reductive splitting u(n) = {block diagonal} + m with m = Ker E_p.
class ReductiveStructure {
public:
    explicit ReductiveStructure(HermitianProjector p) : p_(std::move(p)) {}

    CMatrix expectation(const CMatrix& x) const { return conditional_expectation(p_, x); }
    const HermitianProjector& base() const { return p_; }
    /// |E(X)| relative to |X|: zero iff X lies in m.
    double complement_residual(const CMatrix& x) const;

private:
    HermitianProjector p_;
};

/// max over probes of |E(E(X)) - E(X)|
double expectation_idempotence_residual(const ReductiveStructure& rs, std::span<const CMatrix> probes);

/// max over group elements g and probes X of |E(g X g^-1) - g E(X) g^-1|.
/// Each g must commute with the base projector (within 1e-10).
double reductive_axioms_residual(const ReductiveStructure& rs, std::span<const CMatrix> group,
                                 std::span<const CMatrix> probes);

/// beta(g, X) = g X g^-1 for X in m.
CMatrix maurer_cartan(const ReductiveStructure& rs, const CMatrix& g, const CMatrix& x);

/// Random element of m = Ker E_p: (0 R; -R* 0) in the block form of p.
CMatrix random_complement_generator(const HermitianProjector& p, std::uint64_t seed);
/// Random unitary commuting with p: diag(u1, u2) in the block form of p.
CMatrix random_block_unitary(const HermitianProjector& p, std::uint64_t seed);

/// Q(S1, S2) = B1* B2 in the orthonormal fiber coordinates of GrassPoints on Gr(k, C^n).
Kernel universal_kernel(Index n, Index k);

/// Fiber coordinates B_S* F(S) of an ambient section, as a Section of the
/// tautological bundle over GrassPoints.
Section tautological_section(const AmbientSection& f, Index k);

/// p * d/dtau F(exp(tau A) p exp(-tau A)) at tau = 0. A must lie in m_p; F must be
/// fiber-valued on the probe curve (|(1 - p') F(p')| < 1e-8).
CVector universal_covariant_derivative(const AmbientSection& f, const HermitianProjector& p, const CMatrix& a,
                                       double h = numerics::kDefaultStep);

/// d/dt F(g exp(tX) p0 exp(-tX) g*) - g X g* F(g p0 g*) for X in m (base p0).
CVector reductive_covariant_derivative(const AmbientSection& f, const ReductiveStructure& rs, const CMatrix& g,
                                       const CMatrix& x, double h = numerics::kDefaultStep);

/// Vertical normal form of the reductive connection: (f, h) -> (f, E(X) f + h).
std::pair<CVector, CVector> phi_e_vertical(const ReductiveStructure& rs, const CMatrix& g, const CMatrix& x,
                                           const CVector& f, const CVector& h);

/// K(u, v) = B* u* v B on the fibers Ran P (coordinates B = P.range_basis()).
Kernel homogeneous_kernel(const HermitianProjector& p);

/// Equivariant section phi: U(n) -> Ran P coordinates.
using EquivariantSection = std::function<CVector(const CMatrix&)>;

/// d phi(u, X) + B* X B phi(u) for anti-Hermitian X. On X in m the second
/// term vanishes; on block-diagonal X the two terms cancel. Spot-checks equivariance
/// phi(u w) = rho(w)^-1 phi(u) on block unitaries w (tolerance 1e-8).
CVector homogeneous_covariant_derivative(const EquivariantSection& phi, const HermitianProjector& p,
                                         const CMatrix& u, const CMatrix& x, double h = numerics::kDefaultStep);

/// Equivariant section as a Section over UnitaryElements.
Section homogeneous_section(const EquivariantSection& phi, Index k);

}  // namespace kconn::grassmann
