#pragma once

#include "kconn/numerics.hpp"

#include <limits>
#include <string>
#include <variant>

namespace kconn {

/// Unitary matrix used as a point of a unitary group U(n).
struct UnitaryElement {
    CMatrix u;
};

/// Orthogonal projector p = p* = p^2 of rank k on C^n.
class HermitianProjector {
public:
    /// Validates p; throws std::invalid_argument when p is not a Hermitian idempotent.
    explicit HermitianProjector(CMatrix p, double tol = 1e-10);

    /// Projector onto the column span of a matrix with orthonormal columns.
    static HermitianProjector from_basis(const CMatrix& orthonormal_columns);

    /// diag(I_k, 0) on C^n.
    static HermitianProjector coordinate(Index n, Index k);

    const CMatrix& matrix() const { return p_; }
    Index dim() const { return p_.rows(); }
    Index rank() const { return rank_; }

    /// Orthonormal basis of Ran p (n x k). Eigenvalue-1 eigenvectors from the
    /// Jacobi solver, each phase fixed so that its largest-modulus entry is real positive.
    CMatrix range_basis() const;
    /// Orthonormal basis of Ker p (n x (n-k)), same conventions.
    CMatrix kernel_basis() const;

    CMatrix complement() const { return CMatrix::Identity(dim(), dim()) - p_; }

private:
    CMatrix p_;
    Index rank_;
};

/// Point of a Grassmannian: the projector together with fiber coordinates
/// given by an orthonormal basis of its range.
struct GrassPoint {
    CMatrix projector;
    CMatrix basis;

    static GrassPoint from_projector(const HermitianProjector& p);
};

/// A point of the parameter manifold: C^d, U(n) or Gr(k, C^n).
using BasePoint = std::variant<CVector, UnitaryElement, GrassPoint>;

/// Anti-Hermitian generator, used as tangent vector on U(n) (u * exp(t a))
/// and on Grassmannians (exp(t A) p exp(-t A)).
struct Generator {
    CMatrix a;
};

/// Real-linear direction on C^d, or a generator on matrix domains.
using TangentVector = std::variant<CVector, Generator>;

TangentVector operator+(const TangentVector& x, const TangentVector& y);
TangentVector operator*(double a, const TangentVector& x);

/// Point reached at parameter t along the canonical curve through s with
/// velocity X: s + tX, u exp(ta), exp(tA) p exp(-tA).
BasePoint move_along(const BasePoint& s, const TangentVector& x, double t);

/// Distance used for sample-point matching (Frobenius distance of the
/// point representatives; projectors for Grassmann points).
double point_distance(const BasePoint& a, const BasePoint& b);

std::string describe(const BasePoint& s);

inline const CVector& as_vector(const BasePoint& s) { return std::get<CVector>(s); }
inline const CMatrix& as_unitary(const BasePoint& s) { return std::get<UnitaryElement>(s).u; }
inline const GrassPoint& as_grass(const BasePoint& s) { return std::get<GrassPoint>(s); }

enum class DomainKind { Disk, HalfPlane, ComplexSpace, UnitaryGroup, Grassmannian };

/// Where a kernel lives. dim is d for C^d (1 for the disk and half-plane),
/// n for U(n) and Gr(k, C^n); rank is k for Grassmannians.
struct Domain {
    DomainKind kind = DomainKind::ComplexSpace;
    Index dim = 1;
    Index rank = 0;

    /// Throws DomainError if s is not a point of this domain.
    void check(const BasePoint& s) const;
    /// Distance from s to the boundary; infinity on boundaryless domains.
    double boundary_distance(const BasePoint& s) const;
    std::string name() const;
};

inline constexpr double kDiskGuard = 1e-6;

}  // namespace kconn
