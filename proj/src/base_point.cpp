#include "kconn/base_point.hpp"

#include "kconn/csv.hpp"

#include <cmath>
#include <sstream>

namespace kconn {

namespace {

// Columns of v multiplied by unit phases so the largest-modulus entry of
// each column is real and positive.
CMatrix fix_phases(CMatrix v) {
    for (Index c = 0; c < v.cols(); ++c) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index r = 0; r < v.rows(); ++r) {
            // strict comparison with a small margin keeps the pivot stable under rounding
            if (std::abs(v(r, c)) > best_abs + 1e-12) {
                best_abs = std::abs(v(r, c));
                best = r;
            }
        }
        if (best_abs > 0.0) v.col(c) *= std::conj(v(best, c)) / best_abs;
    }
    return v;
}

}  // namespace

HermitianProjector::HermitianProjector(CMatrix p, double tol) : p_(std::move(p)) {
    if (p_.rows() != p_.cols() || p_.rows() == 0) {
        throw std::invalid_argument("HermitianProjector: matrix must be square and non-empty");
    }
    if (numerics::hermitian_residual(p_) >= tol) {
        throw std::invalid_argument("HermitianProjector: matrix is not Hermitian");
    }
    if ((p_ * p_ - p_).norm() >= tol) {
        throw std::invalid_argument("HermitianProjector: matrix is not idempotent");
    }
    const double trace = p_.trace().real();
    rank_ = static_cast<Index>(std::llround(trace));
    if (std::abs(trace - static_cast<double>(rank_)) > 1e-8) {
        throw std::invalid_argument("HermitianProjector: trace is not an integer rank");
    }
}

HermitianProjector HermitianProjector::from_basis(const CMatrix& b) {
    if ((b.adjoint() * b - CMatrix::Identity(b.cols(), b.cols())).norm() > 1e-10) {
        throw std::invalid_argument("HermitianProjector::from_basis: columns are not orthonormal");
    }
    CMatrix p = b * b.adjoint();
    p = 0.5 * (p + p.adjoint());
    return HermitianProjector(std::move(p));
}

HermitianProjector HermitianProjector::coordinate(Index n, Index k) {
    if (k < 0 || k > n) throw std::invalid_argument("HermitianProjector::coordinate: rank out of range");
    CMatrix p = CMatrix::Zero(n, n);
    for (Index i = 0; i < k; ++i) p(i, i) = 1.0;
    return HermitianProjector(std::move(p));
}

CMatrix HermitianProjector::range_basis() const {
    const auto eig = numerics::hermitian_eigh(p_);
    return fix_phases(eig.vectors.rightCols(rank_));
}

CMatrix HermitianProjector::kernel_basis() const {
    const auto eig = numerics::hermitian_eigh(p_);
    return fix_phases(eig.vectors.leftCols(dim() - rank_));
}

GrassPoint GrassPoint::from_projector(const HermitianProjector& p) {
    return GrassPoint{p.matrix(), p.range_basis()};
}

TangentVector operator+(const TangentVector& x, const TangentVector& y) {
    if (x.index() != y.index()) throw std::invalid_argument("tangent vectors of different kinds");
    if (const auto* v = std::get_if<CVector>(&x)) return CVector(*v + std::get<CVector>(y));
    return Generator{std::get<Generator>(x).a + std::get<Generator>(y).a};
}

TangentVector operator*(double a, const TangentVector& x) {
    if (const auto* v = std::get_if<CVector>(&x)) return CVector(a * *v);
    return Generator{a * std::get<Generator>(x).a};
}

BasePoint move_along(const BasePoint& s, const TangentVector& x, double t) {
    if (const auto* z = std::get_if<CVector>(&s)) {
        const auto* dir = std::get_if<CVector>(&x);
        if (!dir || dir->size() != z->size()) {
            throw std::invalid_argument("move_along: direction does not match a C^d point");
        }
        return CVector(*z + t * *dir);
    }
    const auto* gen = std::get_if<Generator>(&x);
    if (!gen) throw std::invalid_argument("move_along: matrix domains need a generator tangent");
    if (const auto* u = std::get_if<UnitaryElement>(&s)) {
        if (gen->a.rows() != u->u.rows()) throw std::invalid_argument("move_along: generator size mismatch");
        return UnitaryElement{u->u * numerics::expm_anti_hermitian(gen->a, t)};
    }
    const auto& g = std::get<GrassPoint>(s);
    if (gen->a.rows() != g.projector.rows()) throw std::invalid_argument("move_along: generator size mismatch");
    const CMatrix e = numerics::expm_anti_hermitian(gen->a, t);
    return GrassPoint{e * g.projector * e.adjoint(), e * g.basis};
}

double point_distance(const BasePoint& a, const BasePoint& b) {
    if (a.index() != b.index()) return std::numeric_limits<double>::infinity();
    if (const auto* z = std::get_if<CVector>(&a)) {
        const auto& w = std::get<CVector>(b);
        return z->size() == w.size() ? (*z - w).norm() : std::numeric_limits<double>::infinity();
    }
    if (const auto* u = std::get_if<UnitaryElement>(&a)) {
        const auto& v = std::get<UnitaryElement>(b);
        return u->u.rows() == v.u.rows() ? (u->u - v.u).norm() : std::numeric_limits<double>::infinity();
    }
    const auto& p = std::get<GrassPoint>(a);
    const auto& q = std::get<GrassPoint>(b);
    return p.projector.rows() == q.projector.rows() ? (p.projector - q.projector).norm()
                                                    : std::numeric_limits<double>::infinity();
}

std::string describe(const BasePoint& s) {
    if (const auto* z = std::get_if<CVector>(&s)) return "(" + csv::format_vector(*z) + ")";
    if (const auto* u = std::get_if<UnitaryElement>(&s)) return "U(" + std::to_string(u->u.rows()) + ") element";
    return "Gr(" + std::to_string(as_grass(s).basis.cols()) + "," + std::to_string(as_grass(s).projector.rows()) +
           ") point";
}

void Domain::check(const BasePoint& s) const {
    switch (kind) {
        case DomainKind::Disk: {
            const auto* z = std::get_if<CVector>(&s);
            if (!z || z->size() != 1) throw DomainError("disk point must be a single complex number");
            if (std::abs((*z)(0)) >= 1.0 - kDiskGuard) {
                throw DomainError("point " + describe(s) + " is outside the unit disk (|s| < 1 - 1e-6 required)");
            }
            return;
        }
        case DomainKind::HalfPlane: {
            const auto* z = std::get_if<CVector>(&s);
            if (!z || z->size() != 1) throw DomainError("half-plane point must be a single complex number");
            if (!((*z)(0).imag() > 0.0)) throw DomainError("point " + describe(s) + " is not in the upper half-plane");
            return;
        }
        case DomainKind::ComplexSpace: {
            const auto* z = std::get_if<CVector>(&s);
            if (!z || z->size() != dim) {
                throw DomainError("expected a point of C^" + std::to_string(dim));
            }
            if (!z->allFinite()) throw DomainError("non-finite point");
            return;
        }
        case DomainKind::UnitaryGroup: {
            const auto* u = std::get_if<UnitaryElement>(&s);
            if (!u || u->u.rows() != dim || u->u.cols() != dim) {
                throw DomainError("expected an element of U(" + std::to_string(dim) + ")");
            }
            if (numerics::unitarity_residual(u->u) >= 1e-10) throw DomainError("matrix is not unitary");
            return;
        }
        case DomainKind::Grassmannian: {
            const auto* g = std::get_if<GrassPoint>(&s);
            if (!g || g->projector.rows() != dim || g->basis.rows() != dim || g->basis.cols() != rank) {
                throw DomainError("expected a point of Gr(" + std::to_string(rank) + ", C^" + std::to_string(dim) + ")");
            }
            const CMatrix gram = g->basis.adjoint() * g->basis;
            if ((gram - CMatrix::Identity(rank, rank)).norm() >= 1e-10) {
                throw DomainError("Grassmann fiber basis is not orthonormal");
            }
            if ((g->basis * g->basis.adjoint() - g->projector).norm() >= 1e-8) {
                throw DomainError("Grassmann fiber basis does not span the projector range");
            }
            return;
        }
    }
}

double Domain::boundary_distance(const BasePoint& s) const {
    switch (kind) {
        case DomainKind::Disk:
            return 1.0 - std::abs(as_vector(s)(0));
        case DomainKind::HalfPlane:
            return as_vector(s)(0).imag();
        default:
            return std::numeric_limits<double>::infinity();
    }
}

std::string Domain::name() const {
    switch (kind) {
        case DomainKind::Disk: return "disk";
        case DomainKind::HalfPlane: return "half-plane";
        case DomainKind::ComplexSpace: return "C^" + std::to_string(dim);
        case DomainKind::UnitaryGroup: return "U(" + std::to_string(dim) + ")";
        case DomainKind::Grassmannian: return "Gr(" + std::to_string(rank) + ",C^" + std::to_string(dim) + ")";
    }
    return "unknown";
}

}  // namespace kconn
