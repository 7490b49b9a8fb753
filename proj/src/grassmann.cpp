#include "kconn/grassmann.hpp"

#include "kconn/random.hpp"

#include <algorithm>

namespace kconn::grassmann {

namespace {

constexpr double kMembershipTol = 1e-10;
constexpr double kFiberTol = 1e-8;

void require_anti_hermitian(const CMatrix& a, const char* who) {
    if (numerics::anti_hermitian_residual(a) >= 1e-10 * std::max(1.0, a.norm())) {
        throw std::invalid_argument(std::string(who) + ": generator is not anti-Hermitian");
    }
}

void require_unitary(const CMatrix& g, const char* who) {
    if (g.rows() != g.cols() || numerics::unitarity_residual(g) >= 1e-10) {
        throw std::invalid_argument(std::string(who) + ": group element is not unitary");
    }
}

void require_in_complement(const HermitianProjector& p, const CMatrix& x, const char* who) {
    if (conditional_expectation(p, x).norm() > kMembershipTol * std::max(1.0, x.norm())) {
        throw std::invalid_argument(std::string(who) + ": direction is not in the complement Ker E_p");
    }
}

void require_fiber_valued(const HermitianProjector& p, const CVector& f, const char* who) {
    if ((p.complement() * f).norm() > kFiberTol * std::max(1.0, f.norm())) {
        throw std::invalid_argument(std::string(who) + ": section value is not in the fiber Ran p");
    }
}

HermitianProjector conjugated(const CMatrix& e, const HermitianProjector& p) {
    CMatrix q = e * p.matrix() * e.adjoint();
    q = 0.5 * (q + q.adjoint());
    return HermitianProjector(std::move(q));
}

}  // namespace

CMatrix conditional_expectation(const HermitianProjector& p, const CMatrix& x) {
    if (x.rows() != p.dim() || x.cols() != p.dim()) {
        throw std::invalid_argument("conditional_expectation: dimension mismatch");
    }
    const CMatrix& pm = p.matrix();
    const CMatrix q = p.complement();
    return pm * x * pm + q * x * q;
}

double ReductiveStructure::complement_residual(const CMatrix& x) const {
    return expectation(x).norm() / std::max(x.norm(), 1e-300);
}

double expectation_idempotence_residual(const ReductiveStructure& rs, std::span<const CMatrix> probes) {
    double worst = 0.0;
    for (const auto& x : probes) {
        const CMatrix ex = rs.expectation(x);
        worst = std::max(worst, (rs.expectation(ex) - ex).norm());
    }
    return worst;
}

double reductive_axioms_residual(const ReductiveStructure& rs, std::span<const CMatrix> group,
                                 std::span<const CMatrix> probes) {
    const CMatrix& p = rs.base().matrix();
    for (const auto& g : group) {
        require_unitary(g, "reductive_axioms_residual");
        if ((g * p - p * g).norm() >= 1e-10) {
            throw std::invalid_argument("reductive_axioms_residual: group element does not commute with p");
        }
    }
    double worst = 0.0;
    for (const auto& g : group) {
        for (const auto& x : probes) {
            const CMatrix lhs = rs.expectation(g * x * g.adjoint());
            const CMatrix rhs = g * rs.expectation(x) * g.adjoint();
            worst = std::max(worst, (lhs - rhs).norm());
        }
    }
    return worst;
}

CMatrix maurer_cartan(const ReductiveStructure& rs, const CMatrix& g, const CMatrix& x) {
    require_unitary(g, "maurer_cartan");
    require_in_complement(rs.base(), x, "maurer_cartan");
    return g * x * g.adjoint();
}

CMatrix random_complement_generator(const HermitianProjector& p, std::uint64_t seed) {
    Rng rng(seed);
    const CMatrix b = p.range_basis();
    const CMatrix c = p.kernel_basis();
    const CMatrix r = rng.complex_matrix(b.cols(), c.cols());
    return b * r * c.adjoint() - c * r.adjoint() * b.adjoint();
}

CMatrix random_block_unitary(const HermitianProjector& p, std::uint64_t seed) {
    Rng rng(seed);
    const CMatrix b = p.range_basis();
    const CMatrix c = p.kernel_basis();
    CMatrix g = CMatrix::Zero(p.dim(), p.dim());
    if (b.cols() > 0) g += b * rng.unitary(b.cols()) * b.adjoint();
    if (c.cols() > 0) g += c * rng.unitary(c.cols()) * c.adjoint();
    return g;
}

Kernel universal_kernel(Index n, Index k) {
    if (n < 1 || k < 1 || k > n) throw std::invalid_argument("universal_kernel: need 1 <= k <= n");
    Domain domain{DomainKind::Grassmannian, n, k};
    auto eval = [](const BasePoint& s, const BasePoint& t) {
        return CMatrix(as_grass(s).basis.adjoint() * as_grass(t).basis);
    };
    auto d2 = [](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        const CMatrix& a = std::get<Generator>(x).a;
        return CMatrix(as_grass(s).basis.adjoint() * a * as_grass(t).basis);
    };
    return Kernel("universal:n=" + std::to_string(n) + ",k=" + std::to_string(k), domain, k, eval, d2);
}

Section tautological_section(const AmbientSection& f, Index k) {
    Section sigma;
    sigma.fiber_dim = k;
    sigma.value = [f](const BasePoint& s) {
        const GrassPoint& g = as_grass(s);
        return CVector(g.basis.adjoint() * f(HermitianProjector(g.projector)));
    };
    return sigma;
}

CVector universal_covariant_derivative(const AmbientSection& f, const HermitianProjector& p, const CMatrix& a,
                                       double h) {
    require_anti_hermitian(a, "universal_covariant_derivative");
    require_in_complement(p, a, "universal_covariant_derivative");
    auto along = [&](double tau) {
        const HermitianProjector q = conjugated(numerics::expm_anti_hermitian(a, tau), p);
        CVector v = f(q);
        require_fiber_valued(q, v, "universal_covariant_derivative");
        return v;
    };
    const CVector d = numerics::directional_derivative(along, h);
    return p.matrix() * d;
}

CVector reductive_covariant_derivative(const AmbientSection& f, const ReductiveStructure& rs, const CMatrix& g,
                                       const CMatrix& x, double h) {
    require_unitary(g, "reductive_covariant_derivative");
    require_anti_hermitian(x, "reductive_covariant_derivative");
    require_in_complement(rs.base(), x, "reductive_covariant_derivative");
    auto along = [&](double t) {
        const CMatrix e = g * numerics::expm_anti_hermitian(x, t);
        return f(conjugated(e, rs.base()));
    };
    const CVector d = numerics::directional_derivative(along, h);
    const CVector value = f(conjugated(g, rs.base()));
    return d - g * x * g.adjoint() * value;
}

std::pair<CVector, CVector> phi_e_vertical(const ReductiveStructure& rs, const CMatrix& g, const CMatrix& x,
                                           const CVector& f, const CVector& h) {
    require_unitary(g, "phi_e_vertical");
    require_fiber_valued(rs.base(), f, "phi_e_vertical");
    require_fiber_valued(rs.base(), h, "phi_e_vertical");
    return {f, rs.expectation(x) * f + h};
}

Kernel homogeneous_kernel(const HermitianProjector& p) {
    const CMatrix b = p.range_basis();
    Domain domain{DomainKind::UnitaryGroup, p.dim(), 0};
    auto eval = [b](const BasePoint& s, const BasePoint& t) {
        return CMatrix(b.adjoint() * as_unitary(s).adjoint() * as_unitary(t) * b);
    };
    auto d2 = [b](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        const CMatrix& a = std::get<Generator>(x).a;
        return CMatrix(b.adjoint() * as_unitary(s).adjoint() * as_unitary(t) * a * b);
    };
    return Kernel("homogeneous:n=" + std::to_string(p.dim()) + ",k=" + std::to_string(p.rank()), domain, p.rank(),
                  eval, d2);
}

CVector homogeneous_covariant_derivative(const EquivariantSection& phi, const HermitianProjector& p,
                                         const CMatrix& u, const CMatrix& x, double h) {
    require_unitary(u, "homogeneous_covariant_derivative");
    require_anti_hermitian(x, "homogeneous_covariant_derivative");
    const CMatrix b = p.range_basis();
    const CVector value = phi(u);
    for (std::uint64_t seed : {101u, 202u}) {
        const CMatrix w = random_block_unitary(p, seed);
        const CVector expected = (b.adjoint() * w * b).adjoint() * value;
        if ((phi(u * w) - expected).norm() > 1e-8 * std::max(1.0, value.norm())) {
            throw std::invalid_argument("homogeneous_covariant_derivative: section is not equivariant");
        }
    }
    const CVector d = numerics::directional_derivative(
        [&](double t) { return phi(u * numerics::expm_anti_hermitian(x, t)); }, h);
    return d + b.adjoint() * x * b * value;
}

Section homogeneous_section(const EquivariantSection& phi, Index k) {
    Section sigma;
    sigma.fiber_dim = k;
    sigma.value = [phi](const BasePoint& s) { return phi(as_unitary(s)); };
    return sigma;
}

}  // namespace kconn::grassmann
