#include "kconn/cpmaps.hpp"

#include <algorithm>
#include <cmath>

namespace kconn::cpmaps {

namespace {

void require_unital(const CPMap& psi, const char* who) {
    if (!psi.is_unital()) {
        throw std::invalid_argument(std::string(who) + ": map is not unital (|Psi(I) - I| = " +
                                    std::to_string(psi.unitality_residual()) + ")");
    }
}

CMatrix kron_identity(const CMatrix& a, Index r) {
    CMatrix out = CMatrix::Zero(a.rows() * r, a.cols() * r);
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            for (Index l = 0; l < r; ++l) out(i * r + l, j * r + l) = a(i, j);
        }
    }
    return out;
}

}  // namespace

CPMap::CPMap(Index input_dim, Index output_dim, CMatrix choi, double tau)
    : n_(input_dim), m_(output_dim), choi_(std::move(choi)) {
    if (n_ < 1 || m_ < 1) throw std::invalid_argument("CPMap: dimensions must be positive");
    if (choi_.rows() != n_ * m_ || choi_.cols() != n_ * m_) {
        throw std::invalid_argument("CPMap: Choi matrix must be (n m) x (n m)");
    }
    kraus_ = kraus_from_choi(choi_, n_, m_, tau);
}

CMatrix CPMap::operator()(const CMatrix& a) const {
    if (a.rows() != n_ || a.cols() != n_) throw std::invalid_argument("CPMap: argument has the wrong size");
    CMatrix out = CMatrix::Zero(m_, m_);
    for (const auto& k : kraus_) out += k * a * k.adjoint();
    return out;
}

double CPMap::unitality_residual() const {
    return ((*this)(CMatrix::Identity(n_, n_)) - CMatrix::Identity(m_, m_)).norm();
}

CPMap choi_from_kraus(const KrausList& kraus) {
    if (kraus.empty()) throw std::invalid_argument("choi_from_kraus: empty Kraus family");
    const Index m = kraus.front().rows();
    const Index n = kraus.front().cols();
    CMatrix choi = CMatrix::Zero(n * m, n * m);
    for (const auto& k : kraus) {
        if (k.rows() != m || k.cols() != n) throw std::invalid_argument("choi_from_kraus: inconsistent Kraus shapes");
        CVector v(n * m);
        for (Index i = 0; i < n; ++i) {
            for (Index alpha = 0; alpha < m; ++alpha) v(i * m + alpha) = k(alpha, i);
        }
        choi += v * v.adjoint();
    }
    return CPMap(n, m, std::move(choi));
}

KrausList kraus_from_choi(const CMatrix& choi, Index input_dim, Index output_dim, double tau) {
    const Index n = input_dim;
    const Index m = output_dim;
    if (choi.rows() != n * m || choi.cols() != n * m) {
        throw std::invalid_argument("kraus_from_choi: Choi matrix must be (n m) x (n m)");
    }
    if (numerics::hermitian_residual(choi) > 1e-10 * std::max(1.0, choi.norm())) {
        throw std::invalid_argument("kraus_from_choi: Choi matrix is not Hermitian");
    }
    const auto eig = numerics::hermitian_eigh(choi);
    const double lmax = std::max(eig.values.maxCoeff(), 0.0);
    const double cut = tau * lmax;
    if (eig.values.minCoeff() < -cut) {
        throw std::invalid_argument("kraus_from_choi: Choi matrix is not positive semidefinite (eigenvalue " +
                                    std::to_string(eig.values.minCoeff()) + ")");
    }
    KrausList kraus;
    for (Index c = eig.values.size() - 1; c >= 0; --c) {
        if (eig.values(c) <= cut) break;
        const CVector v = std::sqrt(eig.values(c)) * eig.vectors.col(c);
        CMatrix k(m, n);
        for (Index i = 0; i < n; ++i) {
            for (Index alpha = 0; alpha < m; ++alpha) k(alpha, i) = v(i * m + alpha);
        }
        kraus.push_back(std::move(k));
    }
    if (kraus.empty()) throw std::invalid_argument("kraus_from_choi: Choi matrix is zero");
    return kraus;
}

CMatrix StinespringTriple::lambda(const CMatrix& a) const {
    if (a.rows() != input_dim || a.cols() != input_dim) {
        throw std::invalid_argument("StinespringTriple::lambda: argument has the wrong size");
    }
    return kron_identity(a, rank);
}

StinespringTriple stinespring_dilate(const CPMap& psi) {
    require_unital(psi, "stinespring_dilate");
    const Index n = psi.input_dim();
    const Index m = psi.output_dim();
    const Index r = psi.choi_rank();
    CMatrix v = CMatrix::Zero(n * r, m);
    for (Index i = 0; i < r; ++i) {
        const CMatrix kad = psi.kraus()[static_cast<std::size_t>(i)].adjoint();  // n x m
        for (Index j = 0; j < n; ++j) v.row(j * r + i) = kad.row(j);
    }
    return StinespringTriple{std::move(v), n, r};
}

double verify_dilation(const CPMap& psi, const StinespringTriple& s) {
    const Index n = psi.input_dim();
    if (s.input_dim != n || s.v.rows() != n * s.rank || s.v.cols() != psi.output_dim()) {
        throw std::invalid_argument("verify_dilation: triple does not match the map");
    }
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            CMatrix e = CMatrix::Zero(n, n);
            e(i, j) = 1.0;
            worst = std::max(worst, (psi(e) - s.v.adjoint() * s.lambda(e) * s.v).norm());
        }
    }
    return worst;
}

Kernel cp_kernel(const CPMap& psi) {
    require_unital(psi, "cp_kernel");
    Domain domain{DomainKind::UnitaryGroup, psi.input_dim(), 0};
    auto eval = [psi](const BasePoint& s, const BasePoint& t) {
        return psi(as_unitary(s).adjoint() * as_unitary(t));
    };
    auto d2 = [psi](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        return psi(as_unitary(s).adjoint() * as_unitary(t) * std::get<Generator>(x).a);
    };
    return Kernel("cp:n=" + std::to_string(psi.input_dim()) + ",m=" + std::to_string(psi.output_dim()), domain,
                  psi.output_dim(), eval, d2);
}

CVector cp_covariant_derivative(const CPMap& psi, const Section& sigma, const CMatrix& u, const CMatrix& a,
                                double h) {
    if (numerics::anti_hermitian_residual(a) >= 1e-10 * std::max(1.0, a.norm())) {
        throw std::invalid_argument("cp_covariant_derivative: direction is not anti-Hermitian");
    }
    const BasePoint s = UnitaryElement{u};
    return sigma.d(s, Generator{a}, h) + psi(a) * sigma(s);
}

Kernel lambda_kernel(const StinespringTriple& s) {
    Domain domain{DomainKind::UnitaryGroup, s.input_dim, 0};
    auto eval = [s](const BasePoint& x, const BasePoint& y) {
        return s.lambda(as_unitary(x).adjoint() * as_unitary(y));
    };
    auto d2 = [s](const BasePoint& x, const BasePoint& y, const TangentVector& t) {
        return s.lambda(as_unitary(x).adjoint() * as_unitary(y) * std::get<Generator>(t).a);
    };
    return Kernel("lambda", domain, s.input_dim * s.rank, eval, d2);
}

CMatrix dilation_range_basis(const StinespringTriple& s) {
    CMatrix p = s.v * s.v.adjoint();
    p = 0.5 * (p + p.adjoint());
    return HermitianProjector(std::move(p), 1e-8).range_basis();
}

Kernel compressed_lambda_kernel(const StinespringTriple& s) {
    const CMatrix b = dilation_range_basis(s);
    Domain domain{DomainKind::UnitaryGroup, s.input_dim, 0};
    auto eval = [s, b](const BasePoint& x, const BasePoint& y) {
        return CMatrix(b.adjoint() * s.lambda(as_unitary(x).adjoint() * as_unitary(y)) * b);
    };
    auto d2 = [s, b](const BasePoint& x, const BasePoint& y, const TangentVector& t) {
        return CMatrix(b.adjoint() * s.lambda(as_unitary(x).adjoint() * as_unitary(y) * std::get<Generator>(t).a) * b);
    };
    return Kernel("lambda0", domain, b.cols(), eval, d2);
}

BundleMorphism dilation_morphism(const StinespringTriple& s) {
    const CMatrix delta = dilation_range_basis(s).adjoint() * s.v;
    BundleMorphism theta;
    theta.source_domain = Domain{DomainKind::UnitaryGroup, s.input_dim, 0};
    theta.source_fiber_dim = s.v.cols();
    theta.fiber_map = [delta](const BasePoint&) { return delta; };
    return theta;
}

BundleMorphism dilation_embedding(const StinespringTriple& s) {
    BundleMorphism theta;
    theta.source_domain = Domain{DomainKind::UnitaryGroup, s.input_dim, 0};
    theta.source_fiber_dim = s.v.cols();
    theta.fiber_map = [v = s.v](const BasePoint&) { return v; };
    return theta;
}

CPMap compression_map(const HermitianProjector& p) {
    return choi_from_kraus({p.range_basis().adjoint()});
}

double compression_expectation_residual(const HermitianProjector& p, const std::vector<CMatrix>& probes) {
    const CPMap psi = compression_map(p);
    const CMatrix& pm = p.matrix();
    const CMatrix q = p.complement();
    double worst = 0.0;
    for (const auto& x : probes) {
        const CMatrix ex = pm * x * pm + q * x * q;
        worst = std::max(worst, (psi(ex) - psi(x)).norm());
    }
    return worst;
}

CPMap identity_map(Index n) { return choi_from_kraus({CMatrix::Identity(n, n)}); }

CPMap depolarizing_map(Index n) {
    // tr(a)/n I = sum_{alpha,i} (1/sqrt n) E_{alpha i} a E_{i alpha}
    KrausList kraus;
    for (Index i = 0; i < n; ++i) {
        for (Index alpha = 0; alpha < n; ++alpha) {
            CMatrix k = CMatrix::Zero(n, n);
            k(alpha, i) = 1.0 / std::sqrt(static_cast<double>(n));
            kraus.push_back(std::move(k));
        }
    }
    return choi_from_kraus(kraus);
}

CPMap random_unital_cp(Index input_dim, Index output_dim, Index kraus_count, std::uint64_t seed) {
    if (kraus_count < 1) throw std::invalid_argument("random_unital_cp: need at least one Kraus operator");
    Rng rng(seed);
    KrausList g;
    CMatrix s = CMatrix::Zero(output_dim, output_dim);
    for (Index k = 0; k < kraus_count; ++k) {
        g.push_back(rng.complex_matrix(output_dim, input_dim));
        s += g.back() * g.back().adjoint();
    }
    const auto eig = numerics::hermitian_eigh(s);
    if (eig.values.minCoeff() <= 1e-12 * eig.values.maxCoeff()) {
        throw SingularError("random_unital_cp: Kraus family does not span the output space");
    }
    const CMatrix inv_sqrt =
        eig.vectors * eig.values.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    for (auto& k : g) k = inv_sqrt * k;
    return choi_from_kraus(g);
}

}  // namespace kconn::cpmaps
