#include "kconn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kconn {

Kernel::Kernel(std::string name, Domain domain, Index fiber_dim, EvalFn eval, SecondSlotFn d2)
    : name_(std::move(name)), domain_(domain), fiber_dim_(fiber_dim), eval_(std::move(eval)), d2_(std::move(d2)) {
    if (fiber_dim_ < 1) throw std::invalid_argument("Kernel: fiber dimension must be positive");
    if (!eval_) throw std::invalid_argument("Kernel: missing evaluation function");
}

CMatrix Kernel::operator()(const BasePoint& s, const BasePoint& t) const {
    domain_.check(s);
    domain_.check(t);
    CMatrix value = eval_(s, t);
    if (value.rows() != fiber_dim_ || value.cols() != fiber_dim_) {
        throw std::logic_error("Kernel '" + name_ + "' returned a block of the wrong size");
    }
    return value;
}

CMatrix Kernel::d2(const BasePoint& s, const BasePoint& t, const TangentVector& x, double h) const {
    if (d2_) {
        domain_.check(s);
        domain_.check(t);
        return d2_(s, t, x);
    }
    const double step = stencil_step(t, h);
    return numerics::directional_derivative([&](double e) { return (*this)(s, move_along(t, x, e)); }, step);
}

double Kernel::stencil_step(const BasePoint& s, double h) const {
    return h * std::min(1.0, domain_.boundary_distance(s));
}

Kernel Kernel::without_analytic_d2() const {
    Kernel copy = *this;
    copy.d2_ = {};
    return copy;
}

Kernel Kernel::with_d2(SecondSlotFn d2) const {
    Kernel copy = *this;
    copy.d2_ = std::move(d2);
    return copy;
}

BasePoint BundleMorphism::zeta(const BasePoint& s) const { return base_map ? base_map(s) : s; }

CMatrix BundleMorphism::delta(const BasePoint& s) const {
    if (!fiber_map) throw std::invalid_argument("BundleMorphism: missing fiber map");
    CMatrix d = fiber_map(s);
    if (d.cols() != source_fiber_dim) {
        throw std::invalid_argument("BundleMorphism: fiber map has " + std::to_string(d.cols()) +
                                    " columns, source fiber dimension is " + std::to_string(source_fiber_dim));
    }
    return d;
}

TangentVector BundleMorphism::push_tangent(const BasePoint& s, const TangentVector& x) const {
    if (tangent_map) return tangent_map(s, x);
    if (!base_map) return x;
    throw std::invalid_argument("BundleMorphism: tangent map required for a non-identity base map");
}

namespace kernels {

namespace {

cplx scalar_of(const BasePoint& s) { return as_vector(s)(0); }

std::string format_parameter(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

CMatrix scalar_block(cplx v) {
    CMatrix m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace

CMatrix eval_kernel(const Kernel& k, const BasePoint& s, const BasePoint& t) { return k(s, t); }

Kernel make_bergman_disk(double nu) {
    if (!(nu >= 1.0)) throw std::invalid_argument("bergman-disk: nu must be >= 1");
    auto eval = [nu](const BasePoint& s, const BasePoint& t) {
        const cplx a = scalar_of(s);
        const cplx b = scalar_of(t);
        return scalar_block(std::pow(1.0 - std::conj(b) * a, -nu));
    };
    // d/de (1 - conj(t + e w) s)^(-nu) = nu s conj(w) (1 - conj(t) s)^(-nu-1)
    auto d2 = [nu](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        const cplx a = scalar_of(s);
        const cplx b = scalar_of(t);
        const cplx w = std::get<CVector>(x)(0);
        return scalar_block(nu * a * std::conj(w) * std::pow(1.0 - std::conj(b) * a, -nu - 1.0));
    };
    return Kernel("bergman-disk:nu=" + format_parameter(nu), Domain{DomainKind::Disk, 1, 0}, 1, eval, d2);
}

Kernel make_bergman_halfplane(double nu) {
    if (!(nu >= 1.0)) throw std::invalid_argument("bergman-halfplane: nu must be >= 1");
    // (2i)^nu / (z - conj(w))^nu written as (2 / (-i (z - conj(w))))^nu, whose
    // base has positive real part, so the principal power is the right branch.
    auto eval = [nu](const BasePoint& s, const BasePoint& t) {
        const cplx z = scalar_of(s);
        const cplx w = scalar_of(t);
        const cplx base = 2.0 / (cplx(0.0, -1.0) * (z - std::conj(w)));
        return scalar_block(0.25 * std::pow(base, nu));
    };
    auto d2 = [nu](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        const cplx z = scalar_of(s);
        const cplx w = scalar_of(t);
        const cplx lambda = std::get<CVector>(x)(0);
        const cplx diff = z - std::conj(w);
        const cplx base = 2.0 / (cplx(0.0, -1.0) * diff);
        return scalar_block(0.25 * std::pow(base, nu) * nu * std::conj(lambda) / diff);
    };
    return Kernel("bergman-halfplane:nu=" + format_parameter(nu), Domain{DomainKind::HalfPlane, 1, 0}, 1, eval, d2);
}

Kernel make_fock(const CMatrix& beta) {
    if (beta.rows() != beta.cols() || beta.rows() == 0) {
        throw std::invalid_argument("fock: beta must be a non-empty square matrix");
    }
    if (numerics::hermitian_residual(beta) > 1e-12 * std::max(1.0, beta.norm())) {
        throw std::invalid_argument("fock: beta must be Hermitian");
    }
    const auto eig = numerics::hermitian_eigh(beta);
    if (eig.values.minCoeff() < -1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("fock: beta must be positive semidefinite");
    }
    const Index d = beta.rows();
    auto eval = [beta](const BasePoint& s, const BasePoint& t) {
        const cplx form = as_vector(t).dot(beta * as_vector(s));  // t* B s
        return scalar_block(std::exp(form));
    };
    // d/de exp((t + e l)* B s) = exp(t* B s) l* B s
    auto d2 = [beta](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        const CVector bs = beta * as_vector(s);
        const cplx form = as_vector(t).dot(bs);
        const cplx slot = std::get<CVector>(x).dot(bs);
        return scalar_block(std::exp(form) * slot);
    };
    return Kernel("fock:dim=" + std::to_string(d), Domain{DomainKind::ComplexSpace, d, 0}, 1, eval, d2);
}

Kernel make_fock_standard(Index d) {
    if (d < 1) throw std::invalid_argument("fock: dim must be >= 1");
    return make_fock(CMatrix::Identity(d, d));
}

Kernel make_feature_kernel(std::string name, Domain domain, Index fiber_dim,
                           std::function<CVector(const BasePoint&)> feature) {
    auto eval = [feature, fiber_dim](const BasePoint& s, const BasePoint& t) {
        const CVector a = feature(s);
        const CVector b = feature(t);
        if (a.size() != fiber_dim || b.size() != fiber_dim) {
            throw std::logic_error("feature kernel: feature map returned a vector of the wrong size");
        }
        return CMatrix(a * b.adjoint());
    };
    return Kernel(std::move(name), domain, fiber_dim, eval);
}

CMatrix gram_matrix(const Kernel& k, const std::vector<BasePoint>& points) {
    if (points.empty()) throw std::invalid_argument("gram_matrix: need at least one point");
    const Index m = k.fiber_dim();
    const Index n = static_cast<Index>(points.size());
    CMatrix g(n * m, n * m);
    for (Index l = 0; l < n; ++l) {
        for (Index j = 0; j < n; ++j) {
            g.block(l * m, j * m, m, m) = k(points[static_cast<std::size_t>(l)], points[static_cast<std::size_t>(j)]);
        }
    }
    return g;
}

PositivityCertificate positivity_certificate(const CMatrix& gram, double tol) {
    if (gram.rows() != gram.cols()) throw std::invalid_argument("positivity_certificate: matrix is not square");
    if (numerics::hermitian_residual(gram) > tol * std::max(1.0, gram.norm())) {
        throw std::invalid_argument("positivity_certificate: matrix is not Hermitian within tolerance");
    }
    const auto eig = numerics::hermitian_eigh(gram, tol);
    PositivityCertificate cert;
    cert.min_eigenvalue = eig.values.minCoeff();
    cert.max_eigenvalue = eig.values.maxCoeff();
    cert.is_psd = cert.min_eigenvalue >= -tol * std::max(1.0, cert.max_eigenvalue);
    return cert;
}

Kernel pull_back_kernel(const BundleMorphism& theta, const Kernel& target) {
    auto eval = [theta, target](const BasePoint& s, const BasePoint& t) {
        const CMatrix ds = theta.delta(s);
        const CMatrix dt = theta.delta(t);
        if (ds.rows() != target.fiber_dim() || dt.rows() != target.fiber_dim()) {
            throw std::invalid_argument("pull_back_kernel: fiber map rows (" + std::to_string(ds.rows()) +
                                        ") do not match target fiber dimension (" +
                                        std::to_string(target.fiber_dim()) + ")");
        }
        return CMatrix(ds.adjoint() * target(theta.zeta(s), theta.zeta(t)) * dt);
    };
    return Kernel("pullback(" + target.name() + ")", theta.source_domain, theta.source_fiber_dim, eval);
}

double hermitian_symmetry_residual(const Kernel& k, const std::vector<BasePoint>& points) {
    double worst = 0.0;
    for (const auto& s : points) {
        for (const auto& t : points) {
            worst = std::max(worst, (k(s, t).adjoint() - k(t, s)).norm());
        }
    }
    return worst;
}

AdmissibilityReport admissibility_report(const Kernel& k, const std::vector<BasePoint>& points) {
    AdmissibilityReport report;
    const Index m = k.fiber_dim();

    report.min_sigma = std::numeric_limits<double>::infinity();
    for (const auto& s : points) {
        report.min_sigma = std::min(report.min_sigma, numerics::hermitian_eigh(k(s, s)).values.minCoeff());
    }

    // G = R* R with R = Lambda^(1/2) U*; the column block of R at point i is the
    // feature image of the fiber, so |K(., s_i) v|^2 = |R_i v|^2.
    const CMatrix g = gram_matrix(k, points);
    const auto eig = numerics::hermitian_eigh(g);
    const RVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
    const CMatrix r = roots.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    report.embedding_lower_bound = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < static_cast<Index>(points.size()); ++i) {
        const CMatrix ri = r.middleCols(i * m, m);
        const double lowest = numerics::hermitian_eigh(ri.adjoint() * ri).values.minCoeff();
        report.embedding_lower_bound = std::min(report.embedding_lower_bound, std::max(lowest, 0.0));
    }
    report.hermitian_residual = hermitian_symmetry_residual(k, points);
    return report;
}

}  // namespace kernels
}  // namespace kconn
