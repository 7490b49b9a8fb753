#include "kconn/rkhs.hpp"

#include <algorithm>

namespace kconn {

Index SampledRKHS::find(const BasePoint& s, double tol) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (point_distance(points[i], s) <= tol) return static_cast<Index>(i);
    }
    return -1;
}

namespace rkhs {

namespace {

void require_owner(const SampledRKHS& r, const RKHSElement& f) {
    if (f.owner.get() != &r) throw std::invalid_argument("RKHS element belongs to a different sampled space");
}

}  // namespace

RKHSHandle build_rkhs(const Kernel& k, std::vector<BasePoint> points, double ridge, double pinv_tau,
                      double psd_tol) {
    if (points.empty()) throw std::invalid_argument("build_rkhs: need at least one sample point");
    if (ridge < 0.0) throw std::invalid_argument("build_rkhs: ridge must be non-negative");
    for (std::size_t i = 0; i < points.size(); ++i) {
        k.domain().check(points[i]);
        for (std::size_t j = 0; j < i; ++j) {
            if (point_distance(points[i], points[j]) <= 1e-12) {
                throw std::invalid_argument("build_rkhs: duplicate sample points " + std::to_string(j) + " and " +
                                            std::to_string(i));
            }
        }
    }
    auto r = std::make_shared<SampledRKHS>(SampledRKHS{k, std::move(points), {}, {}, ridge, {}});
    r->gram = kernels::gram_matrix(k, r->points);
    r->certificate = kernels::positivity_certificate(r->gram, psd_tol);
    if (!r->certificate.is_psd) {
        throw std::invalid_argument("build_rkhs: Gram matrix is not positive semidefinite (min eigenvalue " +
                                    std::to_string(r->certificate.min_eigenvalue) + ")");
    }
    const CMatrix shifted = r->gram + ridge * CMatrix::Identity(r->gram.rows(), r->gram.cols());
    r->gram_pinv = numerics::pinv_threshold(0.5 * (shifted + shifted.adjoint()), pinv_tau);
    return r;
}

RKHSElement embed(const RKHSHandle& r, const BasePoint& s, const CVector& v) {
    const Index i = r->find(s);
    if (i < 0) throw std::invalid_argument("embed: point " + describe(s) + " is not a sample point");
    if (v.size() != r->fiber_dim()) throw std::invalid_argument("embed: fiber vector has the wrong dimension");
    RKHSElement f = zero(r);
    f.coefficients.segment(i * r->fiber_dim(), r->fiber_dim()) = v;
    return f;
}

RKHSElement zero(const RKHSHandle& r) { return RKHSElement{CVector::Zero(r->size() * r->fiber_dim()), r}; }

cplx inner(const SampledRKHS& r, const RKHSElement& f, const RKHSElement& g) {
    require_owner(r, f);
    require_owner(r, g);
    return g.coefficients.dot(r.gram * f.coefficients);
}

CVector evaluate(const SampledRKHS& r, const RKHSElement& f, const BasePoint& x) {
    require_owner(r, f);
    const Index m = r.fiber_dim();
    CVector out = CVector::Zero(m);
    for (Index i = 0; i < r.size(); ++i) {
        const auto block = f.coefficients.segment(i * m, m);
        if (block.isZero(0.0)) continue;
        out += r.kernel(x, r.points[static_cast<std::size_t>(i)]) * block;
    }
    return out;
}

RKHSElement project_fiber(const RKHSHandle& r, const BasePoint& s, const RKHSElement& f) {
    require_owner(*r, f);
    const Index i = r->find(s);
    if (i < 0) throw std::invalid_argument("project_fiber: point " + describe(s) + " is not a sample point");
    const Index m = r->fiber_dim();
    const CMatrix kss = r->gram.block(i * m, i * m, m, m);
    const CVector c = numerics::hermitian_inverse(kss) * evaluate(*r, f, s);
    RKHSElement out = zero(r);
    out.coefficients.segment(i * m, m) = c;
    return out;
}

double universality_residual(const RKHSHandle& r) {
    const Index m = r->fiber_dim();
    double worst = 0.0;
    for (const auto& s : r->points) {
        for (const auto& t : r->points) {
            const CMatrix kst = r->kernel(s, t);
            for (Index a = 0; a < m; ++a) {
                const CVector v = CVector::Unit(m, a);
                const RKHSElement projected = project_fiber(r, s, embed(r, t, v));
                for (Index b = 0; b < m; ++b) {
                    const CVector w = CVector::Unit(m, b);
                    const cplx direct = w.dot(kst * v);
                    const cplx through = inner(*r, projected, embed(r, s, w));
                    worst = std::max(worst, std::abs(direct - through));
                }
            }
        }
    }
    return worst;
}

}  // namespace rkhs

RKHSElement operator+(const RKHSElement& f, const RKHSElement& g) {
    if (f.owner != g.owner) throw std::invalid_argument("RKHS elements from different sampled spaces");
    return RKHSElement{f.coefficients + g.coefficients, f.owner};
}

RKHSElement operator-(const RKHSElement& f, const RKHSElement& g) {
    if (f.owner != g.owner) throw std::invalid_argument("RKHS elements from different sampled spaces");
    return RKHSElement{f.coefficients - g.coefficients, f.owner};
}

RKHSElement operator*(cplx a, const RKHSElement& f) { return RKHSElement{a * f.coefficients, f.owner}; }
}  // namespace kconn
