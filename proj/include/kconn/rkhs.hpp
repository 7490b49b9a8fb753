#pragma once

#include "kconn/kernels.hpp"

#include <memory>
#include <vector>

namespace kconn {

/// Finite-sample realization of the reproducing kernel Hilbert space of a
/// kernel: the span of the kernel sections K(., t_i) v over the sample points.
struct SampledRKHS {
    Kernel kernel;
    std::vector<BasePoint> points;
    CMatrix gram;
    CMatrix gram_pinv;  // threshold pseudo-inverse of gram + ridge * I
    double ridge = 0.0;
    kernels::PositivityCertificate certificate;

    Index fiber_dim() const { return kernel.fiber_dim(); }
    Index size() const { return static_cast<Index>(points.size()); }
    /// Index of s among the sample points, or -1.
    Index find(const BasePoint& s, double tol = 1e-12) const;
};

using RKHSHandle = std::shared_ptr<const SampledRKHS>;

/// f = sum_i K(., t_i) c_i, coefficients stacked block by block.
struct RKHSElement {
    CVector coefficients;
    RKHSHandle owner;
};

namespace rkhs {

/// Assembles the Gram matrix, certifies positivity and computes the
/// pseudo-inverse of (G + ridge I). Throws std::invalid_argument on duplicate
/// points and when the Gram is not PSD within psd_tol.
RKHSHandle build_rkhs(const Kernel& k, std::vector<BasePoint> points, double ridge = 0.0,
                      double pinv_tau = numerics::kPinvThreshold, double psd_tol = numerics::kDefaultTolerance);

/// K(., s) v; s must be a sample point.
RKHSElement embed(const RKHSHandle& r, const BasePoint& s, const CVector& v);

RKHSElement zero(const RKHSHandle& r);

/// <f, g> = g^H G f (linear in f).
cplx inner(const SampledRKHS& r, const RKHSElement& f, const RKHSElement& g);

/// f(x) = sum_i kappa(x, t_i) c_i for any x in the kernel domain.
CVector evaluate(const SampledRKHS& r, const RKHSElement& f, const BasePoint& x);

/// Orthogonal projection onto the fiber image {K(., s) v}: coefficients
/// kappa(s,s)^-1 f(s) in the block of s.
RKHSElement project_fiber(const RKHSHandle& r, const BasePoint& s, const RKHSElement& f);

/// max |(kappa(s,t) v | w) - <P_s K(., t) v, K(., s) w>| over sample pairs and
/// fiber basis vectors.
double universality_residual(const RKHSHandle& r);

}  // namespace rkhs

RKHSElement operator+(const RKHSElement& f, const RKHSElement& g);
RKHSElement operator-(const RKHSElement& f, const RKHSElement& g);
RKHSElement operator*(cplx a, const RKHSElement& f);
}  // namespace kconn
