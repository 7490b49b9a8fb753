#pragma once

#include "kconn/base_point.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kconn {

/// Operator-valued reproducing kernel kappa(s, t) with fibers C^M.
///
/// The optional second-slot derivative returns d/de kappa(s, move_along(t, X, e))
/// at e = 0. Kernels without it fall back to the five-point stencil.
class Kernel {
public:
    using EvalFn = std::function<CMatrix(const BasePoint&, const BasePoint&)>;
    using SecondSlotFn = std::function<CMatrix(const BasePoint&, const BasePoint&, const TangentVector&)>;

    Kernel(std::string name, Domain domain, Index fiber_dim, EvalFn eval, SecondSlotFn d2 = {});

    /// kappa(s, t). Checks both points against the domain.
    CMatrix operator()(const BasePoint& s, const BasePoint& t) const;

    /// Directional derivative of t -> kappa(s, t) in direction X.
    CMatrix d2(const BasePoint& s, const BasePoint& t, const TangentVector& x,
               double h = numerics::kDefaultStep) const;

    bool has_analytic_d2() const { return static_cast<bool>(d2_); }
    const std::string& name() const { return name_; }
    const Domain& domain() const { return domain_; }
    Index fiber_dim() const { return fiber_dim_; }

    /// Stencil step adapted to the local distance from the domain boundary:
    /// h * min(1, boundary_distance(s)).
    double stencil_step(const BasePoint& s, double h = numerics::kDefaultStep) const;

    /// Same kernel with the analytic second-slot derivative removed.
    Kernel without_analytic_d2() const;
    /// Same kernel with the analytic second-slot derivative replaced.
    Kernel with_d2(SecondSlotFn d2) const;

private:
    std::string name_;
    Domain domain_;
    Index fiber_dim_;
    EvalFn eval_;
    SecondSlotFn d2_;
};

/// Base map zeta and fiber maps delta_s between two bundles.
///
/// delta_s maps the source fiber C^M into the target fiber; it is a
/// (target_dim x M) matrix. base_map empty means the identity on the base.
struct BundleMorphism {
    Domain source_domain;
    Index source_fiber_dim = 1;
    std::function<BasePoint(const BasePoint&)> base_map;
    std::function<CMatrix(const BasePoint&)> fiber_map;
    /// Tangent map of zeta; may be empty when base_map is the identity.
    std::function<TangentVector(const BasePoint&, const TangentVector&)> tangent_map;

    BasePoint zeta(const BasePoint& s) const;
    CMatrix delta(const BasePoint& s) const;
    TangentVector push_tangent(const BasePoint& s, const TangentVector& x) const;
};

namespace kernels {

CMatrix eval_kernel(const Kernel& k, const BasePoint& s, const BasePoint& t);

/// 1 / (1 - conj(t) s)^nu on the unit disk, nu >= 1.
Kernel make_bergman_disk(double nu);
/// (1/4) (2i)^nu / (z - conj(w))^nu on the upper half-plane, nu >= 1.
Kernel make_bergman_halfplane(double nu);
/// exp(beta(z, w)) with beta(z, w) = w* B z, B Hermitian PSD.
Kernel make_fock(const CMatrix& beta);
/// Fock kernel with beta(z, w) = sum_j z_j conj(w_j) on C^d.
Kernel make_fock_standard(Index d);
/// kappa(s, t) = a(s) a(t)*  for a feature map a into C^M (rank-one operators).
Kernel make_feature_kernel(std::string name, Domain domain, Index fiber_dim,
                           std::function<CVector(const BasePoint&)> feature);

/// Block Gram matrix, block (l, j) = kappa(t_l, t_j).
CMatrix gram_matrix(const Kernel& k, const std::vector<BasePoint>& points);

struct PositivityCertificate {
    bool is_psd = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// is_psd iff min eigenvalue >= -tol * max(1, lambda_max).
/// Throws std::invalid_argument if the matrix is not Hermitian within tol.
PositivityCertificate positivity_certificate(const CMatrix& gram, double tol = numerics::kDefaultTolerance);

/// (Theta* k)(s, t) = delta_s* k(zeta(s), zeta(t)) delta_t
Kernel pull_back_kernel(const BundleMorphism& theta, const Kernel& target);

struct AdmissibilityReport {
    /// min over sample points of the smallest eigenvalue of kappa(s, s)
    double min_sigma = 0.0;
    /// min over sample points and unit fiber vectors of the squared RKHS norm
    /// of the kernel section K(., s) v, computed from a factorization of the Gram
    double embedding_lower_bound = 0.0;
    /// max over sample pairs of |kappa(s,t)* - kappa(t,s)|
    double hermitian_residual = 0.0;
};

AdmissibilityReport admissibility_report(const Kernel& k, const std::vector<BasePoint>& points);

/// max over pairs of |kappa(s,t)* - kappa(t,s)|
double hermitian_symmetry_residual(const Kernel& k, const std::vector<BasePoint>& points);

}  // namespace kernels
}  // namespace kconn
