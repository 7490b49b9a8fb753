#pragma once

#include "kconn/kernels.hpp"
#include "kconn/rkhs.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kconn {

/// Section of a trivialized bundle: s -> F(s) in C^M, with an optional
/// analytic differential dF(s, X).
struct Section {
    Index fiber_dim = 1;
    std::function<CVector(const BasePoint&)> value;
    std::function<CVector(const BasePoint&, const TangentVector&)> differential;

    CVector operator()(const BasePoint& s) const;
    /// dF(s, X): the analytic differential when present, else the five-point stencil.
    CVector d(const BasePoint& s, const TangentVector& x, double h = numerics::kDefaultStep) const;
    /// dF(s, X) by the stencil regardless of an analytic differential.
    CVector numeric_d(const BasePoint& s, const TangentVector& x, double h = numerics::kDefaultStep) const;
};

Section constant_section(const CVector& v);

using ScalarField = std::function<cplx(const BasePoint&)>;

/// Curve t -> gamma(t) on [0, 1], with optional velocity.
struct Curve {
    std::function<BasePoint(double)> point;
    std::function<TangentVector(double)> velocity;

    BasePoint operator()(double t) const { return point(t); }
    /// Velocity at t; without an explicit closure, the stencil derivative of the
    /// point representative (C^d), u* u' (unitary) or [p', p] (Grassmann).
    TangentVector tangent(double t, double h = numerics::kDefaultStep) const;
};

/// Straight line a + t (b - a) in C^d.
Curve line_curve(const CVector& from, const CVector& to);

enum class Backend { ClosedForm, Direct, Sampled, Formula };

std::string backend_name(Backend b);

/// A covariant derivative: (section, point, tangent) -> fiber vector.
struct ConnectionEvaluator {
    Backend backend = Backend::Direct;
    std::string name;
    std::function<CVector(const Section&, const BasePoint&, const TangentVector&)> eval;

    CVector operator()(const Section& sigma, const BasePoint& s, const TangentVector& x) const {
        return eval(sigma, s, x);
    }
};

/// Field of connection forms: (s, X) -> alpha_s(X), an M x M matrix.
using ConnectionFormField = std::function<CMatrix(const BasePoint&, const TangentVector&)>;

struct Probe {
    BasePoint point;
    TangentVector direction;
};

namespace connections {

/// alpha_s(X) = kappa(s,s)^-1 d2 kappa(s,s)(X) at a fixed point s.
class ConnectionForm {
public:
    ConnectionForm(Kernel k, BasePoint s, double h = numerics::kDefaultStep);
    CMatrix operator()(const TangentVector& x) const;
    const CMatrix& kss_inverse() const { return kss_inv_; }

private:
    Kernel kernel_;
    BasePoint point_;
    CMatrix kss_inv_;
    double h_;
};

/// Throws SingularError when kappa(s,s) is not invertible.
ConnectionForm connection_form(const Kernel& k, const BasePoint& s, double h = numerics::kDefaultStep);
ConnectionFormField connection_form_field(const Kernel& k, double h = numerics::kDefaultStep);

/// dF(X) + alpha_s(X) F(s)
CVector covariant_derivative_closed(const Kernel& k, const Section& sigma, const BasePoint& s,
                                    const TangentVector& x, double h = numerics::kDefaultStep);

/// kappa(s,s)^-1 d/dt|0 [kappa(s, gamma(t)) sigma(gamma(t))] along gamma(t) = move_along(s, X, t).
CVector covariant_derivative_direct(const Kernel& k, const Section& sigma, const BasePoint& s,
                                    const TangentVector& x, double h = numerics::kDefaultStep);

/// Stencil points gamma(-2h'), gamma(-h'), gamma(h'), gamma(2h') with the
/// boundary-adapted step h' = k.stencil_step(s, h).
std::vector<BasePoint> stencil_points(const Kernel& k, const BasePoint& s, const TangentVector& x,
                                      double h = numerics::kDefaultStep);

/// Differentiates t -> K(., gamma(t)) sigma(gamma(t)) in the sampled space,
/// projects on the fiber of s, evaluates at s and applies kappa(s,s)^-1.
/// s and all stencil points must be sample points of r.
CVector covariant_derivative_sampled(const RKHSHandle& r, const Section& sigma, const BasePoint& s,
                                     const TangentVector& x, double h = numerics::kDefaultStep);

ConnectionEvaluator closed_form_evaluator(const Kernel& k, double h = numerics::kDefaultStep);
ConnectionEvaluator direct_evaluator(const Kernel& k, double h = numerics::kDefaultStep);
/// Builds the sampled space on {s} and the stencil points at each call.
ConnectionEvaluator sampled_evaluator(const Kernel& k, double h = numerics::kDefaultStep);
/// d + alpha for a given connection-form field.
ConnectionEvaluator form_evaluator(ConnectionFormField alpha, std::string name = "form",
                                   double h = numerics::kDefaultStep);

/// Solves v' = -alpha_{gamma(t)}(gamma'(t)) v on [0, 1] with classical RK4 and
/// fixed step 1/steps; returns v(1).
CVector parallel_transport(const Kernel& k, const Curve& gamma, const CVector& v0, int steps);

struct TransportRow {
    int steps = 0;
    CVector value;
    /// |value - reference|
    double delta = 0.0;
    /// log2 of the delta ratio to the previous row when the step count doubled, else 0
    double order = 0.0;
};

/// parallel_transport at each step count, compared against a reference value.
std::vector<TransportRow> transport_table(const Kernel& k, const Curve& gamma, const CVector& v0,
                                          const std::vector<int>& steps, const CVector& reference);

/// max over probes of |D(f sigma)(X) - df(X) sigma(s) - f(s) D sigma(X)|
double leibniz_residual(const ConnectionEvaluator& nabla, const ScalarField& f, const Section& sigma,
                        const std::vector<Probe>& probes, double h = numerics::kDefaultStep);

/// alpha(s, X) = delta_s^-1 alpha~(zeta(s), T zeta X) delta_s + delta_s^-1 d delta(X)
ConnectionFormField gauge_pullback_connection(const BundleMorphism& theta, ConnectionFormField target_form,
                                              double h = numerics::kDefaultStep);

/// max over probes of |delta_s (D sigma)(s, X) - D~ sigma~(zeta(s), T zeta X)|.
/// Requires delta_s sigma(s) = sigma~(zeta(s)) within 1e-10 on the probes.
double intertwining_residual(const BundleMorphism& theta, const ConnectionEvaluator& nabla,
                             const ConnectionEvaluator& nabla_target, const Section& sigma,
                             const Section& sigma_target, const std::vector<Probe>& probes);

/// Hard error when an analytic differential disagrees with the stencil by
/// more than tol on any probe.
void validate_differential(const Section& sigma, const std::vector<Probe>& probes, double tol = 1e-5);

}  // namespace connections
}  // namespace kconn
