#include "kconn/connections.hpp"

#include <algorithm>
#include <cmath>

namespace kconn {

CVector Section::operator()(const BasePoint& s) const {
    CVector v = value(s);
    if (v.size() != fiber_dim) throw std::logic_error("Section returned a vector of the wrong dimension");
    return v;
}

CVector Section::d(const BasePoint& s, const TangentVector& x, double h) const {
    if (differential) return differential(s, x);
    return numeric_d(s, x, h);
}

CVector Section::numeric_d(const BasePoint& s, const TangentVector& x, double h) const {
    return numerics::directional_derivative([&](double t) { return (*this)(move_along(s, x, t)); }, h);
}

Section constant_section(const CVector& v) {
    Section sigma;
    sigma.fiber_dim = v.size();
    sigma.value = [v](const BasePoint&) { return v; };
    sigma.differential = [v](const BasePoint&, const TangentVector&) { return CVector(CVector::Zero(v.size())); };
    return sigma;
}

TangentVector Curve::tangent(double t, double h) const {
    if (velocity) return velocity(t);
    const BasePoint here = point(t);
    if (std::holds_alternative<CVector>(here)) {
        return numerics::directional_derivative([&](double e) { return as_vector(point(t + e)); }, h);
    }
    if (const auto* u = std::get_if<UnitaryElement>(&here)) {
        const CMatrix du = numerics::directional_derivative([&](double e) { return as_unitary(point(t + e)); }, h);
        const CMatrix a = u->u.adjoint() * du;
        return Generator{0.5 * (a - a.adjoint())};
    }
    const CMatrix& p = as_grass(here).projector;
    const CMatrix dp = numerics::directional_derivative([&](double e) { return as_grass(point(t + e)).projector; }, h);
    const CMatrix a = dp * p - p * dp;
    return Generator{0.5 * (a - a.adjoint())};
}

Curve line_curve(const CVector& from, const CVector& to) {
    Curve c;
    c.point = [from, to](double t) -> BasePoint { return CVector(from + t * (to - from)); };
    c.velocity = [from, to](double) -> TangentVector { return CVector(to - from); };
    return c;
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::ClosedForm: return "closed";
        case Backend::Direct: return "direct";
        case Backend::Sampled: return "sampled";
        case Backend::Formula: return "formula";
    }
    return "unknown";
}

namespace connections {

ConnectionForm::ConnectionForm(Kernel k, BasePoint s, double h)
    : kernel_(std::move(k)), point_(std::move(s)), h_(h) {
    kss_inv_ = numerics::hermitian_inverse(kernel_(point_, point_));
}

CMatrix ConnectionForm::operator()(const TangentVector& x) const {
    return kss_inv_ * kernel_.d2(point_, point_, x, h_);
}

ConnectionForm connection_form(const Kernel& k, const BasePoint& s, double h) { return ConnectionForm(k, s, h); }

ConnectionFormField connection_form_field(const Kernel& k, double h) {
    return [k, h](const BasePoint& s, const TangentVector& x) { return ConnectionForm(k, s, h)(x); };
}

CVector covariant_derivative_closed(const Kernel& k, const Section& sigma, const BasePoint& s,
                                    const TangentVector& x, double h) {
    return sigma.d(s, x, h) + connection_form(k, s, h)(x) * sigma(s);
}

CVector covariant_derivative_direct(const Kernel& k, const Section& sigma, const BasePoint& s,
                                    const TangentVector& x, double h) {
    const CMatrix kss_inv = numerics::hermitian_inverse(k(s, s));
    const double step = k.stencil_step(s, h);
    const CVector derivative = numerics::directional_derivative(
        [&](double t) {
            const BasePoint gt = move_along(s, x, t);
            return CVector(k(s, gt) * sigma(gt));
        },
        step);
    return kss_inv * derivative;
}

std::vector<BasePoint> stencil_points(const Kernel& k, const BasePoint& s, const TangentVector& x, double h) {
    const double step = k.stencil_step(s, h);
    return {move_along(s, x, -2.0 * step), move_along(s, x, -step), move_along(s, x, step),
            move_along(s, x, 2.0 * step)};
}

CVector covariant_derivative_sampled(const RKHSHandle& r, const Section& sigma, const BasePoint& s,
                                     const TangentVector& x, double h) {
    static constexpr double kWeights[4] = {1.0, -8.0, 8.0, -1.0};
    const double step = r->kernel.stencil_step(s, h);
    const auto nodes = stencil_points(r->kernel, s, x, h);

    RKHSElement derivative = rkhs::zero(r);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (r->find(nodes[i]) < 0) {
            throw std::invalid_argument("covariant_derivative_sampled: stencil point " + describe(nodes[i]) +
                                        " is missing from the sample");
        }
        derivative = derivative + cplx(kWeights[i] / (12.0 * step)) * rkhs::embed(r, nodes[i], sigma(nodes[i]));
    }
    const RKHSElement projected = rkhs::project_fiber(r, s, derivative);
    const Index i = r->find(s);
    const Index m = r->fiber_dim();
    const CMatrix kss_inv = numerics::hermitian_inverse(r->gram.block(i * m, i * m, m, m));
    return kss_inv * rkhs::evaluate(*r, projected, s);
}

ConnectionEvaluator closed_form_evaluator(const Kernel& k, double h) {
    return {Backend::ClosedForm, "closed",
            [k, h](const Section& sigma, const BasePoint& s, const TangentVector& x) {
                return covariant_derivative_closed(k, sigma, s, x, h);
            }};
}

ConnectionEvaluator direct_evaluator(const Kernel& k, double h) {
    return {Backend::Direct, "direct",
            [k, h](const Section& sigma, const BasePoint& s, const TangentVector& x) {
                return covariant_derivative_direct(k, sigma, s, x, h);
            }};
}

ConnectionEvaluator sampled_evaluator(const Kernel& k, double h) {
    return {Backend::Sampled, "sampled",
            [k, h](const Section& sigma, const BasePoint& s, const TangentVector& x) {
                auto points = stencil_points(k, s, x, h);
                points.insert(points.begin(), s);
                const RKHSHandle r = rkhs::build_rkhs(k, std::move(points));
                return covariant_derivative_sampled(r, sigma, s, x, h);
            }};
}

ConnectionEvaluator form_evaluator(ConnectionFormField alpha, std::string name, double h) {
    return {Backend::Formula, std::move(name),
            [alpha = std::move(alpha), h](const Section& sigma, const BasePoint& s, const TangentVector& x) {
                return CVector(sigma.d(s, x, h) + alpha(s, x) * sigma(s));
            }};
}

CVector parallel_transport(const Kernel& k, const Curve& gamma, const CVector& v0, int steps) {
    if (steps < 1) throw std::invalid_argument("parallel_transport: steps must be >= 1");
    if (v0.size() != k.fiber_dim()) throw std::invalid_argument("parallel_transport: v0 has the wrong dimension");
    const double dt = 1.0 / steps;
    auto rhs = [&](double t, const CVector& v) {
        const BasePoint p = gamma(t);
        return CVector(-(connection_form(k, p)(gamma.tangent(t)) * v));
    };
    CVector v = v0;
    for (int n = 0; n < steps; ++n) {
        const double t = n * dt;
        const CVector k1 = rhs(t, v);
        const CVector k2 = rhs(t + 0.5 * dt, v + 0.5 * dt * k1);
        const CVector k3 = rhs(t + 0.5 * dt, v + 0.5 * dt * k2);
        const CVector k4 = rhs(t + dt, v + dt * k3);
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return v;
}

std::vector<TransportRow> transport_table(const Kernel& k, const Curve& gamma, const CVector& v0,
                                          const std::vector<int>& steps, const CVector& reference) {
    std::vector<TransportRow> rows;
    for (int n : steps) {
        TransportRow row;
        row.steps = n;
        row.value = parallel_transport(k, gamma, v0, n);
        row.delta = (row.value - reference).norm();
        if (!rows.empty() && n == 2 * rows.back().steps && row.delta > 0.0 && rows.back().delta > 0.0) {
            row.order = std::log2(rows.back().delta / row.delta);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double leibniz_residual(const ConnectionEvaluator& nabla, const ScalarField& f, const Section& sigma,
                        const std::vector<Probe>& probes, double h) {
    Section product;
    product.fiber_dim = sigma.fiber_dim;
    product.value = [&](const BasePoint& s) { return CVector(f(s) * sigma(s)); };
    double worst = 0.0;
    for (const auto& probe : probes) {
        const cplx df = numerics::directional_derivative([&](double t) { return f(move_along(probe.point, probe.direction, t)); }, h);
        const CVector lhs = nabla(product, probe.point, probe.direction);
        const CVector rhs = df * sigma(probe.point) + f(probe.point) * nabla(sigma, probe.point, probe.direction);
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

ConnectionFormField gauge_pullback_connection(const BundleMorphism& theta, ConnectionFormField target_form, double h) {
    return [theta, target_form = std::move(target_form), h](const BasePoint& s, const TangentVector& x) {
        const CMatrix delta = theta.delta(s);
        const CMatrix delta_inv = numerics::general_inverse(delta);
        const double step = h * std::min(1.0, theta.source_domain.boundary_distance(s));
        const CMatrix d_delta =
            numerics::directional_derivative([&](double t) { return theta.delta(move_along(s, x, t)); }, step);
        return CMatrix(delta_inv * target_form(theta.zeta(s), theta.push_tangent(s, x)) * delta + delta_inv * d_delta);
    };
}

double intertwining_residual(const BundleMorphism& theta, const ConnectionEvaluator& nabla,
                             const ConnectionEvaluator& nabla_target, const Section& sigma,
                             const Section& sigma_target, const std::vector<Probe>& probes) {
    for (const auto& probe : probes) {
        const CVector lifted = theta.delta(probe.point) * sigma(probe.point);
        const CVector target = sigma_target(theta.zeta(probe.point));
        if ((lifted - target).norm() > 1e-10 * std::max(1.0, target.norm())) {
            throw std::invalid_argument("intertwining_residual: sections are not related by the morphism at " +
                                        describe(probe.point));
        }
    }
    double worst = 0.0;
    for (const auto& probe : probes) {
        const CVector lhs = theta.delta(probe.point) * nabla(sigma, probe.point, probe.direction);
        const CVector rhs = nabla_target(sigma_target, theta.zeta(probe.point),
                                         theta.push_tangent(probe.point, probe.direction));
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

void validate_differential(const Section& sigma, const std::vector<Probe>& probes, double tol) {
    if (!sigma.differential) return;
    for (const auto& probe : probes) {
        const CVector analytic = sigma.differential(probe.point, probe.direction);
        const CVector numeric = sigma.numeric_d(probe.point, probe.direction);
        if ((analytic - numeric).norm() > tol * std::max(1.0, numeric.norm())) {
            throw std::invalid_argument("section differential disagrees with numeric differentiation at " +
                                        describe(probe.point));
        }
    }
}

}  // namespace connections
}  // namespace kconn
