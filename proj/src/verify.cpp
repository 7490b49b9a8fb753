#include "kconn/verify.hpp"

#include "kconn/connections.hpp"
#include "kconn/cpmaps.hpp"
#include "kconn/grassmann.hpp"
#include "kconn/kernel_spec.hpp"
#include "kconn/random.hpp"
#include "kconn/rkhs.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace kconn::verify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Recorder {
public:
    Recorder(Report& report, std::string module) : report_(report), module_(std::move(module)) {}

    void upper(const std::string& name, double value, double tol) { add(name, value, tol, Bound::Upper); }
    void lower(const std::string& name, double value, double bound) { add(name, value, bound, Bound::Lower); }
    void note(const std::string& text) { report_.notes.push_back(module_ + ": " + text); }

    /// Runs a block of checks; an exception becomes a failed check named
    /// after the block.
    template <class F>
    void block(const std::string& name, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            add(name + ".error", kNaN, 0.0, Bound::Upper);
            note(name + " raised: " + e.what());
        }
    }

private:
    void add(const std::string& name, double value, double tol, Bound bound) {
        CheckResult c;
        c.name = module_ + "." + name;
        c.value = value;
        c.tolerance = tol;
        c.bound = bound;
        c.passed = std::isfinite(value) && (bound == Bound::Upper ? value < tol : value >= tol);
        report_.checks.push_back(std::move(c));
    }

    Report& report_;
    std::string module_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------- fixtures

struct Fixture {
    Kernel kernel;
    Section sigma;
    ScalarField f;
    int probes = 20;  // backend-agreement probe count

    std::string name() const { return kernel.name(); }
    BasePoint point(Rng& rng) const { return random_point(kernel.domain(), rng); }
    /// Sample for admissibility checks: half-plane points with Im z in [0.1, 0.45]
    /// so that kappa(z, z) = Im(z)^-nu / 4 stays above 0.5.
    BasePoint admissible_point(Rng& rng) const { return random_point(kernel.domain(), rng, 0.1, 0.45); }
    TangentVector direction(const BasePoint& s, Rng& rng) const { return random_direction(kernel.domain(), s, rng); }
};

cplx z0(const BasePoint& s) { return as_vector(s)(0); }

// 1 + z/2 - z^2/4 + 0.3i conj(z)
Section planar_section() {
    Section sigma;
    sigma.fiber_dim = 1;
    sigma.value = [](const BasePoint& s) {
        const cplx z = z0(s);
        return CVector::Constant(1, 1.0 + 0.5 * z - 0.25 * z * z + cplx(0, 0.3) * std::conj(z)).eval();
    };
    sigma.differential = [](const BasePoint& s, const TangentVector& x) {
        const cplx z = z0(s);
        const cplx w = std::get<CVector>(x)(0);
        return CVector::Constant(1, (0.5 - 0.5 * z) * w + cplx(0, 0.3) * std::conj(w)).eval();
    };
    return sigma;
}

ScalarField planar_field() {
    return [](const BasePoint& s) {
        const cplx z = z0(s);
        return 1.0 + z * z + 0.5 * std::conj(z);
    };
}

// z_0 + z_0 z_{d-1} / 2 + 0.2 conj(z_{d-1})
Section fock_section(Index d) {
    Section sigma;
    sigma.fiber_dim = 1;
    sigma.value = [d](const BasePoint& s) {
        const CVector& z = as_vector(s);
        return CVector::Constant(1, z(0) + 0.5 * z(0) * z(d - 1) + 0.2 * std::conj(z(d - 1))).eval();
    };
    sigma.differential = [d](const BasePoint& s, const TangentVector& x) {
        const CVector& z = as_vector(s);
        const CVector& w = std::get<CVector>(x);
        return CVector::Constant(1, w(0) + 0.5 * (w(0) * z(d - 1) + z(0) * w(d - 1)) + 0.2 * std::conj(w(d - 1)))
            .eval();
    };
    return sigma;
}

ScalarField fock_field() {
    return [](const BasePoint& s) {
        const CVector& z = as_vector(s);
        return 1.0 + z(0) * std::conj(z(z.size() - 1)) + 0.5 * z.sum();
    };
}

ScalarField trace_field(const CMatrix& w) {
    return [w](const BasePoint& s) {
        if (const auto* g = std::get_if<GrassPoint>(&s)) return cplx(1.0) + (w * g->projector).trace();
        return cplx(1.0) + (w * as_unitary(s)).trace();
    };
}

/// F(q) = q v0 + q M q v1, fiber-valued on every Grassmann point.
grassmann::AmbientSection ambient_section(const CVector& v0, const CMatrix& m, const CVector& v1) {
    return [v0, m, v1](const HermitianProjector& q) {
        const CMatrix& p = q.matrix();
        return CVector(p * v0 + p * m * p * v1);
    };
}

/// phi(u) = B* u* (v0 + W u P u* v1): equivariant under block unitaries.
grassmann::EquivariantSection equivariant_section(const HermitianProjector& p, const CVector& v0, const CMatrix& w,
                                                  const CVector& v1) {
    const CMatrix b = p.range_basis();
    const CMatrix pm = p.matrix();
    return [b, pm, v0, w, v1](const CMatrix& u) {
        return CVector(b.adjoint() * u.adjoint() * (v0 + w * u * pm * u.adjoint() * v1));
    };
}

/// sigma(u) = L u c + L2 u* c2 with analytic differential along u exp(t a).
Section cp_section(const CMatrix& l, const CVector& c, const CMatrix& l2, const CVector& c2) {
    Section sigma;
    sigma.fiber_dim = l.rows();
    sigma.value = [=](const BasePoint& s) {
        const CMatrix& u = as_unitary(s);
        return CVector(l * u * c + l2 * u.adjoint() * c2);
    };
    sigma.differential = [=](const BasePoint& s, const TangentVector& x) {
        const CMatrix& u = as_unitary(s);
        const CMatrix& a = std::get<Generator>(x).a;
        return CVector(l * u * a * c - l2 * a * u.adjoint() * c2);
    };
    return sigma;
}

struct FixtureData {
    CVector v0, v1;
    CMatrix m;
    CVector h0, h1;
    CMatrix hw;
    CMatrix w4, w3;
    CMatrix l, l2;
    CVector c, c2;
    cpmaps::CPMap psi;
};

FixtureData make_data(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 1000));
    FixtureData d{
        rng.complex_vector(4), rng.complex_vector(4), rng.complex_matrix(4, 4),
        rng.complex_vector(3), rng.complex_vector(3), rng.complex_matrix(3, 3),
        rng.complex_matrix(4, 4), rng.complex_matrix(3, 3),
        rng.complex_matrix(2, 3), rng.complex_matrix(2, 3), rng.complex_vector(3), rng.complex_vector(3),
        cpmaps::random_unital_cp(3, 2, 3, derive_seed(seed, 1001)),
    };
    return d;
}

Kernel disk_kernel(double nu, bool fault) {
    Kernel k = kernels::make_bergman_disk(nu);
    if (!fault) return k;
    return k.with_d2([k](const BasePoint& s, const BasePoint& t, const TangentVector& x) {
        return CMatrix(-k.d2(s, t, x));
    });
}

std::vector<Fixture> builtin_fixtures(const Options& opt, const FixtureData& d) {
    std::vector<Fixture> out;
    for (double nu : {1.0, 2.0, 3.0}) out.push_back({disk_kernel(nu, opt.inject_disk_sign_fault), planar_section(), planar_field(), 50});
    for (double nu : {1.0, 2.0}) out.push_back({kernels::make_bergman_halfplane(nu), planar_section(), planar_field(), 50});
    out.push_back({kernels::make_fock_standard(3), fock_section(3), fock_field(), 50});
    out.push_back({grassmann::universal_kernel(4, 2),
                   grassmann::tautological_section(ambient_section(d.v0, d.m, d.v1), 2), trace_field(d.w4), 20});
    const HermitianProjector p1 = HermitianProjector::coordinate(3, 1);
    out.push_back({grassmann::homogeneous_kernel(p1),
                   grassmann::homogeneous_section(equivariant_section(p1, d.h0, d.hw, d.h1), 1), trace_field(d.w3),
                   20});
    out.push_back({cpmaps::cp_kernel(d.psi), cp_section(d.l, d.c, d.l2, d.c2), trace_field(d.w3), 20});
    return out;
}

TangentVector combine(double a, const TangentVector& x, double b, const TangentVector& y) { return a * x + b * y; }

// ---------------------------------------------------------------- numerics

void numerics_checks(Recorder& rec, Rng& rng) {
    rec.block("eigh", [&] {
        for (Index n : {6, 64}) {
            const CMatrix m = rng.hermitian(n);
            const auto eig = numerics::hermitian_eigh(m);
            const std::string tag = "[" + std::to_string(n) + "]";
            rec.upper("eigh_reconstruction" + tag, (m - eig.reconstruct()).norm() / std::max(1.0, m.norm()), 1e-12);
            rec.upper("eigh_orthonormality" + tag,
                      (eig.vectors.adjoint() * eig.vectors - CMatrix::Identity(n, n)).norm(), 1e-12);
            bool ascending = true;
            for (Index i = 1; i < n; ++i) ascending = ascending && eig.values(i - 1) <= eig.values(i);
            rec.upper("eigh_ascending" + tag, ascending ? 0.0 : 1.0, 0.5);
        }
    });
    rec.block("pinv", [&] {
        const CMatrix a = rng.complex_matrix(6, 4);
        const CMatrix g = a * a.adjoint();
        const CMatrix gp = numerics::pinv_threshold(g);
        rec.upper("pinv_range_identity", (g * gp * g - g).norm(), 1e-10);
        rec.upper("pinv_inverse_identity", (gp * g * gp - gp).norm(), 1e-10);
    });
    rec.block("derivative", [&] {
        const CVector v = rng.complex_vector(3);
        const CVector d = numerics::directional_derivative([&](double t) { return CVector(std::exp(t) * v); });
        rec.upper("derivative_exponential", (d - v).norm(), 1e-10);
        std::vector<CVector> c;
        for (int i = 0; i < 5; ++i) c.push_back(rng.complex_vector(3));
        const CVector dp = numerics::directional_derivative([&](double t) {
            return CVector(c[0] + t * c[1] + t * t * c[2] + t * t * t * c[3] + t * t * t * t * c[4]);
        });
        rec.upper("derivative_quartic_relative", (dp - c[1]).norm() / c[1].norm(), 1e-10);
    });
}

// ---------------------------------------------------------------- kernels

void kernels_checks(Recorder& rec, Rng& rng, const Options& opt, const std::vector<Fixture>& fixtures) {
    rec.block("examples", [&] {
        const auto pt = [](cplx z) { return BasePoint(CVector::Constant(1, z).eval()); };
        double worst = 0.0;
        worst = std::max(worst, std::abs(kernels::make_bergman_disk(2)(pt(0.5), pt(0.5))(0, 0) - 16.0 / 9.0));
        worst = std::max(worst, std::abs(kernels::make_bergman_disk(2)(pt(0.0), pt(0.0))(0, 0) - 1.0));
        worst = std::max(worst, std::abs(kernels::make_bergman_disk(1)(pt(0.0), pt(0.5))(0, 0) - 1.0));
        worst = std::max(worst,
                         std::abs(kernels::make_bergman_halfplane(1)(pt(cplx(0, 1)), pt(cplx(0, 1)))(0, 0) - 0.25));
        CVector e1 = CVector::Zero(2);
        e1(0) = 1.0;
        worst = std::max(worst, std::abs(kernels::make_fock_standard(2)(e1, e1)(0, 0) - std::exp(1.0)));
        rec.upper("formula_examples", worst, 1e-12);
    });
    for (const auto& fx : fixtures) {
        rec.block("fixture[" + fx.name() + "]", [&] {
            std::vector<BasePoint> sample;
            for (int i = 0; i < 12; ++i) sample.push_back(fx.point(rng));
            rec.upper("hermitian_symmetry[" + fx.name() + "]", kernels::hermitian_symmetry_residual(fx.kernel, sample),
                      1e-10);
            const auto cert = kernels::positivity_certificate(kernels::gram_matrix(fx.kernel, sample), opt.tolerance);
            rec.upper("gram_psd_violation[" + fx.name() + "]",
                      std::max(0.0, -cert.min_eigenvalue) / std::max(1.0, cert.max_eigenvalue), opt.tolerance);

            std::vector<BasePoint> adm;
            for (int i = 0; i < 8; ++i) adm.push_back(fx.admissible_point(rng));
            const auto report = kernels::admissibility_report(fx.kernel, adm);
            rec.lower("admissibility_min_sigma[" + fx.name() + "]", report.min_sigma, 0.5);
            rec.lower("admissibility_embedding_bound[" + fx.name() + "]", report.embedding_lower_bound, 0.5);
            rec.upper("admissibility_agreement[" + fx.name() + "]",
                      std::abs(report.min_sigma - report.embedding_lower_bound), 1e-8);
        });
    }
    rec.block("degenerate", [&] {
        const Kernel k = kernels::make_feature_kernel("rank-one", Domain{DomainKind::Disk, 1, 0}, 2, [](const BasePoint& s) {
            CVector a(2);
            a << 1.0, z0(s);
            return a;
        });
        std::vector<BasePoint> pts;
        for (int i = 0; i < 8; ++i) pts.push_back(random_point(k.domain(), rng));
        const auto report = kernels::admissibility_report(k, pts);
        rec.upper("degenerate_min_sigma", std::abs(report.min_sigma), 1e-8);
        rec.upper("degenerate_embedding_bound", std::abs(report.embedding_lower_bound), 1e-8);
    });
    rec.block("pullback", [&] {
        const Kernel disk = kernels::make_bergman_disk(2);
        BundleMorphism theta;
        theta.source_domain = disk.domain();
        theta.fiber_map = [](const BasePoint&) { return CMatrix(2.0 * CMatrix::Identity(1, 1)); };
        const Kernel pulled = kernels::pull_back_kernel(theta, disk);
        double worst = 0.0;
        std::vector<BasePoint> pts;
        for (int i = 0; i < 6; ++i) pts.push_back(random_point(disk.domain(), rng));
        for (const auto& s : pts) {
            for (const auto& t : pts) worst = std::max(worst, (pulled(s, t) - 4.0 * disk(s, t)).norm());
        }
        rec.upper("pullback_scaling", worst, 1e-12);
        const auto cert = kernels::positivity_certificate(kernels::gram_matrix(pulled, pts), opt.tolerance);
        rec.upper("pullback_psd_violation", std::max(0.0, -cert.min_eigenvalue) / std::max(1.0, cert.max_eigenvalue),
                  opt.tolerance);
    });
}

// ---------------------------------------------------------------- rkhs

void rkhs_checks(Recorder& rec, Rng& rng, const std::vector<Fixture>& fixtures) {
    for (const auto& fx : fixtures) {
        rec.block("universality[" + fx.name() + "]", [&] {
            std::vector<BasePoint> pts;
            for (int i = 0; i < 8; ++i) pts.push_back(fx.point(rng));
            const RKHSHandle r = rkhs::build_rkhs(fx.kernel, pts);
            rec.upper("universality[" + fx.name() + "]", rkhs::universality_residual(r), 1e-8);
        });
    }
    for (std::size_t which : {std::size_t{1}, fixtures.size() - 1}) {
        const Fixture& fx = fixtures[which];
        rec.block("space[" + fx.name() + "]", [&] {
            std::vector<BasePoint> pts;
            for (int i = 0; i < 6; ++i) pts.push_back(fx.point(rng));
            const RKHSHandle r = rkhs::build_rkhs(fx.kernel, pts);
            const Index dim = r->gram.rows();
            const Index m = r->fiber_dim();
            double reproducing = 0.0;
            double idempotence = 0.0;
            double adjointness = 0.0;
            double generators = 0.0;
            for (int trial = 0; trial < 10; ++trial) {
                const RKHSElement f{rng.complex_vector(dim), r};
                const RKHSElement g{rng.complex_vector(dim), r};
                const BasePoint& s = pts[static_cast<std::size_t>(trial % 6)];
                const BasePoint& t = pts[static_cast<std::size_t>((trial + 1) % 6)];
                const CVector v = rng.complex_vector(m);
                const CVector w = rng.complex_vector(m);
                reproducing = std::max(reproducing,
                                       std::abs(rkhs::inner(*r, f, rkhs::embed(r, s, v)) - v.dot(rkhs::evaluate(*r, f, s))));
                const RKHSElement pf = rkhs::project_fiber(r, s, f);
                idempotence = std::max(idempotence, (rkhs::project_fiber(r, s, pf).coefficients - pf.coefficients).norm());
                adjointness = std::max(adjointness, std::abs(rkhs::inner(*r, pf, g) -
                                                             rkhs::inner(*r, f, rkhs::project_fiber(r, s, g))));
                generators = std::max(generators, std::abs(rkhs::inner(*r, rkhs::embed(r, s, v), rkhs::embed(r, t, w)) -
                                                           w.dot(fx.kernel(t, s) * v)));
            }
            rec.upper("reproducing_property[" + fx.name() + "]", reproducing, 1e-10);
            rec.upper("projection_idempotence[" + fx.name() + "]", idempotence, 1e-10);
            rec.upper("projection_adjointness[" + fx.name() + "]", adjointness, 1e-10);
            rec.upper("generator_inner_product[" + fx.name() + "]", generators, 1e-10);
        });
    }
}

// ---------------------------------------------------------------- connections

void connections_checks(Recorder& rec, Rng& rng, const std::vector<Fixture>& fixtures) {
    for (const auto& fx : fixtures) {
        rec.block("backends[" + fx.name() + "]", [&] {
            const auto closed = connections::closed_form_evaluator(fx.kernel);
            const auto direct = connections::direct_evaluator(fx.kernel);
            const auto sampled = connections::sampled_evaluator(fx.kernel);
            std::vector<Probe> probes;
            for (int i = 0; i < fx.probes; ++i) {
                BasePoint s = fx.point(rng);
                TangentVector x = fx.direction(s, rng);
                probes.push_back({std::move(s), std::move(x)});
            }
            connections::validate_differential(fx.sigma, probes);
            double cd = 0.0;
            double ds = 0.0;
            for (const auto& pr : probes) {
                const CVector a = closed(fx.sigma, pr.point, pr.direction);
                const CVector b = direct(fx.sigma, pr.point, pr.direction);
                const CVector c = sampled(fx.sigma, pr.point, pr.direction);
                cd = std::max(cd, (a - b).norm());
                ds = std::max(ds, (b - c).norm());
            }
            rec.upper("backend_agreement.closed_vs_direct[" + fx.name() + "]", cd, 1e-8);
            rec.upper("backend_agreement.direct_vs_sampled[" + fx.name() + "]", ds, 1e-6);

            std::vector<Probe> leibniz_probes(probes.begin(), probes.begin() + std::min<std::size_t>(30, probes.size()));
            while (leibniz_probes.size() < 30) {
                BasePoint s = fx.point(rng);
                TangentVector x = fx.direction(s, rng);
                leibniz_probes.push_back({std::move(s), std::move(x)});
            }
            for (const auto& nabla : {closed, direct, sampled}) {
                rec.upper("leibniz." + nabla.name + "[" + fx.name() + "]",
                          connections::leibniz_residual(nabla, fx.f, fx.sigma, leibniz_probes), 1e-6);
            }

            double linearity = 0.0;
            for (int i = 0; i < 10; ++i) {
                const auto& pr = probes[static_cast<std::size_t>(i)];
                const TangentVector y = fx.direction(pr.point, rng);
                const double a = rng.uniform(-2.0, 2.0);
                const double b = rng.uniform(-2.0, 2.0);
                const auto form = connections::connection_form(fx.kernel, pr.point);
                linearity = std::max(linearity, (form(combine(a, pr.direction, b, y)) -
                                                 (a * form(pr.direction) + b * form(y)))
                                                    .norm());
            }
            rec.upper("form_linearity[" + fx.name() + "]", linearity, 1e-10);
        });
    }

    rec.block("fock_form", [&] {
        const Kernel k = kernels::make_fock_standard(3);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const CVector z = rng.complex_vector(3);
            const CVector lambda = rng.complex_vector(3);
            const cplx expected = lambda.dot(z);  // sum_j z_j conj(lambda_j)
            worst = std::max(worst, std::abs(connections::connection_form(k, z)(lambda)(0, 0) - expected));
        }
        rec.upper("fock_form_formula", worst, 1e-8);
    });

    rec.block("disk_sign", [&] {
        const Kernel k2 = fixtures[1].kernel;
        const BasePoint s = CVector::Constant(1, cplx(0.5)).eval();
        const TangentVector one = CVector::Constant(1, cplx(1.0)).eval();
        const Section unit = constant_section(CVector::Constant(1, cplx(1.0)));
        const cplx oracle = connections::covariant_derivative_direct(k2, unit, s, one)(0);
        rec.upper("disk_sign.direct_oracle", std::abs(oracle - 4.0 / 3.0), 1e-6);
        const cplx closed = connections::connection_form(k2, s)(one)(0, 0);
        rec.upper("disk_sign.closed_form_value", std::abs(closed - oracle), 1e-8);
        double worst = 0.0;
        for (std::size_t f = 0; f < 3; ++f) {
            const Kernel& k = fixtures[f].kernel;
            for (int ri = 0; ri <= 9; ++ri) {
                for (int ai = 0; ai < 8; ++ai) {
                    const cplx z = std::polar(0.1 * ri, 0.25 * 3.14159265358979323846 * ai);
                    const BasePoint p = CVector::Constant(1, z).eval();
                    for (const cplx dir : {cplx(1.0), cplx(0.0, 1.0)}) {
                        const TangentVector x = CVector::Constant(1, dir).eval();
                        worst = std::max(worst, std::abs(connections::covariant_derivative_closed(k, unit, p, x)(0) -
                                                         connections::covariant_derivative_direct(k, unit, p, x)(0)));
                    }
                }
            }
        }
        rec.upper("disk_sign.closed_matches_oracle_grid", worst, 1e-8);
        rec.note("bergman-disk: the connection form with a leading minus sign, -nu s conj(w)/(1-|s|^2), "
                 "disagrees with the direct oracle (" + fmt(oracle.real()) + " at nu=2, s=0.5, w=1 versus " +
                 fmt(-4.0 / 3.0) + "); the shipped closed form uses +nu s conj(w)/(1-|s|^2)");
    });

    rec.block("halfplane_form", [&] {
        double worst = 0.0;
        for (double nu : {1.0, 2.0}) {
            const Kernel k = kernels::make_bergman_halfplane(nu);
            for (int i = 0; i < 20; ++i) {
                const BasePoint z = random_point(k.domain(), rng);
                const cplx lambda = rng.complex_normal();
                const double y = z0(z).imag();
                const cplx expected = nu * std::conj(lambda) / (cplx(0, 2) * y);
                const cplx got = connections::connection_form(k, z)(CVector::Constant(1, lambda).eval())(0, 0);
                worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
            }
        }
        rec.upper("halfplane_form_formula", worst, 1e-10);
        rec.note("bergman-halfplane: the direct oracle gives alpha(lambda) = nu conj(lambda) / (2i Im z); the form "
                 "-nu conj(lambda) / Im z differs by the factor -1/(2i) and is not used");
    });

    rec.block("transport", [&] {
        const Kernel disk = kernels::make_bergman_disk(1.0);
        const Curve gamma = line_curve(CVector::Constant(1, cplx(0.0)), CVector::Constant(1, cplx(0.5)));
        const CVector v0 = CVector::Constant(1, cplx(1.0));
        const CVector exact = CVector::Constant(1, cplx(std::sqrt(0.75)));
        const auto rows = connections::transport_table(disk, gamma, v0, {64, 128, 256, 512}, exact);
        double order = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < rows.size(); ++i) order = std::min(order, rows[i].order);
        rec.lower("transport_order", order, 3.7);
        rec.upper("transport_error_512", rows.back().delta, 1e-8);
        const BasePoint s = CVector::Constant(1, cplx(0.3, 0.2)).eval();
        Curve still;
        still.point = [s](double) { return s; };
        still.velocity = [](double) -> TangentVector { return CVector(CVector::Zero(1)); };
        rec.upper("transport_constant_curve", (connections::parallel_transport(disk, still, v0, 16) - v0).norm(), 1e-14);
    });

    rec.block("gauge", [&] {
        const Kernel disk = kernels::make_bergman_disk(2.0);
        BundleMorphism theta;
        theta.source_domain = disk.domain();
        theta.fiber_map = [](const BasePoint& s) { return CMatrix::Constant(1, 1, 1.0 + 0.5 * z0(s)).eval(); };
        const ConnectionFormField flat = [](const BasePoint&, const TangentVector&) { return CMatrix(CMatrix::Zero(1, 1)); };
        const ConnectionFormField pulled = connections::gauge_pullback_connection(theta, flat);

        const Section sigma = planar_section();
        Section lifted;
        lifted.fiber_dim = 1;
        lifted.value = [theta, sigma](const BasePoint& s) { return CVector(theta.delta(s) * sigma(s)); };

        std::vector<Probe> probes;
        double logderiv = 0.0;
        for (int i = 0; i < 20; ++i) {
            const BasePoint s = random_point(disk.domain(), rng);
            const TangentVector x = random_direction(disk.domain(), s, rng);
            const cplx expected = 0.5 * std::get<CVector>(x)(0) / (1.0 + 0.5 * z0(s));
            logderiv = std::max(logderiv, std::abs(pulled(s, x)(0, 0) - expected));
            probes.push_back({s, x});
        }
        rec.upper("gauge_logarithmic_derivative", logderiv, 1e-8);
        rec.upper("gauge_intertwining",
                  connections::intertwining_residual(theta, connections::form_evaluator(pulled),
                                                     connections::form_evaluator(flat), sigma, lifted, probes),
                  1e-6);

        // kernel pull-back: the connection of Theta* K equals the gauge pull-back of the connection of K
        const Kernel pulled_kernel = kernels::pull_back_kernel(theta, disk);
        const ConnectionFormField via_gauge = connections::gauge_pullback_connection(theta, connections::connection_form_field(disk));
        double forms = 0.0;
        for (const auto& pr : probes) {
            forms = std::max(forms, (connections::connection_form(pulled_kernel, pr.point)(pr.direction) -
                                     via_gauge(pr.point, pr.direction))
                                        .norm());
        }
        rec.upper("gauge_kernel_pullback_form", forms, 1e-8);
        rec.upper("kernel_pullback_intertwining",
                  connections::intertwining_residual(theta, connections::direct_evaluator(pulled_kernel),
                                                     connections::direct_evaluator(disk), sigma, lifted, probes),
                  1e-6);
    });
}

// ---------------------------------------------------------------- grassmann

void three_way_checks(Recorder& rec, Rng& rng, Index n, Index k, int probe_count) {
    const HermitianProjector p0 = HermitianProjector::coordinate(n, k);
    const grassmann::ReductiveStructure rs(p0);
    const auto f = ambient_section(rng.complex_vector(n), rng.complex_matrix(n, n), rng.complex_vector(n));
    const auto g_section = ambient_section(rng.complex_vector(n), rng.complex_matrix(n, n), rng.complex_vector(n));
    rec.block("three_way", [&] {
        const Kernel q = grassmann::universal_kernel(n, k);
        const Section sigma = grassmann::tautological_section(f, k);
        double univ_red = 0.0;
        double univ_gen = 0.0;
        double red_gen = 0.0;
        double closed_gen = 0.0;
        double metric = 0.0;
        double equivariance = 0.0;
        for (int i = 0; i < probe_count; ++i) {
            const CMatrix g = rng.unitary(n);
            const CMatrix x = grassmann::random_complement_generator(p0, rng.engine()());
            const HermitianProjector p = HermitianProjector::from_basis(g * p0.range_basis());
            const CMatrix a = g * x * g.adjoint();
            const GrassPoint s = GrassPoint::from_projector(p);

            const CVector univ = grassmann::universal_covariant_derivative(f, p, a);
            const CVector red = grassmann::reductive_covariant_derivative(f, rs, g, x);
            const CVector gen = s.basis * connections::covariant_derivative_direct(q, sigma, s, Generator{a});
            const CVector gen_closed = s.basis * connections::covariant_derivative_closed(q, sigma, s, Generator{a});
            univ_red = std::max(univ_red, (univ - red).norm());
            univ_gen = std::max(univ_gen, (univ - gen).norm());
            red_gen = std::max(red_gen, (red - gen).norm());
            closed_gen = std::max(closed_gen, (gen_closed - gen).norm());

            const CVector nf = univ;
            const CVector ng = grassmann::universal_covariant_derivative(g_section, p, a);
            const cplx d_inner = numerics::directional_derivative([&](double t) {
                const CMatrix e = numerics::expm_anti_hermitian(a, t);
                const HermitianProjector pt = HermitianProjector::from_basis(e * s.basis);
                return g_section(pt).dot(f(pt));
            });
            metric = std::max(metric, std::abs(d_inner - (g_section(p).dot(nf) + ng.dot(f(p)))));

            const CMatrix alpha = rng.unitary(n);
            const grassmann::AmbientSection moved = [&](const HermitianProjector& r) {
                return CVector(alpha * f(HermitianProjector::from_basis(alpha.adjoint() * r.range_basis())));
            };
            const HermitianProjector ap = HermitianProjector::from_basis(alpha * s.basis);
            const CVector lhs = grassmann::universal_covariant_derivative(moved, ap, alpha * a * alpha.adjoint());
            equivariance = std::max(equivariance, (lhs - alpha * univ).norm());
        }
        rec.upper("three_way.universal_vs_reductive", univ_red, 1e-6);
        rec.upper("three_way.universal_vs_generic", univ_gen, 1e-6);
        rec.upper("three_way.reductive_vs_generic", red_gen, 1e-6);
        rec.upper("three_way.generic_closed_vs_direct", closed_gen, 1e-8);
        rec.upper("metric_compatibility", metric, 1e-6);
        rec.upper("unitary_equivariance", equivariance, 1e-6);
    });
}

void grassmann_checks(Recorder& rec, Rng& rng, const FixtureData& d) {
    const HermitianProjector p0 = HermitianProjector::coordinate(4, 2);
    const grassmann::ReductiveStructure rs(p0);

    rec.block("reductive", [&] {
        std::vector<CMatrix> group;
        std::vector<CMatrix> probes;
        std::vector<CMatrix> complement;
        for (int i = 0; i < 20; ++i) {
            group.push_back(grassmann::random_block_unitary(p0, rng.engine()()));
            probes.push_back(rng.complex_matrix(4, 4));
            complement.push_back(grassmann::random_complement_generator(p0, rng.engine()()));
        }
        rec.upper("expectation_idempotence", grassmann::expectation_idempotence_residual(rs, probes), 1e-12);
        rec.upper("expectation_equivariance", grassmann::reductive_axioms_residual(rs, group, probes), 1e-12);
        double stays = 0.0;
        double norms = 0.0;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const CMatrix beta = grassmann::maurer_cartan(rs, group[i], complement[i]);
            stays = std::max(stays, rs.expectation(beta).norm());
            norms = std::max(norms, std::abs(beta.norm() - complement[i].norm()));
        }
        rec.upper("maurer_cartan_preserves_complement", stays, 1e-12);
        rec.upper("maurer_cartan_norm", norms, 1e-12);
        const CMatrix generic = rng.unitary(4);
        double rejected = 1.0;
        try {
            const std::vector<CMatrix> bad{generic};
            grassmann::reductive_axioms_residual(rs, bad, probes);
        } catch (const std::invalid_argument&) {
            rejected = 0.0;
        }
        rec.upper("rejects_non_commuting_element", rejected, 0.5);
    });

    rec.block("vertical_map", [&] {
        const CMatrix b = p0.range_basis();
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const CMatrix g = rng.unitary(4);
            const CVector f = b * rng.complex_vector(2);
            const CVector h = b * rng.complex_vector(2);
            const CMatrix x = rng.anti_hermitian(4);
            const auto out = grassmann::phi_e_vertical(rs, g, x, f, h);
            const auto again = grassmann::phi_e_vertical(rs, g, CMatrix::Zero(4, 4), out.first, out.second);
            worst = std::max(worst, (again.first - out.first).norm() + (again.second - out.second).norm());
            const auto horizontal =
                grassmann::phi_e_vertical(rs, g, grassmann::random_complement_generator(p0, rng.engine()()), f, h);
            worst = std::max(worst, (horizontal.first - f).norm() + (horizontal.second - h).norm());
        }
        rec.upper("vertical_map_idempotence", worst, 1e-12);
    });

    rec.block("universal_kernel", [&] {
        const Kernel q = grassmann::universal_kernel(2, 1);
        double worst = 0.0;
        for (double theta : {0.1, 0.7, 1.3}) {
            CMatrix b1 = CMatrix::Zero(2, 1);
            b1(0, 0) = 1.0;
            CMatrix b2(2, 1);
            b2 << std::cos(theta), cplx(0, std::sin(theta));
            const BasePoint s1 = GrassPoint::from_projector(HermitianProjector::from_basis(b1));
            const BasePoint s2 = GrassPoint::from_projector(HermitianProjector::from_basis(b2));
            worst = std::max(worst, std::abs(std::abs(q(s1, s2)(0, 0)) - std::cos(theta)));
        }
        rec.upper("universal_kernel_angle", worst, 1e-12);
    });

    three_way_checks(rec, rng, 4, 2, 20);

    rec.block("homogeneous", [&] {
        const HermitianProjector p1 = HermitianProjector::coordinate(3, 1);
        const Kernel k = grassmann::homogeneous_kernel(p1);
        const auto phi = equivariant_section(p1, d.h0, d.hw, d.h1);
        const Section sigma = grassmann::homogeneous_section(phi, 1);
        double worst = 0.0;
        double vertical = 0.0;
        for (int i = 0; i < 20; ++i) {
            const CMatrix u = rng.unitary(3);
            const CMatrix x = rng.anti_hermitian(3);
            const BasePoint s = UnitaryElement{u};
            const CVector formula = grassmann::homogeneous_covariant_derivative(phi, p1, u, x);
            const CVector generic = connections::covariant_derivative_direct(k, sigma, s, Generator{x});
            worst = std::max(worst, (formula - generic).norm());
            const CMatrix block = grassmann::conditional_expectation(p1, x);
            vertical = std::max(vertical, grassmann::homogeneous_covariant_derivative(phi, p1, u, block).norm());
        }
        rec.upper("homogeneous_formula_vs_generic", worst, 1e-6);
        rec.upper("homogeneous_vertical_directions", vertical, 1e-6);
    });
}

// ---------------------------------------------------------------- cpmaps

void cpmaps_checks(Recorder& rec, Rng& rng) {
    rec.block("dilation", [&] {
        double isometry = 0.0;
        double dilation = 0.0;
        double roundtrip = 0.0;
        double rank_mismatch = 0.0;
        double pullback = 0.0;
        double embedding = 0.0;
        double covariant = 0.0;
        double covariant_closed = 0.0;
        double intertwining = 0.0;
        double gauge = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Index count = 1 + i % 4;
            const cpmaps::CPMap psi = cpmaps::random_unital_cp(3, 2, count, rng.engine()());
            const auto s = cpmaps::stinespring_dilate(psi);
            isometry = std::max(isometry, (s.v.adjoint() * s.v - CMatrix::Identity(2, 2)).norm());
            dilation = std::max(dilation, cpmaps::verify_dilation(psi, s));
            roundtrip = std::max(roundtrip, (cpmaps::choi_from_kraus(psi.kraus()).choi() - psi.choi()).norm());
            rank_mismatch += std::abs(static_cast<double>(s.rank - count));

            const Kernel kpsi = cpmaps::cp_kernel(psi);
            const BundleMorphism theta = cpmaps::dilation_morphism(s);
            const Kernel k0 = cpmaps::compressed_lambda_kernel(s);
            const Kernel pulled = kernels::pull_back_kernel(theta, k0);
            const Kernel pulled_full = kernels::pull_back_kernel(cpmaps::dilation_embedding(s), cpmaps::lambda_kernel(s));
            if (i < 8) {
                const BasePoint a = UnitaryElement{rng.unitary(3)};
                const BasePoint b = UnitaryElement{rng.unitary(3)};
                pullback = std::max(pullback, (pulled(a, b) - kpsi(a, b)).norm());
                embedding = std::max(embedding, (pulled_full(a, b) - kpsi(a, b)).norm());
            }

            const Section sigma = cp_section(rng.complex_matrix(2, 3), rng.complex_vector(3), rng.complex_matrix(2, 3),
                                             rng.complex_vector(3));
            const CMatrix u = rng.unitary(3);
            const CMatrix a = rng.anti_hermitian(3);
            const BasePoint pu = UnitaryElement{u};
            const CVector formula = cpmaps::cp_covariant_derivative(psi, sigma, u, a);
            covariant = std::max(covariant,
                                 (formula - connections::covariant_derivative_direct(kpsi, sigma, pu, Generator{a})).norm());
            covariant_closed = std::max(
                covariant_closed, (formula - connections::covariant_derivative_closed(kpsi, sigma, pu, Generator{a})).norm());

            Section lifted;
            lifted.fiber_dim = 2;
            lifted.value = [theta, sigma](const BasePoint& x) { return CVector(theta.delta(x) * sigma(x)); };
            const std::vector<Probe> probes{{pu, Generator{a}}};
            intertwining = std::max(intertwining, connections::intertwining_residual(
                                                      theta, connections::direct_evaluator(kpsi),
                                                      connections::direct_evaluator(k0), sigma, lifted, probes));
            const auto form = connections::gauge_pullback_connection(theta, connections::connection_form_field(k0));
            gauge = std::max(gauge, (form(pu, Generator{a}) - psi(a)).norm());
        }
        rec.upper("stinespring_isometry", isometry, 1e-12);
        rec.upper("stinespring_dilation_residual", dilation, 1e-10);
        rec.upper("stinespring_rank_mismatch", rank_mismatch, 0.5);
        rec.upper("choi_kraus_roundtrip", roundtrip, 1e-10);
        rec.upper("pullback_identity", pullback, 1e-10);
        rec.upper("pullback_identity_full_dilation", embedding, 1e-10);
        rec.upper("covariant_formula_vs_generic", covariant, 1e-6);
        rec.upper("covariant_formula_vs_closed", covariant_closed, 1e-8);
        rec.upper("dilation_intertwining", intertwining, 1e-6);
        rec.upper("dilation_gauge_form", gauge, 1e-8);
    });

    rec.block("examples", [&] {
        const auto depol = cpmaps::depolarizing_map(2);
        rec.upper("depolarizing_rank", std::abs(static_cast<double>(cpmaps::stinespring_dilate(depol).rank - 4)), 0.5);
        CMatrix traceless = rng.anti_hermitian(2);
        traceless -= traceless.trace() / 2.0 * CMatrix::Identity(2, 2);
        const Section constant = constant_section(rng.complex_vector(2));
        rec.upper("depolarizing_kills_traceless",
                  cpmaps::cp_covariant_derivative(depol, constant, rng.unitary(2), traceless).norm(), 1e-12);
        const auto id = cpmaps::identity_map(3);
        const auto trivial = cpmaps::stinespring_dilate(id);
        rec.upper("identity_trivial_dilation",
                  std::abs(static_cast<double>(trivial.rank - 1)) + (trivial.v - CMatrix::Identity(3, 3)).norm(), 1e-12);

        const auto psi = cpmaps::random_unital_cp(3, 2, 2, rng.engine()());
        auto corrupted = cpmaps::stinespring_dilate(psi);
        corrupted.v(0, 0) += 1e-3;
        rec.lower("corrupted_dilation_detected", cpmaps::verify_dilation(psi, corrupted), 1e-6);

        const HermitianProjector p = HermitianProjector::from_basis(rng.unitary(4).leftCols(2));
        std::vector<CMatrix> probes;
        for (int i = 0; i < 10; ++i) probes.push_back(rng.complex_matrix(4, 4));
        rec.upper("compression_expectation", cpmaps::compression_expectation_residual(p, probes), 1e-12);
        rec.upper("compression_unital", cpmaps::compression_map(p).unitality_residual(), 1e-12);
    });
}

}  // namespace

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> Report::failed() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.passed) out.push_back(c.name);
    }
    std::sort(out.begin(), out.end());
    return out;
}

const CheckResult* Report::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string Report::to_json() const {
    nlohmann::json j;
    j["seed"] = options.seed;
    j["module"] = options.module;
    j["default_tolerance"] = options.tolerance;
    if (options.inject_disk_sign_fault) j["injected_fault"] = "disk-sign";
    nlohmann::json checks_json = nlohmann::json::object();
    for (const auto& c : checks) {
        nlohmann::json entry;
        if (std::isfinite(c.value)) {
            entry["value"] = c.value;
        } else {
            entry["value"] = nullptr;
        }
        entry["tolerance"] = c.tolerance;
        entry["bound"] = c.bound == Bound::Upper ? "upper" : "lower";
        entry["pass"] = c.passed;
        checks_json[c.name] = entry;
    }
    j["checks"] = checks_json;
    j["failed"] = failed();
    std::vector<std::string> sorted_notes = notes;
    std::sort(sorted_notes.begin(), sorted_notes.end());
    j["notes"] = sorted_notes;
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

Report grassmann_agreement(Index n, Index k, int probes, std::uint64_t seed) {
    if (n < 2 || k < 1 || k >= n) throw std::invalid_argument("grassmann agreement needs 1 <= k < n");
    if (probes < 1) throw std::invalid_argument("grassmann agreement needs at least one probe");
    Report report;
    report.options.seed = seed;
    report.options.module = "grassmann";
    Recorder rec(report, "grassmann");
    Rng rng(derive_seed(seed, 4));
    three_way_checks(rec, rng, n, k, probes);
    return report;
}

const std::vector<std::string>& modules() {
    static const std::vector<std::string> names{"numerics", "kernels", "rkhs", "connections", "grassmann", "cpmaps"};
    return names;
}

Report run(const Options& options) {
    const auto& names = modules();
    if (options.module != "all" && std::find(names.begin(), names.end(), options.module) == names.end()) {
        std::string list;
        for (const auto& n : names) list += " " + n;
        throw std::invalid_argument("unknown verify module '" + options.module + "'; expected all or one of:" + list);
    }
    Report report;
    report.options = options;
    const FixtureData data = make_data(options.seed);
    const std::vector<Fixture> fixtures = builtin_fixtures(options, data);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& name = names[i];
        if (options.module != "all" && options.module != name) continue;
        Rng rng(derive_seed(options.seed, i));
        Recorder rec(report, name);
        if (name == "numerics") numerics_checks(rec, rng);
        if (name == "kernels") kernels_checks(rec, rng, options, fixtures);
        if (name == "rkhs") rkhs_checks(rec, rng, fixtures);
        if (name == "connections") connections_checks(rec, rng, fixtures);
        if (name == "grassmann") grassmann_checks(rec, rng, data);
        if (name == "cpmaps") cpmaps_checks(rec, rng);
    }
    return report;
}

}  // namespace kconn::verify
