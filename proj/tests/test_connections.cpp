#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace kconn;
using fixtures::scalar_direction;
using fixtures::scalar_point;

namespace {

/// sigma(z) = z_1 on C^2 with its analytic differential.
Section first_coordinate() {
    Section sigma;
    sigma.fiber_dim = 1;
    sigma.value = [](const BasePoint& s) { return CVector::Constant(1, as_vector(s)(0)).eval(); };
    sigma.differential = [](const BasePoint&, const TangentVector& x) {
        return CVector::Constant(1, std::get<CVector>(x)(0)).eval();
    };
    return sigma;
}

CVector e1(Index d) {
    CVector v = CVector::Zero(d);
    v(0) = 1.0;
    return v;
}

}  // namespace

TEST_SUITE("connections") {

TEST_CASE("Fock connection form has a plus sign") {
    Rng rng(1);
    const Kernel k = kernels::make_fock_standard(2);
    for (int i = 0; i < 20; ++i) {
        const CVector z = rng.complex_vector(2);
        const CVector lambda = rng.complex_vector(2);
        const cplx expected = z(0) * std::conj(lambda(0)) + z(1) * std::conj(lambda(1));
        CHECK(std::abs(connections::connection_form(k, z)(lambda)(0, 0) - expected) < 1e-8);
    }
    CHECK(connections::connection_form(k, CVector(CVector::Zero(2)))(rng.complex_vector(2)).norm() < 1e-14);
}

TEST_CASE("disk connection form at s = 0.5 is +4/3") {
    const Kernel k = kernels::make_bergman_disk(2.0);
    const Section unit = constant_section(CVector::Constant(1, 1.0));
    const BasePoint s = scalar_point(0.5);
    const TangentVector one = scalar_direction(1.0);
    CHECK(std::abs(connections::connection_form(k, s)(one)(0, 0) - 4.0 / 3.0) < 1e-12);
    const cplx oracle = oracle::richardson_scalar([&](double e) {
        return k(s, scalar_point(0.5 + e))(0, 0) / k(s, s)(0, 0);
    }, 1e-4, 4);
    CHECK(std::abs(oracle - 4.0 / 3.0) < 1e-6);
    CHECK(std::abs(connections::covariant_derivative_direct(k, unit, s, one)(0) - oracle) < 1e-6);
    const auto r = rkhs::build_rkhs(
        k, [&] {
            auto pts = connections::stencil_points(k, s, one);
            pts.push_back(s);
            return pts;
        }());
    CHECK(std::abs(connections::covariant_derivative_sampled(r, unit, s, one)(0) - 4.0 / 3.0) < 1e-6);
}

TEST_CASE("half-plane connection form is nu conj(lambda) / (2i Im z)") {
    Rng rng(2);
    for (double nu : {1.0, 2.0, 3.5}) {
        const Kernel k = kernels::make_bergman_halfplane(nu);
        for (int i = 0; i < 10; ++i) {
            const BasePoint z = random_point(k.domain(), rng);
            const cplx lambda = rng.complex_normal();
            const cplx expected = nu * std::conj(lambda) / (cplx(0, 2) * fixtures::z0(z).imag());
            CHECK(std::abs(connections::connection_form(k, z)(scalar_direction(lambda))(0, 0) - expected) <
                  1e-10 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("Fock covariant derivative of the first coordinate") {
    const Kernel k = kernels::make_fock_standard(2);
    const Section sigma = first_coordinate();
    const CVector z = e1(2);
    const TangentVector lambda = e1(2);
    CHECK(std::abs(connections::covariant_derivative_closed(k, sigma, z, lambda)(0) - 2.0) < 1e-10);
    CHECK(std::abs(connections::covariant_derivative_direct(k, sigma, z, lambda)(0) - 2.0) < 1e-8);
    CHECK(std::abs(connections::sampled_evaluator(k)(sigma, z, lambda)(0) - 2.0) < 1e-6);
}

TEST_CASE("trivial covariant derivatives vanish") {
    const Kernel fock = kernels::make_fock_standard(2);
    const Section constant = constant_section(CVector::Constant(1, cplx(0.4, 2.0)));
    const CVector origin = CVector::Zero(2);
    Rng rng(3);
    CHECK(connections::covariant_derivative_direct(fock, constant, origin, rng.complex_vector(2)).norm() < 1e-10);
    const Section zero = constant_section(CVector::Zero(1));
    const Kernel disk = kernels::make_bergman_disk(2.0);
    CHECK(connections::sampled_evaluator(disk)(zero, scalar_point(0.3), scalar_direction(1.0)).norm() < 1e-14);
}

TEST_CASE("closed, direct and sampled backends agree on every built-in kernel") {
    Rng rng(4);
    for (const auto& c : fixtures::builtin_cases(5)) {
        CAPTURE(c.kernel.name());
        const auto closed = connections::closed_form_evaluator(c.kernel);
        const auto direct = connections::direct_evaluator(c.kernel);
        const auto sampled = connections::sampled_evaluator(c.kernel);
        for (const auto& pr : fixtures::probes(c.kernel, rng, 10)) {
            const CVector a = closed(c.sigma, pr.point, pr.direction);
            const CVector b = direct(c.sigma, pr.point, pr.direction);
            const CVector d = sampled(c.sigma, pr.point, pr.direction);
            CHECK((a - b).norm() < 1e-8);
            CHECK((b - d).norm() < 1e-6);
        }
    }
}

TEST_CASE("sampled backend requires the stencil points") {
    const Kernel disk = kernels::make_bergman_disk(2.0);
    const auto r = rkhs::build_rkhs(disk, {scalar_point(0.3), scalar_point(0.1)});
    CHECK_THROWS(connections::covariant_derivative_sampled(r, constant_section(CVector::Ones(1)), scalar_point(0.3),
                                                           scalar_direction(1.0)));
}

TEST_CASE("connection form is real-linear in the direction") {
    Rng rng(5);
    for (const auto& c : fixtures::builtin_cases(6)) {
        CAPTURE(c.kernel.name());
        const BasePoint s = random_point(c.kernel.domain(), rng);
        const TangentVector x = random_direction(c.kernel.domain(), s, rng);
        const TangentVector y = random_direction(c.kernel.domain(), s, rng);
        const auto form = connections::connection_form(c.kernel, s);
        const CMatrix lhs = form(1.3 * x + (-0.7) * y);
        const CMatrix rhs = 1.3 * form(x) - 0.7 * form(y);
        CHECK((lhs - rhs).norm() < 1e-10 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("singular kernel diagonal raises SingularError") {
    const Kernel rank_one = kernels::make_feature_kernel("rank-one", Domain{DomainKind::Disk, 1, 0}, 2,
                                                         [](const BasePoint& s) {
                                                             CVector a(2);
                                                             a << 1.0, fixtures::z0(s);
                                                             return a;
                                                         });
    CHECK_THROWS_AS(connections::connection_form(rank_one, scalar_point(0.2)), SingularError);
}

TEST_CASE("Leibniz rule") {
    Rng rng(6);
    const Kernel fock = kernels::make_fock_standard(3);
    const auto probes = fixtures::probes(fock, rng, 10);
    const ScalarField one = [](const BasePoint&) { return cplx(1.0); };
    const ScalarField linear = [](const BasePoint& s) { return 2.0 * as_vector(s)(1) - cplx(0, 1) * as_vector(s)(2); };
    const Section constant = constant_section(CVector::Constant(1, cplx(1.0, -0.5)));
    const auto closed = connections::closed_form_evaluator(fock);
    CHECK(connections::leibniz_residual(closed, one, fixtures::fock_section(), probes) < 1e-12);
    CHECK(connections::leibniz_residual(closed, linear, constant, probes) < 1e-8);

    const Kernel disk = kernels::make_bergman_disk(2.0);
    const ScalarField poly = [](const BasePoint& s) {
        const cplx z = fixtures::z0(s);
        return 0.3 - z + 2.0 * z * z * std::conj(z) + 0.5 * z * z * z;
    };
    const auto disk_probes = fixtures::probes(disk, rng, 30);
    for (const auto& nabla : {connections::closed_form_evaluator(disk), connections::direct_evaluator(disk),
                              connections::sampled_evaluator(disk)}) {
        CAPTURE(nabla.name);
        CHECK(connections::leibniz_residual(nabla, poly, fixtures::planar_section(), disk_probes) < 1e-6);
    }
}

TEST_CASE("parallel transport along constant curves is the identity") {
    const CVector v0 = CVector::Constant(1, cplx(0.2, 0.9));
    for (const auto& k : {kernels::make_bergman_disk(2.0), kernels::make_bergman_halfplane(1.0)}) {
        const BasePoint s = k.domain().kind == DomainKind::Disk ? scalar_point({0.3, 0.2}) : scalar_point({0.3, 1.2});
        Curve still;
        still.point = [s](double) { return s; };
        CHECK((connections::parallel_transport(k, still, v0, 8) - v0).norm() < 1e-14);
    }
    const Kernel fock = kernels::make_fock_standard(2);
    const Curve origin = line_curve(CVector::Zero(2), CVector::Zero(2));
    CHECK((connections::parallel_transport(fock, origin, v0, 4) - v0).norm() < 1e-14);
}

TEST_CASE("parallel transport matches the quadrature solution with fourth-order convergence") {
    const Kernel disk = kernels::make_bergman_disk(1.0);
    const auto alpha = [](double t) {
        const double s = 0.5 * t;
        return 0.25 * t / (1.0 - s * s);
    };
    const double exact = std::exp(-oracle::GaussLegendre(20).integrate(alpha, 0.0, 1.0));
    CHECK(std::abs(exact - std::sqrt(0.75)) < 1e-14);
    const Curve gamma = line_curve(CVector::Zero(1), CVector::Constant(1, 0.5));
    const CVector v0 = CVector::Ones(1);
    CHECK(std::abs(connections::parallel_transport(disk, gamma, v0, 256)(0) - exact) < 1e-8);
    const auto rows = connections::transport_table(disk, gamma, v0, {16, 32, 64}, CVector::Constant(1, exact));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].order == 0.0);
    CHECK(rows[1].order > 3.7);
    CHECK(rows[2].order > 3.7);
    CHECK_THROWS(connections::parallel_transport(disk, gamma, v0, 0));
}

TEST_CASE("gauge pull-back of the trivial connection is the logarithmic derivative") {
    Rng rng(7);
    const Kernel disk = kernels::make_bergman_disk(2.0);
    BundleMorphism theta;
    theta.source_domain = disk.domain();
    theta.fiber_map = [](const BasePoint& s) { return CMatrix::Constant(1, 1, 1.0 + 0.5 * fixtures::z0(s)).eval(); };
    const ConnectionFormField flat = [](const BasePoint&, const TangentVector&) { return CMatrix(CMatrix::Zero(1, 1)); };
    const auto pulled = connections::gauge_pullback_connection(theta, flat);
    std::vector<Probe> probes;
    for (int i = 0; i < 10; ++i) {
        const BasePoint s = random_point(disk.domain(), rng);
        const TangentVector x = random_direction(disk.domain(), s, rng);
        const cplx expected = 0.5 * std::get<CVector>(x)(0) / (1.0 + 0.5 * fixtures::z0(s));
        CHECK(std::abs(pulled(s, x)(0, 0) - expected) < 1e-8);
        probes.push_back({s, x});
    }
    const Section sigma = fixtures::planar_section();
    Section lifted;
    lifted.fiber_dim = 1;
    lifted.value = [theta, sigma](const BasePoint& s) { return CVector(theta.delta(s) * sigma(s)); };
    CHECK(connections::intertwining_residual(theta, connections::form_evaluator(pulled),
                                             connections::form_evaluator(flat), sigma, lifted, probes) < 1e-6);

    BundleMorphism id;
    id.source_domain = disk.domain();
    id.fiber_map = [](const BasePoint&) { return CMatrix(CMatrix::Identity(1, 1)); };
    const auto alpha = connections::connection_form_field(disk);
    const auto same = connections::gauge_pullback_connection(id, alpha);
    for (const auto& pr : probes) CHECK((same(pr.point, pr.direction) - alpha(pr.point, pr.direction)).norm() < 1e-8);
    const auto direct = connections::direct_evaluator(disk);
    CHECK(connections::intertwining_residual(id, direct, direct, sigma, sigma, probes) < 1e-12);
}

TEST_CASE("intertwining requires compatible sections") {
    const Kernel disk = kernels::make_bergman_disk(2.0);
    BundleMorphism id;
    id.source_domain = disk.domain();
    id.fiber_map = [](const BasePoint&) { return CMatrix(CMatrix::Identity(1, 1)); };
    const auto direct = connections::direct_evaluator(disk);
    const std::vector<Probe> probes{{scalar_point(0.2), scalar_direction(1.0)}};
    CHECK_THROWS(connections::intertwining_residual(id, direct, direct, fixtures::planar_section(),
                                                    constant_section(CVector::Ones(1)), probes));
}

TEST_CASE("a wrong analytic differential is caught") {
    Section sigma = fixtures::planar_section();
    sigma.differential = [](const BasePoint&, const TangentVector& x) { return std::get<CVector>(x); };
    const std::vector<Probe> probes{{scalar_point(0.2), scalar_direction(1.0)}};
    CHECK_THROWS(connections::validate_differential(sigma, probes));
    CHECK_NOTHROW(connections::validate_differential(fixtures::planar_section(), probes));
}

}  // TEST_SUITE
